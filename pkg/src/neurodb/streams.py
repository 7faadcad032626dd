"""Environment operators: query-bound data streams and the output modes.

Input and target data are bound to a network as stored select statements and
re-evaluated lazily on every use, so edits to the underlying data are picked
up by the next training or evaluation run.  The three output modes (return
stream, insert statement, triggered insertion) all route through the same
evaluation and therefore agree numerically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

from .errors import (
    ArityMismatch,
    NeuroDbError,
    NonNumericProjection,
    TypeMismatch,
    UnboundData,
    UnknownFunction,
    UnknownObject,
    UnknownType,
)
from .network import evaluate
from .store import Database
from .values import Ref, Stream

_MAX_TRIGGER_DEPTH = 32


def _require_net(db: Database, net: int) -> None:
    if net not in db.objects:
        raise UnknownObject(f"no object #{net}")
    if not db.is_instance(net, "NEUNET"):
        raise TypeMismatch(f"object #{net} is not a NEUNET")


def _validate_query(db: Database, query) -> None:
    from .osql import ast

    if isinstance(query, ast.SelectFrom):
        if query.type_name not in db.types:
            raise UnknownType(f"unknown type {query.type_name}")
        for fn in query.projections:
            sig = db.declared_on_type(query.type_name, fn)
            if sig is None:
                raise UnknownFunction(f"{fn} is not declared on {query.type_name}")
            if sig.value_type not in ("Real", "Integer"):
                raise NonNumericProjection(f"{fn} is not numeric")
    elif not isinstance(query, ast.SelectForEach):
        raise TypeMismatch("stream bindings take a select query")


def bind_input(db: Database, net: int, query) -> None:
    _require_net(db, net)
    _validate_query(db, query)
    db.stream_bindings.setdefault(net, {})["input"] = query


def bind_check(db: Database, net: int, query) -> None:
    _require_net(db, net)
    _validate_query(db, query)
    db.stream_bindings.setdefault(net, {})["check"] = query


def _materialize(db: Database, query) -> List[Tuple[float, ...]]:
    from .osql.eval import Runtime, eval_expr

    result = eval_expr(query, Runtime(db), {})
    rows: List[Tuple[float, ...]] = []
    arity = None
    for item in result:
        row = item if isinstance(item, tuple) else (item,)
        out = []
        for v in row:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise NonNumericProjection(f"stream value {v!r} is not numeric")
            out.append(float(v))
        if arity is None:
            arity = len(out)
        elif len(out) != arity:
            raise ArityMismatch("stream rows have mixed arity")
        rows.append(tuple(out))
    return rows


def _bound_rows(db: Database, net: int, role: str) -> List[Tuple[float, ...]]:
    _require_net(db, net)
    binding = db.stream_bindings.get(net, {}).get(role)
    if binding is None:
        raise UnboundData(f"no {role} data bound to #{net}")
    return _materialize(db, binding)


def input_rows(db: Database, net: int) -> List[Tuple[float, ...]]:
    return _bound_rows(db, net, "input")


def check_rows(db: Database, net: int) -> List[Tuple[float, ...]]:
    return _bound_rows(db, net, "check")


def input_stream(db: Database, net: int) -> Stream:
    _require_net(db, net)
    if db.stream_bindings.get(net, {}).get("input") is None:
        raise UnboundData(f"no input data bound to #{net}")
    return Stream(-1, lambda: iter(input_rows(db, net)))


def check_stream(db: Database, net: int) -> Stream:
    _require_net(db, net)
    if db.stream_bindings.get(net, {}).get("check") is None:
        raise UnboundData(f"no check data bound to #{net}")
    return Stream(-1, lambda: iter(check_rows(db, net)))


# --- output operator, three modes ------------------------------------------------

def output_return(db: Database, net: int) -> Stream:
    """Lazy stream of output rows, one per input row; re-evaluated per use."""
    _require_net(db, net)
    if db.stream_bindings.get(net, {}).get("input") is None:
        raise UnboundData(f"no input data bound to #{net}")

    def rows():
        for row in input_rows(db, net):
            yield evaluate(db, net, row)

    return Stream(-1, rows)


def output_insert(db: Database, net: int, target_type: str,
                  field_names: List[str]) -> int:
    """Materialize the output stream into instances of target_type; returns
    the inserted row count."""
    if target_type not in db.types:
        raise UnknownType(f"unknown type {target_type}")
    for fn in field_names:
        sig = db.declared_on_type(target_type, fn)
        if sig is None or sig.value_type not in ("Real", "Integer"):
            raise TypeMismatch(f"{target_type}.{fn} cannot hold an output value")
    count = 0
    for row in output_return(db, net).rows():
        if len(row) != len(field_names):
            raise ArityMismatch(f"output arity {len(row)} vs {len(field_names)} fields")
        db.create_instance(target_type, dict(zip(field_names, row)))
        count += 1
    return count


# --- triggered insertion ----------------------------------------------------------

@dataclass
class EvaluationTrigger:
    """Evaluate a net on every insert into the watched type and store the
    output row as a new instance of the target type."""

    watched: str
    net: int
    input_fns: List[str]
    target_type: str
    output_fns: List[str]
    source_fn: Optional[str] = None     # ObjectRef back to the triggering object


def register_trigger(db: Database, trigger: EvaluationTrigger) -> None:
    for t in (trigger.watched, trigger.target_type):
        if t not in db.types:
            raise UnknownType(f"unknown type {t}")
    _require_net(db, trigger.net)
    for fn in trigger.input_fns:
        if db.declared_on_type(trigger.watched, fn) is None:
            raise UnknownFunction(f"{fn} is not declared on {trigger.watched}")
    for fn in trigger.output_fns:
        if db.declared_on_type(trigger.target_type, fn) is None:
            raise UnknownFunction(f"{fn} is not declared on {trigger.target_type}")
    if trigger.source_fn is not None:
        sig = db.declared_on_type(trigger.target_type, trigger.source_fn)
        if sig is None or not (isinstance(sig.value_type, tuple)
                               and sig.value_type[0] == "ref"):
            raise TypeMismatch(f"{trigger.source_fn} cannot hold an object reference")
    db.triggers.append(trigger)
    ensure_trigger_hook(db)


def ensure_trigger_hook(db: Database) -> None:
    if _fire_triggers not in db.on_insert:
        db.on_insert.append(_fire_triggers)


def _fire_triggers(db: Database, oid: int) -> None:
    depth = getattr(db, "_trigger_depth", 0)
    if depth >= _MAX_TRIGGER_DEPTH:
        raise NeuroDbError("trigger recursion depth exceeded")
    db._trigger_depth = depth + 1
    try:
        for trigger in list(db.triggers):
            if oid not in db.objects or not db.is_instance(oid, trigger.watched):
                continue
            obj = db.objects[oid]
            row = []
            for fn in trigger.input_fns:
                v = obj.bindings.get(fn)
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise ArityMismatch(
                        f"insert into {trigger.watched} lacks numeric {fn}")
                row.append(float(v))
            out = evaluate(db, trigger.net, tuple(row))
            if len(out) != len(trigger.output_fns):
                raise ArityMismatch(
                    f"output arity {len(out)} vs {len(trigger.output_fns)} fields")
            inits = dict(zip(trigger.output_fns, out))
            if trigger.source_fn is not None:
                inits[trigger.source_fn] = Ref(oid)
            db.create_instance(trigger.target_type, inits)
    finally:
        db._trigger_depth = depth
