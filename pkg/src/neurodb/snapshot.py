"""Versioned JSON snapshots.

The document is UTF-8 JSON with lexicographically sorted keys, so saving
the same state twice yields identical bytes.  Reals are serialized as
shortest round-trip decimal strings (repr) to guarantee bit-exact reload.
Query-language functions and stream bindings are stored as source text and
reparsed on load.
"""

from __future__ import annotations

import json
from typing import Any

from .errors import CorruptSnapshot, FormatVersionMismatch, IoError
from .store import Database, FunctionSig, ObjectInstance, TypeDef
from .values import FnRef, Ref

FORMAT_VERSION = 1


def _enc_value(v) -> Any:
    if v is None or isinstance(v, (int, str)) and not isinstance(v, bool):
        return v
    if isinstance(v, float):
        return ["r", repr(v)]
    if isinstance(v, Ref):
        return ["ref", v.oid]
    if isinstance(v, FnRef):
        return ["fn", v.name]
    if isinstance(v, tuple):
        return ["t", [_enc_value(x) for x in v]]
    if isinstance(v, list):
        return ["b", [_enc_value(x) for x in v]]
    raise IoError(f"value {v!r} is not snapshotable")


def _dec_value(v) -> Any:
    if v is None or isinstance(v, (int, str)):
        return v
    if isinstance(v, list) and len(v) == 2 and v[0] == "r":
        return float(v[1])
    if isinstance(v, list) and len(v) == 2 and v[0] == "ref":
        return Ref(v[1])
    if isinstance(v, list) and len(v) == 2 and v[0] == "fn":
        return FnRef(v[1])
    if isinstance(v, list) and len(v) == 2 and v[0] == "t":
        return tuple(_dec_value(x) for x in v[1])
    if isinstance(v, list) and len(v) == 2 and v[0] == "b":
        return [_dec_value(x) for x in v[1]]
    raise CorruptSnapshot(f"bad value encoding {v!r}")


def _enc_vt(vt) -> Any:
    if isinstance(vt, tuple) and vt[0] == "ref":
        return ["ref", vt[1]]
    if isinstance(vt, tuple) and vt[0] == "tuple":
        return ["tuple", [_enc_vt(e) for e in vt[1]]]
    return vt


def _dec_vt(vt) -> Any:
    if isinstance(vt, str):
        return vt
    if isinstance(vt, list) and len(vt) == 2 and vt[0] == "ref":
        return ("ref", vt[1])
    if isinstance(vt, list) and len(vt) == 2 and vt[0] == "tuple":
        return ("tuple", tuple(_dec_vt(e) for e in vt[1]))
    raise CorruptSnapshot(f"bad value-type encoding {vt!r}")


def dumps(db: Database) -> str:
    doc = {
        "format_version": FORMAT_VERSION,
        "next_oid": db.next_oid,
        "types": [
            {
                "name": td.name,
                "supertypes": list(td.supertypes),
                "functions": [
                    {"name": f.name, "value_type": _enc_vt(f.value_type),
                     "multivalued": f.multivalued, "kind": f.kind}
                    for f in td.functions
                ],
                "type_defaults": {k: _enc_value(v) for k, v in td.type_defaults.items()},
            }
            for td in db.types.values()
        ],
        "objects": [
            {
                "oid": obj.oid,
                "types": list(obj.types),
                "bindings": {k: _enc_value(v) for k, v in obj.bindings.items()},
            }
            for obj in db.objects.values()
        ],
        "names": dict(db.names),
        "functions": {name: fn.source() for name, fn in db.functions.items()},
        "streams": {
            str(oid): {role: q.src() for role, q in roles.items() if q is not None}
            for oid, roles in db.stream_bindings.items() if roles
        },
        "triggers": [
            {"watched": t.watched, "net": t.net, "input_fns": list(t.input_fns),
             "target_type": t.target_type, "output_fns": list(t.output_fns),
             "source_fn": t.source_fn}
            for t in db.triggers
        ],
    }
    return json.dumps(doc, sort_keys=True, indent=1)


def save_snapshot(db: Database, path: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(dumps(db))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def loads(text: str) -> Database:
    from . import network, streams
    from .osql import ast
    from .osql.eval import DslFunction
    from .osql.parser import parse_statement

    try:
        doc = json.loads(text)
    except (ValueError, TypeError) as exc:
        raise CorruptSnapshot(f"not a snapshot: {exc}") from exc
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise CorruptSnapshot("missing format_version")
    if doc["format_version"] != FORMAT_VERSION:
        raise FormatVersionMismatch(
            f"snapshot version {doc['format_version']}, supported {FORMAT_VERSION}")
    db = Database()
    try:
        for td in doc["types"]:
            db.types[td["name"]] = TypeDef(
                td["name"], list(td["supertypes"]),
                [FunctionSig(f["name"], _dec_vt(f["value_type"]),
                             f["multivalued"], f.get("kind", "stored"))
                 for f in td["functions"]],
                {k: _dec_value(v) for k, v in td["type_defaults"].items()},
            )
            db._extents.setdefault(td["name"], [])
        for od in doc["objects"]:
            obj = ObjectInstance(od["oid"], list(od["types"]),
                                 {k: _dec_value(v) for k, v in od["bindings"].items()})
            db.objects[obj.oid] = obj
        db.next_oid = doc["next_oid"]
        db.names = {k: v for k, v in doc["names"].items()}
        for name, src in doc["functions"].items():
            stmt = parse_statement(src)
            if not isinstance(stmt, ast.CreateFunction):
                raise CorruptSnapshot(f"stored function {name} is not a function")
            db.functions[name] = DslFunction(stmt)
        for oid_str, roles in doc.get("streams", {}).items():
            entry = {}
            for role, src in roles.items():
                stmt = parse_statement(f"Select {src};")
                entry[role] = stmt.expr
            db.stream_bindings[int(oid_str)] = entry
        for td in doc.get("triggers", []):
            db.triggers.append(streams.EvaluationTrigger(
                td["watched"], td["net"], list(td["input_fns"]),
                td["target_type"], list(td["output_fns"]), td.get("source_fn")))
        _rebuild_indexes(db)
    except CorruptSnapshot:
        raise
    except FormatVersionMismatch:
        raise
    except Exception as exc:
        raise CorruptSnapshot(f"malformed snapshot: {exc}") from exc
    if "NUnit" in db.types:
        if network._containment_hook not in db.on_set:
            db.on_set.append(network._containment_hook)
    if db.triggers:
        streams.ensure_trigger_hook(db)
    return db


def load_snapshot(path: str) -> Database:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    return loads(text)


def _rebuild_indexes(db: Database) -> None:
    import bisect

    for obj in db.objects.values():
        for t in set(c for tn in obj.types for c in db.closure(tn)):
            bisect.insort(db._extents.setdefault(t, []), obj.oid)
    for obj in db.objects.values():
        bag = obj.bindings.get("NeuronalUnit")
        if isinstance(bag, list):
            db.set_containment(obj.oid, [r.oid for r in bag
                                         if isinstance(r, Ref) and r.oid in db.objects])
        preds = obj.bindings.get("Predecessor")
        if isinstance(preds, list):
            for r in preds:
                if isinstance(r, Ref) and r.oid in db.objects:
                    db._link_owner[r.oid] = obj.oid
