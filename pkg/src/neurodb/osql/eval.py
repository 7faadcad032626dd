"""Statement executor and expression evaluator.

Expressions compile to closures once and run many times; the bodies of
stored query-language functions are compiled at registration since they
execute once per unit per training pattern.

Name resolution order for a bare identifier: local environment (loop
variables, the function parameter, the current InputData/CheckData rows),
then instance handles, then known function names (as function references).

A where clause is a conjunction of `x in (set)` and `a = b` conditions; an
equality whose left side is an unbound name binds that name to the right
side's value for the current element instead of testing.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable, List, Optional

from .. import network, paradigms, streams
from ..errors import (
    ArityMismatch,
    NameCollision,
    RecursiveFunctionCall,
    TypeMismatch,
    UnknownFunction,
    UnknownIdentifier,
    UnknownObject,
    UnknownType,
)
from ..store import Database, FunctionSig
from ..values import FnRef, Ref, Stream
from . import ast
from .builtins import REGISTRY


@dataclass
class ExecConfig:
    mode: str = "paper"               # paper | textbook backward-pass semantics
    report_interval: int = 100
    report: Optional[Callable[[str], None]] = None
    base_dir: Optional[str] = None    # resolves relative Import paths


class Runtime:
    """Per-statement evaluation state."""

    __slots__ = ("db", "ctx", "stack")

    def __init__(self, db: Database, ctx=None):
        self.db = db
        self.ctx = ctx
        self.stack: List[str] = []      # active user-function calls


class DslFunction:
    """A stored query-language function: one parameter, a body of Set
    statements executed strictly in order."""

    def __init__(self, decl: ast.CreateFunction):
        self.decl = decl
        self._steps = None

    @property
    def name(self):
        return self.decl.name

    def steps(self):
        if self._steps is None:
            self._steps = [compile_stmt_set(s) for s in self.decl.body]
        return self._steps

    def source(self) -> str:
        return self.decl.src()


_RESERVED_FN_NAMES = frozenset(REGISTRY) | {"random_weights"}


def register_function(db: Database, decl: ast.CreateFunction) -> DslFunction:
    if decl.name in _RESERVED_FN_NAMES:
        raise NameCollision(f"{decl.name} is a builtin function")
    fn = DslFunction(decl)
    db.functions[decl.name] = fn
    return fn


def call_function(db: Database, fn: DslFunction, arg: Ref, ctx=None) -> None:
    rt = Runtime(db, ctx)
    _call_dsl(rt, fn, arg)


def _call_dsl(rt: Runtime, fn: DslFunction, arg) -> None:
    if not isinstance(arg, Ref):
        raise TypeMismatch(f"{fn.name} expects an object argument")
    ptype = fn.decl.param_type
    if ptype not in rt.db.types:
        raise UnknownType(f"unknown parameter type {ptype}")
    if not rt.db.is_instance(arg.oid, ptype):
        raise TypeMismatch(f"{fn.name} expects a {ptype} argument")
    if fn.name in rt.stack:
        raise RecursiveFunctionCall(f"{fn.name} calls itself")
    env = {fn.decl.param: arg}
    ctx = rt.ctx
    if ctx is not None:
        if ctx.input_row is not None:
            env["InputData"] = ctx.input_row
        if ctx.check_row is not None:
            env["CheckData"] = ctx.check_row
    rt.stack.append(fn.name)
    try:
        for step in fn.steps():
            step(rt, env)
    finally:
        rt.stack.pop()


# --- value helpers -------------------------------------------------------------

def _scalar(v):
    """Unwrap single-element bags; a one-row select usable as a scalar."""
    while isinstance(v, list):
        if len(v) != 1:
            raise TypeMismatch(f"expected a single value, got {len(v)} values")
        v = v[0]
    return v


def _number(v):
    v = _scalar(v)
    if v is None:
        raise TypeMismatch("null value in arithmetic")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise TypeMismatch(f"arithmetic on non-numeric value {v!r}")
    return v


def _values_equal(a, b) -> bool:
    a = _scalar(a)
    b = _scalar(b)
    if a is None or b is None:
        return False
    return a == b


def _iter_coll(v):
    if isinstance(v, (list, tuple)):
        return list(v)
    if isinstance(v, Stream):
        return v.rows()
    raise TypeMismatch(f"expected a collection, got {v!r}")


# --- expression compiler ----------------------------------------------------------

def compile_expr(node: ast.Node):
    if isinstance(node, ast.Lit):
        v = node.value
        return lambda rt, env: v
    if isinstance(node, ast.Name):
        return _compile_name(node.ident)
    if isinstance(node, ast.Neg):
        f = compile_expr(node.operand)
        return lambda rt, env: -_number(f(rt, env))
    if isinstance(node, ast.Bin):
        return _compile_bin(node)
    if isinstance(node, ast.ListExpr):
        fs = [compile_expr(x) for x in node.items]
        return lambda rt, env: [f(rt, env) for f in fs]
    if isinstance(node, ast.Apply):
        name = node.fn
        argfs = [compile_expr(a) for a in node.args]
        if len(argfs) == 1:
            a0 = argfs[0]
            return lambda rt, env: _apply(rt, env, name, (a0(rt, env),))
        return lambda rt, env: _apply(rt, env, name, [f(rt, env) for f in argfs])
    if isinstance(node, ast.HullApply):
        name = node.fn
        argf = compile_expr(node.arg)
        def hull(rt, env):
            target = _scalar(argf(rt, env))
            if not isinstance(target, Ref):
                raise TypeMismatch(f"{name}(Hull ...) expects an object")
            return _hull_value(rt, name, target.oid)
        return hull
    if isinstance(node, ast.InExpr):
        itemf = compile_expr(node.item)
        collf = compile_expr(node.coll)
        return lambda rt, env: any(
            _values_equal(itemf(rt, env), e) for e in _iter_coll(collf(rt, env)))
    if isinstance(node, ast.SelectForEach):
        return _compile_select_foreach(node)
    if isinstance(node, ast.SelectFrom):
        return _compile_select_from(node)
    raise TypeMismatch(f"cannot evaluate {type(node).__name__}")


def eval_expr(node: ast.Node, rt: Runtime, env: dict):
    return compile_expr(node)(rt, env)


def _compile_name(name: str):
    def run(rt, env):
        if name in env:
            return env[name]
        oid = rt.db.lookup_name(name)
        if oid is not None:
            return Ref(oid)
        if name in rt.db.names:
            raise UnknownObject(f"{name} refers to a deleted object")
        if (name in rt.db.functions or name in network.NATIVE_TRANSFER
                or name in REGISTRY):
            return FnRef(name)
        raise UnknownIdentifier(f"unknown identifier {name}")
    return run


def _compile_bin(node: ast.Bin):
    lf = compile_expr(node.left)
    rf = compile_expr(node.right)
    op = node.op
    if op == "+":
        return lambda rt, env: _number(lf(rt, env)) + _number(rf(rt, env))
    if op == "-":
        return lambda rt, env: _number(lf(rt, env)) - _number(rf(rt, env))
    if op == "*":
        return lambda rt, env: _number(lf(rt, env)) * _number(rf(rt, env))
    if op == "/":
        return lambda rt, env: _number(lf(rt, env)) / _number(rf(rt, env))
    raise TypeMismatch(f"unknown operator {op}")


_MISSING_BINDING = object()
_NET_DATA_FNS = ("InputData", "CheckData", "OutputData")


def _apply(rt: Runtime, env: dict, name: str, args: list):
    db = rt.db
    if len(args) == 1 and type(args[0]) is Ref:
        ref = args[0]
        obj = db.objects.get(ref.oid)
        if obj is None:
            raise UnknownObject(f"no object {ref}")
        if name in _NET_DATA_FNS and db.is_instance(ref.oid, "NEUNET"):
            return _net_data(rt, name, ref.oid)
        if db.declared_for(obj, name) is not None:
            b = obj.bindings.get(name, _MISSING_BINDING)
            if b is not _MISSING_BINDING:
                t = type(b)
                if t is float or t is int or t is str or t is FnRef or b is None:
                    return b
                return db.scrub(b)
            return db.get_value(name, ref.oid)
        if db.is_link_like(obj):
            # unit functions applied to a link resolve via its owning unit
            owner = db.link_owner(ref.oid)
            if owner is not None and owner in db.objects:
                if db.declared_for(db.objects[owner], name) is not None:
                    return db.get_value(name, owner)
    builtin = REGISTRY.get(name)
    if builtin is not None:
        impl, arity = builtin
        if len(args) != arity:
            raise ArityMismatch(f"{name} takes {arity} argument(s), got {len(args)}")
        return impl(*args)
    dsl = db.functions.get(name)
    if dsl is not None:
        if len(args) != 1:
            raise ArityMismatch(f"{name} takes 1 argument, got {len(args)}")
        _call_dsl(rt, dsl, _scalar(args[0]))
        return None
    if name in network.NATIVE_TRANSFER:
        target = _scalar(args[0]) if len(args) == 1 else None
        if not isinstance(target, Ref):
            raise TypeMismatch(f"{name} expects one unit argument")
        network.NATIVE_TRANSFER[name](db, target.oid, rt.ctx)
        return None
    raise UnknownFunction(f"no function named {name}")


def _net_data(rt: Runtime, name: str, net: int):
    db = rt.db
    if name == "OutputData":
        return streams.output_return(db, net)
    role = "input" if name == "InputData" else "check"
    if rt.ctx is not None:
        row = rt.ctx.input_row if role == "input" else rt.ctx.check_row
        if row is not None:
            return row
    if db.stream_bindings.get(net, {}).get(role) is not None:
        return streams.input_stream(db, net) if role == "input" \
            else streams.check_stream(db, net)
    return db.get_value(name, net)


def _hull_value(rt: Runtime, name: str, oid: int):
    db = rt.db
    if name in ("InputData", "CheckData"):
        if rt.ctx is not None:
            row = rt.ctx.input_row if name == "InputData" else rt.ctx.check_row
            if row is not None:
                return row
        # outside a training step: nearest enclosing net with that binding
        role = "input" if name == "InputData" else "check"
        cur = db.link_owner(oid) or oid
        while cur is not None and cur in db.objects:
            if db.stream_bindings.get(cur, {}).get(role) is not None:
                return streams.input_stream(db, cur) if role == "input" \
                    else streams.check_stream(db, cur)
            cur = db.containment_parent(cur)
    return network.hull_resolve(db, name, oid)


# --- for-each machinery -----------------------------------------------------------

_MISSING = object()


def _free_names(node: ast.Node, out: set) -> None:
    """Conservative over-approximation of identifiers an expression reads
    (inner select variables are not subtracted)."""
    if isinstance(node, ast.Name):
        out.add(node.ident)
    elif isinstance(node, ast.Apply):
        for a in node.args:
            _free_names(a, out)
    elif isinstance(node, (ast.HullApply, ast.Neg)):
        _free_names(node.arg if isinstance(node, ast.HullApply) else node.operand, out)
    elif isinstance(node, ast.Bin):
        _free_names(node.left, out)
        _free_names(node.right, out)
    elif isinstance(node, ast.ListExpr):
        for x in node.items:
            _free_names(x, out)
    elif isinstance(node, (ast.InExpr, ast.InCond)):
        _free_names(node.item, out)
        _free_names(node.coll, out)
    elif isinstance(node, ast.EqCond):
        _free_names(node.left, out)
        _free_names(node.right, out)
    elif isinstance(node, ast.SelectForEach):
        for p in node.projections:
            _free_names(p, out)
        for c in node.conds:
            _free_names(c, out)


def _compile_loop(type_name: str, var: str, conds):
    """Build runner(rt, env, visit): iterate candidate objects, apply the
    where conditions, call visit for each passing element.

    The first `var in (...)` condition supplies the iteration domain (order
    and duplicates preserved); without one the domain is every instance of
    the declared type in id order.  An equality pinning the loop variable to
    an expression that does not mention it reduces the domain to that single
    candidate (same result as the full scan).
    """
    domain_f = None
    eq_domain_f = None
    others = []
    for cond in conds:
        if (domain_f is None and isinstance(cond, ast.InCond)
                and isinstance(cond.item, ast.Name) and cond.item.ident == var):
            domain_f = compile_expr(cond.coll)
            continue
        if (domain_f is None and eq_domain_f is None
                and isinstance(cond, ast.EqCond)
                and isinstance(cond.left, ast.Name) and cond.left.ident == var):
            free: set = set()
            _free_names(cond.right, free)
            if var not in free:
                eq_domain_f = compile_expr(cond.right)
                continue
        others.append(_compile_cond(cond))

    def runner(rt, env, visit):
        db = rt.db
        if type_name not in db.types:
            raise UnknownType(f"unknown type {type_name}")
        if domain_f is not None:
            elements = [e for e in _iter_coll(domain_f(rt, env))
                        if type(e) is Ref and db.is_instance(e.oid, type_name)]
        elif eq_domain_f is not None:
            v = _scalar(eq_domain_f(rt, env))
            if type(v) is Ref and db.is_instance(v.oid, type_name):
                elements = (v,)
            else:
                elements = ()
        else:
            elements = [Ref(o) for o in db.extent(type_name)]
        saved = env.get(var, _MISSING)
        try:
            for e in elements:
                env[var] = e
                bound: List[str] = []
                ok = True
                try:
                    for cond in others:
                        if not cond(rt, env, bound):
                            ok = False
                            break
                    if ok:
                        visit(rt, env)
                finally:
                    for nm in bound:
                        del env[nm]
        finally:
            if saved is _MISSING:
                env.pop(var, None)
            else:
                env[var] = saved

    return runner


def _compile_cond(cond):
    if isinstance(cond, ast.InCond):
        itemf = compile_expr(cond.item)
        collf = compile_expr(cond.coll)
        def test_in(rt, env, bound):
            item = itemf(rt, env)
            return any(_values_equal(item, e) for e in _iter_coll(collf(rt, env)))
        return test_in
    if isinstance(cond, ast.EqCond):
        bind_name = cond.left.ident if isinstance(cond.left, ast.Name) else None
        leftf = compile_expr(cond.left)
        rightf = compile_expr(cond.right)
        def test_eq(rt, env, bound):
            if bind_name is not None and bind_name not in env:
                env[bind_name] = rightf(rt, env)
                bound.append(bind_name)
                return True
            return _values_equal(leftf(rt, env), rightf(rt, env))
        return test_eq
    raise TypeMismatch(f"bad condition {type(cond).__name__}")


def _compile_select_foreach(node: ast.SelectForEach):
    runner = _compile_loop(node.type_name, node.var, node.conds)
    projfs = [compile_expr(p) for p in node.projections]
    single = projfs[0] if len(projfs) == 1 else None

    def run(rt, env):
        out = []
        if single is not None:
            def visit(rt, env):
                v = single(rt, env)
                if isinstance(v, list):
                    out.extend(v)
                else:
                    out.append(v)
        else:
            def visit(rt, env):
                out.append(tuple(f(rt, env) for f in projfs))
        runner(rt, env, visit)
        return out

    return run


def _compile_select_from(node: ast.SelectFrom):
    type_name = node.type_name
    fns = node.projections

    def run(rt, env):
        db = rt.db
        if type_name not in db.types:
            raise UnknownType(f"unknown type {type_name}")
        for fn in fns:
            if db.declared_on_type(type_name, fn) is None:
                raise UnknownFunction(f"{fn} is not declared on {type_name}")
        return [tuple(db.get_value(fn, o) for fn in fns)
                for o in db.instances_of(type_name)]

    return run


# --- statement execution ------------------------------------------------------------

def compile_stmt_set(stmt: ast.SetStmt):
    """Compile a Set statement (the only form allowed in function bodies)."""
    fn = stmt.fn
    valuef = compile_expr(stmt.value)
    targetf = compile_expr(stmt.target)
    if stmt.foreach is None:
        def run(rt, env):
            target = _scalar(targetf(rt, env))
            if not isinstance(target, Ref):
                raise TypeMismatch(f"Set {fn}(...) needs an object target")
            rt.db.set_value(fn, target.oid, valuef(rt, env))
        return run
    runner = _compile_loop(stmt.foreach.type_name, stmt.foreach.var,
                           stmt.foreach.conds)

    def run_loop(rt, env):
        def visit(rt, env):
            value = valuef(rt, env)
            target = _scalar(targetf(rt, env))
            if not isinstance(target, Ref):
                raise TypeMismatch(f"Set {fn}(...) needs an object target")
            rt.db.set_value(fn, target.oid, value)
        runner(rt, env, visit)

    return run_loop


def _value_for_sig(rt: Runtime, sig: FunctionSig, node: ast.Node):
    """Evaluate a right-hand side under the declared signature: identifiers
    assigned to function-valued slots become function references, and a
    single value assigned to a multivalued function becomes a one-element
    bag (the `Set Predecessor(Hidden) = Output` idiom)."""
    if sig.value_type == "FunctionRef":
        if not sig.multivalued and isinstance(node, ast.Name):
            return FnRef(node.ident)
        if sig.multivalued and isinstance(node, ast.ListExpr) \
                and all(isinstance(x, ast.Name) for x in node.items):
            return [FnRef(x.ident) for x in node.items]
    v = eval_expr(node, rt, {})
    if sig.multivalued and v is not None and not isinstance(v, list):
        return [v]
    return v


def exec_statement(stmt: ast.Stmt, db: Database, config: Optional[ExecConfig] = None):
    """Execute one statement; returns a value for Select/Import, else None."""
    config = config or ExecConfig()
    rt = Runtime(db)

    if isinstance(stmt, ast.CreateType):
        sigs = [FunctionSig(d.name, d.value_type, d.many) for d in stmt.decls]
        db.create_type(stmt.name, list(stmt.supertypes), sigs)
        return None

    if isinstance(stmt, ast.CreateInstance):
        if stmt.type_name not in db.types:
            raise UnknownType(f"unknown type {stmt.type_name}")
        if len(stmt.fns) != len(stmt.args):
            raise ArityMismatch(
                f"{len(stmt.fns)} function(s) but {len(stmt.args)} value(s)")
        if db.lookup_name(stmt.name) is not None:
            raise NameCollision(f"name {stmt.name} is already bound")
        inits = {}
        for fname, argnode in zip(stmt.fns, stmt.args):
            sig = db.declared_on_type(stmt.type_name, fname)
            if sig is None:
                raise UnknownFunction(f"{fname} is not declared on {stmt.type_name}")
            inits[fname] = _value_for_sig(rt, sig, argnode)
        oid = db.create_instance(stmt.type_name, inits)
        db.bind_name(stmt.name, oid)
        return None

    if isinstance(stmt, ast.CreateFunction):
        register_function(db, stmt)
        return None

    if isinstance(stmt, ast.SetStmt):
        return _exec_set(rt, stmt)

    if isinstance(stmt, ast.ConnectStmt):
        src = _ref_of(rt, stmt.source)
        for t in stmt.targets:
            network.connect(db, src, _ref_of(rt, t))
        return None

    if isinstance(stmt, ast.AddTypeStmt):
        db.add_type(_ref_of(rt, stmt.target), stmt.type_name)
        return None

    if isinstance(stmt, ast.LearnStmt):
        net = _ref_of(rt, stmt.net)
        network.learn(db, net, stmt.epochs, mode=config.mode,
                      report=config.report,
                      report_interval=config.report_interval)
        return None

    if isinstance(stmt, ast.SelectStmt):
        return eval_expr(stmt.expr, rt, {})

    if isinstance(stmt, ast.ImportStmt):
        from ..csvio import import_csv
        path = stmt.path
        if config.base_dir and not os.path.isabs(path):
            path = os.path.join(config.base_dir, path)
        return import_csv(db, path, stmt.type_name)

    if isinstance(stmt, ast.CallStmt):
        macro = paradigms.MACROS.get(stmt.name)
        if macro is not None:
            macro(rt, stmt.args)
            return None
        args = [eval_expr(a, rt, {}) for a in stmt.args]
        return _apply(rt, {}, stmt.name, args)

    raise TypeMismatch(f"cannot execute {type(stmt).__name__}")


def _ref_of(rt: Runtime, node: ast.Node) -> int:
    v = _scalar(eval_expr(node, rt, {}))
    if not isinstance(v, Ref):
        raise TypeMismatch("expected an object reference")
    if v.oid not in rt.db.objects:
        raise UnknownObject(f"no object {v}")
    return v.oid


def _exec_set(rt: Runtime, stmt: ast.SetStmt):
    db = rt.db
    if stmt.foreach is not None:
        compile_stmt_set(stmt)(rt, {})
        return None
    if stmt.fn == "Weight":
        # `Set Weight(net) = v` initializes every link weight under the net
        net = _ref_of(rt, stmt.target)
        if not db.is_instance(net, "NUnit"):
            raise TypeMismatch("Weight initialization needs a neural unit")
        if isinstance(stmt.value, ast.Apply) and stmt.value.fn == "random_weights":
            if len(stmt.value.args) != 3:
                raise ArityMismatch("random_weights takes lo, hi, seed")
            lo, hi, seed = (eval_expr(a, rt, {}) for a in stmt.value.args)
            network.random_weights(db, net, float(lo), float(hi), int(seed))
            return None
        v = _scalar(eval_expr(stmt.value, rt, {}))
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise TypeMismatch("weight initialization needs a number")
        network.set_all_weights(db, net, float(v))
        return None
    if stmt.fn in ("InputData", "CheckData") \
            and isinstance(stmt.value, (ast.SelectFrom, ast.SelectForEach)):
        net = _ref_of(rt, stmt.target)
        if stmt.fn == "InputData":
            streams.bind_input(db, net, stmt.value)
        else:
            streams.bind_check(db, net, stmt.value)
        return None
    target = _ref_of(rt, stmt.target)
    sig = db.declared_for(db.objects[target], stmt.fn)
    if sig is None:
        raise UnknownFunction(f"{stmt.fn} is not declared on object #{target}")
    db.set_value(stmt.fn, target, _value_for_sig(rt, sig, stmt.value))
    return None
