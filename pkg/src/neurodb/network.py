"""Predefined neural schema and network dynamics.

Installs the unit/link type family, maintains the containment hierarchy,
and runs the ordered forward pass, the two-pass online backpropagation and
the training loop.

Transfer and training functions are resolved by name through the
containment hierarchy ("hull").  A name bound to a stored query-language
function runs interpreted; otherwise it runs as one of the native
implementations here.  Both paths compute the identical float expression
shapes (same products, same left-to-right summation order), so a network
produces the same bits whichever way its functions are bound.

The learning loop treats network *structure* (containment, orders, link
topology, function-slot bindings) as fixed for the duration of one call;
activations, deltas and weights stay live.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .errors import (
    ArityMismatch,
    CyclicContainment,
    CrossNetConnection,
    InvalidOrder,
    MissingLearnRate,
    MissingTargets,
    NameCollision,
    RowCountMismatch,
    TypeMismatch,
    UnboundData,
    UnknownFunction,
    UnknownObject,
    UnsetWeight,
)
from .osql.builtins import fexp, fpow
from .store import Database, FunctionSig
from .values import FnRef, Ref

FUNCTION_SLOTS = ("InputF", "OutputF", "ActivationF")

_SCHEMA = [
    ("NUnit", [], [("Name", "CharacterString", False)]),
    ("NEUNET", ["NUnit"], [
        ("InputData", "Real", True),
        ("CheckData", "Real", True),
        ("InputF", "FunctionRef", False),
        ("OutputF", "FunctionRef", False),
        ("ActivationF", "FunctionRef", False),
        ("LearnF", "FunctionRef", False),
        ("LearnRate", "Real", False),
        ("NeuronalUnit", ("ref", "NUnit"), True),
        ("UpdateOrder", ("tuple", (("ref", "NUnit"), "Integer")), True),
        ("LearnOrder", ("tuple", (("ref", "NUnit"), "Integer")), True),
    ]),
    ("PElement", ["NUnit"], [
        ("Activation", "Real", False),
        ("InputF", "FunctionRef", False),
        ("OutputF", "FunctionRef", False),
        ("ActivationF", "FunctionRef", False),
        # the training method is settable per element (the output layer binds
        # its own), so LearnF is declared here as well as on NEUNET
        ("LearnF", "FunctionRef", False),
        ("Predecessor", ("ref", "Link"), True),
    ]),
    ("IElement", ["PElement"], [("Order", "Integer", False)]),
    ("OElement", ["PElement"], [("Order", "Integer", False)]),
    ("Link", [], [
        ("LinkFrom", ("ref", "NUnit"), False),
        ("LinkWeight", "Real", False),
        ("LinkDelta", "Real", False),
    ]),
]


def install_schema(db: Database) -> None:
    """Register the predefined unit/link types; idempotent.

    Raises NameCollision when a user type of the same name but a different
    shape is already present.
    """
    # Link is referenced by PElement, so create it before PElement
    by_name = {name: (name, sup, fns) for name, sup, fns in _SCHEMA}
    order = ["NUnit", "NEUNET", "Link", "PElement", "IElement", "OElement"]
    for name in order:
        _, supertypes, fns = by_name[name]
        sigs = [FunctionSig(n, vt, many) for n, vt, many in fns]
        try:
            db.create_type(name, supertypes, sigs)
        except Exception as exc:
            raise NameCollision(f"predefined type {name} collides with an "
                                f"existing type: {exc}") from exc
    if _containment_hook not in db.on_set:
        db.on_set.append(_containment_hook)


def _containment_hook(db: Database, oid: int, fn: str, value) -> None:
    if fn == "NeuronalUnit":
        children = [r.oid for r in (value or []) if isinstance(r, Ref)]
        for child in children:
            if child == oid or _in_subtree(db, child, oid):
                raise CyclicContainment(
                    f"object #{oid} cannot contain #{child}: containment cycle")
        db.set_containment(oid, children)
    elif fn == "Predecessor":
        for r in (value or []):
            if isinstance(r, Ref):
                db.set_link_owner(r.oid, oid)


def _in_subtree(db: Database, root: int, target: int) -> bool:
    bag = db.objects[root].bindings.get("NeuronalUnit") or []
    for r in bag:
        if isinstance(r, Ref) and r.oid in db.objects:
            if r.oid == target or _in_subtree(db, r.oid, target):
                return True
    return False


# --- structure -----------------------------------------------------------

def containment_root(db: Database, oid: int) -> int:
    seen = set()
    while True:
        if oid in seen:
            raise CyclicContainment(f"containment cycle at #{oid}")
        seen.add(oid)
        parent = db.containment_parent(oid)
        if parent is None or parent not in db.objects:
            return oid
        oid = parent


def hull_resolve(db: Database, fn: str, oid: int):
    """Nearest binding of fn walking from the object up the containment
    hierarchy; a link starts at its owning unit.  None when nothing binds.
    """
    if oid not in db.objects:
        raise UnknownObject(f"no object #{oid}")
    start = db.link_owner(oid)
    if start is None or start not in db.objects:
        start = oid
    cur: Optional[int] = start
    seen = set()
    while cur is not None and cur in db.objects and cur not in seen:
        seen.add(cur)
        obj = db.objects[cur]
        if db.declared_for(obj, fn) is not None:
            v = db.get_value(fn, cur)
            if v is not None:
                return v
        cur = db.containment_parent(cur)
    if not any(db.declared_on_type(t, fn) for t in db.types):
        raise UnknownFunction(f"{fn} is not declared on any type")
    return None


def flatten(db: Database, oid: int, order_fn: str = "UpdateOrder",
            _path: Optional[set] = None) -> List[int]:
    """Terminal processing elements under a unit.

    Composite units expand through their member bag, sorted by the integer
    keys of `order_fn` where present; members without a key follow in bag
    insertion order.  A terminal element flattens to itself.
    """
    if oid not in db.objects:
        raise UnknownObject(f"no object #{oid}")
    if db.is_instance(oid, "PElement"):
        return [oid]
    path = _path or set()
    if oid in path:
        raise CyclicContainment(f"containment cycle at #{oid}")
    obj = db.objects[oid]
    members = [r.oid for r in (obj.bindings.get("NeuronalUnit") or [])
               if isinstance(r, Ref) and r.oid in db.objects]
    keys: Dict[int, int] = {}
    for entry in (obj.bindings.get(order_fn) or []):
        if isinstance(entry, tuple) and len(entry) == 2 and isinstance(entry[0], Ref):
            keys.setdefault(entry[0].oid, entry[1])
    with_key = sorted((m for m in members if m in keys), key=lambda m: keys[m])
    without_key = [m for m in members if m not in keys]
    out: List[int] = []
    for m in with_key + without_key:
        out.extend(flatten(db, m, order_fn, path | {oid}))
    return out


def connect(db: Database, src: int, dst: int, weight: Optional[float] = None) -> List[int]:
    """Create per-terminal links from every terminal under src to every
    terminal under dst, appended to each destination's Predecessor bag.
    Returns the new link ids in destination-major order.
    """
    for oid in (src, dst):
        if oid not in db.objects:
            raise UnknownObject(f"no object #{oid}")
        if not db.is_instance(oid, "NUnit"):
            raise TypeMismatch(f"object #{oid} is not a neural unit")
    if containment_root(db, src) != containment_root(db, dst):
        raise CrossNetConnection(
            f"#{src} and #{dst} do not belong to the same network")
    sources = flatten(db, src)
    created: List[int] = []
    for t in flatten(db, dst):
        new_links = []
        for f in sources:
            link = db.create_instance("Link", {
                "LinkFrom": Ref(f),
                "LinkWeight": weight,
                "LinkDelta": 0.0,
            })
            new_links.append(Ref(link))
            created.append(link)
        bag = db.objects[t].bindings.get("Predecessor") or []
        db.set_value("Predecessor", t, list(bag) + new_links)
    return created


def links_under(db: Database, net: int) -> List[int]:
    out = []
    for t in flatten(db, net):
        for r in (db.objects[t].bindings.get("Predecessor") or []):
            if isinstance(r, Ref) and r.oid in db.objects:
                out.append(r.oid)
    return out


def set_all_weights(db: Database, net: int, value: float) -> None:
    for link in links_under(db, net):
        db.objects[link].bindings["LinkWeight"] = float(value)
        db.objects[link].bindings["LinkDelta"] = 0.0


def random_weights(db: Database, net: int, lo: float, hi: float, seed: int) -> None:
    """Seeded uniform draws in [lo, hi), assigned in flatten order."""
    rng = random.Random(seed)
    for link in links_under(db, net):
        db.objects[link].bindings["LinkWeight"] = rng.uniform(lo, hi)
        db.objects[link].bindings["LinkDelta"] = 0.0


# --- scalar transfer functions -----------------------------------------------

def sigmoid(x: float) -> float:
    """Logistic function computed as pow(1 + exp(-x), -1); saturates to 0/1
    under 64-bit float semantics instead of raising."""
    return fpow(1.0 + fexp(-x), -1.0)


def ident(x: float) -> float:
    return x


# --- evaluation context ----------------------------------------------------------

@dataclass
class TrainCtx:
    """Per-pattern state visible to transfer and training functions."""

    input_row: Optional[Tuple[float, ...]] = None
    check_row: Optional[Tuple[float, ...]] = None
    mode: str = "paper"
    weight_snapshot: Optional[Dict[int, float]] = None
    pattern_index: int = 0
    epoch: int = 0


def apply_named(db: Database, name: str, unit: int, ctx: Optional[TrainCtx]) -> None:
    """Apply a transfer/training function by name to one unit.

    Stored query-language functions shadow the native implementations of the
    same name; this is what lets a script rebuild the built-in dynamics from
    scratch.
    """
    dsl = db.functions.get(name)
    if dsl is not None:
        from .osql.eval import call_function
        call_function(db, dsl, Ref(unit), ctx)
        return
    native = NATIVE_TRANSFER.get(name)
    if native is not None:
        native(db, unit, ctx)
        return
    raise UnknownFunction(f"no function named {name}")


def _activation(db: Database, oid: int) -> float:
    a = db.objects[oid].bindings.get("Activation")
    if a is None:
        raise TypeMismatch(f"activation of #{oid} is unset")
    return a


def _pred_links(db: Database, oid: int) -> List[int]:
    return [r.oid for r in (db.objects[oid].bindings.get("Predecessor") or [])
            if isinstance(r, Ref) and r.oid in db.objects]


def _outgoing_links(db: Database, oid: int) -> List[int]:
    src = Ref(oid)
    return [l for l in db.extent("Link")
            if db.objects[l].bindings.get("LinkFrom") == src]


def _weight(db: Database, link: int) -> float:
    w = db.objects[link].bindings.get("LinkWeight")
    if w is None:
        raise UnsetWeight(f"link #{link} has no weight")
    return w


def nat_weight_sum(db: Database, unit: int, ctx) -> None:
    total = 0.0
    for link in _pred_links(db, unit):
        bindings = db.objects[link].bindings
        src = bindings.get("LinkFrom")
        if not isinstance(src, Ref) or src.oid not in db.objects:
            continue
        w = bindings.get("LinkWeight")
        if w is None:
            raise UnsetWeight(f"link #{link} has no weight")
        total += _activation(db, src.oid) * w
    db.objects[unit].bindings["Activation"] = total


def nat_weight_sum_i(db: Database, unit: int, ctx) -> None:
    # literal form: pairs the current input row with the unit's own
    # predecessor weights; only meaningful when those lengths agree
    if ctx is None or ctx.input_row is None:
        raise UnboundData("no input row bound")
    weights = [_weight(db, l) for l in _pred_links(db, unit)]
    if len(weights) != len(ctx.input_row):
        raise ArityMismatch(
            f"input row of arity {len(ctx.input_row)} vs {len(weights)} links")
    total = 0.0
    for a, w in zip(ctx.input_row, weights):
        total += a * w
    db.objects[unit].bindings["Activation"] = total


def nat_sigmoid(db: Database, unit: int, ctx) -> None:
    db.objects[unit].bindings["Activation"] = sigmoid(_activation(db, unit))


def nat_ident(db: Database, unit: int, ctx) -> None:
    db.objects[unit].bindings["Activation"] = _activation(db, unit)


def _learn_rate(db: Database, unit: int) -> float:
    lr = hull_resolve(db, "LearnRate", unit)
    if lr is None:
        raise MissingLearnRate(f"no learn rate resolvable from #{unit}")
    return lr


def _update_weights(db: Database, unit: int, links: List[int]) -> None:
    lr = _learn_rate(db, unit)
    for link in links:
        bindings = db.objects[link].bindings
        src = bindings["LinkFrom"]
        w = bindings.get("LinkWeight")
        if w is None:
            raise UnsetWeight(f"link #{link} has no weight")
        bindings["LinkWeight"] = w + ((lr * bindings["LinkDelta"]) * _activation(db, src.oid))


def nat_backprop(db: Database, unit: int, ctx) -> None:
    """Hidden-unit training step: error term from downstream links, then the
    weight update on the incoming links."""
    links = _pred_links(db, unit)
    if not links:
        return
    a = _activation(db, unit)
    snapshot = ctx.weight_snapshot if ctx is not None else None
    total = 0.0
    for m in _outgoing_links(db, unit):
        bindings = db.objects[m].bindings
        w = snapshot[m] if snapshot is not None else bindings.get("LinkWeight")
        if w is None:
            raise UnsetWeight(f"link #{m} has no weight")
        total += bindings["LinkDelta"] * w
    delta = (total * a) * (1.0 - a)
    for link in links:
        db.objects[link].bindings["LinkDelta"] = delta
    _update_weights(db, unit, links)


def nat_backprop_o(db: Database, unit: int, ctx) -> None:
    """Output-unit training step: error term against the target value."""
    links = _pred_links(db, unit)
    if not links:
        return
    if ctx is None or ctx.check_row is None:
        raise MissingTargets(f"no target row for output unit #{unit}")
    order = db.objects[unit].bindings.get("Order")
    if order is None or not 1 <= order <= len(ctx.check_row):
        raise ArityMismatch(
            f"output unit #{unit} order {order} vs target row of "
            f"arity {len(ctx.check_row)}")
    t = ctx.check_row[order - 1]
    a = _activation(db, unit)
    delta = ((t - a) * a) * (1.0 - a)
    for link in links:
        db.objects[link].bindings["LinkDelta"] = delta
    _update_weights(db, unit, links)


NATIVE_TRANSFER = {
    "WeightSum": nat_weight_sum,
    "WeightSumI": nat_weight_sum_i,
    "Sigmoid": nat_sigmoid,
    "Ident": nat_ident,
    "BackProp": nat_backprop,
    "BackPropO": nat_backprop_o,
}


# --- ordered passes -----------------------------------------------------------

@dataclass
class _Plan:
    """Structure resolved once per pass or training run."""

    update_steps: List[tuple] = field(default_factory=list)  # (oid, input_order|None, slot names)
    learn_steps: List[tuple] = field(default_factory=list)   # (oid, fn name)
    ielems: List[int] = field(default_factory=list)
    oelems: List[Tuple[int, int]] = field(default_factory=list)  # (oid, order)
    input_arity: int = 0


def _ordered_io(db: Database, elems: List[int], what: str) -> List[Tuple[int, int]]:
    pairs = []
    for u in elems:
        order = db.objects[u].bindings.get("Order")
        if order is None:
            raise InvalidOrder(f"{what} element #{u} has no Order")
        pairs.append((u, order))
    orders = sorted(o for _, o in pairs)
    if orders != list(range(1, len(pairs) + 1)):
        raise InvalidOrder(f"{what} Order values {orders} are not 1..{len(pairs)}")
    return sorted(pairs, key=lambda p: p[1])


def _build_plan(db: Database, net: int) -> _Plan:
    plan = _Plan()
    for u in flatten(db, net, "UpdateOrder"):
        obj = db.objects[u]
        is_input = db.is_instance(u, "IElement")
        overridden = any(slot in obj.bindings for slot in FUNCTION_SLOTS)
        if is_input:
            plan.ielems.append(u)
        if is_input and not overridden:
            order = obj.bindings.get("Order")
            if order is None:
                raise InvalidOrder(f"input element #{u} has no Order")
            plan.update_steps.append((u, order, None))
        else:
            names = []
            for slot, default in (("InputF", "WeightSum"), ("OutputF", None),
                                  ("ActivationF", None)):
                bound = hull_resolve(db, slot, u)
                if bound is None:
                    if default is not None:
                        names.append(default)
                    continue
                if not isinstance(bound, FnRef):
                    raise TypeMismatch(f"{slot} of #{u} is not a function reference")
                names.append(bound.name)
            plan.update_steps.append((u, None, tuple(names)))
        if db.is_instance(u, "OElement"):
            plan.oelems.append(u)
    plan.ielems = [u for u, _ in _ordered_io(db, plan.ielems, "input")]
    plan.oelems = _ordered_io(db, plan.oelems, "output")
    plan.input_arity = len(plan.ielems)
    for u in flatten(db, net, "LearnOrder"):
        if not _pred_links(db, u):
            continue
        bound = hull_resolve(db, "LearnF", u)
        if bound is None:
            name = "BackPropO" if db.is_instance(u, "OElement") else "BackProp"
        elif isinstance(bound, FnRef):
            name = bound.name
        else:
            raise TypeMismatch(f"LearnF of #{u} is not a function reference")
        plan.learn_steps.append((u, name))
    return plan


def _forward(db: Database, plan: _Plan, row, ctx: TrainCtx) -> None:
    if len(row) != plan.input_arity:
        raise ArityMismatch(
            f"input row of arity {len(row)} vs {plan.input_arity} input elements")
    ctx.input_row = tuple(float(v) for v in row)
    for oid, input_order, names in plan.update_steps:
        if input_order is not None:
            db.objects[oid].bindings["Activation"] = ctx.input_row[input_order - 1]
        else:
            for name in names:
                apply_named(db, name, oid, ctx)


def _backward(db: Database, plan: _Plan, targets, ctx: TrainCtx) -> None:
    if targets is None:
        raise MissingTargets("no target row")
    ctx.check_row = tuple(float(v) for v in targets)
    if ctx.mode == "textbook":
        ctx.weight_snapshot = {
            l: db.objects[l].bindings.get("LinkWeight")
            for l in db.instances_of("Link")
        }
    else:
        ctx.weight_snapshot = None
    for oid, name in plan.learn_steps:
        apply_named(db, name, oid, ctx)


def forward_pass(db: Database, net: int, row, ctx: Optional[TrainCtx] = None) -> None:
    """One evaluation sweep: inputs bound by Order, every other terminal
    updated through its resolved InputF/OutputF/ActivationF chain."""
    _forward(db, _build_plan(db, net), row, ctx or TrainCtx())


def backward_pass(db: Database, net: int, row, targets, mode: str = "paper",
                  ctx: Optional[TrainCtx] = None) -> None:
    """One training sweep in learn order; forward_pass must have run for the
    same row.  In paper mode later error terms see already-updated downstream
    weights; textbook mode reads the weights saved at sweep entry."""
    if ctx is None:
        ctx = TrainCtx(mode=mode)
        ctx.input_row = tuple(float(v) for v in row)
    _backward(db, _build_plan(db, net), targets, ctx)


def evaluate(db: Database, net: int, row) -> Tuple[float, ...]:
    """Run the forward pass and return output activations in Order."""
    plan = _build_plan(db, net)
    _forward(db, plan, row, TrainCtx())
    return tuple(db.objects[u].bindings["Activation"] for u, _ in plan.oelems)


@dataclass
class LearnReport:
    epochs: int
    pattern_errors: List[float]      # summed squared output error per pattern
    mse: float                       # mean of pattern_errors, last epoch


def learn(db: Database, net: int, epochs: int, mode: str = "paper",
          report=None, report_interval: int = 100) -> LearnReport:
    """Online training: per epoch, per pattern in stream order, forward then
    backward.  Inputs and targets are materialized from the net's stream
    bindings when the call starts."""
    from . import streams

    in_rows = streams.input_rows(db, net)
    chk_rows = streams.check_rows(db, net)
    if not in_rows:
        raise UnboundData("input stream has no rows")
    if len(in_rows) != len(chk_rows):
        raise RowCountMismatch(
            f"{len(in_rows)} input rows vs {len(chk_rows)} target rows")
    for link in links_under(db, net):
        if db.objects[link].bindings.get("LinkWeight") is None:
            raise UnsetWeight(f"link #{link} has no weight")
    plan = _build_plan(db, net)
    ctx = TrainCtx(mode=mode)
    errors: List[float] = []
    mse = 0.0
    for epoch in range(1, epochs + 1):
        ctx.epoch = epoch
        errors = []
        for i, (row, tgt) in enumerate(zip(in_rows, chk_rows)):
            ctx.pattern_index = i
            _forward(db, plan, row, ctx)
            e = 0.0
            for (u, order) in plan.oelems:
                d = tgt[order - 1] - db.objects[u].bindings["Activation"]
                e += d * d
            errors.append(e)
            _backward(db, plan, tgt, ctx)
        mse = sum(errors) / len(errors)
        if report is not None and report_interval > 0 and epoch % report_interval == 0:
            report(f"epoch {epoch} mse {mse!r}")
    return LearnReport(epochs, errors, mse)
