"""Predefined backpropagation paradigm and the network-building macros.

Adding the BPN type to a net makes the whole feedforward/backprop dynamic
resolvable through type defaults alone; InitializeNeuralNet and LayerSize
then rebuild a fully connected three-layer net in a handful of statements.
"""

from __future__ import annotations

from typing import List

from .errors import (
    AlreadyInitialized,
    LayerNotEmpty,
    TypeMismatch,
    UnknownLayer,
)
from .network import connect
from .store import Database
from .values import FnRef, Ref

LAYER_NAMES = ("Input", "Hidden", "Output")


def install(db: Database) -> None:
    """Register the BPN paradigm type; idempotent."""
    if "BPN" not in db.types:
        db.create_type("BPN", ["NEUNET"], [], type_defaults={
            "InputF": FnRef("WeightSum"),
            "OutputF": FnRef("Ident"),
            "ActivationF": FnRef("Sigmoid"),
            "LearnF": FnRef("BackProp"),
        })
    # output elements default to the output-layer training rule
    db.types["OElement"].type_defaults.setdefault("LearnF", FnRef("BackPropO"))


def initialize_neural_net(db: Database, net: int) -> None:
    """Create empty Input/Hidden/Output layers inside a BPN net, with update
    order 1..3 and learn order 3..1."""
    if not db.is_instance(net, "BPN"):
        raise TypeMismatch(f"object #{net} does not have type BPN")
    if db.objects[net].bindings.get("NeuronalUnit"):
        raise AlreadyInitialized(f"net #{net} already has layers")
    layers = []
    for name in LAYER_NAMES:
        layers.append(db.create_instance("NEUNET", {"Name": name}))
    refs = [Ref(o) for o in layers]
    db.set_value("NeuronalUnit", net, refs)
    db.set_value("UpdateOrder", net, [(r, i + 1) for i, r in enumerate(refs)])
    db.set_value("LearnOrder", net, [(r, len(refs) - i) for i, r in enumerate(refs)])


def _find_layer(db: Database, net: int, layer: str) -> int:
    for r in (db.objects[net].bindings.get("NeuronalUnit") or []):
        if isinstance(r, Ref) and r.oid in db.objects:
            if db.objects[r.oid].bindings.get("Name") == layer:
                return r.oid
    raise UnknownLayer(f"net #{net} has no layer named {layer}")


_ELEMENT_TYPE = {"Input": "IElement", "Hidden": "PElement", "Output": "OElement"}


def layer_size(db: Database, net: int, layer: str, n: int) -> None:
    """Populate a layer with n elements; once all three layers are populated,
    connect every earlier layer to every later one with weight 0.0."""
    if n < 1:
        raise TypeMismatch(f"layer size must be >= 1, got {n}")
    if layer not in _ELEMENT_TYPE:
        raise UnknownLayer(f"no predefined layer named {layer}")
    target = _find_layer(db, net, layer)
    if db.objects[target].bindings.get("NeuronalUnit"):
        raise LayerNotEmpty(f"layer {layer} of #{net} is already populated")
    elem_type = _ELEMENT_TYPE[layer]
    members: List[Ref] = []
    for i in range(1, n + 1):
        inits = {"Name": f"{layer}{i}"}
        if elem_type in ("IElement", "OElement"):
            inits["Order"] = i
        members.append(Ref(db.create_instance(elem_type, inits)))
    db.set_value("NeuronalUnit", target, members)
    layer_ids = [_find_layer(db, net, name) for name in LAYER_NAMES]
    if all(db.objects[l].bindings.get("NeuronalUnit") for l in layer_ids):
        for i, src in enumerate(layer_ids):
            for dst in layer_ids[i + 1:]:
                connect(db, src, dst, 0.0)


def macro_initialize(rt, args) -> None:
    if len(args) != 1:
        raise TypeMismatch("InitializeNeuralNet takes one net argument")
    initialize_neural_net(rt.db, _net_arg(rt, args[0]))


def macro_layer_size(rt, args) -> None:
    from .osql import ast
    from .osql.eval import eval_expr

    if len(args) != 3:
        raise TypeMismatch("LayerSize takes net, layer name and size")
    net = _net_arg(rt, args[0])
    if isinstance(args[1], ast.Name):
        layer = args[1].ident
    elif isinstance(args[1], ast.Lit) and isinstance(args[1].value, str):
        layer = args[1].value
    else:
        raise TypeMismatch("layer name must be an identifier")
    n = eval_expr(args[2], rt, {})
    if isinstance(n, bool) or not isinstance(n, int):
        raise TypeMismatch("layer size must be an integer")
    layer_size(rt.db, net, layer, n)


def _net_arg(rt, node) -> int:
    from .osql.eval import eval_expr

    v = eval_expr(node, rt, {})
    if not isinstance(v, Ref):
        raise TypeMismatch("expected a net reference")
    return v.oid


MACROS = {
    "InitializeNeuralNet": macro_initialize,
    "LayerSize": macro_layer_size,
}
