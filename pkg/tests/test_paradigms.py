"""BPN paradigm type and the network-building macros."""

import pytest

from neurodb import FnRef
from neurodb import network
from neurodb.errors import AlreadyInitialized, LayerNotEmpty, TypeMismatch, UnknownLayer

import helpers


def test_initialize_creates_empty_layers():
    session = helpers.make_session()
    session.execute("""
    Create NEUNET (Name) instance Net("n");
    Add type BPN to Net;
    InitializeNeuralNet(Net);
    """)
    db = session.db
    net = db.lookup_name("Net")
    assert network.flatten(db, net) == []
    layers = db.get_value("NeuronalUnit", net)
    assert [db.get_value("Name", r.oid) for r in layers] == ["Input", "Hidden", "Output"]


def test_initialize_twice_rejected():
    session = helpers.make_session()
    session.execute("""
    Create NEUNET (Name) instance Net("n");
    Add type BPN to Net;
    InitializeNeuralNet(Net);
    """)
    with pytest.raises(AlreadyInitialized):
        session.execute("InitializeNeuralNet(Net);")


def test_initialize_requires_bpn():
    session = helpers.make_session()
    session.execute('Create NEUNET (Name) instance Net("n");')
    with pytest.raises(TypeMismatch):
        session.execute("InitializeNeuralNet(Net);")


def test_bpn_defaults_resolve_through_hull():
    session, net = helpers.build_xor_macro(data=False)
    db = session.db
    layers = db.get_value("NeuronalUnit", net)
    input_layer = layers[0].oid
    assert network.hull_resolve(db, "ActivationF", input_layer) == FnRef("Sigmoid")
    for element in network.flatten(db, net):
        assert network.hull_resolve(db, "InputF", element) == FnRef("WeightSum")


def test_output_elements_default_to_output_rule():
    session, net = helpers.build_xor_macro(data=False)
    db = session.db
    out = network.flatten(db, net)[-1]
    assert db.is_instance(out, "OElement")
    assert network.hull_resolve(db, "LearnF", out) == FnRef("BackPropO")
    hidden = network.flatten(db, net)[2]
    assert network.hull_resolve(db, "LearnF", hidden) == FnRef("BackProp")


def test_layer_size_validations():
    session = helpers.make_session()
    session.execute("""
    Create NEUNET (Name) instance Net("n");
    Add type BPN to Net;
    InitializeNeuralNet(Net);
    """)
    with pytest.raises(TypeMismatch):
        session.execute("LayerSize(Net, Input, 0);")
    with pytest.raises(UnknownLayer):
        session.execute("LayerSize(Net, Bogus, 1);")
    session.execute("LayerSize(Net, Input, 2);")
    with pytest.raises(LayerNotEmpty):
        session.execute("LayerSize(Net, Input, 2);")


def test_macro_topology_matches_manual_build():
    manual, mnet = helpers.build_xor(dsl=False, data=False)
    macro, bnet = helpers.build_xor_macro(data=False)

    def adjacency(db, net):
        pairs = []
        terminals = network.flatten(db, net)
        pos = {u: i for i, u in enumerate(terminals)}
        for t in terminals:
            for r in (db.objects[t].bindings.get("Predecessor") or []):
                src = db.get_value("LinkFrom", r.oid)
                pairs.append((pos[src.oid], pos[t],
                              db.get_value("LinkWeight", r.oid)))
        return pairs

    manual_adj = adjacency(manual.db, mnet)
    macro_adj = adjacency(macro.db, bnet)
    assert sorted(p[:2] for p in manual_adj) == sorted(p[:2] for p in macro_adj)
    assert len(macro_adj) == 5
    assert all(w == 0.0 for _, _, w in macro_adj)
    # element kinds and orders line up position by position
    for db, net in ((manual.db, mnet), (macro.db, bnet)):
        terms = network.flatten(db, net)
        assert [db.is_instance(u, "IElement") for u in terms] == [True, True, False, False]
        assert db.is_instance(terms[3], "OElement")


def test_macro_layer_orders_match_manual():
    macro, net = helpers.build_xor_macro(data=False)
    db = macro.db
    names = [db.get_value("Name", u) for u in network.flatten(db, net)]
    assert names == ["Input1", "Input2", "Hidden1", "Output1"]
    learn_names = [db.get_value("Name", u)
                   for u in network.flatten(db, net, "LearnOrder")]
    assert learn_names == ["Output1", "Hidden1", "Input1", "Input2"]
