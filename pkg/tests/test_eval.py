"""Expression evaluation, builtins, stored functions, statement semantics."""

import pytest

from neurodb import FnRef, Ref
from neurodb.errors import (
    ArityMismatch,
    IndexOutOfRange,
    LengthMismatch,
    NameCollision,
    NeuroDbError,
    RecursiveFunctionCall,
    TypeMismatch,
    UnknownIdentifier,
)
from neurodb.osql.builtins import fexp, fpow, fsum, listprod, valpos

import helpers


def select_value(session, text):
    [(_, value)] = session.execute(text)
    return value


# --- foreign functions -------------------------------------------------------

def test_listprod_then_sum():
    assert listprod([1, 2], [3, 4]) == [3, 8]
    assert fsum([3, 8]) == 11.0


def test_listprod_length_mismatch():
    with pytest.raises(LengthMismatch):
        listprod([1], [1, 2])


def test_valpos_is_one_indexed():
    assert valpos([0, 1], 2) == 1
    assert valpos((7.5,), 1) == 7.5
    with pytest.raises(IndexOutOfRange):
        valpos([0, 1], 3)
    with pytest.raises(IndexOutOfRange):
        valpos([0, 1], 0)


def test_exp_saturates_instead_of_overflowing():
    assert fexp(1000.0) == float("inf")
    assert fpow(float("inf"), -1.0) == 0.0
    assert fexp(-1000.0) == 0.0


# --- expressions --------------------------------------------------------------

def test_arithmetic_precedence():
    session = helpers.make_session()
    assert select_value(session, "Select 1 + 2 * 3;") == 7
    assert select_value(session, "Select (1 + 2) * 3;") == 9
    assert select_value(session, "Select -2 * 3;") == -6
    assert select_value(session, "Select 7 / 2;") == 3.5


def test_unknown_identifier():
    session = helpers.make_session()
    with pytest.raises(UnknownIdentifier):
        session.execute("Select Nonsense;")


def test_select_for_each_preserves_creation_order():
    session, _ = helpers.build_xor(dsl=False, data=False)
    orders = select_value(session, "Select Order(V) for each IElement V;")
    assert orders == [1, 2]


def test_select_in_filters_by_type_and_keeps_order():
    session, _ = helpers.build_xor(dsl=False, data=False)
    v = select_value(
        session,
        "Select Name(V) for each NEUNET V where V in "
        "(select NeuronalUnit(P) for each NEUNET P where P = XOR-Net);")
    # Hidden and Output are elements, not NEUNETs: only the Input layer remains
    assert v == ["Input-Layer"]


def test_hull_resolution_in_expression():
    session = helpers.make_session()
    session.execute("""
    Create NEUNET (Name) instance Net("n");
    Create PElement () instance P;
    Set NeuronalUnit(Net) = (P);
    Set LearnRate(Net) = 4.00;
    """)
    assert select_value(session, "Select LearnRate (Hull P);") == 4.0
    # nothing binds LearnF anywhere on this chain
    assert select_value(session, "Select LearnF (Hull P);") is None


def test_hull_nearest_binding_wins():
    session, _ = helpers.build_xor(dsl=False, data=False)
    session.execute("Set InputF(XOR-Net) = WeightSum;")
    session.execute("Set InputF(Input) = WeightSumI;")
    assert select_value(session, "Select InputF (Hull Input1);") == FnRef("WeightSumI")
    assert select_value(session, "Select InputF (Hull Hidden);") == FnRef("WeightSum")


def test_unit_function_on_link_resolves_via_owner():
    session, _ = helpers.build_xor(dsl=False, data=False)
    v = select_value(
        session,
        "Select Order(L) for each Link L where L in "
        "(select Predecessor(P) for each NUnit P where P = Output);")
    assert v == [1, 1, 1]


# --- stored query-language functions ------------------------------------------

def test_weight_sum_of_zero_weights_is_zero():
    session, net = helpers.build_xor(data=False)
    db = session.db
    session.execute("Set Activation(Input1) = 1.0; Set Activation(Input2) = 0.0;")
    session.execute("WeightSum(Hidden);")
    assert db.get_value("Activation", db.lookup_name("Hidden")) == 0.0


def test_ident_leaves_activation_unchanged():
    session, net = helpers.build_xor(data=False)
    db = session.db
    session.execute("Set Activation(Hidden) = 0.73;")
    session.execute("Ident(Hidden);")
    assert db.get_value("Activation", db.lookup_name("Hidden")) == 0.73


def test_dsl_sigmoid_matches_native_bitwise():
    import neurodb.network as network
    session, net = helpers.build_xor(data=False)
    db = session.db
    hidden = db.lookup_name("Hidden")
    for x in (-3.25, -0.5, 0.0, 0.1, 2.0, 17.5):
        session.execute(f"Set Activation(Hidden) = {x!r};")
        session.execute("Sigmoid(Hidden);")
        assert db.get_value("Activation", hidden) == network.sigmoid(x)


def test_call_with_wrong_typed_argument():
    session, net = helpers.build_xor(data=True)
    with pytest.raises(TypeMismatch):
        session.execute("WeightSum(T1);")   # testdata instance is not an NUnit


def test_recursive_function_rejected_at_runtime():
    session = helpers.make_session()
    session.execute("""
    Create PElement () instance P;
    Create function Loop(U NUnit) as
    begin
      Set Activation(U) = abs(Loop(U));
    end;
    """)
    with pytest.raises(RecursiveFunctionCall):
        session.execute("Loop(P);")


def test_builtin_names_cannot_be_shadowed():
    session = helpers.make_session()
    with pytest.raises(NameCollision):
        session.execute("""
        Create function sum(U NUnit) as
        begin
          Set Activation(U) = 0.0;
        end;
        """)


def test_native_transfer_names_are_shadowable():
    session = helpers.make_session()
    session.execute("""
    Create PElement () instance P;
    Create function Sigmoid(U NUnit) as
    begin
      Set Activation(U) = 42.0;
    end;
    Sigmoid(P);
    """)
    assert session.db.get_value("Activation", session.db.lookup_name("P")) == 42.0


# --- statement semantics ---------------------------------------------------------

def test_set_on_unknown_object_leaves_db_unchanged():
    session, net = helpers.build_xor(dsl=False, data=False)
    before = helpers.weights_of(session.db, net)
    with pytest.raises(NeuroDbError):
        session.execute("Set LearnRate(Ghost) = 1.0;")
    assert helpers.weights_of(session.db, net) == before


def test_set_weight_initializes_all_links():
    session, net = helpers.build_xor(dsl=False, data=False)
    session.execute("Set Weight(XOR-Net) = 0.25;")
    assert helpers.weights_of(session.db, net) == [0.25] * 5


def test_set_weight_random_is_seed_deterministic():
    a, net_a = helpers.build_xor(dsl=False, data=False)
    b, net_b = helpers.build_xor(dsl=False, data=False)
    a.execute("Set Weight(XOR-Net) = random_weights(-0.5, 0.5, 42);")
    b.execute("Set Weight(XOR-Net) = random_weights(-0.5, 0.5, 42);")
    wa = helpers.weights_of(a.db, net_a)
    assert wa == helpers.weights_of(b.db, net_b)
    assert all(-0.5 <= w < 0.5 for w in wa)


def test_positional_create_arity_checked():
    session = helpers.make_session()
    with pytest.raises(ArityMismatch):
        session.execute("Create IElement (Order) instance I;")


def test_function_ref_assignment_before_definition():
    # binding a function-valued slot does not require the function to exist yet
    session, _ = helpers.build_xor(dsl=False, data=False)
    session.execute("Set InputF(XOR-Net) = NotYetDefined;")
    assert session.db.get_value(
        "InputF", session.db.lookup_name("XOR-Net")) == FnRef("NotYetDefined")


def test_statement_errors_do_not_kill_session():
    session = helpers.make_session()
    with pytest.raises(NeuroDbError):
        session.execute("Select Bogus;")
    assert select_value(session, "Select 1 + 1;") == 2
