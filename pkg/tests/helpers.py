"""Shared script fragments and builders for the test suite."""

from __future__ import annotations

import io

from neurodb import Session
from neurodb import network

MANUAL_BUILD = """
Create NEUNET (Name) instance XOR-Net("XOR-example");
Create IElement (Order) instance Input1(1);
Create IElement (Order) instance Input2(2);
Create PElement () instance Hidden;
Create OElement (Order) instance Output(1);

Create NEUNET (Name) instance Input("Input-Layer");
Set NeuronalUnit(XOR-Net) = (Input, Hidden, Output);
Set NeuronalUnit(Input) = (Input1, Input2);

Set Predecessor(Input) = (Hidden, Output);
Set Predecessor(Hidden) = Output;

Set Weight(XOR-Net) = 0.0;
"""

FUNCTION_BINDINGS = """
Set InputF(XOR-Net) = WeightSum;
Set InputF(Input) = WeightSumI;
Set OutputF(XOR-Net) = Ident;
Set ActivationF(XOR-Net) = Sigmoid;
Set UpdateOrder(XOR-Net) -> ((Input, 1), (Hidden, 2), (Output, 3));
Set UpdateOrder(Input) -> ((Input1, 1), (Input2, 2));
Set LearnF(XOR-Net) = BackProp;
Set LearnF(Output) = BackPropO;
Set LearnOrder(XOR-Net) -> ((Input, 3), (Hidden, 2), (Output, 1));
Set LearnOrder(Input) -> ((Input1, 1), (Input2, 2));
Set LearnRate(XOR-Net) = 4.00;
"""

DSL_FUNCTIONS = """
Create function WeightSum(U NUnit) as
begin
  Set Activation(U) = sum(listprod(
    select Activation(V) for each NUnit V where V in (
      select LinkFrom(W) for each Link W where W in (
        select Predecessor(P) for each NUnit P where P = U
      )
    ),
    select LinkWeight(W) for each Link W where W in (
      select Predecessor(P) for each NUnit P where P = U
    )
  ));
end;

Create function WeightSumI(U NUnit) as
begin
  Set Activation(U) = sum(listprod(
    InputData,
    select LinkWeight(W) for each Link W where W in (
      select Predecessor(P) for each NUnit P where P = U
    )
  ));
end;

Create function Sigmoid(U NUnit) as
begin
  Set Activation(U) = pow(1 + exp(-Activation(U)), -1);
end;

Create function Ident(U NUnit) as
begin
  Set Activation(U) = Activation(U);
end;

Create function BackProp(U NUnit) as
begin
  Set LinkDelta(L) = y for each Link L where L in (
    select Predecessor(P) for each NUnit P where P = U
  ) and y = (sum(listprod(
    select LinkDelta(M) for each Link M where LinkFrom(M) = U,
    select LinkWeight(M) for each Link M where LinkFrom(M) = U
  )) * Activation(L) * (1 - Activation(L)));

  Set LinkWeight(L) = LinkWeight(L) + x for each Link L where L in (
    select Predecessor(P) for each NUnit P where P = U
  ) and x = (LearnRate(Hull U) * LinkDelta(L) * (
    select Activation(V) for each NUnit V where V = LinkFrom(L)
  ));
end;

Create function BackPropO(U NUnit) as
begin
  Set LinkDelta(L) = y for each Link L where L in (
    select Predecessor(P) for each NUnit P where P = U
  ) and y = ((valpos(CheckData(Hull L), Order(L)) - Activation(L))
    * Activation(L) * (1 - Activation(L)));

  Set LinkWeight(L) = LinkWeight(L) + x for each Link L where L in (
    select Predecessor(P) for each NUnit P where P = U
  ) and x = (LearnRate(Hull U) * LinkDelta(L) * (
    select Activation(V) for each NUnit V where V = LinkFrom(L)
  ));
end;
"""

DATA_BINDINGS = """
Create type testdata (x Real, y Real, z Real);
Create testdata (x, y, z) instance T1(0.0, 0.0, 0.0);
Create testdata (x, y, z) instance T2(0.0, 1.0, 1.0);
Create testdata (x, y, z) instance T3(1.0, 0.0, 1.0);
Create testdata (x, y, z) instance T4(1.0, 1.0, 0.0);
Set InputData(XOR-Net) = select x, y from testdata;
Set CheckData(XOR-Net) = select z from testdata;
"""

MACRO_BUILD = """
Create NEUNET (Name) instance XOR-Net("Exclusive OR example");
Add type BPN to XOR-Net;
InitializeNeuralNet(XOR-Net);
LayerSize(XOR-Net, Input, 2);
LayerSize(XOR-Net, Hidden, 1);
LayerSize(XOR-Net, Output, 1);
Set LearnRate(XOR-Net) = 4.00;
"""


def make_session(**kwargs) -> Session:
    kwargs.setdefault("out", io.StringIO())
    return Session(**kwargs)


def build_xor(dsl: bool = True, data: bool = True, **kwargs):
    """Manual XOR build; with dsl=False the transfer functions resolve to the
    native implementations of the same names."""
    session = make_session(**kwargs)
    session.execute(MANUAL_BUILD)
    if dsl:
        session.execute(DSL_FUNCTIONS)
    session.execute(FUNCTION_BINDINGS)
    if data:
        session.execute(DATA_BINDINGS)
    return session, session.db.lookup_name("XOR-Net")


def build_xor_macro(data: bool = True, **kwargs):
    session = make_session(**kwargs)
    session.execute(MACRO_BUILD)
    if data:
        session.execute(DATA_BINDINGS)
    return session, session.db.lookup_name("XOR-Net")


def weights_of(db, net) -> list:
    return [db.objects[l].bindings["LinkWeight"] for l in network.links_under(db, net)]


def activations_of(db, net) -> list:
    return [db.objects[u].bindings.get("Activation") for u in network.flatten(db, net)]
