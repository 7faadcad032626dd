"""Independent flat-array reference implementation of the network dynamics.

No engine imports: plain Python floats, explicit unit and link arrays.
Implements the same equations and orderings the engine must follow (online
per-pattern training; per unit in learn order: error term first, then the
weight update on its incoming links; in paper mode the hidden error terms
read downstream weights already updated this sweep).

Used to pin expected values for the engine tests.
"""

from __future__ import annotations

import math


def sigmoid(x: float) -> float:
    try:
        e = math.exp(-x)
    except OverflowError:
        e = math.inf
    return math.pow(1.0 + e, -1.0)


class FlatNet:
    """units: list of (kind, order) with kind in {'in', 'hidden', 'out'};
    links: list of (dst_index, src_index) in creation order."""

    def __init__(self, units, links, learn_rate, update_order=None, learn_order=None):
        self.units = list(units)
        self.links = list(links)
        self.lr = learn_rate
        self.act = [0.0] * len(self.units)
        self.w = [0.0] * len(self.links)
        self.delta = [0.0] * len(self.links)
        self.update_order = update_order if update_order is not None \
            else list(range(len(self.units)))
        self.learn_order = learn_order if learn_order is not None \
            else list(reversed(range(len(self.units))))
        self.incoming = [[i for i, (d, _s) in enumerate(self.links) if d == u]
                         for u in range(len(self.units))]
        self.outgoing = [[i for i, (_d, s) in enumerate(self.links) if s == u]
                         for u in range(len(self.units))]

    def forward(self, row):
        for u in self.update_order:
            kind, order = self.units[u]
            if kind == "in":
                self.act[u] = float(row[order - 1])
            else:
                total = 0.0
                for li in self.incoming[u]:
                    total += self.act[self.links[li][1]] * self.w[li]
                self.act[u] = sigmoid(total)

    def backward(self, targets, mode="paper"):
        snapshot = list(self.w) if mode == "textbook" else None
        for u in self.learn_order:
            incoming = self.incoming[u]
            if not incoming:
                continue
            kind, order = self.units[u]
            a = self.act[u]
            if kind == "out":
                t = float(targets[order - 1])
                d = ((t - a) * a) * (1.0 - a)
            else:
                total = 0.0
                for li in self.outgoing[u]:
                    w = snapshot[li] if snapshot is not None else self.w[li]
                    total += self.delta[li] * w
                d = (total * a) * (1.0 - a)
            for li in incoming:
                self.delta[li] = d
            for li in incoming:
                self.w[li] += (self.lr * d) * self.act[self.links[li][1]]

    def train(self, rows, targets, epochs, mode="paper"):
        errors = []
        for _ in range(epochs):
            errors = []
            for row, tgt in zip(rows, targets):
                self.forward(row)
                e = 0.0
                for u, (kind, order) in enumerate(self.units):
                    if kind == "out":
                        diff = tgt[order - 1] - self.act[u]
                        e += diff * diff
                errors.append(e)
                self.backward(tgt, mode)
        return errors

    def outputs(self, row):
        self.forward(row)
        outs = [(order, self.act[u])
                for u, (kind, order) in enumerate(self.units) if kind == "out"]
        return tuple(a for _, a in sorted(outs))


XOR_ROWS = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]
XOR_TARGETS = [(0.0,), (1.0,), (1.0,), (0.0,)]

# unit indices: 0=Input1, 1=Input2, 2=Hidden, 3=Output
XOR_UNITS = [("in", 1), ("in", 2), ("hidden", 0), ("out", 1)]
# link creation order matches the build script: Input->Hidden, Input->Output,
# Hidden->Output
XOR_LINKS = [(2, 0), (2, 1), (3, 0), (3, 1), (3, 2)]


def xor_net(learn_rate: float = 4.0) -> FlatNet:
    return FlatNet(XOR_UNITS, XOR_LINKS, learn_rate,
                   update_order=[0, 1, 2, 3], learn_order=[3, 2, 0, 1])
