"""Natively implemented functions callable from the query language.

These are the numeric primitives the interpreted transfer and training
functions are written against.  `fexp` and `fpow` follow 64-bit float
semantics rather than raising on overflow, so sigmoid saturates cleanly at
the ends of its range.  The same helpers back the native network dynamics,
keeping both execution paths bit-identical.
"""

from __future__ import annotations

import math

from ..errors import IndexOutOfRange, LengthMismatch, TypeMismatch


def _num(v, who: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise TypeMismatch(f"{who} expects numbers, got {type(v).__name__}")
    return float(v)


def fsum(xs) -> float:
    if not isinstance(xs, (list, tuple)):
        raise TypeMismatch("sum expects a list")
    total = 0.0
    for x in xs:
        total += _num(x, "sum")
    return total


def listprod(xs, ys) -> list:
    if not isinstance(xs, (list, tuple)) or not isinstance(ys, (list, tuple)):
        raise TypeMismatch("listprod expects two lists")
    if len(xs) != len(ys):
        raise LengthMismatch(f"listprod: {len(xs)} vs {len(ys)} elements")
    return [_num(x, "listprod") * _num(y, "listprod") for x, y in zip(xs, ys)]


def valpos(row, i) -> float:
    """1-indexed element of a row or list."""
    if not isinstance(row, (list, tuple)):
        raise TypeMismatch("valpos expects a row or list")
    if isinstance(i, bool) or not isinstance(i, int):
        raise TypeMismatch("valpos expects an integer position")
    if not 1 <= i <= len(row):
        raise IndexOutOfRange(f"valpos: position {i} of {len(row)}")
    return row[i - 1]


def fexp(x) -> float:
    try:
        return math.exp(_num(x, "exp"))
    except OverflowError:
        return math.inf


def fpow(x, y) -> float:
    try:
        return math.pow(_num(x, "pow"), _num(y, "pow"))
    except OverflowError:
        return math.inf


def fabs(x) -> float:
    return math.fabs(_num(x, "abs"))


# name -> (implementation, arity); user functions may not shadow these
REGISTRY = {
    "sum": (fsum, 1),
    "listprod": (listprod, 2),
    "valpos": (valpos, 2),
    "pow": (fpow, 2),
    "exp": (fexp, 1),
    "abs": (fabs, 1),
}
