"""Runtime value model.

Values are kept as plain Python objects where possible so the evaluator
stays fast:

    Real             -> float
    Integer          -> int
    CharacterString  -> str
    Null             -> None
    ObjectRef        -> Ref
    FunctionRef      -> FnRef
    Tuple            -> tuple of values
    Bag              -> list of values (insertion-ordered, duplicates kept)
    Stream           -> Stream (lazy, re-evaluated on every iteration)
"""

from __future__ import annotations

from typing import Callable, Iterator, Tuple


class Ref:
    """Reference to a stored object by identifier.

    Hand-rolled rather than a dataclass: equality is on the hot path of the
    query evaluator.
    """

    __slots__ = ("oid",)

    def __init__(self, oid: int):
        self.oid = oid

    def __eq__(self, other):
        return type(other) is Ref and other.oid == self.oid

    def __hash__(self):
        return hash(self.oid)

    def __repr__(self):
        return f"#{self.oid}"


class FnRef:
    """Reference to a function by name; resolved at call time."""

    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def __eq__(self, other):
        return type(other) is FnRef and other.name == self.name

    def __hash__(self):
        return hash(self.name)

    def __repr__(self):
        return f"@{self.name}"


class Stream:
    """Lazy ordered sequence of fixed-arity rows of reals.

    The factory is re-invoked on every iteration, so a stream consumed twice
    reflects any database changes made in between.
    """

    __slots__ = ("arity", "_factory")

    def __init__(self, arity: int, factory: Callable[[], Iterator[Tuple[float, ...]]]):
        self.arity = arity
        self._factory = factory

    def __iter__(self):
        return self._factory()

    def rows(self) -> list:
        return list(self._factory())

    def __repr__(self):
        return f"<stream arity={self.arity}>"


def is_real(v) -> bool:
    return isinstance(v, float) and not isinstance(v, bool)


def as_real(v):
    """Coerce integers to reals; anything else is returned unchanged."""
    if isinstance(v, bool):
        return v
    if isinstance(v, int):
        return float(v)
    return v


def type_name_of(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "boolean"
    if isinstance(v, float):
        return "Real"
    if isinstance(v, int):
        return "Integer"
    if isinstance(v, str):
        return "CharacterString"
    if isinstance(v, Ref):
        return "ObjectRef"
    if isinstance(v, FnRef):
        return "FunctionRef"
    if isinstance(v, tuple):
        return "Tuple"
    if isinstance(v, list):
        return "Bag"
    if isinstance(v, Stream):
        return "Stream"
    return type(v).__name__
