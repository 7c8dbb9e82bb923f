"""Runtime values.

Scalars are plain Python ``int``/``bool``/``str``/``float`` and tuples are
Python tuples. Records, sequences and sets get small immutable wrappers so
that every value (except closures) is hashable and can live inside a set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DivisionByZero
from .types import BOOL, DOUBLE, INT, STRING, CollT, FunT, RecordT, SEQ, TupleT

_INT_MIN = -(2**63)
_INT_SPAN = 2**64


@dataclass(frozen=True)
class RecordValue:
    schema: str
    values: tuple


@dataclass(frozen=True)
class SeqValue:
    items: tuple

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)


@dataclass(frozen=True)
class SetValue:
    items: frozenset

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)


@dataclass(frozen=True, eq=False)
class Closure:
    param: object  # TypedVar
    body: object  # Expr
    env: dict


def make_coll(kind, items):
    if kind is SEQ:
        return SeqValue(tuple(items))
    return SetValue(frozenset(items))


def wrap_int(n):
    """Wrap to 64-bit two's complement."""
    return (n - _INT_MIN) % _INT_SPAN + _INT_MIN


def conforms(value, tag):
    """Value-typing judgment: does ``value`` inhabit ``tag``?"""
    if tag == INT:
        return type(value) is int and _INT_MIN <= value < -_INT_MIN
    if tag == BOOL:
        return type(value) is bool
    if tag == STRING:
        return type(value) is str
    if tag == DOUBLE:
        return type(value) is float
    if isinstance(tag, TupleT):
        return (
            type(value) is tuple
            and len(value) == len(tag.elems)
            and all(conforms(v, t) for v, t in zip(value, tag.elems))
        )
    if isinstance(tag, RecordT):
        return (
            isinstance(value, RecordValue)
            and value.schema == tag.name
            and len(value.values) == len(tag.fields)
            and all(conforms(v, t) for v, (_, t) in zip(value.values, tag.fields))
        )
    if isinstance(tag, CollT):
        cls = SeqValue if tag.kind is SEQ else SetValue
        return isinstance(value, cls) and all(conforms(v, tag.elem) for v in value)
    if isinstance(tag, FunT):
        return isinstance(value, Closure) and value.param.tag == tag.arg
    return False


def sort_key(value):
    """Canonical total order: booleans, numbers, strings, then structures."""
    t = type(value)
    if t is bool:
        return (0, int(value))
    if t is int or t is float:
        if t is float and math.isnan(value):
            return (1, 1, 0)
        return (1, 0, value)
    if t is str:
        return (2, value)
    if t is tuple:
        return (3, tuple(sort_key(v) for v in value))
    if t is RecordValue:
        return (4, value.schema, tuple(sort_key(v) for v in value.values))
    if t is SeqValue:
        return (5, tuple(sort_key(v) for v in value.items))
    if t is SetValue:
        return (6, tuple(sorted(sort_key(v) for v in value.items)))
    raise TypeError(f"no canonical order for {value!r}")


def canonical_items(coll):
    """Items of a collection in deterministic order (sets are sorted)."""
    if isinstance(coll, SetValue):
        return sorted(coll.items, key=sort_key)
    return list(coll.items)


def arith(op, a, b, tag):
    if tag == INT:
        if op == "add":
            return wrap_int(a + b)
        if op == "sub":
            return wrap_int(a - b)
        if op == "mul":
            return wrap_int(a * b)
        if b == 0:
            raise DivisionByZero("integer division by zero")
        q = abs(a) // abs(b)
        return wrap_int(q if (a < 0) == (b < 0) else -q)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if b == 0:
        raise DivisionByZero("floating-point division by zero")
    return a / b


def compare(op, a, b):
    if op == "eq":
        return a == b
    if op == "ne":
        return a != b
    if op == "lt":
        return a < b
    if op == "le":
        return a <= b
    if op == "gt":
        return a > b
    return a >= b
