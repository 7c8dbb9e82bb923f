"""Typed expression trees.

Every node is an immutable dataclass whose ``tag`` is computed, and checked,
in ``__post_init__``; an ill-typed node cannot be constructed. Generic
traversal goes through ``children()`` and ``rebuild()``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from functools import cached_property

from .errors import ArityError, TypingError
from .types import (
    BOOL,
    DOUBLE,
    INT,
    SEQ,
    SET,
    STRING,
    CollT,
    FunT,
    RecordT,
    TupleT,
    TypeTag,
    contains_fun,
)
from .values import conforms

ARITH_OPS = ("add", "sub", "mul", "div")
CMP_OPS = ("eq", "ne", "lt", "le", "gt", "ge")
BOOL_OPS = ("and", "or")
_ORDERED = (INT, DOUBLE, STRING)


@dataclass(frozen=True)
class TypedVar:
    id: int
    tag: TypeTag

    def __post_init__(self):
        if self.id < 1:
            raise ValueError("variable ids are positive")

    def __repr__(self):
        return f"v{self.id}"


def _check(cond, path, expected, found):
    if not cond:
        raise TypingError(path, expected, found)


def _coll(path, e):
    _check(isinstance(e.tag, CollT), path, "a collection", e.tag)
    return e.tag


def _fun(path, e, arg):
    _check(isinstance(e.tag, FunT), path, f"fun<{arg},_>", e.tag)
    _check(e.tag.arg == arg, path, f"fun<{arg},_>", e.tag)
    return e.tag.res


def _storable(path, tag):
    # collection elements, record fields and compared values hold data only;
    # tuples may carry functions since they are never hashed or ordered
    _check(not contains_fun(tag), path, "a data type", tag)


class Expr:
    """Base class of expression nodes."""

    tag: TypeTag

    def children(self):
        return ()

    def rebuild(self, children):
        if children:
            raise ArityError(f"{type(self).__name__} has no children")
        return self

    def _arity(self, children, n):
        if len(children) != n:
            raise ArityError(f"{type(self).__name__} takes {n} children, got {len(children)}")

    @cached_property
    def free_vars(self):
        out = frozenset()
        for c in self.children():
            out |= c.free_vars
        return out

    # Operator overloading; == stays structural equality.
    def __add__(self, other):
        other = lift(other)
        if self.tag == STRING:
            return StringConcat(self, other)
        return ArithBin("add", self, other)

    def __radd__(self, other):
        return lift(other, self.tag).__add__(self)

    def __sub__(self, other):
        return ArithBin("sub", self, lift(other))

    def __rsub__(self, other):
        return ArithBin("sub", lift(other, self.tag), self)

    def __mul__(self, other):
        return ArithBin("mul", self, lift(other))

    def __rmul__(self, other):
        return ArithBin("mul", lift(other, self.tag), self)

    def __truediv__(self, other):
        return ArithBin("div", self, lift(other))

    def __lt__(self, other):
        return Cmp("lt", self, lift(other))

    def __le__(self, other):
        return Cmp("le", self, lift(other))

    def __gt__(self, other):
        return Cmp("gt", self, lift(other))

    def __ge__(self, other):
        return Cmp("ge", self, lift(other))

    def __and__(self, other):
        return BoolBin("and", self, lift(other))

    def __or__(self, other):
        return BoolBin("or", self, lift(other))

    def __invert__(self):
        return Not(self)

    def __getitem__(self, key):
        if isinstance(key, str):
            return FieldGet(self, key)
        return TupleProj(self, key)


def lift(value, like=None):
    """Wrap a host scalar as a constant; expressions pass through."""
    if isinstance(value, Expr):
        return value
    if isinstance(value, bool):
        return Const(value, BOOL)
    if isinstance(value, int):
        return Const(float(value), DOUBLE) if like == DOUBLE else Const(value, INT)
    if isinstance(value, float):
        return Const(value, DOUBLE)
    if isinstance(value, str):
        return Const(value, STRING)
    raise TypeError(f"cannot lift {value!r} without an explicit type tag")


def _same_value(a, b):
    if a is b or a == b:
        return True
    return type(a) is float and type(b) is float and math.isnan(a) and math.isnan(b)


@dataclass(frozen=True, eq=False)
class Const(Expr):
    value: object
    tag: TypeTag
    # dataset roots keep their name so plans can refer to them symbolically
    name: str | None = None

    def __post_init__(self):
        _check(not contains_fun(self.tag), "Const", "a data type", self.tag)
        _check(conforms(self.value, self.tag), "Const", self.tag, repr(self.value))

    def __eq__(self, other):
        return (
            type(other) is Const
            and self.tag == other.tag
            and _same_value(self.value, other.value)
        )

    def __hash__(self):
        return hash((Const, self.tag, self.value))

    @cached_property
    def free_vars(self):
        return frozenset()


@dataclass(frozen=True)
class VarRef(Expr):
    var: TypedVar
    tag: TypeTag = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tag", self.var.tag)

    @cached_property
    def free_vars(self):
        return frozenset((self.var,))


@dataclass(frozen=True)
class FoasFun(Expr):
    body: Expr
    param: TypedVar
    tag: TypeTag = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tag", FunT(self.param.tag, self.body.tag))

    def children(self):
        return (self.body,)

    def rebuild(self, children):
        self._arity(children, 1)
        return FoasFun(children[0], self.param)

    @cached_property
    def free_vars(self):
        return self.body.free_vars - {self.param}


@dataclass(frozen=True)
class App(Expr):
    fun: Expr
    arg: Expr
    tag: TypeTag = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _check(isinstance(self.fun.tag, FunT), "App.fun", "a function", self.fun.tag)
        _check(self.fun.tag.arg == self.arg.tag, "App.arg", self.fun.tag.arg, self.arg.tag)
        object.__setattr__(self, "tag", self.fun.tag.res)

    def children(self):
        return (self.fun, self.arg)

    def rebuild(self, children):
        self._arity(children, 2)
        return App(*children)


@dataclass(frozen=True)
class StringConcat(Expr):
    left: Expr
    right: Expr
    tag: TypeTag = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _check(self.left.tag == STRING, "StringConcat.left", STRING, self.left.tag)
        _check(self.right.tag == STRING, "StringConcat.right", STRING, self.right.tag)
        object.__setattr__(self, "tag", STRING)

    def children(self):
        return (self.left, self.right)

    def rebuild(self, children):
        self._arity(children, 2)
        return StringConcat(*children)


@dataclass(frozen=True)
class ArithBin(Expr):
    op: str
    left: Expr
    right: Expr
    tag: TypeTag = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.op not in ARITH_OPS:
            raise ValueError(f"unknown arithmetic operator {self.op!r}")
        _check(self.left.tag in (INT, DOUBLE), "ArithBin.left", "int or double", self.left.tag)
        _check(self.right.tag == self.left.tag, "ArithBin.right", self.left.tag, self.right.tag)
        object.__setattr__(self, "tag", self.left.tag)

    def children(self):
        return (self.left, self.right)

    def rebuild(self, children):
        self._arity(children, 2)
        return ArithBin(self.op, *children)


@dataclass(frozen=True)
class Cmp(Expr):
    op: str
    left: Expr
    right: Expr
    tag: TypeTag = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.op not in CMP_OPS:
            raise ValueError(f"unknown comparison {self.op!r}")
        _check(self.right.tag == self.left.tag, "Cmp.right", self.left.tag, self.right.tag)
        if self.op in ("eq", "ne"):
            _storable("Cmp.left", self.left.tag)
        else:
            _check(self.left.tag in _ORDERED, "Cmp.left", "int, double or string", self.left.tag)
        object.__setattr__(self, "tag", BOOL)

    def children(self):
        return (self.left, self.right)

    def rebuild(self, children):
        self._arity(children, 2)
        return Cmp(self.op, *children)


@dataclass(frozen=True)
class BoolBin(Expr):
    op: str
    left: Expr
    right: Expr
    tag: TypeTag = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.op not in BOOL_OPS:
            raise ValueError(f"unknown boolean operator {self.op!r}")
        _check(self.left.tag == BOOL, "BoolBin.left", BOOL, self.left.tag)
        _check(self.right.tag == BOOL, "BoolBin.right", BOOL, self.right.tag)
        object.__setattr__(self, "tag", BOOL)

    def children(self):
        return (self.left, self.right)

    def rebuild(self, children):
        self._arity(children, 2)
        return BoolBin(self.op, *children)


@dataclass(frozen=True)
class Not(Expr):
    operand: Expr
    tag: TypeTag = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _check(self.operand.tag == BOOL, "Not.operand", BOOL, self.operand.tag)
        object.__setattr__(self, "tag", BOOL)

    def children(self):
        return (self.operand,)

    def rebuild(self, children):
        self._arity(children, 1)
        return Not(children[0])


@dataclass(frozen=True)
class TupleMake(Expr):
    elems: tuple
    tag: TypeTag = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "elems", tuple(self.elems))
        _check(len(self.elems) >= 2, "TupleMake", "at least 2 components", len(self.elems))
        object.__setattr__(self, "tag", TupleT(tuple(e.tag for e in self.elems)))

    def children(self):
        return self.elems

    def rebuild(self, children):
        self._arity(children, len(self.elems))
        return TupleMake(tuple(children))


@dataclass(frozen=True)
class TupleProj(Expr):
    tup: Expr
    index: int
    tag: TypeTag = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        t = self.tup.tag
        _check(isinstance(t, TupleT), "TupleProj.tuple", "a tuple", t)
        _check(1 <= self.index <= len(t.elems), "TupleProj.index",
               f"1..{len(t.elems)}", self.index)
        object.__setattr__(self, "tag", t.elems[self.index - 1])

    def children(self):
        return (self.tup,)

    def rebuild(self, children):
        self._arity(children, 1)
        return TupleProj(children[0], self.index)


@dataclass(frozen=True)
class RecordMake(Expr):
    schema: RecordT
    values: tuple
    tag: TypeTag = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        fields = self.schema.fields
        _check(len(self.values) == len(fields), f"RecordMake({self.schema.name})",
               f"{len(fields)} fields", len(self.values))
        for (name, ftag), v in zip(fields, self.values):
            _check(v.tag == ftag, f"RecordMake({self.schema.name}).{name}", ftag, v.tag)
        object.__setattr__(self, "tag", self.schema)

    def children(self):
        return self.values

    def rebuild(self, children):
        self._arity(children, len(self.values))
        return RecordMake(self.schema, tuple(children))


@dataclass(frozen=True)
class FieldGet(Expr):
    record: Expr
    field: str
    tag: TypeTag = field(init=False, repr=False, compare=False)
    index: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        rt = self.record.tag
        _check(isinstance(rt, RecordT), "FieldGet.record", "a record", rt)
        i = rt.field_index(self.field)
        _check(i is not None, f"FieldGet({rt.name})", f"one of {rt.field_names()}", self.field)
        object.__setattr__(self, "index", i)
        object.__setattr__(self, "tag", rt.fields[i][1])

    def children(self):
        return (self.record,)

    def rebuild(self, children):
        self._arity(children, 1)
        return FieldGet(children[0], self.field)


@dataclass(frozen=True)
class CollLit(Expr):
    kind: object  # CollKind
    elem_tag: TypeTag
    elems: tuple
    tag: TypeTag = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "elems", tuple(self.elems))
        _storable("CollLit", self.elem_tag)
        for i, e in enumerate(self.elems):
            _check(e.tag == self.elem_tag, f"CollLit.elems[{i}]", self.elem_tag, e.tag)
        object.__setattr__(self, "tag", CollT(self.kind, self.elem_tag))

    def children(self):
        return self.elems

    def rebuild(self, children):
        self._arity(children, len(self.elems))
        return CollLit(self.kind, self.elem_tag, tuple(children))


@dataclass(frozen=True)
class MapNode(Expr):
    coll: Expr
    fun: Expr
    tag: TypeTag = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        c = _coll("MapNode.coll", self.coll)
        res = _fun("MapNode.fun", self.fun, c.elem)
        _storable("MapNode.fun", res)
        object.__setattr__(self, "tag", CollT(c.kind, res))

    def children(self):
        return (self.coll, self.fun)

    def rebuild(self, children):
        self._arity(children, 2)
        return MapNode(*children)


@dataclass(frozen=True)
class FlatMapNode(Expr):
    coll: Expr
    fun: Expr
    tag: TypeTag = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        c = _coll("FlatMapNode.coll", self.coll)
        res = _fun("FlatMapNode.fun", self.fun, c.elem)
        _check(isinstance(res, CollT), "FlatMapNode.fun", "a collection result", res)
        object.__setattr__(self, "tag", CollT(c.kind, res.elem))

    def children(self):
        return (self.coll, self.fun)

    def rebuild(self, children):
        self._arity(children, 2)
        return FlatMapNode(*children)


@dataclass(frozen=True)
class FilterNode(Expr):
    coll: Expr
    pred: Expr
    tag: TypeTag = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        c = _coll("FilterNode.coll", self.coll)
        res = _fun("FilterNode.pred", self.pred, c.elem)
        _check(res == BOOL, "FilterNode.pred", f"fun<{c.elem},bool>", self.pred.tag)
        object.__setattr__(self, "tag", c)

    def children(self):
        return (self.coll, self.pred)

    def rebuild(self, children):
        self._arity(children, 2)
        return FilterNode(*children)


@dataclass(frozen=True)
class SizeNode(Expr):
    coll: Expr
    tag: TypeTag = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _coll("SizeNode.coll", self.coll)
        object.__setattr__(self, "tag", INT)

    def children(self):
        return (self.coll,)

    def rebuild(self, children):
        self._arity(children, 1)
        return SizeNode(children[0])


@dataclass(frozen=True)
class UnionNode(Expr):
    left: Expr
    right: Expr
    tag: TypeTag = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        c = _coll("UnionNode.left", self.left)
        _check(self.right.tag == c, "UnionNode.right", c, self.right.tag)
        object.__setattr__(self, "tag", c)

    def children(self):
        return (self.left, self.right)

    def rebuild(self, children):
        self._arity(children, 2)
        return UnionNode(*children)


@dataclass(frozen=True)
class ToSeqNode(Expr):
    coll: Expr
    tag: TypeTag = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        c = _coll("ToSeqNode.coll", self.coll)
        object.__setattr__(self, "tag", CollT(SEQ, c.elem))

    def children(self):
        return (self.coll,)

    def rebuild(self, children):
        self._arity(children, 1)
        return ToSeqNode(children[0])


@dataclass(frozen=True)
class ToSetNode(Expr):
    coll: Expr
    tag: TypeTag = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        c = _coll("ToSetNode.coll", self.coll)
        object.__setattr__(self, "tag", CollT(SET, c.elem))

    def children(self):
        return (self.coll,)

    def rebuild(self, children):
        self._arity(children, 1)
        return ToSetNode(children[0])


@dataclass(frozen=True)
class HashJoinNode(Expr):
    """Equi-join executed through a hash table on the inner keys.

    Produced by the optimizer only; the builder API never emits it.
    """

    outer: Expr
    inner: Expr
    outer_key: Expr
    inner_key: Expr
    combine: Expr
    tag: TypeTag = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        o = _coll("HashJoinNode.outer", self.outer)
        i = _coll("HashJoinNode.inner", self.inner)
        k = _fun("HashJoinNode.outer_key", self.outer_key, o.elem)
        _storable("HashJoinNode.outer_key", k)
        ik = _fun("HashJoinNode.inner_key", self.inner_key, i.elem)
        _check(ik == k, "HashJoinNode.inner_key", f"fun<{i.elem},{k}>", self.inner_key.tag)
        res = _fun("HashJoinNode.combine", self.combine, TupleT((o.elem, i.elem)))
        _storable("HashJoinNode.combine", res)
        object.__setattr__(self, "tag", CollT(o.kind, res))

    def children(self):
        return (self.outer, self.inner, self.outer_key, self.inner_key, self.combine)

    def rebuild(self, children):
        self._arity(children, 5)
        return HashJoinNode(*children)


def type_of(e):
    return e.tag


def children(e):
    return list(e.children())


def rebuild(e, new_children):
    return e.rebuild(tuple(new_children))


def free_vars(e):
    return set(e.free_vars)


def expr_equal(a, b):
    return a == b


def iter_nodes(e):
    """Pre-order traversal."""
    stack = [e]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(n.children()))


def binder_ids(e):
    """Binder ids in pre-order; duplicates indicate a Barendregt violation."""
    return [n.param.id for n in iter_nodes(e) if isinstance(n, FoasFun)]


def has_unique_binders(e):
    ids = binder_ids(e)
    if len(ids) != len(set(ids)):
        return False
    return not ({v.id for v in e.free_vars} & set(ids))


def max_var_id(e):
    best = 0
    for n in iter_nodes(e):
        if isinstance(n, FoasFun):
            best = max(best, n.param.id)
        elif isinstance(n, VarRef):
            best = max(best, n.var.id)
    return best


def rename_binders(e, fresh_id, only_duplicates=False):
    """Rename binders, rewriting their bound occurrences.

    ``fresh_id()`` supplies new ids. With ``only_duplicates`` a binder keeps its
    id unless that id was already seen (or is free in ``e``), which restores the
    Barendregt convention with minimal churn.
    """
    seen = {v.id for v in e.free_vars}

    def go(n, env):
        if isinstance(n, VarRef):
            new = env.get(n.var.id)
            return n if new is None else VarRef(new)
        if isinstance(n, FoasFun):
            p = n.param
            if only_duplicates and p.id not in seen:
                seen.add(p.id)
                if p.id in env:
                    env = {k: v for k, v in env.items() if k != p.id}
                body = go(n.body, env)
                return n if body is n.body else FoasFun(body, p)
            newp = TypedVar(fresh_id(), p.tag)
            seen.add(newp.id)
            body = go(n.body, {**env, p.id: newp})
            return FoasFun(body, newp)
        kids = n.children()
        if not kids:
            return n
        new = tuple(go(c, env) for c in kids)
        if all(a is b for a, b in zip(new, kids)):
            return n
        return n.rebuild(new)

    return go(e, {})


def renumber(e):
    """Give binders consecutive ids 1, 2, ... in pre-order.

    Ids of free variables are left alone and skipped.
    """
    taken = {v.id for v in e.free_vars}
    counter = 0

    def fresh_id():
        nonlocal counter
        counter += 1
        while counter in taken:
            counter += 1
        return counter

    return _renumber_preorder(e, fresh_id)


def _renumber_preorder(e, fresh_id):
    def go(n, env):
        if isinstance(n, VarRef):
            new = env.get(n.var.id)
            return n if new is None else VarRef(new)
        if isinstance(n, FoasFun):
            newp = TypedVar(fresh_id(), n.param.tag)
            return FoasFun(go(n.body, {**env, n.param.id: newp}), newp)
        kids = n.children()
        if not kids:
            return n
        return n.rebuild(tuple(go(c, env) for c in kids))

    return go(e, {})


def alpha_equal(a, b):
    """Equality up to consistent renaming of bound variables (test utility)."""

    def go(x, y, env):
        if type(x) is not type(y):
            return False
        if isinstance(x, VarRef):
            return env.get(x.var.id, x.var.id) == y.var.id and x.tag == y.tag
        if isinstance(x, FoasFun):
            if x.param.tag != y.param.tag:
                return False
            return go(x.body, y.body, {**env, x.param.id: y.param.id})
        if isinstance(x, Const):
            return x == y
        if _attrs(x) != _attrs(y):
            return False
        kx, ky = x.children(), y.children()
        return len(kx) == len(ky) and all(go(c, d, env) for c, d in zip(kx, ky))

    return go(a, b, {})


def _attrs(n):
    """Non-child, non-derived attributes of a node."""
    out = []
    for f in fields(n):
        if not f.compare:
            continue
        v = getattr(n, f.name)
        if isinstance(v, Expr) or (isinstance(v, tuple) and v and isinstance(v[0], Expr)):
            continue
        out.append(v)
    return tuple(out)
