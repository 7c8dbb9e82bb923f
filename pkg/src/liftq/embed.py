"""Query-authoring front-end.

Host-level Python functions over ``Expr`` handles (higher-order abstract
syntax) are converted to first-order ``FoasFun`` nodes by applying them to a
freshly generated variable::

    g = Gensym()
    shout = fun(STRING, lambda s: concat(s, pure("!", STRING)), g)
    # FoasFun(StringConcat(VarRef(v1), Const('!')), v1)

Queries built with one shared ``Gensym`` have pairwise-distinct binder ids.
"""

from __future__ import annotations

from types import MappingProxyType

from .errors import (
    DuplicateField,
    DuplicateSchema,
    TypingError,
    UnknownReferencedSchema,
    ValueTagMismatch,
)
from .expr import (
    App,
    ArithBin,
    BoolBin,
    Cmp,
    CollLit,
    Const,
    Expr,
    FieldGet,
    FilterNode,
    FlatMapNode,
    FoasFun,
    MapNode,
    Not,
    RecordMake,
    SizeNode,
    StringConcat,
    ToSeqNode,
    ToSetNode,
    TupleMake,
    TupleProj,
    TypedVar,
    UnionNode,
    VarRef,
    lift,
)
from .types import CollT, RecordT, TypeTag, contains_fun, parse_type, record_types
from .values import conforms


class SchemaRegistry:
    """Immutable map from schema name to RecordT.

    ``register`` returns a new registry; existing ones never change.
    """

    def __init__(self, schemas=None):
        self._schemas = MappingProxyType(dict(schemas or {}))

    def register(self, name, fields):
        if name in self._schemas:
            raise DuplicateSchema(f"schema {name!r} already registered")
        seen = set()
        checked = []
        for fname, ftag in fields:
            if fname in seen:
                raise DuplicateField(f"{name}.{fname} declared twice")
            seen.add(fname)
            if not isinstance(ftag, TypeTag):
                raise TypeError(f"{name}.{fname}: not a type tag: {ftag!r}")
            if contains_fun(ftag):
                raise TypingError(f"{name}.{fname}", "a data type", ftag)
            for rt in record_types(ftag):
                if self._schemas.get(rt.name) != rt:
                    raise UnknownReferencedSchema(
                        f"{name}.{fname} refers to unregistered schema {rt.name!r}")
            checked.append((fname, ftag))
        rt = RecordT(name, tuple(checked))
        return SchemaRegistry({**self._schemas, name: rt})

    def __getitem__(self, name):
        try:
            return self._schemas[name]
        except KeyError:
            raise UnknownReferencedSchema(f"unknown schema {name!r}") from None

    def __contains__(self, name):
        return name in self._schemas

    def __iter__(self):
        return iter(self._schemas)

    def __len__(self):
        return len(self._schemas)

    def __eq__(self, other):
        if not isinstance(other, SchemaRegistry):
            return NotImplemented
        return dict(self._schemas) == dict(other._schemas)

    def __hash__(self):
        return hash(frozenset(self._schemas.items()))

    def __repr__(self):
        return f"SchemaRegistry({', '.join(self._schemas)})"

    def record(self, name):
        return self[name]

    def parse_type(self, text, line=0):
        return parse_type(text, self.__getitem__, line)


def register_schema(reg, name, fields):
    return reg.register(name, fields)


class Gensym:
    """Source of fresh, strictly increasing variable ids."""

    def __init__(self, start=1):
        self.counter = start

    def fresh(self, tag):
        v = TypedVar(self.counter, tag)
        self.counter += 1
        return v

    def fresh_id(self):
        self.counter += 1
        return self.counter - 1


_default_gensym = Gensym()


def pure(value, tag=None):
    """Lift a host value to a constant node."""
    if tag is None:
        return lift(value)
    if not conforms(value, tag):
        raise ValueTagMismatch("pure", f"{value!r} is not a {tag}")
    return Const(value, tag)


def fun(arg_tag, body, g=None):
    """Convert a host function ``Expr -> Expr`` to a FoasFun literal.

    ``body`` must be pure: its result may depend only on the tree it is given.
    """
    g = g or _default_gensym
    v = g.fresh(arg_tag)
    result = lift(body(VarRef(v)))
    return FoasFun(result, v)


def app(f, arg):
    return App(f, lift(arg))


def concat(left, right):
    return StringConcat(lift(left), lift(right))


def add(left, right):
    return ArithBin("add", lift(left), lift(right))


def sub(left, right):
    return ArithBin("sub", lift(left), lift(right))


def mul(left, right):
    return ArithBin("mul", lift(left), lift(right))


def div(left, right):
    return ArithBin("div", lift(left), lift(right))


def eq(left, right):
    return Cmp("eq", lift(left), lift(right))


def ne(left, right):
    return Cmp("ne", lift(left), lift(right))


def lt(left, right):
    return Cmp("lt", lift(left), lift(right))


def le(left, right):
    return Cmp("le", lift(left), lift(right))


def gt(left, right):
    return Cmp("gt", lift(left), lift(right))


def ge(left, right):
    return Cmp("ge", lift(left), lift(right))


def and_(left, right):
    return BoolBin("and", lift(left), lift(right))


def or_(left, right):
    return BoolBin("or", lift(left), lift(right))


def not_(e):
    return Not(lift(e))


def tuple_(*elems):
    return TupleMake(tuple(lift(e) for e in elems))


def proj(t, index):
    return TupleProj(t, index)


def record(schema, *values):
    """Construct a record; ``schema`` is a RecordT from a registry."""
    if not isinstance(schema, RecordT):
        raise TypeError("record() takes a RecordT; look it up in a SchemaRegistry")
    return RecordMake(schema, tuple(lift(v) for v in values))


def field(rec, name):
    return FieldGet(rec, name)


def coll_lit(kind, elem_tag, *elems):
    return CollLit(kind, elem_tag, tuple(lift(e) for e in elems))


def size(coll):
    return SizeNode(coll)


def union(left, right):
    return UnionNode(left, right)


def to_seq(coll):
    return ToSeqNode(coll)


def to_set(coll):
    return ToSetNode(coll)


def _elem_tag(coll, where):
    if not isinstance(coll, Expr) or not isinstance(coll.tag, CollT):
        raise TypingError(where, "a collection", getattr(coll, "tag", coll))
    return coll.tag.elem


def query_map(coll, f, g=None):
    return MapNode(coll, fun(_elem_tag(coll, "query_map"), f, g))


def query_flat_map(coll, f, g=None):
    return FlatMapNode(coll, fun(_elem_tag(coll, "query_flat_map"), f, g))


def query_filter(coll, p, g=None):
    return FilterNode(coll, fun(_elem_tag(coll, "query_filter"), p, g))


class Query:
    """Fluent wrapper around a collection expression sharing one Gensym.

    >>> q = Query(books, g).filter(lambda b: ...).flat_map(lambda b: ...)
    >>> q.expr
    """

    def __init__(self, expr, g=None):
        self.expr = expr
        self.g = g or Gensym()

    def map(self, f):
        return Query(query_map(self.expr, f, self.g), self.g)

    def flat_map(self, f):
        return Query(query_flat_map(self.expr, f, self.g), self.g)

    def filter(self, p):
        return Query(query_filter(self.expr, p, self.g), self.g)

    with_filter = filter
