import operator

import pytest
from hypothesis import given
from hypothesis import strategies as st

from liftq import embed as E
from liftq.embed import Gensym, Query, SchemaRegistry, fun, pure
from liftq.errors import (
    DuplicateField,
    DuplicateSchema,
    TypingError,
    UnknownReferencedSchema,
    ValueTagMismatch,
)
from liftq.expr import (
    App,
    ArithBin,
    CollLit,
    Const,
    FieldGet,
    FilterNode,
    FlatMapNode,
    FoasFun,
    MapNode,
    RecordMake,
    StringConcat,
    TupleMake,
    TupleProj,
    TypedVar,
    VarRef,
    alpha_equal,
    binder_ids,
    has_unique_binders,
    iter_nodes,
)
from liftq.interp import interpret
from liftq.types import BOOL, DOUBLE, INT, SEQ, SET, STRING, CollT, FunT, RecordT
from liftq.values import make_coll


def book_registry():
    reg = SchemaRegistry().register("Author", [("firstName", STRING), ("lastName", STRING)])
    reg = reg.register("Book", [("title", STRING), ("publisher", STRING),
                                ("authors", CollT(SEQ, reg["Author"]))])
    return reg.register("BookData", [("title", STRING), ("authorName", STRING),
                                     ("coauthors", INT)])


def test_register_schemas():
    reg = book_registry()
    assert len(reg) == 3
    assert reg["Book"].fields[2] == ("authors", CollT(SEQ, reg["Author"]))
    with pytest.raises(DuplicateSchema):
        reg.register("Author", [("x", INT)])


def test_registry_is_persistent():
    empty = SchemaRegistry()
    one = empty.register("A", [("x", INT)])
    assert "A" in one and "A" not in empty


def test_register_rejects_bad_fields():
    reg = SchemaRegistry()
    with pytest.raises(DuplicateField):
        reg.register("A", [("x", INT), ("x", STRING)])
    with pytest.raises(UnknownReferencedSchema):
        reg.register("A", [("b", RecordT("B", (("y", INT),)))])
    with pytest.raises(TypingError):
        reg.register("A", [("f", FunT(INT, INT))])
    with pytest.raises(UnknownReferencedSchema):
        reg["Missing"]


def test_pure():
    assert pure("foo", STRING) == Const("foo", STRING)
    assert pure(0, INT) == Const(0, INT)
    with pytest.raises(ValueTagMismatch):
        pure("foo", INT)
    with pytest.raises(ValueTagMismatch):
        pure(True, INT)


def test_fun_reifies_host_function():
    g = Gensym()
    f = fun(STRING, lambda s: E.concat(s, pure("!", STRING)), g)
    v = TypedVar(1, STRING)
    assert f == FoasFun(StringConcat(VarRef(v), Const("!", STRING)), v)


def test_fun_identity():
    v = TypedVar(1, INT)
    assert fun(INT, lambda x: x, Gensym()) == FoasFun(VarRef(v), v)


def test_nested_fun_gets_distinct_ids():
    g = Gensym()
    f = fun(INT, lambda x: fun(INT, lambda y: E.add(x, y), g), g)
    v1, v2 = TypedVar(1, INT), TypedVar(2, INT)
    assert f == FoasFun(FoasFun(ArithBin("add", VarRef(v1), VarRef(v2)), v2), v1)


def test_fun_is_referentially_stable():
    body = lambda s: E.concat(s, pure("!", STRING))  # noqa: E731
    assert alpha_equal(fun(STRING, body), fun(STRING, body))


def test_app():
    ident = fun(INT, lambda x: x, Gensym())
    assert E.app(ident, pure(3, INT)).tag == INT
    with pytest.raises(TypingError):
        E.app(pure(3, INT), pure(3, INT))
    shout = fun(STRING, lambda s: s + "!", Gensym())
    with pytest.raises(TypingError):
        E.app(shout, pure(3, INT))


def test_author_name_tree():
    author = VarRef(TypedVar(1, book_registry()["Author"]))
    e = E.concat(E.concat(E.field(author, "firstName"), pure(" ", STRING)),
                 E.field(author, "lastName"))
    assert e == StringConcat(StringConcat(FieldGet(author, "firstName"), Const(" ", STRING)),
                             FieldGet(author, "lastName"))
    assert author["firstName"] + " " + author["lastName"] == e


def test_tuple_and_projection():
    x, y = pure(1, INT), pure("y", STRING)
    assert E.proj(E.tuple_(x, y), 1) == TupleProj(TupleMake((x, y)), 1)
    with pytest.raises(TypingError):
        E.eq(pure(1, INT), pure("a", STRING))


def test_running_example_shape():
    reg = book_registry()
    g = Gensym()
    books = Const(make_coll(SET, []), CollT(SET, reg["Book"]), name="books")
    q = E.query_flat_map(
        E.query_filter(books, lambda b: E.eq(E.field(b, "publisher"),
                                             pure("Pearson Education", STRING)), g),
        lambda b: E.query_map(E.field(b, "authors"), lambda a: E.record(
            reg["BookData"], E.field(b, "title"),
            E.concat(E.concat(E.field(a, "firstName"), pure(" ", STRING)), E.field(a, "lastName")),
            E.sub(E.size(E.field(b, "authors")), pure(1, INT))), g),
        g)
    assert isinstance(q, FlatMapNode)
    assert isinstance(q.coll, FilterNode) and q.coll.coll is books
    inner = q.fun.body
    assert isinstance(inner, MapNode) and isinstance(inner.fun.body, RecordMake)
    assert q.tag == CollT(SET, reg["BookData"])
    assert binder_ids(q) == [1, 2, 3]


def test_query_map_identity_keeps_tag():
    lit = E.coll_lit(SEQ, INT, 1, 2)
    q = E.query_map(lit, lambda x: x)
    assert isinstance(q, MapNode) and q.tag == lit.tag
    assert isinstance(lit, CollLit)


def test_filter_needs_boolean_predicate():
    c = E.coll_lit(SET, INT, 1)
    with pytest.raises(TypingError):
        E.query_filter(c, lambda x: E.add(x, 1))


@pytest.mark.parametrize("kind", [SEQ, SET])
@pytest.mark.parametrize("inner", [SEQ, SET])
def test_kind_preservation(kind, inner):
    c = E.coll_lit(kind, INT, 1, 2)
    assert E.query_map(c, lambda x: E.mul(x, 2)).tag.kind is kind
    assert E.query_filter(c, lambda x: E.gt(x, 1)).tag.kind is kind
    fm = E.query_flat_map(c, lambda x: E.coll_lit(inner, INT, x, x))
    assert fm.tag.kind is kind


def test_shared_gensym_query_is_barendregt():
    g = Gensym()
    c = E.coll_lit(SEQ, INT, 1, 2, 3)
    q = (Query(c, g).filter(lambda x: x > 1)
         .flat_map(lambda x: Query(c, g).map(lambda y: E.add(x, y)).expr)
         .map(lambda z: z * 2).expr)
    assert has_unique_binders(q)
    assert len(binder_ids(q)) == 4
    assert not any(isinstance(n, App) for n in iter_nodes(q))


small_ints = st.integers(min_value=-10**6, max_value=10**6)
doubles = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)
words = st.text(alphabet="abc xyz", max_size=6)


def run(e):
    return interpret(e)


@given(small_ints, small_ints)
def test_lifted_int_ops_match_host(a, b):
    A, B = pure(a, INT), pure(b, INT)
    assert run(E.add(A, B)) == a + b
    assert run(E.sub(A, B)) == a - b
    assert run(E.mul(A, B)) == a * b
    if b:
        q = abs(a) // abs(b)
        assert run(E.div(A, B)) == (q if (a < 0) == (b < 0) else -q)
    for name, op in [("eq", operator.eq), ("ne", operator.ne), ("lt", operator.lt),
                     ("le", operator.le), ("gt", operator.gt), ("ge", operator.ge)]:
        assert run(getattr(E, name)(A, B)) == op(a, b)


@given(doubles, doubles)
def test_lifted_double_ops_match_host(a, b):
    A, B = pure(a, DOUBLE), pure(b, DOUBLE)
    assert run(E.add(A, B)) == a + b
    assert run(E.sub(A, B)) == a - b
    assert run(E.mul(A, B)) == a * b
    if b:
        assert run(E.div(A, B)) == a / b
    assert run(E.lt(A, B)) == (a < b)


@given(words, words)
def test_lifted_string_ops_match_host(a, b):
    A, B = pure(a, STRING), pure(b, STRING)
    assert run(E.concat(A, B)) == a + b
    assert run(E.le(A, B)) == (a <= b)
    assert run(E.eq(A, B)) == (a == b)


@given(st.booleans(), st.booleans())
def test_lifted_bool_ops_match_host(a, b):
    A, B = pure(a, BOOL), pure(b, BOOL)
    assert run(E.and_(A, B)) == (a and b)
    assert run(E.or_(A, B)) == (a or b)
    assert run(E.not_(A)) == (not a)


@given(st.lists(small_ints, max_size=8), st.lists(small_ints, max_size=8))
def test_lifted_collection_ops_match_host(xs, ys):
    a, b = E.coll_lit(SEQ, INT, *xs), E.coll_lit(SEQ, INT, *ys)
    assert list(run(E.union(a, b))) == xs + ys
    assert run(E.size(a)) == len(xs)
    assert set(run(E.to_set(a))) == set(xs)
    assert list(run(E.to_seq(E.to_set(a)))) == sorted(set(xs))
    assert list(run(E.query_map(a, lambda x: E.mul(x, 3)))) == [x * 3 for x in xs]
    assert list(run(E.query_filter(a, lambda x: E.gt(x, 0)))) == [x for x in xs if x > 0]
    pairs = run(E.query_flat_map(a, lambda x: E.query_map(b, lambda y: E.tuple_(x, y))))
    assert list(pairs) == [(x, y) for x in xs for y in ys]
