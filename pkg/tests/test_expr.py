import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liftq.errors import TypingError
from liftq.expr import (
    App,
    ArithBin,
    Cmp,
    CollLit,
    Const,
    FieldGet,
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
    children,
    expr_equal,
    free_vars,
    has_unique_binders,
    iter_nodes,
    rebuild,
    rename_binders,
    renumber,
    type_of,
)
from liftq.types import BOOL, INT, SEQ, SET, STRING, CollT, FunT, RecordT, TupleT
from liftq.values import make_coll
from querygen import QueryGen

BOOK = RecordT("Book", (("title", STRING), ("publisher", STRING)))
v1 = TypedVar(1, STRING)
v2 = TypedVar(2, STRING)


def test_const_tag():
    assert type_of(Const(5, INT)) == INT


def test_map_result_takes_root_kind():
    books = Const(make_coll(SET, []), CollT(SET, BOOK))
    b = TypedVar(1, BOOK)
    f = FoasFun(FieldGet(VarRef(b), "title"), b)
    assert type_of(f) == FunT(BOOK, STRING)
    assert type_of(MapNode(books, f)) == CollT(SET, STRING)


def test_tuple_projection_out_of_arity():
    t = TupleMake((Const(1, INT), Const("b", STRING)))
    assert type_of(TupleProj(t, 2)) == STRING
    with pytest.raises(TypingError):
        TupleProj(t, 3)
    with pytest.raises(TypingError):
        TupleProj(t, 0)


@pytest.mark.parametrize("build", [
    lambda: ArithBin("add", Const(1, INT), Const("a", STRING)),
    lambda: Cmp("lt", Const(True, BOOL), Const(False, BOOL)),
    lambda: FieldGet(Const(1, INT), "title"),
    lambda: App(Const(3, INT), Const(3, INT)),
    lambda: CollLit(SEQ, INT, (Const("a", STRING),)),
    lambda: RecordMake(BOOK, (Const("t", STRING),)),
    lambda: StringConcat(Const(1, INT), Const("a", STRING)),
])
def test_ill_typed_constructions_are_rejected(build):
    with pytest.raises(TypingError):
        build()


def test_unknown_field():
    rec = RecordMake(BOOK, (Const("t", STRING), Const("p", STRING)))
    with pytest.raises(TypingError):
        FieldGet(rec, "isbn")


def test_functions_are_not_data():
    f = FoasFun(VarRef(TypedVar(1, INT)), TypedVar(1, INT))
    with pytest.raises(TypingError):
        CollLit(SEQ, FunT(INT, INT), (f,))
    with pytest.raises(TypingError):
        Cmp("eq", f, f)


def test_children():
    a, b = Const("a", STRING), Const("b", STRING)
    assert children(StringConcat(a, b)) == [a, b]
    assert children(Const(1, INT)) == []
    body = VarRef(v1)
    assert children(FoasFun(body, v1)) == [body]


def test_rebuild():
    a, b = Const("a", STRING), Const("b", STRING)
    c, d = Const("c", STRING), Const("d", STRING)
    assert rebuild(StringConcat(a, b), (c, d)) == StringConcat(c, d)
    with pytest.raises(TypingError):
        rebuild(Cmp("eq", Const(1, INT), Const(2, INT)), (Const(1, INT), Const("s", STRING)))


def test_free_vars():
    assert free_vars(VarRef(v1)) == {v1}
    assert free_vars(FoasFun(VarRef(v1), v1)) == set()
    assert free_vars(FoasFun(StringConcat(VarRef(v1), VarRef(v2)), v1)) == {v2}


def test_expr_equal():
    assert expr_equal(Const(1, INT), Const(1, INT))
    assert not expr_equal(Const(1, INT), Const(2, INT))
    assert not expr_equal(FoasFun(VarRef(v1), v1), FoasFun(VarRef(v2), v2))
    assert alpha_equal(FoasFun(VarRef(v1), v1), FoasFun(VarRef(v2), v2))


def test_alpha_equal_distinguishes_free_variables():
    assert not alpha_equal(VarRef(v1), VarRef(v2))
    f = FoasFun(StringConcat(VarRef(v1), VarRef(v2)), v1)
    g = FoasFun(StringConcat(VarRef(v2), VarRef(v1)), v2)
    assert not alpha_equal(f, g)


def test_barendregt_checks():
    x = TypedVar(3, INT)
    dup = TupleMake((FoasFun(VarRef(x), x), FoasFun(VarRef(x), x)))
    assert binder_ids(dup) == [3, 3]
    assert not has_unique_binders(dup)
    counter = iter(range(10, 20))
    fixed = rename_binders(dup, lambda: next(counter), only_duplicates=True)
    assert binder_ids(fixed) == [3, 10]
    assert alpha_equal(fixed, dup)


def test_renumber_is_preorder_and_skips_free_ids():
    free = TypedVar(1, INT)
    a, b = TypedVar(7, INT), TypedVar(9, INT)
    e = TupleMake((FoasFun(ArithBin("add", VarRef(a), VarRef(free)), a), FoasFun(VarRef(b), b)))
    r = renumber(e)
    assert binder_ids(r) == [2, 3]
    assert free_vars(r) == {free}


def _all_nodes(seed):
    return list(iter_nodes(QueryGen(seed).query()))


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_rebuild_identity_and_free_var_bound(seed):
    for n in _all_nodes(seed):
        kids = children(n)
        assert rebuild(n, kids) == n if kids else True
        below = set().union(*(free_vars(k) for k in kids)) if kids else set()
        if isinstance(n, FoasFun):
            below.discard(n.param)
        if kids:
            assert free_vars(n) <= below
        assert type_of(n) == n.tag


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_generated_queries_have_unique_binders_at_birth(seed):
    q = QueryGen(seed).query()
    assert has_unique_binders(q)
    assert free_vars(q) == set()


def test_nodes_are_immutable():
    c = Const(1, INT)
    with pytest.raises(AttributeError):
        c.value = 2
    t = TupleMake((c, c))
    assert type_of(t) == TupleT((INT, INT))
