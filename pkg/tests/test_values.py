import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from liftq.errors import DivisionByZero
from liftq.types import BOOL, DOUBLE, INT, SEQ, SET, STRING, CollT, RecordT, TupleT
from liftq.values import (
    RecordValue,
    SeqValue,
    SetValue,
    arith,
    canonical_items,
    compare,
    conforms,
    make_coll,
    sort_key,
    wrap_int,
)

i64 = st.integers(min_value=-(2**63), max_value=2**63 - 1)


def test_wrap_int_overflow():
    assert wrap_int(2**63) == -(2**63)
    assert wrap_int(-(2**63) - 1) == 2**63 - 1


@given(i64, i64)
def test_int_add_matches_twos_complement(a, b):
    r = arith("add", a, b, INT)
    assert -(2**63) <= r < 2**63
    assert (r - (a + b)) % 2**64 == 0


@pytest.mark.parametrize("a,b,q", [(7, 2, 3), (-7, 2, -3), (7, -2, -3), (-7, -2, 3)])
def test_int_division_truncates(a, b, q):
    assert arith("div", a, b, INT) == q


def test_division_by_zero():
    with pytest.raises(DivisionByZero):
        arith("div", 1, 0, INT)
    with pytest.raises(DivisionByZero):
        arith("div", 1.0, 0.0, DOUBLE)


def test_double_arith():
    assert arith("mul", 1.5, 2.0, DOUBLE) == 3.0
    assert arith("div", 1.0, 4.0, DOUBLE) == 0.25


def test_compare():
    assert compare("lt", "a", "b")
    assert compare("eq", (1, "x"), (1, "x"))
    assert compare("ne", RecordValue("R", (1,)), RecordValue("R", (2,)))
    assert not compare("ge", 1, 2)


def test_set_dedupes_and_canonical_order():
    s = make_coll(SET, [3, 1, 3, 2])
    assert isinstance(s, SetValue)
    assert len(s) == 3
    assert canonical_items(s) == [1, 2, 3]
    q = make_coll(SEQ, [3, 1, 3])
    assert isinstance(q, SeqValue)
    assert canonical_items(q) == [3, 1, 3]


def test_sort_key_orders_mixed_structures():
    items = [RecordValue("R", (2, "b")), RecordValue("R", (1, "z")), RecordValue("R", (1, "a"))]
    assert sorted(items, key=sort_key) == [items[2], items[1], items[0]]
    sets = [make_coll(SET, [2]), make_coll(SET, [1, 5]), make_coll(SET, [])]
    assert sorted(sets, key=sort_key)[0] == make_coll(SET, [])


def test_conforms():
    row = RecordT("Row", (("k", INT), ("s", STRING)))
    assert conforms(3, INT)
    assert not conforms(True, INT)
    assert not conforms(3, BOOL)
    assert conforms(2.5, DOUBLE)
    assert conforms((1, "a"), TupleT((INT, STRING)))
    assert conforms(RecordValue("Row", (1, "a")), row)
    assert not conforms(RecordValue("Row", ("a", 1)), row)
    assert conforms(make_coll(SET, [1, 2]), CollT(SET, INT))
    assert not conforms(make_coll(SEQ, [1, 2]), CollT(SET, INT))
    assert not conforms(2**64, INT)
    assert conforms(math.inf, DOUBLE)
