import json
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liftq.data import (
    books_dataset,
    bundled_path,
    dump_data,
    gen_join_benchmark,
    load_data,
    load_descriptor,
    root_consts,
)
from liftq.errors import (
    DuplicateSchema,
    MissingField,
    ParseError,
    UnknownCollection,
    UnknownReferencedSchema,
    ValueTagMismatch,
)
from liftq.interp import interpret
from liftq.queries import equijoin
from liftq.types import SEQ, SET, CollT
from liftq.values import SetValue, conforms


def read(name):
    with open(bundled_path(name), encoding="utf-8") as fh:
        return fh.read()


BOOKS_SCHEMA = read("books.schema.json")


def test_book_descriptor():
    desc = load_descriptor(BOOKS_SCHEMA)
    assert {"Author", "Book"} <= set(desc.registry)
    assert [r.name for r in desc.roots] == ["books"]
    assert desc.root("books").tag == CollT(SET, desc.registry["Book"])
    with pytest.raises(UnknownCollection):
        desc.root("nope")


def test_root_with_no_schemas():
    text = '{"schemas": [], "roots": [{"name": "b", "kind": "set", "element": "record<Book>"}]}'
    with pytest.raises(UnknownReferencedSchema):
        load_descriptor(text)


def test_duplicate_schema():
    schema = '{"name": "A", "fields": [{"name": "x", "type": "int"}]}'
    with pytest.raises(DuplicateSchema):
        load_descriptor(f'{{"schemas": [{schema}, {schema}], "roots": []}}')


def test_descriptor_syntax_errors_carry_lines():
    with pytest.raises(ParseError) as info:
        load_descriptor('{\n  "schemas": [\n  ,]\n}')
    assert info.value.line == 3
    with pytest.raises(ParseError):
        load_descriptor('{"schemas": [], "roots": [{"name": "r", "kind": "bag", "element": "int"}]}')
    with pytest.raises(ParseError):
        load_descriptor('{"roots": []}')


def test_two_book_dataset():
    desc, values = books_dataset()
    books = values["books"]
    assert isinstance(books, SetValue) and len(books) == 2
    assert conforms(books, desc.root("books").tag)


def test_missing_field():
    desc = load_descriptor(BOOKS_SCHEMA)
    doc = {"books": [{"title": "t", "authors": []}]}
    with pytest.raises(MissingField) as info:
        load_data(desc, json.dumps(doc))
    assert info.value.field == "publisher"


def test_value_mismatch_and_unknown_collection():
    desc = load_descriptor(BOOKS_SCHEMA)
    with pytest.raises(ValueTagMismatch) as info:
        load_data(desc, json.dumps({"books": [{"title": 1, "publisher": "p", "authors": []}]}))
    assert info.value.path == "$.books[0].title"
    with pytest.raises(UnknownCollection):
        load_data(desc, json.dumps({"books": [], "films": []}))


def test_set_root_deduplicates():
    desc = load_descriptor(BOOKS_SCHEMA)
    book = {"title": "t", "publisher": "p", "authors": []}
    assert len(load_data(desc, json.dumps({"books": [book, book]}))["books"]) == 1


def test_round_trip():
    desc, values = books_dataset()
    assert load_data(desc, dump_data(desc, values)) == values


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=1, max_value=60), st.integers())
def test_join_benchmark_round_trip_and_tags(n, seed):
    desc, values = gen_join_benchmark(n, seed)
    for r in desc.roots:
        assert r.kind is SEQ and len(values[r.name]) == n
        assert conforms(values[r.name], r.tag)
    assert load_data(desc, dump_data(desc, values)) == values


def test_join_benchmark_single_match():
    desc, values = gen_join_benchmark(1, seed=9)
    assert len(interpret(equijoin(desc.registry, root_consts(desc, values)))) == 1


def test_join_benchmark_matches_nested_loop_oracle():
    desc, values = gen_join_benchmark(100, seed=42)
    persons, accounts = values["persons"], values["accounts"]
    oracle = [(p.values[1], a.values[1]) for p in persons for a in accounts
              if a.values[0] == p.values[0]]
    assert len(oracle) == 100
    got = interpret(equijoin(desc.registry, root_consts(desc, values)))
    assert Counter(got) == Counter(oracle)


def test_join_benchmark_is_deterministic():
    assert gen_join_benchmark(50, 7) == gen_join_benchmark(50, 7)
    assert gen_join_benchmark(50, 7) != gen_join_benchmark(50, 8)
    with pytest.raises(ValueError):
        gen_join_benchmark(0, 1)
