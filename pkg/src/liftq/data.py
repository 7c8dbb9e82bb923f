"""Dataset descriptors, JSON data loading and the join benchmark generator.

Descriptor document::

    {"schemas": [{"name": "Author",
                  "fields": [{"name": "firstName", "type": "string"}, ...]}],
     "roots": [{"name": "books", "kind": "set", "element": "record<Book>"}]}

Data document: an object mapping each root name to an array of records.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from importlib import resources
from typing import NamedTuple

from .embed import SchemaRegistry
from .errors import (
    MissingField,
    ParseError,
    SchemaError,
    UnknownCollection,
    ValueTagMismatch,
)
from .expr import Const
from .types import BOOL, DOUBLE, INT, SEQ, STRING, CollKind, CollT, RecordT, TupleT
from .values import RecordValue, canonical_items, make_coll


@dataclass(frozen=True)
class RootDecl:
    name: str
    kind: CollKind
    tag: CollT


class Descriptor(NamedTuple):
    registry: SchemaRegistry
    roots: tuple

    def root(self, name):
        for r in self.roots:
            if r.name == name:
                return r
        raise UnknownCollection(f"no root collection named {name!r}")


def _line_of(text, needle):
    idx = text.find(needle)
    return text.count("\n", 0, idx) + 1 if idx >= 0 else 0


def _loads(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.msg) from None


def _require(obj, key, kind, text, where):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(_line_of(text, where), f"{where}: missing {key!r}")
    value = obj[key]
    if not isinstance(value, kind):
        raise ParseError(_line_of(text, json.dumps(value)), f"{where}: {key!r} has the wrong shape")
    return value


def load_descriptor(text):
    """Parse a descriptor document into a registry and root declarations."""
    doc = _loads(text)
    if not isinstance(doc, dict):
        raise ParseError(1, "descriptor must be a JSON object")
    reg = SchemaRegistry()
    for schema in _require(doc, "schemas", list, text, "descriptor"):
        name = _require(schema, "name", str, text, "schema")
        fields = []
        for f in _require(schema, "fields", list, text, f"schema {name}"):
            fname = _require(f, "name", str, text, f"schema {name}")
            ftype = _require(f, "type", str, text, f"{name}.{fname}")
            fields.append((fname, reg.parse_type(ftype, _line_of(text, f'"{ftype}"'))))
        reg = reg.register(name, fields)
    roots = []
    seen = set()
    for root in _require(doc, "roots", list, text, "descriptor"):
        rname = _require(root, "name", str, text, "root")
        kind = _require(root, "kind", str, text, f"root {rname}")
        if kind not in ("seq", "set"):
            raise ParseError(_line_of(text, f'"{kind}"'), f"root {rname}: kind must be seq or set")
        elem = _require(root, "element", str, text, f"root {rname}")
        if rname in seen:
            raise SchemaError(f"root {rname!r} declared twice")
        seen.add(rname)
        etag = reg.parse_type(elem, _line_of(text, f'"{elem}"'))
        k = CollKind(kind)
        roots.append(RootDecl(rname, k, CollT(k, etag)))
    return Descriptor(reg, tuple(roots))


def value_from_json(obj, tag, path="$"):
    """Convert decoded JSON to a value of type ``tag``."""
    if tag == INT:
        if type(obj) is not int:
            raise ValueTagMismatch(path, f"expected int, got {obj!r}")
        if not -(2**63) <= obj < 2**63:
            raise ValueTagMismatch(path, f"{obj} does not fit in 64 bits")
        return obj
    if tag == DOUBLE:
        if type(obj) not in (int, float):
            raise ValueTagMismatch(path, f"expected double, got {obj!r}")
        return float(obj)
    if tag == BOOL:
        if type(obj) is not bool:
            raise ValueTagMismatch(path, f"expected bool, got {obj!r}")
        return obj
    if tag == STRING:
        if type(obj) is not str:
            raise ValueTagMismatch(path, f"expected string, got {obj!r}")
        return obj
    if isinstance(tag, TupleT):
        if not isinstance(obj, list) or len(obj) != len(tag.elems):
            raise ValueTagMismatch(path, f"expected a {len(tag.elems)}-element array")
        return tuple(value_from_json(v, t, f"{path}[{i}]")
                     for i, (v, t) in enumerate(zip(obj, tag.elems)))
    if isinstance(tag, RecordT):
        if not isinstance(obj, dict):
            raise ValueTagMismatch(path, f"expected a {tag.name} object")
        extra = set(obj) - set(tag.field_names())
        if extra:
            raise ValueTagMismatch(path, f"unexpected field(s) {sorted(extra)} for {tag.name}")
        values = []
        for fname, ftag in tag.fields:
            if fname not in obj:
                raise MissingField(path, fname)
            values.append(value_from_json(obj[fname], ftag, f"{path}.{fname}"))
        return RecordValue(tag.name, tuple(values))
    if isinstance(tag, CollT):
        if not isinstance(obj, list):
            raise ValueTagMismatch(path, "expected an array")
        return make_coll(tag.kind, [value_from_json(v, tag.elem, f"{path}[{i}]")
                                    for i, v in enumerate(obj)])
    raise ValueTagMismatch(path, f"values of type {tag} cannot be loaded")


def value_to_json(value, tag):
    """Inverse of ``value_from_json``; sets become arrays in canonical order."""
    if isinstance(tag, TupleT):
        return [value_to_json(v, t) for v, t in zip(value, tag.elems)]
    if isinstance(tag, RecordT):
        return {name: value_to_json(v, t) for v, (name, t) in zip(value.values, tag.fields)}
    if isinstance(tag, CollT):
        return [value_to_json(v, tag.elem) for v in canonical_items(value)]
    return value


def load_data(descriptor, text):
    """Materialize every root of ``descriptor`` from a data document."""
    doc = _loads(text) if isinstance(text, str) else text
    if not isinstance(doc, dict):
        raise ParseError(1, "data document must be a JSON object")
    names = {r.name for r in descriptor.roots}
    for key in doc:
        if key not in names:
            raise UnknownCollection(f"data for undeclared collection {key!r}")
    out = {}
    for root in descriptor.roots:
        if root.name not in doc:
            raise MissingField("$", root.name)
        out[root.name] = value_from_json(doc[root.name], root.tag, f"$.{root.name}")
    return out


def dump_data(descriptor, values):
    """Serialize root values back to a data document (JSON text)."""
    doc = {r.name: value_to_json(values[r.name], r.tag) for r in descriptor.roots}
    return json.dumps(doc, indent=2)


def root_consts(descriptor, values=None):
    """Const nodes for every root; roots without data become empty placeholders."""
    values = values or {}
    out = {}
    for r in descriptor.roots:
        value = values.get(r.name, make_coll(r.kind, ()))
        out[r.name] = Const(value, r.tag, name=r.name)
    return out


def _read_bundled(name):
    return resources.files("liftq.datasets").joinpath(name).read_text()


def bundled_path(name):
    """Filesystem path of a dataset file shipped with the package."""
    return str(resources.files("liftq.datasets").joinpath(name))


def books_dataset():
    """The running example: two books, one from Pearson Education."""
    desc = load_descriptor(_read_bundled("books.schema.json"))
    return desc, load_data(desc, _read_bundled("books.data.json"))


def gen_join_benchmark(n, seed=0):
    """Two sequences of ``n`` records where every person owns exactly one account.

    Keys are shuffled permutations of ``0..n-1``; the result is a function of
    ``(n, seed)`` only. Returns ``(descriptor, values)``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = random.Random(seed)
    desc = load_descriptor(_read_bundled("join.schema.json"))
    person_ids = list(range(n))
    owner_ids = list(range(n))
    rng.shuffle(person_ids)
    rng.shuffle(owner_ids)
    persons = [RecordValue("Person", (pid, f"p{pid}")) for pid in person_ids]
    accounts = [RecordValue("Account", (oid, rng.randrange(0, 10_000))) for oid in owner_ids]
    return desc, {
        "persons": make_coll(SEQ, persons),
        "accounts": make_coll(SEQ, accounts),
    }
