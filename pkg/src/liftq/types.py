"""Type tags carried by every expression node.

Tags render to (and parse from) the compact type-name syntax used by plan
files and dataset descriptors::

    int  bool  string  double  tuple<int,string>  record<Book>
    seq<int>  set<record<Author>>  fun<int,bool>
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import ParseError, UnknownReferencedSchema


class CollKind(enum.Enum):
    SEQ = "seq"
    SET = "set"

    def __str__(self):
        return self.value


SEQ = CollKind.SEQ
SET = CollKind.SET


class TypeTag:
    """Base class of all type tags. Tags are immutable and compared structurally."""

    __slots__ = ()


@dataclass(frozen=True)
class ScalarT(TypeTag):
    name: str

    def __str__(self):
        return self.name

    def __repr__(self):
        return self.name.capitalize() + "T"


INT = ScalarT("int")
BOOL = ScalarT("bool")
STRING = ScalarT("string")
DOUBLE = ScalarT("double")
SCALARS = {t.name: t for t in (INT, BOOL, STRING, DOUBLE)}


@dataclass(frozen=True)
class TupleT(TypeTag):
    elems: tuple

    def __post_init__(self):
        if len(self.elems) < 2:
            raise ValueError("tuple types need at least two components")

    def __str__(self):
        return "tuple<" + ",".join(map(str, self.elems)) + ">"


@dataclass(frozen=True)
class RecordT(TypeTag):
    """A registered record schema.

    Only ``SchemaRegistry`` should create these; the field list travels with the
    tag so nodes can typecheck field access without a registry in hand.
    """

    name: str
    fields: tuple  # ((field_name, TypeTag), ...)

    def __str__(self):
        return f"record<{self.name}>"

    def __repr__(self):
        return f"RecordT({self.name})"

    def field_index(self, field):
        for i, (name, _) in enumerate(self.fields):
            if name == field:
                return i
        return None

    def field_names(self):
        return [name for name, _ in self.fields]


@dataclass(frozen=True)
class FunT(TypeTag):
    arg: TypeTag
    res: TypeTag

    def __str__(self):
        return f"fun<{self.arg},{self.res}>"


@dataclass(frozen=True)
class CollT(TypeTag):
    kind: CollKind
    elem: TypeTag

    def __str__(self):
        return f"{self.kind.value}<{self.elem}>"


def seq_of(elem):
    return CollT(SEQ, elem)


def set_of(elem):
    return CollT(SET, elem)


def contains_fun(tag):
    """True when a function type occurs anywhere inside ``tag``."""
    if isinstance(tag, FunT):
        return True
    if isinstance(tag, TupleT):
        return any(contains_fun(t) for t in tag.elems)
    if isinstance(tag, CollT):
        return contains_fun(tag.elem)
    return False


def record_types(tag):
    """Yield every RecordT mentioned by ``tag`` (including nested ones)."""
    if isinstance(tag, RecordT):
        yield tag
    elif isinstance(tag, TupleT):
        for t in tag.elems:
            yield from record_types(t)
    elif isinstance(tag, CollT):
        yield from record_types(tag.elem)
    elif isinstance(tag, FunT):
        yield from record_types(tag.arg)
        yield from record_types(tag.res)


def parse_type(text, lookup_record, line=0):
    """Parse a type name.

    ``lookup_record(name)`` returns the RecordT for a schema name or raises
    UnknownReferencedSchema. Whitespace is insignificant.
    """
    text = "".join(text.split())
    pos = 0

    def fail(reason):
        raise ParseError(line, f"bad type {text!r}: {reason}")

    def ident():
        nonlocal pos
        start = pos
        while pos < len(text) and (text[pos].isalnum() or text[pos] == "_"):
            pos += 1
        if start == pos:
            fail(f"expected a name at offset {start}")
        return text[start:pos]

    def expect(ch):
        nonlocal pos
        if pos >= len(text) or text[pos] != ch:
            fail(f"expected {ch!r} at offset {pos}")
        pos += 1

    def args():
        nonlocal pos
        expect("<")
        out = [tag()]
        while pos < len(text) and text[pos] == ",":
            pos += 1
            out.append(tag())
        expect(">")
        return out

    def tag():
        name = ident()
        if name in SCALARS:
            return SCALARS[name]
        if name == "record":
            expect("<")
            schema = ident()
            expect(">")
            return lookup_record(schema)
        if name in ("seq", "set"):
            inner = args()
            if len(inner) != 1:
                fail(f"{name} takes one type argument")
            return CollT(CollKind(name), inner[0])
        if name == "tuple":
            inner = args()
            if len(inner) < 2:
                fail("tuple needs at least two components")
            return TupleT(tuple(inner))
        if name == "fun":
            inner = args()
            if len(inner) != 2:
                fail("fun takes two type arguments")
            return FunT(inner[0], inner[1])
        fail(f"unknown type name {name!r}")

    result = tag()
    if pos != len(text):
        fail(f"trailing characters at offset {pos}")
    return result


def no_records(name):
    raise UnknownReferencedSchema(f"unknown schema {name!r}")
