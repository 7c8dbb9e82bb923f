"""S-expression rendering of expression trees, and its parser.

Grammar (one form per node)::

    (const <type> <literal>)        (var <id>)         (fun <id> <type> <body>)
    (app <f> <a>)                   (concat <l> <r>)   (add|sub|mul|div <l> <r>)
    (eq|ne|lt|le|gt|ge <l> <r>)     (and|or <l> <r>)   (not <e>)
    (tuple <e>...)                  (proj <i> <t>)     (record <Name> <e>...)
    (field <name> <rec>)            (lit seq|set <type> <e>...)
    (map|flatmap|filter <coll> <fun>)                  (size <coll>)
    (union <l> <r>)   (toseq <c>)   (toset <c>)
    (hashjoin <outer> <inner> <okey> <ikey> <combine>)

Literals: ``5``, ``-1.5``, ``true``, ``"text"`` (JSON string escapes), and
``[v ...]`` for tuples, records, sequences and sets; which one is meant comes
from the type. A constant naming a dataset root prints as ``@name`` and is
resolved against the ``roots`` mapping when parsed.

Binders are renumbered 1, 2, ... in pre-order before printing. A node whose
one-line form fits in 80 columns stays on one line; otherwise its children go
on separate lines, indented two spaces deeper.
"""

from __future__ import annotations

import json

from .errors import ParseError, TypingError
from .expr import (
    ARITH_OPS,
    BOOL_OPS,
    CMP_OPS,
    App,
    ArithBin,
    BoolBin,
    Cmp,
    CollLit,
    Const,
    FieldGet,
    FilterNode,
    FlatMapNode,
    FoasFun,
    HashJoinNode,
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
    renumber,
)
from .types import (
    BOOL,
    DOUBLE,
    INT,
    STRING,
    CollKind,
    CollT,
    RecordT,
    TupleT,
    no_records,
    parse_type,
)
from .values import RecordValue, canonical_items, make_coll

WIDTH = 80

_COLL_OPS = {MapNode: "map", FlatMapNode: "flatmap", FilterNode: "filter"}
_UNARY = {SizeNode: "size", ToSeqNode: "toseq", ToSetNode: "toset", Not: "not"}


# --------------------------------------------------------------------------- #
# Printing
# --------------------------------------------------------------------------- #


def format_literal(value, tag):
    if tag == BOOL:
        return "true" if value else "false"
    if tag == INT:
        return str(value)
    if tag == DOUBLE:
        return repr(value)
    if tag == STRING:
        return json.dumps(value)
    if isinstance(tag, TupleT):
        parts = [format_literal(v, t) for v, t in zip(value, tag.elems)]
    elif isinstance(tag, RecordT):
        parts = [format_literal(v, t) for v, (_, t) in zip(value.values, tag.fields)]
    elif isinstance(tag, CollT):
        parts = [format_literal(v, tag.elem) for v in canonical_items(value)]
    else:
        raise TypeError(f"no literal syntax for {tag}")
    return "[" + " ".join(parts) + "]"


def _sexp(e):
    """Nested lists of strings; leading strings are the head atoms."""
    t = type(e)
    if t is Const:
        lit = "@" + e.name if e.name else format_literal(e.value, e.tag)
        return ["const", str(e.tag), lit]
    if t is VarRef:
        return ["var", str(e.var.id)]
    if t is FoasFun:
        return ["fun", str(e.param.id), str(e.param.tag), _sexp(e.body)]
    if t is App:
        return ["app", _sexp(e.fun), _sexp(e.arg)]
    if t is StringConcat:
        return ["concat", _sexp(e.left), _sexp(e.right)]
    if t in (ArithBin, Cmp, BoolBin):
        return [e.op, _sexp(e.left), _sexp(e.right)]
    if t in _UNARY:
        return [_UNARY[t], _sexp(e.children()[0])]
    if t is TupleMake:
        return ["tuple"] + [_sexp(x) for x in e.elems]
    if t is TupleProj:
        return ["proj", str(e.index), _sexp(e.tup)]
    if t is RecordMake:
        return ["record", e.schema.name] + [_sexp(x) for x in e.values]
    if t is FieldGet:
        return ["field", e.field, _sexp(e.record)]
    if t is CollLit:
        return ["lit", e.kind.value, str(e.elem_tag)] + [_sexp(x) for x in e.elems]
    if t in _COLL_OPS:
        return [_COLL_OPS[t]] + [_sexp(x) for x in e.children()]
    if t is UnionNode:
        return ["union", _sexp(e.left), _sexp(e.right)]
    if t is HashJoinNode:
        return ["hashjoin"] + [_sexp(x) for x in e.children()]
    raise TypeError(f"cannot print {t.__name__}")


def _flat(s):
    return "(" + " ".join(x if isinstance(x, str) else _flat(x) for x in s) + ")"


def _layout(s, indent, out):
    flat = _flat(s)
    if indent + len(flat) <= WIDTH:
        out.append(" " * indent + flat)
        return
    head = []
    rest = list(s)
    while rest and isinstance(rest[0], str):
        head.append(rest.pop(0))
    out.append(" " * indent + "(" + " ".join(head))
    for child in rest:
        if isinstance(child, str):
            out.append(" " * (indent + 2) + child)
        else:
            _layout(child, indent + 2, out)
    out[-1] += ")"


def print_plan(e, renumbered=True):
    """Canonical text of ``e``."""
    if renumbered:
        e = renumber(e)
    lines = []
    _layout(_sexp(e), 0, lines)
    return "\n".join(lines)


# --------------------------------------------------------------------------- #
# Parsing
# --------------------------------------------------------------------------- #


class _Token:
    __slots__ = ("text", "line", "col", "string")

    def __init__(self, text, line, col, string=False):
        self.text = text
        self.line = line
        self.col = col
        self.string = string


def _tokenize(text):
    tokens = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch.isspace():
            i, col = i + 1, col + 1
            continue
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in "()[]":
            tokens.append(_Token(ch, line, col))
            i, col = i + 1, col + 1
            continue
        if ch == '"':
            j = i + 1
            while j < n and text[j] != '"':
                if text[j] == "\\":
                    j += 1
                if j < n and text[j] == "\n":
                    raise ParseError(line, "newline in string literal", col)
                j += 1
            if j >= n:
                raise ParseError(line, "unterminated string literal", col)
            try:
                value = json.loads(text[i:j + 1])
            except json.JSONDecodeError as exc:
                raise ParseError(line, f"bad string literal: {exc.msg}", col) from None
            tokens.append(_Token(value, line, col, string=True))
            col += j + 1 - i
            i = j + 1
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in '()[]";':
            j += 1
        tokens.append(_Token(text[i:j], line, col))
        col += j - i
        i = j
    return tokens


def _read(tokens):
    """Tokens to nested lists; each list is tagged with its opening token."""
    pos = 0

    def item():
        nonlocal pos
        if pos >= len(tokens):
            last = tokens[-1] if tokens else _Token("", 1, 1)
            raise ParseError(last.line, "unexpected end of input", last.col)
        tok = tokens[pos]
        pos += 1
        if tok.text in ("(", "[") and not tok.string:
            close = ")" if tok.text == "(" else "]"
            out = _List(tok, tok.text)
            while True:
                if pos >= len(tokens):
                    raise ParseError(tok.line, f"unclosed {tok.text!r}", tok.col)
                nxt = tokens[pos]
                if not nxt.string and nxt.text == close:
                    pos += 1
                    return out
                if not nxt.string and nxt.text in (")", "]"):
                    raise ParseError(nxt.line, f"mismatched {nxt.text!r}", nxt.col)
                out.append(item())
        if tok.text in (")", "]") and not tok.string:
            raise ParseError(tok.line, f"unexpected {tok.text!r}", tok.col)
        return tok

    result = item()
    if pos != len(tokens):
        extra = tokens[pos]
        raise ParseError(extra.line, "trailing input after plan", extra.col)
    return result


class _List(list):
    def __init__(self, tok, bracket):
        super().__init__()
        self.tok = tok
        self.bracket = bracket


class _Parser:
    def __init__(self, registry, roots, free):
        self.registry = registry
        self.roots = roots or {}
        self.free = dict(free or {})

    def fail(self, node, reason):
        tok = node.tok if isinstance(node, _List) else node
        raise ParseError(tok.line, reason, tok.col)

    def atom(self, node, what):
        if isinstance(node, _List) or node.string:
            self.fail(node, f"expected {what}")
        return node.text

    def int_atom(self, node, what):
        text = self.atom(node, what)
        try:
            return int(text)
        except ValueError:
            self.fail(node, f"expected {what}, got {text!r}")

    def type_atom(self, node):
        text = self.atom(node, "a type")
        tok = node
        lookup = self.registry.__getitem__ if self.registry is not None else no_records
        try:
            return parse_type(text, lookup, tok.line)
        except ParseError as exc:
            raise ParseError(tok.line, exc.reason, tok.col) from None

    def literal(self, node, tag):
        if tag == BOOL:
            text = self.atom(node, "true or false")
            if text not in ("true", "false"):
                self.fail(node, f"expected true or false, got {text!r}")
            return text == "true"
        if tag == INT:
            return self.int_atom(node, "an integer")
        if tag == DOUBLE:
            text = self.atom(node, "a number")
            try:
                return float(text)
            except ValueError:
                self.fail(node, f"expected a number, got {text!r}")
        if tag == STRING:
            if isinstance(node, _List) or not node.string:
                self.fail(node, "expected a string literal")
            return node.text
        if not isinstance(node, _List) or node.bracket != "[":
            self.fail(node, f"expected a [...] literal of type {tag}")
        if isinstance(tag, TupleT):
            if len(node) != len(tag.elems):
                self.fail(node, f"tuple literal needs {len(tag.elems)} components")
            return tuple(self.literal(n, t) for n, t in zip(node, tag.elems))
        if isinstance(tag, RecordT):
            if len(node) != len(tag.fields):
                self.fail(node, f"record literal needs {len(tag.fields)} fields")
            return RecordValue(tag.name, tuple(
                self.literal(n, t) for n, (_, t) in zip(node, tag.fields)))
        if isinstance(tag, CollT):
            return make_coll(tag.kind, [self.literal(n, tag.elem) for n in node])
        self.fail(node, f"no literal syntax for {tag}")

    def expr(self, node, scope):
        if not isinstance(node, _List) or node.bracket != "(" or not node:
            self.fail(node, "expected a parenthesized node")
        head = self.atom(node[0], "a node name")
        args = node[1:]
        try:
            return self._build(node, head, args, scope)
        except TypingError as exc:
            exc.line, exc.col = node.tok.line, node.tok.col
            raise

    def arity(self, node, args, n):
        if len(args) != n:
            self.fail(node, f"{self.atom(node[0], 'name')} takes {n} arguments, got {len(args)}")

    def _build(self, node, head, args, scope):
        sub = lambda a: self.expr(a, scope)  # noqa: E731
        if head == "const":
            self.arity(node, args, 2)
            tag = self.type_atom(args[0])
            lit = args[1]
            if not isinstance(lit, _List) and not lit.string and lit.text.startswith("@"):
                name = lit.text[1:]
                if name not in self.roots:
                    self.fail(lit, f"unknown dataset root {name!r}")
                root = self.roots[name]
                value = root.value if isinstance(root, Const) else root
                return Const(value, tag, name=name)
            return Const(self.literal(lit, tag), tag)
        if head == "var":
            self.arity(node, args, 1)
            vid = self.int_atom(args[0], "a variable id")
            var = scope.get(vid) or self.free.get(vid)
            if var is None:
                self.fail(node, f"unbound variable {vid}")
            return VarRef(var)
        if head == "fun":
            self.arity(node, args, 3)
            vid = self.int_atom(args[0], "a variable id")
            if vid < 1:
                self.fail(args[0], "variable ids are positive")
            var = TypedVar(vid, self.type_atom(args[1]))
            return FoasFun(self.expr(args[2], {**scope, vid: var}), var)
        if head == "app":
            self.arity(node, args, 2)
            return App(sub(args[0]), sub(args[1]))
        if head == "concat":
            self.arity(node, args, 2)
            return StringConcat(sub(args[0]), sub(args[1]))
        if head in ARITH_OPS:
            self.arity(node, args, 2)
            return ArithBin(head, sub(args[0]), sub(args[1]))
        if head in CMP_OPS:
            self.arity(node, args, 2)
            return Cmp(head, sub(args[0]), sub(args[1]))
        if head in BOOL_OPS:
            self.arity(node, args, 2)
            return BoolBin(head, sub(args[0]), sub(args[1]))
        if head == "not":
            self.arity(node, args, 1)
            return Not(sub(args[0]))
        if head == "tuple":
            return TupleMake(tuple(sub(a) for a in args))
        if head == "proj":
            self.arity(node, args, 2)
            return TupleProj(sub(args[1]), self.int_atom(args[0], "an index"))
        if head == "record":
            if not args:
                self.fail(node, "record needs a schema name")
            name = self.atom(args[0], "a schema name")
            if self.registry is None or name not in self.registry:
                self.fail(args[0], f"unknown schema {name!r}")
            return RecordMake(self.registry[name], tuple(sub(a) for a in args[1:]))
        if head == "field":
            self.arity(node, args, 2)
            return FieldGet(sub(args[1]), self.atom(args[0], "a field name"))
        if head == "lit":
            if len(args) < 2:
                self.fail(node, "lit needs a kind and an element type")
            kind = self.atom(args[0], "seq or set")
            if kind not in ("seq", "set"):
                self.fail(args[0], f"expected seq or set, got {kind!r}")
            return CollLit(CollKind(kind), self.type_atom(args[1]),
                           tuple(sub(a) for a in args[2:]))
        if head in ("map", "flatmap", "filter"):
            self.arity(node, args, 2)
            cls = {"map": MapNode, "flatmap": FlatMapNode, "filter": FilterNode}[head]
            return cls(sub(args[0]), sub(args[1]))
        if head in ("size", "toseq", "toset"):
            self.arity(node, args, 1)
            cls = {"size": SizeNode, "toseq": ToSeqNode, "toset": ToSetNode}[head]
            return cls(sub(args[0]))
        if head == "union":
            self.arity(node, args, 2)
            return UnionNode(sub(args[0]), sub(args[1]))
        if head == "hashjoin":
            self.arity(node, args, 5)
            return HashJoinNode(*(sub(a) for a in args))
        self.fail(node, f"unknown node {head!r}")


def parse_plan(text, registry=None, roots=None, free=None):
    """Parse plan text back to a tree.

    ``roots`` maps dataset root names (``@name`` literals) to values or Const
    nodes; ``free`` maps ids of free variables to TypedVars.
    """
    tree = _read(_tokenize(text))
    return _Parser(registry, roots, free).expr(tree, {})

