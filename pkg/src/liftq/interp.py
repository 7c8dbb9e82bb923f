"""Environment-based interpreter with optional cost instrumentation.

Every element fed to a map, flatMap or filter closure counts as one
``elements_visited``; filters also count one ``predicate_evals`` per element.
A hash join counts one visit per inner element while building its table and
one visit plus one ``hash_lookups`` per outer element while probing.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import UnboundVariable
from .expr import (
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
    UnionNode,
    VarRef,
)
from .types import SEQ
from .values import (
    Closure,
    RecordValue,
    SeqValue,
    SetValue,
    arith,
    canonical_items,
    compare,
    make_coll,
)


@dataclass
class CostCounters:
    elements_visited: int = 0
    predicate_evals: int = 0
    hash_lookups: int = 0

    def as_dict(self):
        return {
            "elementsVisited": self.elements_visited,
            "predicateEvals": self.predicate_evals,
            "hashLookups": self.hash_lookups,
        }


class Interpreter:
    def __init__(self, counters=None):
        self.counters = counters if counters is not None else CostCounters()
        self._dispatch = {
            Const: self._const,
            VarRef: self._var,
            FoasFun: self._fun,
            App: self._app,
            StringConcat: self._concat,
            ArithBin: self._arith,
            Cmp: self._cmp,
            BoolBin: self._boolbin,
            Not: self._not,
            TupleMake: self._tuple,
            TupleProj: self._proj,
            RecordMake: self._record,
            FieldGet: self._field,
            CollLit: self._lit,
            MapNode: self._map,
            FlatMapNode: self._flat_map,
            FilterNode: self._filter,
            SizeNode: self._size,
            UnionNode: self._union,
            ToSeqNode: self._to_seq,
            ToSetNode: self._to_set,
            HashJoinNode: self._hash_join,
        }

    def eval(self, e, env):
        return self._dispatch[type(e)](e, env)

    def apply(self, closure, arg):
        env = dict(closure.env)
        env[closure.param.id] = arg
        return self.eval(closure.body, env)

    def _const(self, e, env):
        return e.value

    def _var(self, e, env):
        try:
            return env[e.var.id]
        except KeyError:
            raise UnboundVariable(e.var.id) from None

    def _fun(self, e, env):
        return Closure(e.param, e.body, env)

    def _app(self, e, env):
        f = self.eval(e.fun, env)
        return self.apply(f, self.eval(e.arg, env))

    def _concat(self, e, env):
        return self.eval(e.left, env) + self.eval(e.right, env)

    def _arith(self, e, env):
        return arith(e.op, self.eval(e.left, env), self.eval(e.right, env), e.tag)

    def _cmp(self, e, env):
        return compare(e.op, self.eval(e.left, env), self.eval(e.right, env))

    def _boolbin(self, e, env):
        left = self.eval(e.left, env)
        if e.op == "and":
            return self.eval(e.right, env) if left else False
        return True if left else self.eval(e.right, env)

    def _not(self, e, env):
        return not self.eval(e.operand, env)

    def _tuple(self, e, env):
        return tuple(self.eval(x, env) for x in e.elems)

    def _proj(self, e, env):
        return self.eval(e.tup, env)[e.index - 1]

    def _record(self, e, env):
        return RecordValue(e.schema.name, tuple(self.eval(x, env) for x in e.values))

    def _field(self, e, env):
        return self.eval(e.record, env).values[e.index]

    def _lit(self, e, env):
        return make_coll(e.kind, [self.eval(x, env) for x in e.elems])

    def _map(self, e, env):
        coll = self.eval(e.coll, env)
        f = self.eval(e.fun, env)
        c = self.counters
        out = []
        for item in coll:
            c.elements_visited += 1
            out.append(self.apply(f, item))
        return make_coll(e.tag.kind, out)

    def _flat_map(self, e, env):
        coll = self.eval(e.coll, env)
        f = self.eval(e.fun, env)
        c = self.counters
        if e.tag.kind is SEQ:
            out = []
            for item in coll:
                c.elements_visited += 1
                out.extend(canonical_items(self.apply(f, item)))
            return SeqValue(tuple(out))
        acc = set()
        for item in coll:
            c.elements_visited += 1
            acc.update(self.apply(f, item).items)
        return SetValue(frozenset(acc))

    def _filter(self, e, env):
        coll = self.eval(e.coll, env)
        p = self.eval(e.pred, env)
        c = self.counters
        out = []
        for item in coll:
            c.elements_visited += 1
            c.predicate_evals += 1
            if self.apply(p, item):
                out.append(item)
        return make_coll(e.tag.kind, out)

    def _size(self, e, env):
        return len(self.eval(e.coll, env))

    def _union(self, e, env):
        left = self.eval(e.left, env)
        right = self.eval(e.right, env)
        if e.tag.kind is SEQ:
            return SeqValue(left.items + right.items)
        return SetValue(left.items | right.items)

    def _to_seq(self, e, env):
        return SeqValue(tuple(canonical_items(self.eval(e.coll, env))))

    def _to_set(self, e, env):
        return SetValue(frozenset(self.eval(e.coll, env)))

    def _hash_join(self, e, env):
        outer = self.eval(e.outer, env)
        inner = self.eval(e.inner, env)
        okey = self.eval(e.outer_key, env)
        ikey = self.eval(e.inner_key, env)
        combine = self.eval(e.combine, env)
        c = self.counters
        table = {}
        for item in canonical_items(inner):
            c.elements_visited += 1
            table.setdefault(self.apply(ikey, item), []).append(item)
        out = []
        for item in outer:
            c.elements_visited += 1
            c.hash_lookups += 1
            for match in table.get(self.apply(okey, item), ()):
                out.append(self.apply(combine, (item, match)))
        return make_coll(e.tag.kind, out)


def interpret(e, env=None, counters=None):
    """Evaluate ``e``; free variables are looked up by id in ``env``."""
    return Interpreter(counters).eval(e, dict(env or {}))


def interpret_closed(e):
    """Evaluate a closed tree; returns ``(value, counters)``."""
    counters = CostCounters()
    value = Interpreter(counters).eval(e, {})
    return value, counters
