"""Semantics-preserving rewrites over expression trees.

The optimizer is a pipeline of phases. Each phase takes a well-typed tree to a
tree of the same type, never adds free variables, and hands back a tree whose
binders are pairwise distinct. Rules are applied bottom-up; phases that can
expose new redexes repeat until the tree stops changing.

Default order::

    beta_simplify, fuse, unnest, hoist_filter, hash_join, beta_simplify
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .embed import Gensym
from .errors import IterationLimitExceeded, TypingError
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
    StringConcat,
    TupleMake,
    TupleProj,
    VarRef,
    has_unique_binders,
    iter_nodes,
    max_var_id,
    rename_binders,
    renumber,
)
from .types import BOOL, DOUBLE, INT, SEQ, STRING, TupleT
from .values import arith, compare

DEFAULT_LIMIT = 1000
MAX_PIPELINE_ROUNDS = 20
_FOLDABLE = (INT, BOOL, STRING, DOUBLE)
_TRUE = Const(True, BOOL)


@dataclass(frozen=True)
class RewriteRule:
    name: str
    apply: Callable  # Expr -> Expr | None


@dataclass(frozen=True)
class Phase:
    name: str
    run: Callable  # Expr -> Expr


@dataclass(frozen=True)
class Pipeline:
    phases: tuple

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(self.phases))

    @property
    def names(self):
        return [p.name for p in self.phases]


# --------------------------------------------------------------------------- #
# Generic machinery
# --------------------------------------------------------------------------- #


def rewrite_bottom_up(e, rule):
    """Rewrite children first, then try ``rule`` once at the rebuilt node."""
    apply = rule.apply if isinstance(rule, RewriteRule) else rule

    def go(n):
        kids = n.children()
        if kids:
            new = tuple(go(c) for c in kids)
            if any(a is not b for a, b in zip(new, kids)):
                n = n.rebuild(new)
        out = apply(n)
        return n if out is None else out

    return go(e)


def _fixpoint(e, step, limit, what):
    for _ in range(limit):
        nxt = step(e)
        if nxt == e:
            return nxt
        e = nxt
    raise IterationLimitExceeded(f"{what} did not converge within {limit} rounds")


def _has_binders(e):
    return any(isinstance(n, FoasFun) for n in iter_nodes(e))


def substitute(e, v, replacement, gen=None):
    """Replace free occurrences of ``v`` in ``e``.

    With ``gen`` given, each inserted copy of a replacement that contains
    binders gets fresh binder ids, so duplication never breaks uniqueness.
    """
    if replacement.tag != v.tag:
        raise TypingError(f"substitute(v{v.id})", v.tag, replacement.tag)
    freshen = gen is not None and _has_binders(replacement)
    rfree = replacement.free_vars

    def go(n):
        if v not in n.free_vars:
            return n
        if isinstance(n, VarRef):
            return rename_binders(replacement, gen.fresh_id) if freshen else replacement
        assert not (isinstance(n, FoasFun) and n.param in rfree), "variable capture"
        return n.rebuild(tuple(go(c) for c in n.children()))

    return go(e)


def _inline(f, arg, gen):
    """Body of the function literal ``f`` applied to ``arg``."""
    return substitute(f.body, f.param, arg, gen)


def _compose(outer, inner, gen):
    """The literal ``λx. outer(inner(x))`` with a fresh binder."""
    x = gen.fresh(inner.param.tag)
    return FoasFun(_inline(outer, _inline(inner, VarRef(x), gen), gen), x)


def _conjuncts(e):
    if isinstance(e, BoolBin) and e.op == "and":
        return _conjuncts(e.left) + _conjuncts(e.right)
    return [e]


def _and_all(es):
    out = es[0]
    for e in es[1:]:
        out = BoolBin("and", out, e)
    return out


def _kinds_compatible(outer_kind, inner_kind):
    # merging an inner set into an outer sequence would skip its deduplication
    return inner_kind is outer_kind or inner_kind is SEQ


def _restore_barendregt(e, gen):
    if has_unique_binders(e):
        return e
    return rename_binders(e, gen.fresh_id, only_duplicates=True)


def _gensym_for(e):
    return Gensym(max_var_id(e) + 1)


# --------------------------------------------------------------------------- #
# Beta-reduction and simplification
# --------------------------------------------------------------------------- #


def beta_reduce(e, gen=None, limit=DEFAULT_LIMIT):
    """Contract every ``App(FoasFun(body, v), arg)`` redex, to a fixpoint."""
    gen = gen or _gensym_for(e)

    def rule(n):
        if isinstance(n, App) and isinstance(n.fun, FoasFun):
            return _inline(n.fun, n.arg, gen)
        return None

    out = _fixpoint(e, lambda t: rewrite_bottom_up(t, rule), limit, "beta_reduce")
    return _restore_barendregt(out, gen)


def _fold(n):
    kids = n.children()
    if not all(isinstance(k, Const) and k.tag in _FOLDABLE for k in kids):
        return None
    t = type(n)
    if t is StringConcat:
        return Const(kids[0].value + kids[1].value, STRING)
    if t is ArithBin:
        if n.op == "div" and kids[1].value == 0:
            return None
        return Const(arith(n.op, kids[0].value, kids[1].value, n.tag), n.tag)
    if t is Cmp:
        return Const(compare(n.op, kids[0].value, kids[1].value), BOOL)
    if t is BoolBin:
        a, b = kids[0].value, kids[1].value
        return Const((a and b) if n.op == "and" else (a or b), BOOL)
    if t is Not:
        return Const(not kids[0].value, BOOL)
    return None


def _flatten(n, matches):
    if matches(n):
        return _flatten(n.left, matches) + _flatten(n.right, matches)
    return [n]


def _reassociate_arith(n):
    op = n.op
    ops = _flatten(n, lambda m: type(m) is ArithBin and m.op == op and m.tag == INT)
    consts = [o for o in ops if isinstance(o, Const)]
    if not consts:
        return None
    unit = 0 if op == "add" else 1
    acc = unit
    for c in consts:
        acc = arith(op, acc, c.value, INT)
    others = [o for o in ops if not isinstance(o, Const)]
    if not others:
        return Const(acc, INT)
    out = others[0]
    for o in others[1:]:
        out = ArithBin(op, out, o)
    if acc != unit:
        out = ArithBin(op, out, Const(acc, INT))
    return None if out == n else out


def _reassociate_concat(n):
    ops = _flatten(n, lambda m: type(m) is StringConcat)
    merged = []
    for o in ops:
        if isinstance(o, Const) and merged and isinstance(merged[-1], Const):
            merged[-1] = Const(merged[-1].value + o.value, STRING)
        else:
            merged.append(o)
    out = merged[0]
    for o in merged[1:]:
        out = StringConcat(out, o)
    return None if out == n else out


def _simplify_node(n):
    t = type(n)
    if t is TupleProj and type(n.tup) is TupleMake:
        return n.tup.elems[n.index - 1]
    if t is FieldGet and type(n.record) is RecordMake:
        return n.record.values[n.index]
    if t is BoolBin:
        left, right = n.left, n.right
        if isinstance(left, Const):
            if n.op == "and":
                return right if left.value else Const(False, BOOL)
            return Const(True, BOOL) if left.value else right
        if isinstance(right, Const) and right.value == (n.op == "and"):
            return left
        return None
    if t is Not and type(n.operand) is Not:
        return n.operand.operand
    if t is FilterNode and type(n.pred) is FoasFun and n.pred.body == _TRUE:
        return n.coll
    if t in (StringConcat, ArithBin, Cmp, Not):
        folded = _fold(n)
        if folded is not None:
            return folded
    if t is ArithBin and n.tag == INT and n.op in ("add", "mul"):
        return _reassociate_arith(n)
    if t is StringConcat:
        return _reassociate_concat(n)
    return None


SIMPLIFY = RewriteRule("simplify", _simplify_node)


def simplify(e):
    """One bottom-up pass of folding, reassociation, projection and identity laws."""
    return rewrite_bottom_up(e, SIMPLIFY)


def beta_simplify_fixpoint(e, gen=None, limit=DEFAULT_LIMIT):
    """Alternate beta-reduction and simplification until nothing changes."""
    gen = gen or _gensym_for(e)

    def step(t):
        return simplify(beta_reduce(t, gen, limit))

    out = _fixpoint(e, step, limit, "beta_simplify")
    return _restore_barendregt(out, gen)


# --------------------------------------------------------------------------- #
# Fusion and unnesting
# --------------------------------------------------------------------------- #


def _fuse_rule(gen):
    def rule(n):
        t = type(n)
        c = getattr(n, "coll", None)
        if t is MapNode and type(c) is MapNode:
            if isinstance(n.fun, FoasFun) and isinstance(c.fun, FoasFun):
                return MapNode(c.coll, _compose(n.fun, c.fun, gen))
        elif t is FilterNode and type(c) is FilterNode:
            if isinstance(n.pred, FoasFun) and isinstance(c.pred, FoasFun):
                x = gen.fresh(c.pred.param.tag)
                both = BoolBin("and", _inline(c.pred, VarRef(x), gen),
                               _inline(n.pred, VarRef(x), gen))
                return FilterNode(c.coll, FoasFun(both, x))
        elif t is FlatMapNode and type(c) is MapNode:
            if isinstance(n.fun, FoasFun) and isinstance(c.fun, FoasFun):
                return FlatMapNode(c.coll, _compose(n.fun, c.fun, gen))
        elif t is MapNode and type(c) is FlatMapNode:
            if (isinstance(n.fun, FoasFun) and isinstance(c.fun, FoasFun)
                    and _kinds_compatible(n.tag.kind, c.fun.tag.res.kind)):
                x = gen.fresh(c.fun.param.tag)
                inner = MapNode(_inline(c.fun, VarRef(x), gen), n.fun)
                return FlatMapNode(c.coll, FoasFun(inner, x))
        return None

    return rule


def fuse(e, gen=None, limit=DEFAULT_LIMIT):
    """Merge adjacent map/filter/flatMap operators."""
    gen = gen or _gensym_for(e)
    rule = _fuse_rule(gen)
    out = _fixpoint(e, lambda t: rewrite_bottom_up(t, rule), limit, "fuse")
    return _restore_barendregt(out, gen)


def _unnest_rule(gen, check_kinds):
    def rule(n):
        if type(n) is not FlatMapNode or not isinstance(n.fun, FoasFun):
            return None
        c = n.coll
        if type(c) is FlatMapNode and isinstance(c.fun, FoasFun):
            if check_kinds and not _kinds_compatible(n.tag.kind, c.fun.tag.res.kind):
                return None
            x = gen.fresh(c.fun.param.tag)
            inner = FlatMapNode(_inline(c.fun, VarRef(x), gen), n.fun)
            return FlatMapNode(c.coll, FoasFun(inner, x))
        body = n.fun.body
        if type(body) is CollLit and len(body.elems) == 1:
            # a singleton yield is a plain map whatever the literal's kind
            return MapNode(c, FoasFun(body.elems[0], n.fun.param))
        return None

    return rule


def unnest(e, gen=None, limit=DEFAULT_LIMIT, check_kinds=True):
    """Flatten nested flatMap chains.

    ``check_kinds=False`` disables the collection-kind guard; it exists only
    to demonstrate that the guard matters.
    """
    gen = gen or _gensym_for(e)
    rule = _unnest_rule(gen, check_kinds)
    out = _fixpoint(e, lambda t: rewrite_bottom_up(t, rule), limit, "unnest")
    return _restore_barendregt(out, gen)


# --------------------------------------------------------------------------- #
# Filter hoisting
# --------------------------------------------------------------------------- #


def _strip_hoistable(body):
    """Find a filter on the generator spine of ``body`` with conjuncts that do
    not mention its own element.

    Returns ``(body_without_them, conjuncts)`` or None. The spine follows
    receivers of map/flatMap/filter: if such a filter rejects everything the
    whole body is empty, so the test can move to the enclosing generator.
    """
    t = type(body)
    if t not in (MapNode, FlatMapNode, FilterNode):
        return None
    if t is FilterNode and isinstance(body.pred, FoasFun):
        y = body.pred.param
        conjs = _conjuncts(body.pred.body)
        out = [c for c in conjs if y not in c.free_vars]
        if out:
            keep = [c for c in conjs if y in c.free_vars]
            if keep:
                return FilterNode(body.coll, FoasFun(_and_all(keep), y)), out
            return body.coll, out
    sub = _strip_hoistable(body.coll)
    if sub is None:
        return None
    new_coll, out = sub
    return body.rebuild((new_coll,) + body.children()[1:]), out


def _hoist_rule(gen):
    def rule(n):
        if type(n) is not FlatMapNode or not isinstance(n.fun, FoasFun):
            return None
        found = _strip_hoistable(n.fun.body)
        if found is None:
            return None
        new_body, conjs = found
        x = n.fun.param
        outer = n.coll
        if type(outer) is FilterNode and isinstance(outer.pred, FoasFun):
            z = outer.pred.param
            moved = substitute(_and_all(conjs), x, VarRef(z))
            outer = FilterNode(outer.coll, FoasFun(BoolBin("and", outer.pred.body, moved), z))
        else:
            z = gen.fresh(x.tag)
            moved = substitute(_and_all(conjs), x, VarRef(z))
            outer = FilterNode(outer, FoasFun(moved, z))
        return FlatMapNode(outer, FoasFun(new_body, x))

    return rule


def hoist_filter(e, gen=None, limit=DEFAULT_LIMIT):
    """Move predicate conjuncts that ignore an inner loop variable outward."""
    gen = gen or _gensym_for(e)
    rule = _hoist_rule(gen)
    out = _fixpoint(e, lambda t: rewrite_bottom_up(t, rule), limit, "hoist_filter")
    return _restore_barendregt(out, gen)


# --------------------------------------------------------------------------- #
# Hash join
# --------------------------------------------------------------------------- #


def _match_equijoin(n):
    """Recognize ``flatMap(outer, x => map(filter(inner, y => kx == ky), y' => r))``.

    Also accepts the form without the trailing map. Returns
    ``(inner, x, kx, y, ky, y2, r)`` with ``y2``/``r`` None for the bare form.
    """
    if type(n) is not FlatMapNode or not isinstance(n.fun, FoasFun):
        return None
    x = n.fun.param
    body = n.fun.body
    y2 = r = None
    if type(body) is MapNode and isinstance(body.fun, FoasFun):
        y2, r = body.fun.param, body.fun.body
        body = body.coll
    if type(body) is not FilterNode or not isinstance(body.pred, FoasFun):
        return None
    pred = body.pred.body
    if type(pred) is not Cmp or pred.op != "eq":
        return None
    inner = body.coll
    if x in inner.free_vars:
        return None
    if not _kinds_compatible(n.tag.kind, inner.tag.kind):
        return None
    y = body.pred.param
    left, right = pred.left, pred.right
    if left.free_vars <= {x} and right.free_vars <= {y}:
        kx, ky = left, right
    elif right.free_vars <= {x} and left.free_vars <= {y}:
        kx, ky = right, left
    else:
        return None
    return inner, x, kx, y, ky, y2, r


def _hash_join_rule(gen):
    fired = False

    def rule(n):
        nonlocal fired
        if fired:
            return None
        m = _match_equijoin(n)
        if m is None:
            return None
        inner, x, kx, y, ky, y2, r = m
        x1 = gen.fresh(x.tag)
        y1 = gen.fresh(y.tag)
        okey = FoasFun(substitute(kx, x, VarRef(x1)), x1)
        ikey = FoasFun(substitute(ky, y, VarRef(y1)), y1)
        pair = gen.fresh(TupleT((x.tag, y.tag)))
        left, right = TupleProj(VarRef(pair), 1), TupleProj(VarRef(pair), 2)
        if r is None:
            body = right
        else:
            body = substitute(substitute(r, x, left), y2, right)
        fired = True
        return HashJoinNode(n.coll, inner, okey, ikey, FoasFun(body, pair))

    return rule


def hash_join(e, gen=None, limit=DEFAULT_LIMIT):
    """Replace nested-loop equi-joins with hash joins, innermost first."""
    gen = gen or _gensym_for(e)
    out = _fixpoint(e, lambda t: rewrite_bottom_up(t, _hash_join_rule(gen)), limit,
                    "hash_join")
    return _restore_barendregt(out, gen)


# --------------------------------------------------------------------------- #
# Pipeline
# --------------------------------------------------------------------------- #


def _phase(name, fn):
    def run(e):
        gen = _gensym_for(e)
        return _restore_barendregt(fn(e, gen), gen)

    return Phase(name, run)


PHASES = {
    "beta_simplify": _phase("beta_simplify", beta_simplify_fixpoint),
    "fuse": _phase("fuse", fuse),
    "unnest": _phase("unnest", unnest),
    "hoist_filter": _phase("hoist_filter", hoist_filter),
    "hash_join": _phase("hash_join", hash_join),
}

DEFAULT_PHASE_ORDER = ("beta_simplify", "fuse", "unnest", "hoist_filter", "hash_join",
                       "beta_simplify")


def make_pipeline(names):
    unknown = [n for n in names if n not in PHASES]
    if unknown:
        raise ValueError(f"unknown phase(s) {', '.join(unknown)}; "
                         f"valid phases: {', '.join(PHASES)}")
    return Pipeline(tuple(PHASES[n] for n in names))


DEFAULT_PIPELINE = make_pipeline(DEFAULT_PHASE_ORDER)


def optimize(e, pipeline=None, trace=None, limit=MAX_PIPELINE_ROUNDS):
    """Run ``pipeline`` (the default one if None) over ``e``.

    The phases run in order; the whole sequence repeats until a round leaves
    the tree unchanged, because later phases can expose work for earlier ones
    (an unnested flatMap may leave a map over a map behind). Colliding binder
    ids are repaired on entry; binders are renumbered 1, 2, ... in pre-order on
    exit. ``trace(phase_name, tree)`` is called after every phase application.
    """
    pipeline = pipeline or DEFAULT_PIPELINE
    e = _restore_barendregt(e, _gensym_for(e))
    before = renumber(e)
    for _ in range(limit):
        for phase in pipeline.phases:
            e = phase.run(e)
            if trace is not None:
                trace(phase.name, e)
        after = renumber(e)
        if after == before:
            return after
        before = after
    raise IterationLimitExceeded(f"pipeline did not converge within {limit} rounds")


__all__ = [
    "DEFAULT_PIPELINE",
    "PHASES",
    "Phase",
    "Pipeline",
    "RewriteRule",
    "beta_reduce",
    "beta_simplify_fixpoint",
    "fuse",
    "hash_join",
    "hoist_filter",
    "make_pipeline",
    "optimize",
    "rewrite_bottom_up",
    "simplify",
    "substitute",
    "unnest",
]
