"""Closure and fixed-point operators: tc, dtc, lfp, pfp.

The stage operator F maps a relation R to {sigma(xs) | sigma satisfies the
body with the bound relation symbol interpreted as R}.  Least fixed points
iterate from the empty relation and stabilize by monotonicity within
|Fac(w)|^k stages; partial fixed points detect divergence by revisiting a
stage (the sequence is deterministic, so any revisit without stabilization
proves a cycle) and then yield the empty relation.

Transitive closure is taken literally over sequences of length n >= 1, so
every tuple is tc-related to itself; the deterministic variant additionally
requires every intermediate tuple to have a unique successor.
"""

from __future__ import annotations

import itertools

from fclogic.core import UNIVERSE, Relation, Substitution, Word, enumerate_factors
from fclogic.evaluator import (
    BottomUpContext,
    EvalConfig,
    EngineStats,
    closure_reaches,
    eval_bottomup,
    iterate_stages,
)
from fclogic.syntax import Fp, Tc, free_vars


def _select(rel: Relation, assign: dict) -> Relation:
    """Rows matching the fixed bindings, with those columns projected away."""
    keep = [v for v in rel.scheme if v not in assign]
    idx = [(rel.scheme.index(v), assign[v]) for v in rel.scheme if v in assign]
    kidx = [rel.scheme.index(v) for v in keep]
    rows = (
        tuple(row[i] for i in kidx)
        for row in rel.rows
        if all(row[i] == f for i, f in idx)
    )
    return Relation(keep, rows)


def _body_relation(body, w, env, current, rel_name, ctx: BottomUpContext | None):
    stage_env = dict(env)
    stage_env[rel_name] = current
    if ctx is not None:
        sub = BottomUpContext(w, stage_env, ctx.config, ctx.stats)
        return sub.eval(body)
    return eval_bottomup(body, w, env=stage_env)


def step_operator(
    body,
    xs: tuple,
    rel_name: str,
    w: Word,
    env: dict,
    outer: Substitution | None = None,
    current: frozenset = frozenset(),
) -> frozenset:
    """One application of the stage operator F under the outer bindings."""
    rel = _body_relation(body, w, env, current, rel_name, None)
    outer_assign = {}
    if outer is not None:
        oracle = w.oracle()
        for v in free_vars(body) - set(xs):
            if v not in outer:
                raise ValueError(f"outer substitution misses {v!r}")
            outer_assign[v] = oracle.canonical(outer[v])
    rel = _select(rel, outer_assign)
    rel = rel.pad(xs, enumerate_factors(w))
    idx = [rel.scheme.index(v) for v in xs]
    return frozenset(tuple(row[i] for i in idx) for row in rel.rows)


def lfp_eval(node: Fp, w: Word, sigma: Substitution, env: dict | None = None) -> bool:
    return _fp_eval(node, w, sigma, env or {})


def pfp_eval(node: Fp, w: Word, sigma: Substitution, env: dict | None = None) -> bool:
    return _fp_eval(node, w, sigma, env or {})


def _fp_eval(node: Fp, w: Word, sigma: Substitution, env: dict) -> bool:
    result = iterate_stages(
        lambda current: step_operator(node.body, node.xs, node.rel, w, env, sigma, current),
        partial=node.partial,
    )
    oracle = w.oracle()
    key = tuple(oracle.canonical(sigma[v]) for v in node.ys)
    return key in result


def tc_eval(node: Tc, w: Word, sigma: Substitution, env: dict | None = None) -> bool:
    env = env or {}
    oracle = w.oracle()
    rel = eval_bottomup(node.body, w, env=env)
    outer = {
        v: oracle.canonical(sigma[v])
        for v in free_vars(node.body) - set(node.xs) - set(node.ys)
    }
    rel = _select(rel, outer)
    domain = enumerate_factors(w)
    rel = rel.pad(tuple(node.xs) + tuple(y for y in node.ys if y not in node.xs), domain)
    xidx = [rel.scheme.index(v) for v in node.xs]
    yidx = [rel.scheme.index(v) for v in node.ys]
    edges = {
        (tuple(row[i] for i in xidx), tuple(row[i] for i in yidx)) for row in rel.rows
    }
    src = tuple(oracle.canonical(sigma[v]) for v in node.ss)
    dst = tuple(oracle.canonical(sigma[v]) for v in node.ts)
    return closure_reaches(edges, src, dst, deterministic=node.deterministic)


dtc_eval = tc_eval


# ---------------------------------------------------------------------------
# Relation-level evaluation for the bottom-up engine
# ---------------------------------------------------------------------------


def closure_relation(node, ctx: BottomUpContext) -> Relation:
    """Relation over free(node) for a closure or fixpoint atom."""
    if isinstance(node, Fp):
        return _fp_relation(node, ctx)
    if isinstance(node, Tc):
        return _tc_relation(node, ctx)
    raise TypeError(f"not a closure/fixpoint node: {node!r}")


def _out_rows(out_vars, candidates, w):
    """Merge (var, value) pairs into rows, dropping inconsistent combinations."""
    whole = w.oracle().canonical(w.whole())
    rows = set()
    for pairs in candidates:
        assign = {}
        ok = True
        for var, value in pairs:
            if var == UNIVERSE:
                if value != whole:
                    ok = False
                    break
            elif var in assign:
                if assign[var] != value:
                    ok = False
                    break
            else:
                assign[var] = value
        if ok:
            rows.add(tuple(assign[v] for v in out_vars))
    return rows


def _dedup_vars(names) -> list:
    out = []
    for name in names:
        if name != UNIVERSE and name not in out:
            out.append(name)
    return out


def _fp_relation(node: Fp, ctx: BottomUpContext) -> Relation:
    w = ctx.w
    params = sorted(free_vars(node.body) - set(node.xs))
    out_vars = _dedup_vars(params + list(node.ys))
    domain = ctx.domain()
    k = len(node.xs)
    stage_cap = ctx.config.max_stages if ctx.config else None
    natural_cap = len(domain) ** k + 1

    candidates = []
    for values in itertools.product(domain, repeat=len(params)):
        assign = dict(zip(params, values))

        def step(current):
            rel = _body_relation(node.body, w, ctx.env, current, node.rel, ctx)
            rel = _select(rel, assign)
            rel = rel.pad(node.xs, domain)
            idx = [rel.scheme.index(v) for v in node.xs]
            return frozenset(tuple(row[i] for i in idx) for row in rel.rows)

        trace = []
        result = iterate_stages(
            step,
            partial=node.partial,
            max_stages=stage_cap if node.partial else min(x for x in (stage_cap, natural_cap) if x),
            trace=trace,
        )
        # index at which the sequence stabilizes; the confirming pass that
        # merely re-derives the previous stage is not counted
        grew = sum(prev != cur for prev, cur in zip([frozenset(), *trace], trace))
        ctx.stats.fixpoint_stages.append(grew)
        for t in result:
            candidates.append(list(zip(params, values)) + list(zip(node.ys, t)))
    return Relation(out_vars, _out_rows(out_vars, candidates, w))


def _reachable(edges: set, deterministic: bool) -> set:
    """All pairs (a, b) connected by a sequence of one or more edges."""
    successors: dict[tuple, set] = {}
    for a, b in edges:
        successors.setdefault(a, set()).add(b)
    pairs = set()
    for a in successors:
        if deterministic:
            seen = set()
            cur = a
            while True:
                succ = successors.get(cur, ())
                if len(succ) != 1:
                    break
                (nxt,) = succ
                if nxt in seen:
                    pairs.add((a, nxt))
                    break
                seen.add(nxt)
                pairs.add((a, nxt))
                cur = nxt
        else:
            frontier = [a]
            seen = set()
            while frontier:
                nxt_frontier = []
                for node_ in frontier:
                    for b in successors.get(node_, ()):
                        if b not in seen:
                            seen.add(b)
                            pairs.add((a, b))
                            nxt_frontier.append(b)
                frontier = nxt_frontier
    return pairs


def _tc_relation(node: Tc, ctx: BottomUpContext) -> Relation:
    w = ctx.w
    domain = ctx.domain()
    params = sorted(free_vars(node.body) - set(node.xs) - set(node.ys))
    out_vars = _dedup_vars(params + list(node.ss) + list(node.ts))
    k = len(node.xs)

    body_rel = ctx.eval(node.body)
    body_rel = body_rel.pad(
        tuple(node.xs) + tuple(y for y in node.ys if y not in node.xs), domain
    )
    xidx = [body_rel.scheme.index(v) for v in node.xs]
    yidx = [body_rel.scheme.index(v) for v in node.ys]
    pidx = [body_rel.scheme.index(v) for v in params if v in body_rel.scheme]

    edges_by_params: dict[tuple, set] = {}
    for row in body_rel.rows:
        key = tuple(row[i] for i in pidx)
        edges_by_params.setdefault(key, set()).add(
            (tuple(row[i] for i in xidx), tuple(row[i] for i in yidx))
        )

    candidates = []
    for values in itertools.product(domain, repeat=len(params)):
        edges = edges_by_params.get(values, set())
        pairs = _reachable(edges, node.deterministic)
        pairs |= {(t, t) for t in itertools.product(domain, repeat=k)}
        for src, dst in pairs:
            candidates.append(
                list(zip(params, values)) + list(zip(node.ss, src)) + list(zip(node.ts, dst))
            )
    return Relation(out_vars, _out_rows(out_vars, candidates, w))
