"""The two evaluation engines.

``eval_naive`` / ``eval_relation_naive`` implement the satisfaction
definition directly by enumeration and serve as the semantics oracle,
including self-contained closure and fixed-point handling.

``eval_bottomup`` is the width-bounded engine: it materializes one relation
per subformula (conjunction = natural join, disjunction = union after
guard padding, negation = complement against the full factor product,
Exists = projection, Forall = relational division, constraints = semijoin
filters) and delegates closure/fixpoint atoms to the fixpoint module.
Quantifiers range over canonical factor values, never occurrences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from fclogic.core import (
    UNIVERSE,
    FactorRef,
    Relation,
    Substitution,
    Word,
    canonicalize,
    enumerate_factors,
)
from fclogic.syntax import (
    And,
    Constraint,
    Eq,
    Exists,
    Forall,
    Formula,
    Fp,
    Not,
    Or,
    RelAtom,
    Tc,
    TermItem,
    VarItem,
    free_vars,
)


class ResourceCapError(RuntimeError):
    pass


class UnboundVariableError(ValueError):
    pass


@dataclass
class EvalConfig:
    """Resource caps; both must be positive when set."""

    max_rows: int | None = None
    max_stages: int | None = None

    def __post_init__(self):
        if self.max_rows is not None and self.max_rows <= 0:
            raise ValueError("max_rows must be positive")
        if self.max_stages is not None and self.max_stages <= 0:
            raise ValueError("max_stages must be positive")


@dataclass
class EngineStats:
    max_relation_rows: int = 0
    relations: int = 0
    fixpoint_stages: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def record(self, relation: Relation, config: EvalConfig | None):
        self.relations += 1
        rows = len(relation)
        if rows > self.max_relation_rows:
            self.max_relation_rows = rows
        if config is not None and config.max_rows is not None and rows > config.max_rows:
            raise ResourceCapError(f"relation of {rows} rows exceeds cap {config.max_rows}")


# ---------------------------------------------------------------------------
# Word-equation solver
# ---------------------------------------------------------------------------


def solve_equation(eq: Eq, w: Word, fixed: dict | None = None) -> Relation:
    """All solutions of the equation over canonical factors, extending `fixed`.

    Anchors on the lhs variable: enumerates candidate factors for the lhs
    (or uses its fixed binding), then matches the rhs pattern inside that
    window left-to-right, backtracking over the lengths of unbound variable
    items and consulting the equality oracle for repeated variables.
    """
    cache_key = (eq, None if not fixed else frozenset(fixed.items()))
    cached = w._eq_cache.get(cache_key)
    if cached is not None:
        return Relation(*cached)
    oracle = w.oracle()
    fixed = dict(fixed or {})
    fixed[UNIVERSE] = w.whole()
    items = eq.rhs
    variables = sorted(({eq.lhs} | {i.name for i in items if isinstance(i, VarItem)}) - {UNIVERSE})

    if eq.lhs in fixed:
        lhs_candidates = [fixed[eq.lhs]]
    else:
        lhs_candidates = enumerate_factors(w)

    rows = set()

    def min_rest(i: int, bindings: dict) -> int:
        total = 0
        for item in items[i:]:
            if isinstance(item, TermItem):
                total += len(item.word)
            elif item.name in bindings:
                total += bindings[item.name].len
        return total

    def match(i: int, pos: int, end: int, bindings: dict):
        if i == len(items):
            if pos == end:
                rows.add(
                    tuple(
                        oracle.canonical(bindings[v]) if v in bindings else None
                        for v in variables
                    )
                )
            return
        item = items[i]
        if isinstance(item, TermItem):
            t = item.word
            if pos + len(t) <= end and w.text[pos - 1 : pos - 1 + len(t)] == t:
                match(i + 1, pos + len(t), end, bindings)
            return
        f = bindings.get(item.name)
        if f is not None:
            if pos + f.len <= end and oracle.occurs_at(f, pos):
                match(i + 1, pos + f.len, end, bindings)
            return
        limit = end - pos - min_rest(i + 1, bindings)
        if limit < 0:
            return
        for ln in range(0, limit + 1):
            bindings[item.name] = FactorRef(pos, ln)
            match(i + 1, pos + ln, end, bindings)
        del bindings[item.name]

    for window in lhs_candidates:
        bindings = dict(fixed)
        bindings[eq.lhs] = window
        match(0, window.start, window.start + window.len, bindings)

    assert all(None not in row for row in rows)
    w._eq_cache[cache_key] = (tuple(variables), frozenset(rows))
    return Relation(variables, rows)


# ---------------------------------------------------------------------------
# Naive reference engine
# ---------------------------------------------------------------------------


def _apply_pattern(sigma: Substitution, pattern) -> str:
    parts = []
    for item in pattern:
        if isinstance(item, TermItem):
            parts.append(item.word)
        else:
            if item.name not in sigma:
                raise UnboundVariableError(f"unbound variable {item.name!r}")
            parts.append(sigma.value(item.name))
    return "".join(parts)


def eval_naive(phi: Formula, sigma: Substitution, env: dict | None = None) -> bool:
    """Direct satisfaction check; quantifiers enumerate canonical factor values."""
    env = env or {}
    w = sigma.word
    if isinstance(phi, Eq):
        if phi.lhs not in sigma:
            raise UnboundVariableError(f"unbound variable {phi.lhs!r}")
        return sigma.value(phi.lhs) == _apply_pattern(sigma, phi.rhs)
    if isinstance(phi, Constraint):
        from fclogic import regexlang

        if phi.var not in sigma:
            raise UnboundVariableError(f"unbound variable {phi.var!r}")
        return regexlang.match_full(phi.regex, sigma.value(phi.var))
    if isinstance(phi, And):
        return eval_naive(phi.left, sigma, env) and eval_naive(phi.right, sigma, env)
    if isinstance(phi, Or):
        return eval_naive(phi.left, sigma, env) or eval_naive(phi.right, sigma, env)
    if isinstance(phi, Not):
        return not eval_naive(phi.sub, sigma, env)
    if isinstance(phi, Exists):
        return any(
            eval_naive(phi.sub, sigma.extend(phi.var, f), env) for f in enumerate_factors(w)
        )
    if isinstance(phi, Forall):
        return all(
            eval_naive(phi.sub, sigma.extend(phi.var, f), env) for f in enumerate_factors(w)
        )
    if isinstance(phi, RelAtom):
        if phi.name not in env:
            raise UnboundVariableError(f"unknown relation {phi.name!r}")
        oracle = w.oracle()
        key = tuple(oracle.canonical(sigma[v]) for v in phi.args)
        return key in env[phi.name]
    if isinstance(phi, Tc):
        return _naive_tc(phi, sigma, env)
    if isinstance(phi, Fp):
        return _naive_fp(phi, sigma, env)
    raise TypeError(f"not a formula node: {phi!r}")


def _assignments(w: Word, variables):
    import itertools

    domain = enumerate_factors(w)
    for values in itertools.product(domain, repeat=len(variables)):
        yield dict(zip(variables, values))


def _memo_key(phi, sigma: Substitution, bound, env: dict):
    """Cache key for a closure/fixpoint subcomputation, or None if uncacheable.

    The computed object depends only on the body, the values of the outer
    variables it reads, and the visible relation contents.
    """
    oracle = sigma.word.oracle()
    extras = sorted(free_vars(phi.body) - set(bound))
    try:
        outer = tuple((v, oracle.canonical(sigma[v])) for v in extras)
        envkey = frozenset((name, frozenset(rows)) for name, rows in env.items())
    except (KeyError, TypeError):
        return None
    return (phi, outer, envkey)


def _naive_tc(phi: Tc, sigma: Substitution, env: dict) -> bool:
    w = sigma.word
    oracle = w.oracle()
    key = _memo_key(phi, sigma, phi.xs + phi.ys, env)
    edges = w._fp_cache.get(key) if key is not None else None
    if edges is None:
        edges = set()
        for assign in _assignments(w, phi.xs + tuple(v for v in phi.ys if v not in phi.xs)):
            tau = sigma
            for var, f in assign.items():
                tau = tau.extend(var, f)
            if eval_naive(phi.body, tau, env):
                edges.add(
                    (tuple(tau[v] for v in phi.xs), tuple(oracle.canonical(tau[v]) for v in phi.ys))
                )
        if key is not None:
            w._fp_cache[key] = edges
    src = tuple(oracle.canonical(sigma[v]) for v in phi.ss)
    dst = tuple(oracle.canonical(sigma[v]) for v in phi.ts)
    return closure_reaches(edges, src, dst, deterministic=phi.deterministic)


def closure_reaches(edges: set, src: tuple, dst: tuple, deterministic: bool) -> bool:
    """Membership of (src, dst) in the (deterministic) transitive closure.

    Length-one sequences need no edges, so every tuple reaches itself.
    Deterministic closure only follows tuples with a unique successor.
    """
    if src == dst:
        return True
    successors: dict[tuple, set] = {}
    for a, b in edges:
        successors.setdefault(a, set()).add(b)
    seen = {src}
    frontier = [src]
    while frontier:
        nxt = []
        for node in frontier:
            succ = successors.get(node, ())
            if deterministic and len(succ) != 1:
                continue
            for b in succ:
                if b == dst:
                    return True
                if b not in seen:
                    seen.add(b)
                    nxt.append(b)
        frontier = nxt
    return False


def _naive_fp(phi: Fp, sigma: Substitution, env: dict) -> bool:
    w = sigma.word
    oracle = w.oracle()
    key = _memo_key(phi, sigma, phi.xs, env)
    if key is not None and key in w._fp_cache:
        result = w._fp_cache[key]
        return tuple(oracle.canonical(sigma[v]) for v in phi.ys) in result

    def step(current: frozenset) -> frozenset:
        out = set()
        stage_env = dict(env)
        stage_env[phi.rel] = current
        for assign in _assignments(w, phi.xs):
            tau = sigma
            for var, f in assign.items():
                tau = tau.extend(var, f)
            if eval_naive(phi.body, tau, stage_env):
                out.add(tuple(assign[v] for v in phi.xs))
        return frozenset(out)

    result = iterate_stages(step, partial=phi.partial)
    if key is not None:
        w._fp_cache[key] = result
    return tuple(oracle.canonical(sigma[v]) for v in phi.ys) in result


def iterate_stages(step, partial: bool, max_stages: int | None = None, trace: list | None = None):
    """Run R_0 = {} , R_{i+1} = F(R_i) to the fixed point.

    Least fixed points stabilize by monotonicity; for partial fixed points
    the stage sequence is deterministic, so revisiting any earlier stage
    without stabilizing proves divergence and the result is the empty set.
    """
    current = frozenset()
    seen = {current}
    stages = 0
    while True:
        nxt = step(current)
        stages += 1
        if trace is not None:
            trace.append(nxt)
        if max_stages is not None and stages > max_stages:
            raise ResourceCapError(f"fixpoint exceeded {max_stages} stages")
        if not partial and not current <= nxt:
            raise AssertionError("least-fixpoint stages must be monotone")
        if nxt == current:
            return current
        if nxt in seen:
            return frozenset() if partial else nxt
        seen.add(nxt)
        current = nxt


def eval_relation_naive(phi: Formula, w: Word, env: dict | None = None) -> Relation:
    """Materialize {sigma restricted to free(phi) | sigma satisfies phi} by enumeration."""
    variables = sorted(free_vars(phi))
    rows = []
    for assign in _assignments(w, variables):
        sigma = Substitution(w, assign)
        if eval_naive(phi, sigma, env):
            rows.append(tuple(assign[v] for v in variables))
    return Relation(variables, rows)


# ---------------------------------------------------------------------------
# Bottom-up engine
# ---------------------------------------------------------------------------


class BottomUpContext:
    def __init__(self, w: Word, env: dict, config: EvalConfig | None, stats: EngineStats | None):
        self.w = w
        self.env = env
        self.config = config
        self.stats = stats if stats is not None else EngineStats()
        self._domain = None

    def domain(self):
        if self._domain is None:
            self._domain = enumerate_factors(self.w)
        return self._domain

    def record(self, relation: Relation) -> Relation:
        self.stats.record(relation, self.config)
        return relation

    def eval(self, phi: Formula) -> Relation:
        if isinstance(phi, Eq):
            rel = solve_equation(phi, self.w)
            return self.record(rel)
        if isinstance(phi, Constraint):
            from fclogic import regexlang

            matcher = regexlang.compile_matcher(phi.regex)
            if phi.var == UNIVERSE:
                return self.record(Relation.truth(matcher.matches(self.w.text)))
            rows = [(f,) for f in self.domain() if matcher.matches(self.w.factor_text(f))]
            return self.record(Relation((phi.var,), rows))
        if isinstance(phi, And):
            return self.record(self.eval(phi.left).join(self.eval(phi.right)))
        if isinstance(phi, Or):
            left, right = self.eval(phi.left), self.eval(phi.right)
            scheme = sorted(set(left.scheme) | set(right.scheme))
            left = left.pad(scheme, self.domain()) if set(left.scheme) != set(scheme) else left
            right = right.pad(scheme, self.domain()) if set(right.scheme) != set(scheme) else right
            return self.record(left.reorder(scheme).union(right.reorder(scheme)))
        if isinstance(phi, Not):
            return self.record(self.eval(phi.sub).complement(self.domain()))
        if isinstance(phi, Exists):
            return self.record(
                self.eval(phi.sub).project([v for v in free_vars(phi.sub) if v != phi.var])
            )
        if isinstance(phi, Forall):
            return self.record(self.eval(phi.sub).divide(phi.var, self.domain()))
        if isinstance(phi, RelAtom):
            return self.record(self._rel_atom(phi))
        if isinstance(phi, (Tc, Fp)):
            from fclogic import fixpoint

            return self.record(fixpoint.closure_relation(phi, self))
        raise TypeError(f"not a formula node: {phi!r}")

    def _rel_atom(self, phi: RelAtom) -> Relation:
        if phi.name not in self.env:
            raise UnboundVariableError(f"unknown relation {phi.name!r}")
        rows = self.env[phi.name]
        out_vars = []
        positions: dict[str, int] = {}
        whole = canonicalize(self.w, self.w.whole())
        filtered = []
        for row in rows:
            ok = True
            for i, arg in enumerate(phi.args):
                if arg == UNIVERSE:
                    if row[i] != whole:
                        ok = False
                        break
                elif arg in positions:
                    if row[positions[arg]] != row[i]:
                        ok = False
                        break
                else:
                    positions[arg] = i
                    if arg not in out_vars:
                        out_vars.append(arg)
            if ok:
                filtered.append(tuple(row[positions[v]] for v in out_vars))
        # positions must be complete even if rows was empty
        for i, arg in enumerate(phi.args):
            if arg != UNIVERSE and arg not in positions:
                positions[arg] = i
                out_vars.append(arg)
        return Relation(out_vars, filtered)


def eval_bottomup(
    phi: Formula,
    w: Word,
    env: dict | None = None,
    config: EvalConfig | None = None,
    stats: EngineStats | None = None,
) -> Relation:
    ctx = BottomUpContext(w, env or {}, config, stats)
    rel = ctx.eval(phi)
    return rel.reorder(sorted(rel.scheme))


# ---------------------------------------------------------------------------
# Binding helpers for user-supplied substitutions
# ---------------------------------------------------------------------------


def make_substitution(w: Word, values: dict[str, str]):
    """Build a substitution from factor strings.

    Returns (substitution, warnings).  A value that is not a factor of the
    host word cannot satisfy any formula, so it yields (None, warnings) and
    the caller reports false with a diagnostic instead of an error.
    """
    bindings = {}
    warnings = []
    for var, value in values.items():
        pos = w.text.find(value)
        if pos < 0:
            warnings.append(
                f"binding {var} -> {value!r} is not a factor of the universe word; "
                "no substitution can satisfy the formula"
            )
            return None, warnings
        bindings[var] = FactorRef(pos + 1, len(value))
    return Substitution(w, bindings), warnings
