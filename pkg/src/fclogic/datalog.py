"""FC-Datalog: rule programs over factor relations.

A program is a set of rules ``R(x, y) <- atom, ..., atom.`` whose atoms are
word equations, relation atoms, and (optionally) regular constraints.  All
relations start empty; every round adds sigma(head) for each substitution
satisfying the existentially closed body against the current relations, until
everything stabilizes.  ``Ans`` names the output relation.

``to_lfp`` rewrites a program into a single formula with nested least
fixed points, eliminating the simultaneous recursion one relation at a time
(Bekic-style: inner occurrences of a not-yet-bound relation symbol are
replaced by its own lfp formula, in which the outer symbols stay free and
are bound by the enclosing operators).
"""

from __future__ import annotations

from dataclasses import dataclass

from fclogic.core import UNIVERSE, Relation, Word, enumerate_factors
from fclogic.evaluator import EngineStats, EvalConfig, eval_bottomup
from fclogic.syntax import (
    And,
    Constraint,
    Eq,
    Exists,
    Fp,
    Or,
    ParseError,
    RelAtom,
    TermItem,
    TokenStream,
    VarItem,
    _parse_equation_rhs,
    _parse_var,
    _parse_varlist,
    classify,
    free_vars,
    tokenize,
)

ANS = "Ans"


@dataclass(frozen=True)
class Rule:
    head: str
    head_vars: tuple
    body: tuple  # atoms: Eq | RelAtom | Constraint | desugared regex equation

    def variables(self) -> set:
        out = set(self.head_vars) - {UNIVERSE}
        for atom in self.body:
            out |= free_vars(atom)
        return out


@dataclass(frozen=True)
class DatalogProgram:
    arities: dict  # relation name -> arity (Ans always present)
    rules: tuple

    def rules_for(self, name: str) -> list:
        return [r for r in self.rules if r.head == name]


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def _parse_rule_atom(s: TokenStream):
    if s.at_punct("!"):
        s.error("negation is not allowed in rule bodies")
    name = _parse_var(s)
    if s.at_punct("("):
        s.next()
        args = [] if s.at_punct(")") else _parse_varlist(s)
        s.expect("punct", ")")
        return RelAtom(name, tuple(args))
    if s.at_keyword("in"):
        s.next()
        tok = s.expect("regex")
        from fclogic import regexlang

        return Constraint(name, regexlang.parse_regex(tok.value))
    s.expect("punct", "=")
    return _parse_equation_rhs(s, name)


def parse_program(text: str, allow_constraints: bool = False) -> DatalogProgram:
    """Parse rules of the form ``R(x, y) <- x = y "a", E(y).``

    Relation symbols and arities are inferred from use; `#` starts a comment.
    Regular constraints are rejected unless allow_constraints is set.
    """
    s = TokenStream(tokenize(text))
    rules = []
    while s.peek().kind != "eof":
        head = _parse_var(s)
        s.expect("punct", "(")
        head_vars = [] if s.at_punct(")") else _parse_varlist(s)
        s.expect("punct", ")")
        s.expect("punct", "<-")
        body = [_parse_rule_atom(s)]
        while s.at_punct(","):
            s.next()
            body.append(_parse_rule_atom(s))
        s.expect("punct", ".")
        rules.append(Rule(head, tuple(head_vars), tuple(body)))

    arities: dict = {ANS: None}
    for rule in rules:
        occurrences = [(rule.head, len(rule.head_vars))] + [
            (a.name, len(a.args)) for a in rule.body if isinstance(a, RelAtom)
        ]
        for name, ar in occurrences:
            if name == UNIVERSE:
                raise ParseError(f"{UNIVERSE!r} cannot name a relation")
            prev = arities.get(name)
            if prev is not None and prev != ar:
                raise ParseError(f"relation {name} used with arities {prev} and {ar}")
            arities[name] = ar
    if arities[ANS] is None:
        arities[ANS] = 0

    for rule in rules:
        if UNIVERSE in rule.head_vars:
            raise ParseError(f"{UNIVERSE!r} cannot appear in a rule head")
        bound = set()
        for atom in rule.body:
            bound |= free_vars(atom)
        for v in rule.head_vars:
            if v not in bound:
                raise ParseError(
                    f"unsafe head variable {v!r} in rule for {rule.head}: "
                    "it does not appear in the body"
                )
        if not allow_constraints:
            for atom in rule.body:
                if classify(atom).uses_constraints:
                    raise ParseError(
                        "regular constraints in rule bodies require allow_constraints=True"
                    )
    return DatalogProgram(arities, tuple(rules))


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _conj(atoms):
    out = atoms[0]
    for a in atoms[1:]:
        out = And(out, a)
    return out


def _rule_contribution(rule: Rule, w: Word, env, config, stats) -> frozenset:
    rel = eval_bottomup(_conj(list(rule.body)), w, env=env, config=config, stats=stats)
    if not rule.head_vars:
        return frozenset([()]) if rel.rows else frozenset()
    idx = [rel.scheme.index(v) for v in rule.head_vars]
    return frozenset(tuple(row[i] for i in idx) for row in rel.rows)


def _alias_body(rule: Rule, occurrence: int) -> tuple:
    """Body with the given relation-atom occurrence renamed to its delta alias."""
    out = []
    seen = 0
    for atom in rule.body:
        if isinstance(atom, RelAtom):
            if seen == occurrence:
                atom = RelAtom(atom.name + "#delta", atom.args)
            seen += 1
        out.append(atom)
    return tuple(out)


def eval_program(
    P: DatalogProgram,
    w: Word,
    semi_naive: bool = False,
    config: EvalConfig | None = None,
    stats: EngineStats | None = None,
) -> Relation:
    """Simultaneous least fixed point of all rules; returns the Ans relation.

    The naive mode recomputes every rule per round.  The semi-naive mode
    re-evaluates a recursive rule once per relation atom, with that occurrence
    restricted to the tuples added in the previous round.
    """
    n_factors = len(enumerate_factors(w))
    rels = {name: frozenset() for name in P.arities}
    round_cap = sum(n_factors**ar for ar in P.arities.values()) + 1

    deltas = dict(rels)
    for round_no in range(round_cap + 1):
        new = {name: set() for name in P.arities}
        for rule in P.rules:
            occurrences = sum(isinstance(a, RelAtom) for a in rule.body)
            if semi_naive and round_no > 0:
                if not occurrences:
                    continue  # relation-free rules never produce new tuples later
                for i in range(occurrences):
                    env = dict(rels)
                    env.update({k + "#delta": v for k, v in deltas.items()})
                    body = _alias_body(rule, i)
                    tuples = _rule_contribution(
                        Rule(rule.head, rule.head_vars, body), w, env, config, stats
                    )
                    new[rule.head] |= tuples
            else:
                new[rule.head] |= _rule_contribution(rule, w, rels, config, stats)
        merged = {name: rels[name] | frozenset(new[name]) for name in rels}
        deltas = {name: merged[name] - rels[name] for name in rels}
        if merged == rels:
            break
        rels = merged
    else:  # pragma: no cover - monotone growth is bounded by the domain size
        raise AssertionError("fixpoint did not stabilize within the stage bound")

    k = P.arities[ANS]
    scheme = tuple(f"z{i}" for i in range(1, k + 1))
    return Relation(scheme, rels[ANS])


# ---------------------------------------------------------------------------
# Rewrite into a single formula
# ---------------------------------------------------------------------------


def _unsatisfiable(var: str) -> Eq:
    # x = x "a" x has no solution: the sides cannot have equal length
    return Eq(var, (VarItem(var), TermItem("a"), VarItem(var)))


def to_lfp(P: DatalogProgram):
    """Equivalent formula built from nested lfp operators.

    Nullary relations are padded to arity one over the empty word.  The result
    is a sentence when Ans is nullary and otherwise has free variables
    z1..zk for k = ar(Ans).
    """
    used = set()
    for rule in P.rules:
        used |= rule.variables()

    def padded(name: str) -> int:
        return max(P.arities[name], 1)

    canon = {}
    for name in P.arities:
        vs = []
        for i in range(1, padded(name) + 1):
            v = f"_{name}{i}"
            while v in used:
                v += "_"
            used.add(v)
            vs.append(v)
        canon[name] = tuple(vs)

    fresh_count = [0]

    def fresh() -> str:
        while True:
            fresh_count[0] += 1
            v = f"_e{fresh_count[0]}"
            if v not in used:
                used.add(v)
                return v

    def rel_reference(name: str, args: tuple, bound: frozenset):
        """Atom or inlined lfp for one body occurrence of a relation symbol."""
        if name in bound:
            return RelAtom(name, args)
        return Fp(canon[name], name, build(name, bound), args, partial=False)

    def build(name: str, bound: frozenset):
        """Stage formula for the relation over its canonical variables."""
        bound = bound | {name}
        disjuncts = []
        for rule in P.rules_for(name):
            atoms = []
            quantified = sorted(rule.variables())
            for atom in rule.body:
                if isinstance(atom, RelAtom) and atom.name in P.arities:
                    args = atom.args
                    if P.arities[atom.name] == 0:
                        pad = fresh()
                        quantified.append(pad)
                        atoms.append(Eq(pad, ()))
                        args = (pad,)
                    atoms.append(rel_reference(atom.name, args, bound))
                else:
                    atoms.append(atom)
            if P.arities[name] == 0:
                atoms.append(Eq(canon[name][0], ()))
            else:
                for cv, hv in zip(canon[name], rule.head_vars):
                    atoms.append(Eq(cv, (VarItem(hv),)))
            body = _conj(atoms)
            for v in reversed(quantified):
                body = Exists(v, body)
            disjuncts.append(body)
        if not disjuncts:
            return _unsatisfiable(canon[name][0])
        out = disjuncts[0]
        for d in disjuncts[1:]:
            out = Or(out, d)
        return out

    k = P.arities[ANS]
    if k == 0:
        z = "z1"
        return Exists(z, And(Eq(z, ()), rel_reference(ANS, (z,), frozenset())))
    zs = tuple(f"z{i}" for i in range(1, k + 1))
    return rel_reference(ANS, zs, frozenset())
