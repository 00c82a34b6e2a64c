"""Bridges to neighboring logics.

FO[Eq] is first-order logic over the position structure of a word: universe
1..|w|+1 (the last node carries no letter), letter predicates Pa, order <,
succ, position equality, constants min/max, and the 4-ary Eq relating pairs
of positions that span equal factors.  Eq, <, and succ are computed on
demand from the equality oracle rather than materialized.

Translations:
 - foeq_to_fc: positions become prefixes (sigma(x) = w[1..alpha(x)-1]);
   prefix guards `exists z: u = x z` keep the width at most wd+1.
 - fc_to_foeq: each FC variable x becomes an open/close position pair
   (x_o, x_c); word equations unroll into a succ/Eq chain over two reused
   chain variables, giving width at most 2*wd+3.
 - fc_to_c_guarded: rewrites FC into a formula whose C-semantics (variables
   range over all of Sigma*) and FC-semantics coincide, by guarding every
   variable with factor-of-u conditions.
"""

from __future__ import annotations

from dataclasses import dataclass

from fclogic.core import UNIVERSE, Alphabet, FactorRef, Word
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
    ParseError,
    RelAtom,
    Tc,
    TermItem,
    TokenStream,
    VarItem,
    free_vars as fc_free_vars,
    tokenize,
)

MIN = "min"
MAX = "max"
_CONSTANTS = (MIN, MAX)


class UnsupportedNodeError(ValueError):
    pass


# ---------------------------------------------------------------------------
# FO[Eq] abstract syntax
# ---------------------------------------------------------------------------

# Terms are plain strings: a variable name or one of the constants min/max.


@dataclass(frozen=True)
class FoLetter:
    letter: str
    term: str


@dataclass(frozen=True)
class FoLess:
    left: str
    right: str


@dataclass(frozen=True)
class FoSucc:
    left: str
    right: str


@dataclass(frozen=True)
class FoEqPos:
    left: str
    right: str


@dataclass(frozen=True)
class FoEq4:
    x1: str
    y1: str
    x2: str
    y2: str


@dataclass(frozen=True)
class FoAnd:
    left: "FoFormula"
    right: "FoFormula"


@dataclass(frozen=True)
class FoOr:
    left: "FoFormula"
    right: "FoFormula"


@dataclass(frozen=True)
class FoNot:
    sub: "FoFormula"


@dataclass(frozen=True)
class FoExists:
    var: str
    sub: "FoFormula"


@dataclass(frozen=True)
class FoForall:
    var: str
    sub: "FoFormula"


FoFormula = (
    FoLetter | FoLess | FoSucc | FoEqPos | FoEq4 | FoAnd | FoOr | FoNot | FoExists | FoForall
)


def _term_vars(*terms) -> set:
    return {t for t in terms if t not in _CONSTANTS}


def fo_free_vars(phi) -> set:
    if isinstance(phi, FoLetter):
        return _term_vars(phi.term)
    if isinstance(phi, (FoLess, FoSucc, FoEqPos)):
        return _term_vars(phi.left, phi.right)
    if isinstance(phi, FoEq4):
        return _term_vars(phi.x1, phi.y1, phi.x2, phi.y2)
    if isinstance(phi, (FoAnd, FoOr)):
        return fo_free_vars(phi.left) | fo_free_vars(phi.right)
    if isinstance(phi, FoNot):
        return fo_free_vars(phi.sub)
    if isinstance(phi, (FoExists, FoForall)):
        return fo_free_vars(phi.sub) - {phi.var}
    raise TypeError(f"not an FO[Eq] node: {phi!r}")


def fo_width(phi) -> int:
    k = len(fo_free_vars(phi))
    if isinstance(phi, (FoAnd, FoOr)):
        return max(k, fo_width(phi.left), fo_width(phi.right))
    if isinstance(phi, (FoNot, FoExists, FoForall)):
        return max(k, fo_width(phi.sub))
    return k


def fo_classify(phi) -> tuple:
    """(existential, existential_positive) flags."""
    neg = uni = False

    def walk(f):
        nonlocal neg, uni
        if isinstance(f, FoNot):
            neg = True
            walk(f.sub)
        elif isinstance(f, FoForall):
            uni = True
            walk(f.sub)
        elif isinstance(f, FoExists):
            walk(f.sub)
        elif isinstance(f, (FoAnd, FoOr)):
            walk(f.left)
            walk(f.right)

    walk(phi)
    return (not uni, not uni and not neg)


# ---------------------------------------------------------------------------
# FO[Eq] surface syntax (shares the tokenizer and connective grammar)
# ---------------------------------------------------------------------------


def parse_foeq(text: str):
    s = TokenStream(tokenize(text))
    phi = _fo_or(s)
    tok = s.peek()
    if tok.kind != "eof":
        raise ParseError(f"unexpected trailing input {tok.value!r}", tok.line, tok.col)
    return phi


def _fo_or(s):
    phi = _fo_and(s)
    while s.at_punct("|"):
        s.next()
        phi = FoOr(phi, _fo_and(s))
    return phi


def _fo_and(s):
    phi = _fo_unary(s)
    while s.at_punct("&"):
        s.next()
        phi = FoAnd(phi, _fo_unary(s))
    return phi


def _fo_unary(s):
    if s.at_punct("!"):
        s.next()
        return FoNot(_fo_unary(s))
    if s.at_keyword("exists") or s.at_keyword("forall"):
        make = FoExists if s.next().value == "exists" else FoForall
        names = [_fo_var(s)]
        while s.at_punct(","):
            s.next()
            names.append(_fo_var(s))
        s.expect("punct", ":")
        body = _fo_or(s)
        for name in reversed(names):
            body = make(name, body)
        return body
    return _fo_atom(s)


def _fo_var(s) -> str:
    tok = s.expect("ident")
    if tok.value in _CONSTANTS or tok.value == UNIVERSE:
        raise ParseError(f"{tok.value!r} cannot be quantified", tok.line, tok.col)
    return tok.value


def _fo_term(s) -> str:
    tok = s.expect("ident")
    if tok.value == UNIVERSE:
        raise ParseError(f"{UNIVERSE!r} is not an FO[Eq] term", tok.line, tok.col)
    return tok.value


def _fo_atom(s):
    if s.at_punct("("):
        s.next()
        phi = _fo_or(s)
        s.expect("punct", ")")
        return phi
    tok = s.peek()
    if tok.kind == "ident" and s.peek(1).kind == "punct" and s.peek(1).value == "(":
        name = s.next().value
        s.next()
        args = [_fo_term(s)]
        while s.at_punct(","):
            s.next()
            args.append(_fo_term(s))
        s.expect("punct", ")")
        if name == "succ":
            if len(args) != 2:
                raise ParseError("succ takes two arguments", tok.line, tok.col)
            return FoSucc(*args)
        if name == "Eq":
            if len(args) != 4:
                raise ParseError("Eq takes four arguments", tok.line, tok.col)
            return FoEq4(*args)
        if len(name) == 2 and name[0] == "P" and len(args) == 1:
            return FoLetter(name[1], args[0])
        raise ParseError(f"unknown predicate {name!r}", tok.line, tok.col)
    left = _fo_term(s)
    if s.at_punct("<"):
        s.next()
        return FoLess(left, _fo_term(s))
    if s.at_punct("="):
        s.next()
        return FoEqPos(left, _fo_term(s))
    s.error("expected '<', '=', or a predicate")


def print_foeq(phi) -> str:
    return _fo_print(phi, 0)


def _fo_print(phi, context: int) -> str:
    if isinstance(phi, FoLetter):
        return f"P{phi.letter}({phi.term})"
    if isinstance(phi, FoLess):
        return f"{phi.left} < {phi.right}"
    if isinstance(phi, FoEqPos):
        return f"{phi.left} = {phi.right}"
    if isinstance(phi, FoSucc):
        return f"succ({phi.left}, {phi.right})"
    if isinstance(phi, FoEq4):
        return f"Eq({phi.x1}, {phi.y1}, {phi.x2}, {phi.y2})"
    if isinstance(phi, FoOr):
        body = f"{_fo_print(phi.left, 1)} | {_fo_print(phi.right, 1)}"
        return f"({body})" if context > 1 else body
    if isinstance(phi, FoAnd):
        body = f"{_fo_print(phi.left, 2)} & {_fo_print(phi.right, 2)}"
        return f"({body})" if context > 2 else body
    if isinstance(phi, FoNot):
        return f"!{_fo_print(phi.sub, 3)}"
    if isinstance(phi, (FoExists, FoForall)):
        word = "exists" if isinstance(phi, FoExists) else "forall"
        names = [phi.var]
        sub = phi.sub
        while isinstance(sub, type(phi)):
            names.append(sub.var)
            sub = sub.sub
        body = f"{word} {', '.join(names)}: {_fo_print(sub, 0)}"
        # a quantifier extends maximally to the right, so it must be wrapped
        # whenever anything follows it
        return f"({body})" if context > 0 else body
    raise TypeError(f"not an FO[Eq] node: {phi!r}")


# ---------------------------------------------------------------------------
# Evaluation over the position structure
# ---------------------------------------------------------------------------


def _sat_atom(f, w: Word, oracle, alpha: dict) -> bool:
    def value(term: str) -> int:
        if term == MIN:
            return 1
        if term == MAX:
            return w.n + 1
        if term not in alpha:
            raise ValueError(f"unbound FO variable {term!r}")
        return alpha[term]

    if isinstance(f, FoLetter):
        i = value(f.term)
        return i <= w.n and w.text[i - 1] == f.letter
    if isinstance(f, FoLess):
        return value(f.left) < value(f.right)
    if isinstance(f, FoEqPos):
        return value(f.left) == value(f.right)
    if isinstance(f, FoSucc):
        return value(f.right) == value(f.left) + 1
    if isinstance(f, FoEq4):
        i1, j1 = value(f.x1), value(f.y1)
        i2, j2 = value(f.x2), value(f.y2)
        if i1 > j1 or i2 > j2 or j1 - i1 != j2 - i2:
            return False
        return oracle.factor_eq(FactorRef(i1, j1 - i1), FactorRef(i2, j2 - i2))
    raise TypeError(f"not an FO[Eq] atom: {f!r}")


def _sat_table(phi, w: Word, fixed: dict):
    """Satisfying-assignment table (vars, rows) over the unfixed free variables.

    Evaluation is bottom-up per subformula (joins for conjunction, padded
    unions for disjunction, complements for negation, projection / full-group
    filtering for the quantifiers), so the cost is governed by the largest
    subformula table rather than by the total quantifier depth.
    """
    import itertools

    oracle = w.oracle()
    domain = range(1, w.n + 2)
    size = w.n + 1

    def atom(f):
        fv = tuple(sorted(fo_free_vars(f) - set(fixed_of(f))))
        rows = set()
        base = fixed_of(f)
        for values in itertools.product(domain, repeat=len(fv)):
            alpha = dict(base)
            alpha.update(zip(fv, values))
            if _sat_atom(f, w, oracle, alpha):
                rows.add(values)
        return fv, rows

    shadows: list = []

    def fixed_of(f) -> dict:
        return {k: v for k, v in fixed.items() if k not in shadows}

    def join(a, b):
        va, ra = a
        vb, rb = b
        out_vars = tuple(sorted(set(va) | set(vb)))
        shared = [v for v in va if v in vb]
        ib = {v: i for i, v in enumerate(vb)}
        ia = {v: i for i, v in enumerate(va)}
        index: dict = {}
        for row in rb:
            index.setdefault(tuple(row[ib[v]] for v in shared), []).append(row)
        rows = set()
        for row in ra:
            key = tuple(row[ia[v]] for v in shared)
            for other in index.get(key, ()):
                merged = dict(zip(va, row))
                merged.update(zip(vb, other))
                rows.add(tuple(merged[v] for v in out_vars))
        return out_vars, rows

    def pad(t, out_vars):
        vs, rows = t
        if vs == out_vars:
            return rows
        extra = [v for v in out_vars if v not in vs]
        iv = {v: i for i, v in enumerate(vs)}
        out = set()
        for row in rows:
            for values in itertools.product(domain, repeat=len(extra)):
                merged = dict(zip(vs, row))
                merged.update(zip(extra, values))
                out.add(tuple(merged[v] for v in out_vars))
        return out

    def walk(f):
        if isinstance(f, FoAnd):
            return join(walk(f.left), walk(f.right))
        if isinstance(f, FoOr):
            left, right = walk(f.left), walk(f.right)
            out_vars = tuple(sorted(set(left[0]) | set(right[0])))
            return out_vars, pad(left, out_vars) | pad(right, out_vars)
        if isinstance(f, FoNot):
            vs, rows = walk(f.sub)
            full = set(itertools.product(domain, repeat=len(vs)))
            return vs, full - rows
        if isinstance(f, (FoExists, FoForall)):
            shadowed = f.var in fixed and f.var not in shadows
            if shadowed:
                shadows.append(f.var)
            vs, rows = walk(f.sub)
            if shadowed:
                shadows.remove(f.var)
            if f.var not in vs:
                return vs, rows  # the domain is never empty
            i = vs.index(f.var)
            out_vars = vs[:i] + vs[i + 1 :]
            if isinstance(f, FoExists):
                return out_vars, {row[:i] + row[i + 1 :] for row in rows}
            counts: dict = {}
            for row in rows:
                key = row[:i] + row[i + 1 :]
                counts[key] = counts.get(key, 0) + 1
            return out_vars, {key for key, c in counts.items() if c == size}
        return atom(f)

    return walk(phi)


def eval_foeq(phi, w: Word, alpha: dict | None = None) -> bool:
    """Satisfaction on the position structure of w (universe 1..|w|+1)."""
    alpha = alpha or {}
    for v in sorted(fo_free_vars(phi)):
        if v not in alpha:
            raise ValueError(f"unbound FO variable {v!r}")
    _, rows = _sat_table(phi, w, alpha)
    return bool(rows)


def eval_foeq_assignments(phi, w: Word) -> set:
    """All satisfying assignments to the free variables, as sorted-var tuples."""
    vs, rows = _sat_table(phi, w, {})
    assert vs == tuple(sorted(fo_free_vars(phi)))
    return rows


# ---------------------------------------------------------------------------
# FO[Eq] -> FC (positions become prefixes)
# ---------------------------------------------------------------------------


def _fresh(base: str, taken: set) -> str:
    name = base
    while name in taken or name == UNIVERSE:
        name += "_"
    return name


def _all_fo_vars(phi) -> set:
    if isinstance(phi, (FoExists, FoForall)):
        return {phi.var} | _all_fo_vars(phi.sub)
    if isinstance(phi, (FoAnd, FoOr)):
        return _all_fo_vars(phi.left) | _all_fo_vars(phi.right)
    if isinstance(phi, FoNot):
        return _all_fo_vars(phi.sub)
    return fo_free_vars(phi)


def foeq_to_fc(phi, alphabet: Alphabet) -> Formula:
    """FC formula realizing phi: sigma(x) is the prefix of u of length alpha(x)-1.

    Width is at most fo_width(phi) + 1; existential / existential-positive
    formulas stay in their fragment.
    """
    z = _fresh("_z", _all_fo_vars(phi))
    letters = list(alphabet.letters)
    if not letters:
        raise ValueError("the alphabet must not be empty")

    def prefix_guard(x: str) -> Formula:
        return Exists(z, Eq(UNIVERSE, (VarItem(x), VarItem(z))))

    def contradiction() -> Formula:
        a = letters[0]
        return And(Eq(UNIVERSE, (TermItem(a),)), Eq(UNIVERSE, (TermItem(a + a),)))

    def disj(parts) -> Formula:
        out = parts[0]
        for p in parts[1:]:
            out = Or(out, p)
        return out

    def conj(parts) -> Formula:
        out = parts[0]
        for p in parts[1:]:
            out = And(out, p)
        return out

    def eq_pos(left: str, right: str) -> Formula:
        if left in _CONSTANTS and right in _CONSTANTS:
            if left == right:
                return Eq(UNIVERSE, (VarItem(UNIVERSE),))
            return Eq(UNIVERSE, ())  # min = max iff the word is empty
        if right in _CONSTANTS:
            left, right = right, left
        # right is a variable here
        if left == MIN:
            return Eq(right, ())
        if left == MAX:
            return And(Eq(right, (VarItem(UNIVERSE),)), prefix_guard(right))
        return And(
            Eq(left, (VarItem(right),)), And(prefix_guard(left), prefix_guard(right))
        )

    def less(x: str, y: str) -> Formula:
        if x == MAX or y == MIN:
            return contradiction()
        if y == MAX:
            if x == MIN:
                return Exists(z, disj([Eq(UNIVERSE, (TermItem(a), VarItem(z))) for a in letters]))
            return disj(
                [Exists(z, Eq(UNIVERSE, (VarItem(x), TermItem(a), VarItem(z)))) for a in letters]
            )
        if x == MIN:
            return And(
                prefix_guard(y),
                Exists(z, disj([Eq(y, (TermItem(a), VarItem(z))) for a in letters])),
            )
        return And(
            prefix_guard(y),
            disj([Exists(z, Eq(y, (VarItem(x), TermItem(a), VarItem(z)))) for a in letters]),
        )

    def letter(a: str, t: str) -> Formula:
        if a not in alphabet.letters:
            return contradiction()
        if t == MAX:
            # the last node of the position structure carries no letter
            return contradiction()
        if t == MIN:
            return Exists(z, Eq(UNIVERSE, (TermItem(a), VarItem(z))))
        return Exists(z, Eq(UNIVERSE, (VarItem(t), TermItem(a), VarItem(z))))

    def succ(x: str, y: str) -> Formula:
        if x == MAX or y == MIN:
            return contradiction()
        if x == MIN and y == MAX:
            return disj([Eq(UNIVERSE, (TermItem(a),)) for a in letters])
        if y == MAX:
            return disj([Eq(UNIVERSE, (VarItem(x), TermItem(a))) for a in letters])
        if x == MIN:
            return And(prefix_guard(y), disj([Eq(y, (TermItem(a),)) for a in letters]))
        return And(prefix_guard(y), disj([Eq(y, (VarItem(x), TermItem(a))) for a in letters]))

    def eq4(x1: str, y1: str, x2: str, y2: str) -> Formula:
        guards = [prefix_guard(y) for y in (y1, y2) if y not in _CONSTANTS]

        def side(xi: str, yi: str) -> list:
            if yi == MIN:
                # the spanned factor is forced empty
                parts = [Eq(z, ())]
                if xi == MAX:
                    parts.append(Eq(UNIVERSE, ()))
                elif xi != MIN:
                    parts.append(Eq(xi, ()))
                return parts
            lhs = UNIVERSE if yi == MAX else yi
            if xi == MIN:
                return [Eq(lhs, (VarItem(z),))]
            rhs_head = VarItem(UNIVERSE) if xi == MAX else VarItem(xi)
            return [Eq(lhs, (rhs_head, VarItem(z)))]

        body = Exists(z, conj(side(x1, y1) + side(x2, y2)))
        return conj(guards + [body]) if guards else body

    def walk(f) -> Formula:
        if isinstance(f, FoEqPos):
            return eq_pos(f.left, f.right)
        if isinstance(f, FoLess):
            return less(f.left, f.right)
        if isinstance(f, FoLetter):
            return letter(f.letter, f.term)
        if isinstance(f, FoSucc):
            return succ(f.left, f.right)
        if isinstance(f, FoEq4):
            return eq4(f.x1, f.y1, f.x2, f.y2)
        if isinstance(f, FoAnd):
            return And(walk(f.left), walk(f.right))
        if isinstance(f, FoOr):
            left_only = fo_free_vars(f.left) - fo_free_vars(f.right)
            right_only = fo_free_vars(f.right) - fo_free_vars(f.left)
            lhs = conj([walk(f.left)] + [prefix_guard(x) for x in sorted(right_only)])
            rhs = conj([walk(f.right)] + [prefix_guard(x) for x in sorted(left_only)])
            return Or(lhs, rhs)
        if isinstance(f, FoNot):
            guards = [prefix_guard(x) for x in sorted(fo_free_vars(f.sub))]
            return conj([Not(walk(f.sub))] + guards)
        if isinstance(f, FoExists):
            return Exists(f.var, walk(f.sub))
        if isinstance(f, FoForall):
            return Forall(f.var, Or(Not(prefix_guard(f.var)), walk(f.sub)))
        raise TypeError(f"not an FO[Eq] node: {f!r}")

    return walk(phi)


def prefix_of(w: Word, position: int) -> FactorRef:
    """The factor realizing an FO position: the prefix w[1..position-1]."""
    if not 1 <= position <= w.n + 1:
        raise ValueError(f"position {position} outside 1..{w.n + 1}")
    return FactorRef(1, position - 1)


# ---------------------------------------------------------------------------
# FC -> FO[Eq] (variables become open/close position pairs)
# ---------------------------------------------------------------------------


def open_close(x: str) -> tuple:
    return f"{x}_o", f"{x}_c"


def _explode(pattern) -> list:
    out = []
    for item in pattern:
        if isinstance(item, TermItem):
            out.extend(("t", ch) for ch in item.word)
        else:
            out.append(("v", item.name))
    return out


def fc_to_foeq(phi: Formula, alphabet: Alphabet):
    """FO[Eq] formula realizing phi: each FC variable x becomes (x_o, x_c).

    Accepts plain FC only (no constraints, closures, fixpoints, or relation
    atoms).  fo_width(result) <= 2*width(phi) + 3.
    """
    all_vars = set()
    for sub in _fc_subformulas(phi):
        if isinstance(sub, Eq):
            all_vars |= {sub.lhs} | {i.name for i in sub.rhs if isinstance(i, VarItem)}
        elif isinstance(sub, (Exists, Forall)):
            all_vars.add(sub.var)
    all_vars.discard(UNIVERSE)
    pair_names = {name for x in all_vars for name in open_close(x)}
    rename = {}
    for x in sorted(all_vars):
        if x in pair_names:
            fresh = x
            while fresh in all_vars or fresh in pair_names:
                fresh += "_r"
            rename[x] = fresh
    if rename:
        phi = _fc_rename(phi, rename)

    taken = {name for x in all_vars for name in open_close(rename.get(x, x))}
    z1 = _fresh("_z1", taken)
    z2 = _fresh("_z2", taken | {z1})
    z3 = _fresh("_z3", taken | {z1, z2})
    a0 = alphabet.letters[0]

    def unsat():
        aux = _fresh("_x", taken)
        return FoExists(aux, FoAnd(FoLetter(a0, aux), FoEqPos(aux, MAX)))

    def all_empty(variables) -> object:
        parts = [FoEqPos(MIN, MAX)]
        for y in sorted(variables):
            yo, yc = open_close(y)
            parts.append(FoEqPos(yo, yc))
        out = parts[0]
        for p in parts[1:]:
            out = FoAnd(out, p)
        return out

    def equation(eq: Eq):
        symbols = _explode(eq.rhs)
        pat_vars = {v for kind, v in symbols if kind == "v"}
        if not symbols:
            if eq.lhs == UNIVERSE:
                return FoEqPos(MIN, MAX)
            xo, xc = open_close(eq.lhs)
            return FoEqPos(xo, xc)
        if UNIVERSE in pat_vars:
            if any(kind == "t" for kind, _ in symbols):
                # |sigma(rhs)| > |sigma(u)| >= |sigma(lhs)|: unsatisfiable;
                # the guards only install the required free variables
                out = unsat()
                for y in sorted(fc_free_vars(eq)):
                    out = FoAnd(out, le_guard(y))
                return out
            u_count = sum(1 for kind, v in symbols if kind == "v" and v == UNIVERSE)
            if u_count >= 2:
                return all_empty(fc_free_vars(eq))
            if len(symbols) == 1:  # the equation is lhs = u
                if eq.lhs == UNIVERSE:
                    return FoEqPos(MIN, MIN)
                xo, xc = open_close(eq.lhs)
                return FoAnd(FoEqPos(xo, MIN), FoEqPos(xc, MAX))
            parts = []
            for y in sorted(pat_vars - {UNIVERSE}):
                yo, yc = open_close(y)
                parts.append(FoEqPos(yo, yc))
            if eq.lhs != UNIVERSE:
                xo, xc = open_close(eq.lhs)
                parts = [FoEqPos(xo, MIN), FoEqPos(xc, MAX)] + parts
            out = parts[0]
            for p in parts[1:]:
                out = FoAnd(out, p)
            return out

        # main construction: chain y_1 .. y_{n+1} reusing z1/z2 (and z3 for
        # the final endpoint when the left side is not u)
        n = len(symbols)
        closed = eq.lhs == UNIVERSE

        def yname(i: int) -> str:  # 1-based chain position
            if not closed and i == n + 1:
                return z3
            return z1 if i % 2 == 1 else z2

        def link(i: int):
            kind, value = symbols[i - 1]
            if kind == "t":
                return FoAnd(FoLetter(value, yname(i)), FoSucc(yname(i), yname(i + 1)))
            vo, vc = open_close(value)
            return FoEq4(vo, vc, yname(i), yname(i + 1))

        if closed:
            body = link(n)
            body = FoAnd(body, FoEqPos(yname(n + 1), MAX))
            for i in range(n - 1, 0, -1):
                body = FoAnd(link(i), FoExists(yname(i + 2), body))
            body = FoAnd(FoEqPos(yname(1), MIN), body)
            return FoExists(yname(1), FoExists(yname(2), body))
        xo, xc = open_close(eq.lhs)
        body = link(n)
        for i in range(n - 1, 0, -1):
            # yname(n + 1) is referenced by the top-level Eq and must not be
            # re-quantified inside the chain
            if i + 2 <= n:
                body = FoAnd(link(i), FoExists(yname(i + 2), body))
            else:
                body = FoAnd(link(i), body)
        body = FoAnd(FoEq4(xo, xc, yname(1), yname(n + 1)), body)
        quantified = {yname(1), yname(2), yname(n + 1)}
        for q in sorted(quantified, reverse=True):
            body = FoExists(q, body)
        return body

    def le_guard(x: str):
        xo, xc = open_close(x)
        return FoOr(FoLess(xo, xc), FoEqPos(xo, xc))

    def walk(f: Formula):
        if isinstance(f, Eq):
            return equation(f)
        if isinstance(f, And):
            return FoAnd(walk(f.left), walk(f.right))
        if isinstance(f, Or):
            left_only = fc_free_vars(f.left) - fc_free_vars(f.right)
            right_only = fc_free_vars(f.right) - fc_free_vars(f.left)
            lhs = walk(f.left)
            for x in sorted(right_only):
                lhs = FoAnd(lhs, le_guard(x))
            rhs = walk(f.right)
            for x in sorted(left_only):
                rhs = FoAnd(rhs, le_guard(x))
            return FoOr(lhs, rhs)
        if isinstance(f, Not):
            out = FoNot(walk(f.sub))
            for x in sorted(fc_free_vars(f.sub)):
                out = FoAnd(out, le_guard(x))
            return out
        if isinstance(f, Exists):
            xo, xc = open_close(f.var)
            return FoExists(xo, FoExists(xc, walk(f.sub)))
        if isinstance(f, Forall):
            xo, xc = open_close(f.var)
            return FoForall(xo, FoForall(xc, FoOr(FoLess(xc, xo), walk(f.sub))))
        raise UnsupportedNodeError(
            f"fc_to_foeq handles plain FC only, not {type(f).__name__}"
        )

    return walk(phi)


def _fc_subformulas(phi: Formula):
    from fclogic.syntax import subformulas

    yield from subformulas(phi)


def _fc_rename(phi: Formula, rename: dict) -> Formula:
    def item(i):
        if isinstance(i, VarItem):
            return VarItem(rename.get(i.name, i.name))
        return i

    if isinstance(phi, Eq):
        return Eq(rename.get(phi.lhs, phi.lhs), tuple(item(i) for i in phi.rhs))
    if isinstance(phi, And):
        return And(_fc_rename(phi.left, rename), _fc_rename(phi.right, rename))
    if isinstance(phi, Or):
        return Or(_fc_rename(phi.left, rename), _fc_rename(phi.right, rename))
    if isinstance(phi, Not):
        return Not(_fc_rename(phi.sub, rename))
    if isinstance(phi, Exists):
        return Exists(rename.get(phi.var, phi.var), _fc_rename(phi.sub, rename))
    if isinstance(phi, Forall):
        return Forall(rename.get(phi.var, phi.var), _fc_rename(phi.sub, rename))
    raise UnsupportedNodeError(f"cannot rename inside {type(phi).__name__}")


def expresses(w: Word, alpha: dict, sigma_vars) -> dict | None:
    """Factor bindings expressed by an FO assignment over open/close pairs.

    Returns {x: FactorRef} if every pair satisfies alpha(x_o) <= alpha(x_c),
    else None.
    """
    out = {}
    for x in sigma_vars:
        xo, xc = open_close(x)
        o, c = alpha[xo], alpha[xc]
        if o > c:
            return None
        out[x] = FactorRef(o, c - o)
    return out


# ---------------------------------------------------------------------------
# FC -> guarded C (Sigma* semantics)
# ---------------------------------------------------------------------------


def fc_to_c_guarded(phi: Formula) -> Formula:
    """Formula whose C-semantics and FC-semantics coincide with phi's.

    Every equation x = rhs with x != u is embedded into u via
    `exists p, s: (u = p x s & u = p rhs s)`; disjunctions, negations, and
    universal quantifiers get factor-of-u guards for otherwise unguarded
    variables.  The universal case introduces the construction's only
    negation.
    """
    taken = set()
    for sub in _fc_subformulas(phi):
        if isinstance(sub, Eq):
            taken |= {sub.lhs} | {i.name for i in sub.rhs if isinstance(i, VarItem)}
        elif isinstance(sub, (Exists, Forall)):
            taken.add(sub.var)
    p = _fresh("_p", taken)
    s = _fresh("_s", taken | {p})

    def guard(x: str) -> Formula:
        return Exists(
            p, Exists(s, Eq(UNIVERSE, (VarItem(p), VarItem(x), VarItem(s))))
        )

    def walk(f: Formula) -> Formula:
        if isinstance(f, Eq):
            if f.lhs == UNIVERSE:
                return f
            embedded = And(
                Eq(UNIVERSE, (VarItem(p), VarItem(f.lhs), VarItem(s))),
                Eq(UNIVERSE, (VarItem(p),) + tuple(f.rhs) + (VarItem(s),)),
            )
            return Exists(p, Exists(s, embedded))
        if isinstance(f, And):
            return And(walk(f.left), walk(f.right))
        if isinstance(f, Or):
            left_only = fc_free_vars(f.left) - fc_free_vars(f.right)
            right_only = fc_free_vars(f.right) - fc_free_vars(f.left)
            lhs = walk(f.left)
            for x in sorted(right_only):
                lhs = And(lhs, guard(x))
            rhs = walk(f.right)
            for x in sorted(left_only):
                rhs = And(rhs, guard(x))
            return Or(lhs, rhs)
        if isinstance(f, Not):
            out = Not(walk(f.sub))
            for x in sorted(fc_free_vars(f.sub)):
                out = And(out, guard(x))
            return out
        if isinstance(f, Exists):
            return Exists(f.var, walk(f.sub))
        if isinstance(f, Forall):
            return Forall(f.var, Or(walk(f.sub), Not(guard(f.var))))
        raise UnsupportedNodeError(
            f"fc_to_c_guarded handles plain FC only, not {type(f).__name__}"
        )

    return walk(phi)
