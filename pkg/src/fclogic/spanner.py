"""Document spanners: regex formulas with capture variables and the
core/generalized-core algebra, compiled into realizing formulas.

A regex formula extends a regular expression with bindings ``x{...}``.  It is
functional when every match assigns every variable exactly once; this is
enforced syntactically (union branches bind equal variable sets,
concatenations bind disjoint sets, starred subtrees bind nothing).

A span [i, j] of w is encoded by two factor variables: x_P holds the prefix
w[1..i-1] and x_C holds the content w[i..j-1].  Compilation threads an
explicit prefix pattern p through the match: C(beta, p, c) states that the
factor c matches beta when it starts right after the prefix p, and a binding
x{beta} emits x_P = p and x_C = c.  The top level anchors everything with
``exists c: u = c & C(alpha, eps, c)``, which makes every x_P a prefix of u
and the decoding i = |x_P|+1, j = i + |x_C| unique.
"""

from __future__ import annotations

from dataclasses import dataclass

from fclogic.core import UNIVERSE, Word
from fclogic.evaluator import EvalConfig, EngineStats, eval_bottomup
from fclogic.regexlang import (
    RAlt,
    RCat,
    REmpty,
    REps,
    RLetter,
    RSigma,
    RStar,
    _META,
)
from fclogic.syntax import (
    And,
    Constraint,
    Eq,
    Exists,
    Not,
    Or,
    ParseError,
    TermItem,
    TokenStream,
    VarItem,
    tokenize,
)


@dataclass(frozen=True)
class Bind:
    var: str
    sub: object


# ---------------------------------------------------------------------------
# Regex-formula surface syntax: regexlang syntax plus ident{...} bindings
# ---------------------------------------------------------------------------

_RF_META = _META | set("{}")


def parse_regex_formula(src: str):
    pos = 0

    def error(msg):
        raise ParseError(f"{msg} (in regex formula at offset {pos})")

    def peek():
        return src[pos] if pos < len(src) else None

    def parse_alt():
        nonlocal pos
        left = parse_cat()
        while peek() == "|":
            pos += 1
            left = RAlt(left, parse_cat())
        return left

    def parse_cat():
        parts = []
        while peek() is not None and peek() not in "|)}":
            parts.append(parse_post())
        if not parts:
            return REps()
        out = parts[0]
        for p in parts[1:]:
            out = RCat(out, p)
        return out

    def parse_post():
        nonlocal pos
        atom = parse_atom()
        while peek() == "*":
            pos += 1
            atom = RStar(atom)
        return atom

    def _ident_bind():
        # maximal identifier run immediately followed by '{'
        nonlocal pos
        j = pos
        while j < len(src) and (src[j].isalnum() or src[j] == "_"):
            j += 1
        if j > pos and j < len(src) and src[j] == "{":
            return src[pos:j], j
        return None, pos

    def parse_atom():
        nonlocal pos
        ch = peek()
        if ch is None:
            error("unexpected end of regex formula")
        if ch == "(":
            pos += 1
            if peek() == ")":
                pos += 1
                return REps()
            inner = parse_alt()
            if peek() != ")":
                error("expected ')'")
            pos += 1
            return inner
        if ch == "[":
            pos += 1
            if peek() != "]":
                error("expected ']'")
            pos += 1
            return REmpty()
        if ch == "S":
            pos += 1
            return RSigma()
        if ch == "\\":
            pos += 1
            if peek() is None:
                error("dangling escape")
            letter = src[pos]
            pos += 1
            return RLetter(letter)
        name, after = _ident_bind()
        if name is not None:
            if name == UNIVERSE:
                error(f"{UNIVERSE!r} cannot be a capture variable")
            pos = after + 1  # past '{'
            inner = parse_alt()
            if peek() != "}":
                error("expected '}'")
            pos += 1
            return Bind(name, inner)
        if ch in _RF_META:
            error(f"unexpected {ch!r}")
        pos += 1
        return RLetter(ch)

    out = parse_alt()
    if pos != len(src):
        error(f"unexpected {src[pos]!r}")
    return out


def print_regex_formula(node) -> str:
    return _print_rf(node, 1)


def _print_rf(node, context: int) -> str:
    if isinstance(node, Bind):
        body = f"{node.var}{{{_print_rf(node.sub, 1)}}}"
        # inside a concatenation a preceding letter would merge into the
        # variable name (the parser takes the maximal identifier run)
        return f"({body})" if context > 1 else body
    if isinstance(node, REmpty):
        return "[]"
    if isinstance(node, REps):
        return "()"
    if isinstance(node, RSigma):
        return "S"
    if isinstance(node, RLetter):
        return "\\" + node.letter if node.letter in _RF_META else node.letter
    if isinstance(node, RAlt):
        body = f"{_print_rf(node.left, 1)}|{_print_rf(node.right, 2)}"
        return f"({body})" if context > 1 else body
    if isinstance(node, RCat):
        body = f"{_print_rf(node.left, 2)}{_print_rf(node.right, 3)}"
        return f"({body})" if context > 2 else body
    if isinstance(node, RStar):
        return f"{_print_rf(node.sub, 4)}*"
    raise TypeError(f"not a regex formula node: {node!r}")


# ---------------------------------------------------------------------------
# Functionality check
# ---------------------------------------------------------------------------


def bound_vars(node) -> set:
    if isinstance(node, Bind):
        return {node.var} | bound_vars(node.sub)
    if isinstance(node, (RAlt, RCat)):
        return bound_vars(node.left) | bound_vars(node.right)
    if isinstance(node, RStar):
        return bound_vars(node.sub)
    return set()


def check_functional(node) -> bool:
    """Every match binds every variable exactly once, checked syntactically."""
    if isinstance(node, Bind):
        return node.var not in bound_vars(node.sub) and check_functional(node.sub)
    if isinstance(node, RAlt):
        return (
            bound_vars(node.left) == bound_vars(node.right)
            and check_functional(node.left)
            and check_functional(node.right)
        )
    if isinstance(node, RCat):
        return (
            not (bound_vars(node.left) & bound_vars(node.right))
            and check_functional(node.left)
            and check_functional(node.right)
        )
    if isinstance(node, RStar):
        return not bound_vars(node.sub)
    return True


def _to_plain_regex(node):
    """The underlying plain regex of a binding-free subtree."""
    if isinstance(node, Bind):
        raise ValueError("subtree still contains bindings")
    if isinstance(node, RAlt):
        return RAlt(_to_plain_regex(node.left), _to_plain_regex(node.right))
    if isinstance(node, RCat):
        return RCat(_to_plain_regex(node.left), _to_plain_regex(node.right))
    if isinstance(node, RStar):
        return RStar(_to_plain_regex(node.sub))
    return node


# ---------------------------------------------------------------------------
# Compilation into a realizing formula
# ---------------------------------------------------------------------------


def span_pair(x: str) -> tuple:
    return f"{x}_P", f"{x}_C"


def compile_regex_formula(alpha):
    """FC[REG] formula over {x_P, x_C | x bound in alpha} realizing [[alpha]]."""
    if not check_functional(alpha):
        raise ValueError("regex formula is not functional")
    counter = [0]

    def fresh() -> str:
        counter[0] += 1
        return f"_c{counter[0]}"

    def compile_node(node, prefix: tuple, c: str):
        """Formula: factor c matches node, starting right after the prefix pattern."""
        if not bound_vars(node):
            plain = _to_plain_regex(node)
            if isinstance(plain, REps):
                return Eq(c, ())
            if isinstance(plain, RLetter):
                return Eq(c, (TermItem(plain.letter),))
            return Constraint(c, plain)
        if isinstance(node, Bind):
            xp, xc = span_pair(node.var)
            out = And(Eq(xp, prefix), Eq(xc, (VarItem(c),)))
            return And(out, compile_node(node.sub, prefix, c))
        if isinstance(node, RAlt):
            return Or(compile_node(node.left, prefix, c), compile_node(node.right, prefix, c))
        if isinstance(node, RCat):
            c1, c2 = fresh(), fresh()
            split = Eq(c, (VarItem(c1), VarItem(c2)))
            left = compile_node(node.left, prefix, c1)
            right = compile_node(node.right, prefix + (VarItem(c1),), c2)
            return Exists(c1, Exists(c2, And(split, And(left, right))))
        # a functional formula cannot bind under a star
        raise ValueError(f"cannot compile {node!r}")

    c = fresh()
    return Exists(c, And(Eq(UNIVERSE, (VarItem(c),)), compile_node(alpha, (), c)))


# ---------------------------------------------------------------------------
# Spanner algebra
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Rgx:
    formula: object


@dataclass(frozen=True)
class Union:
    left: object
    right: object


@dataclass(frozen=True)
class Join:
    left: object
    right: object


@dataclass(frozen=True)
class Diff:
    left: object
    right: object


@dataclass(frozen=True)
class Project:
    keep: tuple
    sub: object


@dataclass(frozen=True)
class EqSelect:
    x: str
    y: str
    sub: object


def spanner_vars(e) -> set:
    if isinstance(e, Rgx):
        return bound_vars(e.formula)
    if isinstance(e, (Union, Diff)):
        left, right = spanner_vars(e.left), spanner_vars(e.right)
        if left != right:
            raise ValueError(
                f"{type(e).__name__} operands must have equal variables, got {sorted(left)} and {sorted(right)}"
            )
        return left
    if isinstance(e, Join):
        return spanner_vars(e.left) | spanner_vars(e.right)
    if isinstance(e, Project):
        inner = spanner_vars(e.sub)
        if not set(e.keep) <= inner:
            raise ValueError(f"projection variables {e.keep} not all bound")
        return set(e.keep)
    if isinstance(e, EqSelect):
        inner = spanner_vars(e.sub)
        if e.x not in inner or e.y not in inner:
            raise ValueError(f"equality selection on unbound variable")
        return inner
    raise TypeError(f"not a spanner expression: {e!r}")


def compile_algebra(e):
    """Realizing formula for an algebra expression (Diff introduces negation)."""
    spanner_vars(e)  # validate the whole tree up front
    if isinstance(e, Rgx):
        return compile_regex_formula(e.formula)
    if isinstance(e, Union):
        return Or(compile_algebra(e.left), compile_algebra(e.right))
    if isinstance(e, Join):
        return And(compile_algebra(e.left), compile_algebra(e.right))
    if isinstance(e, Diff):
        # the left conjunct constrains every variable pair to a valid span
        # encoding, so the negation needs no extra guards
        return And(compile_algebra(e.left), Not(compile_algebra(e.right)))
    if isinstance(e, Project):
        out = compile_algebra(e.sub)
        dropped = sorted(spanner_vars(e.sub) - set(e.keep))
        for x in reversed(dropped):
            xp, xc = span_pair(x)
            out = Exists(xp, Exists(xc, out))
        return out
    if isinstance(e, EqSelect):
        _, xc = span_pair(e.x)
        _, yc = span_pair(e.y)
        return And(compile_algebra(e.sub), Eq(xc, (VarItem(yc),)))
    raise TypeError(f"not a spanner expression: {e!r}")


def eval_spanner(
    e,
    w: Word,
    config: EvalConfig | None = None,
    stats: EngineStats | None = None,
) -> set:
    """Span tuples of the expression on w, as sorted ((var, (i, j)), ...) tuples."""
    variables = sorted(spanner_vars(e))
    phi = compile_algebra(e)
    rel = eval_bottomup(phi, w, config=config, stats=stats)
    out = set()
    for row in rel.as_dicts():
        tup = []
        for x in variables:
            xp, xc = span_pair(x)
            prefix, content = row[xp], row[xc]
            i = prefix.len + 1
            tup.append((x, (i, i + content.len)))
        out.add(tuple(tup))
    return out


# ---------------------------------------------------------------------------
# Algebra expression language
# ---------------------------------------------------------------------------

_OPERATORS = {"join", "union", "diff", "project", "eqsel"}


def parse_algebra(text: str):
    s = TokenStream(tokenize(text))
    expr = _parse_expr(s)
    tok = s.peek()
    if tok.kind != "eof":
        raise ParseError(f"unexpected trailing input {tok.value!r}", tok.line, tok.col)
    spanner_vars(expr)  # validate
    return expr


def _parse_expr(s: TokenStream):
    tok = s.peek()
    if tok.kind == "regex":
        s.next()
        formula = parse_regex_formula(tok.value)
        if not check_functional(formula):
            raise ParseError("regex formula is not functional", tok.line, tok.col)
        return Rgx(formula)
    if tok.kind == "punct" and tok.value == "(":
        s.next()
        inner = _parse_expr(s)
        s.expect("punct", ")")
        return inner
    if tok.kind != "ident":
        raise ParseError(f"expected a spanner expression, got {tok.value!r}", tok.line, tok.col)
    op = s.next().value
    if op == "join":
        return Join(_parse_expr(s), _parse_expr(s))
    if op == "union":
        return Union(_parse_expr(s), _parse_expr(s))
    if op == "diff":
        return Diff(_parse_expr(s), _parse_expr(s))
    if op == "project":
        names = [_parse_name(s)]
        while s.at_punct(","):
            s.next()
            names.append(_parse_name(s))
        return Project(tuple(names), _parse_expr(s))
    if op == "eqsel":
        return EqSelect(_parse_name(s), _parse_name(s), _parse_expr(s))
    raise ParseError(f"unknown spanner operator {op!r}", tok.line, tok.col)


def _parse_name(s: TokenStream) -> str:
    tok = s.expect("ident")
    if tok.value in _OPERATORS:
        raise ParseError(f"{tok.value!r} is a reserved operator name", tok.line, tok.col)
    return tok.value
