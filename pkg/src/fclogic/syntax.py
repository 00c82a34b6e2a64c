"""Formula AST, parser, printer, and static analyses.

Surface syntax: ``=`` for the equation symbol, double-quoted terminal
words, ``&``/``|``/``!`` connectives, ``exists x, y:`` / ``forall x:``
quantifiers (scoping as far right as possible), ``x in /regex/``
constraints, ``tc[x; y : phi](s; t)`` / ``dtc[...]`` closures, and
``lfp[x, R : phi](y)`` / ``pfp[...]`` fixed points.  ``u`` is the
reserved universe variable and can never be quantified.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

UNIVERSE = "u"

KEYWORDS = {"exists", "forall", "in", "tc", "dtc", "lfp", "pfp"}


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TermItem:
    word: str


@dataclass(frozen=True)
class VarItem:
    name: str


PatternItem = Union[TermItem, VarItem]
Pattern = tuple  # tuple[PatternItem, ...]


def make_pattern(items) -> Pattern:
    """Normalize a pattern: merge adjacent terminals, drop empty terminals."""
    out: list[PatternItem] = []
    for item in items:
        if isinstance(item, TermItem):
            if not item.word:
                continue
            if out and isinstance(out[-1], TermItem):
                out[-1] = TermItem(out[-1].word + item.word)
                continue
        out.append(item)
    return tuple(out)


def pattern_vars(pattern: Pattern) -> set[str]:
    return {item.name for item in pattern if isinstance(item, VarItem)}


@dataclass(frozen=True)
class Eq:
    """Word equation lhs = rhs with a single-variable left side."""

    lhs: str
    rhs: Pattern


@dataclass(frozen=True)
class Constraint:
    """Regular constraint: the value of var belongs to L(regex)."""

    var: str
    regex: object  # fclogic.regexlang.Regex


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Not:
    sub: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    sub: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    sub: "Formula"


@dataclass(frozen=True)
class RelAtom:
    name: str
    args: tuple


@dataclass(frozen=True)
class Tc:
    """(Deterministic) transitive closure of the relation {(xs, ys) | body}."""

    xs: tuple
    ys: tuple
    body: "Formula"
    ss: tuple
    ts: tuple
    deterministic: bool = False


@dataclass(frozen=True)
class Fp:
    """Least (or partial) fixed point of the stage operator of body over rel."""

    xs: tuple
    rel: str
    body: "Formula"
    ys: tuple
    partial: bool = False


Formula = Union[Eq, Constraint, And, Or, Not, Exists, Forall, RelAtom, Tc, Fp]


@dataclass(frozen=True)
class FragmentTag:
    uses_negation: bool = False
    uses_universal: bool = False
    uses_constraints: bool = False
    uses_closures: bool = False
    uses_fixpoints: bool = False

    @property
    def ep(self) -> bool:
        return not self.uses_negation and not self.uses_universal

    @property
    def existential(self) -> bool:
        return not self.uses_universal


# ---------------------------------------------------------------------------
# Static analyses
# ---------------------------------------------------------------------------


def free_vars(phi: Formula) -> set[str]:
    """Free variables of phi; the universe variable is never considered free."""
    if isinstance(phi, Eq):
        return ({phi.lhs} | pattern_vars(phi.rhs)) - {UNIVERSE}
    if isinstance(phi, Constraint):
        return {phi.var} - {UNIVERSE}
    if isinstance(phi, (And, Or)):
        return free_vars(phi.left) | free_vars(phi.right)
    if isinstance(phi, Not):
        return free_vars(phi.sub)
    if isinstance(phi, (Exists, Forall)):
        return free_vars(phi.sub) - {phi.var}
    if isinstance(phi, RelAtom):
        return set(phi.args) - {UNIVERSE}
    if isinstance(phi, Tc):
        return (free_vars(phi.body) - set(phi.xs) - set(phi.ys)) | (
            (set(phi.ss) | set(phi.ts)) - {UNIVERSE}
        )
    if isinstance(phi, Fp):
        return (free_vars(phi.body) - set(phi.xs)) | (set(phi.ys) - {UNIVERSE})
    raise TypeError(f"not a formula node: {phi!r}")


def width(phi: Formula) -> int:
    """Maximum number of free variables over all subformulas (u excluded).

    Equations, constraints, relation atoms, and closure/fixpoint atoms count
    as leaves contributing their free-variable count directly.
    """
    k = len(free_vars(phi))
    if isinstance(phi, (And, Or)):
        return max(k, width(phi.left), width(phi.right))
    if isinstance(phi, Not):
        return max(k, width(phi.sub))
    if isinstance(phi, (Exists, Forall)):
        return max(k, width(phi.sub))
    return k


def classify(phi: Formula) -> FragmentTag:
    neg = uni = con = clo = fix = False

    def walk(f):
        nonlocal neg, uni, con, clo, fix
        if isinstance(f, Not):
            neg = True
            walk(f.sub)
        elif isinstance(f, Forall):
            uni = True
            walk(f.sub)
        elif isinstance(f, Exists):
            walk(f.sub)
        elif isinstance(f, (And, Or)):
            walk(f.left)
            walk(f.right)
        elif isinstance(f, Constraint):
            con = True
        elif isinstance(f, Tc):
            clo = True
            walk(f.body)
        elif isinstance(f, Fp):
            fix = True
            walk(f.body)

    walk(phi)
    return FragmentTag(neg, uni, con, clo, fix)


def subformulas(phi: Formula):
    yield phi
    if isinstance(phi, (And, Or)):
        yield from subformulas(phi.left)
        yield from subformulas(phi.right)
    elif isinstance(phi, (Not, Exists, Forall)):
        sub = phi.sub
        yield from subformulas(sub)
    elif isinstance(phi, (Tc, Fp)):
        yield from subformulas(phi.body)


def rel_arities(phi: Formula, env: dict[str, int] | None = None) -> dict[str, int]:
    """Arity of every relation symbol occurring free in phi (Fp binds its own)."""
    out: dict[str, int] = {}
    bound: set[str] = set()

    def walk(f, bound):
        if isinstance(f, RelAtom):
            if f.name not in bound:
                prev = out.get(f.name)
                if prev is not None and prev != len(f.args):
                    raise ParseError(f"relation {f.name} used with arities {prev} and {len(f.args)}")
                out[f.name] = len(f.args)
        elif isinstance(f, (And, Or)):
            walk(f.left, bound)
            walk(f.right, bound)
        elif isinstance(f, (Not, Exists, Forall)):
            walk(f.sub, bound)
        elif isinstance(f, Tc):
            walk(f.body, bound)
        elif isinstance(f, Fp):
            walk(f.body, bound | {f.rel})

    walk(phi, bound)
    return out


# ---------------------------------------------------------------------------
# Tokenizer (shared with the FO bridge surface syntax)
# ---------------------------------------------------------------------------


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{message} (line {line}, column {col})"
        super().__init__(message)


@dataclass
class Token:
    kind: str  # 'ident', 'string', 'regex', 'punct', 'eof'
    value: str
    line: int
    col: int


PUNCT = ("<-", "(", ")", "[", "]", ":", ";", ",", "=", "&", "|", "!", "<", ".")


def tokenize(text: str) -> list[Token]:
    tokens = []
    i, line, col = 0, 1, 1

    def error(msg):
        raise ParseError(msg, line, col)

    while i < len(text):
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("ident", text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if ch == '"':
            j = i + 1
            out = []
            while j < len(text) and text[j] != '"':
                if text[j] == "\\":
                    j += 1
                    if j >= len(text):
                        error("unterminated string literal")
                out.append(text[j])
                j += 1
            if j >= len(text):
                error("unterminated string literal")
            tokens.append(Token("string", "".join(out), start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        if ch == "/":
            j = i + 1
            out = []
            while j < len(text) and text[j] != "/":
                if text[j] == "\\":
                    out.append(text[j])
                    j += 1
                    if j >= len(text):
                        error("unterminated regex literal")
                out.append(text[j])
                j += 1
            if j >= len(text):
                error("unterminated regex literal")
            tokens.append(Token("regex", "".join(out), start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        for p in PUNCT:
            if text.startswith(p, i):
                tokens.append(Token("punct", p, start_line, start_col))
                i += len(p)
                col += len(p)
                break
        else:
            error(f"unexpected character {ch!r}")
    tokens.append(Token("eof", "", line, col))
    return tokens


class TokenStream:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str, value: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (value is not None and tok.value != value):
            want = value if value is not None else kind
            raise ParseError(f"expected {want!r}, found {tok.value or tok.kind!r}", tok.line, tok.col)
        return self.next()

    def at_punct(self, value: str) -> bool:
        tok = self.peek()
        return tok.kind == "punct" and tok.value == value

    def at_keyword(self, value: str) -> bool:
        tok = self.peek()
        return tok.kind == "ident" and tok.value == value

    def error(self, msg: str):
        tok = self.peek()
        raise ParseError(msg, tok.line, tok.col)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def parse(text: str) -> Formula:
    stream = TokenStream(tokenize(text))
    phi = _parse_formula(stream)
    tok = stream.peek()
    if tok.kind != "eof":
        raise ParseError(f"unexpected trailing input {tok.value!r}", tok.line, tok.col)
    validate(phi)
    return phi


def _parse_formula(s: TokenStream) -> Formula:
    return _parse_or(s)


def _parse_or(s: TokenStream) -> Formula:
    left = _parse_and(s)
    while s.at_punct("|"):
        s.next()
        left = Or(left, _parse_and(s))
    return left


def _parse_and(s: TokenStream) -> Formula:
    left = _parse_unary(s)
    while s.at_punct("&"):
        s.next()
        left = And(left, _parse_unary(s))
    return left


def _parse_unary(s: TokenStream) -> Formula:
    if s.at_punct("!"):
        s.next()
        return Not(_parse_unary(s))
    if s.at_keyword("exists") or s.at_keyword("forall"):
        kind = s.next().value
        names = _parse_varlist(s)
        s.expect("punct", ":")
        body = _parse_formula(s)  # quantifier scopes maximally to the right
        node = Exists if kind == "exists" else Forall
        for name in reversed(names):
            body = node(name, body)
        return body
    return _parse_atom(s)


def _parse_varlist(s: TokenStream) -> list[str]:
    names = [_parse_var(s)]
    while s.at_punct(","):
        s.next()
        names.append(_parse_var(s))
    return names


def _parse_var(s: TokenStream) -> str:
    tok = s.expect("ident")
    if tok.value in KEYWORDS:
        raise ParseError(f"keyword {tok.value!r} cannot be a variable", tok.line, tok.col)
    return tok.value


def _parse_atom(s: TokenStream) -> Formula:
    if s.at_punct("("):
        s.next()
        phi = _parse_formula(s)
        s.expect("punct", ")")
        return phi
    if s.at_keyword("tc") or s.at_keyword("dtc"):
        return _parse_closure(s)
    if s.at_keyword("lfp") or s.at_keyword("pfp"):
        return _parse_fixpoint(s)
    tok = s.peek()
    if tok.kind == "string":
        raise ParseError("left side of an equation must be a single variable", tok.line, tok.col)
    name = _parse_var(s)
    if s.at_punct("("):
        s.next()
        args = []
        if not s.at_punct(")"):
            args = _parse_varlist(s)
        s.expect("punct", ")")
        return RelAtom(name, tuple(args))
    if s.at_keyword("in"):
        s.next()
        tok = s.expect("regex")
        from fclogic import regexlang

        return Constraint(name, regexlang.parse_regex(tok.value))
    if s.at_punct("="):
        s.next()
        return _parse_equation_rhs(s, name)
    s.error(f"expected '=', 'in', or '(' after {name!r}")


def _parse_equation_rhs(s: TokenStream, lhs: str) -> Formula:
    items: list = []
    regexes: list = []  # (index into items, Regex)
    while True:
        tok = s.peek()
        if tok.kind == "string":
            s.next()
            items.append(TermItem(tok.value))
        elif tok.kind == "regex":
            s.next()
            from fclogic import regexlang

            regexes.append(regexlang.parse_regex(tok.value))
            items.append(regexes[-1])
        elif tok.kind == "ident" and tok.value not in KEYWORDS:
            # An identifier followed by '=', 'in', or '(' starts the next
            # atom, not a pattern item.
            nxt = s.peek(1)
            if nxt.kind == "punct" and nxt.value in ("=", "(", "<-"):
                break
            if nxt.kind == "ident" and nxt.value == "in":
                break
            s.next()
            items.append(VarItem(tok.value))
        else:
            break
    if not items:
        s.error("empty equation right side (use \"\" for the empty word)")
    if regexes:
        from fclogic import regexlang

        return regexlang.expand_regex_equation(lhs, items)
    return Eq(lhs, make_pattern(items))


def _parse_closure(s: TokenStream) -> Formula:
    kind = s.next().value
    s.expect("punct", "[")
    xs = _parse_varlist(s)
    s.expect("punct", ";")
    ys = _parse_varlist(s)
    s.expect("punct", ":")
    body = _parse_formula(s)
    s.expect("punct", "]")
    s.expect("punct", "(")
    ss = _parse_varlist(s)
    s.expect("punct", ";")
    ts = _parse_varlist(s)
    s.expect("punct", ")")
    if len(xs) != len(ys):
        raise ParseError(f"{kind}: tuple arities differ ({len(xs)} vs {len(ys)})")
    if len(ss) != len(xs) or len(ts) != len(ys):
        raise ParseError(f"{kind}: argument arity does not match bound tuples")
    return Tc(tuple(xs), tuple(ys), body, tuple(ss), tuple(ts), deterministic=(kind == "dtc"))


def _parse_fixpoint(s: TokenStream) -> Formula:
    kind = s.next().value
    s.expect("punct", "[")
    names = _parse_varlist(s)
    if len(names) < 2:
        s.error(f"{kind} needs at least one bound variable and a relation symbol")
    xs, rel = names[:-1], names[-1]
    s.expect("punct", ":")
    body = _parse_formula(s)
    s.expect("punct", "]")
    s.expect("punct", "(")
    ys = _parse_varlist(s)
    s.expect("punct", ")")
    if len(ys) != len(xs):
        raise ParseError(f"{kind}: argument arity {len(ys)} does not match bound tuple {len(xs)}")
    return Fp(tuple(xs), rel, body, tuple(ys), partial=(kind == "pfp"))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate(phi: Formula) -> None:
    """Well-formedness beyond the grammar; each violation reported distinctly."""
    if isinstance(phi, (Exists, Forall)):
        if phi.var == UNIVERSE:
            raise ParseError("the universe variable 'u' cannot be quantified")
        validate(phi.sub)
    elif isinstance(phi, (And, Or)):
        validate(phi.left)
        validate(phi.right)
    elif isinstance(phi, Not):
        validate(phi.sub)
    elif isinstance(phi, Tc):
        if UNIVERSE in phi.xs or UNIVERSE in phi.ys:
            raise ParseError("the universe variable 'u' cannot be bound by tc/dtc")
        validate(phi.body)
    elif isinstance(phi, Fp):
        if UNIVERSE in phi.xs:
            raise ParseError("the universe variable 'u' cannot be bound by lfp/pfp")
        if not phi.partial:
            tag = classify(phi.body)
            if not tag.ep:
                raise ParseError("lfp body must be existential-positive (no '!' or 'forall')")
        validate(phi.body)
    rel_arities(phi)  # raises on inconsistent arities


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

_PREC_OR = 1
_PREC_AND = 2
_PREC_UNARY = 3
_PREC_ATOM = 4


def print_formula(phi: Formula) -> str:
    return _print(phi, 0)


def _escape(word: str) -> str:
    return word.replace("\\", "\\\\").replace('"', '\\"')


def _print_pattern(pattern: Pattern) -> str:
    if not pattern:
        return '""'
    parts = []
    for item in pattern:
        if isinstance(item, TermItem):
            parts.append(f'"{_escape(item.word)}"')
        else:
            parts.append(item.name)
    return " ".join(parts)


def _print(phi: Formula, context: int) -> str:
    if isinstance(phi, Eq):
        return f"{phi.lhs} = {_print_pattern(phi.rhs)}"
    if isinstance(phi, Constraint):
        from fclogic import regexlang

        return f"{phi.var} in /{regexlang.print_regex(phi.regex)}/"
    if isinstance(phi, RelAtom):
        return f"{phi.name}({', '.join(phi.args)})"
    if isinstance(phi, And):
        text = f"{_print(phi.left, _PREC_AND)} & {_print(phi.right, _PREC_UNARY)}"
        return f"({text})" if context > _PREC_AND else text
    if isinstance(phi, Or):
        text = f"{_print(phi.left, _PREC_OR)} | {_print(phi.right, _PREC_AND)}"
        return f"({text})" if context > _PREC_OR else text
    if isinstance(phi, Not):
        return f"!{_print(phi.sub, _PREC_ATOM)}"
    if isinstance(phi, (Exists, Forall)):
        kind = "exists" if isinstance(phi, Exists) else "forall"
        names = [phi.var]
        body = phi.sub
        while isinstance(body, type(phi)):
            names.append(body.var)
            body = body.sub
        text = f"{kind} {', '.join(names)}: {_print(body, 0)}"
        # a quantifier extends maximally to the right, so it must be wrapped
        # whenever anything follows it
        return f"({text})" if context > 0 else text
    if isinstance(phi, Tc):
        kind = "dtc" if phi.deterministic else "tc"
        return (
            f"{kind}[{', '.join(phi.xs)}; {', '.join(phi.ys)} : {_print(phi.body, 0)}]"
            f"({', '.join(phi.ss)}; {', '.join(phi.ts)})"
        )
    if isinstance(phi, Fp):
        kind = "pfp" if phi.partial else "lfp"
        return (
            f"{kind}[{', '.join(phi.xs)}, {phi.rel} : {_print(phi.body, 0)}]"
            f"({', '.join(phi.ys)})"
        )
    raise TypeError(f"not a formula node: {phi!r}")
