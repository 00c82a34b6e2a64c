"""Regular expressions for constraints, and their compilation into formulas.

Literal syntax (inside ``/.../`` in the formula grammar): letters stand for
themselves, ``S`` is the alphabet shorthand Sigma, ``()`` is the empty word,
``[]`` is the empty set, ``|`` is union, ``*`` is iteration, ``\\`` escapes.

A regex is *simple* if every star is applied to a terminal word or to Sigma;
simple regexes compile to existential-positive formulas (``simple_to_fc``).
Star of a word s uses the commutation fact that nonempty words commute iff
they share a primitive root.  Note: the source construction's unexplained
disjunct ``(x = w)`` is realized as ``(x = s)``.
"""

from __future__ import annotations

from dataclasses import dataclass

from fclogic.syntax import (
    And,
    Constraint,
    Eq,
    Exists,
    Or,
    ParseError,
    TermItem,
    VarItem,
    make_pattern,
)

# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class REmpty:
    pass


@dataclass(frozen=True)
class REps:
    pass


@dataclass(frozen=True)
class RLetter:
    letter: str


@dataclass(frozen=True)
class RSigma:
    pass


@dataclass(frozen=True)
class RCat:
    left: "Regex"
    right: "Regex"


@dataclass(frozen=True)
class RAlt:
    left: "Regex"
    right: "Regex"


@dataclass(frozen=True)
class RStar:
    sub: "Regex"


Regex = object

_META = set("()[]|*\\/S")


# ---------------------------------------------------------------------------
# Parsing and printing
# ---------------------------------------------------------------------------


def parse_regex(text: str) -> Regex:
    regex, pos = _parse_alt(text, 0)
    if pos != len(text):
        raise ParseError(f"unexpected {text[pos]!r} in regex at offset {pos}")
    return regex


def _parse_alt(text: str, pos: int):
    left, pos = _parse_cat(text, pos)
    while pos < len(text) and text[pos] == "|":
        right, pos = _parse_cat(text, pos + 1)
        left = RAlt(left, right)
    return left, pos


def _parse_cat(text: str, pos: int):
    items = []
    while pos < len(text) and text[pos] not in ")|":
        item, pos = _parse_atom(text, pos)
        while pos < len(text) and text[pos] == "*":
            item = RStar(item)
            pos += 1
        items.append(item)
    if not items:
        return REps(), pos
    out = items[0]
    for item in items[1:]:
        out = RCat(out, item)
    return out, pos


def _parse_atom(text: str, pos: int):
    ch = text[pos]
    if ch == "(":
        if pos + 1 < len(text) and text[pos + 1] == ")":
            return REps(), pos + 2
        regex, pos = _parse_alt(text, pos + 1)
        if pos >= len(text) or text[pos] != ")":
            raise ParseError("unbalanced '(' in regex")
        return regex, pos + 1
    if ch == "[":
        if pos + 1 < len(text) and text[pos + 1] == "]":
            return REmpty(), pos + 2
        raise ParseError("expected '[]' (the empty set) in regex")
    if ch == "\\":
        if pos + 1 >= len(text):
            raise ParseError("dangling escape in regex")
        return RLetter(text[pos + 1]), pos + 2
    if ch == "S":
        return RSigma(), pos + 1
    if ch == "*":
        raise ParseError("'*' needs an operand in regex")
    if ch in _META:
        raise ParseError(f"unescaped {ch!r} in regex at offset {pos}")
    return RLetter(ch), pos + 1


def print_regex(regex: Regex) -> str:
    return _print(regex, 0)


def _print(regex: Regex, context: int) -> str:
    # precedence: alt 1, cat 2, star 3
    if isinstance(regex, REmpty):
        return "[]"
    if isinstance(regex, REps):
        return "()"
    if isinstance(regex, RSigma):
        return "S"
    if isinstance(regex, RLetter):
        ch = regex.letter
        return f"\\{ch}" if ch in _META else ch
    if isinstance(regex, RCat):
        text = _print(regex.left, 2) + _print(regex.right, 3)
        return f"({text})" if context > 2 else text
    if isinstance(regex, RAlt):
        text = _print(regex.left, 1) + "|" + _print(regex.right, 2)
        return f"({text})" if context > 1 else text
    if isinstance(regex, RStar):
        return _print(regex.sub, 4) + "*"
    raise TypeError(f"not a regex node: {regex!r}")


# ---------------------------------------------------------------------------
# Thompson construction and full-match simulation
# ---------------------------------------------------------------------------

SIGMA = object()  # wildcard transition label


class CompiledMatcher:
    """Thompson-style NFA with anchored full-match semantics."""

    __slots__ = ("transitions", "epsilon", "start", "accept")

    def __init__(self, regex: Regex):
        self.transitions: list[list[tuple[object, int]]] = []
        self.epsilon: list[list[int]] = []
        self.start, self.accept = self._build(regex)

    def _new_state(self) -> int:
        self.transitions.append([])
        self.epsilon.append([])
        return len(self.transitions) - 1

    def _build(self, regex: Regex) -> tuple[int, int]:
        start, accept = self._new_state(), self._new_state()
        if isinstance(regex, REmpty):
            pass
        elif isinstance(regex, REps):
            self.epsilon[start].append(accept)
        elif isinstance(regex, RLetter):
            self.transitions[start].append((regex.letter, accept))
        elif isinstance(regex, RSigma):
            self.transitions[start].append((SIGMA, accept))
        elif isinstance(regex, RCat):
            s1, a1 = self._build(regex.left)
            s2, a2 = self._build(regex.right)
            self.epsilon[start].append(s1)
            self.epsilon[a1].append(s2)
            self.epsilon[a2].append(accept)
        elif isinstance(regex, RAlt):
            for sub in (regex.left, regex.right):
                s, a = self._build(sub)
                self.epsilon[start].append(s)
                self.epsilon[a].append(accept)
        elif isinstance(regex, RStar):
            s, a = self._build(regex.sub)
            self.epsilon[start] += [s, accept]
            self.epsilon[a] += [s, accept]
        else:
            raise TypeError(f"not a regex node: {regex!r}")
        return start, accept

    def _closure(self, states: set[int]) -> frozenset[int]:
        stack = list(states)
        seen = set(states)
        while stack:
            q = stack.pop()
            for r in self.epsilon[q]:
                if r not in seen:
                    seen.add(r)
                    stack.append(r)
        return frozenset(seen)

    def matches(self, v: str) -> bool:
        current = self._closure({self.start})
        for ch in v:
            nxt = {
                target
                for q in current
                for label, target in self.transitions[q]
                if label is SIGMA or label == ch
            }
            if not nxt:
                return False
            current = self._closure(nxt)
        return self.accept in current


def compile_matcher(regex: Regex) -> CompiledMatcher:
    return CompiledMatcher(regex)


def match_full(regex: Regex, v: str) -> bool:
    return CompiledMatcher(regex).matches(v)


# ---------------------------------------------------------------------------
# Simple regexes and their EP compilation
# ---------------------------------------------------------------------------


def as_word(regex: Regex) -> str | None:
    """The single word denoted by a star-free letters/eps/concat subtree, else None."""
    if isinstance(regex, REps):
        return ""
    if isinstance(regex, RLetter):
        return regex.letter
    if isinstance(regex, RCat):
        left, right = as_word(regex.left), as_word(regex.right)
        if left is not None and right is not None:
            return left + right
    return None


def is_simple(regex: Regex) -> bool:
    if isinstance(regex, RStar):
        if not (isinstance(regex.sub, RSigma) or as_word(regex.sub) is not None):
            return False
        return True
    if isinstance(regex, (RCat, RAlt)):
        return is_simple(regex.left) and is_simple(regex.right)
    return True


def root(s: str) -> tuple[str, int]:
    """Primitive root and maximal exponent: s = root^p."""
    if not s:
        raise ValueError("the empty word has no root")
    n = len(s)
    for ln in range(1, n + 1):
        if n % ln == 0 and s[:ln] * (n // ln) == s:
            return s[:ln], n // ln
    raise AssertionError("unreachable")


def _helpers(target: str) -> tuple[str, str]:
    return tuple(n for n in ("_r1", "_r2", "_r3") if n != target)[:2]


def simple_to_fc(regex: Regex, x: str, alphabet) -> "Formula":
    """EP formula satisfied iff the value of x is in L(regex) (and a factor of u)."""
    if not is_simple(regex):
        raise ValueError("regex is not simple: a star is applied to a non-word")
    return _simple(regex, x, tuple(alphabet))


def _simple(regex: Regex, t: str, alphabet: tuple) -> "Formula":
    if isinstance(regex, REmpty):
        return Eq(t, make_pattern([TermItem(alphabet[0]), VarItem(t)]))
    if isinstance(regex, REps):
        return Eq(t, ())
    if isinstance(regex, RLetter):
        return Eq(t, (TermItem(regex.letter),))
    if isinstance(regex, RSigma):
        out = None
        for a in alphabet:
            atom = Eq(t, (TermItem(a),))
            out = atom if out is None else Or(out, atom)
        return out
    if isinstance(regex, RAlt):
        return Or(_simple(regex.left, t, alphabet), _simple(regex.right, t, alphabet))
    if isinstance(regex, RCat):
        n1, n2 = _helpers(t)
        body = And(
            Eq(t, (VarItem(n1), VarItem(n2))),
            And(_simple(regex.left, n1, alphabet), _simple(regex.right, n2, alphabet)),
        )
        return Exists(n1, Exists(n2, body))
    if isinstance(regex, RStar):
        if isinstance(regex.sub, RSigma):
            return Eq(t, (VarItem(t),))
        s = as_word(regex.sub)
        if s == "":
            return Eq(t, ())
        rho, p = root(s)
        n1, n2 = _helpers(t)
        if p == 1:
            psi = Exists(
                n1,
                And(
                    Eq(t, (VarItem(n1), TermItem(s))),
                    Eq(t, (TermItem(s), VarItem(n1))),
                ),
            )
        else:
            psi = Exists(
                n1,
                Exists(
                    n2,
                    And(
                        Eq(t, tuple([VarItem(n1)] * p)),
                        And(
                            Eq(n2, (VarItem(n1), TermItem(rho))),
                            Eq(n2, (TermItem(rho), VarItem(n1))),
                        ),
                    ),
                ),
            )
        return Or(Eq(t, ()), Or(Eq(t, (TermItem(s),)), psi))
    raise TypeError(f"not a regex node: {regex!r}")


# ---------------------------------------------------------------------------
# Regex patterns and regex equations
# ---------------------------------------------------------------------------


def _fresh(avoid: set[str], base: str) -> str:
    name = base
    counter = 1
    while name in avoid:
        counter += 1
        name = f"{base}_{counter}"
    return name


def expand_regex_equation(lhs: str, items, alphabet=None) -> "Formula":
    """Width-bounded formula equivalent to the regex equation lhs = items.

    items: sequence of VarItem, TermItem, and Regex objects.  Builds the
    alternating two-chain-variable expansion so the width stays within
    |free| + 3.  When an alphabet is given and every regex is simple, the
    constraints are replaced by their EP compilations, yielding a pure
    (constraint-free) existential-positive formula.
    """
    user_vars = {lhs} | {item.name for item in items if isinstance(item, VarItem)}
    z_names = (_fresh(user_vars, "_z1"), _fresh(user_vars, "_z2"))
    y_name = _fresh(user_vars, "_y")

    def regex_conjunct(var: str, regex: Regex) -> "Formula":
        if alphabet is not None and is_simple(regex):
            return simple_to_fc(regex, var, alphabet)
        return Constraint(var, regex)

    def item_atom(var: str, item) -> "Formula":
        """Formula forcing the value of var to realize a single item."""
        if isinstance(item, VarItem):
            return Eq(var, (item,))
        if isinstance(item, TermItem):
            return Eq(var, make_pattern([item]))
        return regex_conjunct(var, item)

    n = len(items)
    if n == 0:
        return Eq(lhs, ())
    if n == 1:
        return item_atom(lhs, items[0])

    def build(i: int, prev: str) -> "Formula":
        """Chain step consuming items[i]; prev holds the remaining suffix."""
        if i == n - 1:
            return item_atom(prev, items[i])
        z = z_names[i % 2]
        item = items[i]
        if isinstance(item, (VarItem, TermItem)):
            head = Eq(prev, make_pattern([item, VarItem(z)]))
            return Exists(z, And(head, build(i + 1, z)))
        head = Eq(prev, (VarItem(y_name), VarItem(z)))
        return Exists(
            y_name,
            Exists(z, And(head, And(regex_conjunct(y_name, item), build(i + 1, z)))),
        )

    return build(0, lhs)
