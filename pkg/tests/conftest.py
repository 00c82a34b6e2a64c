"""Regression corpus and shared fixtures.

The corpus collects the formulas used throughout the suite: every worked
example from the source material plus hand-written formulas covering each
connective, both closure operators, both fixed points, and regular
constraints.  Formula texts use the surface syntax of fclogic.syntax.
"""

import pytest

from fclogic.syntax import (
    And,
    Eq,
    Exists,
    Not,
    Or,
    TermItem,
    VarItem,
    parse,
    print_formula,
)

# Equal-length relation body: R grows one letter per side and per stage.
EQUAL_LENGTH_BODY = (
    '(p = "" & q = "") | exists p2, q2: ('
    '(p = "a" p2 & q = "a" q2) | (p = "a" p2 & q = "b" q2) | '
    '(p = "b" p2 & q = "a" q2) | (p = "b" p2 & q = "b" q2)) & R(p2, q2)'
)

EQUAL_LENGTH_SENTENCE = (
    "exists x, y: (u = x y & x in /a*/ & y in /b*/ & "
    f"lfp[p, q, R: {EQUAL_LENGTH_BODY}](x, y))"
)

PALINDROME = (
    'exists x, y: (u = x & dtc[x; y: (x = "a" y "a" | x = "b" y "b")](x; y) '
    '& (y = "" | y = "a" | y = "b"))'
)

GRAPH_REACH = (
    'tc[x; y: exists z: (z = "$" x "#" y "$" '
    "& x in /(0|1)(0|1)*/ & y in /(0|1)(0|1)*/)](x; y)"
)

ANBNCN_PROGRAM = """
Ans() <- u = x y z, E(x, y, z).
E(x, y, z) <- x = "", y = "", z = "".
E(x, y, z) <- x = x2 "a", y = y2 "b", z = z2 "c", E(x2, y2, z2).
"""


def starfree_fc(tree):
    """Star-free expression -> FC sentence, one connective per construct.

    Trees: 'empty', a single letter, ('cat', l, r), ('alt', l, r), ('not', t).
    """

    def psi(node, x):
        if node == "empty":
            return Not(Eq(x, (VarItem(x),)))
        if isinstance(node, str):
            return Eq(x, (TermItem(node),))
        op = node[0]
        if op == "cat":
            x1, x2 = f"{x}1", f"{x}2"
            split = Eq(x, (VarItem(x1), VarItem(x2)))
            return Exists(x1, Exists(x2, And(split, And(psi(node[1], x1), psi(node[2], x2)))))
        if op == "alt":
            return Or(psi(node[1], x), psi(node[2], x))
        if op == "not":
            return Not(psi(node[1], x))
        raise ValueError(node)

    return Exists("x", And(Eq("u", (VarItem("x"),)), psi(tree, "x")))


def starfree_match(tree, text: str) -> bool:
    if tree == "empty":
        return False
    if isinstance(tree, str):
        return text == tree
    op = tree[0]
    if op == "cat":
        return any(
            starfree_match(tree[1], text[:i]) and starfree_match(tree[2], text[i:])
            for i in range(len(text) + 1)
        )
    if op == "alt":
        return starfree_match(tree[1], text) or starfree_match(tree[2], text)
    if op == "not":
        return not starfree_match(tree[1], text)
    raise ValueError(tree)


SIGMA_STAR = ("not", "empty")
STARFREE_NO_AB = ("not", ("cat", "a", "b"))
STARFREE_CONTAINS_AA = ("cat", SIGMA_STAR, ("cat", ("cat", "a", "a"), SIGMA_STAR))

# name -> surface text; names mark the construct or the worked example covered
CORPUS = [
    ("between_markers", 'exists x: x = "papaya" y "banana"'),
    ("contains_marker", 'exists x: (x = "papaya" | x = "banana")'),
    ("occurs_once", 'exists p, s: (u = p x s & !exists p2, s2: (u = p2 x s2 & !p2 = p))'),
    ("occurs_twice", 'exists p1, p2, s1, s2: (u = p1 x s1 & u = p2 x s2 & !p1 = p2)'),
    ("prefix", "exists z: y = x z"),
    ("strict_prefix", "(exists z: y = x z) & !x = y"),
    ("suffix", "exists p: y = p x"),
    ("factor_of", "exists p, s: y = p x s"),
    ("starfree_no_ab", print_formula(starfree_fc(STARFREE_NO_AB))),
    ("starfree_contains_aa", print_formula(starfree_fc(STARFREE_CONTAINS_AA))),
    ("fourth_power", "exists x: y = x x x x"),
    ("fourth_power_chain", "exists x1, x2: (y = x1 x1 & x1 = x2 x2)"),
    (
        "eighth_power_reused_vars",
        "exists x1: (y = x1 x1 & exists x2: (x1 = x2 x2 & exists x1: x2 = x1 x1))",
    ),
    ("contains_aba", 'exists x, y: u = x "aba" y'),
    ("contains_ab_star_a", "exists x, y, z: (u = x z y & z in /ab*a/)"),
    ("equal_length_pairs", f"lfp[p, q, R: {EQUAL_LENGTH_BODY}](x, y)"),
    ("anbn_sentence", EQUAL_LENGTH_SENTENCE),
    ("palindrome", PALINDROME),
    ("graph_reachability", GRAPH_REACH),
    ("banana_spanner", 'exists y: (u = xP xC y & (xC = "banana" | xC = "papaya"))'),
    ("square_starting_a", '(u = x x) & exists y: (x = "a" y)'),
    ("square_root", "u = x x"),
    ("empty_universe", 'u = ""'),
    ("unsatisfiable", 'u = "a" & u = "aa"'),
    ("whole_word", "exists x: u = x"),
    ("commuting_pair", "z = x y & z = y x"),
    ("squarefree", 'forall x: (x = "" | !(exists z: (x = z z & !z = "")))'),
    (
        "occurs_at_most_once",
        "forall p, q: (!(exists s: u = p x s) | !(exists t: u = q x t) | p = q)",
    ),
    ("peel_one_a", 'dtc[x; y: x = "a" y](x; y)'),
    (
        "lockstep_pairs",
        '(u = x y) & tc[p, q; r, s: (p = "a" r & q = "b" s)](x, y; x2, y2)',
    ),
    ("constraint_only", "x in /(ab)*/"),
    ("constraint_star", "exists x: (u = x & x in /a*ba*/)"),
    (
        "a_suffix_chain",
        'pfp[p, R: (p = "a" | exists q: (p = q "a" & R(q)))](x)',
    ),
    ("shadowed_variable", 'exists x: (u = x x & exists x: x = "a")'),
    ("sixteenth_power", "exists x: y = x x x x x x x x x x x x x x x x"),
    ("interleaved_squares", "exists x1, x2, x3, x4: u = x1 x1 x2 x2 x3 x3 x4 x4"),
]


@pytest.fixture(scope="session")
def corpus():
    return [(name, parse(text)) for name, text in CORPUS]
