import pytest
from hypothesis import given
from hypothesis import strategies as st

from fclogic.syntax import (
    And,
    Eq,
    Exists,
    Forall,
    Fp,
    Not,
    Or,
    ParseError,
    RelAtom,
    Tc,
    TermItem,
    VarItem,
    classify,
    free_vars,
    make_pattern,
    parse,
    print_formula,
    rel_arities,
    subformulas,
    validate,
    width,
)
from conftest import CORPUS

variables = st.sampled_from(["x", "y", "z", "x1", "longName_2"])
terminals = st.text(alphabet="ab", min_size=1, max_size=3).map(TermItem)
patterns = st.lists(
    st.one_of(variables.map(VarItem), terminals), max_size=4
).map(make_pattern)
equations = st.builds(Eq, variables, patterns)


def wrap(children):
    return st.one_of(
        st.builds(And, children, children),
        st.builds(Or, children, children),
        st.builds(Not, children),
        st.builds(Exists, variables, children),
        st.builds(Forall, variables, children),
    )


formulas = st.recursive(equations, wrap, max_leaves=8)


@given(formulas)
def test_print_parse_round_trip(phi):
    assert parse(print_formula(phi)) == phi


def test_round_trip_on_corpus():
    for name, text in CORPUS:
        phi = parse(text)
        assert parse(print_formula(phi)) == phi, name


def test_pattern_normalization():
    merged = make_pattern([TermItem("a"), TermItem(""), TermItem("b"), VarItem("x")])
    assert merged == (TermItem("ab"), VarItem("x"))


def test_string_escapes_round_trip():
    phi = parse(r'x = "a\"b\\c"')
    assert phi.rhs == (TermItem('a"b\\c'),)
    assert parse(print_formula(phi)) == phi


def test_free_vars_and_width():
    phi = parse("exists z: y = x z")
    assert free_vars(phi) == {"x", "y"}
    assert width(phi) == 3  # subformula y = x z has free {x, y, z}
    assert width(parse('u = ""')) == 0  # u does not count
    assert free_vars(parse("exists x: u = x")) == set()
    # equations are leaves: width is reached inside the quantifier block
    assert width(parse("exists x1, x2, x3: u = x1 x2 x3")) == 3


def test_width_at_least_free_count():
    for name, text in CORPUS:
        phi = parse(text)
        assert width(phi) >= len(free_vars(phi)), name


def test_classify_fragments():
    assert classify(parse("exists x: u = x x")).ep
    assert not classify(parse("!x = y")).ep
    assert classify(parse("!x = y")).existential
    assert not classify(parse("forall x: x = x")).existential
    tag = classify(parse("x in /a*/"))
    assert tag.uses_constraints and tag.ep
    assert classify(parse('tc[x; y: x = "a" y](x; y)')).uses_closures
    assert classify(parse("lfp[x, R: x = x](y)")).uses_fixpoints


def test_subformulas_and_arities():
    phi = parse("lfp[p, q, R: R(p, q)](x, y)")
    assert any(isinstance(s, RelAtom) for s in subformulas(phi))
    assert rel_arities(parse("R(x, y) & S(z)")) == {"R": 2, "S": 1}
    with pytest.raises(ParseError):
        rel_arities(parse("R(x) & R(x, y)"))


@pytest.mark.parametrize(
    "bad",
    [
        "",
        "x =",
        'x "a" = y',  # left side must be a single variable
        "exists: x = y",
        "x = y | ",
        "(x = y",
        'x = "a',  # unterminated string
        "x in /a",  # unterminated regex
        "tc[x; y: x = y](x)",  # missing ';' between argument tuples
        "tc[x, z; y: x = y](x; y)",  # tuple arity mismatch
        "lfp[R: x = y](x)",  # no bound variables
        "lfp[x, R: x = y](y, z)",  # argument arity mismatch
    ],
)
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        parse(bad)


@pytest.mark.parametrize(
    "bad",
    [
        "exists u: u = u",
        "forall u: u = u",
        "tc[u; y: u = y](u; y)",
        "lfp[u, R: u = u](x)",
        "lfp[x, R: !R(x)](y)",  # lfp body must be existential-positive
    ],
)
def test_validate_errors(bad):
    with pytest.raises(ParseError):
        validate(parse(bad))


def test_pfp_body_may_use_negation():
    validate(parse("pfp[x, R: !R(x)](y)"))


def test_operator_precedence():
    phi = parse("x = y | x = z & !y = z")
    assert isinstance(phi, Or) and isinstance(phi.right, And)
    assert isinstance(phi.right.right, Not)
    quantified = parse("exists x: x = y & y = z")
    assert isinstance(quantified, Exists)  # quantifier scope extends right
