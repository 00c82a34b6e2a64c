import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fclogic.core import Word
from fclogic.evaluator import eval_bottomup
from fclogic.regexlang import RAlt, RCat, REmpty, REps, RLetter, RSigma, RStar
from fclogic.spanner import (
    Bind,
    Diff,
    EqSelect,
    Join,
    Project,
    Rgx,
    Union,
    bound_vars,
    check_functional,
    compile_algebra,
    compile_regex_formula,
    eval_spanner,
    parse_algebra,
    parse_regex_formula,
    print_regex_formula,
    span_pair,
    spanner_vars,
)
from fclogic.syntax import ParseError, classify, free_vars
from helpers import oracle_regex_spans, oracle_spanner, words_upto

rf_leaves = st.one_of(
    st.builds(REmpty),
    st.builds(REps),
    st.builds(RSigma),
    st.sampled_from("ab").map(RLetter),
)
rf_trees = st.recursive(
    rf_leaves,
    lambda sub: st.one_of(
        st.builds(RCat, sub, sub),
        st.builds(RAlt, sub, sub),
        st.builds(RStar, sub),
        st.builds(Bind, st.sampled_from(["x", "y", "z"]), sub),
    ),
    max_leaves=6,
)


@given(rf_trees)
def test_print_parse_round_trip(tree):
    assert parse_regex_formula(print_regex_formula(tree)) == tree


def test_adjacent_letter_and_binding_round_trip():
    tree = RCat(RLetter("a"), Bind("y", REps()))
    assert parse_regex_formula(print_regex_formula(tree)) == tree
    # without parentheses the letter would merge into the variable name
    assert parse_regex_formula("ay{()}") == Bind("ay", REps())


@pytest.mark.parametrize(
    "bad", ["x{a", "(a", "u{a}", "a}", "x{a}}", "a|*", "a/", "{a}"]
)
def test_parse_regex_formula_errors(bad):
    with pytest.raises(ParseError):
        parse_regex_formula(bad)


def test_bound_vars_and_functionality():
    assert bound_vars(parse_regex_formula("x{a(y{b}|y{c})}")) == {"x", "y"}
    assert check_functional(parse_regex_formula("x{a}y{b}"))
    assert check_functional(parse_regex_formula("x{a}|x{b}"))
    assert not check_functional(parse_regex_formula("x{a}*"))  # star may repeat x
    assert not check_functional(parse_regex_formula("x{a}|b"))  # branches differ
    assert not check_functional(parse_regex_formula("x{a}x{b}"))  # x bound twice
    assert not check_functional(parse_regex_formula("x{x{a}}"))


def test_compile_rejects_non_functional():
    with pytest.raises(ValueError):
        compile_regex_formula(parse_regex_formula("x{a}*"))


def test_compiled_formula_shape():
    phi = compile_regex_formula(parse_regex_formula("S*(x{aS*})S*"))
    assert free_vars(phi) == set(span_pair("x"))
    tag = classify(phi)
    assert tag.ep and tag.uses_constraints


def test_single_keyword_extraction():
    e = Rgx(parse_regex_formula("S*(x{banana})S*"))
    assert eval_spanner(e, Word("banana")) == {(("x", (1, 7)),)}
    assert eval_spanner(e, Word("abanana")) == {(("x", (2, 8)),)}
    assert eval_spanner(e, Word("banan")) == set()


def test_two_keywords_around_separator():
    e = Rgx(parse_regex_formula("(x{banana})#(y{banana})"))
    assert eval_spanner(e, Word("banana#banana")) == {
        (("x", (1, 7)), ("y", (8, 14)))
    }


def test_empty_capture_spans_every_gap():
    e = Rgx(parse_regex_formula("S*(x{()})S*"))
    assert eval_spanner(e, Word("a")) == {(("x", (1, 1)),), (("x", (2, 2)),)}


ALGEBRA_SOURCES = [
    "/S*(x{a})S*/",
    "/x{S*}/",
    "/(x{a*})(y{b*})S*/",
    "join /(x{a})S*/ /S*(y{b})/",
    "union /(x{ab})S*/ /S*(x{ba})/",
    "diff /(x{S*})S*/ /S*(x{a})S*/",
    "project x /(x{a*})(y{b*})S*/",
    "eqsel x y /(x{S*})#(y{S*})/",
    "join /(x{a*})S*/ /(x{a*})S*/",
    "project y eqsel x y /(x{S*})#(y{S*})S*/",
]


@pytest.mark.parametrize("src", ALGEBRA_SOURCES)
def test_algebra_against_capture_matcher(src):
    e = parse_algebra(src)
    rng = random.Random(11)
    texts = list(words_upto("ab#", 3)) + [
        "".join(rng.choice("ab#") for _ in range(rng.randrange(4, 6)))
        for _ in range(40)
    ]
    for text in texts:
        assert eval_spanner(e, Word(text)) == oracle_spanner(e, text), (src, text)


def test_self_difference_is_empty():
    e = parse_algebra("diff /x{S*}S*/ /x{S*}S*/")
    for text in ("", "ab", "a#b"):
        assert eval_spanner(e, Word(text)) == set()


def test_projection_to_boolean():
    inner = parse_algebra("/S*(x{ab})S*/")
    e = Project((), inner)
    assert eval_spanner(e, Word("aab")) == {()}
    assert eval_spanner(e, Word("ba")) == set()


@pytest.mark.parametrize(
    "bad",
    [
        "union /x{a}/ /y{a}/",  # unequal variable sets
        "diff /x{a}/ /x{a}y{b}/",
        "project z /x{a}/",  # z is not bound
        "eqsel x z /x{a}y{b}/",
        "join /x{a}/",  # missing operand
        "/x{a}/ /y{b}/",  # trailing input
        "project join /x{a}/",  # reserved word as projection name
        "/x{a}*/",  # non-functional regex formula
    ],
)
def test_parse_algebra_errors(bad):
    # syntax problems raise ParseError, validation problems ValueError
    with pytest.raises((ParseError, ValueError)):
        parse_algebra(bad)


def test_spanner_vars_validation_direct():
    with pytest.raises(ValueError):
        spanner_vars(Union(Rgx(Bind("x", REps())), Rgx(Bind("y", REps()))))
    with pytest.raises(ValueError):
        spanner_vars(Project(("q",), Rgx(Bind("x", REps()))))
    assert spanner_vars(Join(Rgx(Bind("x", REps())), Rgx(Bind("y", REps())))) == {
        "x",
        "y",
    }


def test_compile_algebra_fragments():
    ep = compile_algebra(parse_algebra("join /x{a}S*/ /S*y{b}/"))
    assert classify(ep).ep
    neg = compile_algebra(parse_algebra("diff /x{S*}S*/ /S*x{a}S*/"))
    assert classify(neg).uses_negation and classify(neg).existential


def test_oracle_matcher_sanity():
    # full-word matches only, spans are 1-based [i, j)
    spans = oracle_regex_spans(parse_regex_formula("S*(x{ab})S*"), "abab")
    assert spans == {(("x", (1, 3)),), (("x", (3, 5)),)}
