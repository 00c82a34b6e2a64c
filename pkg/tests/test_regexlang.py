import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fclogic.core import Word
from fclogic.evaluator import eval_bottomup
from fclogic.regexlang import (
    RAlt,
    RCat,
    REmpty,
    REps,
    RLetter,
    RSigma,
    RStar,
    as_word,
    expand_regex_equation,
    is_simple,
    match_full,
    parse_regex,
    print_regex,
    root,
    simple_to_fc,
)
from fclogic.syntax import ParseError, TermItem, VarItem, classify, free_vars, width
from helpers import brz_match, factors, rows_as_strings, words_upto

leaves = st.one_of(
    st.builds(REmpty),
    st.builds(REps),
    st.builds(RSigma),
    st.sampled_from("ab").map(RLetter),
)
regexes = st.recursive(
    leaves,
    lambda sub: st.one_of(
        st.builds(RCat, sub, sub), st.builds(RAlt, sub, sub), st.builds(RStar, sub)
    ),
    max_leaves=6,
)


@given(regexes)
def test_print_parse_round_trip(regex):
    assert parse_regex(print_regex(regex)) == regex


@pytest.mark.parametrize("bad", ["(", "*a", "[a]", "a/", "a]", "a\\"])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        parse_regex(bad)


def test_trailing_alternative_is_epsilon():
    assert parse_regex("a|") == RAlt(RLetter("a"), REps())


@settings(deadline=None, max_examples=150)
@given(regexes, st.text(alphabet="ab", max_size=6))
def test_matcher_agrees_with_derivative_oracle(regex, text):
    assert match_full(regex, text) == brz_match(regex, text)


def test_matcher_fixed_cases():
    assert match_full(parse_regex("(ab)*"), "abab")
    assert not match_full(parse_regex("(ab)*"), "aba")
    assert match_full(parse_regex("S*baS*"), "ababa")
    assert not match_full(parse_regex("[]"), "")
    assert match_full(parse_regex("()"), "")


def test_as_word_and_is_simple():
    assert as_word(parse_regex("abba")) == "abba"
    assert as_word(parse_regex("a|b")) is None
    assert is_simple(parse_regex("(ab)*a*S*"))
    assert is_simple(parse_regex("(ab|ba)c"))  # star-free parts are always simple
    assert not is_simple(parse_regex("(a|b)*"))
    assert not is_simple(parse_regex("(ab*a)*"))


def test_root_against_brute_force():
    rng = random.Random(5)
    with pytest.raises(ValueError):
        root("")
    for _ in range(200):
        s = "".join(rng.choice("ab") for _ in range(rng.randrange(1, 13)))
        r, p = root(s)
        assert r * p == s
        # r is primitive: no shorter period divides s
        assert all(
            not (len(s) % ln == 0 and s[:ln] * (len(s) // ln) == s)
            for ln in range(1, len(r))
        )


SIMPLE = ["[]", "()", "a", "(ab)*", "a*", "S*", "(abc)*S*", "b(ab)*", "a*|(ba)*b"]


@pytest.mark.parametrize("src", SIMPLE)
def test_simple_to_fc_defines_language_within_factors(src):
    regex = parse_regex(src)
    phi = simple_to_fc(regex, "x", "abc")
    assert classify(phi).ep and not classify(phi).uses_constraints
    assert free_vars(phi) == {"x"}
    for text in words_upto("ab", 5):
        w = Word(text)
        got = {row[0] for row in rows_as_strings(w, eval_bottomup(phi, w))}
        assert got == {v for v in factors(text) if brz_match(regex, v)}, text


def test_expand_regex_equation_matches_split_oracle():
    # x = y (ab)* z : every split of x into y, (ab)^k, z
    phi = expand_regex_equation(
        "x", [VarItem("y"), parse_regex("(ab)*"), VarItem("z")], alphabet="ab"
    )
    assert free_vars(phi) == {"x", "y", "z"}
    assert width(phi) <= 3 + 3
    assert classify(phi).ep
    for text in words_upto("ab", 4):
        w = Word(text)
        got = rows_as_strings(w, eval_bottomup(phi, w))
        expected = set()
        for x in factors(text):
            for i in range(len(x) + 1):
                for j in range(i, len(x) + 1):
                    if brz_match(parse_regex("(ab)*"), x[i:j]):
                        expected.add((x, x[:i], x[j:]))
        assert got == expected, text


def test_expand_regex_equation_empty_and_single():
    from fclogic.syntax import Eq

    assert expand_regex_equation("x", []) == Eq("x", ())
    phi = expand_regex_equation("x", [parse_regex("a*")])
    got = rows_as_strings(Word("aab"), eval_bottomup(phi, Word("aab")))
    assert got == {("",), ("a",), ("aa",)}
