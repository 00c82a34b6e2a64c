import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fclogic.core import (
    Alphabet,
    FactorRef,
    Relation,
    Substitution,
    Word,
    canonicalize,
    count_factors,
    enumerate_factors,
)
from helpers import factors, words_upto

short_words = st.text(alphabet="ab", max_size=12)


def all_refs(w: Word):
    return [
        FactorRef(i, ln) for i in range(1, w.n + 2) for ln in range(0, w.n + 2 - i)
    ]


def test_alphabet_rejects_bad_symbols():
    with pytest.raises(ValueError):
        Alphabet([])
    with pytest.raises(ValueError):
        Alphabet(["ab"])
    with pytest.raises(ValueError):
        Alphabet(['"'])
    assert list(Alphabet("aba")) == ["a", "b"]


@settings(deadline=None, max_examples=40)
@given(short_words)
def test_factor_eq_matches_string_equality(text):
    w = Word(text)
    oracle = w.oracle()
    refs = all_refs(w)
    for f1, f2 in itertools.product(refs, repeat=2):
        assert oracle.factor_eq(f1, f2) == (w.factor_text(f1) == w.factor_text(f2))


@settings(deadline=None, max_examples=40)
@given(short_words)
def test_canonical_is_leftmost_occurrence(text):
    w = Word(text)
    oracle = w.oracle()
    for f in all_refs(w):
        value = w.factor_text(f)
        expected = FactorRef(text.find(value) + 1, f.len) if f.len else FactorRef(1, 0)
        assert canonicalize(w, f) == expected
        assert oracle.canonical(f) == expected


def test_canonicalize_rejects_out_of_range():
    with pytest.raises(ValueError):
        canonicalize(Word("ab"), FactorRef(2, 2))


@settings(deadline=None, max_examples=40)
@given(short_words)
def test_occurs_at(text):
    w = Word(text)
    oracle = w.oracle()
    for f in all_refs(w):
        value = w.factor_text(f)
        for pos in range(1, w.n + 2):
            expected = text[pos - 1 : pos - 1 + f.len] == value and pos + f.len <= w.n + 1
            assert oracle.occurs_at(f, pos) == expected


def test_enumerate_factors_matches_substring_set():
    for text in words_upto("ab", 6):
        w = Word(text)
        refs = enumerate_factors(w)
        assert len(refs) == len(set(refs))
        assert {w.factor_text(f) for f in refs} == factors(text)
        assert all(canonicalize(w, f) == f for f in refs)


def test_count_factors_hash_path_agrees_with_enumeration():
    rng = random.Random(7)
    for n in (65, 80, 113):  # above the direct-enumeration cutoff
        text = "".join(rng.choice("ab") for _ in range(n))
        assert count_factors(Word(text)) == len(factors(text))


def test_substitution_always_binds_universe():
    w = Word("abc")
    sigma = Substitution(w)
    assert sigma.value("u") == "abc"
    with pytest.raises(ValueError):
        Substitution(w, {"x": FactorRef(3, 2)})
    tau = sigma.extend("x", FactorRef(2, 1))
    assert tau.value("x") == "b" and "x" not in sigma


def random_relation(rng, scheme, domain, density=0.3):
    rows = [
        row
        for row in itertools.product(domain, repeat=len(scheme))
        if rng.random() < density
    ]
    return Relation(scheme, rows)


def test_relation_algebra_against_brute_force():
    rng = random.Random(3)
    w = Word("aabab")
    domain = enumerate_factors(w)[:6]
    for _ in range(25):
        r = random_relation(rng, ("x", "y"), domain)
        s = random_relation(rng, ("y", "z"), domain)
        joined = r.join(s)
        expected = {
            (x, y, z)
            for (x, y) in r.rows
            for (y2, z) in s.rows
            if y == y2
        }
        assert set(joined.reorder(("x", "y", "z")).rows) == expected

        t = random_relation(rng, ("x", "y"), domain)
        assert r.union(t).rows == r.rows | t.rows
        assert r.difference(t).rows == r.rows - t.rows
        assert r.project(["y"]).rows == {(y,) for (_, y) in r.rows}
        assert r.select_eq("x", "y").rows == {(x, y) for (x, y) in r.rows if x == y}
        assert r.complement(domain).rows == set(
            itertools.product(domain, repeat=2)
        ) - r.rows
        assert r.divide("y", domain).rows == {
            (x,) for x in domain if all((x, d) in r.rows for d in domain)
        }


def test_relation_reorder_and_equality():
    rows = [(FactorRef(1, 1), FactorRef(1, 0))]
    r = Relation(("x", "y"), rows)
    s = Relation(("y", "x"), [(FactorRef(1, 0), FactorRef(1, 1))])
    assert r == s
    assert r != Relation(("x", "y"), [])
    with pytest.raises(ValueError):
        Relation(("x", "x"), [])
    with pytest.raises(ValueError):
        r.reorder(("x", "z"))


def test_relation_pad_and_truth():
    domain = [FactorRef(1, 0), FactorRef(1, 1)]
    r = Relation(("x",), [(domain[0],)])
    padded = r.pad(["y"], domain)
    assert set(padded.scheme) == {"x", "y"} and len(padded) == 2
    assert Relation.truth(True).is_true_sentence()
    assert not Relation.truth(False).is_true_sentence()


@settings(max_examples=25)
@given(short_words)
def test_word_level_caches_are_per_word(text):
    w1, w2 = Word(text), Word(text + "a")
    enumerate_factors(w1)
    assert w1._factors is not None and w2._factors is None
    assert w1 == Word(text) and hash(w1) == hash(Word(text))
