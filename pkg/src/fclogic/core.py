"""Words, factors, substitutions, relations, and the factor-equality oracle.

Factor values are represented by (start, len) occurrences inside one host
word, never by copied strings.  The canonical occurrence of a value is the
leftmost one; quantifiers range over canonical occurrences, which makes
quantification over factor *values* well-defined.
"""

from __future__ import annotations

import itertools
from typing import Iterable, NamedTuple

import numpy as np

from fclogic import kernels

# Reserved name of the universe variable.
UNIVERSE = "u"


class Alphabet:
    """Ordered, non-empty set of single-character symbols."""

    __slots__ = ("letters", "_index")

    def __init__(self, letters: Iterable[str]):
        seen = []
        index = set()
        for ch in letters:
            if len(ch) != 1:
                raise ValueError(f"alphabet symbols must be single characters, got {ch!r}")
            if ch in '"/\\':
                raise ValueError(f"reserved metacharacter {ch!r} cannot be an alphabet symbol")
            if ch not in index:
                seen.append(ch)
                index.add(ch)
        if not seen:
            raise ValueError("alphabet must be non-empty")
        self.letters = tuple(seen)
        self._index = index

    def __contains__(self, ch: str) -> bool:
        return ch in self._index

    def __iter__(self):
        return iter(self.letters)

    def __len__(self):
        return len(self.letters)

    def __repr__(self):
        return f"Alphabet({''.join(self.letters)!r})"

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self.letters == other.letters

    def __hash__(self):
        return hash(self.letters)


class Word:
    """Immutable host word; positions are 1-based."""

    __slots__ = ("text", "n", "_oracle", "_factors", "_eq_cache", "_fp_cache")

    def __init__(self, text: str):
        self.text = text
        self.n = len(text)
        self._oracle = None
        self._factors = None
        self._eq_cache = {}
        self._fp_cache = {}

    def oracle(self) -> "EqualityOracle":
        if self._oracle is None:
            self._oracle = build_oracle(self)
        return self._oracle

    def whole(self) -> "FactorRef":
        return FactorRef(1, self.n)

    def factor_text(self, f: "FactorRef") -> str:
        return self.text[f.start - 1 : f.start - 1 + f.len]

    def __repr__(self):
        return f"Word({self.text!r})"

    def __eq__(self, other):
        return isinstance(other, Word) and self.text == other.text

    def __hash__(self):
        return hash(self.text)


class FactorRef(NamedTuple):
    """Occurrence (start, len) of a factor inside a host word; start is 1-based."""

    start: int
    len: int


class EqualityOracle:
    """Constant-time factor equality backed by a dense longest-common-extension table.

    lce(i, j) is the length of the longest common prefix of the suffixes of
    the word starting at positions i and j.
    """

    __slots__ = ("word", "table")

    def __init__(self, word: Word, table: np.ndarray):
        self.word = word
        self.table = table

    def lce(self, i: int, j: int) -> int:
        return int(self.table[i, j])

    def factor_eq(self, f1: FactorRef, f2: FactorRef) -> bool:
        return f1.len == f2.len and (f1.start == f2.start or self.lce(f1.start, f2.start) >= f1.len)

    def occurs_at(self, f: FactorRef, pos: int) -> bool:
        """Does the value of f occur at position pos?"""
        if pos + f.len > self.word.n + 1:
            return False
        return f.len == 0 or self.lce(pos, f.start) >= f.len

    def canonical(self, f: FactorRef) -> FactorRef:
        if f.len == 0:
            return FactorRef(1, 0)
        for i in range(1, f.start):
            if self.lce(i, f.start) >= f.len:
                return FactorRef(i, f.len)
        return f


def build_oracle(w: Word) -> EqualityOracle:
    codes = np.frombuffer(w.text.encode("utf-32-le"), dtype=np.int32).copy()
    return EqualityOracle(w, kernels.lce_table(codes))


def canonicalize(w: Word, f: FactorRef) -> FactorRef:
    """Leftmost occurrence of the same factor value."""
    if f.start + f.len > w.n + 1:
        raise ValueError(f"{f} does not fit inside a word of length {w.n}")
    if f.len == 0:
        return FactorRef(1, 0)
    pos = w.text.find(w.factor_text(f))
    return FactorRef(pos + 1, f.len)


def enumerate_factors(w: Word) -> list[FactorRef]:
    """One canonical FactorRef per distinct factor value, ordered by (len, start)."""
    if w._factors is not None:
        return w._factors
    out = [FactorRef(1, 0)]
    text = w.text
    for ln in range(1, w.n + 1):
        seen = set()
        for i in range(w.n - ln + 1):
            s = text[i : i + ln]
            if s not in seen:
                seen.add(s)
                out.append(FactorRef(i + 1, ln))
    w._factors = out
    return out


def count_factors(w: Word) -> int:
    """|Fac(w)|, the number of distinct factor values including the empty word."""
    if w.n <= 64:
        return len(enumerate_factors(w))
    # Double rolling hash per length; vectorized so length-thousands words
    # stay cheap.  Collisions across two independent 31-bit moduli are
    # negligible at this scale (cross-checked against enumeration in tests).
    codes = np.frombuffer(w.text.encode("utf-32-le"), dtype=np.int32).astype(np.int64)
    n = w.n
    total = 1  # the empty factor
    params = ((1_000_003, 2_147_483_647), (1_000_033, 2_147_483_629))
    prefixes = []
    powers = []
    for base, mod in params:
        pref = np.zeros(n + 1, dtype=np.int64)
        for i in range(n):
            pref[i + 1] = (pref[i] * base + codes[i]) % mod
        pw = np.ones(n + 1, dtype=np.int64)
        for i in range(1, n + 1):
            pw[i] = (pw[i - 1] * base) % mod
        prefixes.append(pref)
        powers.append(pw)
    for ln in range(1, n + 1):
        keys = None
        for (base, mod), pref, pw in zip(params, prefixes, powers):
            h = (pref[ln : n + 1] - pref[0 : n - ln + 1] * pw[ln]) % mod
            keys = h if keys is None else (keys << np.int64(31)) | h
        total += np.unique(keys).size
    return total


class Substitution:
    """Variable bindings over the factors of one host word.

    The universe variable ``u`` is always bound to the whole host word.
    """

    __slots__ = ("word", "bindings")

    def __init__(self, word: Word, bindings: dict[str, FactorRef] | None = None):
        self.word = word
        self.bindings = dict(bindings or {})
        self.bindings[UNIVERSE] = word.whole()
        for var, f in self.bindings.items():
            if f.start < 1 or f.len < 0 or f.start + f.len > word.n + 1:
                raise ValueError(f"binding {var} -> {f} is not a factor occurrence of the host word")

    def value(self, var: str) -> str:
        return self.word.factor_text(self.bindings[var])

    def extend(self, var: str, f: FactorRef) -> "Substitution":
        new = Substitution.__new__(Substitution)
        new.word = self.word
        new.bindings = dict(self.bindings)
        new.bindings[var] = f
        return new

    def __contains__(self, var: str) -> bool:
        return var in self.bindings

    def __getitem__(self, var: str) -> FactorRef:
        return self.bindings[var]

    def __repr__(self):
        pairs = ", ".join(f"{v}->{self.word.factor_text(f)!r}" for v, f in sorted(self.bindings.items()))
        return f"Substitution({pairs})"


class Relation:
    """A set of tuples of canonical FactorRefs under an ordered scheme."""

    __slots__ = ("scheme", "rows")

    def __init__(self, scheme: Iterable[str], rows: Iterable[tuple]):
        self.scheme = tuple(scheme)
        if len(set(self.scheme)) != len(self.scheme):
            raise ValueError(f"duplicate variable in scheme {self.scheme}")
        self.rows = set(map(tuple, rows))

    # -- constructors -------------------------------------------------

    @staticmethod
    def truth(value: bool) -> "Relation":
        return Relation((), [()] if value else [])

    @staticmethod
    def full(scheme: Iterable[str], domain: list[FactorRef]) -> "Relation":
        scheme = tuple(scheme)
        return Relation(scheme, itertools.product(domain, repeat=len(scheme)))

    # -- basic accessors ----------------------------------------------

    def is_true_sentence(self) -> bool:
        return self.scheme == () and bool(self.rows)

    def __len__(self):
        return len(self.rows)

    def __eq__(self, other):
        if not isinstance(other, Relation):
            return NotImplemented
        if set(self.scheme) != set(other.scheme):
            return False
        return self.rows == other.reorder(self.scheme).rows

    def __hash__(self):  # pragma: no cover - relations are not hashed
        raise TypeError("Relation is unhashable")

    def __repr__(self):
        return f"Relation(scheme={self.scheme}, rows={len(self.rows)})"

    def as_dicts(self) -> list[dict]:
        return [dict(zip(self.scheme, row)) for row in self.rows]

    # -- relational algebra -------------------------------------------

    def reorder(self, scheme: Iterable[str]) -> "Relation":
        scheme = tuple(scheme)
        if scheme == self.scheme:
            return self
        if set(scheme) != set(self.scheme):
            raise ValueError(f"cannot reorder {self.scheme} to {scheme}")
        idx = [self.scheme.index(v) for v in scheme]
        return Relation(scheme, (tuple(row[i] for i in idx) for row in self.rows))

    def rename(self, mapping: dict[str, str]) -> "Relation":
        return Relation(tuple(mapping.get(v, v) for v in self.scheme), self.rows)

    def project(self, keep: Iterable[str]) -> "Relation":
        keep = tuple(v for v in self.scheme if v in set(keep))
        idx = [self.scheme.index(v) for v in keep]
        return Relation(keep, (tuple(row[i] for i in idx) for row in self.rows))

    def join(self, other: "Relation") -> "Relation":
        shared = [v for v in self.scheme if v in set(other.scheme)]
        out_scheme = self.scheme + tuple(v for v in other.scheme if v not in set(self.scheme))
        sidx = [self.scheme.index(v) for v in shared]
        oidx = [other.scheme.index(v) for v in shared]
        oextra = [i for i, v in enumerate(other.scheme) if v not in set(self.scheme)]
        buckets: dict[tuple, list] = {}
        for row in other.rows:
            buckets.setdefault(tuple(row[i] for i in oidx), []).append(tuple(row[i] for i in oextra))
        rows = []
        for row in self.rows:
            key = tuple(row[i] for i in sidx)
            for extra in buckets.get(key, ()):
                rows.append(row + extra)
        return Relation(out_scheme, rows)

    def union(self, other: "Relation") -> "Relation":
        other = other.reorder(self.scheme)
        return Relation(self.scheme, self.rows | other.rows)

    def pad(self, variables: Iterable[str], domain: list[FactorRef]) -> "Relation":
        """Add missing columns, each ranging over the full factor domain."""
        missing = [v for v in variables if v not in set(self.scheme)]
        if not missing:
            return self
        rows = (
            row + extra
            for row in self.rows
            for extra in itertools.product(domain, repeat=len(missing))
        )
        return Relation(self.scheme + tuple(missing), rows)

    def complement(self, domain: list[FactorRef]) -> "Relation":
        full = itertools.product(domain, repeat=len(self.scheme))
        return Relation(self.scheme, (row for row in full if row not in self.rows))

    def divide(self, var: str, domain: list[FactorRef]) -> "Relation":
        """Rows over scheme - {var} whose every extension by domain values is present."""
        if var not in self.scheme:
            return self
        keep = tuple(v for v in self.scheme if v != var)
        kidx = [self.scheme.index(v) for v in keep]
        vidx = self.scheme.index(var)
        groups: dict[tuple, set] = {}
        for row in self.rows:
            groups.setdefault(tuple(row[i] for i in kidx), set()).add(row[vidx])
        need = len(domain)
        return Relation(keep, (key for key, vals in groups.items() if len(vals) >= need))

    def select_eq(self, var1: str, var2: str) -> "Relation":
        i, j = self.scheme.index(var1), self.scheme.index(var2)
        return Relation(self.scheme, (row for row in self.rows if row[i] == row[j]))

    def difference(self, other: "Relation") -> "Relation":
        other = other.reorder(self.scheme)
        return Relation(self.scheme, self.rows - other.rows)
