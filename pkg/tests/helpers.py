"""Independent oracles shared across the test suite.

Everything here is deliberately naive and separate from the package's own
algorithms: substring scans, Brzozowski derivatives, breadth-first search,
and a backtracking capture matcher.  Tests compare engine output against
these, never against another code path of the engine itself.
"""

import itertools

from fclogic.core import Word
from fclogic.evaluator import eval_bottomup, eval_relation_naive
from fclogic.regexlang import RAlt, RCat, REmpty, REps, RLetter, RSigma, RStar
from fclogic.spanner import Bind, Diff, EqSelect, Join, Project, Rgx, Union


def words_upto(alphabet: str, max_len: int):
    for n in range(max_len + 1):
        for tup in itertools.product(alphabet, repeat=n):
            yield "".join(tup)


def factors(text: str) -> set:
    out = {""}
    for i in range(len(text)):
        for j in range(i + 1, len(text) + 1):
            out.add(text[i:j])
    return out


def rows_as_strings(w: Word, rel) -> set:
    """Relation rows as tuples of factor strings, columns in sorted-scheme order."""
    order = sorted(rel.scheme)
    rel = rel.reorder(order)
    return {tuple(w.factor_text(f) for f in row) for row in rel.rows}


def lang(phi, alphabet: str, max_len: int, engine=eval_bottomup) -> set:
    out = set()
    for text in words_upto(alphabet, max_len):
        if engine(phi, Word(text)).is_true_sentence():
            out.add(text)
    return out


def engines_agree(phi, w: Word) -> bool:
    return eval_relation_naive(phi, w) == eval_bottomup(phi, w)


# ---------------------------------------------------------------------------
# Brzozowski-derivative regex matcher (oracle for the package's NFA matcher)
# ---------------------------------------------------------------------------


def nullable(r) -> bool:
    if isinstance(r, (REps, RStar)):
        return True
    if isinstance(r, (REmpty, RLetter, RSigma)):
        return isinstance(r, REps)
    if isinstance(r, RAlt):
        return nullable(r.left) or nullable(r.right)
    if isinstance(r, RCat):
        return nullable(r.left) and nullable(r.right)
    raise TypeError(r)


def derive(r, ch: str):
    if isinstance(r, (REmpty, REps)):
        return REmpty()
    if isinstance(r, RLetter):
        return REps() if r.letter == ch else REmpty()
    if isinstance(r, RSigma):
        return REps()
    if isinstance(r, RAlt):
        return RAlt(derive(r.left, ch), derive(r.right, ch))
    if isinstance(r, RCat):
        first = RCat(derive(r.left, ch), r.right)
        if nullable(r.left):
            return RAlt(first, derive(r.right, ch))
        return first
    if isinstance(r, RStar):
        return RCat(derive(r.sub, ch), r)
    raise TypeError(r)


def brz_match(r, text: str) -> bool:
    for ch in text:
        r = derive(r, ch)
    return nullable(r)


# ---------------------------------------------------------------------------
# Brute-force capture matcher (oracle for the spanner compiler)
# ---------------------------------------------------------------------------


def _matches(node, text: str, i: int):
    """Yield (j, bindings) where node matches text[i-1 : j-1] (1-based spans)."""
    if isinstance(node, REps):
        yield i, {}
    elif isinstance(node, REmpty):
        return
    elif isinstance(node, RLetter):
        if i <= len(text) and text[i - 1] == node.letter:
            yield i + 1, {}
    elif isinstance(node, RSigma):
        if i <= len(text):
            yield i + 1, {}
    elif isinstance(node, RAlt):
        yield from _matches(node.left, text, i)
        yield from _matches(node.right, text, i)
    elif isinstance(node, RCat):
        for j, b1 in _matches(node.left, text, i):
            for k, b2 in _matches(node.right, text, j):
                merged = dict(b1)
                merged.update(b2)
                yield k, merged
    elif isinstance(node, RStar):
        # functional formulas bind nothing under a star, so positions suffice
        reached = set()
        frontier = [i]
        while frontier:
            pos = frontier.pop()
            if pos in reached:
                continue
            reached.add(pos)
            for j, _ in _matches(node.sub, text, pos):
                if j > pos:
                    frontier.append(j)
        for j in sorted(reached):
            yield j, {}
    elif isinstance(node, Bind):
        for j, b in _matches(node.sub, text, i):
            out = dict(b)
            out[node.var] = (i, j)
            yield j, out
    else:
        raise TypeError(node)


def oracle_regex_spans(node, text: str) -> set:
    out = set()
    for j, bindings in _matches(node, text, 1):
        if j == len(text) + 1:
            out.add(tuple(sorted(bindings.items())))
    return out


def oracle_spanner(e, text: str) -> set:
    if isinstance(e, Rgx):
        return oracle_regex_spans(e.formula, text)
    if isinstance(e, Union):
        return oracle_spanner(e.left, text) | oracle_spanner(e.right, text)
    if isinstance(e, Diff):
        return oracle_spanner(e.left, text) - oracle_spanner(e.right, text)
    if isinstance(e, Join):
        left, right = oracle_spanner(e.left, text), oracle_spanner(e.right, text)
        out = set()
        for lt in left:
            dl = dict(lt)
            for rt in right:
                dr = dict(rt)
                if all(dl[k] == dr[k] for k in dl.keys() & dr.keys()):
                    merged = dict(dl)
                    merged.update(dr)
                    out.add(tuple(sorted(merged.items())))
        return out
    if isinstance(e, Project):
        keep = set(e.keep)
        return {
            tuple((v, span) for v, span in t if v in keep) for t in oracle_spanner(e.sub, text)
        }
    if isinstance(e, EqSelect):
        out = set()
        for t in oracle_spanner(e.sub, text):
            d = dict(t)
            (i1, j1), (i2, j2) = d[e.x], d[e.y]
            if text[i1 - 1 : j1 - 1] == text[i2 - 1 : j2 - 1]:
                out.add(t)
        return out
    raise TypeError(e)


# ---------------------------------------------------------------------------
# Graph helpers for closure tests
# ---------------------------------------------------------------------------


def bfs_reachable(nodes, edges) -> set:
    """Reflexive-transitive reachability as a set of (src, dst) pairs."""
    adjacency = {}
    for a, b in edges:
        adjacency.setdefault(a, set()).add(b)
    out = set()
    for start in nodes:
        seen = {start}
        frontier = [start]
        while frontier:
            node = frontier.pop()
            for nxt in adjacency.get(node, ()):
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        out.update((start, node) for node in seen)
    return out


def encode_edges(labels, edges) -> str:
    """enc(E): one '$vi#vj$' block per edge, blocks separated by '$'."""
    return "$".join(f"${labels[a]}#{labels[b]}$" for a, b in sorted(edges)) if edges else "$"
