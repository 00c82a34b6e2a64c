import itertools
import random

import pytest

from fclogic.core import Word
from fclogic.evaluator import eval_bottomup, solve_equation
from fclogic.patternopt import (
    NiceNode,
    ShapeError,
    TreeDecomposition,
    check_decomposition,
    check_nice,
    decompose_equation,
    make_nice,
    rewrite_power,
    standard_graph,
    treewidth,
    width_bound,
)
from fclogic.syntax import Eq, Exists, free_vars, parse, width
from helpers import words_upto


def alpha_n(n: int) -> str:
    body = " ".join(f"x{i} x{i}" for i in range(1, n + 1))
    names = ", ".join(f"x{i}" for i in range(1, n + 1))
    return f"exists {names}: u = {body}"


def brute_treewidth(n: int, adj: dict) -> int:
    """Minimum over all elimination orders of the maximum elimination degree."""
    best = n
    for order in itertools.permutations(range(1, n + 1)):
        graph = {v: set(neigh) for v, neigh in adj.items()}
        worst = 0
        for v in order:
            neigh = graph[v]
            worst = max(worst, len(neigh))
            if worst >= best:
                break
            for a in neigh:
                graph[a].discard(v)
                graph[a].update(neigh - {a, v})
            del graph[v]
        best = min(best, worst)
    return best


def random_graph(rng, n: int):
    edges = frozenset(
        frozenset((a, b))
        for a in range(1, n + 1)
        for b in range(a + 1, n + 1)
        if rng.random() < 0.4
    )
    from fclogic.patternopt import StandardGraph

    return StandardGraph(n, edges, tuple(("v", f"p{i}") for i in range(n)))


def test_standard_graph_of_square_pattern():
    phi = parse("exists x1, x2: u = x1 x1 x2 x2")
    graph = standard_graph(phi.sub.sub.rhs)
    assert graph.n == 4
    # consecutive edges plus next-occurrence edges of x1 and x2
    assert frozenset((1, 2)) in graph.edges and frozenset((3, 4)) in graph.edges


@pytest.mark.parametrize("n", range(1, 9))
def test_alpha_n_treewidth_is_one(n):
    phi = parse(alpha_n(n))
    body = phi
    while isinstance(body, Exists):
        body = body.sub
    result = treewidth(standard_graph(body.rhs))
    assert result.width == 1
    assert check_decomposition(standard_graph(body.rhs), result.decomposition)


def test_exact_treewidth_against_brute_force():
    rng = random.Random(31)
    for _ in range(25):
        n = rng.randrange(1, 8)
        graph = random_graph(rng, n)
        result = treewidth(graph)
        assert result.exact
        assert check_decomposition(graph, result.decomposition)
        assert result.width == brute_treewidth(n, graph.adjacency())


def test_heuristic_beyond_exact_limit():
    rng = random.Random(37)
    graph = random_graph(rng, 15)
    result = treewidth(graph)
    assert not result.exact
    assert check_decomposition(graph, result.decomposition)  # still a valid upper bound


def test_check_decomposition_rejects_bad_trees():
    graph = standard_graph(parse("u = x x").rhs)
    good = treewidth(graph).decomposition
    assert check_decomposition(graph, good)
    missing_vertex = TreeDecomposition([frozenset({1})], [-1])
    assert not check_decomposition(graph, missing_vertex)
    split = TreeDecomposition(
        [frozenset({1}), frozenset({2}), frozenset({1})], [-1, 0, 1]
    )
    assert not check_decomposition(graph, split)  # vertex 1 not connected


def test_make_nice_golden_shape():
    td = TreeDecomposition([frozenset({1, 2})], [-1])
    root = make_nice(td)
    walk = [(node.kind, node.vertex) for node in root.walk()]
    walk.reverse()  # walk() starts at the root; read leaf-to-root
    assert walk == [
        ("leaf", None),
        ("introduce", 1),
        ("introduce", 2),
        ("forget", 2),
        ("forget", 1),
    ]


def test_make_nice_random_graphs():
    rng = random.Random(41)
    for _ in range(20):
        graph = random_graph(rng, rng.randrange(1, 8))
        result = treewidth(graph)
        root = make_nice(result.decomposition)
        assert check_nice(graph, root)


def equation_relation(phi, w):
    """Oracle: solve the underlying equation directly, project to free vars."""
    bound = []
    body = phi
    while isinstance(body, Exists):
        bound.append(body.var)
        body = body.sub
    rel = solve_equation(body, w)
    return rel.project(sorted(free_vars(phi)))


DECOMPOSABLE = [
    alpha_n(2),
    alpha_n(3),
    alpha_n(4),
    "exists x, y: u = x y x y",
    'exists x: u = x "ab" x',
    "exists x, y: z = x x y y x",
    "u = x y x",  # free pattern variables stay free
]


@pytest.mark.parametrize("src", DECOMPOSABLE)
def test_decompose_equation_preserves_semantics(src):
    phi = parse(src)
    psi = decompose_equation(phi)
    assert free_vars(psi) == free_vars(phi)
    assert width(psi) <= width_bound(phi)
    for text in words_upto("ab", 5):
        w = Word(text)
        assert eval_bottomup(psi, w) == equation_relation(phi, w), text


def test_decompose_equation_width_gain():
    phi = parse(alpha_n(6))
    psi = decompose_equation(phi)
    assert width(phi) == 6 and width(psi) <= 4


def test_decompose_equation_shape_errors():
    with pytest.raises(ShapeError):
        decompose_equation(parse("exists y: y = x y"))  # lhs occurs in rhs
    with pytest.raises(ShapeError):
        decompose_equation(parse("x = y & x = z"))  # not a plain equation


def test_rewrite_power_semantics():
    for k in range(0, 4):
        phi = parse(f'exists x: y = {" ".join(["x"] * 2 ** k)}')
        psi = rewrite_power(phi)
        assert width(psi) <= 3
        assert free_vars(psi) == {"y"}
        for text in words_upto("ab", 5):
            w = Word(text)
            assert eval_bottomup(psi, w) == equation_relation(phi, w), (k, text)


def test_rewrite_power_shape_errors():
    with pytest.raises(ShapeError):
        rewrite_power(parse("exists x: y = x x x"))  # 3 is not a power of two
    with pytest.raises(ShapeError):
        rewrite_power(parse("exists x: y = x z"))
    with pytest.raises(ShapeError):
        rewrite_power(parse("y = x x"))  # missing quantifier
