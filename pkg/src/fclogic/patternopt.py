"""Static optimization of word equations via treewidth.

The standard graph of a pattern has one vertex per position, edges between
consecutive positions, and edges from each variable occurrence to the next
occurrence of the same variable.  An existentially quantified equation
``exists x1..xm: y = a1...an`` is decomposed along a nice tree decomposition
of that graph into an equivalent formula of width at most 2*tw + v, where
v = 2 + |free(y = a) - {x1..xm}|: the pattern is split into chained binary
concatenations z_{i+1} = z_i a_{i+1}, each equation is placed at the highest
tree node annotated with its variables, and quantifiers move to the forget
nodes.

Exact treewidth is computed by dynamic programming over elimination orders
for up to 12 vertices; larger graphs fall back to the min-fill heuristic,
whose (still valid) decomposition is flagged as a possibly non-optimal
upper bound.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

from fclogic.core import UNIVERSE
from fclogic.syntax import (
    And,
    Eq,
    Exists,
    Formula,
    TermItem,
    VarItem,
    free_vars,
    make_pattern,
)

EXACT_LIMIT = 12


class ShapeError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Standard graph
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StandardGraph:
    n: int
    edges: frozenset  # of 2-element frozensets
    labels: tuple  # position i (1-based) -> ('t', letter) or ('v', name)

    def adjacency(self) -> dict[int, set]:
        adj = {v: set() for v in range(1, self.n + 1)}
        for e in self.edges:
            a, b = tuple(e)
            adj[a].add(b)
            adj[b].add(a)
        return adj


def explode_pattern(pattern) -> list:
    """One entry per pattern position: ('t', letter) or ('v', name)."""
    out = []
    for item in pattern:
        if isinstance(item, TermItem):
            out.extend(("t", ch) for ch in item.word)
        else:
            out.append(("v", item.name))
    return out


def standard_graph(pattern) -> StandardGraph:
    labels = explode_pattern(pattern)
    n = len(labels)
    if n < 1:
        raise ShapeError("the standard graph needs a non-empty pattern")
    edges = set()
    for i in range(1, n):
        edges.add(frozenset((i, i + 1)))
    last_seen: dict[str, int] = {}
    for i, (kind, value) in enumerate(labels, start=1):
        if kind == "v":
            if value in last_seen and last_seen[value] != i:
                edges.add(frozenset((last_seen[value], i)))
            last_seen[value] = i
    edges = {e for e in edges if len(e) == 2}
    return StandardGraph(n, frozenset(edges), tuple(labels))


# ---------------------------------------------------------------------------
# Tree decompositions
# ---------------------------------------------------------------------------


@dataclass
class TreeDecomposition:
    bags: list  # list[frozenset[int]]
    parent: list  # parent[i] = index of parent node, -1 for the root

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=1) - 1

    def children(self) -> dict[int, list]:
        out: dict[int, list] = {i: [] for i in range(len(self.bags))}
        for i, p in enumerate(self.parent):
            if p >= 0:
                out[p].append(i)
        return out

    def root(self) -> int:
        return self.parent.index(-1)


def check_decomposition(graph: StandardGraph, td: TreeDecomposition) -> bool:
    """Vertex coverage, edge coverage, and connected-subtree property."""
    vertices = set(range(1, graph.n + 1))
    covered = set().union(*td.bags) if td.bags else set()
    if not vertices <= covered:
        return False
    for e in graph.edges:
        if not any(e <= bag for bag in td.bags):
            return False
    children = td.children()
    for v in vertices:
        nodes = [i for i, bag in enumerate(td.bags) if v in bag]
        if not nodes:
            return False
        # connectivity: BFS inside the induced subtree
        member = set(nodes)
        seen = {nodes[0]}
        stack = [nodes[0]]
        while stack:
            t = stack.pop()
            neighbors = children[t] + ([td.parent[t]] if td.parent[t] >= 0 else [])
            for s in neighbors:
                if s in member and s not in seen:
                    seen.add(s)
                    stack.append(s)
        if seen != member:
            return False
    return True


@dataclass
class TreewidthResult:
    width: int
    decomposition: TreeDecomposition
    exact: bool


def _elimination_order_exact(n: int, adj: dict[int, set]) -> tuple[int, tuple]:
    """Optimal elimination order via subset dynamic programming."""

    vertices = frozenset(range(1, n + 1))

    def reach_degree(eliminated: frozenset, v: int) -> int:
        # neighbors of v among non-eliminated vertices, via paths through eliminated
        seen = {v}
        stack = [v]
        out = set()
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y in seen:
                    continue
                seen.add(y)
                if y in eliminated:
                    stack.append(y)
                else:
                    out.add(y)
        return len(out)

    @lru_cache(maxsize=None)
    def best(S: frozenset) -> tuple[int, tuple]:
        if not S:
            return -1, ()
        top = (n + 1, ())
        for v in sorted(S):
            rest = S - {v}
            sub_width, order = best(rest)
            cost = max(sub_width, reach_degree(rest, v))
            if cost < top[0]:
                top = (cost, order + (v,))
        return top

    result = best(vertices)
    best.cache_clear()
    return result


def _elimination_order_minfill(n: int, adj: dict[int, set]) -> tuple:
    g = {v: set(ns) for v, ns in adj.items()}
    order = []
    remaining = set(range(1, n + 1))
    while remaining:
        def fill_cost(v):
            nb = list(g[v])
            return sum(
                1 for a, b in itertools.combinations(nb, 2) if b not in g[a]
            )

        v = min(remaining, key=lambda v: (fill_cost(v), len(g[v]), v))
        nb = list(g[v])
        for a, b in itertools.combinations(nb, 2):
            g[a].add(b)
            g[b].add(a)
        for x in nb:
            g[x].discard(v)
        del g[v]
        remaining.discard(v)
        order.append(v)
    return tuple(order)


def _decomposition_from_order(n: int, adj: dict[int, set], order) -> TreeDecomposition:
    g = {v: set(ns) for v, ns in adj.items()}
    bag_of: dict[int, frozenset] = {}
    neighbors_at_elim: dict[int, set] = {}
    for v in order:
        nb = set(g[v])
        bag_of[v] = frozenset({v} | nb)
        neighbors_at_elim[v] = nb
        for a, b in itertools.combinations(nb, 2):
            g[a].add(b)
            g[b].add(a)
        for x in nb:
            g[x].discard(v)
        del g[v]
    index = {v: i for i, v in enumerate(order)}
    bags = [bag_of[v] for v in order]
    parent = [-1] * len(order)
    for i, v in enumerate(order):
        later = [u for u in neighbors_at_elim[v] if index[u] > i]
        if later:
            parent[i] = index[min(later, key=lambda u: index[u])]
        elif i + 1 < len(order):
            parent[i] = i + 1
    # ensure a single root: the last node
    return TreeDecomposition(bags, parent)


def treewidth(graph: StandardGraph) -> TreewidthResult:
    adj = graph.adjacency()
    if graph.n == 1:
        return TreewidthResult(0, TreeDecomposition([frozenset({1})], [-1]), True)
    if graph.n <= EXACT_LIMIT:
        width, order = _elimination_order_exact(graph.n, adj)
        exact = True
    else:
        order = _elimination_order_minfill(graph.n, adj)
        width = None
        exact = False
    td = _decomposition_from_order(graph.n, adj, order)
    if width is None:
        width = td.width
    assert check_decomposition(graph, td)
    assert td.width <= max(width, 0) or not exact
    return TreewidthResult(td.width if not exact else width, td, exact)


# ---------------------------------------------------------------------------
# Nice tree decompositions
# ---------------------------------------------------------------------------


@dataclass
class NiceNode:
    kind: str  # 'leaf' | 'introduce' | 'forget' | 'join'
    bag: frozenset
    vertex: int | None = None
    children: tuple = ()

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()


def _chain_to(node: NiceNode, target: frozenset) -> NiceNode:
    """Forget/introduce chain transforming node's bag into target.

    Going upward, vertices leaving the bag are forgotten (descending vertex
    order) and vertices entering are introduced (ascending vertex order).
    """
    current = node
    bag = set(node.bag)
    for v in sorted(bag - target, reverse=True):
        bag.discard(v)
        current = NiceNode("forget", frozenset(bag), v, (current,))
    for v in sorted(target - bag):
        bag.add(v)
        current = NiceNode("introduce", frozenset(bag), v, (current,))
    return current


def make_nice(td: TreeDecomposition) -> NiceNode:
    """Nice tree decomposition: empty root/leaf bags, typed nodes, unchanged width."""
    children = td.children()

    def build(i: int) -> NiceNode:
        bag = td.bags[i]
        subs = [_chain_to(build(c), bag) for c in children[i]]
        if not subs:
            subs = [_chain_to(NiceNode("leaf", frozenset()), bag)]
        while len(subs) > 1:
            right = subs.pop()
            left = subs.pop()
            subs.append(NiceNode("join", bag, None, (left, right)))
        return subs[0]

    return _chain_to(build(td.root()), frozenset())


def check_nice(graph: StandardGraph, root: NiceNode) -> bool:
    """Typing, empty root/leaf bags, one forget per vertex, plus base validity."""
    if root.bag:
        return False
    nodes = list(root.walk())
    forgotten: list[int] = []
    for t in nodes:
        if t.kind == "leaf":
            if t.bag or t.children:
                return False
        elif t.kind == "introduce":
            (c,) = t.children
            if t.vertex in c.bag or t.bag != c.bag | {t.vertex}:
                return False
        elif t.kind == "forget":
            (c,) = t.children
            if t.vertex not in c.bag or t.bag != c.bag - {t.vertex}:
                return False
            forgotten.append(t.vertex)
        elif t.kind == "join":
            a, b = t.children
            if not (t.bag == a.bag == b.bag):
                return False
        else:
            return False
    if sorted(forgotten) != list(range(1, graph.n + 1)):
        return False
    # re-check the three decomposition conditions on the flattened tree
    bags = [t.bag for t in nodes]
    parent = [-1] * len(nodes)
    idx = {id(t): i for i, t in enumerate(nodes)}
    for t in nodes:
        for c in t.children:
            parent[idx[id(c)]] = idx[id(t)]
    return check_decomposition(graph, TreeDecomposition(bags, parent))


# ---------------------------------------------------------------------------
# Equation decomposition (the width-bound rewriting)
# ---------------------------------------------------------------------------


def _unwrap_exists(phi: Formula):
    bound = []
    while isinstance(phi, Exists):
        bound.append(phi.var)
        phi = phi.sub
    return bound, phi


def _conjoin(parts):
    out = None
    for p in parts:
        if p is not None:
            out = p if out is None else And(out, p)
    return out


def decompose_equation(phi: Formula) -> Formula:
    """Rewrite ``exists x1..xm: y = a`` along a nice tree decomposition of a.

    Returns an equivalent formula of width at most 2*tw(a) + v.  Inputs whose
    pattern has fewer than two positions are returned unchanged.
    """
    bound, eq = _unwrap_exists(phi)
    if not isinstance(eq, Eq):
        raise ShapeError("expected an existentially quantified word equation")
    labels = explode_pattern(eq.rhs)
    n = len(labels)
    if n < 2:
        return phi
    y = eq.lhs
    pattern_vars = {v for kind, v in labels if kind == "v"}
    if y != UNIVERSE and y in pattern_vars:
        raise ShapeError("left-side variable occurring in the pattern is not supported")

    graph = standard_graph(eq.rhs)
    nice_root = make_nice(treewidth(graph).decomposition)

    taken = pattern_vars | {y} | set(bound)

    def fresh(base: str) -> str:
        name = base
        counter = 1
        while name in taken:
            counter += 1
            name = f"{base}_{counter}"
        taken.add(name)
        return name

    def zname(i: int) -> str:
        return y if i == n else chain[i]

    chain = {i: None for i in range(2, n + 1)}
    for i in range(2, n):
        chain[i] = fresh(f"_d{i}")

    def pos_item(i: int):
        kind, value = labels[i - 1]
        return TermItem(value) if kind == "t" else VarItem(value)

    # chained binary equations of the intermediate formula
    equations = []  # (positions frozenset, Eq)
    for i in range(2, n + 1):
        if i == 2:
            rhs = (pos_item(1), pos_item(2))
        else:
            rhs = (VarItem(zname(i - 1)), pos_item(i))
        equations.append((frozenset((i - 1, i)), Eq(zname(i), make_pattern(rhs))))

    # depth of every nice node, and the forget node of every vertex
    depth = {}
    forget_node = {}

    def assign_depth(t: NiceNode, d: int):
        depth[id(t)] = d
        if t.kind == "forget":
            forget_node[t.vertex] = t
        for c in t.children:
            assign_depth(c, d + 1)

    assign_depth(nice_root, 0)

    # place each equation at the highest node containing both its positions
    placed: dict[int, list] = {}
    for positions, equation in equations:
        best = None
        for t in nice_root.walk():
            if positions <= t.bag and (best is None or depth[id(t)] < depth[id(best)]):
                best = t
        assert best is not None, "edge coverage guarantees a hosting bag"
        placed.setdefault(id(best), []).append(equation)

    # quantifier placement at forget nodes
    quantifiers: dict[int, list] = {}

    def add_quantifier(t: NiceNode, var: str):
        quantifiers.setdefault(id(t), []).append(var)

    for i in range(2, n):
        add_quantifier(forget_node[i], chain[i])
    if y in bound:
        add_quantifier(forget_node[n], y)
    var_positions: dict[str, list] = {}
    for i, (kind, value) in enumerate(labels, start=1):
        if kind == "v" and value != UNIVERSE:
            var_positions.setdefault(value, []).append(i)
    for x in bound:
        if x == y:
            continue
        if x in var_positions:
            host = min(
                (forget_node[j] for j in var_positions[x]), key=lambda t: depth[id(t)]
            )
            add_quantifier(host, x)

    def assemble(t: NiceNode):
        body = _conjoin([assemble(c) for c in t.children] + placed.get(id(t), []))
        for var in quantifiers.get(id(t), []):
            assert body is not None, "a quantifier must scope over its equations"
            body = Exists(var, body)
        return body

    psi = assemble(nice_root)
    assert psi is not None
    # bound variables that never occur in the pattern: vacuous quantifiers
    for x in bound:
        if x != y and x not in var_positions:
            psi = Exists(x, psi)
    return psi


def width_bound(phi: Formula) -> int:
    """The guaranteed width bound 2*tw(a) + v for a decomposable input."""
    bound, eq = _unwrap_exists(phi)
    if not isinstance(eq, Eq):
        raise ShapeError("expected an existentially quantified word equation")
    tw = treewidth(standard_graph(eq.rhs)).width
    v = 2 + len(free_vars(eq) - set(bound))
    return 2 * tw + v


# ---------------------------------------------------------------------------
# Power-pattern rewriting
# ---------------------------------------------------------------------------


def rewrite_power(phi: Formula) -> Formula:
    """Rewrite ``exists x: y = x^(2^k)`` into the width-3 doubling chain."""
    if not isinstance(phi, Exists):
        raise ShapeError("expected exists x: y = x^(2^k)")
    x = phi.var
    eq = phi.sub
    if not isinstance(eq, Eq):
        raise ShapeError("expected exists x: y = x^(2^k)")
    if not eq.rhs or not all(isinstance(i, VarItem) and i.name == x for i in eq.rhs):
        raise ShapeError("right side must repeat the quantified variable")
    m = len(eq.rhs)
    k = m.bit_length() - 1
    if 2**k != m:
        raise ShapeError("the exponent must be a power of two")
    if k == 0:
        return phi
    y = eq.lhs
    taken = {x, y}
    names = []
    for base in ("_p1", "_p2"):
        name = base
        counter = 1
        while name in taken:
            counter += 1
            name = f"{base}_{counter}"
        taken.add(name)
        names.append(name)

    def build(i: int, prev: str) -> Formula:
        cur = names[i % 2]
        halving = Eq(prev, (VarItem(cur), VarItem(cur)))
        if i == k - 1:
            return Exists(cur, halving)
        return Exists(cur, And(halving, build(i + 1, cur)))

    return build(0, y)
