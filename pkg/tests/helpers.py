"""Shared builders and oracles for the tests.

The oracles here only use the definitional robustness check (matching
recomputation after each deletion), so they are independent of the
auxiliary digraph machinery they certify.
"""

import itertools
import random

from robustmatch.auxdigraph import Digraph
from robustmatch.graphs import BipartiteGraph, Matching, complement_edges, is_robust


def graph(nu: int, nw: int, edges) -> BipartiteGraph:
    return BipartiteGraph(range(nu), range(nu, nu + nw), edges)


def matching(edges) -> Matching:
    return Matching(frozenset(edges))


def two_disjoint_edges() -> BipartiteGraph:
    return graph(2, 2, [(0, 2), (1, 3)])


def four_cycle() -> BipartiteGraph:
    return graph(2, 2, [(0, 2), (0, 3), (1, 2), (1, 3)])


def six_cycle() -> BipartiteGraph:
    return graph(3, 3, [(0, 3), (0, 4), (1, 4), (1, 5), (2, 5), (2, 3)])


def figure_one():
    """Two matched paths joined by a three-edge path; the small worked example.

    U = 0..3, W = 4..7. Digraph vertices 0, 1, 2, 3 play the roles a, b, c, d.
    Returns the graph, its matching, and the two edges drawn as the suggested
    augmentation.
    """
    g = graph(4, 4, [(0, 4), (1, 5), (2, 6), (3, 7), (1, 4), (1, 7), (2, 7)])
    m = matching([(0, 4), (1, 5), (2, 6), (3, 7)])
    return g, m, frozenset({(0, 5), (3, 6)})


def random_planted(rng: random.Random, pairs: int, p: float) -> BipartiteGraph:
    """Perfect matching 0..pairs-1 to a random permutation of W plus random edges."""
    us = list(range(pairs))
    ws = list(range(pairs, 2 * pairs))
    perm = ws[:]
    rng.shuffle(perm)
    edges = {(u, perm[u]) for u in us}
    edges |= {(u, w) for u in us for w in ws if rng.random() < p}
    return BipartiteGraph(us, ws, edges)


def random_dag(rng: random.Random, n: int, p: float) -> Digraph:
    perm = list(range(n))
    rng.shuffle(perm)
    arcs = [(perm[i], perm[j]) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return Digraph(range(n), arcs)


def random_digraph(rng: random.Random, n: int, p: float) -> Digraph:
    arcs = [(a, b) for a in range(n) for b in range(n) if a != b and rng.random() < p]
    return Digraph(range(n), arcs)


def definitional_min_augmentation(g: BipartiteGraph, costs=None, default=1, cap: int = 14):
    """Cheapest complement edge set making ``g`` robust, by the definition.

    Unit costs search by cardinality; with ``costs`` every subset is scored.
    Returns the optimal cost, or None if no subset works.
    """
    cands = sorted(complement_edges(g))
    assert len(cands) <= cap, "oracle instance too large"
    if costs is None:
        for size in range(len(cands) + 1):
            for combo in itertools.combinations(cands, size):
                if is_robust(g.add_edges(combo)):
                    return size
        return None
    best = None
    for size in range(len(cands) + 1):
        for combo in itertools.combinations(cands, size):
            c = sum(costs.get(e, default) for e in combo)
            if best is not None and c >= best:
                continue
            if is_robust(g.add_edges(combo)):
                best = c
    return best


def brute_force_set_cover(items, sets: dict) -> int:
    items = set(items)
    names = sorted(sets)
    for r in range(1, len(names) + 1):
        for combo in itertools.combinations(names, r):
            if set().union(*(set(sets[s]) for s in combo)) >= items:
                return r
    raise AssertionError("family does not cover the items")


def has_perfect_matching_brute(g: BipartiteGraph) -> bool:
    us = list(g.part_u)
    ws = list(g.part_w)
    if len(us) != len(ws):
        return False
    return any(all(g.has_edge(u, w) for u, w in zip(us, perm)) for perm in itertools.permutations(ws))
