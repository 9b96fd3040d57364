"""Bipartite graphs, matchings and the definitional robustness check.

Edges are stored as ``(u, w)`` tuples with ``u`` taken from ``part_u`` and
``w`` from ``part_w``; every public function accepts either orientation and
normalizes it.
"""

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import InfeasibleError, InvalidInstanceError

Edge = tuple[int, int]


class BipartiteGraph:
    """An immutable bipartite graph with explicit vertex parts."""

    __slots__ = ("part_u", "part_w", "edges", "_u_set", "_w_set", "_adj")

    def __init__(self, part_u: Iterable[int], part_w: Iterable[int], edges: Iterable[Edge] = ()):
        self.part_u = tuple(part_u)
        self.part_w = tuple(part_w)
        self._u_set = frozenset(self.part_u)
        self._w_set = frozenset(self.part_w)
        if len(self._u_set) != len(self.part_u) or len(self._w_set) != len(self.part_w):
            raise InvalidInstanceError("duplicate vertex id inside a part")
        if self._u_set & self._w_set:
            raise InvalidInstanceError("vertex ids must be unique across both parts")
        normalized = set()
        for a, b in edges:
            normalized.add(self._normalize(a, b))
        self.edges = frozenset(normalized)
        adj: dict[int, list[int]] = {v: [] for v in self.part_u + self.part_w}
        for u, w in self.edges:
            adj[u].append(w)
            adj[w].append(u)
        self._adj = {v: tuple(sorted(ns)) for v, ns in adj.items()}

    def _normalize(self, a: int, b: int) -> Edge:
        if a in self._u_set and b in self._w_set:
            return (a, b)
        if b in self._u_set and a in self._w_set:
            return (b, a)
        raise InvalidInstanceError(f"pair ({a}, {b}) does not join the two parts")

    def normalize(self, a: int, b: int) -> Edge:
        """Return the pair as ``(u, w)`` with ``u`` in part U."""
        return self._normalize(a, b)

    @property
    def vertices(self) -> tuple[int, ...]:
        return self.part_u + self.part_w

    def in_u(self, v: int) -> bool:
        return v in self._u_set

    def in_w(self, v: int) -> bool:
        return v in self._w_set

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def has_edge(self, a: int, b: int) -> bool:
        try:
            return self._normalize(a, b) in self.edges
        except InvalidInstanceError:
            return False

    def add_edges(self, extra: Iterable[Edge]) -> "BipartiteGraph":
        return BipartiteGraph(self.part_u, self.part_w, list(self.edges) + list(extra))

    def remove_edges(self, gone: Iterable[Edge]) -> "BipartiteGraph":
        drop = {self._normalize(a, b) for a, b in gone}
        return BipartiteGraph(self.part_u, self.part_w, self.edges - drop)

    def swapped(self) -> "BipartiteGraph":
        """The same graph with the roles of the two parts exchanged."""
        return BipartiteGraph(self.part_w, self.part_u, self.edges)

    def is_connected(self) -> bool:
        verts = self.vertices
        if not verts:
            return True
        seen = {verts[0]}
        queue = deque([verts[0]])
        while queue:
            v = queue.popleft()
            for x in self._adj[v]:
                if x not in seen:
                    seen.add(x)
                    queue.append(x)
        return len(seen) == len(verts)

    def __eq__(self, other):
        if not isinstance(other, BipartiteGraph):
            return NotImplemented
        return (self.part_u, self.part_w, self.edges) == (other.part_u, other.part_w, other.edges)

    def __hash__(self):
        return hash((self.part_u, self.part_w, self.edges))

    def __repr__(self):
        return f"BipartiteGraph(|U|={len(self.part_u)}, |W|={len(self.part_w)}, |E|={len(self.edges)})"


@dataclass(frozen=True)
class Matching:
    """A set of pairwise disjoint edges.

    ``k`` is None for a matching meant to be perfect; otherwise it is the
    requested size in the size-k setting.
    """

    edges: frozenset
    k: Optional[int] = None
    partner: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        partner = {}
        for u, w in self.edges:
            if u in partner or w in partner:
                raise InvalidInstanceError("matching edges are not vertex-disjoint")
            partner[u] = w
            partner[w] = u
        object.__setattr__(self, "partner", partner)

    @property
    def kind(self) -> str:
        return "perfect" if self.k is None else "size-k"

    @property
    def size(self) -> int:
        return len(self.edges)

    def covers(self, v: int) -> bool:
        return v in self.partner

    def is_perfect_for(self, g: BipartiteGraph) -> bool:
        return all(v in self.partner for v in g.vertices)

    def check_against(self, g: BipartiteGraph, require_perfect: bool = True) -> None:
        """Raise unless every edge belongs to ``g`` (and, optionally, it is perfect)."""
        for u, w in self.edges:
            if (u, w) not in g.edges:
                raise InvalidInstanceError(f"matching edge ({u}, {w}) is not an edge of the graph")
        if require_perfect and not self.is_perfect_for(g):
            raise InfeasibleError("matching is not perfect")


def make_matching(g: BipartiteGraph, edges: Iterable[Edge], k: Optional[int] = None) -> Matching:
    return Matching(frozenset(g.normalize(a, b) for a, b in edges), k)


@dataclass(frozen=True)
class AugmentationSolution:
    """A set of complement edges to add together with its total cost."""

    added_edges: frozenset
    total_cost: int

    @property
    def size(self) -> int:
        return len(self.added_edges)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.added_edges)


def maximum_matching(g: BipartiteGraph) -> Matching:
    """Hopcroft-Karp maximum matching, deterministic for a fixed graph.

    Vertices and neighbours are scanned in increasing id order, so the
    result only depends on the graph.
    """
    match: dict[int, Optional[int]] = {v: None for v in g.vertices}
    left = sorted(g.part_u)
    inf = float("inf")

    while True:
        # BFS layering from free left vertices
        dist: dict[int, float] = {}
        queue = deque()
        for u in left:
            if match[u] is None:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = inf
        found = False
        while queue:
            u = queue.popleft()
            for w in g.neighbors(u):
                nxt = match[w]
                if nxt is None:
                    found = True
                elif dist[nxt] == inf:
                    dist[nxt] = dist[u] + 1
                    queue.append(nxt)
        if not found:
            break

        # iterative DFS along the layering
        for root in left:
            if match[root] is not None:
                continue
            stack = [(root, iter(g.neighbors(root)))]
            path: list[tuple[int, int]] = []
            while stack:
                u, it = stack[-1]
                advanced = False
                for w in it:
                    nxt = match[w]
                    if nxt is None:
                        path.append((u, w))
                        for a, b in path:
                            match[a] = b
                            match[b] = a
                        stack.clear()
                        advanced = True
                        break
                    if dist.get(nxt) == dist[u] + 1:
                        path.append((u, w))
                        stack.append((nxt, iter(g.neighbors(nxt))))
                        advanced = True
                        break
                if not advanced and stack:
                    dist[u] = inf
                    stack.pop()
                    if path:
                        path.pop()
    edges = frozenset((u, match[u]) for u in left if match[u] is not None)
    return Matching(edges)


def has_perfect_matching(g: BipartiteGraph) -> bool:
    if len(g.part_u) != len(g.part_w):
        return False
    return maximum_matching(g).size == len(g.part_u)


def is_robust(g: BipartiteGraph) -> bool:
    """Definitional check: every single-edge deletion leaves a perfect matching.

    Deleting an edge outside some fixed perfect matching trivially keeps that
    matching, so only the edges of one perfect matching are recomputed.
    """
    m = maximum_matching(g)
    if len(g.part_u) != len(g.part_w) or m.size != len(g.part_u):
        raise InfeasibleError("graph has no perfect matching")
    for e in sorted(m.edges):
        if not has_perfect_matching(g.remove_edges([e])):
            return False
    return True


def complement_edges(g: BipartiteGraph) -> frozenset:
    """All cross-part pairs that are not edges of ``g``."""
    return frozenset(
        (u, w) for u in g.part_u for w in g.part_w if (u, w) not in g.edges
    )


def max_matching_size_after_deletions(g: BipartiteGraph) -> int:
    """Smallest maximum-matching size over all single-edge deletions of ``g``."""
    base = maximum_matching(g)
    worst = base.size
    for e in sorted(base.edges):
        worst = min(worst, maximum_matching(g.remove_edges([e])).size)
    return worst
