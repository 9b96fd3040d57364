"""Source Cover: pick the fewest sources of a DAG so that every sink is reachable.

Solvers:

* ``greedy_source_cover`` flattens to Set Cover and runs the classical
  greedy (largest marginal coverage, ties to the smallest source id).
* ``exact_source_cover_oracle`` is a branch-and-bound used to certify the
  other solvers.
* ``chordal_bipartite_source_cover`` solves the flattened Set Cover instance
  exactly when its incidence matrix is totally balanced, using a doubly
  lexical ordering and the greedy for Gamma-free matrices.
* ``treewidth_source_cover`` goes through node-weighted directed Steiner
  tree and the tree decomposition dynamic program.
"""

from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Union

from .auxdigraph import Digraph, SetCoverInstance, flatten
from .errors import InfeasibleError, InstanceTooLargeError, InvalidInstanceError, PreconditionError
from .graphs import BipartiteGraph

DEFAULT_ORACLE_CAP = 25


@dataclass(frozen=True)
class SourceCoverInstance:
    """A weakly connected acyclic digraph with at least one arc."""

    dag: Digraph

    def __post_init__(self):
        d = self.dag
        if not d.arcs:
            raise InvalidInstanceError("source cover instance needs at least one arc")
        if len(d.weak_components()) != 1:
            raise InvalidInstanceError("source cover instance must be weakly connected")
        if not d.is_acyclic():
            raise InvalidInstanceError("source cover instance must be acyclic")
        # with weak connectivity and an arc, no vertex is both source and sink
        assert not set(d.sources) & set(d.sinks)

    @property
    def sources(self) -> tuple:
        return self.dag.sources

    @property
    def sinks(self) -> tuple:
        return self.dag.sinks

    def is_cover(self, chosen: Iterable[int]) -> bool:
        reach = self.dag.reachable_from(chosen)
        return all(t in reach for t in self.dag.sinks)


def greedy_set_cover(sc: SetCoverInstance) -> tuple:
    """Classical greedy; ties broken by the smallest set id."""
    missing = sc.uncovered_items()
    if missing:
        raise InfeasibleError(f"item {missing[0]} is not covered by any set")
    uncovered = set(sc.items)
    chosen = []
    order = sorted(sc.sets)
    while uncovered:
        best, gain = None, 0
        for s in order:
            g = len(sc.sets[s] & uncovered)
            if g > gain:
                best, gain = s, g
        chosen.append(best)
        uncovered -= sc.sets[best]
    return tuple(sorted(chosen))


def greedy_source_cover(sc: SourceCoverInstance) -> tuple:
    return greedy_set_cover(flatten(sc.dag))


def exact_set_cover(sc: SetCoverInstance, cap: int = DEFAULT_ORACLE_CAP) -> tuple:
    """Minimum-cardinality cover by branch-and-bound.

    Branches on the uncovered item with the fewest candidate sets; the
    greedy cover is the initial incumbent.
    """
    if len(sc.sets) > cap:
        raise InstanceTooLargeError(f"{len(sc.sets)} sets exceed the oracle cap {cap}")
    missing = sc.uncovered_items()
    if missing:
        raise InfeasibleError(f"item {missing[0]} is not covered by any set")
    items = list(sc.items)
    bit = {x: 1 << i for i, x in enumerate(items)}
    ids = sorted(sc.sets)
    masks = {s: sum(bit[x] for x in sc.sets[s]) for s in ids}
    full = (1 << len(items)) - 1
    containing = {x: [s for s in ids if masks[s] & bit[x]] for x in items}
    for x in items:
        containing[x].sort(key=lambda s: (-bin(masks[s]).count("1"), s))
    max_size = max((bin(m).count("1") for m in masks.values()), default=0)

    best = list(greedy_set_cover(sc))

    def search(covered: int, chosen: list):
        nonlocal best
        if covered == full:
            if len(chosen) < len(best):
                best = sorted(chosen)
            return
        remaining = bin(full & ~covered).count("1")
        if len(chosen) + -(-remaining // max_size) >= len(best):
            return
        pivot = None
        for x in items:
            if not covered & bit[x]:
                if pivot is None or len(containing[x]) < len(containing[pivot]):
                    pivot = x
        for s in containing[pivot]:
            chosen.append(s)
            search(covered | masks[s], chosen)
            chosen.pop()

    if items:
        search(0, [])
    else:
        best = []
    return tuple(sorted(best))


def exact_source_cover_oracle(sc: SourceCoverInstance, cap: int = DEFAULT_ORACLE_CAP) -> tuple:
    return exact_set_cover(flatten(sc.dag), cap)


# ---------------------------------------------------------------------------
# chordal-bipartite graphs and totally balanced matrices


def _adjacency(g) -> dict:
    if isinstance(g, BipartiteGraph):
        return {v: set(g.neighbors(v)) for v in g.vertices}
    if isinstance(g, Digraph):
        return g.underlying()
    return {v: set(ns) for v, ns in g.items()}


def two_coloring(adj: dict) -> Optional[dict]:
    """Proper 2-colouring of an undirected graph, or None if it has an odd cycle."""
    color = {}
    for start in sorted(adj):
        if start in color:
            continue
        color[start] = 0
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for x in adj[v]:
                if x not in color:
                    color[x] = 1 - color[v]
                    queue.append(x)
                elif color[x] == color[v]:
                    return None
    return color


def find_induced_cycle(
    g, min_length: int = 6, accept: Optional[Callable[[int], bool]] = None
) -> Optional[list]:
    """Exhaustive search for an induced cycle of length >= ``min_length``.

    ``accept`` can further restrict the admissible lengths. Exponential in
    the worst case; intended for small graphs and as a test oracle.
    """
    adj = _adjacency(g)
    order = {v: i for i, v in enumerate(sorted(adj))}

    def ok(length: int) -> bool:
        return length >= min_length and (accept is None or accept(length))

    for s in sorted(adj):
        rank = order[s]
        path = [s]
        on_path = {s}

        def extend() -> Optional[list]:
            last = path[-1]
            for x in sorted(adj[last]):
                if order[x] <= rank or x in on_path:
                    continue
                if any(x in adj[p] for p in path[1:-1]):
                    continue
                if len(path) >= 2 and s in adj[x]:
                    if ok(len(path) + 1):
                        return path + [x]
                    continue
                path.append(x)
                on_path.add(x)
                found = extend()
                path.pop()
                on_path.discard(x)
                if found:
                    return found
            return None

        found = extend()
        if found:
            return found
    return None


def doubly_lexical_ordering(rows: list, cols: list, entry: Callable) -> tuple:
    """Row and column orders in which both rows and columns are lexically non-increasing.

    Alternately sorts rows and columns until neither changes. Each sort
    strictly increases the matrix read column by column as a binary word,
    so the loop terminates. Ties keep the current relative order.
    """
    rows, cols = list(rows), list(cols)
    while True:
        new_rows = sorted(rows, key=lambda r: tuple(-entry(r, c) for c in cols))
        new_cols = sorted(cols, key=lambda c: tuple(-entry(r, c) for r in new_rows))
        if new_rows == rows and new_cols == cols:
            return rows, cols
        rows, cols = new_rows, new_cols


def find_gamma(rows: list, cols: list, entry: Callable) -> Optional[tuple]:
    """A submatrix [[1, 1], [1, 0]] on rows i<j and columns k<l, or None."""
    col_pos = {c: i for i, c in enumerate(cols)}
    ones = {r: sorted(col_pos[c] for c in cols if entry(r, c)) for r in rows}
    for a in range(len(rows)):
        ra = ones[rows[a]]
        set_a = set(ra)
        for b in range(a + 1, len(rows)):
            set_b = set(ones[rows[b]])
            common = set_a & set_b
            if not common:
                continue
            k = min(common)
            for l in ra:
                if l > k and l not in set_b:
                    return rows[a], rows[b], cols[k], cols[l]
    return None


def gamma_free_ordering(rows: list, cols: list, entry: Callable) -> tuple:
    """Doubly lexical ordering read backwards; Gamma-free iff the matrix is totally balanced."""
    r, c = doubly_lexical_ordering(rows, cols, entry)
    return r[::-1], c[::-1]


def is_chordal_bipartite(g) -> bool:
    """Bipartite with no induced cycle of length six or more.

    Uses the characterization by totally balanced biadjacency matrices: a
    doubly lexical ordering of the matrix is Gamma-free.
    """
    adj = _adjacency(g)
    color = two_coloring(adj)
    if color is None:
        return False
    left = sorted((v for v in adj if color[v] == 0))
    right = sorted((v for v in adj if color[v] == 1))
    entry = lambda r, c: 1 if c in adj[r] else 0  # noqa: E731
    rows, cols = gamma_free_ordering(left, right, entry)
    return find_gamma(rows, cols, entry) is None


def totally_balanced_set_cover(sc: SetCoverInstance) -> tuple:
    """Exact Set Cover for a totally balanced item/set incidence matrix.

    With items as rows and sets as columns in Gamma-free order, scanning
    the items in order and taking, for each uncovered item, the last set
    containing it is optimal.
    """
    missing = sc.uncovered_items()
    if missing:
        raise InfeasibleError(f"item {missing[0]} is not covered by any set")
    entry = lambda x, s: 1 if x in sc.sets[s] else 0  # noqa: E731
    rows, cols = gamma_free_ordering(sorted(sc.items), sorted(sc.sets), entry)
    witness = find_gamma(rows, cols, entry)
    if witness is not None:
        raise PreconditionError(f"incidence matrix is not totally balanced (witness {witness})")
    covered = set()
    chosen = []
    for x in rows:
        if x in covered:
            continue
        last = [s for s in cols if x in sc.sets[s]][-1]
        chosen.append(last)
        covered |= sc.sets[last]
    return tuple(sorted(chosen))


def chordal_bipartite_source_cover(sc: SourceCoverInstance, check_input: bool = True) -> tuple:
    """Optimal Source Cover on chordal-bipartite instances.

    With ``check_input`` the underlying undirected graph is verified to be
    chordal-bipartite; either way the flattened incidence matrix must pass
    the Gamma-free certificate or PreconditionError is raised.
    """
    if check_input and not is_chordal_bipartite(sc.dag):
        raise PreconditionError("underlying graph is not chordal-bipartite")
    return totally_balanced_set_cover(flatten(sc.dag))


def treewidth_source_cover(sc: SourceCoverInstance) -> tuple:
    """Optimal Source Cover via the node-weighted Steiner tree dynamic program."""
    from .steiner_tw import solve_nwdst_auto, source_cover_to_nwdst

    inst = source_cover_to_nwdst(sc)
    _cost, chosen = solve_nwdst_auto(inst)
    sources = set(sc.dag.sources)
    return tuple(sorted(v for v in chosen if v in sources))


SOLVERS = {
    "greedy": greedy_source_cover,
    "cb": chordal_bipartite_source_cover,
    "tw": treewidth_source_cover,
    "oracle": exact_source_cover_oracle,
}


def solve_source_cover(sc: Union[SourceCoverInstance, Digraph], method: str = "greedy") -> tuple:
    if isinstance(sc, Digraph):
        sc = SourceCoverInstance(sc)
    try:
        solver = SOLVERS[method]
    except KeyError:
        raise ValueError(f"unknown source cover method {method!r}") from None
    return solver(sc)
