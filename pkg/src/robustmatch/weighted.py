"""Weighted robust matching augmentation.

Complement edges carry nonnegative costs. Included here: the two
reductions between this problem and Directed Steiner Forest, the
spanning-tree reduction, the exact pipeline for perfectly matchable trees
with few leaves, and desk-scale exact solvers used as oracles.
"""

import heapq
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .augment import eswaran_tarjan
from .auxdigraph import Digraph, build_aux_digraph, strongly_connected_components
from .errors import (
    InfeasibleError,
    InstanceTooLargeError,
    InvalidInstanceError,
    PreconditionError,
    RobustMatchError,
)
from .rma import _all_on_cycles
from .graphs import (
    AugmentationSolution,
    BipartiteGraph,
    Edge,
    Matching,
    complement_edges,
    maximum_matching,
)

DEFAULT_MAX_LEAVES = 6
DEFAULT_DSF_CAP = 48
DEFAULT_WRMA_CAP = 200
DEFAULT_MAX_POPS = 2_000_000


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class DSFInstance:
    """Directed Steiner Forest: connect every (source, target) pair at minimum arc cost."""

    digraph: Digraph
    arc_costs: dict
    pairs: tuple

    def __post_init__(self):
        vs = set(self.digraph.vertices)
        for s, t in self.pairs:
            if s not in vs or t not in vs:
                raise InvalidInstanceError(f"pair ({s}, {t}) uses an unknown vertex")
        for a, c in self.arc_costs.items():
            if a not in self.digraph.arcs:
                raise InvalidInstanceError(f"cost given for non-arc {a}")
            if c < 0:
                raise InvalidInstanceError(f"negative cost on arc {a}")

    def cost(self, arc) -> int:
        return self.arc_costs.get(tuple(arc), 0)

    def total_cost(self, arcs) -> int:
        return sum(self.cost(a) for a in set(map(tuple, arcs)))

    def is_feasible(self, arcs) -> bool:
        sub = Digraph(self.digraph.vertices, arcs)
        return all(t in sub.reachable_from([s]) for s, t in self.pairs)


def make_dsf(vertices, arc_costs: dict, pairs) -> DSFInstance:
    arc_costs = {tuple(a): c for a, c in arc_costs.items()}
    return DSFInstance(Digraph(vertices, arc_costs), arc_costs, tuple(map(tuple, pairs)))


@dataclass(frozen=True)
class WeightedRmaInstance:
    """Perfect matching plus costs on complement edges.

    ``costs`` overrides ``default_cost`` for individual complement edges,
    which are stored in ``(u, w)`` orientation.
    """

    graph: BipartiteGraph
    matching: Matching
    costs: dict = field(default_factory=dict)
    default_cost: int = 1

    def __post_init__(self):
        self.matching.check_against(self.graph, require_perfect=True)
        normalized = {}
        for e, c in self.costs.items():
            e = self.graph.normalize(*e)
            if e in self.graph.edges:
                raise InvalidInstanceError(f"cost given for graph edge {e}")
            if c < 0:
                raise InvalidInstanceError(f"negative cost on {e}")
            normalized[e] = c
        if self.default_cost < 0:
            raise InvalidInstanceError("negative default cost")
        object.__setattr__(self, "costs", normalized)

    def cost(self, e: Edge) -> int:
        return self.costs.get(self.graph.normalize(*e), self.default_cost)

    def total_cost(self, edges) -> int:
        return sum(self.cost(e) for e in {self.graph.normalize(*e) for e in edges})

    def complement(self) -> list:
        return sorted(complement_edges(self.graph))

    def solution(self, edges) -> AugmentationSolution:
        edges = frozenset(self.graph.normalize(*e) for e in edges)
        return AugmentationSolution(edges, self.total_cost(edges))

    def is_feasible(self, edges) -> bool:
        """Robustness check: every matching edge on an alternating cycle after adding ``edges``."""
        return _robust_with(self, [self.graph.normalize(*e) for e in edges])


def weighted_instance(g: BipartiteGraph, costs: Optional[dict] = None, m: Optional[Matching] = None,
                      default_cost: int = 1) -> WeightedRmaInstance:
    if m is None:
        m = maximum_matching(g)
        if not m.is_perfect_for(g):
            raise InfeasibleError("graph has no perfect matching")
    return WeightedRmaInstance(g, m, dict(costs or {}), default_cost)


def _robust_with(inst: WeightedRmaInstance, edges) -> bool:
    aux = build_aux_digraph(inst.graph, inst.matching)
    partner = inst.matching.partner
    extra = [(partner[w], u) for u, w in edges if partner[w] != u]
    d = aux.digraph.with_arcs(extra)
    return all(len(c) >= 2 for c in strongly_connected_components(d))


# ---------------------------------------------------------------------------
# exact solvers


def _dijkstra(n_succ: dict, source, weight) -> dict:
    dist = {source: 0}
    prev = {}
    heap = [(0, source)]
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist[v]:
            continue
        for x in n_succ[v]:
            w = weight(v, x)
            if w is None:
                continue
            nd = d + w
            if nd < dist.get(x, float("inf")):
                dist[x] = nd
                prev[x] = v
                heapq.heappush(heap, (nd, x))
    return dist, prev


def exact_dsf(inst: DSFInstance, cap: int = DEFAULT_DSF_CAP) -> tuple:
    """Minimum-cost DSF solution by branch-and-bound over positive-cost arcs.

    Zero-cost arcs are always taken. The bound is the current cost plus the
    largest remaining shortest-path distance over all pairs, where bought
    arcs cost nothing and undecided arcs their price. Branching buys or
    forbids the first undecided arc on that pair's shortest path.
    Returns ``(cost, arc set)``.
    """
    d = inst.digraph
    positive = sorted(a for a in d.arcs if inst.cost(a) > 0)
    if len(positive) > cap:
        raise InstanceTooLargeError(f"{len(positive)} priced arcs exceed the cap {cap}")
    free = frozenset(a for a in d.arcs if inst.cost(a) == 0)
    pairs = [p for p in inst.pairs if p[0] != p[1]]

    bought: set = set()
    banned: set = set()

    def weight(a, b):
        if (a, b) in free or (a, b) in bought:
            return 0
        if (a, b) in banned:
            return None
        return inst.cost((a, b))

    best_cost = float("inf")
    best_set = None

    def worst_pair():
        worst = None
        for s, t in pairs:
            dist, prev = _dijkstra(d.succ, s, weight)
            if t not in dist:
                return float("inf"), None
            if worst is None or dist[t] > worst[0]:
                worst = (dist[t], (s, t, prev))
        return worst if worst else (0, None)

    def search(cost: int):
        nonlocal best_cost, best_set
        gap, info = worst_pair()
        if cost + gap >= best_cost:
            return
        if gap == 0:
            best_cost = cost
            best_set = frozenset(bought)
            return
        s, t, prev = info
        path = []
        v = t
        while v != s:
            path.append((prev[v], v))
            v = prev[v]
        path.reverse()
        arc = next(a for a in path if a not in free and a not in bought)
        bought.add(arc)
        search(cost + inst.cost(arc))
        bought.discard(arc)
        banned.add(arc)
        search(cost)
        banned.discard(arc)

    search(0)
    if best_set is None:
        raise InfeasibleError("some terminal pair cannot be connected")
    return best_cost, frozenset(free | best_set)


def dsf_brute_force(inst: DSFInstance, cap: int = 16) -> tuple:
    """Cheapest subset of priced arcs (zero-cost arcs always included)."""
    positive = sorted(a for a in inst.digraph.arcs if inst.cost(a) > 0)
    if len(positive) > cap:
        raise InstanceTooLargeError(f"{len(positive)} priced arcs exceed the cap {cap}")
    free = [a for a in inst.digraph.arcs if inst.cost(a) == 0]
    best = None
    for mask in range(1 << len(positive)):
        chosen = [positive[i] for i in range(len(positive)) if mask >> i & 1]
        cost = sum(inst.cost(a) for a in chosen)
        if best is not None and cost >= best[0]:
            continue
        if inst.is_feasible(free + chosen):
            best = (cost, frozenset(free + chosen))
    if best is None:
        raise InfeasibleError("some terminal pair cannot be connected")
    return best


def _cheapest_subsets(costs: list):
    """Yield index tuples over items sorted by cost, in nondecreasing total cost."""
    order = sorted(range(len(costs)), key=lambda i: (costs[i], i))
    yield ()
    if not order:
        return
    heap = [(costs[order[0]], (0,))]
    while heap:
        total, picks = heapq.heappop(heap)
        yield tuple(order[p] for p in picks)
        last = picks[-1]
        if last + 1 < len(order):
            nxt = order[last + 1]
            heapq.heappush(heap, (total + costs[nxt], picks + (last + 1,)))
            heapq.heappush(heap, (total - costs[order[last]] + costs[nxt], picks[:-1] + (last + 1,)))


def wrma_brute_force(
    inst: WeightedRmaInstance,
    candidates: Optional[Iterable[Edge]] = None,
    cap: int = DEFAULT_WRMA_CAP,
    max_pops: int = DEFAULT_MAX_POPS,
) -> AugmentationSolution:
    """Exact optimum by enumerating priced edge sets in nondecreasing cost.

    Zero-cost edges are always added; robustness is monotone under adding
    edges, so this never hurts. ``candidates`` restricts the edge pool.
    """
    pool = sorted(inst.graph.normalize(*e) for e in (candidates if candidates is not None else inst.complement()))
    free = [e for e in pool if inst.cost(e) == 0]
    priced = [e for e in pool if inst.cost(e) > 0]
    if len(priced) > cap:
        raise InstanceTooLargeError(f"{len(priced)} priced edges exceed the cap {cap}")
    partner = inst.matching.partner
    aux = build_aux_digraph(inst.graph, inst.matching)
    verts = list(aux.digraph.vertices)
    idx = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    base = [0] * n
    for a, b in aux.digraph.arcs:
        base[idx[a]] |= 1 << idx[b]

    def arc_code(e):
        u, w = e
        tail = partner[w]
        return (idx[tail], 1 << idx[u]) if tail != u else None

    for e in free:
        code = arc_code(e)
        if code:
            base[code[0]] |= code[1]
    codes = [arc_code(e) for e in priced]

    def feasible(picks) -> bool:
        succ = list(base)
        for j in picks:
            if codes[j]:
                i, bit = codes[j]
                succ[i] |= bit
        return _all_on_cycles(n, succ)

    if not feasible(range(len(priced))):
        raise InfeasibleError("no set of candidate edges makes the matching robust")
    costs = [inst.cost(e) for e in priced]
    for pops, picks in enumerate(_cheapest_subsets(costs)):
        if pops > max_pops:
            raise InstanceTooLargeError("subset enumeration budget exhausted")
        if feasible(picks):
            return inst.solution(free + [priced[j] for j in picks])
    raise AssertionError("unreachable: the full candidate set is feasible")


# ---------------------------------------------------------------------------
# Directed Steiner Forest -> weighted augmentation


@dataclass(frozen=True)
class DsfGadget:
    """Weighted instance built from a DSF instance, with the arc/edge correspondence."""

    instance: WeightedRmaInstance
    dsf: DSFInstance
    edge_to_arc: dict
    arc_to_edge: dict
    copies: tuple
    penalty: int

    def arcs_of(self, edges) -> frozenset:
        """Original DSF arcs named by the arc-image edges among ``edges``."""
        out = set()
        for e in edges:
            e = self.instance.graph.normalize(*e)
            if e in self.edge_to_arc:
                out.add(self.edge_to_arc[e])
        return frozenset(out)

    def edges_of(self, arcs) -> frozenset:
        """Arc-image edges realizing a DSF solution, including the copied terminal arcs."""
        arcs = set(map(tuple, arcs))
        return frozenset(e for e, original in self.edge_to_arc.items() if original in arcs)


def dsf_to_wrma(inst: DSFInstance) -> DsfGadget:
    """Weighted instance whose optimum is meant to equal the DSF optimum.

    Each terminal target gets a private copy carrying copies of its
    in-arcs. Every vertex v becomes a matching edge u_v w_v; vertices other
    than the copies also get a 4-path u_v w'_v u'_v w_v whose middle edge is
    matched, which puts them on an alternating cycle. Each pair adds the
    edge u_s w_t' and the arc v -> v' becomes the complement edge w_v u_v'
    at the arc's cost. All other complement edges cost more than all arcs
    together.
    """
    d = inst.digraph
    pairs = [(s, t) for s, t in inst.pairs if s != t]
    nxt = max(d.vertices, default=-1) + 1
    copies = []
    work_arcs = {a: a for a in d.arcs}
    for s, t in pairs:
        c = nxt
        nxt += 1
        copies.append((s, t, c))
        for v in d.pred[t]:
            work_arcs[(v, c)] = (v, t)
    copy_ids = {c for _, _, c in copies}
    verts = list(d.vertices) + [c for _, _, c in copies]

    ids = iter(range(10 ** 9))
    u_of = {v: next(ids) for v in verts}
    w_of = {v: next(ids) for v in verts}
    gadget = [v for v in verts if v not in copy_ids]
    u2_of = {v: next(ids) for v in gadget}
    w2_of = {v: next(ids) for v in gadget}

    part_u = [u_of[v] for v in verts] + [u2_of[v] for v in gadget]
    part_w = [w_of[v] for v in verts] + [w2_of[v] for v in gadget]
    edges = [(u_of[v], w_of[v]) for v in verts]
    matched = list(edges)
    for v in gadget:
        edges += [(u_of[v], w2_of[v]), (u2_of[v], w2_of[v]), (u2_of[v], w_of[v])]
        matched.append((u2_of[v], w2_of[v]))
    for s, _t, c in copies:
        edges.append((u_of[s], w_of[c]))
    g = BipartiteGraph(part_u, part_w, edges)
    m = Matching(frozenset(matched))

    costs = {}
    edge_to_arc = {}
    arc_to_edge = {}
    for (a, b), original in sorted(work_arcs.items()):
        e = (u_of[b], w_of[a])
        costs[e] = inst.cost(original)
        edge_to_arc[e] = original
        arc_to_edge[(a, b)] = e
    penalty = 1 + sum(costs.values())
    wr = WeightedRmaInstance(g, m, costs, penalty)
    return DsfGadget(wr, inst, edge_to_arc, arc_to_edge, tuple(copies), penalty)


# ---------------------------------------------------------------------------
# weighted augmentation -> Directed Steiner Forest


@dataclass(frozen=True)
class WrmaDsf:
    dsf: DSFInstance
    instance: WeightedRmaInstance
    matching: Matching

    def edges_of(self, arcs) -> frozenset:
        """Complement edges named by W->U arcs of a DSF solution."""
        g = self.instance.graph
        out = set()
        for a, b in arcs:
            if g.in_w(a) and g.in_u(b) and not g.has_edge(b, a):
                out.add((b, a))
        return frozenset(out)


def wrma_to_dsf(inst: WeightedRmaInstance) -> WrmaDsf:
    """Matching edges become free U->W arcs, every other vertex pair a W->U arc.

    Graph edges are free; complement edges keep their cost. One pair
    (w, u) per matching edge uw asks for an alternating return path. The
    instance's own perfect matching already has zero cost with graph edges
    free, so it serves as the cost-minimal matching.
    """
    g = inst.graph
    m = inst.matching
    costs = {}
    for u, w in m.edges:
        costs[(u, w)] = 0
    for u in g.part_u:
        for w in g.part_w:
            if (u, w) in m.edges:
                continue
            costs[(w, u)] = 0 if (u, w) in g.edges else inst.cost((u, w))
    pairs = tuple(sorted((w, u) for u, w in m.edges))
    dsf = DSFInstance(Digraph(g.vertices, costs), costs, pairs)
    return WrmaDsf(dsf, inst, m)


def solve_wrma_via_dsf(inst: WeightedRmaInstance, cap: int = DEFAULT_DSF_CAP) -> AugmentationSolution:
    red = wrma_to_dsf(inst)
    _cost, arcs = exact_dsf(red.dsf, cap)
    return inst.solution(red.edges_of(arcs))


# ---------------------------------------------------------------------------
# trees


def is_tree(g: BipartiteGraph) -> bool:
    return g.is_connected() and len(g.edges) == len(g.vertices) - 1


def leaves(g: BipartiteGraph) -> list:
    return [v for v in g.vertices if g.degree(v) == 1]


@dataclass(frozen=True)
class TreeReduction:
    original: WeightedRmaInstance
    tree: WeightedRmaInstance
    removed: frozenset

    def lift(self, sol: AugmentationSolution) -> AugmentationSolution:
        """Drop the edges that already exist in the original graph."""
        kept = [e for e in sol.added_edges if e not in self.original.graph.edges]
        return self.original.solution(kept)


def spanning_tree_with_matching(g: BipartiteGraph, m: Matching) -> frozenset:
    """Kruskal with matching edges first, then the rest in sorted order."""
    parent = {v: v for v in g.vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    tree = set()
    for e in sorted(m.edges) + sorted(g.edges - m.edges):
        a, b = find(e[0]), find(e[1])
        if a != b:
            parent[a] = b
            tree.add(e)
    return frozenset(tree)


def reduce_to_tree(inst: WeightedRmaInstance) -> TreeReduction:
    """Spanning tree containing the matching; dropped graph edges become free complement edges."""
    g = inst.graph
    if not g.is_connected():
        raise InvalidInstanceError("graph must be connected")
    tree_edges = spanning_tree_with_matching(g, inst.matching)
    removed = g.edges - tree_edges
    t = BipartiteGraph(g.part_u, g.part_w, tree_edges)
    costs = dict(inst.costs)
    for e in removed:
        costs[e] = 0
    return TreeReduction(inst, WeightedRmaInstance(t, inst.matching, costs, inst.default_cost), frozenset(removed))


def shortcut_arcs(d: Digraph) -> list:
    """Arcs x->y with another directed x-y path."""
    out = []
    for x, y in sorted(d.arcs):
        seen = {x}
        stack = [z for z in d.succ[x] if z != y]
        seen.update(stack)
        found = False
        while stack and not found:
            v = stack.pop()
            for z in d.succ[v]:
                if z == y:
                    found = True
                    break
                if z not in seen:
                    seen.add(z)
                    stack.append(z)
        if found:
            out.append((x, y))
    return out


def useful_edges(inst: WeightedRmaInstance) -> frozenset:
    """Complement edges whose own arc is not a shortcut once added.

    The arc of uw runs from partner(w) to u, so uw is useful exactly when
    u is not already reachable from partner(w). Arcs of the graph itself
    may still become shortcuts; they cannot be removed, so they do not
    disqualify an edge.
    """
    aux = build_aux_digraph(inst.graph, inst.matching)
    partner = inst.matching.partner
    out = set()
    for u, w in inst.complement():
        tail = partner[w]
        if tail != u and u not in aux.digraph.reachable_from([tail]):
            out.add((u, w))
    return frozenset(out)


def tree_digraph(inst: WeightedRmaInstance, extra: Iterable[Edge] = ()) -> Digraph:
    """Matching edges directed U->W, other graph edges both ways, ``extra`` edges W->U."""
    g = inst.graph
    arcs = []
    for u, w in g.edges:
        arcs.append((u, w))
        if (u, w) not in inst.matching.edges:
            arcs.append((w, u))
    arcs += [(w, u) for u, w in (g.normalize(*e) for e in extra)]
    return Digraph(g.vertices, arcs)


def terminal_pairs(inst: WeightedRmaInstance) -> list:
    """One (W, U) pair per Eswaran-Tarjan arc of the auxiliary digraph.

    The arc u -> u' stands for the edge u' - partner(u); the pair asks for
    a path from partner(u) to u'.
    """
    aux = build_aux_digraph(inst.graph, inst.matching)
    partner = inst.matching.partner
    return [(partner[a], b) for a, b in eswaran_tarjan(aux.digraph).arcs]


@dataclass(frozen=True)
class TreePipeline:
    dsf: DSFInstance
    useful: frozenset
    pairs: tuple


def tree_pipeline(inst: WeightedRmaInstance, max_leaves: int = DEFAULT_MAX_LEAVES) -> TreePipeline:
    g = inst.graph
    if not is_tree(g):
        raise PreconditionError("graph is not a tree")
    n_leaves = len(leaves(g))
    if n_leaves > max_leaves:
        raise PreconditionError(f"tree has {n_leaves} leaves, more than the bound {max_leaves}")
    useful = useful_edges(inst)
    base = tree_digraph(inst)
    costs = {a: 0 for a in base.arcs}
    for u, w in useful:
        costs[(w, u)] = inst.cost((u, w))
    pairs = tuple(terminal_pairs(inst))
    dsf = DSFInstance(Digraph(g.vertices, costs), costs, pairs)
    return TreePipeline(dsf, useful, pairs)


def tree_wrma_relaxation(inst: WeightedRmaInstance, max_leaves: int = DEFAULT_MAX_LEAVES) -> AugmentationSolution:
    """Cheapest useful edge set connecting every terminal pair in the tree digraph.

    Every robust augmentation connects all pairs, so this never costs more
    than the optimum. It is not always robust itself: both-way non-matching
    arcs admit walks that are not alternating.
    """
    pipe = tree_pipeline(inst, max_leaves)
    _cost, arcs = exact_dsf(pipe.dsf)
    g = inst.graph
    chosen = [(b, a) for a, b in arcs if g.in_w(a) and g.in_u(b) and (b, a) in pipe.useful]
    return inst.solution(chosen)


def tree_wrma_solve(inst: WeightedRmaInstance, max_leaves: int = DEFAULT_MAX_LEAVES) -> AugmentationSolution:
    """Exact solver for perfectly matchable trees with at most ``max_leaves`` leaves.

    A robust relaxation result is optimal; otherwise the per-matching-edge
    Steiner forest reduction settles the instance exactly.
    """
    sol = tree_wrma_relaxation(inst, max_leaves)
    if inst.is_feasible(sol.added_edges):
        return sol
    return solve_wrma_via_dsf(inst)


def star_minor_size(inst: WeightedRmaInstance, v: int) -> Optional[int]:
    """r such that the neighbours of ``v`` plus their partners induce the star with r leaves and pendants.

    Returns None if the induced subgraph has some other shape.
    """
    g = inst.graph
    partner = inst.matching.partner
    nbrs = set(g.neighbors(v))
    x = nbrs | {partner[y] for y in nbrs}
    center_pendant = partner[v]
    arms = nbrs - {center_pendant}
    for y in arms:
        if set(g.neighbors(y)) & x != {v, partner[y]}:
            return None
        if set(g.neighbors(partner[y])) & x != {y}:
            return None
    if set(g.neighbors(center_pendant)) & x != {v}:
        return None
    return len(arms)


# ---------------------------------------------------------------------------
# dispatch


def solve_wrma(inst: WeightedRmaInstance, method: str = "auto", max_leaves: int = DEFAULT_MAX_LEAVES) -> AugmentationSolution:
    """``tree``, ``dsf`` (exact via the Steiner forest reduction), ``brute`` or ``auto``.

    ``auto`` takes the tree pipeline for matchable trees within the leaf
    bound and the exact Steiner forest route otherwise.
    """
    if method == "auto":
        g = inst.graph
        method = "tree" if is_tree(g) and len(leaves(g)) <= max_leaves else "dsf"
    if method == "tree":
        sol = tree_wrma_solve(inst, max_leaves)
    elif method == "dsf":
        sol = solve_wrma_via_dsf(inst)
    elif method == "brute":
        sol = wrma_brute_force(inst)
    else:
        raise ValueError(f"unknown weighted method {method!r}")
    if not inst.is_feasible(sol.added_edges):
        raise RobustMatchError("internal error: weighted solution is not robust")
    return sol
