"""Unit-cost robust matching augmentation.

The pipeline: build the auxiliary digraph, derive two Source Cover
instances (one per direction) whose optima bound the answer, solve them
with a chosen strategy, and turn the two covers into complement edges with
Eswaran-Tarjan on the part of the condensation they span.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Optional

from .augment import eswaran_tarjan, reroute_to_sources_sinks
from .auxdigraph import (
    AuxDigraph,
    Condensation,
    Digraph,
    build_aux_digraph,
    condensation,
    edge_for_arc,
)
from .errors import (
    InfeasibleError,
    InstanceTooLargeError,
    InvalidInstanceError,
    PreconditionError,
    RobustMatchError,
)
from .graphs import (
    AugmentationSolution,
    BipartiteGraph,
    Matching,
    complement_edges,
    is_robust,
    max_matching_size_after_deletions,
    maximum_matching,
)
from .sourcecover import (
    SourceCoverInstance,
    chordal_bipartite_source_cover,
    exact_source_cover_oracle,
    greedy_source_cover,
    is_chordal_bipartite,
    treewidth_source_cover,
)
from .steiner_tw import TreeDecomposition, tree_decomposition

DEFAULT_BRUTE_FORCE_CAP = 60
# auto falls back to greedy above this heuristic treewidth
AUTO_TREEWIDTH_CAP = 8


@dataclass(frozen=True)
class RmaInstance:
    graph: BipartiteGraph
    matching: Matching

    def __post_init__(self):
        self.matching.check_against(self.graph, require_perfect=True)

    @cached_property
    def aux(self) -> AuxDigraph:
        return build_aux_digraph(self.graph, self.matching)


def rma_instance(g: BipartiteGraph, m: Optional[Matching] = None) -> RmaInstance:
    """Instance on ``g``, computing a perfect matching when none is given."""
    if m is None:
        m = maximum_matching(g)
        if not m.is_perfect_for(g):
            raise InfeasibleError("graph has no perfect matching")
    return RmaInstance(g, m)


def solution_from_edges(edges) -> AugmentationSolution:
    edges = frozenset(edges)
    return AugmentationSolution(edges, len(edges))


def is_feasible(inst: RmaInstance, edges) -> bool:
    """Edges are complement edges and make the matching robust."""
    edges = [inst.graph.normalize(*e) for e in edges]
    if any(e in inst.graph.edges for e in edges):
        return False
    return is_robust(inst.graph.add_edges(edges))


# ---------------------------------------------------------------------------
# the two Source Cover instances


@dataclass(frozen=True)
class DecomposedInstances:
    """Both Source Cover sides on condensation component ids.

    ``a1`` keeps the components that reach a critical component without
    passing through one first; ``a2`` is the same on the reversed
    condensation. Both are empty when nothing is critical. Either side may
    be weakly disconnected; each weak component is covered separately.
    """

    aux: AuxDigraph
    condensation: Condensation
    critical_components: frozenset
    a1: Digraph
    a2: Digraph

    @property
    def critical_vertices(self) -> frozenset:
        return frozenset(min(self.condensation.members[c]) for c in self.critical_components)

    @property
    def is_empty(self) -> bool:
        return not self.critical_components


def _cover_side(dag: Digraph, critical: frozenset) -> Digraph:
    below = dag.reachable_from([y for x in critical for y in dag.succ[x]])
    rest = dag.induced(v for v in dag.vertices if v not in below)
    keep = rest.reaching([x for x in critical if x not in below])
    return dag.induced(keep)


def build_source_cover_instances(inst: RmaInstance) -> DecomposedInstances:
    """Components strictly below a critical component are dropped, then
    everything that cannot reach a remaining critical component.

    Every sink of the result is critical, so a source cover of it is
    exactly a set of condensation sources reaching all critical vertices.
    """
    cond = condensation(inst.aux.digraph)
    critical = frozenset(c for c in cond.dag.vertices if not cond.strong[c])
    if not critical:
        empty = Digraph(())
        return DecomposedInstances(inst.aux, cond, critical, empty, empty)
    a1 = _cover_side(cond.dag, critical)
    a2 = _cover_side(cond.dag.reversed(), critical)
    return DecomposedInstances(inst.aux, cond, critical, a1, a2)


def source_cover_parts(dag: Digraph) -> list:
    """Weak components of ``dag``: a SourceCoverInstance or a lone vertex id."""
    parts = []
    for comp in dag.weak_components():
        if len(comp) == 1:
            parts.append(comp[0])
        else:
            parts.append(SourceCoverInstance(dag.induced(comp)))
    return parts


def _cover_parts(dag: Digraph, solver) -> tuple:
    chosen = []
    for part in source_cover_parts(dag):
        if isinstance(part, SourceCoverInstance):
            chosen.extend(solver(part))
        else:
            chosen.append(part)
    return tuple(sorted(chosen))


def _is_cover(dag: Digraph, chosen) -> bool:
    chosen = set(chosen)
    if not chosen <= set(dag.sources):
        return False
    reach = dag.reachable_from(chosen)
    return all(t in reach for t in dag.sinks)


def _check_cover(dag: Digraph, chosen, name: str) -> None:
    if not _is_cover(dag, chosen):
        raise InvalidInstanceError(f"{name} is not a source cover of its instance")


# ---------------------------------------------------------------------------
# combining two covers


def combine_solutions(inst: RmaInstance, dec: DecomposedInstances, c1, c2) -> AugmentationSolution:
    """Complement edges of size max(|c1|, |c2|) making the matching robust.

    One exception: when the only critical vertex is isolated in the
    condensation, a single added arc would be a loop, so two arcs to and
    from another component are used instead.
    """
    c1, c2 = set(c1), set(c2)
    if dec.is_empty:
        return solution_from_edges(())
    _check_cover(dec.a1, c1, "first cover")
    _check_cover(dec.a2, c2, "second cover")
    cond = dec.condensation
    dag = cond.dag
    crit = dec.critical_components
    from_c1 = dag.reachable_from(c1) & dag.reaching(crit)
    to_c2 = dag.reachable_from(crit) & dag.reaching(c2)
    spanned = dag.induced(from_c1 | to_c2)

    if len(spanned.vertices) == 1:
        x = spanned.vertices[0]
        others = [c for c in dag.vertices if c != x]
        if not others:
            raise InfeasibleError("a single matching edge cannot be made robust")
        comp_arcs = [(x, others[0]), (others[0], x)]
    else:
        comp_arcs = list(eswaran_tarjan(spanned).arcs)

    aux = dec.aux
    sinks, sources = set(dag.sinks), set(dag.sources)
    edges = set()
    for a, b in comp_arcs:
        assert a in sinks and b in sources, "lifted arc must run from a sink to a source"
        arc = (cond.representative(a), cond.representative(b))
        assert not aux.digraph.has_arc(*arc)
        edges.add(edge_for_arc(aux, arc))
    return solution_from_edges(edges)


# ---------------------------------------------------------------------------
# strategies


def _cb_cover(sc):
    # the chordal-bipartite check is done once on the input graph; the
    # Gamma-free certificate still guards each part
    return chordal_bipartite_source_cover(sc, check_input=False)


COVER_SOLVERS = {
    "greedy": greedy_source_cover,
    "cb": _cb_cover,
    "tw": treewidth_source_cover,
    "oracle": exact_source_cover_oracle,
}

STRATEGY_ALIASES = {
    "chordal_bipartite": "cb",
    "chordal-bipartite": "cb",
    "treewidth": "tw",
}

STRATEGIES = ("greedy", "cb", "tw", "oracle", "brute", "auto")


def canonical_strategy(name: str) -> str:
    name = STRATEGY_ALIASES.get(name, name)
    if name not in STRATEGIES:
        raise ValueError(f"unknown strategy {name!r}")
    return name


def solve_covers(dec: DecomposedInstances, method: str) -> tuple:
    solver = COVER_SOLVERS[method]
    if dec.is_empty:
        return (), ()
    return _cover_parts(dec.a1, solver), _cover_parts(dec.a2, solver)


def auto_strategy(inst: RmaInstance, width_cap: int = AUTO_TREEWIDTH_CAP) -> str:
    """``cb`` on chordal-bipartite graphs, ``tw`` when the auxiliary digraph has small heuristic width, else ``greedy``."""
    if is_chordal_bipartite(inst.graph):
        return "cb"
    width = tree_decomposition(inst.aux.digraph.underlying()).width
    return "tw" if width <= width_cap else "greedy"


def solve_rma(inst: RmaInstance, strategy: str = "greedy") -> AugmentationSolution:
    """Solve with the given strategy and re-verify robustness of the result.

    ``greedy`` approximates within log2(n); ``cb`` (chordal-bipartite input
    only), ``tw`` and ``oracle`` are exact; ``brute`` searches edge subsets
    directly; ``auto`` is resolved by :func:`auto_strategy`.
    """
    strategy = canonical_strategy(strategy)
    if strategy == "auto":
        strategy = auto_strategy(inst)
    if strategy == "cb" and not is_chordal_bipartite(inst.graph):
        raise PreconditionError("graph is not chordal-bipartite")
    if strategy == "brute":
        sol = rma_brute_force(inst)
    else:
        dec = build_source_cover_instances(inst)
        c1, c2 = solve_covers(dec, strategy)
        sol = combine_solutions(inst, dec, c1, c2)
    if not is_feasible(inst, sol.added_edges):
        raise RobustMatchError("internal error: augmented graph is not robust")
    return sol


def cover_bound(inst: RmaInstance, method: str = "oracle") -> int:
    """max of the two cover sizes, with the isolated single-critical-vertex case raised to two."""
    dec = build_source_cover_instances(inst)
    if dec.is_empty:
        return 0
    c1, c2 = solve_covers(dec, method)
    value = max(len(c1), len(c2))
    dag = dec.condensation.dag
    if len(dec.critical_components) == 1:
        (x,) = dec.critical_components
        if not dag.succ[x] and not dag.pred[x] and len(dag.vertices) > 1:
            value = 2
    return value


def greedy_ratio_bound(inst: RmaInstance) -> float:
    n = len(inst.graph.vertices)
    return math.log2(n) if n > 1 else 1.0


# ---------------------------------------------------------------------------
# brute force


def _closure_masks(n: int, succ_masks: list) -> list:
    reach = list(succ_masks)
    changed = True
    while changed:
        changed = False
        for i in range(n):
            m = reach[i]
            acc = m
            bits = m
            while bits:
                low = bits & -bits
                acc |= reach[low.bit_length() - 1]
                bits ^= low
            if acc != m:
                reach[i] = acc
                changed = True
    return reach


def _all_on_cycles(n: int, succ_masks: list) -> bool:
    reach = _closure_masks(n, succ_masks)
    return all(reach[i] >> i & 1 for i in range(n))


def candidate_arcs(inst: RmaInstance, restricted: bool = True) -> list:
    """Arcs whose edges may appear in an optimum.

    Restricted to sink-component to source-component arcs by default;
    otherwise every vertex pair that is not an arc.
    """
    d = inst.aux.digraph
    if restricted:
        cond = condensation(d)
        sink_v = [v for c in cond.dag.sinks for v in sorted(cond.members[c])]
        source_v = [v for c in cond.dag.sources for v in sorted(cond.members[c])]
        pairs = [
            (a, b)
            for a in sink_v
            for b in source_v
            if cond.component_of[a] != cond.component_of[b]
        ]
    else:
        pairs = [(a, b) for a in d.vertices for b in d.vertices if a != b]
    return [p for p in pairs if not d.has_arc(*p)]


def rma_brute_force(
    inst: RmaInstance, restricted: bool = True, cap: int = DEFAULT_BRUTE_FORCE_CAP
) -> AugmentationSolution:
    """Minimum-cardinality augmentation by cardinality-ordered subset search."""
    d = inst.aux.digraph
    verts = list(d.vertices)
    idx = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    base = [0] * n
    for a, b in d.arcs:
        base[idx[a]] |= 1 << idx[b]
    if _all_on_cycles(n, base):
        return solution_from_edges(())
    cands = candidate_arcs(inst, restricted)
    if len(cands) > cap:
        raise InstanceTooLargeError(f"{len(cands)} candidate edges exceed the cap {cap}")
    coded = [(idx[a], 1 << idx[b]) for a, b in cands]
    for k in range(1, len(cands) + 1):
        for combo in combinations(range(len(cands)), k):
            succ = list(base)
            for j in combo:
                i, bit = coded[j]
                succ[i] |= bit
            if _all_on_cycles(n, succ):
                return solution_from_edges(edge_for_arc(inst.aux, cands[j]) for j in combo)
    raise InfeasibleError("no set of complement edges makes the matching robust")


# ---------------------------------------------------------------------------
# size-k variant


def is_k_robust(g: BipartiteGraph, k: int) -> bool:
    """Every single-edge deletion leaves a matching of size ``k``."""
    return max_matching_size_after_deletions(g) >= k


@dataclass(frozen=True)
class KReduction:
    """Size-k instance turned into a perfect-matching instance.

    ``direct`` holds the answer when no reduction is needed. Otherwise
    ``instance`` is the reduced instance and :meth:`back_map` converts its
    solutions. With ``swapped`` set, the reduced instance uses the parts of
    ``graph`` in exchanged roles.
    """

    graph: BipartiteGraph
    k: int
    instance: Optional[RmaInstance] = None
    direct: Optional[AugmentationSolution] = None
    swapped: bool = False
    leaves: dict = field(default_factory=dict)
    hub: Optional[int] = None
    hub_partner: Optional[int] = None

    @property
    def exposed(self) -> tuple:
        return tuple(sorted(self.leaves))

    def back_map(self, sol: AugmentationSolution) -> AugmentationSolution:
        if self.direct is not None:
            return self.direct
        if self.hub is None:
            return sol
        inst = self.instance
        d = inst.aux.digraph
        arcs = [
            (inst.matching.partner[w], u)
            for u, w in (inst.graph.normalize(*e) for e in sol.added_edges)
        ]
        arcs = reroute_to_sources_sinks(d, arcs)
        cond = condensation(d)
        sources = set(cond.dag.sources)
        target = self.exposed[0]
        edges = set()
        for _tail, head in arcs:
            comp = cond.component_of[head]
            if comp not in sources:
                continue
            u = min(cond.members[comp])
            edges.add(self.graph.normalize(u, target))
        return solution_from_edges(edges)

    def lift_decomposition(self, td: TreeDecomposition) -> TreeDecomposition:
        """Decomposition of the reduced graph: hub vertices join every bag, leaves get their own bag."""
        if self.hub is None:
            return td
        extra = {self.hub, self.hub_partner}
        bags = {x: frozenset(b | extra) for x, b in td.bags.items()}
        tree = {x: set(ys) for x, ys in td.tree.items()}
        nxt = max(bags) + 1
        for w, leaf in sorted(self.leaves.items()):
            host = min(x for x, b in td.bags.items() if w in b)
            bags[nxt] = frozenset({w, leaf} | extra)
            tree[nxt] = {host}
            tree[host].add(nxt)
            nxt += 1
        return TreeDecomposition(bags, tree)


def k_rma_reduce(g: BipartiteGraph, k: int) -> KReduction:
    """Reduce the size-k problem on ``g`` to the perfect-matching problem.

    When a maximum matching is smaller than the requested size the input is
    rejected. A larger maximum matching, or exposed vertices on both sides,
    settle the answer directly. A perfect maximum matching is passed through
    unchanged.
    """
    m = maximum_matching(g)
    if k > m.size:
        raise InvalidInstanceError(f"k = {k} exceeds the maximum matching size {m.size}")
    if k < m.size or k <= 0:
        return KReduction(g, k, direct=solution_from_edges(()))
    exposed_u = sorted(u for u in g.part_u if not m.covers(u))
    exposed_w = sorted(w for w in g.part_w if not m.covers(w))
    if not exposed_u and not exposed_w:
        return KReduction(g, k, instance=RmaInstance(g, m))
    if exposed_u and exposed_w:
        if is_k_robust(g, k):
            return KReduction(g, k, direct=solution_from_edges(()))
        edge = (exposed_u[0], exposed_w[0])
        return KReduction(g, k, direct=solution_from_edges([edge]))

    swapped = bool(exposed_u)
    work = g.swapped() if swapped else g
    exposed = exposed_u if swapped else exposed_w
    nxt = max(g.vertices) + 1
    leaves = {}
    for w in exposed:
        leaves[w] = nxt
        nxt += 1
    hub, hub_partner = nxt, nxt + 1
    part_u = work.part_u + tuple(leaves.values()) + (hub,)
    part_w = work.part_w + (hub_partner,)
    edges = list(work.edges)
    edges += [(leaf, w) for w, leaf in leaves.items()]
    edges += [(hub, w) for w in work.part_w] + [(hub, hub_partner)]
    edges += [(leaf, hub_partner) for leaf in leaves.values()]
    g2 = BipartiteGraph(part_u, part_w, edges)
    m2 = Matching(
        frozenset(g2.normalize(a, b) for a, b in m.edges)
        | {(leaf, w) for w, leaf in leaves.items()}
        | {(hub, hub_partner)}
    )
    return KReduction(g, k, RmaInstance(g2, m2), None, swapped, leaves, hub, hub_partner)


def solve_k_rma(g: BipartiteGraph, k: int, strategy: str = "greedy") -> AugmentationSolution:
    red = k_rma_reduce(g, k)
    if red.direct is not None:
        return red.direct
    sol = red.back_map(solve_rma(red.instance, strategy))
    if not is_k_robust(g.add_edges(sol.added_edges), k):
        raise RobustMatchError("internal error: size-k augmentation is not robust")
    return sol


def k_rma_brute_force(g: BipartiteGraph, k: int, cap: int = 24) -> AugmentationSolution:
    """Smallest complement edge set after which every deletion leaves a size-k matching."""
    if maximum_matching(g).size < k:
        raise InvalidInstanceError(f"no matching of size {k}")
    cands = sorted(complement_edges(g))
    if len(cands) > cap:
        raise InstanceTooLargeError(f"{len(cands)} complement edges exceed the cap {cap}")
    for size in range(len(cands) + 1):
        for combo in combinations(cands, size):
            if is_k_robust(g.add_edges(combo), k):
                return solution_from_edges(combo)
    raise InfeasibleError("no augmentation reaches the requested robustness")
