"""Instance generators: hardness gadgets and seeded random families.

All generators are deterministic for a fixed seed. Generated bipartite
graphs use dense ids with the U part first.
"""

import random
from dataclasses import dataclass, field
from typing import Optional

from .augment import reroute_to_sources_sinks
from .auxdigraph import condensation
from .errors import InfeasibleError, InvalidInstanceError
from .graphs import AugmentationSolution, BipartiteGraph, Matching, complement_edges, maximum_matching
from .rma import RmaInstance
from .sourcecover import is_chordal_bipartite
from .weighted import WeightedRmaInstance

KINDS = (
    "setcover_gadget",
    "star_gadget",
    "path_gadget",
    "independent_edges",
    "random_matchable",
    "random_tree",
    "random_chordal_bipartite",
)


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0


def _relabel(part_u: list, part_w: list, edges, matched) -> tuple:
    """Dense ids in the given order, U part first."""
    ids = {v: i for i, v in enumerate(list(part_u) + list(part_w))}
    g = BipartiteGraph(
        [ids[v] for v in part_u],
        [ids[v] for v in part_w],
        [(ids[a], ids[b]) for a, b in edges],
    )
    m = Matching(frozenset(g.normalize(ids[a], ids[b]) for a, b in matched))
    return g, m, ids


# ---------------------------------------------------------------------------
# Set Cover gadget


@dataclass(frozen=True)
class SetCoverGadget:
    """Unit-cost instance encoding a Set Cover instance.

    ``cycle_of`` maps each set name to the ids of its cycle; ``sink`` is the
    U-vertex whose matching edge forms the unique sink component.
    """

    instance: RmaInstance
    items: tuple
    sets: dict
    cycle_of: dict
    sink: int

    def project(self, sol: AugmentationSolution) -> tuple:
        """Sets whose cycle receives an added arc after rerouting to sink-to-source form."""
        inst = self.instance
        aux = inst.aux
        partner = inst.matching.partner
        arcs = [(partner[w], u) for u, w in sol.added_edges]
        arcs = reroute_to_sources_sinks(aux.digraph, arcs)
        cond = condensation(aux.digraph)
        targeted = {cond.component_of[b] for _a, b in arcs}
        chosen = []
        for name, cycle in self.cycle_of.items():
            comps = {cond.component_of[v] for v in cycle if v in cond.component_of}
            if comps & targeted:
                chosen.append(name)
        return tuple(sorted(chosen))

    def is_cover(self, chosen) -> bool:
        covered = set()
        for s in chosen:
            covered |= set(self.sets[s])
        return covered >= set(self.items)


def setcover_to_rma(items, sets: dict) -> SetCoverGadget:
    """Max-degree-3 instance whose optimum equals the Set Cover optimum.

    Each set becomes a cycle of length 2d, d = max(2, largest set size);
    its j-th member (in sorted order) attaches to the (2j-1)-th cycle vertex.
    Each item is a matching edge joined to a common sink edge. An item in
    three or more sets is fed by a ring of matched pairs instead of direct
    edges; the sink edge collects the items through an alternating path.
    """
    items = tuple(sorted(set(items)))
    sets = {name: tuple(sorted(set(members))) for name, members in sets.items()}
    if not sets or not items:
        raise InvalidInstanceError("set cover instance needs items and a nonempty family")
    if any(not members for members in sets.values()):
        raise InvalidInstanceError("empty set in the family")
    if any(x not in items for members in sets.values() for x in members):
        raise InvalidInstanceError("set member is not an item")
    covered = {x for members in sets.values() for x in members}
    missing = [x for x in items if x not in covered]
    if missing:
        raise InfeasibleError(f"item {missing[0]} is in no set")

    d = max(2, max(len(m) for m in sets.values()))
    part_u, part_w, edges, matched = [], [], [], []
    cycle_labels = {}
    for name in sorted(sets):
        cyc = [("c", name, i) for i in range(1, 2 * d + 1)]
        cycle_labels[name] = cyc
        for i, v in enumerate(cyc, start=1):
            (part_w if i % 2 else part_u).append(v)
        for i in range(2 * d):
            edges.append((cyc[i], cyc[(i + 1) % (2 * d)]))
        for i in range(0, 2 * d, 2):
            matched.append((cyc[i], cyc[i + 1]))
    for x in items:
        part_u.append(("i1", x))
        part_w.append(("i2", x))
        matched.append((("i1", x), ("i2", x)))
    part_u.append(("t1",))
    part_w.append(("t2",))
    matched.append((("t1",), ("t2",)))
    edges += matched[-len(items) - 1:]

    members_of = {x: [] for x in items}
    for name in sorted(sets):
        for j, x in enumerate(sets[name]):
            members_of[x].append(cycle_labels[name][2 * j])

    # items in many sets: a ring of matched pairs, one strong component
    # reachable from every containing set, with the ring feeding u1
    for x in items:
        cyc_vertices = members_of[x]
        q = len(cyc_vertices)
        if q <= 2:
            edges += [(("i1", x), c) for c in cyc_vertices]
            continue
        ring_u = [("ru", x, i) for i in range(q)]
        ring_w = [("rw", x, i) for i in range(q)]
        part_u.extend(ring_u)
        part_w.extend(ring_w)
        for i in range(q):
            edges.append((ring_u[i], ring_w[i]))
            matched.append((ring_u[i], ring_w[i]))
            edges.append((ring_w[i], ring_u[(i + 1) % q]))
            edges.append((ring_u[i], cyc_vertices[i]))
        edges.append((ring_w[q - 1], ("i1", x)))

    # the sink collects every item: path of matched pairs ending in t1
    sink_in = [("i2", x) for x in items]
    if len(sink_in) <= 2:
        edges += [(("t1",), w) for w in sink_in]
    else:
        q = len(sink_in) + 1
        chain_u = [("su", i) for i in range(1, q)] + [("t1",)]
        chain_w = [("sw", i) for i in range(1, q)]
        part_u.extend(chain_u[:-1])
        part_w.extend(chain_w)
        for i in range(q - 1):
            edges.append((chain_u[i], chain_w[i]))
            matched.append((chain_u[i], chain_w[i]))
            edges.append((chain_w[i], chain_u[i + 1]))
            edges.append((sink_in[i], chain_u[i]))

    g, m, ids = _relabel(part_u, part_w, edges, matched)
    cycle_of = {name: tuple(ids[v] for v in cyc) for name, cyc in cycle_labels.items()}
    return SetCoverGadget(RmaInstance(g, m), items, sets, cycle_of, ids[("t1",)])


# ---------------------------------------------------------------------------
# weighted gadgets on independent edges


def _check_independent(base: WeightedRmaInstance) -> None:
    if base.graph.edges != base.matching.edges:
        raise InvalidInstanceError("base graph must consist of its matching edges only")
    if not base.matching.edges:
        raise InvalidInstanceError("base graph has no edges")


def _penalty(base: WeightedRmaInstance, n_vertices: int) -> int:
    top = max((base.cost(e) for e in base.complement()), default=1)
    return n_vertices * max(1, top)


@dataclass(frozen=True)
class Embedding:
    """A weighted instance containing a base instance on independent edges."""

    instance: WeightedRmaInstance
    base: WeightedRmaInstance
    free_edges: frozenset
    penalty: int

    def restrict(self, sol: AugmentationSolution) -> AugmentationSolution:
        """Base edges of an embedded solution."""
        verts = set(self.base.graph.vertices)
        kept = [e for e in sol.added_edges if e[0] in verts and e[1] in verts]
        return self.base.solution(kept)


def star_path_wrma(kind: str, base: WeightedRmaInstance) -> Embedding:
    """Embed a base instance on independent edges into a star or a path with pendants.

    ``star``: a new path v1 v2 v3 v4 (v1v2 and v3v4 matched) with v2 joined
    to every U vertex of the base; v1v4 is free. ``path``: the base U
    vertices alternate with new vertices v_i on a path, each v_i getting a
    matched pendant v'_i; v'_1 v_n and v_i v'_(i+1) are free. Every other
    new complement edge costs the penalty.
    """
    _check_independent(base)
    g0 = base.graph
    nxt = max(g0.vertices) + 1
    us = sorted(g0.part_u)
    if kind == "star":
        v1, v2, v3, v4 = range(nxt, nxt + 4)
        part_u = list(g0.part_u) + [v1, v3]
        part_w = list(g0.part_w) + [v2, v4]
        edges = list(g0.edges) + [(v1, v2), (v3, v2), (v3, v4)] + [(u, v2) for u in us]
        matched = set(base.matching.edges) | {(v1, v2), (v3, v4)}
        free = {(v1, v4)}
    elif kind == "path":
        n = len(us)
        vs = list(range(nxt, nxt + n))
        vps = list(range(nxt + n, nxt + 2 * n))
        part_u = list(g0.part_u) + vps
        part_w = list(g0.part_w) + vs
        edges = list(g0.edges)
        for i in range(n):
            edges.append((us[i], vs[i]))
            if i + 1 < n:
                edges.append((us[i], vs[i + 1]))
            edges.append((vps[i], vs[i]))
        matched = set(base.matching.edges) | {(vps[i], vs[i]) for i in range(n)}
        free = {(vps[0], vs[n - 1])} | {(vps[i + 1], vs[i]) for i in range(n - 1)}
        # a single pair closes the cycle onto its own pendant edge
        free -= set(edges)
    else:
        raise ValueError(f"unknown embedding kind {kind!r}")
    g = BipartiteGraph(part_u, part_w, edges)
    m = Matching(frozenset(matched))
    penalty = _penalty(base, len(g.vertices))
    costs = {e: base.cost(e) for e in base.complement()}
    for e in free:
        costs[e] = 0
    inst = WeightedRmaInstance(g, m, costs, penalty)
    return Embedding(inst, base, frozenset(free), penalty)


def rma_to_wrma_on_matching(inst: RmaInstance) -> WeightedRmaInstance:
    """Keep only the matching; former graph edges become free, all other pairs cost one."""
    g = inst.graph
    bare = BipartiteGraph(g.part_u, g.part_w, inst.matching.edges)
    costs = {e: 0 for e in g.edges - inst.matching.edges}
    return WeightedRmaInstance(bare, inst.matching, costs, 1)


# ---------------------------------------------------------------------------
# random families


def independent_edges(pairs: int) -> BipartiteGraph:
    return BipartiteGraph(range(pairs), range(pairs, 2 * pairs), [(i, pairs + i) for i in range(pairs)])


def random_matchable(n: int, p: float, rng: random.Random) -> BipartiteGraph:
    """Planted perfect matching on n/2 + n/2 vertices plus independent random edges."""
    if n % 2 or n <= 0:
        raise InvalidInstanceError("matchable graphs need a positive even vertex count")
    h = n // 2
    perm = list(range(h, n))
    rng.shuffle(perm)
    edges = {(u, perm[u]) for u in range(h)}
    for u in range(h):
        for w in range(h, n):
            if rng.random() < p:
                edges.add((u, w))
    return BipartiteGraph(range(h), range(h, n), edges)


def random_tree(n: int, rng: random.Random, max_leaves: Optional[int] = None, attempts: int = 1000) -> BipartiteGraph:
    """Perfectly matchable tree grown one matched pair at a time.

    Each new pair hangs off a random existing vertex, which keeps the
    matching perfect and unique. Rejection-samples the leaf budget.
    """
    if n % 2 or n <= 0:
        raise InvalidInstanceError("matchable trees need a positive even vertex count")
    if max_leaves is not None and max_leaves < 2 and n > 2:
        raise InvalidInstanceError("a tree with more than two vertices has at least two leaves")
    for _ in range(attempts):
        side = {0: "u", 1: "w"}
        edges = [(0, 1)]
        matched = [(0, 1)]
        for k in range(1, n // 2):
            a, b = 2 * k, 2 * k + 1
            x = rng.randrange(2 * k)
            # a attaches to x, so a takes the other side; b is a's pendant partner
            side[a] = "w" if side[x] == "u" else "u"
            side[b] = "u" if side[a] == "w" else "w"
            edges += [(x, a), (a, b)]
            matched.append((a, b))
        degree = {v: 0 for v in side}
        for a, b in edges:
            degree[a] += 1
            degree[b] += 1
        if max_leaves is not None and sum(1 for v in degree if degree[v] == 1) > max_leaves:
            continue
        part_u = [v for v in sorted(side) if side[v] == "u"]
        part_w = [v for v in sorted(side) if side[v] == "w"]
        g, _m, _ids = _relabel(part_u, part_w, edges, matched)
        return g
    raise InvalidInstanceError(f"no tree within {max_leaves} leaves after {attempts} attempts")


def random_chordal_bipartite(n: int, rng: random.Random, chords: int = 6) -> BipartiteGraph:
    """Matchable tree plus chords closing 4-cycles, kept only while chordal-bipartite."""
    g = random_tree(n, rng)
    for _ in range(chords):
        cands = [
            (u, w)
            for u, w in sorted(complement_edges(g))
            if any(g.has_edge(x, w) for y in g.neighbors(u) for x in g.neighbors(y))
        ]
        if not cands:
            break
        e = rng.choice(cands)
        trial = g.add_edges([e])
        if is_chordal_bipartite(trial):
            g = trial
    return g


def random_costs(g: BipartiteGraph, rng: random.Random, choices=(0, 1, 2, 3, 5)) -> dict:
    return {e: rng.choice(choices) for e in sorted(complement_edges(g))}


def random_set_family(rng: random.Random, n_items: int, n_sets: int) -> tuple:
    items = list(range(1, n_items + 1))
    sets = {}
    for j in range(1, n_sets + 1):
        size = rng.randint(1, n_items)
        sets[f"S{j}"] = sorted(rng.sample(items, size))
    covered = {x for s in sets.values() for x in s}
    for x in items:
        if x not in covered:
            sets[f"S{rng.randint(1, n_sets)}"].append(x)
    return items, {k: sorted(set(v)) for k, v in sets.items()}


def random_instance(spec: GeneratorSpec):
    """Instance of the requested kind; deterministic for a fixed spec."""
    rng = random.Random(spec.seed)
    p = dict(spec.params)
    kind = spec.kind
    if kind == "random_matchable":
        return random_matchable(int(p.get("n", 10)), float(p.get("p", 0.25)), rng)
    if kind == "random_tree":
        leaves = p.get("max_leaves")
        return random_tree(int(p.get("n", 10)), rng, None if leaves is None else int(leaves))
    if kind == "random_chordal_bipartite":
        return random_chordal_bipartite(int(p.get("n", 10)), rng, int(p.get("chords", 6)))
    if kind == "independent_edges":
        return independent_edges(int(p.get("n", 4)) // 2)
    if kind == "setcover_gadget":
        if "sets" in p:
            sets = {k: list(v) for k, v in p["sets"].items()}
            items = sorted({x for v in sets.values() for x in v})
        else:
            items, sets = random_set_family(rng, int(p.get("items", 4)), int(p.get("n_sets", 3)))
        return setcover_to_rma(items, sets)
    if kind in ("star_gadget", "path_gadget"):
        base_g = independent_edges(int(p.get("n", 4)) // 2)
        base = WeightedRmaInstance(base_g, maximum_matching(base_g), random_costs(base_g, rng, (1, 2, 3, 4, 6)))
        return star_path_wrma(kind.split("_")[0], base)
    raise ValueError(f"unknown generator kind {kind!r}")
