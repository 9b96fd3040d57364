"""Strong-connectivity augmentation of digraphs.

``eswaran_tarjan`` adds max(#source components, #sink components) arcs to a
digraph that is not strongly connected; isolated components count as both a
source and a sink. ``reroute_to_sources_sinks`` turns any arc set that puts
every vertex on a cycle into one of no larger size whose arcs all run from a
sink component to a source component.
"""

from dataclasses import dataclass

from .auxdigraph import (
    Arc,
    Condensation,
    Digraph,
    all_components_nontrivial,
    condensation,
)
from .errors import InfeasibleError


@dataclass(frozen=True)
class AugmentationArcSet:
    """Added arcs, each tagged with its (tail component, head component)."""

    arcs: tuple
    component_arcs: tuple

    def __len__(self):
        return len(self.arcs)

    def __iter__(self):
        return iter(self.arcs)


def _pair_sources_with_sinks(dag: Digraph, sources: list, sinks: set) -> list:
    """Greedy source/sink pairing by marking depth-first search.

    Every source not in a pair reaches a paired sink and every sink not in a
    pair is reached from a paired source.
    """
    marked = set()
    pairs = []
    for s in sources:
        if s in marked:
            continue
        marked.add(s)
        stack = [(s, iter(dag.succ[s]))]
        found = None
        while stack and found is None:
            v, it = stack[-1]
            for x in it:
                if x in marked:
                    continue
                marked.add(x)
                if x in sinks:
                    found = x
                else:
                    stack.append((x, iter(dag.succ[x])))
                break
            else:
                stack.pop()
        if found is not None:
            pairs.append((s, found))
    return pairs


def _component_augmentation(dag: Digraph) -> list:
    """Eswaran-Tarjan on an acyclic digraph; returns arcs between its vertices."""
    if len(dag.vertices) <= 1:
        return []
    isolated = [v for v in dag.vertices if not dag.succ[v] and not dag.pred[v]]
    sources = [v for v in dag.sources if dag.succ[v]]
    sinks = [v for v in dag.sinks if dag.pred[v]]
    if len(sources) > len(sinks):
        # the construction assumes no more sources than sinks
        rev = dag.reversed()
        return [(b, a) for a, b in _augment_oriented(rev, sinks, sources, isolated)]
    return _augment_oriented(dag, sources, sinks, isolated)


def _augment_oriented(dag: Digraph, sources: list, sinks: list, isolated: list) -> list:
    if not sources:
        q = isolated
        return [(q[i], q[(i + 1) % len(q)]) for i in range(len(q))]

    sink_set = set(sinks)
    pairs = _pair_sources_with_sinks(dag, sources, sink_set)
    paired_sources = [s for s, _ in pairs]
    paired_sinks = [t for _, t in pairs]
    ps, pt = set(paired_sources), set(paired_sinks)
    rest_sources = [s for s in sources if s not in ps]
    rest_sinks = [t for t in sinks if t not in pt]
    p = len(pairs)

    arcs = []
    for i in range(p - 1):
        arcs.append((paired_sinks[i], paired_sources[i + 1]))
    for s, t in zip(rest_sources, rest_sinks):
        arcs.append((t, s))
    first = paired_sources[0]
    for t in rest_sinks[len(rest_sources):]:
        arcs.append((t, first))
    last = paired_sinks[-1]
    if isolated:
        arcs.append((last, isolated[0]))
        for i in range(len(isolated) - 1):
            arcs.append((isolated[i], isolated[i + 1]))
        arcs.append((isolated[-1], first))
    else:
        arcs.append((last, first))
    return arcs


def eswaran_tarjan(d: Digraph) -> AugmentationArcSet:
    """Minimum arc set making ``d`` strongly connected.

    Arcs connect component representatives (smallest member id) and always
    run from a sink component to a source component of the condensation.
    """
    cond = condensation(d)
    comp_arcs = _component_augmentation(cond.dag)
    comp_arcs = sorted(set(comp_arcs))
    arcs = tuple((cond.representative(a), cond.representative(b)) for a, b in comp_arcs)
    return AugmentationArcSet(arcs, tuple(comp_arcs))


def augmentation_lower_bound(d: Digraph) -> int:
    """max(#source components, #sink components), or 0 if strongly connected."""
    cond = condensation(d)
    if len(cond.dag.vertices) <= 1:
        return 0
    return max(len(cond.dag.sources), len(cond.dag.sinks))


def reroute_to_sources_sinks(d: Digraph, arcs) -> list:
    """Replace each arc v->w by (sink reachable from v) -> (source reaching w).

    The replacement never loses reachability, so every vertex that was on a
    cycle of ``d + arcs`` stays on one.
    """
    arcs = [tuple(a) for a in arcs]
    if not all_components_nontrivial(d.with_arcs(arcs)):
        raise InfeasibleError("arc set leaves some vertex outside every cycle")
    cond = condensation(d)
    dag = cond.dag
    sink_comps = set(dag.sinks)
    source_comps = set(dag.sources)
    out = []
    for v, w in arcs:
        cv, cw = cond.component_of[v], cond.component_of[w]
        if cv in sink_comps:
            v2 = v
        else:
            target = min(c for c in dag.reachable_from([cv]) if c in sink_comps)
            v2 = cond.representative(target)
        if cw in source_comps:
            w2 = w
        else:
            origin = min(c for c in dag.reaching([cw]) if c in source_comps)
            w2 = cond.representative(origin)
        if v2 != w2 and (v2, w2) not in out:
            out.append((v2, w2))
    return out


def is_sink_to_source(cond: Condensation, arc: Arc) -> bool:
    a, b = arc
    return (
        cond.component_of[a] in set(cond.dag.sinks)
        and cond.component_of[b] in set(cond.dag.sources)
    )
