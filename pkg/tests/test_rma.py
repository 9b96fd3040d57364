import math
import random

import pytest

from helpers import definitional_min_augmentation, figure_one, four_cycle, graph, random_planted, two_disjoint_edges
from robustmatch.auxdigraph import build_aux_digraph
from robustmatch.errors import InfeasibleError, InstanceTooLargeError, InvalidInstanceError, PreconditionError
from robustmatch.gen import random_chordal_bipartite
from robustmatch.graphs import BipartiteGraph, complement_edges, is_robust, maximum_matching
from robustmatch.rma import (
    RmaInstance,
    auto_strategy,
    build_source_cover_instances,
    combine_solutions,
    is_feasible,
    is_k_robust,
    k_rma_brute_force,
    k_rma_reduce,
    rma_brute_force,
    rma_instance,
    solve_covers,
    solve_k_rma,
    solve_rma,
    cover_bound,
)
from robustmatch.sourcecover import find_induced_cycle, is_chordal_bipartite
from robustmatch.steiner_tw import is_valid_decomposition, tree_decomposition

EXACT = ("oracle", "tw", "brute")


def random_instances(seed: int, count: int, max_pairs: int = 7):
    rng = random.Random(seed)
    for _ in range(count):
        g = random_planted(rng, rng.randint(1, max_pairs), rng.choice([0.1, 0.2, 0.35]))
        yield g


def path_pair():
    """u1 w1 u2 w2 with the middle edge w1u2; the single fix is w2u1."""
    return graph(2, 2, [(0, 2), (1, 3), (1, 2)])


def test_robust_input_gives_empty_instances():
    inst = rma_instance(four_cycle())
    dec = build_source_cover_instances(inst)
    assert dec.is_empty and not dec.a1.vertices and not dec.a2.vertices
    for s in ("greedy", "cb", "tw", "oracle", "brute", "auto"):
        assert solve_rma(inst, s).size == 0


def test_two_disjoint_edges_need_two():
    inst = rma_instance(two_disjoint_edges())
    dec = build_source_cover_instances(inst)
    assert len(dec.a1.vertices) == 2 and not dec.a1.arcs
    c1, c2 = solve_covers(dec, "oracle")
    assert len(c1) == len(c2) == 2
    sol = combine_solutions(inst, dec, c1, c2)
    assert sol.added_edges == {(0, 3), (1, 2)}
    for s in ("greedy", "cb", "tw", "oracle", "brute"):
        assert solve_rma(inst, s).size == 2


def test_brute_force_examples():
    assert rma_brute_force(rma_instance(path_pair())).added_edges == {(0, 3)}
    assert rma_brute_force(rma_instance(four_cycle())).size == 0
    assert rma_brute_force(rma_instance(two_disjoint_edges())).size == 2


def test_figure_one_solution_has_size_two_and_dotted_edges_work():
    g, m, added = figure_one()
    inst = RmaInstance(g, m)
    sol = solve_rma(inst, "oracle")
    assert sol.size == 2 and is_robust(g.add_edges(sol.added_edges))
    assert is_feasible(inst, added)
    assert rma_brute_force(inst).size == 2


def test_single_matching_edge_is_infeasible():
    with pytest.raises(InfeasibleError):
        solve_rma(rma_instance(graph(1, 1, [(0, 1)])), "oracle")


def test_isolated_critical_component_needs_two_edges():
    # a robust 4-cycle next to one lone matching edge
    g = graph(3, 3, [(0, 3), (0, 4), (1, 3), (1, 4), (2, 5)])
    inst = rma_instance(g)
    dec = build_source_cover_instances(inst)
    c1, c2 = solve_covers(dec, "oracle")
    assert max(len(c1), len(c2)) == 1
    assert cover_bound(inst) == 2 == rma_brute_force(inst).size == definitional_min_augmentation(g)
    assert solve_rma(inst, "oracle").size == 2


def test_combine_rejects_non_covers():
    inst = rma_instance(two_disjoint_edges())
    dec = build_source_cover_instances(inst)
    with pytest.raises(InvalidInstanceError):
        combine_solutions(inst, dec, [0], [0, 1])


def test_cb_strategy_requires_chordal_bipartite_graph():
    c6 = graph(3, 3, [(0, 3), (1, 4), (2, 5), (0, 4), (1, 5), (2, 3)])
    # a six-cycle through a perfect matching plus one pendant pair
    g = BipartiteGraph(range(4), range(4, 8), [(0, 4), (1, 5), (2, 6), (0, 5), (1, 6), (2, 4), (3, 7), (3, 6)])
    assert not is_chordal_bipartite(c6)
    with pytest.raises(PreconditionError):
        solve_rma(rma_instance(g), "cb")
    with pytest.raises(ValueError):
        solve_rma(rma_instance(g), "nope")


def test_auto_strategy_choice():
    assert auto_strategy(rma_instance(four_cycle())) == "cb"
    c6_plus = BipartiteGraph(range(3), range(3, 6), [(0, 3), (1, 4), (2, 5), (0, 4), (1, 5), (2, 3)])
    assert auto_strategy(rma_instance(c6_plus)) == "tw"
    assert auto_strategy(rma_instance(c6_plus), width_cap=0) == "greedy"


def test_brute_force_size_guard():
    g = graph(6, 6, [(i, 6 + i) for i in range(6)])
    with pytest.raises(InstanceTooLargeError):
        rma_brute_force(rma_instance(g), cap=5)


def test_cover_bound_exactness_against_definition():
    checked = 0
    for g in random_instances(31, 200, max_pairs=4):
        if len(complement_edges(g)) > 12:
            continue
        expected = definitional_min_augmentation(g)
        inst = rma_instance(g)
        if expected is None:
            with pytest.raises(InfeasibleError):
                solve_rma(inst, "oracle")
            continue
        assert cover_bound(inst) == expected
        for s in EXACT:
            sol = solve_rma(inst, s)
            assert sol.size == expected
            assert is_robust(g.add_edges(sol.added_edges))
        checked += 1
    assert checked > 100


def test_cover_bound_exactness_against_brute_force_larger():
    for g in random_instances(32, 150):
        inst = rma_instance(g)
        try:
            opt = rma_brute_force(inst).size
        except (InfeasibleError, InstanceTooLargeError):
            continue
        assert cover_bound(inst) == opt
        dec = build_source_cover_instances(inst)
        c1, c2 = solve_covers(dec, "oracle")
        sol = combine_solutions(inst, dec, c1, c2)
        assert is_feasible(inst, sol.added_edges)
        assert sol.size == opt


def test_greedy_ratio_and_feasibility():
    for g in random_instances(33, 200):
        inst = rma_instance(g)
        try:
            opt = solve_rma(inst, "oracle").size
        except InfeasibleError:
            continue
        greedy = solve_rma(inst, "greedy")
        assert is_robust(g.add_edges(greedy.added_edges))
        n = len(g.vertices)
        assert opt <= greedy.size <= max(1.0, math.log2(n)) * opt


def test_restricted_search_equals_unrestricted():
    for g in random_instances(34, 120, max_pairs=4):
        inst = rma_instance(g)
        try:
            restricted = rma_brute_force(inst).size
        except InfeasibleError:
            continue
        assert restricted == rma_brute_force(inst, restricted=False).size


def test_chordal_bipartite_strategy_is_exact():
    rng = random.Random(36)
    checked = 0
    for _ in range(150):
        g = random_chordal_bipartite(2 * rng.randint(2, 7), rng, chords=rng.randint(0, 8))
        try:
            inst = rma_instance(g)
            opt = solve_rma(inst, "oracle").size
        except InfeasibleError:
            continue
        assert solve_rma(inst, "cb").size == opt
        checked += 1
    assert checked >= 100


def test_a_sides_are_induced_minors_by_reachability():
    # every A-side vertex is a condensation component, and arcs come from the condensation
    for g in random_instances(37, 100):
        inst = rma_instance(g)
        dec = build_source_cover_instances(inst)
        dag = dec.condensation.dag
        for side, ref in ((dec.a1, dag), (dec.a2, dag.reversed())):
            assert set(side.vertices) <= set(ref.vertices)
            assert side.arcs == {a for a in ref.arcs if a[0] in side.vertices and a[1] in side.vertices}
            assert set(side.sinks) <= dec.critical_components


# ---------------------------------------------------------------------------
# size-k variant


def random_small_bipartite(rng):
    nu, nw = rng.randint(1, 4), rng.randint(1, 4)
    return graph(nu, nw, [(u, nu + w) for u in range(nu) for w in range(nw) if rng.random() < 0.45])


def test_k_reduction_rejects_large_k():
    with pytest.raises(InvalidInstanceError):
        k_rma_reduce(two_disjoint_edges(), 3)


def test_k_below_maximum_is_free():
    g = two_disjoint_edges()
    red = k_rma_reduce(g, 1)
    assert red.direct is not None and red.direct.size == 0
    assert is_k_robust(g, 1)


def test_k_reduction_perfect_matching_is_identity():
    g = graph(1, 1, [(0, 1)])
    red = k_rma_reduce(g, 1)
    assert red.instance.graph == g and red.hub is None
    with pytest.raises(InfeasibleError):
        solve_k_rma(g, 1, "oracle")
    with pytest.raises(InfeasibleError):
        k_rma_brute_force(g, 1)


def test_k_reduction_exposed_on_both_sides_answers_directly():
    g = graph(2, 2, [(0, 2)])
    red = k_rma_reduce(g, 1)
    assert red.instance is None and red.direct.added_edges == {(1, 3)}
    assert k_rma_brute_force(g, 1).size == 1


def test_k_reduction_one_side_exposed_shape():
    # star with centre in U: one U vertex, two W vertices
    g = graph(1, 2, [(0, 1), (0, 2)])
    red = k_rma_reduce(g, 1)
    assert red.swapped is False and len(red.leaves) == 1
    g2, m2 = red.instance.graph, red.instance.matching
    assert len(g2.vertices) == len(g.vertices) + 3
    assert (red.hub, red.hub_partner) in m2.edges
    assert m2.is_perfect_for(g2)


def test_k_reduction_preserves_optimum_by_double_brute_force():
    rng = random.Random(41)
    checked = 0
    for _ in range(400):
        g = random_small_bipartite(rng)
        k = maximum_matching(g).size
        if k == 0:
            continue
        try:
            expected = k_rma_brute_force(g, k).size
        except InfeasibleError:
            expected = None
        red = k_rma_reduce(g, k)
        if red.direct is not None:
            assert red.direct.size == expected
        else:
            try:
                reduced = rma_brute_force(red.instance).size
            except InfeasibleError:
                reduced = None
            assert reduced == expected
        if expected is not None:
            sol = solve_k_rma(g, k, "oracle")
            assert sol.size == expected
            assert is_k_robust(g.add_edges(sol.added_edges), k)
        checked += 1
    assert checked >= 100


def test_k_reduction_lifted_decomposition_width():
    rng = random.Random(42)
    for _ in range(200):
        g = random_small_bipartite(rng)
        k = maximum_matching(g).size
        if k == 0:
            continue
        red = k_rma_reduce(g, k)
        if red.instance is None:
            continue
        work = g.swapped() if red.swapped else g
        adj = {v: set(work.neighbors(v)) for v in work.vertices}
        td = tree_decomposition(adj)
        lifted = red.lift_decomposition(td)
        g2 = red.instance.graph
        adj2 = {v: set(g2.neighbors(v)) for v in g2.vertices}
        assert is_valid_decomposition(adj2, lifted)
        assert lifted.width <= max(td.width, 1) + 2


def test_k_reduction_keeps_aux_digraph_chordal_for_chordal_input():
    rng = random.Random(43)
    checked = 0
    for _ in range(300):
        n = rng.randint(3, 9)
        g = random_chordal_bipartite(n + (n % 2), rng, chords=rng.randint(0, 6))
        # drop a vertex so the maximum matching leaves something exposed
        drop = rng.choice(g.vertices)
        keep_u = [u for u in g.part_u if u != drop]
        keep_w = [w for w in g.part_w if w != drop]
        if not keep_u or not keep_w:
            continue
        h = BipartiteGraph(keep_u, keep_w, [e for e in g.edges if drop not in e])
        if not is_chordal_bipartite(h):
            continue
        k = maximum_matching(h).size
        if k == 0:
            continue
        red = k_rma_reduce(h, k)
        if red.instance is None:
            continue
        d = build_aux_digraph(red.instance.graph, red.instance.matching).digraph
        assert find_induced_cycle(d, 6) is None
        checked += 1
    assert checked > 30
