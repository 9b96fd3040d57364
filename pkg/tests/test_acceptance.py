"""Acceptance suite: one PASS/FAIL line per criterion.

Run with pytest (lines are printed even when output is captured) or
directly with ``python3 tests/test_acceptance.py``. Corpora are seeded and
drawn once; nothing is filtered on outcome.
"""

import itertools
import math
import random
import subprocess
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from helpers import brute_force_set_cover, random_dag, random_digraph, random_planted  # noqa: E402
from robustmatch.augment import eswaran_tarjan  # noqa: E402
from robustmatch.auxdigraph import (  # noqa: E402
    Digraph,
    all_components_nontrivial,
    build_aux_digraph,
    condensation,
    flattened_digraph,
    is_strongly_connected,
)
from robustmatch.errors import InfeasibleError  # noqa: E402
from robustmatch.gen import (  # noqa: E402
    independent_edges,
    random_chordal_bipartite,
    random_tree,
    setcover_to_rma,
    star_path_wrma,
)
from robustmatch.graphs import BipartiteGraph, is_robust, maximum_matching  # noqa: E402
from robustmatch.rma import (  # noqa: E402
    build_source_cover_instances,
    combine_solutions,
    is_feasible,
    k_rma_brute_force,
    k_rma_reduce,
    rma_brute_force,
    rma_instance,
    solve_covers,
    solve_rma,
    source_cover_parts,
)
from robustmatch.sourcecover import (  # noqa: E402
    SourceCoverInstance,
    chordal_bipartite_source_cover,
    exact_source_cover_oracle,
    find_induced_cycle,
    greedy_source_cover,
    is_chordal_bipartite,
)
from robustmatch.steiner_tw import (  # noqa: E402
    NWDSTInstance,
    NwdstDP,
    decompose_instance,
    is_valid_decomposition,
    nwdst_brute_force,
    tree_decomposition,
)
from robustmatch.weighted import (  # noqa: E402
    dsf_brute_force,
    dsf_to_wrma,
    exact_dsf,
    leaves,
    make_dsf,
    tree_digraph,
    tree_wrma_solve,
    useful_edges,
    weighted_instance,
    wrma_brute_force,
    wrma_to_dsf,
)
from robustmatch.gen import random_costs  # noqa: E402

ROOT = Path(__file__).resolve().parent.parent


def report(capsys, number: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)


# ---------------------------------------------------------------------------
# corpora


def unit_cost_corpus(seed: int, count: int, max_pairs: int):
    rng = random.Random(seed)
    return [random_planted(rng, rng.randint(1, max_pairs), rng.choice([0.1, 0.2, 0.3, 0.45])) for _ in range(count)]


def chordal_source_cover_corpus(seed: int, count: int, max_vertices: int):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        g = random_chordal_bipartite(2 * rng.randint(2, max_vertices // 2), rng, chords=rng.randint(0, 10))
        order = list(g.vertices)
        rng.shuffle(order)
        pos = {v: i for i, v in enumerate(order)}
        out.append(Digraph(g.vertices, [(a, b) if pos[a] < pos[b] else (b, a) for a, b in g.edges]))
    return out


def balanced_figure():
    u, v, w, c1, c2, x, y, z = range(8)
    return Digraph(range(8), [(u, z), (u, c1), (v, y), (v, x), (w, c2), (w, y), (c1, x), (c2, z)])


def hub_figure(r: int):
    hub = 2 * r
    return Digraph(range(2 * r + 1), [(i, hub) for i in range(r)] + [(hub, r + j) for j in range(r)])


# ---------------------------------------------------------------------------
# criteria


def criterion_1(capsys=None) -> bool:
    corpus = unit_cost_corpus(1001, 600, 10)
    start = time.perf_counter()
    bad = 0
    for g in corpus:
        m = maximum_matching(g)
        if is_robust(g) != all_components_nontrivial(build_aux_digraph(g, m).digraph):
            bad += 1
    elapsed = time.perf_counter() - start
    ok = bad == 0 and elapsed < 10
    report(capsys, 1, ok, f"robustness vs nontrivial components on {len(corpus)} instances, {bad} disagreements, {elapsed:.2f}s")
    return ok


def criterion_2(capsys=None) -> bool:
    rng = random.Random(1002)
    bad = 0
    n_cases = 1000
    for _ in range(n_cases):
        d = random_digraph(rng, rng.randint(1, 30), rng.choice([0.02, 0.05, 0.1, 0.2]))
        arcs = list(eswaran_tarjan(d).arcs)
        c = condensation(d)
        expected = 0 if len(c.members) <= 1 else max(len(c.dag.sources), len(c.dag.sinks))
        if len(arcs) != expected or not is_strongly_connected(d.with_arcs(arcs)):
            bad += 1
    ok = bad == 0
    report(capsys, 2, ok, f"strong connectivity augmentation min-max on {n_cases} digraphs, {bad} failures")
    return ok


def criterion_3(capsys=None) -> bool:
    corpus = unit_cost_corpus(1003, 400, 7)
    start = time.perf_counter()
    checked = infeasible = raw_bad = combine_bad = 0
    raw_bad_isolated = 0
    for g in corpus:
        inst = rma_instance(g)
        try:
            opt = rma_brute_force(inst).size
        except InfeasibleError:
            infeasible += 1
            continue
        checked += 1
        dec = build_source_cover_instances(inst)
        c1, c2 = solve_covers(dec, "oracle")
        formula = max(len(c1), len(c2))
        if formula != opt:
            raw_bad += 1
            dag = dec.condensation.dag
            crit = dec.critical_components
            if len(crit) == 1 and not dag.succ[next(iter(crit))] and not dag.pred[next(iter(crit))]:
                raw_bad_isolated += 1
        sol = combine_solutions(inst, dec, c1, c2)
        if not is_feasible(inst, sol.added_edges) or sol.size != opt:
            combine_bad += 1
    elapsed = time.perf_counter() - start
    ok = raw_bad == 0 and combine_bad == 0 and checked >= 300 and elapsed < 300
    report(
        capsys, 3, ok,
        f"{checked} feasible instances ({infeasible} infeasible skipped); max cover size differs from brute force "
        f"on {raw_bad} ({raw_bad_isolated} with a lone isolated critical component); combined solution wrong on "
        f"{combine_bad}; {elapsed:.1f}s",
    )
    return ok


def criterion_4(capsys=None) -> bool:
    corpus = unit_cost_corpus(1003, 400, 7) + unit_cost_corpus(1004, 200, 9)
    rng = random.Random(1005)
    corpus += [random_chordal_bipartite(2 * rng.randint(2, 8), rng) for _ in range(100)]
    checked = ratio_bad = stage_bad = 0
    for g in corpus:
        inst = rma_instance(g)
        try:
            opt = solve_rma(inst, "oracle").size
        except InfeasibleError:
            continue
        checked += 1
        greedy = solve_rma(inst, "greedy").size
        n = len(g.vertices)
        if greedy > math.log2(n) * opt:
            ratio_bad += 1
        dec = build_source_cover_instances(inst)
        if dec.is_empty:
            continue
        bound = math.log(len(inst.matching.edges)) + 1
        for side in (dec.a1, dec.a2):
            for part in source_cover_parts(side):
                if not isinstance(part, SourceCoverInstance):
                    continue
                if len(greedy_source_cover(part)) > bound * len(exact_source_cover_oracle(part)):
                    stage_bad += 1
    ok = ratio_bad == 0 and stage_bad == 0
    report(capsys, 4, ok, f"greedy ratio on {checked} instances: {ratio_bad} log2(n) violations, {stage_bad} cover-stage violations")
    return ok


def criterion_5(capsys=None) -> bool:
    rng = random.Random(1006)
    checked = cost_bad = invariant_bad = 0
    attempts = 0
    while checked < 80 and attempts < 2000:
        attempts += 1
        n = rng.randint(2, 15)
        d = random_dag(rng, n, rng.choice([0.15, 0.25, 0.35]))
        if tree_decomposition(d.underlying()).width > 4:
            continue
        costs = {v: rng.randint(0, 5) for v in range(n)}
        root = rng.randrange(n)
        terms = frozenset(rng.sample(range(n), rng.randint(1, min(4, n))))
        inst = NWDSTInstance(d, costs, root, terms)
        try:
            expected = nwdst_brute_force(inst)[0]
        except InfeasibleError:
            continue
        checked += 1
        dp = NwdstDP(inst, decompose_instance(inst))
        cost, chosen = dp.solution()
        if cost != expected or not inst.is_feasible(chosen):
            cost_bad += 1
        below = dp.processed_vertices()
        entries_ok = all(not dp.entry_violations(i, f, below) for i, table in enumerate(dp.tables) for f in table)
        if not (entries_ok and dp.forget_rule_holds() and dp.join_correction_holds()):
            invariant_bad += 1
    ok = checked >= 50 and cost_bad == 0 and invariant_bad == 0
    report(capsys, 5, ok, f"tree decomposition program on {checked} feasible instances: {cost_bad} cost mismatches, {invariant_bad} invariant failures")
    return ok


def criterion_6(capsys=None) -> bool:
    corpus = chordal_source_cover_corpus(1007, 120, 18)
    cost_bad = flat_bad = 0
    for d in corpus:
        sc = SourceCoverInstance(d)
        if len(chordal_bipartite_source_cover(sc)) != len(exact_source_cover_oracle(sc)):
            cost_bad += 1
        if find_induced_cycle(flattened_digraph(d), 6) is not None:
            flat_bad += 1
    fig = balanced_figure()
    not_balanced = lambda x: find_induced_cycle(x, 4, accept=lambda n: n % 4 != 0) is not None  # noqa: E731
    balance_ok = not not_balanced(fig) and not_balanced(flattened_digraph(fig))
    width_ok = all(
        tree_decomposition(hub_figure(r).underlying()).width == 1
        and tree_decomposition(flattened_digraph(hub_figure(r)).underlying()).width >= r
        for r in (3, 4, 5)
    )
    ok = cost_bad == 0 and flat_bad == 0 and balance_ok and width_ok
    report(
        capsys, 6, ok,
        f"{len(corpus)} chordal-bipartite instances: {cost_bad} optimum mismatches, {flat_bad} flattenings with long induced cycles; "
        f"balancedness counterexample {'reproduced' if balance_ok else 'missing'}, treewidth counterexample {'reproduced' if width_ok else 'missing'}",
    )
    return ok


def criterion_7(capsys=None) -> bool:
    rng = random.Random(1008)
    reduced = direct = opt_bad = width_bad = 0
    for _ in range(600):
        nu, nw = rng.randint(1, 4), rng.randint(1, 4)
        g = BipartiteGraph(range(nu), range(nu, nu + nw), [(u, nu + w) for u in range(nu) for w in range(nw) if rng.random() < 0.45])
        k = maximum_matching(g).size
        if k == 0:
            continue
        try:
            expected = k_rma_brute_force(g, k).size
        except InfeasibleError:
            expected = None
        red = k_rma_reduce(g, k)
        if red.direct is not None:
            direct += 1
            opt_bad += red.direct.size != expected
            continue
        reduced += 1
        try:
            got = rma_brute_force(red.instance).size
        except InfeasibleError:
            got = None
        opt_bad += got != expected
        work = g.swapped() if red.swapped else g
        td = tree_decomposition({v: set(work.neighbors(v)) for v in work.vertices})
        lifted = red.lift_decomposition(td)
        g2 = red.instance.graph
        if not is_valid_decomposition({v: set(g2.neighbors(v)) for v in g2.vertices}, lifted) or lifted.width > max(td.width, 1) + 2:
            width_bad += 1
    chordal_checked = chordal_bad = 0
    for _ in range(400):
        g = random_chordal_bipartite(2 * rng.randint(2, 5), rng, chords=rng.randint(0, 6))
        drop = rng.choice(g.vertices)
        h = BipartiteGraph([u for u in g.part_u if u != drop], [w for w in g.part_w if w != drop], [e for e in g.edges if drop not in e])
        if not h.part_u or not h.part_w or not is_chordal_bipartite(h):
            continue
        k = maximum_matching(h).size
        red = k_rma_reduce(h, k) if k else None
        if red is None or red.instance is None:
            continue
        chordal_checked += 1
        if find_induced_cycle(build_aux_digraph(red.instance.graph, red.instance.matching).digraph, 6) is not None:
            chordal_bad += 1
    ok = reduced + direct >= 100 and opt_bad == 0 and width_bad == 0 and chordal_bad == 0
    report(
        capsys, 7, ok,
        f"{reduced} reduced and {direct} directly answered instances: {opt_bad} optimum mismatches, {width_bad} width failures; "
        f"{chordal_checked} chordal inputs, {chordal_bad} long induced cycles",
    )
    return ok


def _random_dsf(rng, n, k):
    arcs = {(a, b): rng.randint(0, 4) for a in range(n) for b in range(n) if a != b and rng.random() < 0.35}
    candidates = [(s, t) for s in range(n) for t in range(n) if s != t and (s, t) not in arcs]
    if len(candidates) < k:
        return None
    return make_dsf(range(n), arcs, rng.sample(candidates, k))


def criterion_8(capsys=None) -> bool:
    rng = random.Random(1009)
    dsf_checked = 0
    dsf_bad = {1: 0, 2: 0, 3: 0}
    dsf_count = {1: 0, 2: 0, 3: 0}
    while dsf_checked < 120:
        k = rng.randint(1, 3)
        inst = _random_dsf(rng, rng.randint(2, 4), k)
        if inst is None:
            continue
        try:
            expected = dsf_brute_force(inst)[0]
        except InfeasibleError:
            continue
        dsf_checked += 1
        dsf_count[k] += 1
        if wrma_brute_force(dsf_to_wrma(inst).instance).total_cost != expected:
            dsf_bad[k] += 1
    wrma_checked = wrma_bad = 0
    while wrma_checked < 120:
        g = random_planted(rng, rng.randint(1, 5), rng.choice([0.2, 0.35]))
        inst = weighted_instance(g, random_costs(g, rng))
        try:
            expected = wrma_brute_force(inst).total_cost
        except InfeasibleError:
            continue
        wrma_checked += 1
        red = wrma_to_dsf(inst)
        cost, arcs = exact_dsf(red.dsf)
        edges = red.edges_of(arcs)
        if cost != expected or not inst.is_feasible(edges) or inst.total_cost(edges) != cost:
            wrma_bad += 1
    total_dsf_bad = sum(dsf_bad.values())
    ok = total_dsf_bad == 0 and wrma_bad == 0
    per_k = ", ".join(f"k={k}: {dsf_bad[k]}/{dsf_count[k]}" for k in (1, 2, 3))
    report(
        capsys, 8, ok,
        f"forest-to-augmentation mismatches {total_dsf_bad}/{dsf_checked} ({per_k}); "
        f"augmentation-to-forest mismatches {wrma_bad}/{wrma_checked}",
    )
    return ok


def criterion_9(capsys=None) -> bool:
    rng = random.Random(1010)
    trees = infeasible = solve_bad = filter_bad = 0
    sets_checked = robust_not_strong = strong_not_robust = 0
    while trees < 110:
        g = random_tree(2 * rng.randint(1, 6), rng, max_leaves=5)
        inst = weighted_instance(g, random_costs(g, rng))
        trees += 1
        assert len(g.vertices) <= 12 and len(leaves(g)) <= 5
        try:
            expected = wrma_brute_force(inst).total_cost
        except InfeasibleError:
            infeasible += 1
            try:
                tree_wrma_solve(inst)
                solve_bad += 1
            except InfeasibleError:
                pass
            continue
        if tree_wrma_solve(inst).total_cost != expected:
            solve_bad += 1
        useful = sorted(useful_edges(inst))
        if wrma_brute_force(inst, candidates=useful).total_cost != expected:
            filter_bad += 1
        for r in range(min(3, len(useful)) + 1):
            for combo in itertools.combinations(useful, r):
                sets_checked += 1
                robust = inst.is_feasible(combo)
                strong = is_strongly_connected(tree_digraph(inst, combo))
                robust_not_strong += robust and not strong
                strong_not_robust += strong and not robust
    ok = solve_bad == 0 and filter_bad == 0 and robust_not_strong == 0 and strong_not_robust == 0
    report(
        capsys, 9, ok,
        f"{trees} trees ({infeasible} infeasible): {solve_bad} solver mismatches, {filter_bad} filtering changes; "
        f"of {sets_checked} candidate sets, {robust_not_strong} robust but not strongly connected, "
        f"{strong_not_robust} strongly connected but not robust",
    )
    return ok


def _set_families(max_items: int, max_sets: int):
    """Every covering family of distinct nonempty sets, once per item relabeling."""
    seen = set()
    for n in range(1, max_items + 1):
        items = tuple(range(n))
        subsets = [frozenset(c) for r in range(1, n + 1) for c in itertools.combinations(items, r)]
        perms = list(itertools.permutations(items))
        for size in range(1, max_sets + 1):
            for fam in itertools.combinations(subsets, size):
                if frozenset().union(*fam) != set(items):
                    continue
                key = min(tuple(sorted(tuple(sorted(p[x] for x in s)) for s in fam)) for p in perms)
                if (n, key) in seen:
                    continue
                seen.add((n, key))
                yield items, {f"S{j}": sorted(s) for j, s in enumerate(fam)}


def criterion_10(capsys=None) -> bool:
    families = cover_bad = degree_bad = 0
    for items, sets in _set_families(4, 4):
        families += 1
        gadget = setcover_to_rma(items, sets)
        g = gadget.instance.graph
        if max(g.degree(v) for v in g.vertices) > 3:
            degree_bad += 1
        if solve_rma(gadget.instance, "oracle").size != brute_force_set_cover(items, sets):
            cover_bad += 1
    rng = random.Random(1011)
    bases = embed_bad = 0
    for pairs in (1, 2, 3):
        for _ in range(20):
            base_g = independent_edges(pairs)
            costs = {e: rng.choice([1, 2, 3, 4, 6]) for e in sorted(weighted_instance(base_g).complement())}
            base = weighted_instance(base_g, costs)
            try:
                expected = wrma_brute_force(base).total_cost
            except InfeasibleError:
                expected = None
            for kind in ("star", "path"):
                bases += 1
                emb = star_path_wrma(kind, base)
                try:
                    got = wrma_brute_force(emb.instance).total_cost
                except InfeasibleError:
                    got = None
                if expected is None:
                    # an infeasible base stays infeasible or needs a penalty edge
                    embed_bad += got is not None and got < emb.penalty
                else:
                    embed_bad += got != expected
    ok = cover_bad == 0 and degree_bad == 0 and embed_bad == 0
    report(
        capsys, 10, ok,
        f"{families} set families: {cover_bad} optimum mismatches, {degree_bad} degree violations; "
        f"{bases} embedded bases: {embed_bad} mismatches",
    )
    return ok


CLI_RUNS = [
    ["gen", "random_matchable", "--n", "12", "--seed", "7", "--p", "0.3"],
    ["gen", "random_tree", "--n", "12", "--seed", "7", "--max-leaves", "4", "--max-cost", "5"],
    ["gen", "random_chordal_bipartite", "--n", "14", "--seed", "7"],
    ["gen", "independent_edges", "--n", "8", "--seed", "7"],
    ["gen", "setcover", "--seed", "7", "--items", "5", "--n-sets", "4"],
    ["gen", "star", "--n", "6", "--seed", "7"],
    ["gen", "path", "--n", "6", "--seed", "7"],
]


def criterion_11(capsys=None, tmp_dir: Path = None) -> bool:
    import tempfile

    tmp = Path(tmp_dir or tempfile.mkdtemp())
    exe = [sys.executable, "-m", "robustmatch"]
    runs = []
    for i, args in enumerate(CLI_RUNS):
        runs.append(args)
        out = subprocess.run(exe + args, capture_output=True, check=True).stdout
        f = tmp / f"g{i}.txt"
        f.write_bytes(out)
        weighted = args[1] in ("star", "path") or "--max-cost" in args
        if weighted:
            runs.append(["wrma", "solve", "--method", "dsf", "--json", str(f)])
        else:
            runs.append(["rma", "solve", "--json", str(f)])
            runs.append(["rma", "solve", "--method", "greedy", str(f)])
            runs.append(["rma", "verify", str(f)])
    different = 0
    for args in runs:
        a = subprocess.run(exe + args, capture_output=True)
        b = subprocess.run(exe + args, capture_output=True)
        if a.stdout != b.stdout or a.returncode != b.returncode:
            different += 1
    ok = different == 0
    report(capsys, 11, ok, f"{len(runs)} CLI invocations run twice, {different} differed")
    return ok


# ---------------------------------------------------------------------------
# pytest entry points


def test_criterion_01_robustness_equivalence(capsys):
    assert criterion_1(capsys)


def test_criterion_02_strong_connectivity_min_max(capsys):
    assert criterion_2(capsys)


def test_criterion_03_cover_decomposition_exactness(capsys):
    assert criterion_3(capsys)


def test_criterion_04_greedy_ratio(capsys):
    assert criterion_4(capsys)


def test_criterion_05_tree_decomposition_program(capsys):
    assert criterion_5(capsys)


def test_criterion_06_chordal_bipartite_exactness(capsys):
    assert criterion_6(capsys)


def test_criterion_07_size_k_reduction(capsys):
    assert criterion_7(capsys)


def test_criterion_08_steiner_forest_round_trips(capsys):
    assert criterion_8(capsys)


def test_criterion_09_tree_pipeline(capsys):
    assert criterion_9(capsys)


def test_criterion_10_gadget_fidelity(capsys):
    assert criterion_10(capsys)


def test_criterion_11_cli_determinism(capsys, tmp_path):
    assert criterion_11(capsys, tmp_path)


if __name__ == "__main__":
    results = [
        criterion_1(), criterion_2(), criterion_3(), criterion_4(), criterion_5(), criterion_6(),
        criterion_7(), criterion_8(), criterion_9(), criterion_10(), criterion_11(),
    ]
    print(f"{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)
