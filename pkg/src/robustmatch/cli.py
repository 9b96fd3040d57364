"""Command-line front end.

Every leaf command reads one instance file and writes plain text, or a JSON
envelope with ``--json``. Exit codes: 0 success, 1 infeasible or invalid
input, 2 usage error.
"""

import json
import random
import sys
import time
from typing import Optional

import click

from . import gen
from .augment import eswaran_tarjan
from .auxdigraph import critical_edges
from .errors import InvalidInstanceError, RobustMatchError
from .formats import (
    GraphFile,
    ParseError,
    format_dsf,
    format_graph,
    format_weighted,
    parse_digraph,
    parse_graph,
    parse_nwdst,
    parse_sets,
)
from .graphs import AugmentationSolution, complement_edges, is_robust, maximum_matching
from .rma import RmaInstance, auto_strategy, canonical_strategy, k_rma_reduce, solve_rma
from .sourcecover import SourceCoverInstance, solve_source_cover
from .steiner_tw import nwdst_solve
from .weighted import DEFAULT_MAX_LEAVES, WeightedRmaInstance, solve_wrma, wrma_to_dsf

EXIT_FAILURE = 1


class Report:
    """Collects one command's result and prints it once, as text or JSON."""

    def __init__(self, command: str, as_json: bool, timing: bool):
        self.command = command
        self.as_json = as_json
        self.timing = timing
        self.start = time.perf_counter()
        self.envelope = {
            "command": command,
            "status": "ok",
            "instance": {},
            "method": None,
            "cost": None,
            "edges": [],
            "arcs": [],
            "vertices": [],
            "runtime_ms": None,
        }
        self.lines: list = []

    def emit(self) -> None:
        if self.timing:
            self.envelope["runtime_ms"] = round((time.perf_counter() - self.start) * 1000, 3)
        if self.as_json:
            click.echo(json.dumps(self.envelope, sort_keys=True))
        else:
            text = "".join(line if line.endswith("\n") else line + "\n" for line in self.lines)
            click.echo(text, nl=False)
            if self.timing:
                click.echo(f"# runtime_ms {self.envelope['runtime_ms']}", err=True)


def output_options(f):
    f = click.option("--timing", is_flag=True, help="Report wall-clock runtime in milliseconds.")(f)
    f = click.option("--json", "as_json", is_flag=True, help="Emit a JSON envelope instead of text.")(f)
    return f


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(EXIT_FAILURE)


def _run(fn):
    """Map package errors to exit code 1."""
    try:
        fn()
    except RobustMatchError as exc:
        _fail(str(exc))


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _graph_summary(gf: GraphFile, m) -> dict:
    g = gf.graph
    return {"type": "graph", "U": len(g.part_u), "W": len(g.part_w), "edges": len(g.edges), "matching": m.size}


def _perfect(gf: GraphFile):
    m = gf.matching if gf.matching is not None else maximum_matching(gf.graph)
    if not m.is_perfect_for(gf.graph):
        raise InvalidInstanceError("graph has no perfect matching" if gf.matching is None else "given matching is not perfect")
    return m


def _edge_lines(report: Report, sol: AugmentationSolution) -> None:
    edges = sol.sorted_edges()
    report.envelope["cost"] = sol.total_cost
    report.envelope["edges"] = [list(e) for e in edges]
    report.lines.append(f"cost {sol.total_cost}")
    report.lines += [f"e {u} {w}" for u, w in edges]


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Robust perfect matchings: verification, augmentation and reductions."""


# ---------------------------------------------------------------------------
# unit-cost


@main.group()
def rma():
    """Unit-cost augmentation."""


RMA_METHODS = ["auto", "greedy", "cb", "tw", "oracle", "brute", "chordal_bipartite", "treewidth"]


@rma.command("solve")
@click.option("--method", type=click.Choice(RMA_METHODS), default="auto", show_default=True)
@output_options
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def rma_solve(method, as_json, timing, path):
    """Fewest complement edges making the matching robust."""

    def run():
        report = Report("rma solve", as_json, timing)
        gf = parse_graph(_read(path))
        inst = RmaInstance(gf.graph, _perfect(gf))
        chosen = canonical_strategy(method)
        if chosen == "auto":
            chosen = auto_strategy(inst)
        sol = solve_rma(inst, chosen)
        report.envelope["instance"] = _graph_summary(gf, inst.matching)
        report.envelope["method"] = chosen
        _edge_lines(report, sol)
        report.emit()

    _run(run)


@rma.command("verify")
@output_options
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def rma_verify(as_json, timing, path):
    """Report robustness and list the critical matching edges."""

    def run():
        report = Report("rma verify", as_json, timing)
        gf = parse_graph(_read(path))
        m = _perfect(gf)
        robust = is_robust(gf.graph)
        crit = sorted(critical_edges(gf.graph, m))
        report.envelope["instance"] = _graph_summary(gf, m)
        report.envelope["status"] = "robust" if robust else "not-robust"
        report.envelope["edges"] = [list(e) for e in crit]
        report.lines.append("robust" if robust else "not-robust")
        report.lines += [f"e {u} {w}" for u, w in crit]
        report.emit()

    _run(run)


@rma.command("reduce-k")
@click.option("--k", "k", type=click.IntRange(min=0), required=True, help="Required matching size.")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def rma_reduce_k(k, path):
    """Reduce the size-k problem to a perfect-matching instance in graph format.

    When no reduction is needed the answer is printed instead, preceded by a
    comment line.
    """

    def run():
        gf = parse_graph(_read(path))
        red = k_rma_reduce(gf.graph, k)
        if red.direct is not None:
            click.echo("# answered without reduction")
            click.echo(f"cost {red.direct.total_cost}")
            for u, w in red.direct.sorted_edges():
                click.echo(f"e {u} {w}")
            return
        click.echo(format_graph(red.instance.graph, red.instance.matching), nl=False)

    _run(run)


# ---------------------------------------------------------------------------
# weighted


@main.group()
def wrma():
    """Weighted augmentation."""


@wrma.command("solve")
@click.option("--method", type=click.Choice(["auto", "tree", "dsf", "brute"]), default="auto", show_default=True)
@click.option("--max-leaves", type=click.IntRange(min=2), default=DEFAULT_MAX_LEAVES, show_default=True)
@output_options
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def wrma_solve(method, max_leaves, as_json, timing, path):
    """Minimum-cost complement edges; costs come from ``c`` lines (default 1)."""

    def run():
        report = Report("wrma solve", as_json, timing)
        gf = parse_graph(_read(path))
        inst = gf.weighted(_perfect(gf))
        sol = solve_wrma(inst, method, max_leaves)
        report.envelope["instance"] = _graph_summary(gf, inst.matching)
        report.envelope["method"] = method
        _edge_lines(report, sol)
        report.emit()

    _run(run)


@wrma.command("reduce-dsf")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def wrma_reduce_dsf(path):
    """Emit the equivalent Directed Steiner Forest instance."""

    def run():
        gf = parse_graph(_read(path))
        click.echo(format_dsf(wrma_to_dsf(gf.weighted(_perfect(gf))).dsf), nl=False)

    _run(run)


# ---------------------------------------------------------------------------
# digraph tools


@main.group()
def sourcecover():
    """Source Cover on acyclic digraphs."""


@sourcecover.command("solve")
@click.option("--method", type=click.Choice(["greedy", "cb", "tw", "oracle"]), default="greedy", show_default=True)
@output_options
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def sourcecover_solve(method, as_json, timing, path):
    """Print the chosen sources, one per line."""

    def run():
        report = Report("sourcecover solve", as_json, timing)
        d = parse_digraph(_read(path))
        chosen = sorted(solve_source_cover(SourceCoverInstance(d), method))
        report.envelope["instance"] = {"type": "digraph", "vertices": len(d.vertices), "arcs": len(d.arcs)}
        report.envelope["method"] = method
        report.envelope["cost"] = len(chosen)
        report.envelope["vertices"] = chosen
        report.lines += [str(v) for v in chosen]
        report.emit()

    _run(run)


@main.group()
def steiner():
    """Steiner problems on acyclic digraphs."""


@steiner.command("nwdst")
@output_options
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def steiner_nwdst(as_json, timing, path):
    """Node-weighted directed Steiner tree via the tree decomposition dynamic program."""

    def run():
        report = Report("steiner nwdst", as_json, timing)
        inst = parse_nwdst(_read(path))
        cost, chosen = nwdst_solve(inst)
        chosen = sorted(chosen)
        report.envelope["instance"] = {
            "type": "nwdst",
            "vertices": len(inst.dag.vertices),
            "arcs": len(inst.dag.arcs),
            "terminals": len(inst.terminals),
        }
        report.envelope["method"] = "tw"
        report.envelope["cost"] = cost
        report.envelope["vertices"] = chosen
        report.lines.append(f"cost {cost}")
        report.lines += [f"v {v}" for v in chosen]
        report.emit()

    _run(run)


@main.group()
def augment():
    """Connectivity augmentation of digraphs."""


@augment.command("scc")
@output_options
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def augment_scc(as_json, timing, path):
    """Fewest arcs making the digraph strongly connected."""

    def run():
        report = Report("augment scc", as_json, timing)
        d = parse_digraph(_read(path))
        arcs = list(eswaran_tarjan(d).arcs)
        report.envelope["instance"] = {"type": "digraph", "vertices": len(d.vertices), "arcs": len(d.arcs)}
        report.envelope["method"] = "eswaran-tarjan"
        report.envelope["cost"] = len(arcs)
        report.envelope["arcs"] = [list(a) for a in arcs]
        report.lines += [f"a {a} {b}" for a, b in arcs]
        report.emit()

    _run(run)


# ---------------------------------------------------------------------------
# generators and solution checking

GEN_KINDS = {
    "setcover": "setcover_gadget",
    "star": "star_gadget",
    "path": "path_gadget",
}


@main.command("gen")
@click.argument("kind", type=click.Choice(sorted(set(gen.KINDS) | set(GEN_KINDS))))
@click.option("--n", "n", type=click.IntRange(min=1), default=10, show_default=True, help="Vertex count (pairs for gadgets: n // 2).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--p", "p", type=click.FloatRange(0, 1), default=0.25, show_default=True, help="Edge probability for random_matchable.")
@click.option("--max-leaves", type=click.IntRange(min=2), default=None, help="Leaf budget for random_tree.")
@click.option("--chords", type=click.IntRange(min=0), default=6, show_default=True, help="Chord attempts for random_chordal_bipartite.")
@click.option("--sets", "sets_path", type=click.Path(exists=True, dir_okay=False), default=None, help="Set family file for setcover.")
@click.option("--items", type=click.IntRange(min=1), default=4, show_default=True, help="Items of a random set family.")
@click.option("--n-sets", type=click.IntRange(min=1), default=3, show_default=True, help="Sets of a random set family.")
@click.option("--max-cost", type=click.IntRange(min=0), default=None, help="Attach random complement costs in [0, max-cost].")
def gen_command(kind, n, seed, p, max_leaves, chords, sets_path, items, n_sets, max_cost):
    """Emit a generated instance in graph format."""

    def run():
        params = {"n": n, "p": p, "chords": chords, "items": items, "n_sets": n_sets}
        if max_leaves is not None:
            params["max_leaves"] = max_leaves
        if sets_path is not None:
            _items, family = parse_sets(_read(sets_path))
            params["sets"] = family
        spec = gen.GeneratorSpec(GEN_KINDS.get(kind, kind), params, seed)
        obj = gen.random_instance(spec)
        if isinstance(obj, gen.Embedding):
            click.echo(format_weighted(obj.instance), nl=False)
            return
        if isinstance(obj, gen.SetCoverGadget):
            g, m = obj.instance.graph, obj.instance.matching
        else:
            g, m = obj, maximum_matching(obj)
        if max_cost is not None:
            rng = random.Random(seed)
            costs = {e: rng.randint(0, max_cost) for e in sorted(complement_edges(g))}
            click.echo(format_graph(g, m, costs), nl=False)
        else:
            click.echo(format_graph(g, m), nl=False)

    _run(run)


def _parse_solution(text: str) -> tuple:
    edges = []
    for no, raw in enumerate(text.splitlines(), start=1):
        tok = raw.split()
        if not tok or tok[0].startswith("#") or tok[0] == "cost":
            continue
        if tok[0] != "e" or len(tok) != 3:
            raise ParseError("solution lines must read 'e <u> <w>'", no)
        try:
            edges.append((int(tok[1]), int(tok[2])))
        except ValueError:
            raise ParseError("edge endpoints must be integers", no) from None
    return tuple(edges)


@main.command("verify")
@output_options
@click.argument("graph_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("solution_path", type=click.Path(exists=True, dir_okay=False))
def verify_command(as_json, timing, graph_path, solution_path):
    """Check that a solution's edges make the graph robust; exit 1 if not."""

    def run():
        report = Report("verify", as_json, timing)
        gf = parse_graph(_read(graph_path))
        m = _perfect(gf)
        inst = WeightedRmaInstance(gf.graph, m, gf.costs)
        edges = _parse_solution(_read(solution_path))
        for e in edges:
            if not (gf.graph.in_u(e[0]) and gf.graph.in_w(e[1])):
                raise InvalidInstanceError(f"solution edge {e} must join U to W")
            if gf.graph.has_edge(*e):
                raise InvalidInstanceError(f"solution edge {e} is already in the graph")
        sol = inst.solution(edges)
        ok = inst.is_feasible(sol.added_edges)
        report.envelope["instance"] = _graph_summary(gf, m)
        report.envelope["status"] = "feasible" if ok else "infeasible"
        report.envelope["cost"] = sol.total_cost
        report.envelope["edges"] = [list(e) for e in sol.sorted_edges()]
        report.lines.append(f"feasible cost {sol.total_cost}" if ok else "infeasible")
        report.emit()
        if not ok:
            sys.exit(EXIT_FAILURE)

    _run(run)


def run_cli(argv: Optional[list] = None) -> int:
    """Run the CLI in-process and return its exit code."""
    try:
        main.main(args=argv, prog_name="robustmatch", standalone_mode=False)
    except click.exceptions.UsageError as exc:
        exc.show()
        return 2
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except SystemExit as exc:
        return int(exc.code or 0)
    return 0


if __name__ == "__main__":
    main()
