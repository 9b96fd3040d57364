"""Line-oriented text formats for graphs, digraphs, NWDST, DSF and set families.

Every format starts with a ``p`` header (except set families), ignores blank
lines and lines starting with ``#``, and accepts body lines in any order.
Writers emit a canonical form: header first, then lines sorted by kind and id.
"""

from dataclasses import dataclass, field
from typing import Iterator, Optional

from .auxdigraph import Digraph
from .errors import InvalidInstanceError, RobustMatchError
from .graphs import BipartiteGraph, Matching, complement_edges
from .steiner_tw import NWDSTInstance
from .weighted import DSFInstance, WeightedRmaInstance


class ParseError(InvalidInstanceError):
    """Malformed input; ``line`` is the 1-based line number (0 for whole-file problems)."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def _lines(text: str) -> Iterator[tuple]:
    for no, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if s and not s.startswith("#"):
            yield no, s.split()


def _ints(tokens: list, count: int, no: int, what: str) -> list:
    if len(tokens) != count:
        raise ParseError(f"{what} expects {count} integer field(s), got {len(tokens)}", no)
    try:
        vals = [int(t) for t in tokens]
    except ValueError:
        raise ParseError(f"{what} fields must be integers", no) from None
    if any(v < 0 for v in vals):
        raise ParseError(f"{what} fields must be nonnegative", no)
    return vals


def _header(text: str, kind: str, count: int) -> tuple:
    rows = list(_lines(text))
    if not rows:
        raise ParseError("empty input")
    no, tok = rows[0]
    if tok[0] != "p" or len(tok) < 2 or tok[1] != kind:
        raise ParseError(f"expected header 'p {kind} ...'", no)
    return _ints(tok[2:], count, no, "header"), rows[1:]


# ---------------------------------------------------------------------------
# bipartite graphs


@dataclass
class GraphFile:
    """Parsed graph file; ``matching`` is None when no ``m`` lines were given."""

    graph: BipartiteGraph
    matching: Optional[Matching] = None
    costs: dict = field(default_factory=dict)

    def weighted(self, matching: Optional[Matching] = None) -> WeightedRmaInstance:
        m = matching or self.matching
        if m is None:
            raise InvalidInstanceError("weighted instance needs a matching")
        return WeightedRmaInstance(self.graph, m, self.costs)


def parse_graph(text: str) -> GraphFile:
    (nu, nw, ne), rows = _header(text, "rma", 3)
    total = nu + nw

    def edge(vals, no):
        u, w = vals
        if not (u < nu <= w < total):
            raise ParseError(f"edge ({u}, {w}) must join U [0, {nu}) to W [{nu}, {total})", no)
        return u, w

    edges, matched, costs = [], [], {}
    for no, tok in rows:
        tag = tok[0]
        if tag == "e":
            edges.append(edge(_ints(tok[1:], 2, no, "edge"), no))
        elif tag == "m":
            matched.append((edge(_ints(tok[1:], 2, no, "matching"), no), no))
        elif tag == "c":
            u, w, c = _ints(tok[1:], 3, no, "cost")
            costs[edge((u, w), no)] = (c, no)
        else:
            raise ParseError(f"unknown line type {tag!r}", no)
    if len(set(edges)) != ne:
        raise ParseError(f"header announces {ne} edges, found {len(set(edges))} distinct")
    g = BipartiteGraph(range(nu), range(nu, total), edges)
    for e, no in matched:
        if e not in g.edges:
            raise ParseError(f"matching edge {e} is not an edge", no)
    for e, (_c, no) in costs.items():
        if e in g.edges:
            raise ParseError(f"cost line for existing edge {e}", no)
    m = None
    if matched:
        try:
            m = Matching(frozenset(e for e, _no in matched))
        except RobustMatchError as exc:
            raise ParseError(str(exc)) from None
    return GraphFile(g, m, {e: c for e, (c, _no) in costs.items()})


def is_canonical(g: BipartiteGraph) -> bool:
    """U is 0..|U|-1 and W follows it, both in increasing order."""
    nu = len(g.part_u)
    return list(g.part_u) == list(range(nu)) and list(g.part_w) == list(range(nu, nu + len(g.part_w)))


def canonical_relabel(g: BipartiteGraph) -> dict:
    """Dense relabeling map with U first, both parts in increasing id order."""
    order = sorted(g.part_u) + sorted(g.part_w)
    return {v: i for i, v in enumerate(order)}


def relabel_graph(g: BipartiteGraph, m: Optional[Matching] = None, costs: Optional[dict] = None) -> tuple:
    ids = canonical_relabel(g)
    nu = len(g.part_u)
    g2 = BipartiteGraph(range(nu), range(nu, len(ids)), [(ids[u], ids[w]) for u, w in g.edges])
    m2 = None if m is None else Matching(frozenset((ids[u], ids[w]) for u, w in m.edges), m.k)
    c2 = None if costs is None else {(ids[u], ids[w]): c for (u, w), c in costs.items()}
    return g2, m2, c2, ids


def format_graph(
    g: BipartiteGraph,
    matching: Optional[Matching] = None,
    costs: Optional[dict] = None,
    default_cost: int = 1,
) -> str:
    """Canonical text; ``c`` lines are written for complement pairs whose cost is not 1."""
    if not is_canonical(g):
        g, matching, costs, _ids = relabel_graph(g, matching, costs)
    out = [f"p rma {len(g.part_u)} {len(g.part_w)} {len(g.edges)}"]
    out += [f"e {u} {w}" for u, w in sorted(g.edges)]
    if matching is not None:
        out += [f"m {u} {w}" for u, w in sorted(matching.edges)]
    if costs is not None or default_cost != 1:
        costs = costs or {}
        for e in sorted(complement_edges(g)):
            c = costs.get(e, default_cost)
            if c != 1:
                out.append(f"c {e[0]} {e[1]} {c}")
    return "\n".join(out) + "\n"


def format_weighted(inst: WeightedRmaInstance) -> str:
    return format_graph(inst.graph, inst.matching, inst.costs, inst.default_cost)


# ---------------------------------------------------------------------------
# digraphs and NWDST instances


def _arcs(rows, n: int, allowed: str) -> tuple:
    arcs, extra = [], []
    for no, tok in rows:
        if tok[0] == "a":
            a, b = _ints(tok[1:], 2, no, "arc")
            if a >= n or b >= n:
                raise ParseError(f"arc ({a}, {b}) uses a vertex outside [0, {n})", no)
            if a == b:
                raise ParseError("loops are not allowed", no)
            arcs.append((a, b))
        elif tok[0] in allowed:
            extra.append((no, tok))
        else:
            raise ParseError(f"unknown line type {tok[0]!r}", no)
    return arcs, extra


def parse_digraph(text: str) -> Digraph:
    (n, m), rows = _header(text, "digraph", 2)
    arcs, _ = _arcs(rows, n, "")
    if len(set(arcs)) != m:
        raise ParseError(f"header announces {m} arcs, found {len(set(arcs))} distinct")
    return Digraph(range(n), arcs)


def format_digraph(d: Digraph) -> str:
    out = [f"p digraph {len(d.vertices)} {len(d.arcs)}"]
    out += [f"a {a} {b}" for a, b in sorted(d.arcs)]
    return "\n".join(out) + "\n"


def parse_nwdst(text: str) -> NWDSTInstance:
    """Digraph format plus ``n <v> <cost>``, ``r <root>`` and ``t <terminal>``; unlisted costs are 0."""
    (n, m), rows = _header(text, "digraph", 2)
    arcs, extra = _arcs(rows, n, "nrt")
    costs, root, terminals = {}, None, set()
    for no, tok in extra:
        if tok[0] == "n":
            v, c = _ints(tok[1:], 2, no, "node cost")
            if v >= n:
                raise ParseError(f"vertex {v} outside [0, {n})", no)
            costs[v] = c
        elif tok[0] == "r":
            (root,) = _ints(tok[1:], 1, no, "root")
            if root >= n:
                raise ParseError(f"root {root} outside [0, {n})", no)
        else:
            (t,) = _ints(tok[1:], 1, no, "terminal")
            if t >= n:
                raise ParseError(f"terminal {t} outside [0, {n})", no)
            terminals.add(t)
    if root is None:
        raise ParseError("missing root line 'r <v>'")
    if len(set(arcs)) != m:
        raise ParseError(f"header announces {m} arcs, found {len(set(arcs))} distinct")
    dag = Digraph(range(n), arcs)
    try:
        return NWDSTInstance(dag, {v: costs.get(v, 0) for v in range(n)}, root, frozenset(terminals))
    except InvalidInstanceError as exc:
        raise ParseError(str(exc)) from None


def format_nwdst(inst: NWDSTInstance) -> str:
    out = [format_digraph(inst.dag).rstrip("\n")]
    out += [f"n {v} {inst.cost(v)}" for v in sorted(inst.dag.vertices) if inst.cost(v)]
    out.append(f"r {inst.root}")
    out += [f"t {t}" for t in sorted(inst.terminals)]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Directed Steiner Forest


def parse_dsf(text: str) -> DSFInstance:
    (n, m, k), rows = _header(text, "dsf", 3)
    arcs, pairs = {}, []
    for no, tok in rows:
        if tok[0] == "a":
            a, b, c = _ints(tok[1:], 3, no, "arc")
            if a >= n or b >= n:
                raise ParseError(f"arc ({a}, {b}) uses a vertex outside [0, {n})", no)
            if a == b:
                raise ParseError("loops are not allowed", no)
            arcs[(a, b)] = c
        elif tok[0] == "pair":
            s, t = _ints(tok[1:], 2, no, "pair")
            if s >= n or t >= n:
                raise ParseError(f"pair ({s}, {t}) uses a vertex outside [0, {n})", no)
            pairs.append((s, t))
        else:
            raise ParseError(f"unknown line type {tok[0]!r}", no)
    if len(arcs) != m:
        raise ParseError(f"header announces {m} arcs, found {len(arcs)} distinct")
    if len(pairs) != k:
        raise ParseError(f"header announces {k} pairs, found {len(pairs)}")
    return DSFInstance(Digraph(range(n), arcs), arcs, tuple(pairs))


def format_dsf(inst: DSFInstance) -> str:
    """Requires dense vertex ids 0..n-1."""
    d = inst.digraph
    if sorted(d.vertices) != list(range(len(d.vertices))):
        raise InvalidInstanceError("DSF format needs dense vertex ids")
    out = [f"p dsf {len(d.vertices)} {len(d.arcs)} {len(inst.pairs)}"]
    out += [f"a {a} {b} {inst.cost((a, b))}" for a, b in sorted(d.arcs)]
    out += [f"pair {s} {t}" for s, t in inst.pairs]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# set families


def parse_sets(text: str) -> tuple:
    """``set <item> ...`` lines; sets are named S1, S2, ... in file order."""
    sets = {}
    for no, tok in _lines(text):
        if tok[0] != "set":
            raise ParseError(f"unknown line type {tok[0]!r}", no)
        if len(tok) < 2:
            raise ParseError("empty set", no)
        sets[f"S{len(sets) + 1}"] = _ints(tok[1:], len(tok) - 1, no, "set")
    if not sets:
        raise ParseError("no sets given")
    items = sorted({x for members in sets.values() for x in members})
    return items, sets


def format_sets(sets: dict) -> str:
    return "".join("set " + " ".join(map(str, sorted(members))) + "\n" for members in sets.values())
