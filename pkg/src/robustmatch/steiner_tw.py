"""Tree decompositions and a coloring DP for node-weighted Steiner trees on DAGs.

The DP works over a nice tree decomposition of the underlying undirected
graph. A table entry at node x maps a coloring of the bag to the cheapest
partial solution among the vertices introduced below x. Colors:

* ``INACTIVE`` (0): not in the solution;
* ``ACTIVE`` (1): in the solution and already has an active in-neighbour
  among the processed vertices, or is the root;
* ``PENDING`` (2, written 1? in the literature): in the solution but still
  waiting for an active in-neighbour.

A pending vertex may never be forgotten, and a join of two partial
solutions subtracts the cost of the active bag vertices counted twice.
"""

import heapq
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional

from .auxdigraph import Digraph
from .errors import InfeasibleError, InstanceTooLargeError, InvalidInstanceError

INACTIVE, ACTIVE, PENDING = 0, 1, 2
UNREACHABLE = math.inf


# ---------------------------------------------------------------------------
# tree decompositions


@dataclass(frozen=True)
class TreeDecomposition:
    bags: dict
    tree: dict

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags.values()), default=0) - 1

    def tree_edges(self) -> list:
        return sorted({tuple(sorted((a, b))) for a in self.tree for b in self.tree[a]})


def _min_fill_vertex(h: dict) -> int:
    best, best_key = None, None
    for v in sorted(h):
        ns = sorted(h[v])
        fill = 0
        for i, a in enumerate(ns):
            for b in ns[i + 1:]:
                if b not in h[a]:
                    fill += 1
        key = (fill, len(ns), v)
        if best_key is None or key < best_key:
            best, best_key = v, key
    return best


def elimination_ordering(adj: dict) -> list:
    """Min-fill elimination ordering (ties by degree, then vertex id)."""
    h = {v: set(ns) for v, ns in adj.items()}
    order = []
    while h:
        v = _min_fill_vertex(h)
        ns = h.pop(v)
        for a in ns:
            h[a].discard(v)
            h[a] |= ns - {a}
        order.append(v)
    return order


def tree_decomposition(adj: dict, order: Optional[list] = None) -> TreeDecomposition:
    """Decomposition from an elimination ordering (min-fill by default).

    Node i holds the bag of the i-th eliminated vertex. Components of a
    disconnected graph are chained together, which keeps the decomposition
    valid since their bags are disjoint.
    """
    adj = {v: set(ns) for v, ns in adj.items()}
    if not adj:
        return TreeDecomposition({0: frozenset()}, {0: set()})
    if order is None:
        order = elimination_ordering(adj)
    pos = {v: i for i, v in enumerate(order)}
    h = {v: set(ns) for v, ns in adj.items()}
    bags = {}
    parent = {}
    for i, v in enumerate(order):
        ns = h.pop(v)
        bags[i] = frozenset(ns | {v})
        for a in ns:
            h[a].discard(v)
            h[a] |= ns - {a}
        parent[i] = min((pos[a] for a in ns), default=None)
    tree = {i: set() for i in bags}
    roots = [i for i in bags if parent[i] is None]
    for i, p in parent.items():
        if p is not None:
            tree[i].add(p)
            tree[p].add(i)
    for a, b in zip(roots, roots[1:]):
        tree[a].add(b)
        tree[b].add(a)
    return TreeDecomposition(bags, tree)


def decomposition_problems(adj: dict, bags: dict, tree: dict) -> list:
    """Violations of the tree-decomposition properties (empty list if valid)."""
    problems = []
    nodes = list(bags)
    edge_count = sum(len(tree[x]) for x in nodes) // 2
    if nodes:
        seen = {nodes[0]}
        stack = [nodes[0]]
        while stack:
            x = stack.pop()
            for y in tree[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        if len(seen) != len(nodes) or edge_count != len(nodes) - 1:
            problems.append("decomposition tree is not a tree")
    covered = set().union(*bags.values()) if bags else set()
    for v in adj:
        if v not in covered:
            problems.append(f"vertex {v} is in no bag")
    for v in adj:
        for x in adj[v]:
            if v < x and not any(v in b and x in b for b in bags.values()):
                problems.append(f"edge ({v}, {x}) is in no bag")
    for v in covered:
        holding = [x for x in nodes if v in bags[x]]
        seen = {holding[0]}
        stack = [holding[0]]
        while stack:
            x = stack.pop()
            for y in tree[x]:
                if y not in seen and v in bags[y]:
                    seen.add(y)
                    stack.append(y)
        if len(seen) != len(holding):
            problems.append(f"nodes containing {v} are not connected")
    return problems


def is_valid_decomposition(adj: dict, td: TreeDecomposition) -> bool:
    return not decomposition_problems(adj, td.bags, td.tree)


@dataclass(frozen=True)
class NiceNode:
    kind: str  # "leaf", "introduce", "forget" or "join"
    bag: frozenset
    vertex: Optional[int]
    children: tuple


@dataclass(frozen=True)
class NiceTreeDecomposition:
    """Nodes are stored children-first, so the root is the last node."""

    nodes: tuple

    @property
    def root(self) -> int:
        return len(self.nodes) - 1

    @property
    def width(self) -> int:
        return max((len(n.bag) for n in self.nodes), default=0) - 1

    def as_tree_decomposition(self) -> TreeDecomposition:
        tree = {i: set() for i in range(len(self.nodes))}
        for i, n in enumerate(self.nodes):
            for c in n.children:
                tree[i].add(c)
                tree[c].add(i)
        return TreeDecomposition({i: n.bag for i, n in enumerate(self.nodes)}, tree)


def make_nice(td: TreeDecomposition, root: Optional[int] = None) -> NiceTreeDecomposition:
    """Expand a decomposition into leaf/introduce/forget/join nodes.

    The result ends in a chain of forget nodes above the chosen root bag, so
    its root has an empty bag.
    """
    if root is None:
        root = min(td.bags)
    nodes: list = []

    def add(kind, bag, vertex, children):
        nodes.append(NiceNode(kind, frozenset(bag), vertex, tuple(children)))
        return len(nodes) - 1

    def transition(top: int, target: frozenset) -> int:
        bag = set(nodes[top].bag)
        for v in sorted(bag - target):
            bag.discard(v)
            top = add("forget", bag, v, [top])
        for v in sorted(target - bag):
            bag.add(v)
            top = add("introduce", bag, v, [top])
        return top

    # iterative DFS to get a parent-before-child order
    parent = {root: None}
    order = [root]
    stack = [root]
    while stack:
        x = stack.pop()
        for y in sorted(td.tree[x]):
            if y not in parent:
                parent[y] = x
                order.append(y)
                stack.append(y)
    top = {}
    for x in reversed(order):
        bag = td.bags[x]
        children = sorted(y for y in td.tree[x] if parent.get(y) == x)
        if not children:
            top[x] = transition(add("leaf", (), None, []), bag)
            continue
        chains = [transition(top[c], bag) for c in children]
        current = chains[0]
        for other in chains[1:]:
            current = add("join", bag, None, [current, other])
        top[x] = current
    transition(top[root], frozenset())
    if nodes[-1].bag:
        raise AssertionError("nice decomposition root must have an empty bag")
    return NiceTreeDecomposition(tuple(nodes))


def nice_problems(nice: NiceTreeDecomposition, adj: Optional[dict] = None) -> list:
    """Violations of the node-kind rules (and of decomposition validity when ``adj`` is given)."""
    problems = []
    for i, n in enumerate(nice.nodes):
        kids = [nice.nodes[c] for c in n.children]
        if any(c >= i for c in n.children):
            problems.append(f"node {i}: children must precede their parent")
        if n.kind == "leaf":
            if n.bag or kids:
                problems.append(f"node {i}: leaf must have an empty bag and no children")
        elif n.kind == "introduce":
            if len(kids) != 1 or n.vertex in kids[0].bag or n.bag != kids[0].bag | {n.vertex}:
                problems.append(f"node {i}: malformed introduce node")
        elif n.kind == "forget":
            if len(kids) != 1 or n.vertex not in kids[0].bag or n.bag != kids[0].bag - {n.vertex}:
                problems.append(f"node {i}: malformed forget node")
        elif n.kind == "join":
            if len(kids) != 2 or any(k.bag != n.bag for k in kids):
                problems.append(f"node {i}: malformed join node")
        else:
            problems.append(f"node {i}: unknown kind {n.kind}")
    if nice.nodes and nice.nodes[-1].bag:
        problems.append("root bag is not empty")
    if adj is not None:
        td = nice.as_tree_decomposition()
        problems.extend(decomposition_problems(adj, td.bags, td.tree))
    return problems


# ---------------------------------------------------------------------------
# node-weighted directed Steiner tree


@dataclass(frozen=True)
class NWDSTInstance:
    dag: Digraph
    node_costs: dict
    root: int
    terminals: frozenset

    def __post_init__(self):
        if not self.dag.is_acyclic():
            raise InvalidInstanceError("Steiner tree instance must be acyclic")
        vs = set(self.dag.vertices)
        if self.root not in vs or not set(self.terminals) <= vs:
            raise InvalidInstanceError("root and terminals must be vertices")
        for v in vs:
            if self.node_costs.get(v, 0) < 0:
                raise InvalidInstanceError(f"negative cost at vertex {v}")

    def cost(self, v: int) -> int:
        return self.node_costs.get(v, 0)

    def is_feasible(self, chosen: Iterable[int]) -> bool:
        """Root and terminals chosen, every terminal reachable from the root inside the choice."""
        chosen = set(chosen)
        if self.root not in chosen or not set(self.terminals) <= chosen:
            return False
        sub = self.dag.induced(chosen)
        return set(self.terminals) <= sub.reachable_from([self.root])


def _insert(coloring: tuple, pos: int, color: int) -> tuple:
    return coloring[:pos] + (color,) + coloring[pos:]


class NwdstDP:
    """Coloring DP over a nice tree decomposition; tables are kept for inspection.

    ``tables[i]`` maps a coloring (tuple aligned with ``bag_order[i]``) to its
    optimal partial cost; ``back[i]`` holds the child coloring(s) realizing it.
    Vertices not reachable from the root are dropped from every bag.
    """

    def __init__(self, inst: NWDSTInstance, nice: NiceTreeDecomposition):
        self.inst = inst
        self.nice = nice
        dag = inst.dag
        self.relevant = dag.reachable_from([inst.root])
        missing = sorted(t for t in inst.terminals if t not in self.relevant)
        if missing:
            raise InfeasibleError(f"terminal {missing[0]} is unreachable from the root")
        adj = dag.induced(self.relevant).underlying()
        problems = nice_problems(nice, None)
        td = nice.as_tree_decomposition()
        bags = {i: b & self.relevant for i, b in td.bags.items()}
        problems += decomposition_problems(adj, bags, td.tree)
        if problems:
            raise InvalidInstanceError("invalid nice tree decomposition: " + problems[0])
        self.bag_order = [tuple(sorted(n.bag & self.relevant)) for n in nice.nodes]
        self.tables: list = []
        self.back: list = []
        self._run()

    def _run(self):
        inst = self.inst
        pred = inst.dag.pred
        succ = inst.dag.succ
        terminals = set(inst.terminals)
        for i, node in enumerate(self.nice.nodes):
            table: dict = {}
            back: dict = {}
            order = self.bag_order[i]

            def relax(f, cost, ptr):
                old = table.get(f, UNREACHABLE)
                if cost < old:
                    table[f] = cost
                    back[f] = ptr

            if node.kind == "leaf":
                relax((), 0, None)
            elif node.vertex is not None and node.vertex not in self.relevant:
                child = node.children[0]
                for g, cost in self.tables[child].items():
                    relax(g, cost, g)
            elif node.kind == "introduce":
                child = node.children[0]
                v = node.vertex
                corder = self.bag_order[child]
                pos = order.index(v)
                preds = {u for u in pred[v]}
                succs = {u for u in succ[v]}
                cv = inst.cost(v)
                forced = v in terminals or v == inst.root
                for g, cost in self.tables[child].items():
                    if not forced:
                        relax(_insert(g, pos, INACTIVE), cost, g)
                    has_pred = any(g[j] != INACTIVE for j, u in enumerate(corder) if u in preds)
                    own = ACTIVE if (has_pred or v == inst.root) else PENDING
                    updated = tuple(
                        ACTIVE if (c == PENDING and corder[j] in succs) else c
                        for j, c in enumerate(g)
                    )
                    relax(_insert(updated, pos, own), cost + cv, g)
            elif node.kind == "forget":
                child = node.children[0]
                corder = self.bag_order[child]
                pos = corder.index(node.vertex)
                for g, cost in self.tables[child].items():
                    if g[pos] == PENDING:
                        continue
                    relax(g[:pos] + g[pos + 1:], cost, g)
            elif node.kind == "join":
                left, right = node.children
                by_zeros: dict = {}
                for h, cost in self.tables[right].items():
                    key = tuple(c == INACTIVE for c in h)
                    by_zeros.setdefault(key, []).append((h, cost))
                for g, cg in self.tables[left].items():
                    key = tuple(c == INACTIVE for c in g)
                    shared = sum(inst.cost(order[j]) for j, c in enumerate(g) if c != INACTIVE)
                    for h, ch in by_zeros.get(key, ()):
                        f = tuple(
                            INACTIVE if a == INACTIVE else (ACTIVE if ACTIVE in (a, b) else PENDING)
                            for a, b in zip(g, h)
                        )
                        relax(f, cg + ch - shared, (g, h))
            self.tables.append(table)
            self.back.append(back)

    @property
    def optimum(self):
        return self.tables[-1].get((), UNREACHABLE)

    def partial_solution(self, node: int, coloring: tuple) -> frozenset:
        """Replay back-pointers to recover the partial solution of a table entry."""
        chosen = set()
        stack = [(node, coloring)]
        while stack:
            i, f = stack.pop()
            order = self.bag_order[i]
            chosen.update(v for v, c in zip(order, f) if c != INACTIVE)
            n = self.nice.nodes[i]
            ptr = self.back[i][f]
            if n.kind == "leaf":
                continue
            if n.kind == "join":
                stack.append((n.children[0], ptr[0]))
                stack.append((n.children[1], ptr[1]))
            else:
                stack.append((n.children[0], ptr))
        return frozenset(chosen)

    def solution(self) -> tuple:
        if self.optimum == UNREACHABLE:
            raise InfeasibleError("no feasible Steiner tree")
        return self.optimum, self.partial_solution(self.nice.root, ())

    def processed_vertices(self) -> list:
        """For each node, the relevant vertices introduced in its subtree."""
        below: list = []
        for i, n in enumerate(self.nice.nodes):
            acc = set(self.bag_order[i])
            for c in n.children:
                acc |= below[c]
            below.append(acc)
        return below

    def entry_violations(self, node: int, coloring: tuple, below: Optional[list] = None) -> list:
        """Check one table entry against the semantics of the coloring.

        The replayed partial solution must match the coloring on the bag,
        contain every processed terminal, give every active vertex other
        than the root an active in-neighbour unless it is pending, give no
        pending vertex one, and cost exactly the stored value.
        """
        if below is None:
            below = self.processed_vertices()
        inst = self.inst
        part = self.partial_solution(node, coloring)
        processed = below[node]
        order = self.bag_order[node]
        color = dict(zip(order, coloring))
        out = []
        if not part <= processed:
            out.append("partial solution leaves the processed vertices")
        for v in order:
            if (color[v] != INACTIVE) != (v in part):
                out.append(f"bag vertex {v} colored inconsistently")
        for t in inst.terminals:
            if t in processed and t not in part:
                out.append(f"terminal {t} inactive")
        for v in part:
            has_pred = any(u in part for u in inst.dag.pred[v])
            if color.get(v) == PENDING:
                if has_pred:
                    out.append(f"pending vertex {v} already has an active in-neighbour")
            elif v != inst.root and not has_pred:
                out.append(f"active vertex {v} lacks an active in-neighbour")
        if sum(inst.cost(v) for v in part) != self.tables[node][coloring]:
            out.append("stored cost differs from the cost of the replayed partial solution")
        return out

    def forget_rule_holds(self) -> bool:
        """No entry of a forget node descends from a coloring where the forgotten vertex is pending."""
        for i, n in enumerate(self.nice.nodes):
            if n.kind != "forget" or n.vertex not in self.relevant:
                continue
            pos = self.bag_order[n.children[0]].index(n.vertex)
            if any(g[pos] == PENDING for g in self.back[i].values()):
                return False
        return True

    def join_correction_holds(self) -> bool:
        """Every join entry equals the cost of the union of its two replayed partial solutions."""
        inst = self.inst
        for i, n in enumerate(self.nice.nodes):
            if n.kind != "join":
                continue
            left, right = n.children
            for f, (g, h) in self.back[i].items():
                union = self.partial_solution(left, g) | self.partial_solution(right, h)
                if sum(inst.cost(v) for v in union) != self.tables[i][f]:
                    return False
        return True


def nwdst_solve(inst: NWDSTInstance, nice: Optional[NiceTreeDecomposition] = None) -> tuple:
    """Minimum-cost vertex set connecting the root to all terminals.

    Returns ``(cost, vertex set)``; raises InfeasibleError if some terminal
    is unreachable from the root.
    """
    if nice is None:
        return solve_nwdst_auto(inst)
    return NwdstDP(inst, nice).solution()


def decompose_instance(inst: NWDSTInstance) -> NiceTreeDecomposition:
    relevant = inst.dag.reachable_from([inst.root])
    adj = inst.dag.induced(relevant).underlying()
    return make_nice(tree_decomposition(adj))


def solve_nwdst_auto(inst: NWDSTInstance) -> tuple:
    missing = sorted(t for t in inst.terminals if t not in inst.dag.reachable_from([inst.root]))
    if missing:
        raise InfeasibleError(f"terminal {missing[0]} is unreachable from the root")
    return NwdstDP(inst, decompose_instance(inst)).solution()


def nwdst_brute_force(inst: NWDSTInstance, cap: int = 20) -> tuple:
    """Exhaustive search over vertex subsets, cheapest first by cost then size."""
    required = set(inst.terminals) | {inst.root}
    optional = [v for v in inst.dag.vertices if v not in required]
    if len(optional) > cap:
        raise InstanceTooLargeError(f"{len(optional)} optional vertices exceed cap {cap}")
    best = None
    for k in range(len(optional) + 1):
        for extra in combinations(optional, k):
            chosen = required | set(extra)
            cost = sum(inst.cost(v) for v in chosen)
            if best is not None and cost >= best[0]:
                continue
            if inst.is_feasible(chosen):
                best = (cost, frozenset(chosen))
    if best is None:
        raise InfeasibleError("no feasible Steiner tree")
    return best


# ---------------------------------------------------------------------------
# reductions


def arc_to_node_weighted(dag: Digraph, arc_costs: dict, root: int, terminals: Iterable[int]) -> tuple:
    """Subdivide every arc; the new middle vertex carries the arc cost.

    Returns the instance and a map from subdivision vertex to original arc.
    """
    if not dag.is_acyclic():
        raise InvalidInstanceError("arc-weighted instance must be acyclic")
    next_id = max(dag.vertices, default=-1) + 1
    middle = {}
    arcs = []
    costs = {v: 0 for v in dag.vertices}
    for a, b in sorted(dag.arcs):
        x = next_id
        next_id += 1
        middle[x] = (a, b)
        costs[x] = arc_costs.get((a, b), 0)
        arcs += [(a, x), (x, b)]
    new = Digraph(list(dag.vertices) + list(middle), arcs)
    return NWDSTInstance(new, costs, root, frozenset(terminals)), middle


def source_cover_to_nwdst(sc) -> NWDSTInstance:
    """New root joined to every source; sources cost one, everything else zero."""
    dag = sc.dag
    root = max(dag.vertices) + 1
    arcs = list(dag.arcs) + [(root, s) for s in dag.sources]
    costs = {v: 0 for v in dag.vertices}
    costs[root] = 0
    for s in dag.sources:
        costs[s] = 1
    return NWDSTInstance(Digraph(list(dag.vertices) + [root], arcs), costs, root, frozenset(dag.sinks))


def shortest_arc_path_cost(dag: Digraph, arc_costs: dict, source: int, target: int):
    """Dijkstra over arc costs; UNREACHABLE if no path."""
    dist = {source: 0}
    heap = [(0, source)]
    while heap:
        d, v = heapq.heappop(heap)
        if v == target:
            return d
        if d > dist.get(v, UNREACHABLE):
            continue
        for x in dag.succ[v]:
            nd = d + arc_costs.get((v, x), 0)
            if nd < dist.get(x, UNREACHABLE):
                dist[x] = nd
                heapq.heappush(heap, (nd, x))
    return UNREACHABLE
