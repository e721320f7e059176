"""Tree decompositions of windows and the cuts they induce."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .cuts import DEFAULT_TAU, Cut, CutUniverse, cuts_splitting_ray, make_cut, min_cuts_for_ray, witness_rays
from .errors import ConsistencyError, InputError, WindowTooSmallError
from .graph_core import GraphWindow, RayPair, bit_count, iter_bits, periodic_rays
from .structure_tree import Block, StructureTree, check_tree


@dataclass
class TreeDecomposition:
    window: GraphWindow
    nodes: list[str]  # node labels
    tree_edges: list[tuple[int, int]]
    bags: list[int]  # vertex masks
    levels: list[int] = field(default_factory=list)
    scope: int | None = None  # vertices on which (T1)-(T3) are checked; default interior

    def __post_init__(self):
        if len(self.nodes) != len(self.bags):
            raise InputError("one bag per tree node is required")
        self.scope = self.window.interior if self.scope is None else self.scope

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in self.nodes]
        for a, b in self.tree_edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj

    @property
    def width(self) -> int:
        return max((bit_count(b) for b in self.bags), default=0) - 1

    def max_bag_size_per_level(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for lvl, bag in zip(self.levels, self.bags):
            out[lvl] = max(out.get(lvl, 0), bit_count(bag))
        return out

    def to_dot(self) -> str:
        lines = ["graph decomposition {"]
        for i, bag in enumerate(self.bags):
            label = " ".join(self.window.ids_of(bag))
            lines.append(f'  n{i} [label="{self.nodes[i]}: {label}"];')
        for a, b in self.tree_edges:
            lines.append(f"  n{a} -- n{b};")
        lines.append("}")
        return "\n".join(lines)


@dataclass
class ValidationReport:
    t1: bool
    t2: bool
    t3: bool
    width: int
    witnesses: dict[str, str] = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return self.t1 and self.t2 and self.t3


def _check_is_tree(decomp: TreeDecomposition) -> None:
    try:
        check_tree(len(decomp.nodes), decomp.tree_edges)
    except ConsistencyError as exc:
        raise InputError(f"decomposition tree is not a tree: {exc}") from None


def _node_sets(decomp: TreeDecomposition) -> dict[int, list[int]]:
    where: dict[int, list[int]] = {}
    for t, bag in enumerate(decomp.bags):
        for v in iter_bits(bag):
            where.setdefault(v, []).append(t)
    return where


def _connected_in_tree(adj: list[list[int]], nodes: Sequence[int]) -> bool:
    if not nodes:
        return True
    allowed = set(nodes)
    seen = {nodes[0]}
    stack = [nodes[0]]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y in allowed and y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == len(allowed)


def validate(decomp: TreeDecomposition) -> ValidationReport:
    """Check (T1)-(T3) on the scope vertices (frontier truncation is ignored)."""
    _check_is_tree(decomp)
    w = decomp.window
    scope = decomp.scope
    where = _node_sets(decomp)
    witnesses = {}
    t1 = True
    for v in iter_bits(scope):
        if v not in where:
            t1 = False
            witnesses["T1"] = f"vertex {w.ids[v]} is in no bag"
            break
    t2 = True
    for u, v in w.edges:
        if (scope >> u) & 1 and (scope >> v) & 1:
            pair = (1 << u) | (1 << v)
            if not any(bag & pair == pair for bag in decomp.bags):
                t2 = False
                witnesses["T2"] = f"edge {w.ids[u]}-{w.ids[v]} is in no bag"
                break
    t3 = True
    adj = decomp.adjacency()
    for v in iter_bits(scope):
        if not _connected_in_tree(adj, where.get(v, [])):
            t3 = False
            witnesses["T3"] = f"bags containing {w.ids[v]} do not form a subtree"
            break
    return ValidationReport(t1, t2, t3, decomp.width, witnesses)


def ball_decomposition(window: GraphWindow) -> TreeDecomposition:
    """Bags βC for the components C of the window minus the balls B_n, n < R.

    The root bag is the origin; a level-n node hangs below the level-(n-1) node
    whose component contains it.
    """
    if window.radius < 2:
        raise InputError("ball decomposition needs radius at least 2")
    nodes = ["B0"]
    bags = [1]
    levels = [-1]
    edges: list[tuple[int, int]] = []
    prev: list[tuple[int, int]] = [(window.full, 0)]  # (component mask, node)
    for n in range(window.radius):
        ball = window.ball_mask(n)
        current = []
        for comp, _ in window.components(ball):
            outer = window.neighbors_of_set(comp) & ball
            inner = window.neighbors_of_set(outer) & comp
            node = len(nodes)
            parent = next(t for mask, t in prev if comp & ~mask == 0)
            nodes.append(f"L{n}.{len(current)}")
            bags.append(outer | inner)
            levels.append(n)
            edges.append((parent, node))
            current.append((comp, node))
        prev = current
    return TreeDecomposition(window, nodes, edges, bags, levels)


def _steiner_nodes(adj: list[list[int]], terminals: set[int], allowed: set[int]) -> set[int]:
    """Nodes of the minimal subtree spanning ``terminals`` inside the subtree ``allowed``."""
    if len(terminals) <= 1:
        return set(terminals)
    keep = set(allowed)
    changed = True
    while changed:
        changed = False
        for x in list(keep):
            if x in terminals:
                continue
            if sum(1 for y in adj[x] if y in keep) <= 1:
                keep.discard(x)
                changed = True
    return keep


def normalize(decomp: TreeDecomposition) -> TreeDecomposition:
    """Prune each vertex to the subtree spanned by its chosen edge bags, then drop empty bags."""
    report = validate(decomp)
    if not report.valid:
        raise InputError(f"cannot normalize an invalid decomposition: {report.witnesses}")
    w = decomp.window
    adj = decomp.adjacency()
    where = _node_sets(decomp)
    chosen: dict[int, set[int]] = {}
    for u, v in w.edges:
        pair = (1 << u) | (1 << v)
        t = next((t for t, bag in enumerate(decomp.bags) if bag & pair == pair), None)
        if t is None:
            continue
        chosen.setdefault(u, set()).add(t)
        chosen.setdefault(v, set()).add(t)
    bags = list(decomp.bags)
    for v, nodes in where.items():
        allowed = set(nodes)
        terminals = chosen.get(v) or {min(nodes)}
        terminals &= allowed
        if not _connected_in_tree(adj, nodes):
            continue  # outside the scope; leave untouched
        keep = _steiner_nodes(adj, terminals, allowed)
        for t in allowed - keep:
            bags[t] &= ~(1 << v)
    return _drop_empty(decomp, bags)


def _drop_empty(decomp: TreeDecomposition, bags: list[int]) -> TreeDecomposition:
    n = len(bags)
    adj: list[set[int]] = [set() for _ in range(n)]
    for a, b in decomp.tree_edges:
        adj[a].add(b)
        adj[b].add(a)
    alive = set(range(n))
    for x in range(n):
        if bags[x] or len(alive) == 1:
            continue
        nbrs = sorted(adj[x])
        alive.discard(x)
        for y in nbrs:
            adj[y].discard(x)
        if nbrs:  # contract: hang the other neighbours on the first one
            hub = nbrs[0]
            for y in nbrs[1:]:
                adj[hub].add(y)
                adj[y].add(hub)
        adj[x] = set()
    order = sorted(alive)
    new = {old: i for i, old in enumerate(order)}
    edges = sorted({(min(new[a], new[b]), max(new[a], new[b])) for a in order for b in adj[a]})
    levels = [decomp.levels[i] for i in order] if decomp.levels else []
    return TreeDecomposition(
        decomp.window, [decomp.nodes[i] for i in order], edges, [bags[i] for i in order], levels, decomp.scope
    )


@dataclass
class OttoReport:
    max_bags_per_vertex: int
    nonempty: bool
    adjacent_bags_meet: bool
    max_tree_degree: int

    @property
    def all_hold(self) -> bool:
        return self.nonempty and self.adjacent_bags_meet and self.max_bags_per_vertex >= 1


def otto_properties(decomp: TreeDecomposition) -> OttoReport:
    """The four normal-form properties: finite occurrence, non-empty bags,
    intersecting neighbours, finite tree degree (the counts are reported)."""
    where = _node_sets(decomp)
    adj = decomp.adjacency()
    return OttoReport(
        max_bags_per_vertex=max((len(v) for v in where.values()), default=0),
        nonempty=all(decomp.bags),
        adjacent_bags_meet=all(decomp.bags[a] & decomp.bags[b] for a, b in decomp.tree_edges),
        max_tree_degree=max((len(a) for a in adj), default=0),
    )


# ---------------------------------------------------------------------------
# cuts from decompositions


def cut_from_decomposition(decomp: TreeDecomposition, ray: Sequence[int], v0: int, n: int) -> Cut:
    """A cut D with v0 ∈ D, d(v0, D̄) ≥ n and the end of ``ray`` in D̄.

    Walks the tree from a bag containing v0 towards the component holding the
    ray's end until the bag keeps distance more than n from v0.
    """
    w = decomp.window
    where = _node_sets(decomp)
    if v0 not in where:
        raise InputError(f"{w.ids[v0]} is in no bag")
    if not ray or not (w.frontier >> ray[-1]) & 1:
        raise InputError("the ray must end on the frontier")
    max_diam = max(w.diameter(bag) for bag in decomp.bags)
    if n + max_diam >= w.radius:
        raise WindowTooSmallError(
            f"need radius > n + max bag diameter = {n} + {max_diam}, have {w.radius}"
        )
    end = ray[-1]
    dist = w.distances_from(v0)
    adj = decomp.adjacency()
    t = min(where[v0])
    came_from = None
    while True:
        bag = decomp.bags[t]
        if all(dist[x] > n for x in iter_bits(bag)):
            break
        if (bag >> end) & 1:
            raise WindowTooSmallError("the ray end lies in a bag near v0")
        target = _component_containing(w, bag, end)
        step = None
        for s in adj[t]:
            if s == came_from:
                continue
            if _subtree_bags(adj, s, t, decomp.bags) & target & ~bag:
                step = s
                break
        if step is None:
            raise WindowTooSmallError("the tree walk left the window before reaching distance n")
        came_from, t = t, step
    bag = decomp.bags[t]
    if (bag >> end) & 1:
        raise WindowTooSmallError("the walk reached the ray end before distance n")
    far = _component_containing(w, bag, end)
    rest = w.full & ~far
    near = w.reach(1 << v0, rest)
    cut = make_cut(w, near)
    d = w.max_degree()
    m = max(bit_count(b) for b in decomp.bags)
    if not (cut.side >> v0) & 1:
        raise ConsistencyError("v0 is not on the near side")
    if w.set_distance(v0, cut.complement_mask) < n:
        raise ConsistencyError("far side is closer than n")
    if not (cut.complement_mask >> end) & 1:
        raise ConsistencyError("ray end is not on the far side")
    if cut.weight > d * m:
        raise ConsistencyError(f"weight {cut.weight} exceeds d·m = {d * m}")
    return cut


def _component_containing(w: GraphWindow, removed: int, v: int) -> int:
    return w.reach(1 << v, w.full & ~removed)


def _subtree_bags(adj, start: int, blocked: int, bags: Sequence[int]) -> int:
    out = 0
    seen = {start, blocked}
    stack = [start]
    while stack:
        x = stack.pop()
        out |= bags[x]
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return out


# ---------------------------------------------------------------------------
# accessibility


@dataclass
class AccessibilityReport:
    k: int
    search_bound: int
    rays_checked: int
    splittable: int
    violations: list[tuple[RayPair, int]]

    @property
    def passed(self) -> bool:
        return not self.violations


def accessibility_check(
    window: GraphWindow,
    k: int,
    rays: Sequence[RayPair] | None = None,
    search_bound: int | None = None,
    tau: int = DEFAULT_TAU,
) -> AccessibilityReport:
    """Every ray split by some cut of weight ≤ search_bound must be split by a k-cut.

    Without explicit rays, the witness rays of the search-bound universe are
    used (they realise every minimum splitting weight that occurs in the window),
    plus the lines along powers of short elements on Cayley windows.
    """
    if k < 1:
        raise InputError("k must be at least 1")
    bound = k + 1 if search_bound is None else search_bound
    if bound < k:
        raise InputError("search bound must be at least k")
    universe = CutUniverse(window, bound)
    # k-cuts are certified deeper than search-bound cuts, so look for them separately
    small = universe if bound == k else CutUniverse(window, k)
    if rays is None:
        rays = witness_rays(universe) + periodic_rays(window)
    violations = []
    splittable = 0
    for ray in rays:
        found = min_cuts_for_ray(universe, ray, tau)
        if not found:
            continue
        splittable += 1
        if found[0].weight > k and not cuts_splitting_ray(small, ray, tau):
            violations.append((ray, found[0].weight))
    return AccessibilityReport(k, bound, len(rays), splittable, violations)


# ---------------------------------------------------------------------------


def covered_radius(window: GraphWindow, mask: int) -> int:
    """Largest r with B_r ⊆ mask (-1 if the origin is missing)."""
    r = -1
    while r + 1 <= window.radius and window.ball_mask(r + 1) & ~mask == 0:
        r += 1
    return r


@dataclass
class StructureDecomposition:
    decomposition: TreeDecomposition
    excluded: list[int]  # open tree vertices
    interior_radius: int


def structure_tree_decomposition(tree: StructureTree, blocks: Sequence[Block]) -> StructureDecomposition:
    """Restrict the structure tree to closed classes and use their blocks as bags.

    Axioms are checked on the largest ball covered by the closed blocks.
    """
    closed = [b.tree_vertex for b in blocks if not b.open]
    excluded = sorted(b.tree_vertex for b in blocks if b.open)
    by_vertex = {b.tree_vertex: b for b in blocks}
    if not closed:
        raise WindowTooSmallError("no closed blocks in this window")
    position = {v: i for i, v in enumerate(closed)}
    edges = [(position[a], position[b]) for a, b in tree.edges if a in position and b in position]
    bags = [by_vertex[v].vertices for v in closed]
    union = 0
    for bag in bags:
        union |= bag
    r = covered_radius(tree.window, union)
    scope = tree.window.ball_mask(r) if r >= 0 else 0
    decomp = TreeDecomposition(tree.window, [f"[{v}]" for v in closed], edges, bags, [], scope)
    return StructureDecomposition(decomp, excluded, r)
