"""Structure trees of nested cut sets, the constant κ, and blocks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .cuts import Cut, is_nested
from .errors import ConsistencyError, InputError, WindowTooSmallError
from .graph_core import GraphWindow, bit_count, iter_bits


class TreeSet:
    """A complement-closed, pairwise nested finite set of cuts of one window."""

    def __init__(self, window: GraphWindow, cuts: Sequence[Cut], check: bool = True):
        sides: dict[int, Cut] = {}
        for c in cuts:
            if c.window is not window:
                raise InputError("cut from a different window")
            sides.setdefault(c.side, c)
            sides.setdefault(c.complement_mask, c.complement())
        self.window = window
        self.cuts = sorted(sides.values(), key=lambda c: (bit_count(c.side), c.sort_key()))
        self.position = {c.side: i for i, c in enumerate(self.cuts)}
        if check:
            for i, c in enumerate(self.cuts):
                for d in self.cuts[i + 1:]:
                    if not is_nested(c, d):
                        raise ConsistencyError(
                            f"tree set is not nested: {c.boundary_ids()} vs {d.boundary_ids()}"
                        )
        self._minimal_over: dict[int, list[int]] = {}

    def __len__(self) -> int:
        return len(self.cuts)

    def index(self, c: Cut) -> int:
        try:
            return self.position[c.side]
        except KeyError:
            raise InputError("cut is not in the tree set") from None

    def complement_index(self, i: int) -> int:
        return self.position[self.cuts[i].complement_mask]

    def interval(self, c: Cut, d: Cut) -> list[Cut]:
        """All E in the set with C ⊆ E ⊆ D."""
        return [e for e in self.cuts if c.side & ~e.side == 0 and e.side & ~d.side == 0]

    def minimal_over(self, i: int) -> list[int]:
        """Indices of the minimal cuts D with C̄ ⊊ D, where C is cut ``i``."""
        if i not in self._minimal_over:
            target = self.cuts[i].complement_mask
            supers = [j for j, d in enumerate(self.cuts) if d.side != target and target & ~d.side == 0]
            minimal = []
            for j in supers:  # cuts are sorted by size, so smaller candidates come first
                dj = self.cuts[j].side
                if not any(self.cuts[m].side & ~dj == 0 for m in minimal):
                    minimal.append(j)
            self._minimal_over[i] = minimal
        return self._minimal_over[i]


def related(c: Cut, d: Cut, treeset: TreeSet) -> bool:
    if c == d:
        return True
    return treeset.index(d) in treeset.minimal_over(treeset.index(c))


def _related_idx(treeset: TreeSet, i: int, j: int) -> bool:
    return i == j or j in treeset.minimal_over(i)


def equivalence_classes(treeset: TreeSet) -> list[list[int]]:
    """Partition of cut indices; checks that the relation is already transitive."""
    n = len(treeset)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(n):
        for j in treeset.minimal_over(i):
            a, b = find(i), find(j)
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    classes = sorted(groups.values(), key=lambda g: g[0])
    for cls in classes:
        for i in cls:
            for j in cls:
                if not _related_idx(treeset, i, j):
                    ci, cj = treeset.cuts[i], treeset.cuts[j]
                    raise ConsistencyError(
                        "relation is not transitive between "
                        f"{ci.boundary_ids()} and {cj.boundary_ids()}"
                    )
    return classes


@dataclass
class StructureTree:
    treeset: TreeSet
    classes: list[list[int]]
    class_of: list[int]
    edges: list[tuple[int, int]]  # (class of C, class of C̄), one per pair, C the smaller index

    @property
    def window(self) -> GraphWindow:
        return self.treeset.window

    @property
    def n_vertices(self) -> int:
        return len(self.classes)

    def neighbors(self, v: int) -> list[int]:
        out = []
        for a, b in self.edges:
            if a == v:
                out.append(b)
            elif b == v:
                out.append(a)
        return sorted(out)

    def class_cuts(self, v: int) -> list[Cut]:
        return [self.treeset.cuts[i] for i in self.classes[v]]

    def class_of_cut(self, c: Cut) -> int:
        return self.class_of[self.treeset.index(c)]

    def edge_pairs(self) -> list[tuple[int, int]]:
        """Cut index pairs (C, C̄) in the same order as ``edges``."""
        out = []
        for i, c in enumerate(self.treeset.cuts):
            j = self.treeset.complement_index(i)
            if i < j:
                out.append((i, j))
        return out

    def to_dot(self, block_sizes: dict[int, int] | None = None) -> str:
        lines = ["graph structure_tree {"]
        for v, cls in enumerate(self.classes):
            label = f"[{v}] size {len(cls)}"
            if block_sizes and v in block_sizes:
                label += f" block {block_sizes[v]}"
            lines.append(f'  t{v} [label="{label}"];')
        for a, b in self.edges:
            lines.append(f"  t{a} -- t{b};")
        lines.append("}")
        return "\n".join(lines)


def build_structure_tree(treeset: TreeSet) -> StructureTree:
    classes = equivalence_classes(treeset)
    class_of = [0] * len(treeset)
    for v, cls in enumerate(classes):
        for i in cls:
            class_of[i] = v
    edges = []
    for i, c in enumerate(treeset.cuts):
        j = treeset.complement_index(i)
        if i < j:
            edges.append((class_of[i], class_of[j]))
    tree = StructureTree(treeset, classes, class_of, edges)
    check_edge_bijection(treeset, class_of)
    check_tree(tree.n_vertices, edges)
    return tree


def check_edge_bijection(treeset: TreeSet, class_of: Sequence[int]) -> None:
    """related(C, D) and related(C̄, D̄) force C = D."""
    seen: dict[tuple[int, int], int] = {}
    for i in range(len(treeset)):
        key = (class_of[i], class_of[treeset.complement_index(i)])
        if key in seen:
            raise ConsistencyError(
                f"two cuts give the same directed tree edge: {treeset.cuts[seen[key]].boundary_ids()} "
                f"and {treeset.cuts[i].boundary_ids()}"
            )
        seen[key] = i


def check_tree(n: int, edges: Sequence[tuple[int, int]]) -> None:
    """Raise ConsistencyError unless the graph is a tree; the message names a witness."""
    seen_edges = set()
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    adj: dict[int, list[int]] = {v: [] for v in range(n)}
    for a, b in edges:
        if a == b:
            raise ConsistencyError(f"structure tree has a loop at vertex {a}")
        key = (min(a, b), max(a, b))
        if key in seen_edges:
            raise ConsistencyError(f"structure tree has a multi-edge {a}-{b}")
        seen_edges.add(key)
        ra, rb = find(a), find(b)
        if ra == rb:
            path = _tree_path(adj, a, b)
            raise ConsistencyError(f"structure tree has a cycle through vertices {path + [a]}")
        parent[ra] = rb
        adj[a].append(b)
        adj[b].append(a)
    roots = {find(v) for v in range(n)}
    if n and len(roots) != 1:
        raise ConsistencyError(f"structure tree is disconnected ({len(roots)} components)")


def _tree_path(adj, a, b) -> list[int]:
    prev = {a: None}
    stack = [a]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in prev:
                prev[y] = x
                stack.append(y)
    path = [b]
    while prev.get(path[-1]) is not None:
        path.append(prev[path[-1]])
    return path[::-1]


# ---------------------------------------------------------------------------
# κ and blocks


@dataclass
class KappaReport:
    kappa: int
    reliable: bool


def compute_kappa(treeset: TreeSet) -> KappaReport:
    """Least κ ≥ 1 with N^κC ∩ C̄ connected for every cut of the set."""
    if not len(treeset):
        raise InputError("tree set is empty")
    w = treeset.window
    for kappa in range(1, w.radius + 1):
        reliable = True
        ok = True
        for c in treeset.cuts:
            nbhd, truncated = w.neighborhood(c.side, kappa)
            part = nbhd & c.complement_mask
            if not w.is_connected(part):
                ok = False
                break
            reliable &= not truncated
        if ok:
            return KappaReport(kappa, reliable)
    raise WindowTooSmallError(f"no κ ≤ {w.radius} makes every N^κC ∩ C̄ connected")


@dataclass
class Block:
    tree_vertex: int
    kappa: int
    vertices: int  # mask
    ell: int
    open: bool
    connected: bool

    @property
    def size(self) -> int:
        return bit_count(self.vertices)


def block(tree: StructureTree, v: int, kappa: int, margin: int | None = None) -> Block:
    """B[C] = ∩ N^κD over the class, cross-checked against ∩D ∪ ⋃(N^κD ∩ D̄).

    The class is open when its block reaches deeper than ``margin`` (default
    R − κ − 1), where uncertified cuts could still join the class.
    """
    w = tree.window
    cuts = tree.class_cuts(v)
    inter = w.full
    core = w.full
    fringe = 0
    ell = 0
    for d in cuts:
        nbhd, _ = w.neighborhood(d.side, kappa)
        inter &= nbhd
        core &= d.side
        outer = nbhd & d.complement_mask
        fringe |= outer
        ell = max(ell, w.diameter(outer))
    if inter != core | fringe:
        raise ConsistencyError(f"block formulas disagree on class {v}")
    margin = w.radius - kappa - 1 if margin is None else margin
    is_open = w.max_depth(inter) > margin
    return Block(v, kappa, inter, ell, is_open, w.is_connected(inter))


def all_blocks(tree: StructureTree, kappa: int, margin: int | None = None) -> list[Block]:
    return [block(tree, v, kappa, margin) for v in range(tree.n_vertices)]


@dataclass
class EndEstimate:
    ends: int  # 0, 1 or 2 (meaning "many")
    stable: bool
    counts: list[int] = field(default_factory=list)

    def label(self) -> str:
        return "many" if self.ends >= 2 else str(self.ends)


def count_escaping_components(window: GraphWindow, vertices: int, n: int, horizon: int | None = None) -> int:
    """Components of (vertices ∩ B_horizon) − B_n meeting depth ``horizon`` (capped at 2)."""
    horizon = window.radius if horizon is None else horizon
    rest = vertices & window.ball_mask(horizon) & ~window.ball_mask(n)
    edge = window.depth_masks[horizon]
    count = 0
    while rest:
        comp = window.reach(rest & -rest, rest)
        if comp & edge:
            count += 1
        rest &= ~comp
    return min(count, 2)


def block_end_estimate(vertices: int, window: GraphWindow, n: int, horizon: int | None = None) -> EndEstimate:
    """Escaping components of the block minus the ball B_n, capped at 2 ("many").

    A component escapes if it reaches depth ``horizon`` (default: the frontier).
    For open classes pass the certified depth R - k - 1 as horizon, since the
    window block also holds pieces hanging off uncertified cuts.  The estimate is
    stable when probes n - 1 and n agree.
    """
    horizon = window.radius if horizon is None else horizon
    if not 1 <= n < horizon or horizon > window.radius:
        raise InputError(f"probe radius must lie in [1, {horizon - 1}]")
    counts = [count_escaping_components(window, vertices, r, horizon) for r in (n - 1, n)]
    return EndEstimate(counts[-1], counts[0] == counts[1], counts)
