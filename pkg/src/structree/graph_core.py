"""Finite balls ("windows") of locally finite graphs.

A window stores its vertices in breadth-first order from the origin, so index 0
is the origin and indices grow with depth.  Vertex sets are Python ints used as
bitmasks over these indices; this keeps corner and nestedness tests cheap.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Iterator, Sequence

from .errors import InputError
from .group_oracle import IDENTITY, ONE, GroupOracle, NormalForm


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def bit_count(mask: int) -> int:
    return mask.bit_count()


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def lowest_bit(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


# ---------------------------------------------------------------------------
# graph sources: anything that can list the neighbours of a vertex


class GraphSource:
    """A locally finite graph given by a neighbour function and an origin."""

    name = "graph"
    origin: Hashable

    def neighbors(self, v) -> list[tuple[Hashable, str]]:  # pragma: no cover
        raise NotImplementedError

    def vertex_id(self, v) -> str:
        return str(v)


class CayleySource(GraphSource):
    name = "cayley"

    def __init__(self, oracle: GroupOracle, generators: Sequence[str] | None = None):
        self.oracle = oracle
        gens = oracle.generators() if generators is None else tuple(generators)
        self.generators = oracle.check_generating_set(gens)
        self.origin = ONE

    def neighbors(self, v: NormalForm):
        return [(self.oracle.step(v, a), a) for a in self.generators]

    def vertex_id(self, v: NormalForm) -> str:
        return str(v)


class GridSource(GraphSource):
    """ℤ×ℤ with unit steps; vertex ids are ``"i,j"``."""

    name = "grid"
    origin = (0, 0)

    def neighbors(self, v):
        i, j = v
        return [((i + 1, j), "x"), ((i - 1, j), "x^-1"), ((i, j + 1), "y"), ((i, j - 1), "y^-1")]

    def vertex_id(self, v) -> str:
        return f"{v[0]},{v[1]}"


class Fig1Source(GridSource):
    """The strip ``j ∈ {0,1}`` of the grid with a vertical spike over ``i = 0``."""

    name = "fig1"

    @staticmethod
    def contains(v) -> bool:
        i, j = v
        return j in (0, 1) or (i == 0 and j >= 0)

    def neighbors(self, v):
        return [(w, a) for w, a in super().neighbors(v) if self.contains(w)]


class RingSource(GraphSource):
    """A 4-cycle c0 c1 c2 c3 with a ray l1 l2 ... at c0 and a ray r1 r2 ... at c2."""

    name = "ring"
    origin = "c0"

    def neighbors(self, v: str):
        if v.startswith("c"):
            i = int(v[1:])
            out = [f"c{(i + 1) % 4}", f"c{(i - 1) % 4}"]
            if i == 0:
                out.append("l1")
            if i == 2:
                out.append("r1")
            return [(w, "") for w in out]
        side, n = v[0], int(v[1:])
        prev = (f"{side}{n - 1}" if n > 1 else ("c0" if side == "l" else "c2"))
        return [(prev, ""), (f"{side}{n + 1}", "")]


@dataclass
class Graph:
    """An explicit finite undirected graph without loops or multi-edges."""

    vertices: list[str]
    edges: list[tuple[str, str]]

    def __post_init__(self):
        names = set(self.vertices)
        if len(names) != len(self.vertices):
            raise InputError("duplicate vertex ids")
        seen = set()
        for u, v in self.edges:
            if u not in names or v not in names:
                raise InputError(f"edge {u}-{v} uses an unknown vertex")
            if u == v:
                raise InputError(f"loop at {u}")
            key = frozenset((u, v))
            if key in seen:
                raise InputError(f"multi-edge {u}-{v}")
            seen.add(key)

    def adjacency(self) -> dict[str, list[str]]:
        adj: dict[str, list[str]] = {v: [] for v in self.vertices}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj


class CustomSource(GraphSource):
    name = "custom"

    def __init__(self, graph: Graph, origin: str):
        if origin not in graph.vertices:
            raise InputError(f"origin {origin} is not a vertex")
        self.graph = graph
        self.origin = origin
        self._adj = graph.adjacency()

    def neighbors(self, v):
        return [(w, "") for w in self._adj[v]]


# ---------------------------------------------------------------------------


@dataclass(eq=False)
class GraphWindow:
    """The ball of radius ``radius`` around the origin (index 0)."""

    source: GraphSource
    radius: int
    keys: list  # underlying vertex objects (normal forms, coordinates, names)
    ids: list[str]
    depth: list[int]
    adj: list[list[int]]
    edges: list[tuple[int, int]]  # u < v
    labels: dict[tuple[int, int], str] = field(default_factory=dict)

    def __post_init__(self):
        self.n = len(self.ids)
        self.index = {v: i for i, v in enumerate(self.ids)}
        self.key_index = {k: i for i, k in enumerate(self.keys)}
        self.adjmask = [mask_of(a) for a in self.adj]
        self.full = (1 << self.n) - 1
        self.edge_index = {e: i for i, e in enumerate(self.edges)}
        self.depth_masks = []
        for d in range(self.radius + 1):
            self.depth_masks.append(mask_of(i for i in range(self.n) if self.depth[i] == d))
        self.frontier = self.depth_masks[self.radius]
        self._dist_cache: dict[int, list[int]] = {}

    # ids and masks ----------------------------------------------------------

    def ids_of(self, mask: int) -> list[str]:
        return sorted(self.ids[i] for i in iter_bits(mask))

    def mask_from_ids(self, names: Iterable[str]) -> int:
        m = 0
        for v in names:
            if v not in self.index:
                raise InputError(f"vertex {v!r} is not in the window")
            m |= 1 << self.index[v]
        return m

    def ball_mask(self, r: int) -> int:
        """Vertices of depth at most ``r``."""
        m = 0
        for d in range(min(r, self.radius) + 1):
            m |= self.depth_masks[d]
        return m

    def max_depth(self, mask: int) -> int:
        for d in range(self.radius, -1, -1):
            if mask & self.depth_masks[d]:
                return d
        return -1

    def edge_id(self, u: int, v: int) -> int:
        return self.edge_index[(u, v) if u < v else (v, u)]

    def label(self, u: int, v: int) -> str:
        return self.labels.get((u, v), "")

    @property
    def interior(self) -> int:
        return self.full & ~self.frontier

    def max_degree(self) -> int:
        return max(len(self.adj[i]) for i in iter_bits(self.interior)) if self.interior else 0

    # connectivity -----------------------------------------------------------

    def neighbors_of_set(self, mask: int) -> int:
        out = 0
        for i in iter_bits(mask):
            out |= self.adjmask[i]
        return out

    def reach(self, start: int, allowed: int) -> int:
        """Vertices of ``allowed`` reachable from ``start & allowed``."""
        seen = start & allowed
        layer = seen
        while layer:
            layer = self.neighbors_of_set(layer) & allowed & ~seen
            seen |= layer
        return seen

    def is_connected(self, mask: int) -> bool:
        if not mask:
            return False
        return self.reach(mask & -mask, mask) == mask

    def components(self, removed: int = 0) -> list[tuple[int, bool]]:
        """Components of the window minus ``removed``, with frontier-reaching flags.

        Ordered by lowest vertex index, so the component of the origin comes first.
        """
        rest = self.full & ~removed
        out = []
        while rest:
            comp = self.reach(rest & -rest, rest)
            out.append((comp, bool(comp & self.frontier)))
            rest &= ~comp
        return out

    def neighborhood(self, mask: int, k: int) -> tuple[int, bool]:
        """``N^k`` of a set and whether the frontier may have truncated it."""
        seen = mask
        layer = mask
        for _ in range(k):
            layer = self.neighbors_of_set(layer) & ~seen
            if not layer:
                break
            seen |= layer
        truncated = bool(seen & ~self.ball_mask(self.radius - k)) if seen else False
        return seen, truncated

    def distances_from(self, v: int) -> list[int]:
        """Window distances from ``v`` (-1 for unreachable)."""
        cached = self._dist_cache.get(v)
        if cached is not None:
            return cached
        dist = [-1] * self.n
        dist[v] = 0
        queue = deque([v])
        while queue:
            u = queue.popleft()
            for w in self.adj[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        if len(self._dist_cache) < 4096:
            self._dist_cache[v] = dist
        return dist

    def distance(self, u: int, v: int) -> int:
        return self.distances_from(u)[v]

    def set_distance(self, v: int, mask: int) -> int:
        dist = self.distances_from(v)
        return min((dist[i] for i in iter_bits(mask) if dist[i] >= 0), default=-1)

    def diameter(self, mask: int) -> int:
        """Largest window distance between two members of ``mask``."""
        members = list(iter_bits(mask))
        best = 0
        for u in members:
            dist = self.distances_from(u)
            for w in members:
                best = max(best, dist[w])
        return best

    def shortest_path(self, u: int, v: int, allowed: int | None = None) -> list[int] | None:
        allowed = self.full if allowed is None else allowed
        prev = {u: -1}
        queue = deque([u])
        while queue:
            x = queue.popleft()
            if x == v:
                path = [v]
                while prev[path[-1]] >= 0:
                    path.append(prev[path[-1]])
                return path[::-1]
            for w in self.adj[x]:
                if w not in prev and (allowed >> w) & 1:
                    prev[w] = x
                    queue.append(w)
        return None

    def bfs_parents(self) -> list[int]:
        """Parent of each vertex in the breadth-first tree from the origin."""
        parent = [-1] * self.n
        for v in range(1, self.n):
            parent[v] = min(w for w in self.adj[v] if self.depth[w] == self.depth[v] - 1)
        return parent

    def tree_path(self, v: int) -> list[int]:
        """The breadth-first tree path from the origin to ``v``."""
        parent = self.__dict__.get("_parents")
        if parent is None:
            parent = self._parents = self.bfs_parents()
        path = [v]
        while parent[path[-1]] >= 0:
            path.append(parent[path[-1]])
        return path[::-1]

    # export -----------------------------------------------------------------

    def to_dot(self, highlight_edges: Iterable[tuple[int, int]] = ()) -> str:
        marked = {tuple(sorted(e)) for e in highlight_edges}
        lines = ["graph window {"]
        for i, name in enumerate(self.ids):
            style = ', style="dashed"' if (self.frontier >> i) & 1 else ""
            lines.append(f'  v{i} [label="{name}"{style}];')
        for u, v in self.edges:
            style = ' [color="red", penwidth=2]' if (u, v) in marked else ""
            lines.append(f"  v{u} -- v{v}{style};")
        lines.append("}")
        return "\n".join(lines)

    def adjacency_listing(self) -> dict[str, list[str]]:
        return {self.ids[i]: sorted(self.ids[j] for j in self.adj[i]) for i in range(self.n)}


def build_window(source: GraphSource, radius: int) -> GraphWindow:
    if radius < 1:
        raise InputError(f"radius must be at least 1, got {radius}")
    depth_of = {source.origin: 0}
    order = [source.origin]
    queue = deque([source.origin])
    nbrs: dict = {}
    while queue:
        v = queue.popleft()
        found = source.neighbors(v)
        nbrs[v] = found
        if depth_of[v] == radius:
            continue
        for w, _ in found:
            if w not in depth_of:
                depth_of[w] = depth_of[v] + 1
                order.append(w)
                queue.append(w)
    order.sort(key=lambda v: (depth_of[v], source.vertex_id(v)))
    ids = [source.vertex_id(v) for v in order]
    if len(set(ids)) != len(ids):
        raise InputError("vertex ids are not unique")
    index = {v: i for i, v in enumerate(order)}
    adj: list[list[int]] = [[] for _ in order]
    edges = set()
    labels = {}
    for v in order:
        i = index[v]
        for w, a in nbrs[v]:
            j = index.get(w)
            if j is None:
                continue
            if j == i:
                raise InputError(f"loop at {ids[i]}")
            if j not in adj[i]:
                adj[i].append(j)
            edges.add((min(i, j), max(i, j)))
            labels.setdefault((i, j), a)
    for i in range(len(order)):
        for j in adj[i]:
            if i not in adj[j]:
                raise InputError(f"neighbour relation is not symmetric at {ids[i]}-{ids[j]}")
        adj[i].sort()
    return GraphWindow(
        source=source,
        radius=radius,
        keys=order,
        ids=ids,
        depth=[depth_of[v] for v in order],
        adj=adj,
        edges=sorted(edges),
        labels=labels,
    )


# ---------------------------------------------------------------------------
# rays


@dataclass(frozen=True)
class RayPair:
    """Two vertex paths from a shared basepoint to the frontier (window indices)."""

    left: tuple[int, ...]
    right: tuple[int, ...]

    def path(self) -> list[int]:
        return list(self.left[::-1]) + list(self.right[1:])

    def validate(self, window: GraphWindow) -> None:
        if not self.left or not self.right or self.left[0] != self.right[0]:
            raise InputError("ray halves must start at the same basepoint")
        path = self.path()
        if len(set(path)) != len(path):
            raise InputError("ray pair is not a simple path")
        for u, v in zip(path, path[1:]):
            if v not in window.adj[u]:
                raise InputError(f"ray pair uses a non-edge {window.ids[u]}-{window.ids[v]}")
        for end in (self.left[-1], self.right[-1]):
            if not (window.frontier >> end) & 1:
                raise InputError(f"ray end {window.ids[end]} is not on the frontier")

    def tails(self, tau: int) -> tuple[int, int]:
        return mask_of(self.left[-tau:]), mask_of(self.right[-tau:])

    def describe(self, window: GraphWindow) -> str:
        return " -> ".join(window.ids[i] for i in self.path())


def ray_pair_from_path(window: GraphWindow, path: Sequence[int], base: int) -> RayPair:
    pos = list(path).index(base)
    return RayPair(tuple(path[pos::-1]), tuple(path[pos:]))


def longest_geodesic_through(window: GraphWindow, v0: int) -> list[int]:
    """Greedy maximal window geodesic through ``v0``.

    Both ends are extended alternately while the whole path stays geodesic;
    ties prefer the candidate sharing fewest neighbours with the vertex two
    steps back (this keeps grid paths straight), then the lower index.
    """
    if (window.frontier >> v0) & 1:
        raise InputError(f"{window.ids[v0]} is on the frontier")
    path = deque([v0])
    grow = [True, True]
    side = 1
    while any(grow):
        if grow[side]:
            end = path[-1] if side else path[0]
            other = path[0] if side else path[-1]
            prev = (path[-2] if side else path[1]) if len(path) > 1 else None
            dist = window.distances_from(other)
            length = len(path) - 1
            cands = [w for w in window.adj[end] if dist[w] == length + 1]
            if cands:
                def score(w):
                    common = bit_count(window.adjmask[w] & window.adjmask[prev]) if prev is not None else 0
                    return (common, w)

                w = min(cands, key=score)
                if side:
                    path.append(w)
                else:
                    path.appendleft(w)
            else:
                grow[side] = False
        side ^= 1
    return list(path)


def geodesic_ray_pair(window: GraphWindow, v0: int) -> RayPair:
    return ray_pair_from_path(window, longest_geodesic_through(window, v0), v0)


def path_between(window: GraphWindow, p: int, q: int) -> RayPair:
    """Ray pair through the breadth-first tree paths to ``p`` and ``q``.

    The halves are split where the two tree paths diverge, so the union is a
    simple path from ``p`` to ``q``.
    """
    a = window.tree_path(p)
    b = window.tree_path(q)
    i = 0
    while i + 1 < len(a) and i + 1 < len(b) and a[i + 1] == b[i + 1]:
        i += 1
    return RayPair(tuple(a[i:]), tuple(b[i:]))


def periodic_rays(window: GraphWindow, max_len: int = 2) -> list[RayPair]:
    """Ray pairs through the origin along the powers of short elements.

    For a word u of at most ``max_len`` generators the line ... u^-1, 1, u, u^2 ...
    is followed as far as it stays in the window; lines that repeat a vertex
    or stop short of the frontier are dropped.  Empty for non-Cayley windows.
    """
    src = window.source
    if not isinstance(src, CayleySource):
        return []
    oracle = src.oracle
    gens = [a for a in src.generators if a != IDENTITY]
    out: list[RayPair] = []
    seen: set[tuple[int, ...]] = set()
    steps = window.radius + 1
    for length in range(1, max_len + 1):
        for word in itertools.product(gens, repeat=length):
            g = oracle.normal_form(word)
            if len(g) < length:
                continue
            line: list[NormalForm | None] = []
            start = oracle.inverse(g)
            h = ONE
            for _ in range(steps):
                h = oracle.multiply(h, start)
            for _ in range(2 * steps):
                x = h
                for a in word:
                    line.append(x)
                    x = oracle.step(x, a)
                h = oracle.multiply(h, g)
            idx = [window.key_index.get(x) for x in line]
            base = idx.index(0)
            lo, hi = base, base
            while lo > 0 and idx[lo - 1] is not None:
                lo -= 1
            while hi + 1 < len(idx) and idx[hi + 1] is not None:
                hi += 1
            path = idx[lo:hi + 1]
            if len(set(path)) != len(path) or lo == 0 or hi == len(idx) - 1:
                continue
            if not all((window.frontier >> v) & 1 for v in (path[0], path[-1])):
                continue
            key = tuple(path) if path[0] < path[-1] else tuple(path[::-1])
            if key not in seen:
                seen.add(key)
                out.append(ray_pair_from_path(window, path, 0))
    return out


def window_from_edges(vertices: Sequence[str], edges: Sequence[tuple[str, str]], origin: str, radius: int) -> GraphWindow:
    return build_window(CustomSource(Graph(list(vertices), list(edges)), origin), radius)


def key_function(window: GraphWindow) -> Callable[[int], object]:
    return lambda i: window.keys[i]
