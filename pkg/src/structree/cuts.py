"""Cuts of finite windows: boundaries, enumeration, nestedness and optimal cuts.

A cut of a window is a vertex set C such that C and its complement are both
non-empty and connected.  Its edge boundary is then a bond (a minimal edge cut),
so cuts of weight at most k are enumerated as bonds with at most k edges.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .errors import ConsistencyError, InputError, NotACutError
from .graph_core import GraphWindow, RayPair, bit_count, iter_bits, mask_of, path_between

DEFAULT_TAU = 3


class Cut:
    """A side ``C`` of a window bipartition (``side`` is a bitmask)."""

    __slots__ = ("window", "side", "__dict__")

    def __init__(self, window: GraphWindow, side: int):
        self.window = window
        self.side = side

    def __eq__(self, other):
        return isinstance(other, Cut) and other.window is self.window and other.side == self.side

    def __hash__(self):
        return hash(self.side)

    def __repr__(self):
        ids = self.window.ids_of(self.side)
        shown = ids if len(ids) <= 6 else ids[:6] + ["..."]
        return f"Cut(weight={self.weight}, side={shown})"

    @cached_property
    def complement_mask(self) -> int:
        return self.window.full & ~self.side

    def complement(self) -> "Cut":
        return Cut(self.window, self.complement_mask)

    @cached_property
    def edge_boundary(self) -> tuple[tuple[int, int], ...]:
        """Boundary edges as (inside, outside) index pairs, sorted."""
        w = self.window
        out = []
        for u in iter_bits(self.side):
            for v in iter_bits(w.adjmask[u] & self.complement_mask):
                out.append((u, v))
        return tuple(sorted(out))

    @cached_property
    def vertex_boundary(self) -> int:
        m = 0
        for u, v in self.edge_boundary:
            m |= (1 << u) | (1 << v)
        return m

    @property
    def weight(self) -> int:
        return len(self.edge_boundary)

    @property
    def side_frontier_reaching(self) -> bool:
        return bool(self.side & self.window.frontier)

    @property
    def complement_frontier_reaching(self) -> bool:
        return bool(self.complement_mask & self.window.frontier)

    @property
    def two_sided(self) -> bool:
        return self.side_frontier_reaching and self.complement_frontier_reaching

    def certified(self, k: int) -> bool:
        """Boundary deep enough inside the window for a weight bound ``k``."""
        return self.window.max_depth(self.vertex_boundary) <= self.window.radius - k - 1

    @cached_property
    def key(self) -> tuple[tuple, ...]:
        """Boundary edges by vertex key, oriented from the side outwards."""
        keys = self.window.keys
        return tuple(sorted((keys[u], keys[v]) for u, v in self.edge_boundary))

    def boundary_ids(self) -> list[tuple[str, str]]:
        ids = self.window.ids
        return sorted((ids[u], ids[v]) for u, v in self.edge_boundary)

    def side_ids(self) -> list[str]:
        return self.window.ids_of(self.side)

    def sort_key(self):
        return (self.weight, self.boundary_ids(), self.side & 1 == 0)

    def to_dict(self, m: int | None = None) -> dict:
        out = {
            "weight": self.weight,
            "edge_boundary": [list(e) for e in self.boundary_ids()],
            "vertex_boundary": self.window.ids_of(self.vertex_boundary),
            "side_size": bit_count(self.side),
            "side_frontier_reaching": self.side_frontier_reaching,
            "complement_frontier_reaching": self.complement_frontier_reaching,
        }
        if bit_count(self.side) <= 40:
            out["side"] = self.side_ids()
        if m is not None:
            out["m"] = m
        return out


def _components_as_ids(window: GraphWindow, mask: int) -> list[list[str]]:
    parts = []
    rest = mask
    while rest:
        comp = window.reach(rest & -rest, rest)
        parts.append(window.ids_of(comp))
        rest &= ~comp
    return parts


def make_cut(window: GraphWindow, side: int | Iterable[str]) -> Cut:
    if not isinstance(side, int):
        side = window.mask_from_ids(side)
    if side == 0 or side & ~window.full or side == window.full:
        raise InputError("a cut side must be a non-empty proper subset of the window")
    rest = window.full & ~side
    for name, mask in (("side", side), ("complement", rest)):
        if not window.is_connected(mask):
            parts = _components_as_ids(window, mask)
            raise NotACutError(f"{name} has {len(parts)} components", parts)
    return Cut(window, side)


def corners(c: Cut, d: Cut) -> tuple[int, int, int, int]:
    """(C∩D, C∩D̄, C̄∩D, C̄∩D̄); opposite pairs are positions (0, 3) and (1, 2)."""
    if c.window is not d.window:
        raise InputError("cuts belong to different windows")
    cc, dc = c.complement_mask, d.complement_mask
    return c.side & d.side, c.side & dc, cc & d.side, cc & dc


OPPOSITE_CORNERS = ((0, 3), (1, 2))


def is_nested(c: Cut, d: Cut) -> bool:
    if c.window is not d.window:
        raise InputError("cuts belong to different windows")
    a, b = c.side, d.side
    full = c.window.full
    return not (a & b) or not (a & ~b) or not (~a & b & full) or (a | b) == full


# ---------------------------------------------------------------------------
# enumeration


def _split_or_path(window: GraphWindow, u: int, v: int, blocked: set[tuple[int, int]]):
    """Bidirectional search between ``u`` and ``v`` avoiding ``blocked`` edges.

    Returns ("path", vertices) or ("split", component mask of one endpoint).  The
    side that runs out first is returned, so the work is proportional to the
    smaller side when the endpoints are separated.
    """
    adj = window.adj
    prev = [{u: -1}, {v: -1}]
    queues = [deque([u]), deque([v])]
    while True:
        side = 0 if len(queues[0]) <= len(queues[1]) else 1
        if not queues[side]:
            return "split", mask_of(prev[side])
        x = queues[side].popleft()
        mine, theirs = prev[side], prev[1 - side]
        for y in adj[x]:
            if y in mine or ((x, y) if x < y else (y, x)) in blocked:
                continue
            mine[y] = x
            if y in theirs:
                left, right = [y], [y]
                while mine[left[-1]] >= 0:
                    left.append(mine[left[-1]])
                while theirs[right[-1]] >= 0:
                    right.append(theirs[right[-1]])
                path = left[::-1] + right[1:]
                return "path", path if side == 0 else path[::-1]
            queues[side].append(y)


def enumerate_bonds(
    window: GraphWindow,
    start_edges: Iterable[tuple[int, int]],
    k: int,
    allowed: set[tuple[int, int]] | None = None,
) -> list[int]:
    """Sides (containing the origin) of all bonds with at most ``k`` edges through a start edge.

    Branching follows the observation that a bond containing the edge set F but
    not yet separating the ends of F's first edge must contain an edge of every
    path between them.  ``allowed`` restricts which edges may be added.
    """
    if k < 1:
        return []
    found: dict[int, None] = {}
    visited: set[frozenset] = set()
    full = window.full

    def recurse(first: tuple[int, int], chosen: frozenset):
        if chosen in visited:
            return
        visited.add(chosen)
        kind, result = _split_or_path(window, first[0], first[1], set(chosen))
        if kind == "split":
            comp = result
            rest = full & ~comp
            for a, b in chosen:
                if ((comp >> a) & 1) == ((comp >> b) & 1):
                    return
            if not window.is_connected(rest):
                return
            side = comp if comp & 1 else rest
            found[side] = None
            return
        if len(chosen) >= k:
            return
        for x, y in zip(result, result[1:]):
            e = (x, y) if x < y else (y, x)
            if allowed is not None and e not in allowed:
                continue
            recurse(first, chosen | {e})

    for e in start_edges:
        e = (min(e), max(e))
        if allowed is not None and e not in allowed:
            continue
        recurse(e, frozenset([e]))
    return list(found)


def certified_edges(window: GraphWindow, k: int) -> set[tuple[int, int]]:
    limit = window.radius - k - 1
    return {(u, v) for u, v in window.edges if window.depth[u] <= limit and window.depth[v] <= limit}


def enumerate_k_cuts(
    window: GraphWindow, seed: int | Iterable[str] | None, k: int, certified_only: bool = False
) -> list[Cut]:
    """All cuts of weight ≤ k whose vertex boundary meets ``seed`` (all vertices if None).

    Each unordered pair {C, C̄} is returned once, as the side containing the origin.
    """
    if seed is None:
        seed = window.full
    elif not isinstance(seed, int):
        seed = window.mask_from_ids(seed)
    if not seed:
        raise InputError("seed set must be non-empty")
    allowed = certified_edges(window, k) if certified_only else None
    starts = [(u, v) for u, v in window.edges if (seed >> u) & 1 or (seed >> v) & 1]
    sides = enumerate_bonds(window, starts, k, allowed)
    cuts = [Cut(window, s) for s in sides]
    cuts.sort(key=Cut.sort_key)
    return cuts


# ---------------------------------------------------------------------------
# universes and the counters m_k


@dataclass(eq=False)
class CutUniverse:
    """All certified cuts of weight ≤ k in a window, one per complementary pair."""

    window: GraphWindow
    k: int
    cuts: list[Cut] = field(default_factory=list)

    def __post_init__(self):
        if not self.cuts:
            self.cuts = enumerate_k_cuts(self.window, None, self.k, certified_only=True)
        self._by_vertex: dict[int, list[int]] = {}
        for i, c in enumerate(self.cuts):
            for v in iter_bits(c.vertex_boundary):
                self._by_vertex.setdefault(v, []).append(i)
        self._position = {c.side: i for i, c in enumerate(self.cuts)}
        self._m: dict[int, int] = {}

    def representative(self, c: Cut) -> Cut:
        """The stored orientation of ``c`` (or of its complement)."""
        if c.side in self._position:
            return self.cuts[self._position[c.side]]
        if c.complement_mask in self._position:
            return self.cuts[self._position[c.complement_mask]]
        raise InputError("cut is not in the universe")

    def __contains__(self, c: Cut) -> bool:
        return c.side in self._position or c.complement_mask in self._position

    def candidates_near(self, mask: int) -> list[Cut]:
        idx = set()
        for v in iter_bits(mask):
            idx.update(self._by_vertex.get(v, ()))
        return [self.cuts[i] for i in sorted(idx)]

    def m(self, c: Cut) -> int:
        rep = self.representative(c) if c in self else c
        side = rep.side
        if side not in self._m:
            self._m[side] = m_k(rep, self)
        return self._m[side]

    def two_sided(self) -> list[Cut]:
        return [c for c in self.cuts if c.two_sided]


def connected_superset(window: GraphWindow, mask: int) -> int:
    """``mask`` plus shortest paths from its first vertex to every other member."""
    members = list(iter_bits(mask))
    if not members:
        return 0
    out = mask
    for v in members[1:]:
        out |= mask_of(window.shortest_path(members[0], v))
    return out


def m_k(c: Cut, universe: CutUniverse) -> int:
    """Oriented count of universe cuts not nested with ``c``.

    Any cut D not nested with C has a boundary vertex in every connected set
    containing βC, so only cuts whose boundary meets such a set are tested.
    """
    probe = connected_superset(c.window, c.vertex_boundary)
    return 2 * sum(1 for d in universe.candidates_near(probe) if not is_nested(c, d))


def m_k_global(c: Cut, universe: CutUniverse) -> int:
    """Same count, testing every cut of the universe (reference implementation)."""
    return 2 * sum(1 for d in universe.cuts if not is_nested(c, d))


# ---------------------------------------------------------------------------
# rays


def splits_ray(c: Cut, ray: RayPair, tau: int = DEFAULT_TAU) -> bool:
    left, right = ray.tails(tau)
    side, rest = c.side, c.complement_mask
    return (left & ~side == 0 and right & ~rest == 0) or (left & ~rest == 0 and right & ~side == 0)


def cuts_splitting_ray(universe: CutUniverse, ray: RayPair, tau: int = DEFAULT_TAU) -> list[Cut]:
    if tau < 1:
        raise InputError("tail depth must be at least 1")
    return [c for c in universe.cuts if splits_ray(c, ray, tau)]


def min_cuts_for_ray(universe: CutUniverse, ray: RayPair, tau: int = DEFAULT_TAU) -> list[Cut]:
    found = cuts_splitting_ray(universe, ray, tau)
    if not found:
        return []
    w = min(c.weight for c in found)
    return [c for c in found if c.weight == w]


def witness_rays(universe: CutUniverse) -> list[RayPair]:
    """One ray pair for every cut that is optimal for some ray between frontier vertices.

    Cuts are processed in increasing (weight, m).  Frontier vertices are grouped by
    the sides of all cuts of strictly smaller (weight, m); a cut is optimal for a
    ray iff some group has vertices on both of its sides, and the breadth-first
    tree paths to two such vertices form the witness ray.  Those paths are
    geodesic, so their tails never cross a certified boundary and the ray is
    split exactly when its endpoints are separated.
    """
    window = universe.window
    levels: dict[tuple[int, int], list[Cut]] = {}
    for c in universe.two_sided():
        levels.setdefault((c.weight, universe.m(c)), []).append(c)
    groups = [window.frontier] if window.frontier else []
    rays: dict[RayPair, None] = {}
    for level in sorted(levels):
        for c in levels[level]:
            for g in groups:
                a, b = g & c.side, g & c.complement_mask
                if a and b:
                    p, q = (a & -a).bit_length() - 1, (b & -b).bit_length() - 1
                    rays[path_between(window, p, q)] = None
                    break
        for c in levels[level]:
            refined = []
            for g in groups:
                for part in (g & c.side, g & c.complement_mask):
                    if part:
                        refined.append(part)
            groups = refined
    return list(rays)


def sample_rays(window: GraphWindow, count: int = 12) -> list[RayPair]:
    """Deterministic ray pairs between frontier vertices spread over the window."""
    front = list(iter_bits(window.frontier))
    if len(front) < 2:
        return []
    step = max(1, len(front) // count)
    picks = front[::step][:count]
    out = []
    for i, p in enumerate(picks):
        for q in picks[i + 1:]:
            out.append(path_between(window, p, q))
    return out


def optimal_cuts(universe: CutUniverse, rays: Sequence[RayPair] | None = None, tau: int = DEFAULT_TAU) -> list[Cut]:
    """Union over rays of the cuts of minimum weight, then minimum m, splitting the ray.

    Raises ConsistencyError if two selected cuts are not nested.
    """
    if rays is None:
        rays = witness_rays(universe)
    chosen: dict[int, Cut] = {}
    for ray in rays:
        best = min_cuts_for_ray(universe, ray, tau)
        if not best:
            continue
        m_best = min(universe.m(c) for c in best)
        for c in best:
            if universe.m(c) == m_best:
                chosen[c.side] = c
    result = sorted(chosen.values(), key=Cut.sort_key)
    check_pairwise_nested(result)
    return result


def check_pairwise_nested(cuts: Sequence[Cut]) -> None:
    for i, c in enumerate(cuts):
        for d in cuts[i + 1:]:
            if not is_nested(c, d):
                raise ConsistencyError(
                    "optimal cuts are not nested: "
                    f"{c.boundary_ids()} and {d.boundary_ids()} (window or k too small?)"
                )


def default_k(window: GraphWindow, rays: Sequence[RayPair], k_max: int = 4, tau: int = DEFAULT_TAU) -> int:
    """Largest minimum splitting weight over ``rays``, searching weights up to ``k_max``."""
    universe = CutUniverse(window, k_max)
    best = 0
    for ray in rays:
        found = min_cuts_for_ray(universe, ray, tau)
        if found:
            best = max(best, found[0].weight)
    return best or 1
