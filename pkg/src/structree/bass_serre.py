"""Group actions on cuts and structure trees; stabilizers and the quotient graph of groups.

A cut of a Cayley graph is determined by its oriented edge boundary, so the
action of g on a cut is computed on boundary keys: (u, v) ↦ (g·u, g·v).
Translating a boundary by u⁻¹ for each inner endpoint u and taking the least
result gives an orbit invariant; two cuts lie in one orbit iff the invariants
agree, and the translating element is recovered from the matching endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .cuts import Cut
from .errors import ConsistencyError, InputError, MarginError
from .graph_core import CayleySource, GraphWindow, iter_bits
from .group_oracle import GroupOracle, NormalForm, ONE
from .structure_tree import Block, StructureTree

BoundaryKey = tuple[tuple[NormalForm, NormalForm], ...]


def _nf_str_key(key: BoundaryKey):
    return tuple((str(a), str(b)) for a, b in key)


@dataclass
class GroupAction:
    """Left multiplication of a group on a Cayley window.

    ``acting_radius`` bounds the word length (window depth) of acting elements.
    """

    oracle: GroupOracle
    window: GraphWindow
    acting_radius: int | None = None

    def __post_init__(self):
        if not isinstance(self.window.source, CayleySource):
            raise InputError("group actions need a Cayley window")
        if self.acting_radius is None:
            self.acting_radius = self.window.radius
        self._inv: dict[NormalForm, NormalForm] = {}

    # elements ---------------------------------------------------------------

    def inverse(self, g: NormalForm) -> NormalForm:
        if g not in self._inv:
            self._inv[g] = self.oracle.inverse(g)
        return self._inv[g]

    def mul(self, g: NormalForm, h: NormalForm) -> NormalForm:
        return self.oracle.multiply(g, h)

    def in_acting_ball(self, g: NormalForm) -> bool:
        i = self.window.key_index.get(g)
        return i is not None and self.window.depth[i] <= self.acting_radius

    def acting_elements(self) -> list[NormalForm]:
        w = self.window
        return [w.keys[i] for i in range(w.n) if w.depth[i] <= self.acting_radius]

    def act_vertex(self, g: NormalForm, v: int) -> int:
        image = self.mul(g, self.window.keys[v])
        j = self.window.key_index.get(image)
        if j is None:
            raise MarginError(f"{g}·{self.window.ids[v]} leaves the window")
        return j

    # keys -------------------------------------------------------------------

    def act_key(self, g: NormalForm, key: BoundaryKey) -> BoundaryKey:
        return tuple(sorted(((self.mul(g, a), self.mul(g, b)) for a, b in key), key=lambda e: (str(e[0]), str(e[1]))))

    @staticmethod
    def reverse_key(key: BoundaryKey) -> BoundaryKey:
        return tuple(sorted(((b, a) for a, b in key), key=lambda e: (str(e[0]), str(e[1]))))

    def translates(self, key: BoundaryKey) -> list[tuple[tuple, NormalForm]]:
        """(u⁻¹·key as strings, u) for every inner endpoint u of the boundary."""
        out = []
        for u in sorted({a for a, _ in key}, key=str):
            t = self.act_key(self.inverse(u), key)
            out.append((_nf_str_key(t), u))
        return out

    def canonical(self, key: BoundaryKey) -> tuple[tuple, NormalForm]:
        return min(self.translates(key), key=lambda p: p[0])


def cut_key(c: Cut) -> BoundaryKey:
    keys = c.window.keys
    return tuple(sorted(((keys[u], keys[v]) for u, v in c.edge_boundary), key=lambda e: (str(e[0]), str(e[1]))))


def act_on_cut(action: GroupAction, g: NormalForm, c: Cut) -> Cut:
    """The cut g·C of the same window (MarginError if it does not fit)."""
    w = action.window
    inner = 0
    removed = set()
    for u, v in c.edge_boundary:
        gu, gv = action.act_vertex(g, u), action.act_vertex(g, v)
        inner |= 1 << gu
        removed.add((min(gu, gv), max(gu, gv)))
    side = _side_avoiding(w, inner, removed)
    rest = w.full & ~side
    image = Cut(w, side)
    if not side or not rest or not w.is_connected(rest):
        raise MarginError(f"{g}·C is not a cut of this window")
    if {(min(a, b), max(a, b)) for a, b in image.edge_boundary} != removed:
        raise MarginError(f"{g}·C is truncated by the window")
    return image


def _side_avoiding(w: GraphWindow, start: int, removed: set[tuple[int, int]]) -> int:
    seen = start
    stack = list(iter_bits(start))
    while stack:
        x = stack.pop()
        for y in w.adj[x]:
            if (seen >> y) & 1 or (min(x, y), max(x, y)) in removed:
                continue
            seen |= 1 << y
            stack.append(y)
    return seen


# ---------------------------------------------------------------------------
# orbits


def _union_find(n: int):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    return find, union


def _orbit_partition(action: GroupAction, keys: Sequence[BoundaryKey], unordered: bool, radius: int) -> list[list[int]]:
    find, union = _union_find(len(keys))
    buckets: dict[tuple, list[tuple[int, NormalForm]]] = {}
    for i, key in enumerate(keys):
        variants = [key, action.reverse_key(key)] if unordered else [key]
        for var in variants:
            for t, u in action.translates(var):
                buckets.setdefault(t, []).append((i, u))
    saved = action.acting_radius
    action.acting_radius = radius
    try:
        for entries in buckets.values():
            i0, u0 = entries[0]
            u0_inv = action.inverse(u0)
            for i, u in entries[1:]:
                g = action.mul(u, u0_inv)  # g maps cut i0 (variant) to cut i
                if action.in_acting_ball(g):
                    union(i0, i)
            # members not reachable from the first entry may still meet each other
            for a in range(1, len(entries)):
                ia, ua = entries[a]
                ua_inv = action.inverse(ua)
                for ib, ub in entries[a + 1:]:
                    if find(ia) != find(ib) and action.in_acting_ball(action.mul(ub, ua_inv)):
                        union(ia, ib)
    finally:
        action.acting_radius = saved
    groups: dict[int, list[int]] = {}
    for i in range(len(keys)):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


@dataclass
class OrbitReport:
    orbits: list[list[int]]
    stable: bool


def cut_orbits(cuts: Sequence[Cut], action: GroupAction, unordered: bool = True) -> OrbitReport:
    """Orbits of the cuts under the acting ball; stable if a ball one larger agrees."""
    keys = [cut_key(c) for c in cuts]
    r = action.acting_radius
    orbits = _orbit_partition(action, keys, unordered, r)
    bigger = _orbit_partition(action, keys, unordered, r + 1)
    return OrbitReport(orbits, orbits == bigger)


# ---------------------------------------------------------------------------
# stabilizers


@dataclass
class Stabilizer:
    elements: list[NormalForm]
    block_orbits: list[list[str]] = field(default_factory=list)

    @property
    def order(self) -> int:
        return len(self.elements)

    def names(self) -> list[str]:
        return [str(g) for g in self.elements]


def _check_subgroup(action: GroupAction, elems: Sequence[NormalForm], what: str) -> None:
    members = set(elems)
    if ONE not in members:
        raise MarginError(f"{what} misses the identity")
    for g in elems:
        if action.inverse(g) not in members:
            raise MarginError(f"{what} is not closed under inverses at {g}")
        for h in elems:
            if action.mul(g, h) not in members:
                raise MarginError(f"{what} is not closed under multiplication ({g})·({h})")


def _sorted_elements(elems: Iterable[NormalForm]) -> list[NormalForm]:
    return sorted(set(elems), key=lambda g: (len(g), str(g)))


def _elements_mapping(action: GroupAction, source: BoundaryKey, targets: Iterable[BoundaryKey]) -> set[NormalForm]:
    """All g with g·source equal to one of the targets."""
    found = set()
    base = min({a for a, _ in source}, key=str)
    base_inv = action.inverse(base)
    for target in targets:
        for w in {a for a, _ in target}:
            g = action.mul(w, base_inv)
            if action.act_key(g, source) == target:
                found.add(g)
    return found


def edge_stabilizer(c: Cut, action: GroupAction, oriented: bool = False) -> Stabilizer:
    """Elements fixing the pair {C, C̄} (or C itself when ``oriented``)."""
    key = cut_key(c)
    targets = [key] if oriented else [key, action.reverse_key(key)]
    elems = _sorted_elements(_elements_mapping(action, key, targets))
    _check_subgroup(action, elems, "edge stabilizer")
    return Stabilizer(elems)


def class_keys(tree: StructureTree, v: int) -> set[BoundaryKey]:
    return {cut_key(c) for c in tree.class_cuts(v)}


def vertex_stabilizer(tree: StructureTree, v: int, action: GroupAction, blk: Block | None = None) -> Stabilizer:
    """Elements g with g·[C] = [C] for the tree vertex ``v`` (a closed class)."""
    if blk is not None and blk.open:
        raise InputError(f"class {v} is open in this window")
    keys = class_keys(tree, v)
    first = min(keys, key=_nf_str_key)
    candidates = _elements_mapping(action, first, keys)
    elems = []
    for g in candidates:
        images = {action.act_key(g, k) for k in keys}
        if images == keys:
            elems.append(g)
        elif images & keys and not images <= keys:
            raise MarginError(f"class {v} is only partly mapped to itself by {g}")
    elems = _sorted_elements(elems)
    _check_subgroup(action, elems, "vertex stabilizer")
    stab = Stabilizer(elems)
    if blk is not None:
        stab.block_orbits = stabilizer_block_orbits(action, elems, blk)
    return stab


def stabilizer_block_orbits(action: GroupAction, elems: Sequence[NormalForm], blk: Block) -> list[list[str]]:
    """Orbits of the stabilizer on the block; checks g(B) = B."""
    w = action.window
    members = {w.keys[i] for i in iter_bits(blk.vertices)}
    seen: set[NormalForm] = set()
    orbits = []
    for v in sorted(members, key=lambda g: (len(g), str(g))):
        if v in seen:
            continue
        orbit = {action.mul(g, v) for g in elems}
        if not orbit <= members:
            raise ConsistencyError(f"stabilizer moves block vertex {v} out of the block")
        seen |= orbit
        orbits.append(sorted(str(x) for x in orbit))
    return orbits


# ---------------------------------------------------------------------------
# graph of groups


@dataclass
class QuotientVertex:
    name: str
    group: list[str]
    representative: str  # description of the class or subdivided edge
    subdivision: bool = False

    @property
    def order(self) -> int:
        return len(self.group)


@dataclass
class QuotientEdge:
    source: int
    target: int
    group: list[str]
    inclusions: tuple[dict[str, str], dict[str, str]]
    representative: list[tuple[str, str]]

    @property
    def order(self) -> int:
        return len(self.group)


@dataclass
class GraphOfGroups:
    vertices: list[QuotientVertex]
    edges: list[QuotientEdge]
    inversions: int
    partial: bool
    notes: list[str] = field(default_factory=list)

    def cycle_rank(self) -> int:
        find, union = _union_find(len(self.vertices))
        comps = len(self.vertices)
        for e in self.edges:
            if find(e.source) != find(e.target):
                union(e.source, e.target)
                comps -= 1
        return len(self.edges) - len(self.vertices) + comps

    def to_dict(self) -> dict:
        return {
            "vertices": [
                {"name": v.name, "order": v.order, "group": v.group, "subdivision": v.subdivision,
                 "representative": v.representative}
                for v in self.vertices
            ],
            "edges": [
                {"source": e.source, "target": e.target, "order": e.order, "group": e.group,
                 "inclusions": [e.inclusions[0], e.inclusions[1]], "representative": e.representative}
                for e in self.edges
            ],
            "inversions": self.inversions,
            "partial": self.partial,
            "notes": self.notes,
        }

    def to_dot(self) -> str:
        lines = ["graph graph_of_groups {"]
        for i, v in enumerate(self.vertices):
            lines.append(f'  q{i} [label="{v.name} |G|={v.order}"];')
        for e in self.edges:
            lines.append(f'  q{e.source} -- q{e.target} [label="|G|={e.order}"];')
        lines.append("}")
        return "\n".join(lines)


def quotient_graph_of_groups(tree: StructureTree, blocks: Sequence[Block], action: GroupAction) -> GraphOfGroups:
    """Quotient of the structure tree by the action, with stabilizers as groups.

    Vertex orbits come from closed classes; every tree edge orbit is represented
    by a complementary pair of cuts.  Inverted edge orbits are subdivided, the new
    vertex carrying the stabilizer of the unordered pair.
    """
    ts = tree.treeset
    keys = [cut_key(c) for c in ts.cuts]
    closed = {b.tree_vertex for b in blocks if not b.open}
    notes = []
    if not closed:
        raise MarginError("no closed classes in the window")
    canon = [action.canonical(k) for k in keys]
    by_canon: dict[tuple, list[int]] = {}
    for i, (c, _) in enumerate(canon):
        by_canon.setdefault(c, []).append(i)

    # class orbits: two closed classes are equivalent when they hold equivalent cuts
    classes = sorted(closed)
    find, union = _union_find(len(tree.classes))
    for members in by_canon.values():
        owners = [tree.class_of[i] for i in members if tree.class_of[i] in closed]
        for o in owners[1:]:
            union(owners[0], o)
    orbit_rep: dict[int, int] = {}
    for v in classes:
        orbit_rep.setdefault(find(v), v)
    vertex_orbits = sorted(set(orbit_rep.values()))
    vertex_index = {rep: i for i, rep in enumerate(vertex_orbits)}
    block_of = {b.tree_vertex: b for b in blocks}

    def translation(i: int, j: int) -> NormalForm:
        """g with g·(cut i) = cut j, given equal canonical forms."""
        (_, ui), (_, uj) = canon[i], canon[j]
        return action.mul(uj, action.inverse(ui))

    def locate(i: int) -> tuple[int, NormalForm] | None:
        """Quotient vertex of [cut i] and g with g·(cut i) in the representative class."""
        for j in by_canon[canon[i][0]]:
            owner = tree.class_of[j]
            if owner in closed:
                rep = orbit_rep[find(owner)]
                g = translation(i, j)
                if owner != rep:
                    h = _class_translation(tree, action, owner, rep, by_canon, canon, closed)
                    g = action.mul(h, g)
                return vertex_index[rep], g
        return None

    vertices = []
    stabs = {}
    for rep in vertex_orbits:
        stab = vertex_stabilizer(tree, rep, action, block_of[rep])
        stabs[rep] = stab
        cut_names = [c.boundary_ids() for c in tree.class_cuts(rep)]
        vertices.append(QuotientVertex(f"v{len(vertices)}", stab.names(), f"class of {len(cut_names)} cuts, first {cut_names[0]}"))

    # edge orbits from unordered pairs
    pair_orbits = _orbit_partition(action, keys, True, 10 ** 9)
    edges = []
    inversions = 0
    partial = False
    for orbit in pair_orbits:
        # keep a representative whose class lies in a closed class if possible
        rep = min(orbit, key=lambda i: (tree.class_of[i] not in closed, i))
        comp = ts.complement_index(rep)
        src = locate(rep)
        dst = locate(comp)
        if src is None or dst is None:
            partial = True
            notes.append(f"edge orbit of {ts.cuts[rep].boundary_ids()} has an endpoint outside the closed classes")
            continue
        edge_group = edge_stabilizer(ts.cuts[rep], action, oriented=True)
        pair_group = edge_stabilizer(ts.cuts[rep], action, oriented=False)
        inverted = pair_group.order > edge_group.order
        (si, sg), (ti, tg) = src, dst
        inc_src = _conjugation_map(action, sg, edge_group.elements, stabs[vertex_orbits[si]].elements, "source")
        if inverted:
            inversions += 1
            mid = len(vertices)
            vertices.append(QuotientVertex(
                f"m{mid}", pair_group.names(), f"midpoint of {ts.cuts[rep].boundary_ids()}", subdivision=True,
            ))
            inc_mid = {str(h): str(h) for h in edge_group.elements}
            edges.append(QuotientEdge(si, mid, edge_group.names(), (inc_src, inc_mid), ts.cuts[rep].boundary_ids()))
            notes.append(f"edge orbit of {ts.cuts[rep].boundary_ids()} is inverted; subdivided")
        else:
            inc_dst = _conjugation_map(action, tg, edge_group.elements, stabs[vertex_orbits[ti]].elements, "target")
            edges.append(QuotientEdge(si, ti, edge_group.names(), (inc_src, inc_dst), ts.cuts[rep].boundary_ids()))
    open_count = len(tree.classes) - len(closed)
    if open_count:
        notes.append(f"{open_count} open classes were not used")
    return GraphOfGroups(vertices, edges, inversions, partial, notes)


def _class_translation(tree, action, owner, rep, by_canon, canon, closed) -> NormalForm:
    """g with g·[owner] = [rep] found through a shared cut orbit."""
    target_cuts = set(tree.classes[rep])
    for i in tree.classes[owner]:
        for j in by_canon[canon[i][0]]:
            if j in target_cuts:
                (_, ui), (_, uj) = canon[i], canon[j]
                return action.mul(uj, action.inverse(ui))
    # orbit joined through an intermediate class: walk the union
    for mid in sorted(closed):
        if mid in (owner, rep):
            continue
        try:
            g1 = _direct_translation(tree, action, owner, mid, by_canon, canon)
            g2 = _direct_translation(tree, action, mid, rep, by_canon, canon)
        except LookupError:
            continue
        return action.mul(g2, g1)
    raise ConsistencyError(f"no translation between classes {owner} and {rep}")


def _direct_translation(tree, action, a, b, by_canon, canon) -> NormalForm:
    target = set(tree.classes[b])
    for i in tree.classes[a]:
        for j in by_canon[canon[i][0]]:
            if j in target:
                (_, ui), (_, uj) = canon[i], canon[j]
                return action.mul(uj, action.inverse(ui))
    raise LookupError


def _conjugation_map(action, g, edge_elems, vertex_elems, which) -> dict[str, str]:
    """h ↦ g h g⁻¹, checked to land in the vertex group."""
    members = set(vertex_elems)
    g_inv = action.inverse(g)
    out = {}
    for h in edge_elems:
        image = action.mul(action.mul(g, h), g_inv)
        if image not in members:
            raise ConsistencyError(f"{which} inclusion fails: {g}·{h}·{g}⁻¹ = {image} not in the vertex group")
        out[str(h)] = str(image)
    return out
