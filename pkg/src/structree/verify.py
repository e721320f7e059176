"""Fixture-level checks run by ``structree verify``.

Each check returns rows (description, passed, detail).  Descriptions name what
is measured, e.g. "block size = 6", so the table is readable on its own.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

from . import cuts as cutmod
from .bass_serre import GroupAction, quotient_graph_of_groups
from .cuts import CutUniverse, make_cut, min_cuts_for_ray, optimal_cuts
from .errors import StructreeError
from .fixtures import Fixture, get_fixture
from .grammar import build_grammar, derivation_constant, language_equality_bounded, qis_constant
from .graph_core import GraphWindow, RayPair, build_window
from .structure_tree import (
    TreeSet,
    all_blocks,
    block_end_estimate,
    build_structure_tree,
    compute_kappa,
)
from .treewidth import (
    accessibility_check,
    ball_decomposition,
    normalize,
    otto_properties,
    structure_tree_decomposition,
    validate,
)


@dataclass
class Row:
    check: str
    passed: bool
    detail: str = ""


# ---------------------------------------------------------------------------
# fixture-specific constructions shared with the test suite


def fig1_rays(window: GraphWindow) -> tuple[RayPair, RayPair]:
    """(spike ray α, bottom ray β) through the strip/spike window.

    α runs from the top of the spike down to (0,0) and then right along j = 0;
    β is the whole line j = 0.
    """
    R = window.radius
    ix = window.index
    spike = [ix[f"0,{j}"] for j in range(0, R + 1)]
    right = [ix[f"{i},0"] for i in range(0, R + 1)]
    left = [ix[f"{-i},0"] for i in range(0, R + 1)]
    alpha = RayPair(tuple(spike), tuple(right))
    beta = RayPair(tuple(left), tuple(right))
    return alpha, beta


def fig1_cuts(window: GraphWindow):
    """The weight-1 spike cut C and the weight-2 strip cut D of the figure."""
    R = window.radius
    spike = [f"0,{j}" for j in range(3, R + 1)]
    strip = [v for v in window.ids if _coords(v)[0] >= 2]
    return make_cut(window, spike), make_cut(window, strip)


def _coords(v: str) -> tuple[int, int]:
    i, j = v.split(",")
    return int(i), int(j)


def ring_pair(window: GraphWindow):
    """C = L ∪ {c0, c1} and D = L ∪ {c0, c3}, with L the left ray."""
    left = [v for v in window.ids if v.startswith("l")]
    return make_cut(window, left + ["c0", "c1"]), make_cut(window, left + ["c0", "c3"])


def corner_cuts(window: GraphWindow, c, d):
    """The two opposite corner cuts C∩D and C̄∩D̄."""
    a, _, _, z = cutmod.corners(c, d)
    return make_cut(window, a), make_cut(window, z)


def plane_block(window: GraphWindow, tree, blocks):
    """Block of the class holding the origin's side of the s-edge at the origin."""
    s_vertex = window.index["s"]
    for c in tree.treeset.cuts:
        if c.edge_boundary == ((0, s_vertex),):
            v = tree.class_of_cut(c)
            return next(b for b in blocks if b.tree_vertex == v)
    raise StructreeError("the s-edge at the origin is not an optimal cut in this window")


def plane_block_estimate(window: GraphWindow, tree, blocks, k: int = 1):
    """End estimate of the plane block inside the certified ball B_{R-k-1}."""
    horizon = window.radius - k - 1
    return block_end_estimate(plane_block(window, tree, blocks).vertices, window, horizon - 2, horizon)


def straight_grid_rays(window: GraphWindow) -> list[RayPair]:
    R = window.radius
    ix = window.index
    horiz = RayPair(tuple(ix[f"{-i},0"] for i in range(R + 1)), tuple(ix[f"{i},0"] for i in range(R + 1)))
    vert = RayPair(tuple(ix[f"0,{-j}"] for j in range(R + 1)), tuple(ix[f"0,{j}"] for j in range(R + 1)))
    return [horiz, vert]


# ---------------------------------------------------------------------------


def _structure(window: GraphWindow, k: int):
    universe = CutUniverse(window, k)
    opt = optimal_cuts(universe)
    if not opt:
        return universe, opt, None, None, None
    tree = build_structure_tree(TreeSet(window, opt))
    kappa = compute_kappa(tree.treeset)
    blocks = all_blocks(tree, kappa.kappa)
    return universe, opt, tree, kappa, blocks


def _check(rows: list[Row], name: str, fn: Callable[[], tuple[bool, str]]) -> None:
    try:
        ok, detail = fn()
    except StructreeError as exc:
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    rows.append(Row(name, ok, detail))


def verify_fixture(name: str, radius: int, k: int | None = None) -> list[Row]:
    fx: Fixture = get_fixture(name)
    k = fx.k if k is None else k
    window = build_window(fx.make_source(), radius)
    rows: list[Row] = []
    state: dict = {}

    def structure():
        state["s"] = _structure(window, k)
        _, opt, tree, kappa, _ = state["s"]
        if tree is None:
            return True, "no optimal cuts in this window"
        return True, f"{len(opt)} optimal cuts, tree with {tree.n_vertices} vertices, κ = {kappa.kappa}"

    _check(rows, "optimal cuts pairwise nested; structure tree is a tree", structure)
    s = state.get("s")
    if s and s[2] is not None:
        universe, opt, tree, kappa, blocks = s

        def ends():
            bad = []
            for b in blocks:
                if b.open:
                    continue
                est = block_end_estimate(b.vertices, window, max(1, radius - 2))
                if est.ends > 1 or not est.stable:
                    bad.append(b.tree_vertex)
            return not bad, f"{sum(not b.open for b in blocks)} closed blocks, unstable/many: {bad}"

        _check(rows, "every closed block has at most one end", ends)
        _check(rows, "blocks connected", lambda: (all(b.connected for b in blocks), ""))

    if name == "pgl" and s and s[2] is not None:
        _, _, tree, kappa, blocks = s
        closed = [b for b in blocks if not b.open]
        _check(rows, "κ = 1", lambda: (kappa.kappa == 1, f"κ = {kappa.kappa}"))
        _check(rows, "block size = 6", lambda: (bool(closed) and all(b.size == 6 for b in closed),
                                                f"sizes {sorted({b.size for b in closed})}"))

        def sdec():
            sd = structure_tree_decomposition(tree, blocks)
            rep = validate(sd.decomposition)
            return rep.valid and rep.width == 5, f"width {rep.width}, axioms {rep.t1, rep.t2, rep.t3}"

        _check(rows, "structure-tree decomposition valid, width = 5", sdec)

        def gog():
            q = quotient_graph_of_groups(tree, blocks, GroupAction(fx.oracle(), window))
            orders = sorted(v.order for v in q.vertices)
            edges = [e.order for e in q.edges]
            return orders == [2, 3] and edges == [1], f"vertex orders {orders}, edge orders {edges}"

        _check(rows, "graph of groups: vertex groups of orders 3 and 2, trivial edge group", gog)

    if name == "f2" and s and s[2] is not None:
        _, _, tree, _, blocks = s

        def gog_f2():
            q = quotient_graph_of_groups(tree, blocks, GroupAction(fx.oracle(), window))
            ok = all(v.order == 1 for v in q.vertices) and all(e.order == 1 for e in q.edges)
            return ok, f"{len(q.vertices)} vertices, {len(q.edges)} edges, cycle rank {q.cycle_rank()}"

        _check(rows, "graph of groups: all groups trivial", gog_f2)

    def balldec():
        d = ball_decomposition(window)
        rep = validate(d)
        otto = otto_properties(normalize(d))
        return rep.valid and otto.all_hold, f"width {rep.width}, normalized properties hold: {otto.all_hold}"

    _check(rows, "ball decomposition satisfies (T1)-(T3) and normalizes", balldec)
    if name == "f2":
        _check(rows, "ball decomposition width = 1", lambda: (validate(ball_decomposition(window)).width == 1, ""))

    if fx.oracle is not None and name != "grid_z2":
        oracle = fx.oracle()

        def coherence():
            letters = list(oracle.alphabet)
            for a, b, c in itertools.product(letters, repeat=3):
                whole = oracle.normal_form((a, b, c))
                if whole != oracle.multiply(oracle.normal_form((a, b)), oracle.normal_form((c,))):
                    return False, f"at {a} {b} {c}"
                if whole != oracle.multiply(oracle.normal_form((a,)), oracle.normal_form((b, c))):
                    return False, f"at {a} {b} {c}"
            return True, f"{len(letters) ** 3} triples"

        _check(rows, "normal forms coherent on all letter triples", coherence)

        def grammar():
            g = build_grammar(oracle, qis_constant(oracle).k)
            n = 4
            rep = language_equality_bounded(g, oracle, n)
            return rep.passed, f"{rep.words_checked} words up to length {n}, kernel counts {rep.kernel_counts}"

        _check(rows, "grammar language equals the word problem on short words", grammar)

        def diam():
            g = build_grammar(oracle, qis_constant(oracle).k)
            kk = derivation_constant(g)
            worst = max(window.diameter(b) for b in ball_decomposition(window).bags)
            return worst <= 3 * kk, f"max bag diameter {worst}, 3k = {3 * kk}"

        _check(rows, "ball-decomposition bags have diameter ≤ 3k", diam)

    if name == "fig1":
        def fig1():
            universe = CutUniverse(window, 2)
            alpha, beta = fig1_rays(window)
            ma, mb = min_cuts_for_ray(universe, alpha), min_cuts_for_ray(universe, beta)
            _, d = fig1_cuts(window)
            d_in_c_alpha = any(c.side in (d.side, d.complement_mask) for c in cutmod.cuts_splitting_ray(universe, alpha))
            d_in_cmin = any(c.side in (d.side, d.complement_mask) for c in mb)
            d_in_cmin_alpha = any(c.side in (d.side, d.complement_mask) for c in ma)
            ok = (ma and ma[0].weight == 1 and mb and mb[0].weight == 2 and d_in_c_alpha and d_in_cmin
                  and not d_in_cmin_alpha)
            return bool(ok), f"min weights {ma[0].weight if ma else None}, {mb[0].weight if mb else None}"

        _check(rows, "spike ray has min weight 1, bottom ray min weight 2; D splits α but is not minimal for it", fig1)

    if name == "grid":
        def grid():
            universe = CutUniverse(window, min(k, 4))
            found = [c for r in straight_grid_rays(window) for c in cutmod.cuts_splitting_ray(universe, r)]
            return not found, f"{len(found)} splitting cuts"

        _check(rows, "no bounded-weight cut splits a straight ray", grid)

    if name == "ring":
        def ring():
            universe = CutUniverse(window, 2)
            c, d = ring_pair(window)
            e, e2 = corner_cuts(window, c, d)
            vals = [universe.m(x) for x in (e, e2, c, d)]
            return vals[0] + vals[1] < vals[2] + vals[3], f"m(E)+m(E') = {vals[0]}+{vals[1]}, m(C)+m(D) = {vals[2]}+{vals[3]}"

        _check(rows, "corner cuts have smaller total m than the crossing pair", ring)

    if name == "grid_z2" and s and s[2] is not None:
        _, _, tree, _, blocks = s

        def plane():
            est = plane_block_estimate(window, tree, blocks)
            return est.ends == 1 and est.stable, f"ends {est.label()}, counts {est.counts}"

        _check(rows, "the block containing the grid plane has one end", plane)

    if name == "zz2":
        def access():
            ok2 = accessibility_check(window, 2)
            ok1 = accessibility_check(window, 1)
            return ok2.passed and not ok1.passed, f"k=2 pass {ok2.passed}, k=1 violations {len(ok1.violations)}"

        _check(rows, "accessible with k = 2 but not with k = 1", access)
    return rows


def frontier_ids(window: GraphWindow) -> list[str]:
    return window.ids_of(window.frontier)


__all__ = ["Row", "verify_fixture", "fig1_rays", "fig1_cuts", "ring_pair", "corner_cuts", "straight_grid_rays"]
