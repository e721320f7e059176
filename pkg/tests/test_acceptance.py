"""The fourteen acceptance criteria, one test each.

Each test records a PASS/FAIL line that is printed in the terminal summary.
"""

import itertools

import pytest

from brute import EVALUATORS, all_cuts, compare_normal_forms
from conftest import structure_of, window_of
from structree.bass_serre import GroupAction, quotient_graph_of_groups
from structree.cuts import CutUniverse, cuts_splitting_ray, is_nested, min_cuts_for_ray
from structree.errors import ConsistencyError
from structree.fixtures import get_fixture
from structree.grammar import (
    build_grammar,
    derivation_constant,
    language_equality_bounded,
    qis_constant,
)
from structree.graph_core import iter_bits
from structree.structure_tree import block_end_estimate
from structree.treewidth import (
    accessibility_check,
    ball_decomposition,
    cut_from_decomposition,
    normalize,
    otto_properties,
    structure_tree_decomposition,
    validate,
)
from structree.verify import (
    corner_cuts,
    fig1_cuts,
    fig1_rays,
    plane_block_estimate,
    ring_pair,
    straight_grid_rays,
)


def _same(c, d):
    return c.side in (d.side, d.complement_mask)


def test_spike_and_bottom_rays(record_criterion):
    rows = []
    for radius in (6, 7):
        w = window_of("fig1", radius)
        universe = CutUniverse(w, 2)
        alpha, beta = fig1_rays(w)
        min_a = min_cuts_for_ray(universe, alpha)
        min_b = min_cuts_for_ray(universe, beta)
        _, d = fig1_cuts(w)
        c_min = [c for ray in (alpha, beta) for c in min_cuts_for_ray(universe, ray)]
        ok = (
            bool(min_a) and min_a[0].weight == 1
            and bool(min_b) and min_b[0].weight == 2
            and any(_same(c, d) for c in cuts_splitting_ray(universe, alpha))
            and any(_same(c, d) for c in c_min)
            and not any(_same(c, d) for c in min_a)
        )
        rows.append((radius, ok, min_a[0].weight if min_a else None, min_b[0].weight if min_b else None))
    passed = all(r[1] for r in rows)
    record_criterion(1, "spike ray weight 1, bottom ray weight 2, D in C(α) ∩ C_min but not C_min(α)", passed,
                     "; ".join(f"R={r}: {a}, {b}" for r, _, a, b in rows))
    assert passed, rows


def test_grid_has_no_splitting_cuts(record_criterion):
    found = []
    sizes = []
    for radius in range(4, 8):
        w = window_of("grid", radius)
        for k in range(1, 5):
            universe = CutUniverse(w, k)
            sizes.append(len(universe.cuts))
            for ray in straight_grid_rays(w):
                found += [(radius, k, c.boundary_ids()) for c in cuts_splitting_ray(universe, ray)]
    passed = not found
    record_criterion(2, "no bounded cut splits a straight grid ray, R = 4..7, k ≤ 4", passed,
                     f"{len(found)} splitting cuts among up to {max(sizes)} certified cuts per window")
    assert passed, found[:3]


def test_optimal_cuts_nested(record_criterion):
    violations = []
    counts = []
    for name in ("f2", "pgl", "dinf", "ring", "zz2"):
        for radius in range(3, 7):
            try:
                _, _, opt, _, _, _ = structure_of(name, radius)
            except ConsistencyError as exc:
                violations.append((name, radius, str(exc)))
                continue
            counts.append(len(opt))
            for c, d in itertools.combinations(opt, 2):
                if not is_nested(c, d):
                    violations.append((name, radius, c.boundary_ids(), d.boundary_ids()))
    passed = not violations
    record_criterion(3, "optimal cuts pairwise nested on five fixtures, R = 3..6", passed,
                     f"{sum(counts)} optimal cuts, {len(violations)} violations")
    assert passed, violations[:3]


def test_ring_corner_inequality(record_criterion):
    w = window_of("ring", 6)
    universe = CutUniverse(w, 2)
    c, d = ring_pair(w)
    e, e2 = corner_cuts(w, c, d)
    brute = all_cuts(w, 2)

    def m_brute(x):
        return sum(not is_nested(x, y) for y in brute)

    m = [universe.m(x) for x in (e, e2, c, d)]
    mb = [m_brute(x) for x in (e, e2, c, d)]
    passed = m == mb == [0, 0, 2, 2] and not is_nested(c, d)
    record_criterion(4, "ring corners: m(E)+m(E′) < m(C)+m(D)", passed,
                     f"{m[0]}+{m[1]} < {m[2]}+{m[3]}, brute force {mb}")
    assert passed, (m, mb)


def test_structure_trees_are_trees(record_criterion):
    checked = 0
    bad = []
    for name in ("f2", "pgl", "dinf", "ring", "zz2", "fig1", "grid_z2"):
        for radius in range(3, 7):
            _, _, _, tree, _, _ = structure_of(name, radius)
            if tree is None:
                continue
            checked += 1
            n, edges = tree.n_vertices, tree.edges
            simple = len({frozenset(e) for e in edges}) == len(edges) and all(a != b for a, b in edges)
            seen = {0}
            stack = [0]
            while stack:
                x = stack.pop()
                for y in tree.neighbors(x):
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            if not (len(edges) == n - 1 and simple and len(seen) == n):
                bad.append((name, radius))
    passed = not bad and checked > 0
    record_criterion(5, "structure trees are trees on all fixtures", passed, f"{checked} trees, {len(bad)} violations")
    assert passed, bad


def test_pgl_kappa_and_block_size(record_criterion):
    rows = []
    for radius in (5, 6):
        _, _, _, tree, kappa, blocks = structure_of("pgl", radius)
        closed = [b.size for b in blocks if not b.open]
        rows.append((radius, kappa.kappa, closed))
    passed = all(k == 1 and sizes and all(s == 6 for s in sizes) for _, k, sizes in rows)
    record_criterion(6, "pgl: κ = 1 and blocks of 6 vertices", passed,
                     "; ".join(f"R={r}: κ={k}, sizes {sorted(set(s))}" for r, k, s in rows))
    assert passed, rows


def test_blocks_one_ended(record_criterion):
    results = []
    bad = []
    for name in ("f2", "pgl", "dinf", "ring", "zz2", "fig1"):
        for radius in (5, 6):
            w, _, _, tree, _, blocks = structure_of(name, radius)
            if tree is None:
                continue
            for b in blocks:
                if b.open:
                    continue
                est = block_end_estimate(b.vertices, w, radius - 2)
                results.append(est.ends)
                if est.ends > 1 or not est.stable:
                    bad.append((name, radius, b.tree_vertex, est.counts))
    plane = []
    for radius in (5, 6):
        w, _, _, tree, _, blocks = structure_of("grid_z2", radius)
        est = plane_block_estimate(w, tree, blocks)
        plane.append(est.ends)
        if est.ends != 1 or not est.stable:
            bad.append(("grid_z2 plane", radius, est.counts))
    passed = not bad
    record_criterion(7, "closed blocks have at most one end; grid plane block has one", passed,
                     f"{len(results)} closed blocks, ends {sorted(set(results))}, plane {plane}")
    assert passed, bad


def test_tree_decompositions(record_criterion):
    f2 = validate(ball_decomposition(window_of("f2", 5)))
    pgl_widths = []
    otto_ok = True
    for radius in range(3, 7):
        d = ball_decomposition(window_of("pgl", radius))
        rep = validate(d)
        pgl_widths.append(rep.width if rep.valid else None)
        otto_ok &= otto_properties(normalize(d)).all_hold
    otto_ok &= otto_properties(normalize(ball_decomposition(window_of("f2", 5)))).all_hold
    _, _, _, tree, _, blocks = structure_of("pgl", 5)
    sd = validate(structure_tree_decomposition(tree, blocks).decomposition)
    passed = (f2.valid and f2.width == 1 and None not in pgl_widths and len(set(pgl_widths)) == 1
              and otto_ok and sd.valid and sd.width == 5)
    record_criterion(8, "ball decompositions valid (f2 width 1, pgl constant width), normalized, structure width 5",
                     passed, f"f2 {f2.width}, pgl {pgl_widths}, normalized ok {otto_ok}, structure {sd.width}")
    assert passed


def test_cut_from_decomposition(record_criterion):
    checked = 0
    bad = []
    for name in ("f2", "pgl"):
        for radius in (6, 7):
            w = window_of(name, radius)
            decomp = ball_decomposition(w)
            m = max(bin(b).count("1") for b in decomp.bags)
            diam = max(w.diameter(b) for b in decomp.bags)
            ends = sorted(iter_bits(w.frontier))[:: max(1, len(list(iter_bits(w.frontier))) // 8)]
            for n in (2, 3):
                for end in ends:
                    ray = w.tree_path(end)
                    cut = cut_from_decomposition(decomp, ray, 0, n)
                    checked += 1
                    dist = w.distances_from(0)
                    tail = [v for v in ray if dist[v] > n + diam + 1]
                    ok = ((cut.side & 1)
                          and w.set_distance(0, cut.complement_mask) >= n
                          and all((cut.complement_mask >> v) & 1 for v in tail)
                          and cut.weight <= w.max_degree() * m)
                    if not ok:
                        bad.append((name, radius, n, w.ids[end]))
    passed = not bad and checked > 0
    record_criterion(9, "cuts from decompositions meet all postconditions (f2, pgl; n = 2, 3)", passed,
                     f"{checked} cuts, {len(bad)} violations")
    assert passed, bad[:3]


def test_zz2_accessibility(record_criterion):
    rows = []
    for radius in (5, 6):
        w = window_of("zz2", radius)
        two, one = accessibility_check(w, 2), accessibility_check(w, 1)
        rows.append((radius, two.passed, one.passed, one.violations[:1]))
    passed = all(p2 and not p1 and wit for _, p2, p1, wit in rows)
    detail = "; ".join(f"R={r}: k=2 {'pass' if p2 else 'fail'}, k=1 {'pass' if p1 else 'fail'}"
                       f"{' witness weight ' + str(wit[0][1]) if wit else ''}" for r, p2, p1, wit in rows)
    record_criterion(10, "zz2 accessible with k = 2 and not with k = 1", passed, detail)
    assert passed


def test_word_problem_against_independent_evaluators(record_criterion):
    totals = {}
    mismatches = []
    for name in ("f2", "pgl", "dinf", "zz2"):
        oracle = get_fixture(name).oracle()
        count, bad = compare_normal_forms(oracle, EVALUATORS[name](), 8)
        totals[name] = count
        mismatches += [(name, b) for b in bad]
        letters = list(oracle.alphabet)
        for a, b, c in itertools.product(letters, repeat=3):
            whole = oracle.normal_form((a, b, c))
            if whole != oracle.multiply(oracle.normal_form((a, b)), oracle.normal_form((c,))):
                mismatches.append((name, f"coherence {a} {b} {c}"))
            if whole != oracle.multiply(oracle.normal_form((a,)), oracle.normal_form((b, c))):
                mismatches.append((name, f"coherence {a} {b} {c}"))
    passed = not mismatches
    record_criterion(11, "normal forms agree with independent evaluation on words of length ≤ 8", passed,
                     ", ".join(f"{n} {c} words" for n, c in totals.items()) + f", {len(mismatches)} mismatches")
    assert passed, mismatches[:5]


def test_grammar_languages(record_criterion):
    reports = {}
    for name, n in (("f2", 6), ("dinf", 6), ("pgl", 5)):
        oracle = get_fixture(name).oracle()
        g = build_grammar(oracle, qis_constant(oracle).k)
        reports[name] = language_equality_bounded(g, oracle, n)
    kernel2 = reports["f2"].kernel_counts[2]
    passed = all(r.passed for r in reports.values()) and kernel2 == 4
    record_criterion(12, "grammar languages equal the word problem (f2, dinf n = 6; pgl n = 5)", passed,
                     ", ".join(f"{k} {r.words_checked} words" for k, r in reports.items())
                     + f", f2 length-2 kernel {kernel2}")
    assert passed, {k: r.counterexample for k, r in reports.items()}


def test_bag_diameter_bound(record_criterion):
    rows = []
    for name in ("f2", "pgl"):
        oracle = get_fixture(name).oracle()
        k = derivation_constant(build_grammar(oracle, qis_constant(oracle).k))
        for radius in (4, 5, 6):
            w = window_of(name, radius)
            worst = max(w.diameter(b) for b in ball_decomposition(w).bags)
            rows.append((name, radius, worst, 3 * k))
    passed = all(worst <= bound for _, _, worst, bound in rows)
    record_criterion(13, "ball-decomposition bags have diameter ≤ 3k", passed,
                     ", ".join(f"{n} R={r}: {d} ≤ {b}" for n, r, d, b in rows))
    assert passed, rows


def test_graph_of_groups(record_criterion):
    rows = []
    for radius in (4, 5, 6):
        w, _, _, tree, _, blocks = structure_of("pgl", radius)
        q = quotient_graph_of_groups(tree, blocks, GroupAction(get_fixture("pgl").oracle(), w))
        rows.append((sorted(v.order for v in q.vertices), [e.order for e in q.edges]))
    w, _, _, tree, _, blocks = structure_of("f2", 4)
    qf = quotient_graph_of_groups(tree, blocks, GroupAction(get_fixture("f2").oracle(), w))
    f2_trivial = all(v.order == 1 for v in qf.vertices) and all(e.order == 1 for e in qf.edges)
    passed = all(r == ([2, 3], [1]) for r in rows) and f2_trivial
    record_criterion(14, "pgl quotient has vertex groups of orders 3 and 2 and a trivial edge group; f2 all trivial",
                     passed, f"pgl R=4..6 {rows}, f2 trivial {f2_trivial}")
    assert passed, rows


@pytest.mark.parametrize("name,radius", [("pgl", 4), ("f2", 4), ("ring", 6), ("fig1", 6), ("grid", 5),
                                         ("zz2", 6), ("dinf", 6), ("grid_z2", 5)])
def test_verify_table_passes(name, radius):
    from structree.verify import verify_fixture

    rows = verify_fixture(name, radius)
    assert all(r.passed for r in rows), [(r.check, r.detail) for r in rows if not r.passed]
