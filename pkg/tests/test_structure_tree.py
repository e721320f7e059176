import pytest

from conftest import structure_of, window_of
from structree.cuts import is_nested
from structree.errors import ConsistencyError, InputError
from structree.structure_tree import (
    TreeSet,
    block,
    block_end_estimate,
    build_structure_tree,
    check_tree,
    compute_kappa,
    related,
)
from structree.verify import ring_pair

FIXTURE_RADII = [("pgl", 5), ("f2", 4), ("dinf", 6), ("zz2", 5), ("ring", 6), ("fig1", 6)]


def test_treeset_is_complement_closed_and_sorted():
    _, _, opt, tree, _, _ = structure_of("pgl", 5)
    ts = tree.treeset
    sides = {c.side for c in ts.cuts}
    assert all(c.complement_mask in sides for c in ts.cuts)
    sizes = [bin(c.side).count("1") for c in ts.cuts]
    assert sizes == sorted(sizes)
    assert len(ts) == 2 * len(opt)


def test_treeset_rejects_crossing_cuts():
    w = window_of("ring", 6)
    c, d = ring_pair(w)
    with pytest.raises(ConsistencyError):
        TreeSet(w, [c, d])


def test_foreign_cut_rejected():
    _, _, opt, _, _, _ = structure_of("pgl", 5)
    with pytest.raises(InputError):
        TreeSet(window_of("pgl", 4), opt)


@pytest.mark.parametrize("name,radius", FIXTURE_RADII)
def test_classes_partition_and_relation(name, radius):
    _, _, _, tree, _, _ = structure_of(name, radius)
    ts = tree.treeset
    seen = sorted(i for cls in tree.classes for i in cls)
    assert seen == list(range(len(ts)))
    for cls in tree.classes:
        for i in cls:
            for j in cls:
                assert related(ts.cuts[i], ts.cuts[j], ts)
    # each cut and its complement lie in different classes
    for i in range(len(ts)):
        assert tree.class_of[i] != tree.class_of[ts.complement_index(i)]
    assert len(tree.edges) == tree.n_vertices - 1


@pytest.mark.parametrize("name,radius", FIXTURE_RADII)
def test_cuts_within_a_class_are_minimal_over_each_other(name, radius):
    _, _, _, tree, _, _ = structure_of(name, radius)
    ts = tree.treeset
    for cls in tree.classes:
        for i in cls:
            c_bar = ts.cuts[i].complement_mask
            for j in cls:
                if i != j:
                    d = ts.cuts[j].side
                    assert c_bar & ~d == 0 and c_bar != d


def test_check_tree_witnesses():
    check_tree(3, [(0, 1), (1, 2)])
    with pytest.raises(ConsistencyError, match="loop"):
        check_tree(2, [(0, 0)])
    with pytest.raises(ConsistencyError, match="multi-edge"):
        check_tree(2, [(0, 1), (1, 0)])
    with pytest.raises(ConsistencyError, match="cycle"):
        check_tree(3, [(0, 1), (1, 2), (2, 0)])
    with pytest.raises(ConsistencyError, match="disconnected"):
        check_tree(4, [(0, 1), (2, 3)])


@pytest.mark.parametrize("name,radius", FIXTURE_RADII)
def test_kappa_neighbourhoods_connected(name, radius):
    w, _, _, tree, kappa, _ = structure_of(name, radius)
    assert kappa.kappa == 1
    for c in tree.treeset.cuts:
        nbhd, _ = w.neighborhood(c.side, kappa.kappa)
        assert w.is_connected(nbhd & c.complement_mask)


@pytest.mark.parametrize("name,radius", FIXTURE_RADII)
def test_block_formulas_agree(name, radius):
    w, _, _, tree, kappa, blocks = structure_of(name, radius)
    for v, b in enumerate(blocks):
        cuts = tree.class_cuts(v)
        inter, core, fringe = w.full, w.full, 0
        for d in cuts:
            n, _ = w.neighborhood(d.side, kappa.kappa)
            inter &= n
            core &= d.side
            fringe |= n & d.complement_mask
        assert b.vertices == inter == core | fringe
        assert b.connected


@pytest.mark.parametrize("name,radius", [("pgl", 5), ("f2", 4), ("ring", 6), ("dinf", 6)])
def test_closed_classes_are_stable_under_growing_the_window(name, radius):
    w1, _, _, t1, _, b1 = structure_of(name, radius)
    w2, _, _, t2, _, _ = structure_of(name, radius + 1)

    def class_sets(tree, w):
        return [frozenset(tuple(c.boundary_ids()) for c in tree.class_cuts(v)) for v in range(tree.n_vertices)]

    later = class_sets(t2, w2)
    for b in b1:
        if b.open:
            continue
        cls = class_sets(t1, w1)[b.tree_vertex]
        assert cls in later


def test_open_margin_parameter():
    w, _, _, tree, kappa, _ = structure_of("pgl", 5)
    assert all(block(tree, v, kappa.kappa, margin=w.radius).open is False for v in range(tree.n_vertices))


def test_end_estimates():
    f2 = window_of("f2", 5)
    assert block_end_estimate(f2.full, f2, 3).ends == 2
    grid = window_of("grid", 5)
    est = block_end_estimate(grid.full, grid, 3)
    assert est.ends == 1 and est.stable and est.label() == "1"
    finite = grid.ball_mask(2)
    assert block_end_estimate(finite, grid, 3).ends == 0
    with pytest.raises(InputError):
        block_end_estimate(grid.full, grid, 0)
    with pytest.raises(InputError):
        block_end_estimate(grid.full, grid, 5)


def test_compute_kappa_on_empty_set():
    with pytest.raises(InputError):
        compute_kappa(TreeSet(window_of("pgl", 4), []))


def test_to_dot():
    _, _, _, tree, _, blocks = structure_of("pgl", 5)
    dot = tree.to_dot({b.tree_vertex: b.size for b in blocks})
    assert dot.startswith("graph structure_tree") and dot.count("--") == len(tree.edges)


def test_build_is_repeatable():
    _, _, opt, tree, _, _ = structure_of("zz2", 5)
    again = build_structure_tree(TreeSet(tree.window, opt))
    assert again.classes == tree.classes and again.edges == tree.edges
    assert all(is_nested(c, d) for c in opt for d in opt)
