import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import structure_of, window_of
from structree.bass_serre import (
    GroupAction,
    act_on_cut,
    cut_key,
    cut_orbits,
    edge_stabilizer,
    quotient_graph_of_groups,
    vertex_stabilizer,
)
from structree.cuts import is_nested
from structree.errors import InputError, MarginError
from structree.fixtures import get_fixture
from structree.group_oracle import ONE


def setup(name, radius):
    w, universe, opt, tree, _, blocks = structure_of(name, radius)
    return w, universe, opt, tree, blocks, GroupAction(get_fixture(name).oracle(), w)


@pytest.mark.parametrize("name,radius", [("pgl", 6), ("f2", 5), ("zz2", 6)])
@settings(max_examples=25, deadline=None)
@given(data=st.data())
def test_action_is_equivariant(name, radius, data):
    w, universe, opt, _, _, action = setup(name, radius)
    near = [g for g in action.acting_elements() if len(g) <= 2]
    g = data.draw(st.sampled_from(near))
    h = data.draw(st.sampled_from(near))
    c = data.draw(st.sampled_from(opt))
    try:
        gc = act_on_cut(action, g, c)
        hgc = act_on_cut(action, h, gc)
        direct = act_on_cut(action, action.mul(h, g), c)
    except MarginError:
        return
    assert cut_key(gc) == action.act_key(g, cut_key(c))
    assert gc.weight == c.weight
    assert hgc == direct
    # nestedness is preserved
    d = opt[0]
    try:
        gd = act_on_cut(action, g, d)
    except MarginError:
        return
    assert is_nested(gc, gd) == is_nested(c, d)


def test_identity_acts_trivially():
    w, _, opt, _, _, action = setup("pgl", 5)
    for c in opt:
        assert act_on_cut(action, ONE, c) == c
    for v in range(w.n):
        assert action.act_vertex(ONE, v) == v


def test_margin_error_when_leaving_the_window():
    w, _, _, _, _, action = setup("f2", 4)
    far = next(g for g in action.acting_elements() if len(g) == 4)
    with pytest.raises(MarginError):
        action.act_vertex(far, w.n - 1)


def test_action_needs_a_cayley_window():
    with pytest.raises(InputError):
        GroupAction(get_fixture("f2").oracle(), window_of("grid", 3))


@pytest.mark.parametrize("name,radius,orbits", [("pgl", 5, 1), ("f2", 4, 2), ("dinf", 6, 1), ("zz2", 6, 2)])
def test_cut_orbits(name, radius, orbits):
    _, _, opt, _, _, action = setup(name, radius)
    rep = cut_orbits(opt, action)
    assert len(rep.orbits) == orbits
    assert sorted(i for o in rep.orbits for i in o) == list(range(len(opt)))


def _is_subgroup(action, elems):
    s = set(elems)
    return ONE in s and all(action.mul(g, h) in s for g in s for h in s) and all(action.inverse(g) in s for g in s)


@pytest.mark.parametrize("name,radius", [("pgl", 5), ("dinf", 6), ("zz2", 6), ("f2", 4)])
def test_stabilizers_are_subgroups_fixing_their_objects(name, radius):
    _, _, opt, tree, blocks, action = setup(name, radius)
    for c in opt:
        try:
            stab = edge_stabilizer(c, action)
        except MarginError:
            continue
        assert _is_subgroup(action, stab.elements)
        oriented = edge_stabilizer(c, action, oriented=True)
        assert set(oriented.elements) <= set(stab.elements)
        assert stab.order % oriented.order == 0
        key = cut_key(c)
        for g in stab.elements:
            assert action.act_key(g, key) in (key, action.reverse_key(key))
    for b in blocks:
        if b.open:
            continue
        stab = vertex_stabilizer(tree, b.tree_vertex, action, b)
        assert _is_subgroup(action, stab.elements)
        assert sum(len(o) for o in stab.block_orbits) == b.size


def test_pgl_stabilizers():
    _, _, opt, tree, blocks, action = setup("pgl", 5)
    c = opt[0]
    assert edge_stabilizer(c, action).order == 2
    assert edge_stabilizer(c, action, oriented=True).order == 1
    closed = [b for b in blocks if not b.open]
    assert {vertex_stabilizer(tree, b.tree_vertex, action, b).order for b in closed} == {3}
    with pytest.raises(InputError):
        open_block = next(b for b in blocks if b.open)
        vertex_stabilizer(tree, open_block.tree_vertex, action, open_block)


@pytest.mark.parametrize("name,radius,vertex_orders,edge_orders,rank", [
    ("pgl", 5, [2, 3], [1], 0),
    ("dinf", 6, [2, 2], [1], 0),
    ("zz2", 6, [2, 2], [1, 2], 1),
    ("f2", 4, [1], [1, 1], 2),
])
def test_quotients(name, radius, vertex_orders, edge_orders, rank):
    _, _, _, tree, blocks, action = setup(name, radius)
    q = quotient_graph_of_groups(tree, blocks, action)
    assert sorted(v.order for v in q.vertices) == vertex_orders
    assert sorted(e.order for e in q.edges) == edge_orders
    assert q.cycle_rank() == rank
    assert not q.partial


@pytest.mark.parametrize("name,radius", [("pgl", 5), ("zz2", 6), ("dinf", 6)])
def test_inclusions_are_injective_homomorphisms(name, radius):
    _, _, _, tree, blocks, action = setup(name, radius)
    q = quotient_graph_of_groups(tree, blocks, action)
    o = action.oracle
    for e in q.edges:
        for end, inc in zip((e.source, e.target), e.inclusions):
            target = set(q.vertices[end].group)
            assert set(inc) == set(e.group)
            assert set(inc.values()) <= target
            assert len(set(inc.values())) == len(inc)
            for x in e.group:
                for y in e.group:
                    xy = str(o.normal_form(o.multiply(o.normal_form(x.split()), o.normal_form(y.split())).word()))
                    img = o.multiply(o.normal_form(inc[x].split()), o.normal_form(inc[y].split()))
                    assert str(img) == inc[xy]


def test_serialisation():
    _, _, _, tree, blocks, action = setup("pgl", 5)
    q = quotient_graph_of_groups(tree, blocks, action)
    d = q.to_dict()
    assert len(d["vertices"]) == 2 and len(d["edges"]) == 1
    assert q.to_dot().startswith("graph")
