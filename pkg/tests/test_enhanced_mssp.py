"""Exhaustive brute-force cross-checks for the versioned MSSP structure."""

import json

import pytest

from planarvd.decomposition import build_decomposition
from planarvd.enhanced_mssp import (
    LEFT,
    ON_PATH,
    RIGHT,
    SIDE_BELOW,
    SIDE_LEFT,
    SIDE_ON,
    SIDE_RIGHT,
    BadRange,
    DepthOutOfRange,
    NotInTree,
    RankOutOfRange,
    UnknownSite,
    VertexNotOnPath,
    build_enhanced_mssp,
)
from planarvd.instances import delaunay_instance, grid_instance
from planarvd.planar_core import normalize, perturb, side_of_entry
from planarvd.reference_oracles import (
    brute_dijkstra,
    brute_entry_side,
    brute_path_to,
    brute_tree_side,
)

SIDE_OF = {"left": LEFT, "right": RIGHT, "on": ON_PATH}
TREE_SIDE_OF = {
    "left": SIDE_LEFT,
    "right": SIDE_RIGHT,
    "on": SIDE_ON,
    "descendant": SIDE_BELOW,
}


@pytest.fixture(scope="module")
def grid_setup():
    inst = grid_instance(5, seed=7)
    g = perturb(inst.graph, seed=3)
    tree = build_decomposition(g, inst.hole, leaf_limit=4)
    msp = build_enhanced_mssp(g, inst.hole, tree)
    brute = {s: brute_dijkstra(g, s) for s in tree.hole_cycle}
    return g, tree, msp, brute


@pytest.fixture(scope="module")
def packed_setup():
    inst = delaunay_instance(60, seed=11)
    norm = normalize(inst.graph, inst.hole)
    g = perturb(norm.graph, seed=5, mode="packed")
    tree = build_decomposition(g, norm.hole, leaf_limit=8)
    msp = build_enhanced_mssp(g, norm.hole, tree)
    brute = {s: brute_dijkstra(g, s) for s in tree.hole_cycle}
    return g, tree, msp, brute


# ---------------------------------------------------------------------------
# trees and distances
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("which", ["grid_setup", "packed_setup"])
def test_versions_match_dijkstra(which, request):
    g, tree, msp, brute = request.getfixturevalue(which)
    for s in msp.sources:
        dist, parent = brute[s]
        for v in range(g.n):
            assert msp.dist(s, v) == dist[v]
            assert msp.parent_dart(s, v) == parent[v]
            assert msp.depth(s, v) == len(brute_path_to(g, parent, v)) - 1


@pytest.mark.parametrize("which", ["grid_setup", "packed_setup"])
def test_pivot_budget(which, request):
    g, tree, msp, brute = request.getfixturevalue(which)
    assert 0 < msp.pivots <= 2 * g.m


def test_unit_grid_corner_distance():
    inst = grid_instance(4, seed=0, weight_range=(1, 1), triangulated=False)
    g = perturb(inst.graph, seed=1)
    tree = build_decomposition(g, inst.hole, leaf_limit=100)
    msp = build_enhanced_mssp(g, inst.hole, tree)
    corner, opposite = 0, g.n - 1
    assert g.base_of(msp.dist(corner, opposite)) == 2 * (4 - 1)
    assert msp.dist(corner, corner) == 0


# ---------------------------------------------------------------------------
# direction
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("which", ["grid_setup", "packed_setup"])
def test_direction_matches_brute(which, request):
    g, tree, msp, brute = request.getfixturevalue(which)
    for s in msp.sources:
        _, parent = brute[s]
        for p in tree.paths:
            for t, v in enumerate(p.vertices):
                side, _ = brute_entry_side(
                    g, parent, p.vertices, p.ext_before, p.ext_after, s, v
                )
                assert msp.direction(s, v, p) == SIDE_OF[side], (s, p.id, t)


@pytest.mark.parametrize("which", ["grid_setup", "packed_setup"])
def test_run_entry_matches_brute(which, request):
    g, tree, msp, brute = request.getfixturevalue(which)
    for s in msp.sources:
        _, parent = brute[s]
        for p in tree.paths:
            for t, v in enumerate(p.vertices):
                _, entry = brute_entry_side(
                    g, parent, p.vertices, p.ext_before, p.ext_after, s, v
                )
                assert p.vertices[msp.run_entry(s, p, t)] == entry


# ---------------------------------------------------------------------------
# count / select
# ---------------------------------------------------------------------------

def brute_side_lists(g, parent, p, s):
    lefts, rights = [], []
    for t, v in enumerate(p.vertices):
        side, _ = brute_entry_side(g, parent, p.vertices, p.ext_before, p.ext_after, s, v)
        if side == "left":
            lefts.append(t)
        elif side == "right":
            rights.append(t)
    return lefts, rights


@pytest.mark.parametrize("which", ["grid_setup", "packed_setup"])
def test_count_and_select_match_brute(which, request):
    g, tree, msp, brute = request.getfixturevalue(which)
    for s in msp.sources:
        _, parent = brute[s]
        for p in tree.paths:
            L = len(p.vertices)
            lefts, rights = brute_side_lists(g, parent, p, s)
            ranges = [(0, L - 1), (0, 0), (L - 1, L - 1), (L // 3, (2 * L) // 3)]
            for i, j in ranges:
                want = sum(1 for t in lefts if i <= t <= j)
                assert msp.count(s, p, i, j) == want
                want_r = sum(1 for t in rights if i <= t <= j)
                assert msp.count(s, p, i, j, side=RIGHT) == want_r
            if L > 1:
                assert msp.count(s, p, L - 1, 0) == 0
            for rank, t in enumerate(lefts, start=1):
                assert msp.select(s, p, 0, L - 1, rank) == p.vertices[t]
            for rank, t in enumerate(rights, start=1):
                assert msp.select(s, p, 0, L - 1, rank, side=RIGHT) == p.vertices[t]


def test_count_select_errors(grid_setup):
    g, tree, msp, brute = grid_setup
    s = msp.sources[0]
    p = tree.paths[0]
    L = len(p.vertices)
    with pytest.raises(BadRange):
        msp.count(s, p, 0, L)
    with pytest.raises(BadRange):
        msp.count(s, p, -1, 0)
    with pytest.raises(RankOutOfRange):
        msp.select(s, p, 0, L - 1, msp.count(s, p, 0, L - 1) + 1)
    with pytest.raises(RankOutOfRange):
        msp.select(s, p, 0, L - 1, 0)


# ---------------------------------------------------------------------------
# ancestors
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("which", ["grid_setup", "packed_setup"])
def test_ancestor_matches_parent_walk(which, request):
    g, tree, msp, brute = request.getfixturevalue(which)
    for s in msp.sources[::3]:
        _, parent = brute[s]
        for v in range(0, g.n, 5):
            chain = brute_path_to(g, parent, v)
            for d, a in enumerate(chain):
                assert msp.ancestor(s, v, d) == a
            with pytest.raises(DepthOutOfRange):
                msp.ancestor(s, v, len(chain))
            with pytest.raises(DepthOutOfRange):
                msp.ancestor(s, v, -1)


def test_ancestor_at_distance(grid_setup):
    g, tree, msp, brute = grid_setup
    s = msp.sources[2]
    _, parent = brute[s]
    v = max(range(g.n), key=lambda u: msp.depth(s, u))
    chain = brute_path_to(g, parent, v)
    for i, a in enumerate(chain):
        da = msp.dist(s, a)
        assert msp.ancestor_at_distance(s, v, da) == a
        if i + 1 < len(chain):
            assert msp.ancestor_at_distance(s, v, msp.dist(s, chain[i + 1]) - 1) == a
    with pytest.raises(DepthOutOfRange):
        msp.ancestor_at_distance(s, v, -1)


# ---------------------------------------------------------------------------
# tree side
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("which", ["grid_setup", "packed_setup"])
def test_tree_side_matches_brute(which, request):
    g, tree, msp, brute = request.getfixturevalue(which)
    tips = set()
    for nd in tree.nodes:
        if nd.cycle is not None:
            tips.add(nd.cycle.u)
            tips.add(nd.cycle.v)
    tips.update(range(0, g.n, 7))
    for s in msp.sources[::2]:
        _, parent = brute[s]
        for r in tips:
            for v in range(g.n):
                want = brute_tree_side(g, parent, msp.sources, s, r, v)
                assert msp.tree_side(s, v, r) == TREE_SIDE_OF[want], (s, r, v)


# ---------------------------------------------------------------------------
# toggling
# ---------------------------------------------------------------------------

def count_transitions(bits):
    return sum(1 for a, b in zip(bits, bits[1:]) if a != b)


@pytest.mark.parametrize("which", ["grid_setup", "packed_setup"])
def test_membership_toggles_bounded(which, request):
    g, tree, msp, brute = request.getfixturevalue(which)
    V = len(msp.sources)
    for pd in msp._pd:
        skip = set(pd.src_versions)
        for t in range(len(pd.verts)):
            seq = [pd.status_at(k, t) for k in range(V)]
            kept = [x for k, x in enumerate(seq) if k not in skip]
            assert count_transitions([x == 1 for x in kept]) <= 2, (pd.p.id, t)
            assert count_transitions([x == 2 for x in kept]) <= 2, (pd.p.id, t)


# ---------------------------------------------------------------------------
# cross index
# ---------------------------------------------------------------------------

def test_cross_index_partitions_rotations(grid_setup):
    g, tree, msp, brute = grid_setup
    ci = msp.build_cross_index()
    for p in tree.paths:
        for t, v in enumerate(p.vertices):
            wedges = [w for w in ci.paths_at(v) if w.path_id == p.id and w.pos == t]
            assert len(wedges) == 1
            w = wedges[0]
            incoming = {d ^ 1 for d in g.darts_at(v)}
            path_darts = {w.in_dart, w.out_dart ^ 1}
            assert set(w.left) | set(w.right) == incoming - path_darts
            assert not set(w.left) & set(w.right)
            for d in w.left:
                assert side_of_entry(g, d, p.vertices, p.ext_before, p.ext_after) == "left"
            for d in w.right:
                assert side_of_entry(g, d, p.vertices, p.ext_before, p.ext_after) == "right"


def test_cross_index_separating_query(grid_setup):
    g, tree, msp, brute = grid_setup
    ci = msp.build_cross_index()
    for p in tree.paths:
        for t, v in enumerate(p.vertices):
            w = [x for x in ci.paths_at(v) if x.path_id == p.id][0]
            if w.left and w.right:
                assert p.id in ci.paths_separating(v, w.left[0], w.right[0])
            if len(w.left) >= 2:
                assert p.id not in ci.paths_separating(v, w.left[0], w.left[1])
            assert ci.side_of(v, p.id, w.in_dart) == ON_PATH


# ---------------------------------------------------------------------------
# engines, errors, stats
# ---------------------------------------------------------------------------

def test_python_engine_agrees_on_packed(packed_setup):
    g, tree, msp, brute = packed_setup
    slow = build_enhanced_mssp(g, tree.hole, tree, engine="python")
    for s in msp.sources[::4]:
        for v in range(0, g.n, 3):
            assert slow.dist(s, v) == msp.dist(s, v)
            assert slow.parent_dart(s, v) == msp.parent_dart(s, v)
    p = tree.paths[0]
    for s in msp.sources[::4]:
        for v in p.vertices:
            assert slow.direction(s, v, p) == msp.direction(s, v, p)


def test_error_types(grid_setup):
    g, tree, msp, brute = grid_setup
    p = tree.paths[0]
    interior = next(v for v in range(g.n) if v not in msp.src_index)
    with pytest.raises(UnknownSite):
        msp.dist(interior, 0)
    with pytest.raises(VertexNotOnPath):
        off = next(v for v in range(g.n) if v not in p.pos)
        msp.direction(msp.sources[0], off, p)
    with pytest.raises(NotInTree):
        msp.tree_side(msp.sources[0], g.n + 3, 0)


def test_stats_roundtrip(grid_setup, tmp_path):
    g, tree, msp, brute = grid_setup
    out = tmp_path / "mssp.json"
    text = msp.dump_stats(out)
    doc = json.loads(out.read_text())
    assert doc == json.loads(text)
    assert doc["versions"] == len(msp.sources)
    assert doc["pivots"] == msp.pivots
    assert doc["store_bytes"] > 0
    assert len(doc["paths"]) == len(tree.paths)
