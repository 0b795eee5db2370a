"""Voronoi diagram builds, merges, and point location against brute force."""

import json
import random

import pytest

from planarvd.decomposition import build_decomposition
from planarvd.instances import carved_instance, delaunay_instance, grid_instance
from planarvd.planar_core import PlanarGraph, SITE_SHIFT, normalize, perturb
from planarvd.reference_oracles import (
    brute_dijkstra,
    brute_trichromatic_faces,
    brute_vd_star,
    brute_voronoi_cells,
)
from planarvd.voronoi import (
    DanglingInvariantViolation,
    EmptyCell,
    MergeError,
    VDNode,
    VDStar,
    VoronoiBuilder,
    VoronoiError,
    point_locate,
    render_svg,
    trichromatic_face,
)

MODES = ("exact", "fast")


@pytest.fixture(scope="module")
def grid_builder():
    inst = grid_instance(5, seed=7)
    g = perturb(inst.graph, seed=3)
    return g, inst.hole, VoronoiBuilder(g, inst.hole, leaf_limit=4)


@pytest.fixture(scope="module")
def grid7_builder():
    inst = grid_instance(7, seed=2)
    g = perturb(inst.graph, seed=5)
    return g, inst.hole, VoronoiBuilder(g, inst.hole, leaf_limit=6)


@pytest.fixture(scope="module")
def packed_builder():
    inst = delaunay_instance(60, seed=11)
    norm = normalize(inst.graph, inst.hole)
    g = perturb(norm.graph, seed=5, mode="packed")
    return g, norm.hole, VoronoiBuilder(g, norm.hole, leaf_limit=8)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def draw_sites(b, count, seed, spread):
    """Random filtered site weights on the hole cycle."""
    rng = random.Random(seed)
    cyc = b.root.cycle
    sites = rng.sample(cyc, min(count, len(cyc)))
    return b.filter_dominated_sites({s: rng.randrange(0, spread) for s in sites})


def assert_matches_brute(g, hole, b, vd, omega):
    """Every vertex locates to the brute owner with the brute distance."""
    sites = list(omega)
    wmap = b._lift(b.root, omega)
    cells, values = brute_voronoi_cells(g, sites, wmap)
    for v in range(g.n):
        s, dist = point_locate(vd, v)
        assert s == cells[v]
        assert dist == g.base_of(values[v] >> SITE_SHIFT)
    leaves, faces, _ = brute_vd_star(g, hole, sites, wmap)
    assert len(vd.leaves()) == len(leaves)
    return cells


def diagram_shape(vd):
    corners = {k: tuple(vd.nodes[k].corners) for k in vd.nodes}
    return sorted(vd.nodes), sorted(vd.edge_list()), corners


def k4_setup():
    """Complete graph on four vertices, hole on {0, 1, 2}, center 3."""
    edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    rotations = [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]]
    g0 = PlanarGraph(4, edges, rotations, [1] * 6)
    hole = next(
        f for f in range(g0.n_faces)
        if {int(g0.tail[d]) for d in g0.faces[f]} == {0, 1, 2}
    )
    return g0, hole


# ---------------------------------------------------------------------------
# construction preconditions
# ---------------------------------------------------------------------------


def test_builder_rejects_raw_weights():
    inst = grid_instance(4, seed=1)
    with pytest.raises(ValueError):
        VoronoiBuilder(inst.graph, inst.hole)


def test_builder_rejects_non_triangular_faces():
    inst = grid_instance(4, seed=1, triangulated=False)
    g = perturb(inst.graph, seed=1)
    with pytest.raises(ValueError):
        VoronoiBuilder(g, inst.hole)


def test_builder_reuses_supplied_structures(grid_builder):
    g, hole, b = grid_builder
    tree = build_decomposition(g, hole, leaf_limit=4)
    b2 = VoronoiBuilder(g, hole, leaf_limit=4, tree=tree, msp=b.root.msp)
    assert b2.root.tree is tree
    assert b2.root.msp is b.root.msp


# ---------------------------------------------------------------------------
# trichromatic face
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("method", ["scan", "jump", "auto"])
def test_trichromatic_matches_brute(grid_builder, method):
    g, hole, b = grid_builder
    cyc = b.root.cycle
    rng = random.Random(31)
    checked = empties = 0
    for _ in range(150):
        triple = rng.sample(cyc, 3)
        omega = {s: rng.randrange(0, 6000) for s in triple}
        wmap = b._lift(b.root, omega)
        want = brute_trichromatic_faces(g, hole, triple, wmap)
        kept = b.filter_dominated_sites(omega)
        try:
            got = b.trichromatic_face(triple, omega, method=method)
        except EmptyCell:
            assert len(kept) < 3
            empties += 1
            continue
        assert len(kept) == 3
        if len(want) <= 1:
            assert got == (want[0] if want else None)
        else:
            assert got is None or got in want
        checked += 1
    assert checked > 10 and empties > 10


def test_trichromatic_packed_instance(packed_builder):
    g, hole, b = packed_builder
    cyc = b.root.cycle
    rng = random.Random(5)
    for _ in range(60):
        triple = rng.sample(cyc, 3)
        omega = {s: rng.randrange(0, 50) for s in triple}
        if len(b.filter_dominated_sites(omega)) < 3:
            continue
        wmap = b._lift(b.root, omega)
        want = brute_trichromatic_faces(g, hole, triple, wmap)
        got = b.trichromatic_face(triple, omega)
        if len(want) <= 1:
            assert got == (want[0] if want else None)
        else:
            assert got is None or got in want


def test_trichromatic_one_owner_inside_gives_none(grid_builder):
    g, hole, b = grid_builder
    cyc = b.root.cycle
    a, s1, s2 = cyc[0], cyc[5], cyc[11]
    dist, _ = brute_dijkstra(g, a)
    omega = {a: 0, s1: g.base_of(dist[s1]) - 1, s2: g.base_of(dist[s2]) - 1}
    wmap = b._lift(b.root, omega)
    cells, _ = brute_voronoi_cells(g, [a, s1, s2], wmap)
    interior = [v for v in range(g.n) if v not in set(cyc)]
    assert interior and all(cells[v] == a for v in interior)
    assert brute_trichromatic_faces(g, hole, [a, s1, s2], wmap) == []
    assert b.trichromatic_face([a, s1, s2], omega) is None


def test_trichromatic_k4_center_assignment():
    g0, hole = k4_setup()
    g = perturb(g0, seed=1)
    b = VoronoiBuilder(g, hole)
    omega = {0: 0, 1: 0, 2: 0}
    wmap = b._lift(b.root, omega)
    cells, _ = brute_voronoi_cells(g, [0, 1, 2], wmap)
    assert cells[3] == 0  # this perturbation hands the center to site 0
    got = b.trichromatic_face([0, 1, 2], omega)
    assert sorted(int(g.tail[d]) for d in g.faces[got]) == [1, 2, 3]
    assert brute_trichromatic_faces(g, hole, [0, 1, 2], wmap) == [got]


def test_trichromatic_rejects_duplicates(grid_builder):
    _, _, b = grid_builder
    cyc = b.root.cycle
    with pytest.raises(ValueError):
        b.trichromatic_face([cyc[0], cyc[0], cyc[1]], {cyc[0]: 0, cyc[1]: 0})


def test_parity_trace_matches_brute_crossings(grid_builder):
    g, hole, b = grid_builder
    root = b.root
    rng = random.Random(8)
    compared = 0
    for _ in range(40):
        triple = rng.sample(root.cycle, 3)
        omega = {s: rng.randrange(0, 3000) for s in triple}
        wmap = b._lift(root, omega)

        def owner(v):
            best = None
            for s in triple:
                val = wmap[s] + (root.msp.dist(s, v) << SITE_SHIFT)
                if best is None or val < best[0]:
                    best = (val, s)
            return best[1]

        traces = {}
        for method in ("scan", "jump"):
            tr = []
            try:
                trichromatic_face(root, triple, wmap, method=method, trace=tr)
            except EmptyCell:
                tr = None
            traces[method] = tr
        if traces["scan"] is None:
            assert traces["jump"] is None
            continue
        assert len(traces["scan"]) == len(traces["jump"])
        for step_s, step_j in zip(traces["scan"], traces["jump"]):
            assert step_s["node"] == step_j["node"]
            assert step_s["parities"] == step_j["parities"]
            assert step_s["inside"] == step_j["inside"]
            # brute crossing count along the separator cycle
            nd = b.root.tree.nodes[step_s["node"]]
            cyc = nd.cycle
            walk = list(cyc.P.vertices) + list(reversed(cyc.Pp.vertices))[:-1]
            counts = {}
            for i in range(len(walk)):
                a, bb = owner(walk[i]), owner(walk[(i + 1) % len(walk)])
                if a != bb:
                    key = (a, bb) if a < bb else (bb, a)
                    counts[key] = counts.get(key, 0) + 1
            for pair_name, par in step_s["parities"].items():
                x, y = (int(t) for t in pair_name.split("-"))
                assert counts.get((x, y), 0) % 2 == par
            compared += 1
    assert compared > 20


# ---------------------------------------------------------------------------
# diagram builds against brute force
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("count", [1, 2, 3, 4, 6, 9, 16])
def test_grid_builds_match_brute(grid_builder, count):
    g, hole, b = grid_builder
    for seed in range(4):
        omega = draw_sites(b, count, 900 * count + seed, 2500)
        if not omega:
            continue
        for mode in MODES:
            vd = b.build_vd_star(omega, mode=mode)
            assert_matches_brute(g, hole, b, vd, omega)


@pytest.mark.parametrize("count", [3, 7, 14, 24])
def test_grid7_builds_match_brute(grid7_builder, count):
    g, hole, b = grid7_builder
    for seed in range(3):
        omega = draw_sites(b, count, 77 * count + seed, 800)
        if not omega:
            continue
        for mode in MODES:
            vd = b.build_vd_star(omega, mode=mode)
            assert_matches_brute(g, hole, b, vd, omega)


@pytest.mark.parametrize("count", [2, 4, 8, 12])
def test_packed_builds_match_brute(packed_builder, count):
    g, hole, b = packed_builder
    for seed in range(3):
        omega = draw_sites(b, count, 55 * count + seed, 120)
        if not omega:
            continue
        for mode in MODES:
            vd = b.build_vd_star(omega, mode=mode)
            assert_matches_brute(g, hole, b, vd, omega)


def test_fast_and_exact_agree(grid_builder):
    g, hole, b = grid_builder
    for count, seed in [(4, 0), (6, 1), (9, 2), (16, 3)]:
        omega = draw_sites(b, count, 40 * count + seed, 1500)
        if len(omega) < 3:
            continue
        shapes = [diagram_shape(b.build_vd_star(omega, mode=mode)) for mode in MODES]
        assert shapes[0] == shapes[1]


def test_internal_nodes_are_brute_trichromatic_faces(grid_builder):
    g, hole, b = grid_builder
    for count, seed in [(5, 0), (8, 1), (16, 2)]:
        omega = draw_sites(b, count, 13 * count + seed, 2000)
        if len(omega) < 3:
            continue
        wmap = b._lift(b.root, omega)
        want = set(brute_trichromatic_faces(g, hole, list(omega), wmap))
        vd = b.build_vd_star(omega, mode="exact")
        assert {nd.face for nd in vd.internal_nodes()} == want


def test_full_circle_structure(grid_builder):
    g, hole, b = grid_builder
    omega = draw_sites(b, 16, 271, 300)
    if len(omega) < 3:
        pytest.skip("all but two sites dominated for this draw")
    vd = b.build_vd_star(omega, mode="exact")
    k = len(omega)
    assert len(vd.components()) == 1
    assert len(vd.leaves()) == k
    assert len(vd.internal_nodes()) <= k - 2
    for nd in vd.leaves():
        assert vd.degree(nd.key) == 1
    for nd in vd.internal_nodes():
        assert vd.degree(nd.key) == 3
        assert frozenset(vd.adj[nd.key].values()) == frozenset(nd.corner_pairs())


def test_two_sites_give_a_cut(grid_builder):
    g, hole, b = grid_builder
    cyc = b.root.cycle
    omega = b.filter_dominated_sites({cyc[2]: 5, cyc[9]: 0})
    assert len(omega) == 2
    vd = b.build_vd_star(omega, mode="exact")
    assert len(vd.leaves()) == 2 and not vd.internal_nodes()
    assert len(vd.edge_list()) == 1
    cells = assert_matches_brute(g, hole, b, vd, omega)
    for nd in vd.leaves():
        u, v = g.edge_endpoints(nd.edge)
        assert cells[u] != cells[v]


def test_single_site_diagram_is_empty(grid_builder):
    g, hole, b = grid_builder
    s = b.root.cycle[4]
    vd = b.build_vd_star({s: 17}, mode="exact")
    assert not vd.nodes
    dist, _ = brute_dijkstra(g, s)
    for v in range(g.n):
        owner, d = point_locate(vd, v)
        assert owner == s
        assert d == 17 + g.base_of(dist[v])


def test_seven_site_instance_counts():
    inst = carved_instance(40, 7, seed=0)
    norm = normalize(inst.graph, inst.hole, degree_target=999)
    g = perturb(norm.graph, seed=100)
    b = VoronoiBuilder(g, norm.hole)
    cyc = b.root.cycle
    assert len(cyc) == 7
    omega = b.filter_dominated_sites({s: 0 for s in cyc})
    assert len(omega) == 7
    vd = b.build_vd_star(omega, mode="exact")
    assert len(vd.leaves()) == 7
    assert len(vd.internal_nodes()) == 5
    assert diagram_shape(b.build_vd_star(omega, mode="fast")) == diagram_shape(vd)
    assert_matches_brute(g, norm.hole, b, vd, omega)


def test_sealed_world_children_locate_exactly(grid_builder):
    g, hole, b = grid_builder
    cyc = b.root.cycle
    reds = [cyc[i] for i in (0, 1, 2, 3, 8, 13)]
    omega = {s: (7 * i) % 23 for i, s in enumerate(reds)}
    w = b._world_for(b.root, (reds[0], reds[-1]))
    vd = b._build_range(w, (reds[0], reds[-1]), reds, omega, "exact", "auto", top=False)
    assert any(len(nd.corners) > 3 for nd in vd.internal_nodes())
    for v in range(w.graph.n):
        want = min(
            reds, key=lambda s: vd.wmap[s] + (w.msp.dist(s, v) << SITE_SHIFT)
        )
        assert point_locate(vd, v)[0] == want


def test_world_cache_reuse(grid_builder):
    g, hole, b = grid_builder
    omega = draw_sites(b, 9, 1234, 700)
    if len(omega) < 5:
        pytest.skip("too many dominated sites for this draw")
    b.build_vd_star(omega, mode="exact")
    before = b.stats["worlds_built"]
    b.build_vd_star(omega, mode="exact")
    assert b.stats["worlds_built"] == before


def test_filter_dominated_sites_matches_brute(grid_builder):
    g, hole, b = grid_builder
    rng = random.Random(77)
    for _ in range(20):
        sites = rng.sample(b.root.cycle, 6)
        omega = {s: rng.randrange(0, 4000) for s in sites}
        wmap = b._lift(b.root, omega)
        cells, _ = brute_voronoi_cells(g, sites, wmap)
        kept = b.filter_dominated_sites(omega)
        assert set(kept) == {s for s in sites if cells[s] == s}
        assert all(kept[s] == omega[s] for s in kept)


def test_build_rejects_bad_input(grid_builder):
    _, _, b = grid_builder
    with pytest.raises(ValueError):
        b.build_vd_star({})
    with pytest.raises(ValueError):
        b.build_vd_star({b.root.cycle[0]: 0}, mode="sloppy")
    with pytest.raises(ValueError):
        b.build_vd_star({12345: 0})


# ---------------------------------------------------------------------------
# merge
# ---------------------------------------------------------------------------


def test_public_merge_matches_brute(grid_builder):
    g, hole, b = grid_builder
    rng = random.Random(19)
    done = 0
    for _ in range(12):
        sites = rng.sample(b.root.cycle, rng.choice([4, 6, 8]))
        omega = b.filter_dominated_sites(
            {s: rng.randrange(0, 1500) for s in sites}
        )
        if len(omega) < 4:
            continue
        order = b._top_order(list(omega))
        cut = len(order) // 2
        for mode in MODES:
            vg = b.build_vd_star({s: omega[s] for s in order[:cut]}, mode=mode)
            vr = b.build_vd_star({s: omega[s] for s in order[cut:]}, mode=mode)
            vd = b.merge(vg, vr)
            assert_matches_brute(g, hole, b, vd, omega)
            wmap = b._lift(b.root, omega)
            want = set(brute_trichromatic_faces(g, hole, list(omega), wmap))
            assert {nd.face for nd in vd.internal_nodes()} == want
        done += 1
    assert done >= 5


def test_merge_rejects_overlap_and_interleaving(grid_builder):
    g, hole, b = grid_builder
    cyc = b.root.cycle
    omega = b.filter_dominated_sites({cyc[i]: 0 for i in (0, 4, 8, 12)})
    if len(omega) < 4:
        pytest.skip("degenerate draw")
    sites = b._top_order(list(omega))
    va = b.build_vd_star({sites[0]: 0, sites[1]: 0}, mode="fast")
    vb = b.build_vd_star({sites[1]: 0, sites[2]: 0}, mode="fast")
    with pytest.raises(ValueError):
        b.merge(va, vb)
    vx = b.build_vd_star({sites[0]: 0, sites[2]: 0}, mode="fast")
    vy = b.build_vd_star({sites[1]: 0, sites[3]: 0}, mode="fast")
    with pytest.raises(ValueError):
        b.merge(vx, vy)


def test_strict_association_counts_run_on_full_circles(grid_builder):
    g, hole, b = grid_builder
    omega = draw_sites(b, 16, 5001, 400)
    if len(omega) < len(b.root.cycle):
        omega = {s: 0 for s in b.root.cycle}
    before = b.stats["strict_merges"]
    b.build_vd_star(omega, mode="exact")
    assert b.stats["strict_merges"] > before


def test_dangling_check_rejects_double_ends(grid_builder):
    g, hole, b = grid_builder
    world = b.root
    omega = {world.cycle[0]: 0, world.cycle[5]: 0}
    wmap = b._lift(world, omega)
    out = VDStar(world, list(omega), wmap, omega, "fast")
    n1 = VDNode(("l", 0), [(0, world.cycle[0]), (1, world.cycle[0])], edge=0)
    n2 = VDNode(("l", 1), [(1, world.cycle[5]), (2, world.cycle[5])], edge=1)
    out.add_node(n1)
    out.add_node(n2)
    out.add_edge(n1.key, n2.key, frozenset(omega))
    kept = {n1.key: n1, n2.key: n2}
    pair = frozenset(omega)
    connectors = [
        {"key": n1.key, "pair": pair, "used": False, "half": "g"},
        {"key": n2.key, "pair": pair, "used": False, "half": "g"},
    ]
    with pytest.raises(DanglingInvariantViolation):
        b._check_dangling(kept, out, connectors, "g")


def test_merge_stats_accumulate(grid_builder):
    _, _, b = grid_builder
    omega = draw_sites(b, 8, 31415, 900)
    if len(omega) < 4:
        pytest.skip("degenerate draw")
    before = dict(b.stats)
    b.build_vd_star(omega, mode="exact")
    assert b.stats["merges"] > before["merges"]
    assert b.stats["dangling_checks"] > before["dangling_checks"]


# ---------------------------------------------------------------------------
# serialisation and rendering
# ---------------------------------------------------------------------------


def test_json_dump_roundtrips(grid_builder, tmp_path):
    g, hole, b = grid_builder
    omega = draw_sites(b, 6, 808, 1000)
    if len(omega) < 3:
        pytest.skip("degenerate draw")
    vd = b.build_vd_star(omega, mode="exact")
    path = tmp_path / "vd.json"
    vd.dump_json(path)
    doc = json.loads(path.read_text())
    assert doc["mode"] == "exact"
    assert sorted(doc["weights"]) == sorted(str(s) for s in omega)
    assert len(doc["nodes"]) == len(vd.nodes)
    assert len(doc["edges"]) == len(vd.edge_list())
    keys = {tuple(n["key"]) for n in doc["nodes"]}
    assert keys == set(vd.nodes)


def test_render_svg_shades_cells(grid_builder, tmp_path):
    g, hole, b = grid_builder
    omega = draw_sites(b, 6, 909, 1000)
    if len(omega) < 3:
        pytest.skip("degenerate draw")
    vd = b.build_vd_star(omega, mode="exact")
    coords = {v: (v % 5, v // 5) for v in range(g.n)}
    path = tmp_path / "vd.svg"
    text = render_svg(vd, coords, path=path)
    assert path.read_text() == text
    assert text.startswith("<svg") and text.rstrip().endswith("</svg>")
    assert text.count("<circle") >= g.n
    shades = {
        part.split('"')[0]
        for part in text.split('fill="hsl(')[1:]
    }
    assert len(shades) == len({point_locate(vd, v)[0] for v in coords})


def test_cell_boundary_paths_cover_site_edges(grid_builder):
    g, hole, b = grid_builder
    omega = draw_sites(b, 8, 606, 1200)
    if len(omega) < 4:
        pytest.skip("degenerate draw")
    vd = b.build_vd_star(omega, mode="exact")
    for s in vd.sites:
        covered = set()
        for walk in vd.cell_boundary(s):
            covered.update(walk)
        for k1, k2, pair in vd.edge_list():
            if s in pair:
                assert k1 in covered and k2 in covered
