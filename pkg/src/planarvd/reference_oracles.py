"""Brute-force reference implementations used to validate the fast structures.

Everything here is deliberately simple and slow (quadratic scans, repeated
full Dijkstra runs) and shares nothing with the fast path beyond the
PlanarGraph container, so agreement between the two is meaningful evidence.
"""

from __future__ import annotations

from .planar_core import SITE_SHIFT, PlanarGraph


# ---------------------------------------------------------------------------
# shortest paths
# ---------------------------------------------------------------------------


def brute_dijkstra(g: PlanarGraph, source):
    """O(n^2) Dijkstra; returns (dist list, parent_dart list)."""
    dist = [None] * g.n
    parent = [-1] * g.n
    done = [False] * g.n
    dist[source] = 0
    for _ in range(g.n):
        v = -1
        for u in range(g.n):
            if done[u] or dist[u] is None:
                continue
            if v < 0 or dist[u] < dist[v]:
                v = u
        if v < 0:
            break
        done[v] = True
        for d in g.darts_at(v):
            w = int(g.head[d])
            nd = dist[v] + g.weights[d >> 1]
            if dist[w] is None or nd < dist[w]:
                dist[w] = nd
                parent[w] = d
    return dist, parent


def brute_path_to(g: PlanarGraph, parent, v):
    """Vertex list from the tree root down to v."""
    out = [v]
    while parent[v] >= 0:
        v = int(g.tail[parent[v]])
        out.append(v)
    out.reverse()
    return out


def enumerate_simple_paths(g: PlanarGraph, u, v, cap=14):
    """All simple u-v paths as weight sums; only for graphs up to cap vertices."""
    if g.n > cap:
        raise ValueError("path enumeration capped at %d vertices" % cap)
    sums = []
    seen = [False] * g.n

    def walk(x, acc):
        if x == v:
            sums.append(acc)
            return
        seen[x] = True
        for d in g.darts_at(x):
            w = int(g.head[d])
            if not seen[w]:
                walk(w, acc + g.weights[d >> 1])
        seen[x] = False

    walk(u, 0)
    return sums


# ---------------------------------------------------------------------------
# entry sides
# ---------------------------------------------------------------------------


def _ccw_between(g: PlanarGraph, v, dart_in, dart_out, q):
    """True if dart q (head v) lies strictly between the path darts,
    scanning counterclockwise from dart_in -- the package's "left" side."""
    a = dart_in ^ 1
    b = dart_out
    d = int(g.prv[a])
    while d != b:
        if (d ^ 1) == q:
            return True
        d = int(g.prv[d])
    return False


def brute_entry_side(g: PlanarGraph, parent, path, ext_before, ext_after, source, v):
    """Classify how the tree path source..v meets the oriented path.

    `path` is the vertex list, ext_before/ext_after its extension neighbors
    (may be None at a genuinely unextended end).  Returns (side, entry_vertex)
    with side one of "left", "right", "on"; "on" covers the source lying on
    the path and entries along extension darts.  Raises AssertionError if the
    tree path meets the path in a non-contiguous way, which would break the
    run-inheritance reasoning everywhere else.
    """
    pos = {u: i for i, u in enumerate(path)}
    r = brute_path_to(g, parent, v)
    on = [u in pos for u in r]
    if True not in on:
        raise ValueError("vertex %d not on path" % v)
    first = on.index(True)
    # contiguity of the overlap: one block, consecutive along the path
    k = first
    while k < len(on) and on[k]:
        k += 1
    assert all(not flag for flag in on[k:]), "tree path re-enters the path"
    for a, b in zip(r[first:k - 1], r[first + 1:k]):
        assert abs(pos[a] - pos[b]) == 1, "tree path jumps along the path"
    entry = r[first]
    if first == 0:
        return "on", entry
    dart_in_tree = g.dart(r[first - 1], entry)
    i = pos[entry]
    prev_v = path[i - 1] if i > 0 else ext_before
    next_v = path[i + 1] if i + 1 < len(path) else ext_after
    if prev_v is None or next_v is None:
        return "on", entry
    d_in = g.dart(prev_v, entry)
    d_out = g.dart(entry, next_v)
    if dart_in_tree == d_in or dart_in_tree == (d_out ^ 1):
        return "on", entry
    return ("left" if _ccw_between(g, entry, d_in, d_out, dart_in_tree) else "right", entry)


def brute_tree_side(g: PlanarGraph, parent, hole_cycle, source, tip, v):
    """Position of v relative to the tree path source..tip.

    Returns "on", "descendant", "left" or "right".  The anchor at the source
    is the hole wedge: the tree is rooted on the hole face, and divergence at
    the source is classified against the hole walk's arriving dart.
    """
    r = brute_path_to(g, parent, tip)
    if v in r:
        return "on"
    rv = brute_path_to(g, parent, v)
    if tip in rv:
        return "descendant"
    k = 0
    while k < min(len(r), len(rv)) and r[k] == rv[k]:
        k += 1
    w = r[k - 1]
    dart_r = g.dart(w, r[k])
    dart_v = g.dart(w, rv[k])
    if k == 1:
        # divergence at the root: linearize the rotation by cutting it at
        # the hole-face corner, which sits between the backward hole edge
        # and the forward one.  The backward dart itself is a legal branch
        # (or reference) and sorts first.
        i = hole_cycle.index(source)
        d = g.dart(source, hole_cycle[i - 1])
        pr = pv = None
        idx = 0
        while pr is None or pv is None:
            if d == dart_r:
                pr = idx
            if d == dart_v:
                pv = idx
            d = int(g.prv[d])
            idx += 1
        return "left" if pv < pr else "right"
    a_in = g.dart(r[k - 2], w)
    return "left" if _ccw_between(g, w, a_in, dart_r, dart_v ^ 1) else "right"


# ---------------------------------------------------------------------------
# Voronoi structures
# ---------------------------------------------------------------------------


def brute_voronoi_cells(g: PlanarGraph, sites, weights):
    """cells[v] = owning site under additively weighted perturbed distances.

    `weights` maps site -> lifted integer weight (site index in the low bits
    so argmins are unique); distance values are shifted to the same lattice.
    Returns (cells dict, value dict) with values in the lifted lattice.
    """
    per_site = {s: brute_dijkstra(g, s)[0] for s in sites}
    cells = {}
    values = {}
    for v in range(g.n):
        best = None
        who = None
        for s in sites:
            val = weights[s] + (per_site[s][v] << SITE_SHIFT)
            if best is None or val < best:
                best = val
                who = s
        cells[v] = who
        values[v] = best
    return cells, values


def brute_trichromatic_faces(g: PlanarGraph, hole, sites, weights):
    """Faces (other than the hole) whose three corners have three owners."""
    cells, _ = brute_voronoi_cells(g, sites, weights)
    out = []
    for f in range(g.n_faces):
        if f == hole:
            continue
        owners = {cells[v] for v in g.face_vertices(f)}
        if len(owners) == 3:
            out.append(f)
    return out


def brute_vd_star(g: PlanarGraph, hole, sites, weights):
    """Structure of the dual Voronoi tree, straight from the cell labels.

    Returns (leaves, internals, edges): leaves are hole edges as ordered
    site pairs, internals are trichromatic face ids, and edges is a list of
    frozensets over node keys with the separating site pair attached.
    """
    cells, _ = brute_voronoi_cells(g, sites, weights)
    hole_darts = set(g.faces[hole]) | {d ^ 1 for d in g.faces[hole]}
    # nodes of the uncontracted dual: faces touched by bichromatic edges,
    # plus one leaf per hole edge
    adj = {}

    def node_of(dart):
        f = int(g.face_of[dart])
        if f == hole:
            e = dart >> 1
            u, v = g.edge_endpoints(e)
            return ("leaf", (cells[u], cells[v]), e)
        return ("face", f)

    for e in range(g.m):
        u, v = g.edge_endpoints(e)
        if cells[u] == cells[v]:
            continue
        a = node_of(2 * e)
        b = node_of(2 * e + 1)
        pair = frozenset((cells[u], cells[v]))
        adj.setdefault(a, []).append((b, pair))
        adj.setdefault(b, []).append((a, pair))
    leaves = [n for n in adj if n[0] == "leaf"]
    internals = [n for n in adj if n[0] == "face" and len(adj[n]) == 3]
    # contract degree-2 face nodes
    edges = []
    seen_chain = set()
    for start in leaves + internals:
        for nxt, pair in adj[start]:
            key = (start, nxt, pair)
            if key in seen_chain:
                continue
            prev, cur = start, nxt
            chain = [(start, nxt, pair)]
            while cur[0] == "face" and len(adj[cur]) == 2:
                (n1, p1), (n2, p2) = adj[cur]
                prev, cur = cur, (n1 if n1 != prev else n2)
                chain.append((prev, cur, p1 if n1 != prev else p2))
            for a, b, p in chain:
                seen_chain.add((a, b, p))
                seen_chain.add((b, a, p))
            edges.append((start, cur, pair))
    # each undirected contracted edge was found from both ends
    dedup = []
    used = set()
    for a, b, p in edges:
        k = frozenset((a, b)) | {p}
        if k not in used:
            used.add(k)
            dedup.append((a, b, p))
    return leaves, internals, dedup


# ---------------------------------------------------------------------------
# partition validation
# ---------------------------------------------------------------------------


def validate_relaxed_partition(g, parent_by_site, path, ext_before, ext_after,
                               sites, weights, entries, side):
    """Check a relaxed partition against brute cell membership.

    parent_by_site maps site -> brute parent list; entries is the ordered
    [(site, lo, hi)] interval list over path positions; side is "left" or
    "right".  For every path vertex owned by some site AND entered from
    `side`, that vertex must lie inside the owner's interval.  Returns a list
    of (position, owner) counterexamples, empty when sound.
    """
    dist_by_site = {}
    for s in sites:
        dist, _ = brute_dijkstra(g, s)
        dist_by_site[s] = dist
    bad = []
    claimed = {}
    for s, lo, hi in entries:
        for p in range(lo, hi + 1):
            claimed.setdefault(p, set()).add(s)
    for p, v in enumerate(path):
        best = None
        owner = None
        for s in sites:
            val = weights[s] + (dist_by_site[s][v] << SITE_SHIFT)
            if best is None or val < best:
                best = val
                owner = s
        got, _ = brute_entry_side(g, parent_by_site[owner], path,
                                  ext_before, ext_after, owner, v)
        if got != side:
            continue
        if owner not in claimed.get(p, set()):
            bad.append((p, owner))
    return bad


def check_two_cover(entries, length):
    """Coverage discipline of a relaxed partition's interval list.

    Every position must be claimed at least once and at most twice, and any
    overlap must involve entries adjacent in the list.  Returns offending
    positions (empty when the cover is clean).
    """
    count = [0] * length
    owner_idx = [[] for _ in range(length)]
    for k, (_, lo, hi) in enumerate(entries):
        for p in range(lo, hi + 1):
            if 0 <= p < length:
                count[p] += 1
                owner_idx[p].append(k)
    bad = [p for p, c in enumerate(count) if c == 0 or c > 2]
    for p, ks in enumerate(owner_idx):
        if len(ks) == 2 and abs(ks[0] - ks[1]) != 1:
            bad.append(p)
    return sorted(set(bad))
