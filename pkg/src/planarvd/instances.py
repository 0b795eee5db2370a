"""Seeded instance generators: triangulated grids, random Delaunay
triangulations, and Delaunay instances with a carved hole of exact size.

All randomness flows through numpy's default_rng(seed); generators return raw
(unperturbed) graphs together with the face to treat as the hole.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .planar_core import PlanarGraph


@dataclass
class Instance:
    graph: PlanarGraph
    hole: int
    kind: str
    meta: dict


def _draw_weights(rng, m, weight_range):
    lo, hi = weight_range
    return [int(x) for x in rng.integers(lo, hi + 1, size=m)]


def grid_instance(k, seed=0, weight_range=(1, 1000), triangulated=True):
    """k x k grid, row-major ids, one diagonal per square; hole = outer face."""
    if k < 2:
        raise ValueError("grid needs k >= 2")
    rng = np.random.default_rng(seed)
    vid = lambda r, c: r * k + c
    edges = []
    for r in range(k):
        for c in range(k):
            if c + 1 < k:
                edges.append((vid(r, c), vid(r, c + 1)))
            if r + 1 < k:
                edges.append((vid(r, c), vid(r + 1, c)))
            if triangulated and r + 1 < k and c + 1 < k:
                edges.append((vid(r, c), vid(r + 1, c + 1)))
    rotations = []
    for r in range(k):
        for c in range(k):
            ring = []
            # clockwise as drawn with row 0 on top: N, NE, E, SE, S, SW, W, NW
            if r > 0:
                ring.append(vid(r - 1, c))
            if c + 1 < k:
                ring.append(vid(r, c + 1))
            if triangulated and r + 1 < k and c + 1 < k:
                ring.append(vid(r + 1, c + 1))
            if r + 1 < k:
                ring.append(vid(r + 1, c))
            if c > 0:
                ring.append(vid(r, c - 1))
            if triangulated and r > 0 and c > 0:
                ring.append(vid(r - 1, c - 1))
            rotations.append(ring)
    weights = _draw_weights(rng, len(edges), weight_range)
    g = PlanarGraph(k * k, edges, rotations, weights)
    hole = int(g.face_of[g.dart(vid(0, 0), vid(0, 1))])
    return Instance(g, hole, "grid", {"k": k, "seed": seed})


def _delaunay_embedding(n, rng):
    """Random point Delaunay triangulation as (points, edges, rotations, hull)."""
    from scipy.spatial import ConvexHull, Delaunay

    pts = rng.random((n, 2))
    tri = Delaunay(pts)
    nbr = [set() for _ in range(n)]
    for simplex in tri.simplices:
        a, b, c = (int(x) for x in simplex)
        nbr[a].update((b, c))
        nbr[b].update((a, c))
        nbr[c].update((a, b))
    edges = []
    for u in range(n):
        for v in nbr[u]:
            if u < v:
                edges.append((u, v))
    rotations = []
    for u in range(n):
        ring = sorted(nbr[u], key=lambda v: -math.atan2(pts[v, 1] - pts[u, 1],
                                                        pts[v, 0] - pts[u, 0]))
        rotations.append(ring)
    hull = [int(x) for x in ConvexHull(pts).vertices]  # counterclockwise
    return pts, edges, rotations, hull


def delaunay_instance(n, seed=0, weight_range=(1, 1000)):
    """Random triangulation of n uniform points; hole = outer (hull) face."""
    if n < 4:
        raise ValueError("need at least 4 points")
    rng = np.random.default_rng(seed)
    pts, edges, rotations, hull = _delaunay_embedding(n, rng)
    weights = _draw_weights(rng, len(edges), weight_range)
    g = PlanarGraph(n, edges, rotations, weights)
    # hull is counterclockwise, so the dart hull[i+1] -> hull[i] keeps the
    # unbounded region on its left
    hole = int(g.face_of[g.dart(hull[1], hull[0])])
    return Instance(g, hole, "delaunay", {"n": n, "seed": seed})


def carved_instance(n, boundary, seed=0, weight_range=(1, 1000)):
    """Delaunay triangulation with a pocket of faces removed so the resulting
    hole has exactly `boundary` edges; the old outer face stays to be
    triangulated away by normalization."""
    rng = np.random.default_rng(seed)
    pts, edges, rotations, hull = _delaunay_embedding(n, rng)
    weights = _draw_weights(rng, len(edges), weight_range)
    g = PlanarGraph(n, edges, rotations, weights)
    outer = int(g.face_of[g.dart(hull[1], hull[0])])

    # faces adjacent over each edge
    left = g.face_of[0::2]
    right = g.face_of[1::2]
    face_edges = [[] for _ in range(g.n_faces)]
    for e in range(g.m):
        face_edges[int(left[e])].append(e)
        face_edges[int(right[e])].append(e)

    center = np.array([0.5, 0.5])
    best = None
    for f in range(g.n_faces):
        if f == outer:
            continue
        fv = g.face_vertices(f)
        d = float(np.linalg.norm(pts[fv].mean(axis=0) - center))
        if best is None or d < best[0]:
            best = (d, f)
    seed_face = best[1]

    pocket = {seed_face}
    blen = 3
    boundary_edges = set(face_edges[seed_face])
    if boundary < 3:
        raise ValueError("hole needs at least 3 edges")
    guard = 0
    while blen != boundary:
        guard += 1
        if guard > 50 * g.n_faces:
            raise RuntimeError("carving failed to reach boundary %d" % boundary)
        grew = False
        for e in sorted(boundary_edges):
            f1, f2 = int(left[e]), int(right[e])
            cand = f2 if f1 in pocket else f1
            if cand in pocket or cand == outer:
                continue
            shared = sum(1 for ee in face_edges[cand] if ee in boundary_edges)
            delta = 3 - 2 * shared
            if blen + delta > boundary:
                continue
            # no pinching: adding with one shared edge must not touch the
            # boundary at the opposite vertex
            if shared == 1:
                bverts = set()
                for ee in boundary_edges:
                    u, v = g.edge_endpoints(ee)
                    bverts.add(u)
                    bverts.add(v)
                far = set(g.face_vertices(cand))
                u, v = g.edge_endpoints(e)
                far -= {u, v}
                if far & bverts:
                    continue
            pocket.add(cand)
            for ee in face_edges[cand]:
                if ee in boundary_edges:
                    boundary_edges.discard(ee)
                else:
                    boundary_edges.add(ee)
            blen += delta
            grew = True
            break
        if not grew and blen < boundary:
            raise RuntimeError("carving stuck at boundary %d < %d" % (blen, boundary))

    # delete interior vertices and interior edges of the pocket
    interior_edges = set()
    for f in pocket:
        for e in face_edges[f]:
            if e not in boundary_edges:
                f1, f2 = int(left[e]), int(right[e])
                if f1 in pocket and f2 in pocket:
                    interior_edges.add(e)
    bverts = set()
    for e in boundary_edges:
        u, v = g.edge_endpoints(e)
        bverts.add(u)
        bverts.add(v)
    interior_verts = set()
    for e in interior_edges:
        u, v = g.edge_endpoints(e)
        for x in (u, v):
            if x not in bverts:
                interior_verts.add(x)
    keep = [v for v in range(g.n) if v not in interior_verts]
    remap = {v: i for i, v in enumerate(keep)}
    new_edges = []
    new_w = []
    kept_edge = {}
    for e in range(g.m):
        u, v = g.edge_endpoints(e)
        if e in interior_edges or u in interior_verts or v in interior_verts:
            continue
        kept_edge[e] = len(new_edges)
        new_edges.append((remap[u], remap[v]))
        new_w.append(weights[e])
    new_rot = []
    for v in keep:
        ring = [remap[int(g.head[d])] for d in g.darts_at(v)
                if (d >> 1) in kept_edge and int(g.head[d]) not in interior_verts]
        new_rot.append(ring)
    g2 = PlanarGraph(len(keep), new_edges, new_rot, new_w)
    some = next(iter(boundary_edges))
    u, v = g.edge_endpoints(some)
    d2 = g2.dart(remap[u], remap[v])
    f1 = int(g2.face_of[d2])
    f2 = int(g2.face_of[d2 ^ 1])
    hole = f1 if len(g2.faces[f1]) == boundary else f2
    if len(g2.faces[hole]) != boundary:
        raise RuntimeError("carved hole has %d edges, wanted %d" % (len(g2.faces[hole]), boundary))
    return Instance(g2, hole, "carved", {"n": n, "seed": seed, "boundary": boundary})
