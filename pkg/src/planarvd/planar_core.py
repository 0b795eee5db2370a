"""Planar embedded graphs: darts, rotations, faces, normalization, perturbation.

The combinatorial map convention used throughout the package:

* every undirected edge ``e`` owns two darts ``2e`` and ``2e + 1`` that are
  twins of each other (``twin(d) == d ^ 1``),
* the rotation system stores, for each vertex, its incident darts in
  clockwise drawing order,
* ``face_next(d) == rotation_next(twin(d))``, which walks the face lying on
  the left of each dart.

With clockwise rotations this traces bounded faces counterclockwise, and the
unbounded (or hole) face clockwise, in the usual planar drawing.
"""

from __future__ import annotations

import bisect
import heapq
from dataclasses import dataclass, field

import numpy as np

# Tie-break layout for the "packed" weight mode.  A perturbed weight is
# (base << PACK_SHIFT) | tie with tie < 2**PACK_TIE_BITS, so path tie sums of
# up to 2**(PACK_SHIFT - PACK_TIE_BITS) hops never carry into the base field.
PACK_TIE_BITS = 40
PACK_SHIFT = 58
PACK_MAX_VERTICES = 1 << (PACK_SHIFT - PACK_TIE_BITS - 1)

# Additively weighted comparisons append a per-site tag below the distance
# lattice: lifted = (weight + dist) << SITE_SHIFT | site_tag, which makes
# argmins over sites unique even when two sites sit on one shortest path.
SITE_SHIFT = 16


class PlanarCoreError(Exception):
    """Base class for embedding construction errors."""


class NonPlanarEmbedding(PlanarCoreError):
    """The rotation system does not describe a planar (genus 0) embedding."""


class MalformedRotation(PlanarCoreError):
    """Rotation lists disagree with the edge list."""


class EndpointNotInternal(PlanarCoreError):
    """side_of_entry needs both a predecessor and a successor path dart."""


class TieBreakError(PlanarCoreError):
    """Two distinct shortest paths compared equal; perturbation failed."""


class GraphFormatError(PlanarCoreError):
    """A graph file could not be parsed."""


# ---------------------------------------------------------------------------
# embedded graph
# ---------------------------------------------------------------------------


class PlanarGraph:
    """Immutable connected planar graph with a fixed combinatorial embedding.

    Vertices are 0..n-1, edges 0..m-1, darts 0..2m-1.  ``weights[e]`` is a
    Python int (arbitrary precision, possibly perturbed); ``mode`` records the
    perturbation layout ("raw", "lex" or "packed").
    """

    def __init__(self, n, edges, rotations, weights=None, validate=True):
        self.n = n
        self.m = len(edges)
        self.tail = np.empty(2 * self.m, dtype=np.int32)
        self.head = np.empty(2 * self.m, dtype=np.int32)
        for e, (u, v) in enumerate(edges):
            if u == v:
                raise MalformedRotation("self-loop on vertex %d" % u)
            self.tail[2 * e] = u
            self.head[2 * e] = v
            self.tail[2 * e + 1] = v
            self.head[2 * e + 1] = u
        self.weights = list(weights) if weights is not None else [1] * self.m
        self.mode = "raw"
        self.tie_shift = 0
        self.perm = None  # lex mode edge permutation
        self.wb = None  # packed mode: int64 base per edge
        self.wt = None  # packed mode: int64 tie per edge

        dart_of = [dict() for _ in range(n)]
        for e, (u, v) in enumerate(edges):
            if v in dart_of[u] or u in dart_of[v]:
                raise MalformedRotation("parallel edge between %d and %d" % (u, v))
            dart_of[u][v] = 2 * e
            dart_of[v][u] = 2 * e + 1
        self._dart_of = dart_of

        self.nxt = np.full(2 * self.m, -1, dtype=np.int32)
        self.prv = np.full(2 * self.m, -1, dtype=np.int32)
        self.first_dart = np.full(n, -1, dtype=np.int32)
        seen = 0
        for v, ring in enumerate(rotations):
            if len(ring) != len(dart_of[v]):
                raise MalformedRotation(
                    "vertex %d: rotation lists %d neighbors, edges give %d"
                    % (v, len(ring), len(dart_of[v]))
                )
            darts = []
            for nb in ring:
                d = dart_of[v].get(nb)
                if d is None:
                    raise MalformedRotation("vertex %d: no edge to %d" % (v, nb))
                darts.append(d)
            if len(set(darts)) != len(darts):
                raise MalformedRotation("vertex %d: repeated neighbor" % v)
            if darts:
                self.first_dart[v] = darts[0]
            for i, d in enumerate(darts):
                self.nxt[d] = darts[(i + 1) % len(darts)]
                self.prv[d] = darts[(i - 1) % len(darts)]
            seen += len(darts)
        if seen != 2 * self.m:
            raise MalformedRotation("rotation system covers %d darts, expected %d" % (seen, 2 * self.m))

        self.degree = np.array([len(dart_of[v]) for v in range(n)], dtype=np.int32)

        self._trace_faces()
        if validate:
            self._validate()

        self._csr = None

    # -- construction helpers ------------------------------------------------

    def _trace_faces(self):
        self.face_of = np.full(2 * self.m, -1, dtype=np.int32)
        faces = []
        for d0 in range(2 * self.m):
            if self.face_of[d0] >= 0:
                continue
            walk = []
            d = d0
            while self.face_of[d] < 0:
                self.face_of[d] = len(faces)
                walk.append(d)
                d = self.nxt[d ^ 1]
            if d != d0:
                raise NonPlanarEmbedding("face walk from dart %d does not close" % d0)
            faces.append(walk)
        self.faces = faces
        self.n_faces = len(faces)

    def _validate(self):
        # connectivity
        if self.n == 0:
            raise MalformedRotation("empty graph")
        seen = np.zeros(self.n, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            v = stack.pop()
            for d in self.darts_at(v):
                w = int(self.head[d])
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        if not seen.all():
            raise MalformedRotation("graph is not connected")
        if self.n - self.m + self.n_faces != 2:
            raise NonPlanarEmbedding(
                "Euler check failed: n-m+f = %d-%d+%d != 2" % (self.n, self.m, self.n_faces)
            )

    # -- basic queries -------------------------------------------------------

    def darts_at(self, v):
        """Darts with tail v in clockwise rotation order."""
        d0 = int(self.first_dart[v])
        if d0 < 0:
            return []
        out = [d0]
        d = int(self.nxt[d0])
        while d != d0:
            out.append(d)
            d = int(self.nxt[d])
        return out

    def dart(self, u, v):
        """The dart u -> v, or -1 if absent."""
        return self._dart_of[u].get(v, -1)

    def edge_endpoints(self, e):
        return int(self.tail[2 * e]), int(self.head[2 * e])

    def dart_weight(self, d):
        return self.weights[d >> 1]

    def face_vertices(self, f):
        return [int(self.tail[d]) for d in self.faces[f]]

    def total_base_weight(self):
        if self.mode == "raw":
            return sum(self.weights)
        return sum(w >> self.tie_shift for w in self.weights)

    def base_of(self, value):
        """Strip the tie-break bits from a perturbed distance value."""
        return value >> self.tie_shift

    # -- derived structures --------------------------------------------------

    def csr(self):
        """(indptr, dart ids sorted by tail) adjacency, built lazily."""
        if self._csr is None:
            order = np.argsort(self.tail, kind="stable").astype(np.int32)
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.add.at(indptr, self.tail + 1, 1)
            np.cumsum(indptr, out=indptr)
            self._csr = (indptr, order)
        return self._csr

    def with_weights(self, weights, mode, tie_shift, perm=None, wb=None, wt=None):
        """Copy of this graph with replaced edge weights (topology shared)."""
        g = object.__new__(PlanarGraph)
        for name in ("n", "m", "tail", "head", "nxt", "prv", "first_dart",
                     "degree", "face_of", "faces", "n_faces", "_dart_of"):
            setattr(g, name, getattr(self, name))
        g.weights = list(weights)
        g.mode = mode
        g.tie_shift = tie_shift
        g.perm = perm
        g.wb = wb
        g.wt = wt
        g._csr = self._csr
        return g


def build_embedded_graph(n, edges, rotations, weights=None):
    """Validated PlanarGraph from an edge list and clockwise rotations."""
    if weights is None:
        weights = [w for (_, _, w) in edges] if edges and len(edges[0]) == 3 else None
    pairs = [(e[0], e[1]) for e in edges]
    return PlanarGraph(n, pairs, rotations, weights)


# ---------------------------------------------------------------------------
# dual graph
# ---------------------------------------------------------------------------


@dataclass
class DualGraph:
    """Faces of a PlanarGraph as vertices; one dual edge per primal edge."""

    n_faces: int
    # dual_edge[e] = (face left of dart 2e, face left of dart 2e+1)
    dual_edge: np.ndarray
    adjacency: list

    @classmethod
    def of(cls, g: PlanarGraph) -> "DualGraph":
        de = np.stack([g.face_of[0::2], g.face_of[1::2]], axis=1)
        adj = [[] for _ in range(g.n_faces)]
        for e in range(g.m):
            f1, f2 = int(de[e, 0]), int(de[e, 1])
            adj[f1].append((f2, e))
            adj[f2].append((f1, e))
        return cls(g.n_faces, de, adj)


# ---------------------------------------------------------------------------
# graph files
# ---------------------------------------------------------------------------


def write_graph_file(path, g: PlanarGraph, hole_face):
    """Text format: header "n m hole_dart", m edge lines, n rotation lines.

    The hole face is recorded as the id of one of its darts (-1 if the
    largest face should be used when loading).
    """
    hole_dart = -1
    if hole_face is not None:
        hole_dart = int(g.faces[hole_face][0])
    lines = ["%d %d %d" % (g.n, g.m, hole_dart)]
    for e in range(g.m):
        u, v = g.edge_endpoints(e)
        lines.append("%d %d %d" % (u, v, g.weights[e]))
    for v in range(g.n):
        lines.append(" ".join(str(int(g.head[d])) for d in g.darts_at(v)))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_graph_file(path):
    """Load a graph file; returns (PlanarGraph, hole_face)."""
    with open(path) as fh:
        rows = [ln.split() for ln in fh if ln.strip()]
    if not rows:
        raise GraphFormatError("empty graph file")
    try:
        n, m, hole_dart = (int(x) for x in rows[0])
        edges = [(int(u), int(v)) for (u, v, _) in rows[1:1 + m]]
        weights = [int(w) for (_, _, w) in rows[1:1 + m]]
        rotations = [[int(x) for x in row] for row in rows[1 + m:1 + m + n]]
    except (ValueError, IndexError) as exc:
        raise GraphFormatError("bad graph file: %s" % exc) from exc
    if len(rows) != 1 + m + n:
        raise GraphFormatError("expected %d lines, found %d" % (1 + m + n, len(rows)))
    g = PlanarGraph(n, edges, rotations, weights)
    if hole_dart == -1:
        hole = max(range(g.n_faces), key=lambda f: len(g.faces[f]))
    else:
        if not 0 <= hole_dart < 2 * m:
            raise GraphFormatError("hole dart %d out of range" % hole_dart)
        hole = int(g.face_of[hole_dart])
    return g, hole


# ---------------------------------------------------------------------------
# entry side classification
# ---------------------------------------------------------------------------


def left_darts_at(g: PlanarGraph, v, dart_in, dart_out):
    """Darts entering v from the left of a path passing dart_in -> v -> dart_out.

    dart_in is the path dart whose head is v, dart_out the path dart whose
    tail is v.  Returns the set of darts d (head[d] == v) strictly between
    them counterclockwise from dart_in, which matches the convention that on
    a grid with a north-to-south path the west neighbor enters from the left.
    """
    a = dart_in ^ 1  # at v, pointing back along the path
    b = dart_out
    out = set()
    d = int(g.prv[a])
    while d != b:
        if d == a:
            raise MalformedRotation("path darts %d/%d not incident to %d" % (dart_in, dart_out, v))
        out.add(d ^ 1)
        d = int(g.prv[d])
    return out


def side_of_entry(g: PlanarGraph, e, path_vertices, ext_before=None, ext_after=None):
    """"left" or "right" for a dart e entering a vertex of the path.

    path_vertices is the ordered vertex list; endpoints are only legal when
    the caller supplies extension neighbors (ext_before precedes the first
    vertex, ext_after follows the last).  Raises EndpointNotInternal
    otherwise, and when e itself runs along the (extended) path returns
    "on".
    """
    v = int(g.head[e])
    try:
        i = path_vertices.index(v)
    except ValueError:
        raise EndpointNotInternal("dart head %d not on path" % v) from None
    if i == 0:
        if ext_before is None:
            raise EndpointNotInternal("entry at path start without extension")
        prev_v = ext_before
    else:
        prev_v = path_vertices[i - 1]
    if i == len(path_vertices) - 1:
        if ext_after is None:
            raise EndpointNotInternal("entry at path end without extension")
        next_v = ext_after
    else:
        next_v = path_vertices[i + 1]
    dart_in = g.dart(prev_v, v)
    dart_out = g.dart(v, next_v)
    if dart_in < 0 or dart_out < 0:
        raise MalformedRotation("path neighbors of %d are not adjacent" % v)
    if e == dart_in or (e ^ 1) == dart_out:
        return "on"
    return "left" if e in left_darts_at(g, v, dart_in, dart_out) else "right"


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------


@dataclass
class NormalizedGraph:
    """Result of normalize(): triangulated, degree-bounded, distance-preserving."""

    graph: PlanarGraph
    hole: int
    old_to_new: list
    new_to_old: list
    d_max: int
    degree_target: int

    def lift(self, v):
        """Normalized id of an input vertex."""
        return self.old_to_new[v]


def _serpentine_chords(t):
    """Chords (index pairs, 0..t-1 polygon) triangulating via a zig-zag strip.

    Alternates ends so every polygon vertex receives at most two chords.
    """
    chords = []
    lo, hi = 0, t - 1
    take_lo = True
    while hi - lo > 2:
        if take_lo:
            chords.append((lo + 1, hi))
            lo += 1
        else:
            chords.append((lo, hi - 1))
            hi -= 1
        take_lo = not take_lo
    return chords


def normalize(g: PlanarGraph, hole, degree_target=3):
    """Split high-degree vertices and triangulate all faces except the hole.

    Splitting inserts zero-weight paths of vertex copies, so distances are
    preserved exactly; triangulation chords weigh more than the whole input
    graph and can never lie on a shortest path.  ``hole=None`` triangulates
    every face.  Returns a NormalizedGraph.
    """
    if degree_target < 3:
        raise ValueError("degree target below 3 cannot host a split chain")
    hole_marker = None if hole is None else int(g.faces[hole][0])

    # Stage 1: vertex splitting.  Work in plain lists, then rebuild.
    rot = [[(int(g.head[d]), d >> 1) for d in g.darts_at(v)] for v in range(g.n)]
    n_new = 0
    old_to_new = []
    copy_of_dart = {}  # dart id -> new tail vertex id
    new_rotations = []  # per new vertex: list of ("edge", old edge id, old dart) or ("link", partner)
    for v in range(g.n):
        deg = len(rot[v])
        if deg <= degree_target:
            vid = n_new
            n_new += 1
            old_to_new.append(vid)
            new_rotations.append([("edge", e, g.dart(v, nb)) for (nb, e) in rot[v]])
            for nb, e in rot[v]:
                copy_of_dart[g.dart(v, nb)] = vid
            continue
        end_cap = degree_target - 1
        mid_cap = degree_target - 2
        q = 2
        while end_cap * 2 + mid_cap * (q - 2) < deg:
            q += 1
        base = n_new
        n_new += q
        old_to_new.append(base)
        blocks = []
        idx = 0
        for i in range(q):
            cap = end_cap if i in (0, q - 1) else mid_cap
            take = min(cap, deg - idx)
            blocks.append(rot[v][idx:idx + take])
            idx += take
        if idx != deg:
            raise AssertionError("vertex split did not cover all darts")
        for i in range(q):
            vid = base + i
            ring = []
            if i > 0:
                ring.append(("link", vid - 1))
            for nb, e in blocks[i]:
                ring.append(("edge", e, g.dart(v, nb)))
                copy_of_dart[g.dart(v, nb)] = vid
            if i < q - 1:
                ring.append(("link", vid + 1))
            new_rotations.append(ring)

    # Materialize edges: original edges keep their weight, link edges weight 0.
    edges = []
    weights = []
    edge_id = {}
    for e in range(g.m):
        u = copy_of_dart[2 * e]
        v = copy_of_dart[2 * e + 1]
        edge_id[("edge", e)] = len(edges)
        edges.append((u, v))
        weights.append(g.weights[e])
    for vid, ring in enumerate(new_rotations):
        for item in ring:
            if item[0] == "link" and vid < item[1]:
                edge_id[("link", vid, item[1])] = len(edges)
                edges.append((vid, item[1]))
                weights.append(0)

    rotations = []
    for vid, ring in enumerate(new_rotations):
        out = []
        for item in ring:
            if item[0] == "edge":
                e = item[1]
                u, v = edges[edge_id[("edge", e)]]
                out.append(v if u == vid else u)
            else:
                out.append(item[1])
        rotations.append(out)

    mid = PlanarGraph(n_new, edges, rotations, weights)
    if hole_marker is not None:
        # dart ids of original edges persist as 2e / 2e+1 in `mid` as well
        # because original edges were appended first in the same order.
        hole_mid = int(mid.face_of[hole_marker])
    else:
        hole_mid = None

    # Stage 2: serpentine triangulation of every non-hole face of size >= 4.
    big = mid.total_base_weight() + 1
    rot2 = [[int(mid.head[d]) for d in mid.darts_at(v)] for v in range(n_new)]
    edges2 = [mid.edge_endpoints(e) for e in range(mid.m)]
    weights2 = list(mid.weights)
    existing = {frozenset(p) for p in edges2}
    # chords to insert: at vertex a, position between its face neighbors.
    inserts = {v: [] for v in range(n_new)}  # v -> list of (anchor next vertex, [new nbs in order])
    for f, walk_darts in enumerate(mid.faces):
        if f == hole_mid or len(walk_darts) <= 3:
            continue
        walk0 = [int(mid.tail[d]) for d in walk_darts]
        if len(set(walk0)) != len(walk0):
            raise NonPlanarEmbedding("face %d revisits a vertex; input must be 2-connected" % f)
        t = len(walk0)
        # A serpentine chord can collide with an edge already present (a
        # quadrilateral whose diagonal exists on the other side, say), so
        # retry from rotated starting corners until the chord set is free.
        chosen = None
        for offset in range(t):
            walk = walk0[offset:] + walk0[:offset]
            chords = _serpentine_chords(t)
            if all(frozenset((walk[i], walk[j])) not in existing for i, j in chords):
                chosen = (walk, chords)
                break
        if chosen is None:
            raise NonPlanarEmbedding("cannot triangulate face %d without parallel edges" % f)
        walk, chords = chosen
        per_corner = {}
        for i, j in chords:
            a, b = walk[i], walk[j]
            existing.add(frozenset((a, b)))
            edges2.append((a, b))
            weights2.append(big)
            per_corner.setdefault(i, []).append(j)
            per_corner.setdefault(j, []).append(i)
        for i, targets in per_corner.items():
            a = walk[i]
            nxt_v = walk[(i + 1) % t]
            # Chord darts fill the face corner between the edges to the walk
            # predecessor and successor of a.  Clockwise, the predecessor edge
            # comes immediately before the successor edge, and chords slot in
            # between ordered by decreasing walk distance from the successor.
            targets.sort(key=lambda j: (j - i) % t, reverse=True)
            inserts[a].append((nxt_v, [walk[j] for j in targets]))
    for a, batch in inserts.items():
        for nxt_v, nbs in batch:
            ring = rot2[a]
            pos = ring.index(nxt_v)
            ring[pos:pos] = nbs

    out = PlanarGraph(n_new, edges2, rot2, weights2)
    if hole_marker is not None:
        hole_new = int(out.face_of[hole_marker])
    else:
        hole_new = None
    new_to_old = [-1] * n_new
    for v in range(g.n):
        new_to_old[old_to_new[v]] = v
    d_max = int(out.degree.max())
    return NormalizedGraph(out, hole_new, old_to_new, new_to_old, d_max, degree_target)


# ---------------------------------------------------------------------------
# perturbation
# ---------------------------------------------------------------------------


class PerturbedWeight:
    """Bit layout descriptor for perturbed weights of a graph."""

    def __init__(self, mode, tie_shift, m):
        self.mode = mode
        self.tie_shift = tie_shift
        self.m = m

    def base(self, value):
        return value >> self.tie_shift


def perturb(g: PlanarGraph, seed, mode="auto"):
    """Deterministic tie-breaking weights; returns a new PlanarGraph.

    "lex": edge e gets tie 2**pi(e) for a seeded permutation pi, appended
    below the base weight.  Distinct simple paths then always compare
    distinct (subset sums of distinct powers of two), at the price of
    m-bit integers.

    "packed": edge e gets a seeded tie below PACK_TIE_BITS bits, packed so
    that numpy/numba int64 pairs (base, tie) can carry distances.  Ties are
    overwhelmingly unlikely and shortest-path routines verify uniqueness at
    relaxation time, raising TieBreakError on collision.
    """
    if g.mode != "raw":
        raise ValueError("graph already perturbed")
    if mode == "auto":
        mode = "lex" if g.m <= 6000 else "packed"
    rng = np.random.default_rng(seed)
    if mode == "lex":
        perm = rng.permutation(g.m)
        shift = g.m
        weights = [(g.weights[e] << shift) | (1 << int(perm[e])) for e in range(g.m)]
        return g.with_weights(weights, "lex", shift, perm=perm)
    if mode == "packed":
        if g.n > PACK_MAX_VERTICES:
            raise ValueError("packed mode supports up to %d vertices" % PACK_MAX_VERTICES)
        ties = rng.integers(1, 1 << PACK_TIE_BITS, size=g.m, dtype=np.int64)
        wb = np.array(g.weights, dtype=np.int64)
        weights = [(g.weights[e] << PACK_SHIFT) | int(ties[e]) for e in range(g.m)]
        return g.with_weights(weights, "packed", PACK_SHIFT, wb=wb, wt=ties)
    raise ValueError("unknown perturbation mode %r" % mode)


# ---------------------------------------------------------------------------
# shortest path trees
# ---------------------------------------------------------------------------


@dataclass
class ShortestPathTree:
    """Single-source tree with exact (perturbed) distances."""

    source: int
    dist: list  # python ints, index by vertex
    parent_dart: np.ndarray  # int32, -1 at the source
    depth: np.ndarray  # int32 hop depth

    def path_to(self, g, v):
        """Vertex list source..v."""
        out = [v]
        while int(self.parent_dart[v]) >= 0:
            v = int(g.tail[self.parent_dart[v]])
            out.append(v)
        out.reverse()
        return out


_NUMBA_KERNEL = None


def _packed_kernel():
    """Compile (once) the packed-mode Dijkstra over (base, tie) int64 pairs."""
    global _NUMBA_KERNEL
    if _NUMBA_KERNEL is not None:
        return _NUMBA_KERNEL
    import numba

    @numba.njit(cache=True)
    def kernel(n, indptr, order, heads, wbase, wtie, src):
        INF = np.int64(1) << 62
        db = np.full(n, INF, dtype=np.int64)
        dt = np.full(n, INF, dtype=np.int64)
        parent = np.full(n, -1, dtype=np.int32)
        depth = np.full(n, -1, dtype=np.int32)
        done = np.zeros(n, dtype=np.bool_)
        tie_seen = np.int32(-1)
        # binary heap of (base, tie, vertex)
        cap = 4 * len(order) + 4
        hb = np.empty(cap, dtype=np.int64)
        ht = np.empty(cap, dtype=np.int64)
        hv = np.empty(cap, dtype=np.int32)
        size = 0

        def push(b, t, v, size):
            i = size
            hb[i] = b
            ht[i] = t
            hv[i] = v
            while i > 0:
                p = (i - 1) >> 1
                if hb[p] > hb[i] or (hb[p] == hb[i] and ht[p] > ht[i]):
                    hb[p], hb[i] = hb[i], hb[p]
                    ht[p], ht[i] = ht[i], ht[p]
                    hv[p], hv[i] = hv[i], hv[p]
                    i = p
                else:
                    break
            return size + 1

        def pop(size):
            b = hb[0]
            t = ht[0]
            v = hv[0]
            size -= 1
            hb[0] = hb[size]
            ht[0] = ht[size]
            hv[0] = hv[size]
            i = 0
            while True:
                l = 2 * i + 1
                r = l + 1
                s = i
                if l < size and (hb[l] < hb[s] or (hb[l] == hb[s] and ht[l] < ht[s])):
                    s = l
                if r < size and (hb[r] < hb[s] or (hb[r] == hb[s] and ht[r] < ht[s])):
                    s = r
                if s == i:
                    break
                hb[s], hb[i] = hb[i], hb[s]
                ht[s], ht[i] = ht[i], ht[s]
                hv[s], hv[i] = hv[i], hv[s]
                i = s
            return b, t, v, size

        db[src] = 0
        dt[src] = 0
        depth[src] = 0
        size = push(np.int64(0), np.int64(0), np.int32(src), size)
        while size > 0:
            b, t, v, size = pop(size)
            if done[v]:
                continue
            done[v] = True
            for k in range(indptr[v], indptr[v + 1]):
                d = order[k]
                w = heads[d]
                if done[w]:
                    continue
                e = d >> 1
                nb = b + wbase[e]
                nt = t + wtie[e]
                if nb < db[w] or (nb == db[w] and nt < dt[w]):
                    db[w] = nb
                    dt[w] = nt
                    parent[w] = d
                    depth[w] = depth[v] + 1
                    size = push(nb, nt, np.int32(w), size)
                elif nb == db[w] and nt == dt[w] and parent[w] != d:
                    tie_seen = np.int32(w)
        return db, dt, parent, depth, tie_seen

    _NUMBA_KERNEL = kernel
    return kernel


def packed_sssp(g: PlanarGraph, source):
    """Packed-mode Dijkstra returning raw (base, tie, parent, depth) arrays."""
    if g.mode != "packed":
        raise ValueError("packed_sssp needs packed weights")
    indptr, order = g.csr()
    db, dt, parent, depth, tie = _packed_kernel()(
        g.n, indptr, order, g.head, g.wb, g.wt, source
    )
    if tie >= 0:
        raise TieBreakError("equal perturbed distances at vertex %d" % int(tie))
    return db, dt, parent, depth


def shortest_path_tree(g: PlanarGraph, source, engine="auto"):
    """Exact Dijkstra tree under the graph's (perturbed) weights."""
    if engine == "auto":
        engine = "numba" if g.mode == "packed" else "python"
    if engine == "numba":
        if g.mode != "packed":
            raise ValueError("numba engine needs packed weights")
        indptr, order = g.csr()
        db, dt, parent, depth, tie = _packed_kernel()(
            g.n, indptr, order, g.head, g.wb, g.wt, source
        )
        if tie >= 0:
            raise TieBreakError("equal perturbed distances at vertex %d" % int(tie))
        dist = [((int(db[v]) << PACK_SHIFT) | int(dt[v])) for v in range(g.n)]
        return ShortestPathTree(source, dist, parent, depth)

    INF = None
    dist = [INF] * g.n
    parent = np.full(g.n, -1, dtype=np.int32)
    depth = np.full(g.n, -1, dtype=np.int32)
    done = [False] * g.n
    dist[source] = 0
    depth[source] = 0
    heap = [(0, source)]
    tie_at = -1
    while heap:
        dv, v = heapq.heappop(heap)
        if done[v]:
            continue
        done[v] = True
        for d in g.darts_at(v):
            w = int(g.head[d])
            if done[w]:
                continue
            nd = dv + g.weights[d >> 1]
            if dist[w] is None or nd < dist[w]:
                dist[w] = nd
                parent[w] = d
                depth[w] = depth[v] + 1
                heapq.heappush(heap, (nd, w))
            elif nd == dist[w] and int(parent[w]) != d:
                tie_at = w
    if tie_at >= 0 and g.mode != "raw":
        raise TieBreakError("equal perturbed distances at vertex %d" % tie_at)
    return ShortestPathTree(source, dist, parent, depth)
