"""Versioned all-sources shortest path structure for the vertices of a hole.

One shortest path tree is materialized per hole vertex (the sweep sources,
in cyclic boundary order).  On top of the per-version snapshots the
structure maintains, for every registered separator path, which side each
tree path enters the path from, with persistent per-position histories and
persistent Fenwick counters so that membership counting and selection can
be answered for any version in polylog time.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .planar_core import PACK_SHIFT, PlanarGraph, packed_sssp, shortest_path_tree

LEFT = "Left"
RIGHT = "Right"
ON_PATH = "OnPathFromStart"

SIDE_LEFT = "LeftOfPath"
SIDE_RIGHT = "RightOfPath"
SIDE_ON = "OnPath"
SIDE_BELOW = "DescendantOfTip"


class MSSPError(Exception):
    pass


class UnknownSite(MSSPError):
    pass


class VertexNotOnPath(MSSPError):
    pass


class BadRange(MSSPError):
    pass


class RankOutOfRange(MSSPError):
    pass


class DepthOutOfRange(MSSPError):
    pass


class NotInTree(MSSPError):
    pass


# status codes used in the sweep arrays
_L, _R, _O = 1, 2, 3
_STATUS_NAME = {_L: LEFT, _R: RIGHT, _O: ON_PATH}


# ---------------------------------------------------------------------------
# persistent counting
# ---------------------------------------------------------------------------


class PersistentFenwick:
    """Fenwick tree whose cells keep (version, value) histories."""

    def __init__(self, size):
        self.size = size
        self.vers = [[-1] for _ in range(size + 1)]
        self.vals = [[0] for _ in range(size + 1)]

    def add(self, pos, delta, version):
        i = pos + 1
        while i <= self.size:
            if self.vers[i][-1] == version:
                self.vals[i][-1] += delta
            else:
                self.vers[i].append(version)
                self.vals[i].append(self.vals[i][-1] + delta)
            i += i & -i

    def _cell(self, i, version):
        return self.vals[i][bisect_right(self.vers[i], version) - 1]

    def prefix(self, pos, version):
        """Sum of positions 0..pos at the given version."""
        s = 0
        i = pos + 1
        while i > 0:
            s += self._cell(i, version)
            i -= i & -i
        return s

    def range_sum(self, i, j, version):
        if j < i:
            return 0
        s = self.prefix(j, version)
        if i > 0:
            s -= self.prefix(i - 1, version)
        return s


# ---------------------------------------------------------------------------
# cross index
# ---------------------------------------------------------------------------


@dataclass
class PathWedges:
    """The rotation of one path vertex split into the two path-side wedges."""

    path_id: int
    pos: int
    vertex: int
    in_dart: int
    out_dart: int
    left: tuple  # incoming darts, in counterclockwise rotation order
    right: tuple


class CrossIndex:
    """Per vertex, the left/right dart wedges of every path through it."""

    def __init__(self):
        self.at = defaultdict(list)

    def add(self, wedges):
        self.at[wedges.vertex].append(wedges)

    def paths_at(self, v):
        return self.at.get(v, [])

    def side_of(self, v, path_id, dart):
        for w in self.at.get(v, []):
            if w.path_id == path_id:
                if dart in w.left:
                    return LEFT
                if dart in w.right:
                    return RIGHT
                return ON_PATH
        raise VertexNotOnPath("vertex %d not on path %d" % (v, path_id))

    def paths_separating(self, v, dart_a, dart_b):
        """Path ids through v for which the two incoming darts fall in
        opposite wedges."""
        out = []
        for w in self.at.get(v, []):
            sa = LEFT if dart_a in w.left else (RIGHT if dart_a in w.right else None)
            sb = LEFT if dart_b in w.left else (RIGHT if dart_b in w.right else None)
            if sa is not None and sb is not None and sa != sb:
                out.append(w.path_id)
        return out


def _wedge_scan(g, v, start, stop):
    """Outgoing darts strictly between start and stop, counterclockwise,
    returned as their incoming twins."""
    out = []
    d = int(g.prv[start])
    while d != stop:
        out.append(d ^ 1)
        d = int(g.prv[d])
    return out


# ---------------------------------------------------------------------------
# euler tours
# ---------------------------------------------------------------------------

_EULER_KERNEL = None


def _euler_kernel():
    global _EULER_KERNEL
    if _EULER_KERNEL is not None:
        return _EULER_KERNEL
    import numba

    @numba.njit(cache=True)
    def kernel(n, parent_vertex, root):
        cnt = np.zeros(n + 1, dtype=np.int64)
        for v in range(n):
            p = parent_vertex[v]
            if p >= 0:
                cnt[p + 1] += 1
        for i in range(n):
            cnt[i + 1] += cnt[i]
        childs = np.empty(max(n - 1, 1), dtype=np.int32)
        fill = cnt[:n].copy()
        for v in range(n):
            p = parent_vertex[v]
            if p >= 0:
                childs[fill[p]] = v
                fill[p] += 1
        tin = np.zeros(n, dtype=np.int32)
        tout = np.zeros(n, dtype=np.int32)
        stack_v = np.empty(n + 1, dtype=np.int32)
        stack_i = np.empty(n + 1, dtype=np.int64)
        top = 0
        stack_v[0] = root
        stack_i[0] = cnt[root]
        clock = 1
        tin[root] = 0
        while top >= 0:
            v = stack_v[top]
            i = stack_i[top]
            if i < cnt[v + 1]:
                stack_i[top] = i + 1
                c = childs[i]
                tin[c] = clock
                clock += 1
                top += 1
                stack_v[top] = c
                stack_i[top] = cnt[c]
            else:
                tout[v] = clock
                top -= 1
        return tin, tout

    _EULER_KERNEL = kernel
    return kernel


def _euler_python(n, parent_vertex, root):
    childs = [[] for _ in range(n)]
    for v in range(n):
        p = int(parent_vertex[v])
        if p >= 0:
            childs[p].append(v)
    tin = np.zeros(n, dtype=np.int32)
    tout = np.zeros(n, dtype=np.int32)
    clock = 1
    tin[root] = 0
    stack = [(root, 0)]
    while stack:
        v, i = stack.pop()
        if i < len(childs[v]):
            stack.append((v, i + 1))
            c = childs[v][i]
            tin[c] = clock
            clock += 1
            stack.append((c, 0))
        else:
            tout[v] = clock
    return tin, tout


# ---------------------------------------------------------------------------
# per-path sweep state
# ---------------------------------------------------------------------------


class _PathData:
    def __init__(self, g, p):
        self.p = p
        L = len(p.vertices)
        self.verts = np.array(p.vertices, dtype=np.int64)
        prev_in = np.empty(L, dtype=np.int64)
        next_rev = np.empty(L, dtype=np.int64)
        prev_in[0] = g.dart(p.ext_before, p.vertices[0])
        prev_in[1:] = p.darts
        next_rev[:-1] = [d ^ 1 for d in p.darts]
        next_rev[L - 1] = g.dart(p.ext_after, p.vertices[-1])
        self.prev_in = prev_in
        self.next_rev = next_rev
        darts = []
        codes = []
        self.wedges = []
        for t, v in enumerate(p.vertices):
            left = _wedge_scan(g, v, int(prev_in[t]) ^ 1, int(next_rev[t]) ^ 1)
            right = _wedge_scan(g, v, int(next_rev[t]) ^ 1, int(prev_in[t]) ^ 1)
            self.wedges.append(
                PathWedges(p.id, t, v, int(prev_in[t]), int(next_rev[t]) ^ 1,
                           tuple(left), tuple(right))
            )
            darts.extend(left)
            codes.extend([_L] * len(left))
            darts.extend(right)
            codes.extend([_R] * len(right))
        order = np.argsort(np.array(darts, dtype=np.int64))
        self.tbl_darts = np.array(darts, dtype=np.int64)[order]
        self.tbl_codes = np.array(codes, dtype=np.int8)[order]
        self.cur = None
        self.hist_v = [[] for _ in range(L)]
        self.hist_s = [[] for _ in range(L)]
        self.fl = PersistentFenwick(L)
        self.fr = PersistentFenwick(L)
        self.toggles_l = np.zeros(L, dtype=np.int32)
        self.toggles_r = np.zeros(L, dtype=np.int32)
        self.src_versions = []

    def statuses(self, parent_row):
        """Entry-side codes for every position under one version's tree."""
        L = len(self.verts)
        arr = parent_row[self.verts].astype(np.int64)
        fwd = arr == self.prev_in
        bwd = arr == self.next_rev
        fwd[0] = False
        bwd[L - 1] = False
        direct = np.zeros(L, dtype=np.int8)
        rest = ~(fwd | bwd)
        if len(self.tbl_darts):
            idx = np.searchsorted(self.tbl_darts, arr)
            idx[idx >= len(self.tbl_darts)] = 0
            hit = (self.tbl_darts[idx] == arr) & rest
            direct[hit] = self.tbl_codes[idx[hit]]
        else:
            hit = np.zeros(L, dtype=bool)
        # sources sitting on the path and extension-dart arrivals are both
        # on-path by convention
        direct[rest & ~hit] = _O
        status = direct.copy()
        known = direct > 0
        pick = np.where(known, np.arange(L), 0)
        np.maximum.accumulate(pick, out=pick)
        status[fwd] = direct[pick][fwd]
        pick = np.where(known[::-1], np.arange(L), 0)
        np.maximum.accumulate(pick, out=pick)
        bf = direct[::-1][pick][::-1]
        status[bwd] = bf[bwd]
        return status

    def apply(self, version, status, source_pos):
        if source_pos is not None:
            self.src_versions.append(version)
        if self.cur is None:
            changed = np.arange(len(self.verts))
            old = np.zeros(len(self.verts), dtype=np.int8)
        else:
            changed = np.nonzero(status != self.cur)[0]
            old = self.cur
        for t in changed:
            t = int(t)
            o, s = int(old[t]), int(status[t])
            self.hist_v[t].append(version)
            self.hist_s[t].append(s)
            if (o == _L) != (s == _L):
                self.fl.add(t, 1 if s == _L else -1, version)
                if version > 0:
                    self.toggles_l[t] += 1
            if (o == _R) != (s == _R):
                self.fr.add(t, 1 if s == _R else -1, version)
                if version > 0:
                    self.toggles_r[t] += 1
        self.cur = status

    def status_at(self, version, t):
        i = bisect_right(self.hist_v[t], version) - 1
        return self.hist_s[t][i]


# ---------------------------------------------------------------------------
# the structure
# ---------------------------------------------------------------------------


class EnhancedMSSP:
    """Shortest path trees from every hole vertex with path-side queries."""

    def __init__(self, g: PlanarGraph, hole, tree, engine="auto"):
        if tree.hole != hole:
            raise ValueError("decomposition was built for a different hole")
        if g.mode == "raw":
            raise ValueError("needs perturbed weights")
        self.g = g
        self.hole = hole
        self.tree = tree
        self.sources = list(tree.hole_cycle)
        self.src_index = {s: k for k, s in enumerate(self.sources)}
        self.paths = tree.paths
        if engine == "auto":
            engine = "numba" if g.mode == "packed" else "python"
        self.engine = engine

        V, n = len(self.sources), g.n
        self._parent = np.empty((V, n), dtype=np.int32)
        self._depth = np.empty((V, n), dtype=np.int32)
        self._tin = np.empty((V, n), dtype=np.int32)
        self._tout = np.empty((V, n), dtype=np.int32)
        self._perm = np.empty((V, n), dtype=np.int32)
        self._depth_sorted = np.empty((V, n), dtype=np.int32)
        self._tin_sorted = np.empty((V, n), dtype=np.int32)
        if g.mode == "packed":
            self._db = np.empty((V, n), dtype=np.int64)
            self._dt = np.empty((V, n), dtype=np.int64)
            self._dist = None
        else:
            self._db = self._dt = None
            self._dist = []

        self._pd = [_PathData(g, p) for p in self.paths]
        self.pivots = 0
        self._build()

    # -- construction --------------------------------------------------------

    def _build(self):
        g = self.g
        euler = _euler_python if self.engine == "python" else None
        for k, s in enumerate(self.sources):
            if self.engine == "numba":
                db, dt, parent, depth = packed_sssp(g, s)
                self._db[k] = db
                self._dt[k] = dt
            else:
                t = shortest_path_tree(g, s, engine="python")
                parent, depth = t.parent_dart, t.depth
                if g.mode == "packed":
                    self._db[k] = [d >> PACK_SHIFT for d in t.dist]
                    self._dt[k] = [d & ((1 << PACK_SHIFT) - 1) for d in t.dist]
                else:
                    self._dist.append(t.dist)
            if k > 0:
                self.pivots += int(np.count_nonzero(parent != self._parent[k - 1]))
            self._parent[k] = parent
            self._depth[k] = depth
            pv = g.tail[np.maximum(parent, 0)].astype(np.int32)
            pv[parent < 0] = -1
            if euler is None:
                tin, tout = _euler_kernel()(g.n, pv, s)
            else:
                tin, tout = euler(g.n, pv, s)
            self._tin[k] = tin
            self._tout[k] = tout
            perm = np.lexsort((tin, depth)).astype(np.int32)
            self._perm[k] = perm
            self._depth_sorted[k] = depth[perm]
            self._tin_sorted[k] = tin[perm]
            parent_row = self._parent[k]
            for pd in self._pd:
                status = pd.statuses(parent_row)
                pd.apply(k, status, pd.p.pos.get(s))

    # -- helpers -------------------------------------------------------------

    def _version(self, s):
        try:
            return self.src_index[s]
        except KeyError:
            raise UnknownSite("vertex %r is not on the hole" % (s,)) from None

    def _path(self, p):
        if isinstance(p, int):
            return self._pd[p]
        return self._pd[p.id]

    def _check_vertex(self, v):
        if not 0 <= v < self.g.n:
            raise NotInTree("vertex %r out of range" % (v,))

    # -- queries -------------------------------------------------------------

    def dist(self, s, v):
        """Exact perturbed distance from hole vertex s to v."""
        k = self._version(s)
        self._check_vertex(v)
        if self._dist is not None:
            return self._dist[k][v]
        return (int(self._db[k, v]) << PACK_SHIFT) | int(self._dt[k, v])

    def parent_dart(self, s, v):
        k = self._version(s)
        self._check_vertex(v)
        return int(self._parent[k, v])

    def depth(self, s, v):
        k = self._version(s)
        self._check_vertex(v)
        return int(self._depth[k, v])

    def direction(self, s, v, p):
        """Which side the s-to-v shortest path enters the path from."""
        k = self._version(s)
        pd = self._path(p)
        t = pd.p.pos.get(v)
        if t is None:
            raise VertexNotOnPath("vertex %r not on path %d" % (v, pd.p.id))
        return _STATUS_NAME[pd.status_at(k, t)]

    def count(self, s, p, i, j, side=LEFT):
        """Number of positions on p[i..j] entered from the given side."""
        k = self._version(s)
        pd = self._path(p)
        L = len(pd.verts)
        if not (0 <= i < L and 0 <= j < L):
            raise BadRange("positions %r..%r outside 0..%d" % (i, j, L - 1))
        fen = pd.fl if side == LEFT else pd.fr
        return fen.range_sum(i, j, k)

    def select(self, s, p, i, j, rank, side=LEFT):
        """The rank-th (1-based) vertex of p[i..j] entered from the side."""
        k = self._version(s)
        pd = self._path(p)
        L = len(pd.verts)
        if not (0 <= i < L and 0 <= j < L):
            raise BadRange("positions %r..%r outside 0..%d" % (i, j, L - 1))
        fen = pd.fl if side == LEFT else pd.fr
        total = fen.range_sum(i, j, k)
        if not 1 <= rank <= total:
            raise RankOutOfRange("rank %d of %d members" % (rank, total))
        base = fen.prefix(i - 1, k) if i > 0 else 0
        lo, hi = i, j
        while lo < hi:
            mid = (lo + hi) // 2
            if fen.prefix(mid, k) - base >= rank:
                hi = mid
            else:
                lo = mid + 1
        return int(pd.verts[lo])

    def depth(self, s, v):
        """Hop depth of v in the version-s tree (the source has depth 0)."""
        k = self._version(s)
        self._check_vertex(v)
        return int(self._depth[k, v])

    def ancestor(self, s, v, d):
        """Hop-depth-d ancestor of v in the version-s tree (d=0 gives s)."""
        k = self._version(s)
        self._check_vertex(v)
        dv = int(self._depth[k, v])
        if not 0 <= d <= dv:
            raise DepthOutOfRange("depth %r outside 0..%d" % (d, dv))
        if d == dv:
            return v
        ds = self._depth_sorted[k]
        lo = int(np.searchsorted(ds, d, "left"))
        hi = int(np.searchsorted(ds, d, "right"))
        tv = int(self._tin[k, v])
        j = lo + int(np.searchsorted(self._tin_sorted[k][lo:hi], tv, "right")) - 1
        a = int(self._perm[k][j])
        return a

    def ancestor_at_distance(self, s, v, limit):
        """Deepest ancestor of v whose distance from s is at most limit."""
        k = self._version(s)
        self._check_vertex(v)
        if self.dist(s, v) <= limit:
            return v
        lo, hi = 0, int(self._depth[k, v]) - 1
        if self.dist(s, self.ancestor(s, v, 0)) > limit:
            raise DepthOutOfRange("limit below the root distance")
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.dist(s, self.ancestor(s, v, mid)) <= limit:
                lo = mid
            else:
                hi = mid - 1
        return self.ancestor(s, v, lo)

    def is_tree_ancestor(self, s, a, v):
        k = self._version(s)
        return self._tin[k, a] <= self._tin[k, v] < self._tout[k, a]

    def tree_side(self, s, v, r):
        """Relation of v to the root-to-r path in the version-s tree."""
        k = self._version(s)
        self._check_vertex(v)
        self._check_vertex(r)
        tin, tout = self._tin[k], self._tout[k]
        if tin[v] <= tin[r] < tout[v]:
            return SIDE_ON
        if tin[r] <= tin[v] < tout[r]:
            return SIDE_BELOW
        dv, dr = int(self._depth[k, v]), int(self._depth[k, r])
        lo, hi = 0, min(dv, dr)
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.ancestor(s, v, mid) == self.ancestor(s, r, mid):
                lo = mid
            else:
                hi = mid - 1
        a = self.ancestor(s, v, lo)
        child_v = self.ancestor(s, v, lo + 1)
        child_r = self.ancestor(s, r, lo + 1)
        out_dart = int(self._parent[k, child_r])  # outgoing at a
        branch = int(self._parent[k, child_v])  # outgoing at a
        if a == s:
            # root divergence: rank both darts in the rotation cut at the
            # hole-face corner; the backward hole dart sorts first
            d = self.g.dart(s, self.sources[k - 1])
            pr = pv = None
            idx = 0
            while pr is None or pv is None:
                if d == out_dart:
                    pr = idx
                if d == branch:
                    pv = idx
                d = int(self.g.prv[d])
                idx += 1
            return SIDE_LEFT if pv < pr else SIDE_RIGHT
        in_dart = int(self._parent[k, a])
        d = int(self.g.prv[in_dart ^ 1])
        while d != out_dart:
            if d == branch:
                return SIDE_LEFT
            d = int(self.g.prv[d])
        return SIDE_RIGHT

    def run_entry(self, s, p, t):
        """Position where the final on-path run of the s-to-p[t] path starts;
        t itself when the path arrives from off the path."""
        k = self._version(s)
        pd = self._path(p)
        verts = pd.p.vertices
        prefix = pd.p.prefix
        arr = int(self._parent[k, verts[t]])
        if arr < 0:
            return t
        if t > 0 and arr == int(pd.prev_in[t]):
            target = self.dist(s, verts[t]) - prefix[t]
            lo, hi = 0, t
            while lo < hi:
                mid = (lo + hi) // 2
                if self.dist(s, verts[mid]) - prefix[mid] == target:
                    hi = mid
                else:
                    lo = mid + 1
            return lo
        if t < len(verts) - 1 and arr == int(pd.next_rev[t]):
            target = self.dist(s, verts[t]) + prefix[t]
            lo, hi = t, len(verts) - 1
            while lo < hi:
                mid = (lo + hi + 1) // 2
                if self.dist(s, verts[mid]) + prefix[mid] == target:
                    lo = mid
                else:
                    hi = mid - 1
            return lo
        return t

    # -- introspection -------------------------------------------------------

    def build_cross_index(self):
        ci = CrossIndex()
        for pd in self._pd:
            for w in pd.wedges:
                ci.add(w)
        return ci

    def store_bytes(self):
        total = 0
        for a in (self._parent, self._depth, self._tin, self._tout,
                  self._perm, self._depth_sorted, self._tin_sorted,
                  self._db, self._dt):
            if a is not None:
                total += a.nbytes
        return total

    def stats(self):
        per_path = []
        for pd in self._pd:
            per_path.append({
                "path": pd.p.id,
                "length": len(pd.verts),
                "max_left_toggles": int(pd.toggles_l.max(initial=0)),
                "max_right_toggles": int(pd.toggles_r.max(initial=0)),
                "total_toggles": int(pd.toggles_l.sum() + pd.toggles_r.sum()),
                "source_on_path_versions": len(pd.src_versions),
            })
        return {
            "versions": len(self.sources),
            "pivots": self.pivots,
            "dart_count": 2 * self.g.m,
            "store_bytes": self.store_bytes(),
            "paths": per_path,
        }

    def dump_stats(self, path=None):
        text = json.dumps(self.stats(), indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def build_enhanced_mssp(g, hole, tree, engine="auto"):
    """Versioned shortest path trees for all hole vertices, with the
    decomposition's separator paths registered for side queries."""
    return EnhancedMSSP(g, hole, tree, engine=engine)
