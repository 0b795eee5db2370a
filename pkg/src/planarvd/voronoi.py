"""Additively weighted Voronoi diagrams on the hole face of a planar graph.

A diagram is stored as its dual tree VD*: leaves sit on hole edges whose two
endpoints are owned by different sites, internal nodes are faces whose three
corners are owned by three distinct sites, and every tree edge carries the
unordered pair of sites whose bisector it follows.  Diagrams are built by
divide and conquer over the cyclic site order.  In the exact mode each half
is solved inside a derived world that seals the complementary hole arc behind
edges too heavy to ever enter a shortest path; in the fast mode both halves
share the top-level world.  Halves are combined by deleting structure that
loses against the other half and stitching the new boundary walk between the
green and the red sites.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field

import numpy as np

from .decomposition import build_decomposition
from .enhanced_mssp import SIDE_BELOW, SIDE_LEFT, SIDE_ON, SIDE_RIGHT, build_enhanced_mssp
from .planar_core import (
    MalformedRotation,
    NonPlanarEmbedding,
    PACK_SHIFT,
    PACK_TIE_BITS,
    PlanarGraph,
    SITE_SHIFT,
    TieBreakError,
)

_SCAN_LIMIT = 64  # path length below which parity walks probe every vertex
_CLOSE_ATTEMPTS = 6  # packed tie reseeds while sealing an arc


class VoronoiError(Exception):
    """Inconsistent diagram state detected during a build."""


class EmptyCell(VoronoiError):
    """A site does not own any vertex, not even its own hole position."""


class DanglingInvariantViolation(VoronoiError):
    """A surviving merge component carries more than one dangling edge."""


class MergeError(VoronoiError):
    """The stitch walk could not consume its open connectors unambiguously."""


# -- lifted weights ----------------------------------------------------------
#
# All comparisons run on "lifted" integers: the per-site weight is shifted
# above SITE_SHIFT tag bits holding the site's position on the top-level hole,
# so equal weighted distances are impossible even across sites.  Values are
# only comparable within one world's weight lattice.


def _addw(world, wmap, s, v):
    """Lifted weighted distance from site s to vertex v inside a world."""
    return wmap[s] + (world.msp.dist(s, v) << SITE_SHIFT)


def _owner_among(world, wmap, sites, v):
    """(site, lifted value) pair minimising the weighted distance to v."""
    best = None
    arg = None
    for s in sites:
        val = _addw(world, wmap, s, v)
        if best is None or val < best:
            best, arg = val, s
    return arg, best


# -- worlds ------------------------------------------------------------------


class World:
    """A graph with a distinguished hole face plus its search structures."""

    def __init__(self, key, graph, hole, tree, msp, parent=None, arc=None, hole_dummy=None):
        self.key = key
        self.graph = graph
        self.hole = hole
        self.tree = tree
        self.msp = msp
        self.parent = parent
        self.arc = arc
        self.hole_dummy = hole_dummy
        self.cycle = list(tree.hole_cycle)
        self.pos = {v: i for i, v in enumerate(self.cycle)}


def _ring_insert(ring, anchor, items, after):
    i = ring.index(anchor)
    if after:
        ring[i + 1 : i + 1] = items
    else:
        ring[i:i] = items


# -- parity walks and the trichromatic face ----------------------------------


def _probe_factory(world, wmap, sites):
    """Cached owner-at-vertex lookup restricted to the given sites."""
    cache = {}

    def probe(v):
        o = cache.get(v)
        if o is None:
            o = _owner_among(world, wmap, sites, v)[0]
            cache[v] = o
        return o

    return probe


def _flip(flips, a, b):
    key = (a, b) if a < b else (b, a)
    flips[key] = flips.get(key, 0) ^ 1


def _walk_path(world, path, probe, flips, jump):
    """Record owner-change parities along one separator path.

    When jump is set the walk skips over runs where the owner's shortest path
    slides along the separator, which keeps the number of probes close to the
    number of ownership changes; a site that owns a vertex at the end of such
    a run owns the entire run.
    """
    verts = path.vertices
    t = len(verts) - 1
    o = probe(verts[t])
    while t > 0:
        j = t
        if jump:
            j = world.msp.run_entry(o, path, t)
            if j > t:
                j = t  # run extends toward the tip; no backward jump
        nt = j - 1
        if nt < 0:
            break
        o2 = probe(verts[nt])
        if o2 != o:
            _flip(flips, o, o2)
        t, o = nt, o2


def _cycle_parities(world, cyc, probe, jump):
    flips = {}
    _walk_path(world, cyc.P, probe, flips, jump)
    _walk_path(world, cyc.Pp, probe, flips, jump)
    ou, ov = probe(cyc.u), probe(cyc.v)
    if ou != ov:
        _flip(flips, ou, ov)
    return flips


def trichromatic_face(world, triple, wmap, method="auto", trace=None):
    """Face of the three-site diagram whose corners the triple owns, or None.

    Descends the region tree of the world: on every separator cycle the three
    pairwise bisector curves cross with equal parity exactly when the wanted
    face lies inside the cycle, because the hole face always lies outside.
    Raises EmptyCell when a member of the triple does not own its own hole
    position, and VoronoiError on inconsistent parities or an ambiguous leaf.
    """
    triple = [int(s) for s in triple]
    if len(set(triple)) != 3:
        raise ValueError("need three distinct sites")
    probe = _probe_factory(world, wmap, triple)
    for s in triple:
        if probe(s) != s:
            raise EmptyCell("site %d does not own its hole position" % s)
    pairs = []
    for i in range(3):
        for j in range(i + 1, 3):
            a, b = triple[i], triple[j]
            pairs.append((a, b) if a < b else (b, a))
    tree = world.tree
    nd = tree.root
    while not nd.is_leaf:
        cyc = nd.cycle
        if method == "scan":
            jump = False
        elif method == "jump":
            jump = True
        else:
            jump = max(len(cyc.P), len(cyc.Pp)) > _SCAN_LIMIT
        flips = _cycle_parities(world, cyc, probe, jump)
        vals = {flips.get(pk, 0) for pk in pairs}
        if len(vals) != 1:
            raise VoronoiError("crossing parities disagree at separator node %d" % nd.id)
        inside = vals.pop() == 1
        if trace is not None:
            trace.append(
                {
                    "node": nd.id,
                    "jump": jump,
                    "parities": {"%d-%d" % pk: flips.get(pk, 0) for pk in pairs},
                    "inside": inside,
                }
            )
        others = [c for c in nd.children if c != nd.inside_child]
        if len(nd.children) != 2 or len(others) != 1:
            raise VoronoiError("separator node %d is not binary" % nd.id)
        nd = tree.nodes[nd.inside_child if inside else others[0]]
    g = world.graph
    hits = []
    for f in nd.faces:
        owners = {probe(int(g.tail[d])) for d in g.faces[int(f)]}
        if len(owners) == 3:
            hits.append(int(f))
    if not hits:
        return None
    if len(hits) > 1:
        raise VoronoiError("multiple trichromatic candidates in one leaf region")
    return hits[0]


# -- diagram representation --------------------------------------------------


@dataclass
class VDNode:
    """One node of the dual tree; corners pair boundary vertices with owners."""

    key: tuple
    corners: list
    face: int = -1
    edge: int = -1

    @property
    def is_leaf(self):
        return self.key[0] == "l"

    def corner_pairs(self):
        """Site pairs of adjacent corners, one per incident tree edge."""
        owners = [s for (_, s) in self.corners]
        if self.is_leaf:
            return [frozenset(owners)]
        k = len(owners)
        out = []
        for i in range(k):
            a, b = owners[i], owners[(i + 1) % k]
            if a != b:
                out.append(frozenset((a, b)))
        return out


class VDStar:
    """Dual-tree Voronoi diagram of weighted sites on a world's hole face."""

    def __init__(self, world, sites, wmap, omega, mode):
        self.world = world
        self.sites = list(sites)
        self.wmap = dict(wmap)
        self.omega = {s: omega[s] for s in sites}
        self.mode = mode
        self.nodes = {}
        self.adj = {}
        self.stubs = []
        self._locator = None

    # -- construction --

    def add_node(self, node):
        if node.key in self.nodes:
            raise MergeError("node %r created twice" % (node.key,))
        self.nodes[node.key] = node
        self.adj[node.key] = {}

    def add_edge(self, k1, k2, pair):
        if k1 == k2:
            raise MergeError("self-loop on node %r" % (k1,))
        if k2 in self.adj[k1]:
            raise MergeError("duplicate edge %r - %r" % (k1, k2))
        self.adj[k1][k2] = pair
        self.adj[k2][k1] = pair

    # -- queries --

    def leaves(self):
        return [nd for nd in self.nodes.values() if nd.is_leaf]

    def internal_nodes(self):
        return [nd for nd in self.nodes.values() if not nd.is_leaf]

    def degree(self, key):
        return len(self.adj[key])

    def edge_list(self):
        out = []
        for k1, nbrs in self.adj.items():
            for k2, pair in nbrs.items():
                if k1 < k2:
                    out.append((k1, k2, pair))
        out.sort(key=lambda t: (t[0], t[1]))
        return out

    def components(self):
        seen = set()
        comps = []
        for start in self.nodes:
            if start in seen:
                continue
            comp = {start}
            stack = [start]
            seen.add(start)
            while stack:
                k = stack.pop()
                for k2 in self.adj[k]:
                    if k2 not in seen:
                        seen.add(k2)
                        comp.add(k2)
                        stack.append(k2)
            comps.append(comp)
        return comps

    def cell_boundary(self, site):
        """Paths of node keys tracing the boundary of one site's cell."""
        keys = set()
        sub = {}
        for k1, k2, pair in self.edge_list():
            if site in pair:
                sub.setdefault(k1, []).append(k2)
                sub.setdefault(k2, []).append(k1)
                keys.update((k1, k2))
        for nd in self.nodes.values():
            if any(s == site for (_, s) in nd.corners):
                keys.add(nd.key)
        paths = []
        seen = set()
        ends = sorted(k for k in keys if len(sub.get(k, ())) <= 1)
        for start in ends:
            if start in seen:
                continue
            walk = [start]
            seen.add(start)
            cur, prev = start, None
            while True:
                nxt = [k for k in sub.get(cur, ()) if k != prev and k not in seen]
                if not nxt:
                    break
                prev, cur = cur, nxt[0]
                seen.add(cur)
                walk.append(cur)
            paths.append(walk)
        return paths

    # -- point location --

    def locate(self, v):
        return point_locate(self, v)

    # -- serialisation --

    def to_json_dict(self):
        nodes = []
        for key in sorted(self.nodes):
            nd = self.nodes[key]
            nodes.append(
                {
                    "key": list(key),
                    "face": None if nd.face < 0 else int(nd.face),
                    "edge": None if nd.edge < 0 else int(nd.edge),
                    "owners": [int(s) for (_, s) in nd.corners],
                    "corners": [[int(y), int(s)] for (y, s) in nd.corners],
                }
            )
        edges = [
            {"a": list(k1), "b": list(k2), "pair": sorted(int(s) for s in pair)}
            for (k1, k2, pair) in self.edge_list()
        ]
        return {
            "mode": self.mode,
            "sites": [int(s) for s in self.sites],
            "weights": {str(int(s)): int(self.omega[s]) for s in self.sites},
            "nodes": nodes,
            "edges": edges,
            "stubs": [[list(k), sorted(int(s) for s in pair)] for (k, pair) in self.stubs],
        }

    def dump_json(self, path=None):
        text = json.dumps(self.to_json_dict(), indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


# -- point location ----------------------------------------------------------


class _Locator:
    """Centroid decomposition of each diagram component for point location."""

    def __init__(self, vd):
        self.vd = vd
        self.trees = [self._build(comp) for comp in vd.components()]

    def _build(self, comp):
        if len(comp) <= 2:
            return ("flat", tuple(sorted(comp)))
        adj = self.vd.adj
        comp = set(comp)
        size = {}
        order = []
        root = next(iter(comp))
        stack = [(root, None, 0)]
        while stack:
            k, par, phase = stack.pop()
            if phase == 0:
                stack.append((k, par, 1))
                for k2 in adj[k]:
                    if k2 in comp and k2 != par:
                        stack.append((k2, k, 0))
            else:
                size[k] = 1 + sum(
                    size[k2] for k2 in adj[k] if k2 in comp and k2 != par and k2 in size
                )
                order.append((k, par))
        total = len(comp)
        parent = {k: par for (k, par) in order}
        best = None
        for k in comp:
            worst = total - size[k]
            for k2 in adj[k]:
                if k2 in comp and parent.get(k2) == k:
                    worst = max(worst, size[k2])
            if best is None or worst < best[0]:
                best = (worst, k)
        centroid = best[1]
        if self.vd.nodes[centroid].is_leaf:
            raise VoronoiError("centroid of a large piece is a leaf node")
        branches = {}
        for k2, pair in adj[centroid].items():
            if k2 not in comp:
                continue
            piece = {k2}
            stack = [k2]
            while stack:
                k = stack.pop()
                for k3 in adj[k]:
                    if k3 in comp and k3 != centroid and k3 not in piece:
                        piece.add(k3)
                        stack.append(k3)
            branches[pair] = self._build(piece)
        return ("node", centroid, branches)

    def _score(self, s, v, best):
        val = _addw(self.vd.world, self.vd.wmap, s, v)
        if best[0] is None or val < best[0]:
            best[0], best[1] = val, s
        return val

    @staticmethod
    def _corner_runs(corners):
        """Corners grouped into maximal cyclic runs of one owner."""
        ring = []
        for idx, (_, s) in enumerate(corners):
            if ring and ring[-1][0] == s:
                ring[-1][1].append(idx)
            else:
                ring.append([s, [idx]])
        if len(ring) > 1 and ring[0][0] == ring[-1][0]:
            ring[0][1] = ring[-1][1] + ring[0][1]
            ring.pop()
        return ring

    def _descend_divider(self, nd, idx, v, y, s):
        """True to branch toward the next run when v hangs below corner y.

        Ranks the tree dart continuing toward v against the dart back to the
        site inside y's rotation, cut at the face corner; the order tells on
        which side of the shortest path the subtree holding v leaves y.
        """
        world = self.vd.world
        g = world.graph
        msp = world.msp
        child = msp.ancestor(s, v, msp.depth(s, y) + 1)
        dd = g.dart(y, child)
        pd = msp.parent_dart(s, y)
        if pd >= 0:
            divider = pd ^ 1
        else:
            prev_v = world.cycle[world.pos[y] - 1]
            divider = g.dart(y, prev_v)
        start = int(g.faces[nd.face][idx])
        rank_dd = rank_div = None
        d = start
        for r in range(int(g.degree[y])):
            if d == dd:
                rank_dd = r
            if d == divider:
                rank_div = r
            if rank_dd is not None and rank_div is not None:
                break
            d = int(g.nxt[d])
        if rank_dd is None or rank_div is None:
            raise VoronoiError("rotation scan lost a dart at vertex %d" % y)
        return rank_dd <= rank_div

    def _step(self, nd, v, best):
        """Pair of sites whose branch holds v's cell, or None to stop here."""
        msp = self.vd.world.msp
        corners = nd.corners
        ring = self._corner_runs(corners)
        vals = [self._score(o, v, best) for (o, _) in ring]
        j = min(range(len(ring)), key=vals.__getitem__)
        s, positions = ring[j]
        below = None
        sides = set()
        for idx in positions:
            y = corners[idx][0]
            if v == y:
                return None
            side = msp.tree_side(s, v, y)
            if side == SIDE_ON:
                return None
            if side == SIDE_BELOW:
                cand = (msp.depth(s, y), idx)
                if below is None or cand > below:
                    below = cand
            else:
                sides.add(side)
        if below is not None:
            idx = below[1]
            use_next = self._descend_divider(nd, idx, v, corners[idx][0], s)
        elif len(sides) != 1:
            # v sits between two shortest paths of s, so s owns it
            return None
        else:
            use_next = sides.pop() == SIDE_LEFT
        other = ring[(j + 1) % len(ring)][0] if use_next else ring[(j - 1) % len(ring)][0]
        return frozenset((s, other))

    def locate(self, v):
        vd = self.vd
        best = [None, None]
        for tree in self.trees:
            cur = tree
            while cur[0] == "node":
                pair = self._step(vd.nodes[cur[1]], v, best)
                if pair is None:
                    break
                nxt = cur[2].get(pair)
                if nxt is None:
                    break
                cur = nxt
            if cur[0] == "flat":
                for key in cur[1]:
                    for (_, s) in vd.nodes[key].corners:
                        self._score(s, v, best)
        return best[1], best[0]


def point_locate(vd, v):
    """Owning site of vertex v and the unperturbed weighted distance to it."""
    v = int(v)
    if not 0 <= v < vd.world.graph.n:
        raise ValueError("vertex %d outside the world" % v)
    if not vd.sites:
        raise ValueError("diagram has no sites")
    if len(vd.sites) <= 2 or not vd.nodes:
        site, val = _owner_among(vd.world, vd.wmap, vd.sites, v)
    else:
        if vd._locator is None:
            vd._locator = _Locator(vd)
        site, val = vd._locator.locate(v)
    return site, vd.world.graph.base_of(val >> SITE_SHIFT)


# -- builder -----------------------------------------------------------------


class VoronoiBuilder:
    """Shared search structures and diagram operations for one hole face."""

    def __init__(self, graph, hole, leaf_limit=8, engine="auto", tree=None, msp=None):
        if graph.mode == "raw":
            raise ValueError("perturb the weights before building diagrams")
        for f, walk in enumerate(graph.faces):
            if f != hole and len(walk) != 3:
                raise ValueError("face %d is not a triangle; triangulate first" % f)
        if tree is None:
            tree = build_decomposition(graph, hole, leaf_limit)
        if msp is None:
            msp = build_enhanced_mssp(graph, hole, tree, engine)
        self.leaf_limit = leaf_limit
        self.engine = engine
        self.root = World((), graph, hole, tree, msp)
        if len(self.root.cycle) >= (1 << SITE_SHIFT):
            raise ValueError("hole has too many vertices for the site tag field")
        self._rpos = dict(self.root.pos)
        self._worlds = {(): self.root}
        self.stats = {
            "merges": 0,
            "strict_merges": 0,
            "deleted_nodes": 0,
            "stitched_nodes": 0,
            "created_leaves": 0,
            "exhaustive_retries": 0,
            "worlds_built": 0,
            "dangling_checks": 0,
        }

    # -- lifted weights --

    def _lift(self, world, omega):
        shift = world.graph.tie_shift
        out = {}
        for s, w in omega.items():
            pos = self._rpos.get(s)
            if pos is None:
                raise ValueError("site %d is not on the hole" % s)
            out[s] = ((int(w) << shift) << SITE_SHIFT) | pos
        return out

    # -- public operations --

    def filter_dominated_sites(self, omega):
        """Subset of omega whose sites win their own hole position."""
        root = self.root
        g = root.graph
        wmap = self._lift(root, omega)
        own = {}
        heap = [(wmap[s], s, s) for s in omega]
        heapq.heapify(heap)
        while heap:
            val, v, s = heapq.heappop(heap)
            if v in own:
                continue
            own[v] = s
            for d in g.darts_at(v):
                w = int(g.head[d])
                if w not in own:
                    heapq.heappush(heap, (val + (g.weights[d >> 1] << SITE_SHIFT), w, s))
        return {s: omega[s] for s in omega if own.get(s) == s}

    def trichromatic_face(self, triple, omega, method="auto", trace=None):
        """Trichromatic face of the three-site diagram on the root world."""
        triple = list(triple)
        wmap = self._lift(self.root, {s: omega[s] for s in triple})
        return trichromatic_face(self.root, triple, wmap, method=method, trace=trace)

    def build_vd_star(self, omega, mode="exact", method="auto"):
        """Voronoi diagram of the given weighted hole sites.

        The weights must already be filtered so that every site wins its own
        hole position; filter_dominated_sites produces such a subset.  The
        exact mode seals every recursive arc inside a derived world, the fast
        mode reuses the top-level world throughout.
        """
        if mode not in ("exact", "fast"):
            raise ValueError("mode must be 'exact' or 'fast'")
        if not omega:
            raise ValueError("no sites given")
        sites = self._top_order(list(omega))
        vd = self._build_range(self.root, None, sites, dict(omega), mode, method, top=True)
        self._finish_top(vd)
        return vd

    def merge(self, vd_g, vd_r, mode=None, method="auto"):
        """Merge two complete top-level diagrams with disjoint site sets."""
        for vd in (vd_g, vd_r):
            if vd.world.key != ():
                raise ValueError("merge expects diagrams over the top-level world")
        overlap = set(vd_g.sites) & set(vd_r.sites)
        if overlap:
            raise ValueError("site sets overlap: %r" % sorted(overlap))
        greens = list(vd_g.sites)
        reds = list(vd_r.sites)
        omega = {**vd_g.omega, **vd_r.omega}
        order = self._top_order(greens + reds)
        k = len(order)
        run = 0
        while run < k and order[run] in set(greens):
            run += 1
        if set(order[:run]) != set(greens):
            # the green block may start mid-list; try every rotation
            ok = False
            for off in range(k):
                rot = order[off:] + order[:off]
                if all(s in set(greens) for s in rot[: len(greens)]) and all(
                    s in set(reds) for s in rot[len(greens) :]
                ):
                    order = rot
                    ok = True
                    break
            if not ok:
                raise ValueError("green sites are not cyclically contiguous")
        greens = order[: len(greens)]
        reds = order[len(greens) :]
        mode = mode or vd_g.mode
        wmap = self._lift(self.root, omega)
        out = self._merge_core(
            self.root, None, wmap, omega, greens, reds, vd_g, vd_r, mode, method, top=True
        )
        self._finish_top(out)
        return out

    # -- site ordering and splitting --

    def _top_order(self, sites):
        rp = self._rpos
        for s in sites:
            if s not in rp:
                raise ValueError("site %d is not on the hole" % s)
        if len(set(sites)) != len(sites):
            raise ValueError("duplicate sites")
        sites = sorted(sites, key=rp.get)
        k, K = len(sites), len(self.root.cycle)
        if k == K or k == 1:
            return sites
        # rotate so the list starts right after the widest positional gap
        gaps = []
        for i in range(k):
            a = rp[sites[i]]
            b = rp[sites[(i + 1) % k]]
            gaps.append(((b - a) % K, i))
        _, i = max(gaps)
        return sites[i + 1 :] + sites[: i + 1]

    def _arc_offsets(self, sites):
        rp = self._rpos
        K = len(self.root.cycle)
        base = rp[sites[0]]
        return [(rp[s] - base) % K for s in sites]

    def _contiguous(self, sites):
        offs = self._arc_offsets(sites)
        return all(offs[i] == i for i in range(len(offs)))

    def _split(self, arc, sites, top, mode):
        mid = (len(sites) + 1) // 2
        greens, reds = sites[:mid], sites[mid:]
        if mode == "fast":
            return greens, reds, None, None
        if top:
            if len(sites) == len(self.root.cycle):
                garc = (greens[0], greens[-1])
                rarc = (reds[0], reds[-1])
            else:
                garc = (greens[0], reds[0])
                rarc = (reds[0], greens[0])
        else:
            ulo, uhi = arc
            if self._contiguous(sites) and True:
                garc = (ulo, greens[-1])
                rarc = (reds[0], uhi)
            else:
                garc = (ulo, reds[0])
                rarc = (reds[0], uhi)
        return greens, reds, garc, rarc

    def _strict_case(self, arc, sites, top):
        if not self._contiguous(sites):
            return False
        if top:
            return len(sites) == len(self.root.cycle)
        return arc is not None and arc[0] == sites[0] and arc[1] == sites[-1]

    # -- worlds --

    def _world_for(self, parent, arc):
        key = parent.key + (arc,)
        w = self._worlds.get(key)
        if w is None:
            w = self._close_arc(parent, arc)
            self._worlds[key] = w
            self.stats["worlds_built"] += 1
        return w

    def _close_arc(self, parent, arc):
        """Derived world whose hole is the arc sealed behind heavy edges.

        The complementary arc is fanned off behind subdivided chords so that
        no parallel edges arise; every added edge is heavier than the whole
        base graph, so finite shortest paths never use one.  The new hole
        walk is the arc plus a two-edge path through one added vertex.
        """
        ulo, uhi = arc
        pg = parent.graph
        cyc, ppos = parent.cycle, parent.pos
        K = len(cyc)
        lo, hi = ppos[ulo], ppos[uhi]
        if ulo == uhi:
            raise ValueError("degenerate arc")
        arclen = (hi - lo) % K
        comp = [cyc[(hi + i) % K] for i in range(((lo - hi) % K) + 1)]
        q = len(comp) - 1
        ts = list(range(2, q + 1)) if q >= 2 else [1]
        dummy = {t: pg.n + i for i, t in enumerate(ts)}
        n2 = pg.n + len(ts)
        nedge = 2 * len(ts)

        edges = [pg.edge_endpoints(e) for e in range(pg.m)]
        for t in ts:
            edges.append((comp[0], dummy[t]))
            edges.append((dummy[t], comp[t]))

        big = pg.total_base_weight() + 1
        last_err = None
        for attempt in range(_CLOSE_ATTEMPTS):
            if pg.mode == "lex":
                shift = nedge
                weights = [w << shift for w in pg.weights]
                tie_shift = pg.tie_shift + shift
                for i in range(nedge):
                    weights.append((big << tie_shift) | (1 << i))
                wb = wt = None
            else:
                if big >= 1 << 52:
                    raise VoronoiError("sealed-arc weights overflow the packed layout")
                seed = (hash(parent.key) & 0xFFFF) ^ (lo * 131071) ^ (hi * 8191) ^ attempt
                rng = np.random.default_rng(seed & 0x7FFFFFFF)
                ties = rng.integers(1, 1 << PACK_TIE_BITS, size=nedge, dtype=np.int64)
                weights = list(pg.weights) + [
                    (big << PACK_SHIFT) | int(ties[i]) for i in range(nedge)
                ]
                wb = np.concatenate([pg.wb, np.full(nedge, big, dtype=np.int64)])
                wt = np.concatenate([pg.wt, ties])
                tie_shift = pg.tie_shift

            g2 = None
            for after in (True, False):
                rot = [[int(pg.head[d]) for d in pg.darts_at(v)] for v in range(pg.n)]
                fan = [dummy[t] for t in ts]
                block = fan if after else fan[::-1]
                _ring_insert(rot[comp[0]], comp[1], block, after)
                for t in ts:
                    target = comp[t]
                    succ = cyc[(lo + 1) % K] if target == ulo else comp[t + 1]
                    _ring_insert(rot[target], succ, [dummy[t]], after)
                for t in ts:
                    rot.append([comp[0], comp[t]])
                try:
                    cand = PlanarGraph(n2, edges, rot, weights)
                except (MalformedRotation, NonPlanarEmbedding):
                    continue
                f2 = int(cand.face_of[cand.dart(ulo, cyc[(lo + 1) % K])])
                if len(cand.faces[f2]) == arclen + 2:
                    g2 = cand
                    break
            if g2 is None:
                raise VoronoiError("could not embed the sealing fan for arc %r" % (arc,))
            g2.mode = pg.mode
            g2.tie_shift = tie_shift
            g2.wb = wb
            g2.wt = wt
            try:
                tree2 = build_decomposition(g2, f2, self.leaf_limit)
                msp2 = build_enhanced_mssp(g2, f2, tree2, self.engine)
            except TieBreakError as err:
                last_err = err
                continue
            return World(
                parent.key + (arc,), g2, f2, tree2, msp2,
                parent=parent, arc=arc, hole_dummy=dummy[ts[-1]],
            )
        raise VoronoiError("sealing arc %r kept colliding ties: %s" % (arc, last_err))

    # -- recursive construction --

    def _build_range(self, world, arc, sites, omega, mode, method, top):
        k = len(sites)
        sub = {s: omega[s] for s in sites}
        if k == 1:
            return VDStar(world, sites, self._lift(world, sub), sub, mode)
        if k == 2:
            return self._two_sites(world, arc, sites, sub, mode)
        greens, reds, garc, rarc = self._split(arc, sites, top, mode)
        if mode == "fast":
            vg = self._build_range(world, None, greens, omega, mode, method, False)
            vr = self._build_range(world, None, reds, omega, mode, method, False)
        else:
            wg = self._world_for(world, garc) if len(greens) >= 3 else world
            vg = self._build_range(wg, garc, greens, omega, mode, method, False)
            wr = self._world_for(world, rarc) if len(reds) >= 3 else world
            vr = self._build_range(wr, rarc, reds, omega, mode, method, False)
        wmap = self._lift(world, sub)
        return self._merge_core(world, arc, wmap, sub, greens, reds, vg, vr, mode, method, top)

    def _two_sites(self, world, arc, sites, omega, mode):
        """Diagram of two sites: a cut with two leaves, or one leaf plus a stub."""
        s1, s2 = sites
        wmap = self._lift(world, omega)
        vd = VDStar(world, sites, wmap, omega, mode)
        probe = _probe_factory(world, wmap, sites)
        cyc, pos = world.cycle, world.pos
        L = len(cyc)
        if arc is None:
            anchors = [pos[s1], pos[s2]]
            spans = [(anchors[0], anchors[1]), (anchors[1], anchors[0])]
        else:
            base = pos[arc[0]]
            offs = sorted({0, (pos[s1] - base) % L, (pos[s2] - base) % L,
                           (pos[arc[1]] - base) % L})
            anchors = [(base + o) % L for o in offs]
            spans = list(zip(anchors, anchors[1:]))
        switches = []
        for pa, pb in spans:
            oa, ob = probe(cyc[pa]), probe(cyc[pb])
            if oa == ob:
                continue
            t = self._bisect_span(probe, cyc, pa, pb, L)
            switches.append(t)
        if arc is None:
            expect = (2,)
        else:
            expect = (1, 2)
        if len(switches) not in expect:
            raise VoronoiError("two-site diagram found %d boundary edges" % len(switches))
        keys = []
        for t in switches:
            u, v = cyc[t], cyc[(t + 1) % L]
            e = world.graph.dart(u, v) >> 1
            node = VDNode(("l", int(e)), [(u, probe(u)), (v, probe(v))], edge=int(e))
            vd.add_node(node)
            keys.append(node.key)
        pair = frozenset((s1, s2))
        if len(keys) == 2:
            vd.add_edge(keys[0], keys[1], pair)
        else:
            vd.stubs.append((keys[0], pair))
        return vd

    @staticmethod
    def _bisect_span(probe, cyc, pa, pb, L):
        """Position of an ownership change inside a cyclic span."""
        o = probe(cyc[pa])
        lo, hi = 0, (pb - pa) % L
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if probe(cyc[(pa + mid) % L]) == o:
                lo = mid
            else:
                hi = mid
        return (pa + lo) % L

    # -- merge --

    def _merge_core(self, world, arc, wmap, omega, greens, reds, vg, vr, mode, method, top):
        self.stats["merges"] += 1
        strict = mode == "exact" and self._strict_case(arc, greens + reds, top)
        last = None
        for exhaustive in (False, True):
            try:
                out = self._merge_attempt(
                    world, wmap, omega, greens, reds, vg, vr, mode, method, exhaustive, strict
                )
                if strict:
                    self.stats["strict_merges"] += 1
                return out
            except MergeError as err:
                last = err
                if not exhaustive:
                    self.stats["exhaustive_retries"] += 1
        raise last

    def _lift_child(self, world, child):
        """Child structure re-read in the enclosing world.

        Nodes on faces or hole edges that only exist in the child's own sealed
        world are dropped; each dropped neighbour leaves a stub on the kept
        side, mirroring the child's pre-declared stubs.
        """
        g = world.graph
        lim_d = 2 * g.m
        cg = child.world.graph
        nodes = {}
        for key, nd in child.nodes.items():
            if key[0] == "l":
                keep = key[1] < g.m
            else:
                keep = all(d < lim_d for d in cg.faces[nd.face])
            if keep:
                face = int(g.face_of[key[1]]) if key[0] == "f" else -1
                nodes[key] = VDNode(key, list(nd.corners), face=face, edge=nd.edge)
        edges = []
        stubs = []
        for k1, k2, pair in child.edge_list():
            in1, in2 = k1 in nodes, k2 in nodes
            if in1 and in2:
                edges.append((k1, k2, pair))
            elif in1:
                stubs.append((k1, pair))
            elif in2:
                stubs.append((k2, pair))
        for key, pair in child.stubs:
            if key in nodes:
                stubs.append((key, pair))
        return nodes, edges, stubs

    def _merge_attempt(
        self, world, wmap, omega, greens, reds, vg, vr, mode, method, exhaustive, strict
    ):
        sites = greens + reds
        gset = frozenset(greens)
        out = VDStar(world, sites, wmap, omega, mode)
        g = world.graph

        halves = []
        rival_cache = {"g": {}, "r": {}}

        def child_site(tag, y):
            cache = rival_cache[tag]
            s = cache.get(y)
            if s is None:
                child = vg if tag == "g" else vr
                s = point_locate(child, y)[0]
                cache[y] = s
            return s

        for tag, child, rival_tag in (("g", vg, "r"), ("r", vr, "g")):
            nodes, edges, stubs = self._lift_child(world, child)
            kept = {}
            for key, nd in nodes.items():
                alive = True
                for y, s in nd.corners:
                    r = child_site(rival_tag, y)
                    if _addw(world, wmap, r, y) < _addw(world, wmap, s, y):
                        alive = False
                        break
                if alive:
                    kept[key] = nd
                else:
                    self.stats["deleted_nodes"] += 1
            halves.append((tag, child, kept, edges, stubs))

        connectors = []
        for tag, child, kept, edges, stubs in halves:
            for nd in kept.values():
                out.add_node(nd)
            for key, pair in stubs:
                if key in kept:
                    connectors.append({"key": key, "pair": pair, "used": False, "half": tag})
        for tag, child, kept, edges, stubs in halves:
            for k1, k2, pair in edges:
                in1, in2 = k1 in kept, k2 in kept
                if in1 and in2:
                    out.add_edge(k1, k2, pair)
                elif in1 or in2:
                    connectors.append(
                        {"key": k1 if in1 else k2, "pair": pair, "used": False, "half": tag}
                    )
            self._check_dangling(kept, out, connectors, tag)
            if strict:
                self._check_association(child, tag, connectors)

        merged_cache = {}
        site_at = {s: s for s in sites}

        def merged(y):
            o = site_at.get(y)
            if o is not None:
                return o
            o = merged_cache.get(y)
            if o is None:
                sg = child_site("g", y)
                sr = child_site("r", y)
                o = sg if _addw(world, wmap, sg, y) <= _addw(world, wmap, sr, y) else sr
                merged_cache[y] = o
            return o

        self._scan_switches(world, out, merged, connectors, sites, exhaustive, gset)
        self._stitch(world, wmap, out, merged, connectors, gset, method)
        self._check_merge(out, connectors)
        return out

    def _check_dangling(self, kept, out, connectors, tag):
        """Each surviving component of one half may hold at most one open end."""
        self.stats["dangling_checks"] += 1
        parent = {k: k for k in kept}

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for k1, nbrs in out.adj.items():
            if k1 not in parent:
                continue
            for k2 in nbrs:
                if k2 in parent:
                    ra, rb = find(k1), find(k2)
                    if ra != rb:
                        parent[ra] = rb
        count = {}
        for c in connectors:
            if c["half"] != tag or c["key"] not in parent:
                continue
            r = find(c["key"])
            count[r] = count.get(r, 0) + 1
            if count[r] > 1:
                raise DanglingInvariantViolation(
                    "component of half %s carries %d dangling edges" % (tag, count[r])
                )

    def _check_association(self, child, tag, connectors):
        """Dangling-edge counts per site of one half in the contiguous case."""
        if len(child.sites) < 2:
            return
        per = {s: 0 for s in child.sites}
        for c in connectors:
            if c["half"] != tag:
                continue
            for s in c["pair"]:
                if s in per:
                    per[s] += 1
        ends = (child.sites[0], child.sites[-1])
        for s in child.sites:
            want = (1,) if s in ends else (0, 2)
            if per[s] not in want:
                raise VoronoiError(
                    "site %d of half %s is associated with %d dangling edges"
                    % (s, tag, per[s])
                )

    def _scan_switches(self, world, out, merged, connectors, sites, exhaustive, gset):
        """Create a leaf for every hole edge whose merged owners differ."""
        g = world.graph
        cyc, pos = world.cycle, world.pos
        L = len(cyc)
        anchors = {pos[s] for s in sites}
        if world.hole_dummy is not None:
            p = pos[world.hole_dummy]
            anchors.update(((p - 1) % L, p, (p + 1) % L))
        anchors = sorted(anchors)
        hits = []
        for i, pa in enumerate(anchors):
            pb = anchors[(i + 1) % len(anchors)]
            span = (pb - pa) % L
            if span == 0 and len(anchors) > 1:
                continue
            if span <= 1 and len(anchors) > 1:
                if merged(cyc[pa]) != merged(cyc[pb]):
                    hits.append(pa)
                continue
            if exhaustive or len(anchors) == 1:
                steps = L if len(anchors) == 1 else span
                for off in range(steps):
                    t = (pa + off) % L
                    if merged(cyc[t]) != merged(cyc[(t + 1) % L]):
                        hits.append(t)
            else:
                if merged(cyc[pa]) != merged(cyc[pb]):
                    hits.append(self._bisect_probe(merged, cyc, pa, pb, L))
        for t in sorted(set(hits)):
            u, v = cyc[t], cyc[(t + 1) % L]
            ou, ov = merged(u), merged(v)
            if ou == ov:
                continue
            e = g.dart(u, v) >> 1
            key = ("l", int(e))
            if key in out.nodes:
                have = frozenset(s for (_, s) in out.nodes[key].corners)
                if have != frozenset((ou, ov)):
                    raise MergeError("kept leaf %r owners changed" % (key,))
                continue
            node = VDNode(key, [(u, ou), (v, ov)], edge=int(e))
            out.add_node(node)
            self.stats["created_leaves"] += 1
            connectors.append(
                {
                    "key": key,
                    "pair": frozenset((ou, ov)),
                    "used": False,
                    "half": "g" if ou in gset and ov in gset else
                            ("r" if ou not in gset and ov not in gset else "x"),
                }
            )

    @staticmethod
    def _bisect_probe(merged, cyc, pa, pb, L):
        o = merged(cyc[pa])
        lo, hi = 0, (pb - pa) % L
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if merged(cyc[(pa + mid) % L]) == o:
                lo = mid
            else:
                hi = mid
        return (pa + lo) % L

    def _stitch(self, world, wmap, out, merged, connectors, gset, method):
        """Walk the green-red boundary, consuming every open connector."""
        g = world.graph

        def classes(pair):
            a, b = tuple(pair)
            return (a in gset) + (b in gset)

        starts = [c for c in connectors if not c["used"] and classes(c["pair"]) == 1]
        for start in starts:
            if start["used"]:
                continue
            start["used"] = True
            cur = start["key"]
            a, b = tuple(start["pair"])
            g_cur, r_cur = (a, b) if a in gset else (b, a)
            guard = 4 * (len(connectors) + len(out.nodes) + 4)
            while True:
                guard -= 1
                if guard < 0:
                    raise MergeError("stitch walk did not terminate")
                hits = []
                for c in connectors:
                    if c["used"] or classes(c["pair"]) == 1:
                        continue
                    pair = c["pair"]
                    if g_cur in pair:
                        third = next(s for s in pair if s != g_cur)
                        advance_green = True
                    elif r_cur in pair:
                        third = next(s for s in pair if s != r_cur)
                        advance_green = False
                    else:
                        continue
                    triple = (g_cur, r_cur, third)
                    try:
                        f = trichromatic_face(world, triple, wmap, method=method)
                    except (EmptyCell, VoronoiError):
                        f = None
                    if f is None:
                        continue
                    walk = g.faces[f]
                    corners = [(int(g.tail[d]), merged(int(g.tail[d]))) for d in walk]
                    if {s for (_, s) in corners} != set(triple):
                        continue
                    hits.append((c, f, corners, third, advance_green))
                if len(hits) > 1:
                    raise MergeError("ambiguous stitch step at pair {%d, %d}" % (g_cur, r_cur))
                if hits:
                    c, f, corners, third, advance_green = hits[0]
                    fkey = ("f", int(min(g.faces[f])))
                    if fkey in out.nodes:
                        raise MergeError("stitch face %r already present" % (fkey,))
                    out.add_node(VDNode(fkey, corners, face=int(f)))
                    self.stats["stitched_nodes"] += 1
                    out.add_edge(cur, fkey, frozenset((g_cur, r_cur)))
                    c["used"] = True
                    out.add_edge(c["key"], fkey, c["pair"])
                    if advance_green:
                        g_cur = third
                    else:
                        r_cur = third
                    cur = fkey
                    continue
                want = frozenset((g_cur, r_cur))
                ends = [
                    c for c in connectors if not c["used"] and c["pair"] == want
                ]
                if len(ends) != 1:
                    raise MergeError(
                        "no unique terminal for pair {%d, %d}: %d candidates"
                        % (g_cur, r_cur, len(ends))
                    )
                ends[0]["used"] = True
                out.add_edge(cur, ends[0]["key"], want)
                break

        rest = [c for c in connectors if not c["used"]]
        groups = {}
        for c in rest:
            if classes(c["pair"]) == 1:
                raise MergeError("leftover connector crosses the classes")
            groups.setdefault(c["pair"], []).append(c)
        for pair, group in groups.items():
            if len(group) != 2:
                raise MergeError(
                    "pair %r leaves %d unmatched connectors" % (sorted(pair), len(group))
                )
            a, b = group
            a["used"] = True
            b["used"] = True
            out.add_edge(a["key"], b["key"], pair)

    def _check_merge(self, out, connectors):
        for c in connectors:
            if not c["used"]:
                raise MergeError("unconsumed connector %r" % (c["key"],))
        for key, nd in out.nodes.items():
            deg = out.degree(key)
            if nd.is_leaf:
                if deg != 1:
                    raise MergeError("leaf %r has degree %d" % (key, deg))
            else:
                if deg != 3:
                    raise MergeError("internal node %r has degree %d" % (key, deg))
                have = frozenset(out.adj[key].values())
                want = frozenset(nd.corner_pairs())
                if have != want:
                    raise MergeError("edge pairs of %r do not match its corners" % (key,))
        n_nodes = len(out.nodes)
        n_edges = sum(len(v) for v in out.adj.values()) // 2
        n_comp = len(out.components())
        if n_edges != n_nodes - n_comp:
            raise MergeError("diagram is not a forest")

    def _finish_top(self, vd):
        if vd.stubs:
            raise VoronoiError("finished diagram still carries stubs")
        k, K = len(vd.sites), len(self.root.cycle)
        if k == K and vd.nodes:
            if len(vd.components()) != 1:
                raise VoronoiError("full-circle diagram is not a tree")
            n_leaves = len(vd.leaves())
            if n_leaves != k:
                raise VoronoiError("expected %d leaves, found %d" % (k, n_leaves))
            if len(vd.internal_nodes()) > max(k - 2, 0):
                raise VoronoiError("too many internal nodes")


# -- rendering ---------------------------------------------------------------


def render_svg(vd, coords, path=None, show_tree=True, size=640):
    """SVG picture of the cells and the dual tree for an embedded graph."""
    g = vd.world.graph
    xs = [coords[v][0] for v in coords]
    ys = [coords[v][1] for v in coords]
    span = max(max(xs) - min(xs), max(ys) - min(ys)) or 1
    pad = 24
    scale = (size - 2 * pad) / span

    def pt(v):
        x, y = coords[v]
        return (pad + (x - min(xs)) * scale, pad + (y - min(ys)) * scale)

    def color(i):
        return "hsl(%d, 65%%, 55%%)" % ((i * 137) % 360)

    site_ix = {s: i for i, s in enumerate(sorted(vd.sites))}
    own = {v: point_locate(vd, v)[0] for v in coords}
    out = [
        '<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d">' % (size, size),
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for e in range(g.m):
        u, v = g.edge_endpoints(e)
        if u not in coords or v not in coords:
            continue
        (x1, y1), (x2, y2) = pt(u), pt(v)
        same = own[u] == own[v]
        out.append(
            '<line x1="%.1f" y1="%.1f" x2="%.1f" y2="%.1f" stroke="%s" stroke-width="%s"/>'
            % (x1, y1, x2, y2, "#dddddd" if same else "#888888", "1" if same else "2")
        )
    for v in coords:
        x, y = pt(v)
        r = 5 if v in site_ix else 3
        out.append(
            '<circle cx="%.1f" cy="%.1f" r="%d" fill="%s"/>' % (x, y, r, color(site_ix[own[v]]))
        )
    if show_tree and vd.nodes:
        centers = {}
        for key, nd in vd.nodes.items():
            pts = [pt(y) for (y, _) in nd.corners if y in coords]
            if pts:
                centers[key] = (
                    sum(p[0] for p in pts) / len(pts),
                    sum(p[1] for p in pts) / len(pts),
                )
        for k1, k2, _ in vd.edge_list():
            if k1 in centers and k2 in centers:
                (x1, y1), (x2, y2) = centers[k1], centers[k2]
                out.append(
                    '<line x1="%.1f" y1="%.1f" x2="%.1f" y2="%.1f" stroke="black" '
                    'stroke-width="1.5" stroke-dasharray="4 3"/>' % (x1, y1, x2, y2)
                )
        for key, (x, y) in centers.items():
            shape = (
                '<circle cx="%.1f" cy="%.1f" r="4" fill="black"/>' % (x, y)
                if not vd.nodes[key].is_leaf
                else '<rect x="%.1f" y="%.1f" width="6" height="6" fill="black"/>'
                % (x - 3, y - 3)
            )
            out.append(shape)
    out.append("</svg>")
    text = "\n".join(out)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
