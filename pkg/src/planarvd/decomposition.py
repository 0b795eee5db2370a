"""Recursive decomposition of the graph by balanced fundamental-cycle
separators.

One global shortest-path tree is grown from a hole vertex; every separator is
then a cycle made of two tree paths from a common apex plus one non-tree
closing edge.  Balance is judged on faces: the enclosed face set of a
candidate edge is a subtree of the cotree (the dual spanning tree of
non-tree edges, rooted at the hole face), so one Euler tour makes every
candidate scan a pair of binary searches.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .planar_core import PlanarGraph, shortest_path_tree


class SeparatorFailure(Exception):
    """No fundamental cycle splits the region acceptably."""


@dataclass
class SeparatorPath:
    """A shortest path from the separator apex to one closing-edge endpoint,
    extended at both ends so every path vertex has well-defined entry sides."""

    id: int
    node_id: int
    label: str  # "P" or "Pp"
    vertices: list
    darts: list
    prefix: list  # perturbed length from the apex, per position
    ext_before: int  # cycle neighbor preceding vertices[0]
    ext_after: int  # cycle neighbor following vertices[-1]

    def __post_init__(self):
        self.pos = {v: i for i, v in enumerate(self.vertices)}

    def __len__(self):
        return len(self.vertices)

    def subpath_weight(self, i, j):
        """Perturbed length of the path segment between positions i <= j."""
        return self.prefix[j] - self.prefix[i]


@dataclass
class SeparatorCycle:
    """Two apex-rooted shortest paths plus the closing non-tree edge."""

    apex: int
    closing_edge: int
    u: int  # tip of P
    v: int  # tip of Pp
    P: SeparatorPath
    Pp: SeparatorPath
    balance: tuple  # (inside faces, outside faces)


@dataclass
class RegionNode:
    id: int
    parent: int
    depth: int
    faces: np.ndarray
    children: list = field(default_factory=list)
    cycle: SeparatorCycle = None
    inside_child: int = -1

    @property
    def is_leaf(self):
        return self.cycle is None


@dataclass
class DecompositionTree:
    graph: PlanarGraph
    hole: int
    hole_cycle: list
    root_vertex: int
    spt: object
    nodes: list
    paths: list
    leaf_limit: int
    stats: dict

    @property
    def root(self):
        return self.nodes[0]

    def dump_json(self, path=None):
        doc = {
            "leaf_limit": self.leaf_limit,
            "stats": self.stats,
            "nodes": [
                {
                    "id": nd.id,
                    "parent": nd.parent,
                    "depth": nd.depth,
                    "faces": int(len(nd.faces)),
                    "children": nd.children,
                    "inside_child": nd.inside_child,
                    "separator": None
                    if nd.cycle is None
                    else {
                        "apex": nd.cycle.apex,
                        "closing_edge": nd.cycle.closing_edge,
                        "len_P": len(nd.cycle.P),
                        "len_Pp": len(nd.cycle.Pp),
                        "balance": nd.cycle.balance,
                    },
                }
                for nd in self.nodes
            ],
        }
        text = json.dumps(doc, indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def hole_cycle_vertices(g: PlanarGraph, hole):
    """Hole boundary in face-walk order; must be a simple cycle."""
    walk = [int(g.tail[d]) for d in g.faces[hole]]
    if len(set(walk)) != len(walk):
        raise SeparatorFailure("hole boundary revisits a vertex")
    return walk


def extend_path(g: PlanarGraph, apex, vertices, other_path, tip_self, tip_other):
    """Extension vertices for one separator path.

    Walking the separator cycle in this path's direction, the vertex before
    the apex is the second vertex of the other path (or, when the other path
    is trivial, this path's own tip reached over the closing edge), and the
    vertex after the tip is the other path's tip across the closing edge.
    """
    ext_before = other_path[1] if len(other_path) > 1 else tip_self
    ext_after = tip_other
    return ext_before, ext_after


def _tree_path(g, spt, v):
    out = [v]
    while int(spt.parent_dart[v]) >= 0:
        v = int(g.tail[spt.parent_dart[v]])
        out.append(v)
    out.reverse()
    return out


def _lca(g, spt, u, v):
    du, dv = int(spt.depth[u]), int(spt.depth[v])
    while du > dv:
        u = int(g.tail[spt.parent_dart[u]])
        du -= 1
    while dv > du:
        v = int(g.tail[spt.parent_dart[v]])
        dv -= 1
    while u != v:
        u = int(g.tail[spt.parent_dart[u]])
        v = int(g.tail[spt.parent_dart[v]])
    return u


def build_decomposition(g: PlanarGraph, hole, leaf_limit=8):
    """Decomposition tree over all non-hole faces; leaves hold at most
    leaf_limit faces.  Requires perturbed weights (unique shortest paths)."""
    if g.mode == "raw":
        raise ValueError("decompose a perturbed graph, not raw weights")
    cycle = hole_cycle_vertices(g, hole)
    root_vertex = cycle[0]
    spt = shortest_path_tree(g, root_vertex)

    tree_edge = np.zeros(g.m, dtype=bool)
    for v in range(g.n):
        d = int(spt.parent_dart[v])
        if d >= 0:
            tree_edge[d >> 1] = True
    nte = np.nonzero(~tree_edge)[0]

    # cotree: BFS the dual over non-tree edges from the hole face
    dual_adj = [[] for _ in range(g.n_faces)]
    for e in nte:
        f1 = int(g.face_of[2 * e])
        f2 = int(g.face_of[2 * e + 1])
        dual_adj[f1].append((f2, int(e)))
        dual_adj[f2].append((f1, int(e)))
    parent_face = np.full(g.n_faces, -1, dtype=np.int64)
    parent_edge = np.full(g.n_faces, -1, dtype=np.int64)
    seen = np.zeros(g.n_faces, dtype=bool)
    seen[hole] = True
    stack = [hole]
    order = []
    while stack:
        f = stack.pop()
        order.append(f)
        for f2, e in dual_adj[f]:
            if not seen[f2]:
                seen[f2] = True
                parent_face[f2] = f
                parent_edge[f2] = e
                stack.append(f2)
    if not seen.all():
        raise SeparatorFailure("cotree does not span the dual graph")

    # iterative Euler tour
    tin = np.zeros(g.n_faces, dtype=np.int64)
    tout = np.zeros(g.n_faces, dtype=np.int64)
    children_f = [[] for _ in range(g.n_faces)]
    for f in range(g.n_faces):
        if parent_face[f] >= 0:
            children_f[int(parent_face[f])].append(f)
    clock = 0
    stack = [(hole, 0)]
    while stack:
        f, i = stack.pop()
        if i == 0:
            tin[f] = clock
            clock += 1
        if i < len(children_f[f]):
            stack.append((f, i + 1))
            stack.append((children_f[f][i], 0))
        else:
            tout[f] = clock
    # per candidate non-tree edge: the cotree child endpoint's subtree
    cand_edge = []
    cand_tin = []
    cand_tout = []
    for e in nte:
        e = int(e)
        for d in (2 * e, 2 * e + 1):
            f = int(g.face_of[d])
            if parent_edge[f] == e:
                cand_edge.append(e)
                cand_tin.append(int(tin[f]))
                cand_tout.append(int(tout[f]))
                break
    cand_edge = np.array(cand_edge, dtype=np.int64)
    cand_tin = np.array(cand_tin, dtype=np.int64)
    cand_tout = np.array(cand_tout, dtype=np.int64)

    nodes = []
    paths = []
    stats = {"balance_warnings": 0, "max_depth": 0, "total_path_vertices": 0,
             "separators": 0}

    def make_path(node_id, label, vertices, other_vertices, u, v):
        darts = [g.dart(a, b) for a, b in zip(vertices, vertices[1:])]
        prefix = [0]
        for d in darts:
            prefix.append(prefix[-1] + g.weights[d >> 1])
        eb, ea = extend_path(g, vertices[0], vertices, other_vertices, u, v)
        p = SeparatorPath(len(paths), node_id, label, vertices, darts, prefix, eb, ea)
        paths.append(p)
        stats["total_path_vertices"] += len(vertices)
        return p

    all_faces = np.array([f for f in range(g.n_faces) if f != hole], dtype=np.int64)
    work = [(all_faces, -1, 0)]
    while work:
        region, parent, depth = work.pop()
        node = RegionNode(len(nodes), parent, depth, region)
        nodes.append(node)
        if parent >= 0:
            nodes[parent].children.append(node.id)
        stats["max_depth"] = max(stats["max_depth"], depth)
        W = len(region)
        if W <= leaf_limit:
            continue
        tins_r = np.sort(tin[region])
        inside = np.searchsorted(tins_r, cand_tout) - np.searchsorted(tins_r, cand_tin)
        worst = np.maximum(inside, W - inside)
        best = int(np.argmin(worst))
        if inside[best] == 0 or inside[best] == W:
            raise SeparatorFailure("region of %d faces has no separating cycle" % W)
        if worst[best] > (2 * W + 2) // 3:
            if worst[best] > (5 * W) // 6 + 1:
                raise SeparatorFailure(
                    "best balance %d/%d exceeds the tolerated 5/6" % (worst[best], W)
                )
            stats["balance_warnings"] += 1
        e = int(cand_edge[best])
        u, v = g.edge_endpoints(e)
        z = _lca(g, spt, u, v)
        pu = _tree_path(g, spt, u)
        pv = _tree_path(g, spt, v)
        zi = int(spt.depth[z])
        vert_p = pu[zi:]
        vert_pp = pv[zi:]
        P = make_path(node.id, "P", vert_p, vert_pp, u, v)
        Pp = make_path(node.id, "Pp", vert_pp, vert_p, v, u)
        in_mask = (tin[region] >= cand_tin[best]) & (tin[region] < cand_tout[best])
        inside_faces = region[in_mask]
        outside_faces = region[~in_mask]
        node.cycle = SeparatorCycle(z, e, u, v, P, Pp,
                                    (int(len(inside_faces)), int(len(outside_faces))))
        stats["separators"] += 1
        # inside is pushed last so it pops first and becomes children[0]
        work.append((outside_faces, node.id, depth + 1))
        work.append((inside_faces, node.id, depth + 1))

    for nd in nodes:
        if nd.cycle is not None:
            nd.inside_child = nd.children[0]

    return DecompositionTree(g, hole, cycle, root_vertex, spt, nodes, paths,
                             leaf_limit, stats)
