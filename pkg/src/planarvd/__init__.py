"""Additively weighted Voronoi diagrams on a face of a planar graph."""

from .planar_core import (
    PlanarGraph,
    build_embedded_graph,
    normalize,
    perturb,
    read_graph_file,
    shortest_path_tree,
    side_of_entry,
    write_graph_file,
)
from .voronoi import (
    DanglingInvariantViolation,
    EmptyCell,
    MergeError,
    VDNode,
    VDStar,
    VoronoiBuilder,
    VoronoiError,
    point_locate,
    render_svg,
)

__all__ = [
    "DanglingInvariantViolation",
    "EmptyCell",
    "MergeError",
    "PlanarGraph",
    "VDNode",
    "VDStar",
    "VoronoiBuilder",
    "VoronoiError",
    "build_embedded_graph",
    "normalize",
    "perturb",
    "point_locate",
    "read_graph_file",
    "render_svg",
    "shortest_path_tree",
    "side_of_entry",
    "write_graph_file",
]

__version__ = "0.1.0"
