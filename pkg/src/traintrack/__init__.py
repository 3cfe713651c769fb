"""Relative train track and CT machinery for outer automorphisms of free groups."""
from .ct import CTReport, check_ct, complete_split
from .free_group import BasisAutomorphism, format_word, inverse, multiply, parse_word, reduce
from .graph_map import GraphMap, check_rtt, power_map, rose_map
from .mapfile import MapFileError, MarkingError, export_dot, parse_map_file, serialize_map
from .marked_graph import Graph, MarkedGraph, rose
from .moves import MoveError, MoveResult
from .nielsen import is_rotationless, min_rotationless_exponent, nielsen_paths, principal_points
from .pipeline import make_ct, make_rtt
from .recognition import compare_bundles, extract_bundle, parse_bundle, serialize_bundle

__all__ = [
    "BasisAutomorphism", "CTReport", "Graph", "GraphMap", "MapFileError", "MarkedGraph", "MarkingError",
    "MoveError", "MoveResult", "check_ct", "check_rtt", "compare_bundles", "complete_split", "export_dot",
    "extract_bundle", "format_word", "inverse", "is_rotationless", "make_ct", "make_rtt",
    "min_rotationless_exponent", "multiply", "nielsen_paths", "parse_bundle", "parse_map_file", "parse_word",
    "power_map", "principal_points", "reduce", "rose", "rose_map", "serialize_bundle", "serialize_map",
]

__version__ = "0.1.0"
