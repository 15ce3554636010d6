from .bbt import ConfigurationError, build_bbt, build_unicursal
from .euler import StructuralError, doubled_circuit, eulerian_circuit, hierholzer, walk_nodes
from .omission import OmissionPlan, omit_odd_links
from .spt import build_spt, shortest_path_tree
from .tree import (
    SCHEMES,
    RouteStats,
    RouteTree,
    Segment,
    TerminalPath,
    TraversalNode,
    ValidationReport,
    render_route,
    route_stats,
    validate_route,
)


def build_route(t, scheme: str, segment_len: int = 8) -> RouteTree:
    """Dispatch on a scheme name (``unicursal``, ``bbt-t1``, ``bbt_t2``, ``spt-m1`` ...)."""
    key = scheme.lower().replace("-", "_")
    if key == "unicursal":
        return build_unicursal(t)
    if key in ("bbt_t1", "bbt_t2"):
        return build_bbt(t, key[-2:].upper(), segment_len)
    if key in ("spt_m1", "spt_m2"):
        return build_spt(t, key[-2:].upper())
    raise ConfigurationError(f"unknown scheme {scheme!r}")


__all__ = [
    "SCHEMES",
    "ConfigurationError",
    "OmissionPlan",
    "RouteStats",
    "RouteTree",
    "Segment",
    "StructuralError",
    "TerminalPath",
    "TraversalNode",
    "ValidationReport",
    "build_bbt",
    "build_route",
    "build_spt",
    "build_unicursal",
    "doubled_circuit",
    "eulerian_circuit",
    "hierholzer",
    "omit_odd_links",
    "render_route",
    "route_stats",
    "shortest_path_tree",
    "validate_route",
    "walk_nodes",
]
