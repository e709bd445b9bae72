"""Hierarchical macro placement for fixed-outline floorplans.

The engine converts an RTL-style module tree into a multilevel physical
hierarchy, computes shape functions for every cluster, and places
clusters and macros top down with sequence-pair simulated annealing.
"""

__version__ = "0.1.0"

from .clustering import multilevel_autocluster
from .io import parse_design, parse_design_text
from .model import DesignDatabase, PhysicalHierarchy, Rect
from .pipeline import (
    NoValidFloorplanError,
    RunConfig,
    generate_benchmark,
    place_design,
    report_metrics,
    run,
)

__all__ = [
    "DesignDatabase",
    "NoValidFloorplanError",
    "PhysicalHierarchy",
    "Rect",
    "RunConfig",
    "__version__",
    "generate_benchmark",
    "multilevel_autocluster",
    "parse_design",
    "parse_design_text",
    "place_design",
    "report_metrics",
    "run",
]
