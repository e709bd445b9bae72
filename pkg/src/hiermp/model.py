"""Core domain model for the hierarchical macro placer.

Holds the design database (masters, instances, logical modules, net arcs,
canvas) and the physical hierarchy (clusters) that the clustering engine
builds on top of it.  Everything downstream (dataflow analysis, shaping,
placement) works against these types.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

# Orientation group: {R0, MX, MY, R180} under composition == XOR on codes.
ORIENT_CODES = {"R0": 0, "MX": 1, "MY": 2, "R180": 3}
ORIENT_NAMES = {v: k for k, v in ORIENT_CODES.items()}


def compose_orient(a: str, b: str) -> str:
    """Compose two axis flips / rotations (closed Klein four-group)."""
    return ORIENT_NAMES[ORIENT_CODES[a] ^ ORIENT_CODES[b]]


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle, lx <= ux and ly <= uy."""

    lx: float
    ly: float
    ux: float
    uy: float

    @property
    def width(self) -> float:
        return self.ux - self.lx

    @property
    def height(self) -> float:
        return self.uy - self.ly

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def cx(self) -> float:
        return 0.5 * (self.lx + self.ux)

    @property
    def cy(self) -> float:
        return 0.5 * (self.ly + self.uy)

    def overlap_area(self, other: "Rect") -> float:
        w = min(self.ux, other.ux) - max(self.lx, other.lx)
        h = min(self.uy, other.uy) - max(self.ly, other.ly)
        if w <= 0.0 or h <= 0.0:
            return 0.0
        return w * h

    def contains_point(self, x: float, y: float) -> bool:
        return self.lx <= x <= self.ux and self.ly <= y <= self.uy

    def contains_rect(self, other: "Rect", tol: float = 1e-9) -> bool:
        return (
            other.lx >= self.lx - tol
            and other.ly >= self.ly - tol
            and other.ux <= self.ux + tol
            and other.uy <= self.uy + tol
        )

    def translated(self, dx: float, dy: float) -> "Rect":
        return Rect(self.lx + dx, self.ly + dy, self.ux + dx, self.uy + dy)


@dataclass(frozen=True)
class Master:
    """Cell library entry.  Macros carry width/height, stdcells only area."""

    name: str
    is_macro: bool
    area: float
    width: float = 0.0
    height: float = 0.0
    is_ff: bool = False


@dataclass
class Instance:
    name: str
    master: Master
    module_path: str

    @property
    def is_macro(self) -> bool:
        return self.master.is_macro

    @property
    def is_ff(self) -> bool:
        return self.master.is_ff

    @property
    def area(self) -> float:
        return self.master.area


@dataclass
class LogicalModule:
    """Node of the logical (RTL-style) hierarchy."""

    path: str
    parent: "LogicalModule | None" = None
    children: list["LogicalModule"] = field(default_factory=list)
    instances: list[Instance] = field(default_factory=list)


@dataclass(frozen=True)
class PinRef:
    """Endpoint of a net arc: an instance pin or a chip-level io pin."""

    inst: str | None  # instance name, None for io endpoints
    pin: str  # pin name on the instance, or io pin name

    @property
    def is_io(self) -> bool:
        return self.inst is None

    def key(self) -> str:
        # flat identity used by graph code; io names can't collide with
        # instance names because of the prefix
        return "io:" + self.pin if self.inst is None else "i:" + self.inst


@dataclass(frozen=True)
class NetArc:
    """Driver->sink arc from star decomposition of a net."""

    net: str
    driver: PinRef
    sink: PinRef
    bitwidth: int = 1


@dataclass(frozen=True)
class IoPin:
    name: str
    x: float
    y: float


@dataclass(frozen=True)
class PreplacedMacro:
    inst: str
    rect: Rect
    orient: str = "R0"


@dataclass
class Canvas:
    """Fixed outline with io pins, hard blockages and preplaced macros."""

    width: float
    height: float
    io_pins: list[IoPin] = field(default_factory=list)
    blockages: list[Rect] = field(default_factory=list)
    preplaced: list[PreplacedMacro] = field(default_factory=list)

    @property
    def outline(self) -> Rect:
        return Rect(0.0, 0.0, self.width, self.height)

    def hard_blockages(self) -> list[Rect]:
        """Blockage rects plus preplaced macro footprints."""
        return list(self.blockages) + [p.rect for p in self.preplaced]


@dataclass
class DesignDatabase:
    """Parsed and cross-linked design: netlist + library + floorplan."""

    masters: dict[str, Master]
    instances: dict[str, Instance]
    modules: dict[str, LogicalModule]
    root_module: LogicalModule
    arcs: list[NetArc]
    canvas: Canvas
    # guidance regions keyed by instance name or module path
    guidance: dict[str, Rect] = field(default_factory=dict)

    def io_pin(self, name: str) -> IoPin:
        for p in self.canvas.io_pins:
            if p.name == name:
                return p
        raise KeyError(name)

    @property
    def preplaced_names(self) -> set[str]:
        return {p.inst for p in self.canvas.preplaced}

    def placeable_instances(self) -> list[Instance]:
        """All instances that the placer may move (preplaced excluded)."""
        fixed = self.preplaced_names
        return [i for i in self.instances.values() if i.name not in fixed]

    def total_std_cells(self) -> int:
        return sum(
            1 for i in self.placeable_instances() if not i.is_macro
        )

    def total_macros(self) -> int:
        return sum(1 for i in self.placeable_instances() if i.is_macro)


# ---------------------------------------------------------------------------
# physical hierarchy


STDCELL = "stdcell"
MACRO = "macro"
MIXED = "mixed"
IO_BUNDLE = "io_bundle"


@dataclass
class ShapeCurve:
    """Realizable shapes of a cluster.

    kind is one of:
      "discrete"  - explicit (w, h) tilings, `points`
      "soft"      - fixed `area`, aspect ratio anywhere in the single interval
      "piecewise" - fixed `area`, aspect ratio in a union of intervals
      "zero"      - degenerate zero-footprint cluster
    Aspect ratio convention is height / width.
    """

    kind: str
    points: tuple[tuple[float, float], ...] = ()
    area: float = 0.0
    ar_intervals: tuple[tuple[float, float], ...] = ()

    def min_area(self) -> float:
        if self.kind == "discrete":
            return min(w * h for w, h in self.points)
        if self.kind == "zero":
            return 0.0
        return self.area

    def realize(self, ar: float) -> tuple[float, float]:
        """Width/height at the given aspect ratio (soft/piecewise only)."""
        w = math.sqrt(self.area / ar)
        return w, self.area / w

    def default_shape(self) -> tuple[float, float]:
        """Deterministic representative shape used to seed the annealer."""
        if self.kind == "zero":
            return 0.0, 0.0
        if self.kind == "discrete":
            pts = sorted(self.points)
            return pts[len(pts) // 2]
        lo, hi = self.ar_intervals[0]
        ar = 1.0 if lo <= 1.0 <= hi else 0.5 * (lo + hi)
        for lo2, hi2 in self.ar_intervals:
            if lo2 <= 1.0 <= hi2:
                ar = 1.0
        return self.realize(ar)


@dataclass
class PhysicalCluster:
    """Node of the physical hierarchy produced by autoclustering."""

    id: int
    name: str
    parent: "PhysicalCluster | None" = None
    children: list["PhysicalCluster"] = field(default_factory=list)
    instances: list[Instance] = field(default_factory=list)  # leaf payload
    io_pin_names: list[str] = field(default_factory=list)  # io bundles only
    fixed: bool = False  # io bundles: position fixed on the boundary
    fixed_pos: tuple[float, float] | None = None
    # io bundles: (edge name, span lo, span hi) of the boundary segment
    segment: tuple[str, float, float] | None = None
    is_tiny: bool = False
    # shaping state: coarse curve survives the whole run, fine curve is
    # recomputed per (util, dead-space) trial
    coarse_curve: ShapeCurve | None = None
    fine_curve: ShapeCurve | None = None
    # placement state
    placed_rect: Rect | None = None

    def __hash__(self) -> int:
        return self.id

    def __eq__(self, other: object) -> bool:
        return self is other

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def depth(self) -> int:
        d = 0
        node = self
        while node.parent is not None:
            d += 1
            node = node.parent
        return d

    def iter_subtree(self) -> Iterator["PhysicalCluster"]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def subtree_instances(self) -> list[Instance]:
        out: list[Instance] = []
        for node in self.iter_subtree():
            out.extend(node.instances)
        return out

    # recursive stats; trees stay small enough that recomputation is cheap
    def num_std_cell(self) -> int:
        return sum(
            1 for i in self.subtree_instances() if not i.is_macro
        )

    def num_macro(self) -> int:
        return sum(1 for i in self.subtree_instances() if i.is_macro)

    def std_cell_area(self) -> float:
        return sum(i.area for i in self.subtree_instances() if not i.is_macro)

    def macro_area(self) -> float:
        return sum(i.area for i in self.subtree_instances() if i.is_macro)

    def macro_instances(self) -> list[Instance]:
        return [i for i in self.subtree_instances() if i.is_macro]

    @property
    def kind(self) -> str:
        if self.io_pin_names or self.fixed:
            return IO_BUNDLE
        nm = self.num_macro()
        ns = self.num_std_cell()
        if nm > 0 and ns > 0:
            return MIXED
        if nm > 0:
            return MACRO
        return STDCELL

    def has_macros(self) -> bool:
        return self.num_macro() > 0

    def detach(self) -> None:
        if self.parent is not None:
            self.parent.children.remove(self)
            self.parent = None

    def attach(self, child: "PhysicalCluster") -> None:
        child.parent = self
        self.children.append(child)


class PhysicalHierarchy:
    """Cluster tree plus id bookkeeping.

    Root sits at depth 0; autoclustering keeps every cluster at depth
    <= num_level (the mixed-leaf split replaces a leaf with siblings, so
    it does not deepen the tree).
    """

    def __init__(self, num_level: int) -> None:
        self.num_level = num_level
        self._next_id = 0
        self.clusters: dict[int, PhysicalCluster] = {}
        self.root = self.new_cluster("root")

    def new_cluster(self, name: str) -> PhysicalCluster:
        c = PhysicalCluster(id=self._next_id, name=name)
        self._next_id += 1
        self.clusters[c.id] = c
        return c

    def drop(self, cluster: PhysicalCluster) -> None:
        """Forget a detached cluster (its id stays burned)."""
        self.clusters.pop(cluster.id, None)

    def live_clusters(self) -> list[PhysicalCluster]:
        out = []
        for node in self.root.iter_subtree():
            out.append(node)
        return out

    def leaves(self) -> list[PhysicalCluster]:
        return [c for c in self.live_clusters() if c.is_leaf]

    def io_bundles(self) -> list[PhysicalCluster]:
        return [c for c in self.root.children if c.kind == IO_BUNDLE]

    def leaf_of_instance(self) -> dict[str, PhysicalCluster]:
        """Map instance name -> owning leaf cluster."""
        out: dict[str, PhysicalCluster] = {}
        for leaf in self.leaves():
            for inst in leaf.instances:
                out[inst.name] = leaf
        return out

    def bundle_of_pin(self) -> dict[str, PhysicalCluster]:
        out: dict[str, PhysicalCluster] = {}
        for b in self.io_bundles():
            for pin in b.io_pin_names:
                out[pin] = b
        return out

    def reset_placement(self) -> None:
        for c in self.live_clusters():
            c.fine_curve = None
            if not c.fixed:
                c.placed_rect = None


@dataclass
class ClusterEdge:
    real: float = 0.0
    virtual: float = 0.0

    @property
    def weight(self) -> float:
        return self.real + self.virtual


class ClusterGraph:
    """Weighted connectivity between clusters of one hierarchy.

    Real weight aggregates net-arc bitwidths; virtual weight carries the
    dataflow-derived and split-pair edges.  Keys are unordered id pairs.
    """

    def __init__(self) -> None:
        self.edges: dict[tuple[int, int], ClusterEdge] = {}

    @staticmethod
    def _key(a: int, b: int) -> tuple[int, int]:
        return (a, b) if a <= b else (b, a)

    def add_real(self, a: int, b: int, w: float) -> None:
        if a == b or w == 0.0:
            return
        e = self.edges.setdefault(self._key(a, b), ClusterEdge())
        e.real += w

    def add_virtual(self, a: int, b: int, w: float) -> None:
        if a == b or w == 0.0:
            return
        e = self.edges.setdefault(self._key(a, b), ClusterEdge())
        e.virtual += w

    def weight(self, a: int, b: int) -> float:
        e = self.edges.get(self._key(a, b))
        return e.weight if e else 0.0

    def items(self) -> list[tuple[tuple[int, int], ClusterEdge]]:
        return sorted(self.edges.items())
