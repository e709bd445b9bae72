"""Shape functions: coarse bottom-up curves and fine top-down refinement.

Coarse shaping gives every cluster a rough realizable-shape description:
stdcell clusters get a fixed area with a free aspect-ratio interval, leaf
macro clusters get exact grid tilings, and macro-bearing internal clusters
get tilings found by annealing their children's shapes.  Fine shaping then
specializes those curves to a concrete parent outline, utilization and
dead-space target just before each placement step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import annealer, kernels
from .model import IO_BUNDLE, PhysicalCluster, PhysicalHierarchy, ShapeCurve

_EPS = 1e-9


class ShapingError(RuntimeError):
    """A cluster admits no shape that fits its canvas."""


@dataclass(frozen=True)
class TilingSet:
    points: tuple[tuple[float, float], ...]

    def __iter__(self):
        return iter(self.points)

    def __len__(self) -> int:
        return len(self.points)


def pareto_prune(points: list[tuple[float, float]]) -> tuple[tuple[float, float], ...]:
    """Keep only non-dominated (w, h) pairs, sorted by width."""
    best_h: dict[float, float] = {}
    for w, h in points:
        if w not in best_h or h < best_h[w]:
            best_h[w] = h
    out: list[tuple[float, float]] = []
    last_h = math.inf
    for w in sorted(best_h):
        h = best_h[w]
        if h < last_h - _EPS:
            out.append((w, h))
            last_h = h
    return tuple(out)


def grid_tilings(
    n: int, mw: float, mh: float, canvas_w: float, canvas_h: float
) -> tuple[tuple[float, float], ...]:
    """All minimal grid arrangements of n uniform blocks fitting the canvas."""
    raw = []
    for cols in range(1, n + 1):
        rows = (n + cols - 1) // cols
        w = cols * mw
        h = rows * mh
        if w <= canvas_w + _EPS and h <= canvas_h + _EPS:
            raw.append((w, h))
    return pareto_prune(raw)


def macro_tilings(cluster: PhysicalCluster, canvas, halo: float = 0.0) -> TilingSet:
    macros = cluster.macro_instances()
    if not macros:
        raise ShapingError(f"cluster {cluster.name!r} has no macros to tile")
    dims = {(m.master.width, m.master.height) for m in macros}
    if len(dims) != 1:
        raise ShapingError(
            f"cluster {cluster.name!r} mixes macro footprints {sorted(dims)}"
        )
    mw, mh = next(iter(dims))
    pts = grid_tilings(
        len(macros), mw + 2.0 * halo, mh + 2.0 * halo, canvas.width, canvas.height
    )
    if not pts:
        raise ShapingError(
            f"macro cluster {cluster.name!r} unplaceable: no tiling of "
            f"{len(macros)} macros {mw}x{mh} fits the {canvas.width}x{canvas.height} canvas"
        )
    return TilingSet(pts)


def _macro_bearing_children(cluster: PhysicalCluster) -> list[PhysicalCluster]:
    return [c for c in cluster.children if c.kind != IO_BUNDLE and c.num_macro() > 0]


def mixed_tilings(
    cluster: PhysicalCluster,
    canvas,
    sa_params: annealer.SaSchedule,
    min_ar: float = 0.33,
) -> TilingSet:
    """Pack the macro-bearing children by annealing; stdcell area ignored.

    Each worker packs against a virtual outline at a different target
    aspect ratio so the harvested footprints spread across the whole
    realizable band; per run the best packing is kept, then canvas-fitting
    Pareto-minimal footprints survive, aspect-ratio clamped while more
    than one candidate remains.
    """
    blocks = _macro_bearing_children(cluster)
    if not blocks:
        raise ShapingError(f"cluster {cluster.name!r} has no macro-bearing children")
    for b in blocks:
        if b.coarse_curve is None or b.coarse_curve.kind != "discrete":
            raise ShapingError(f"child {b.name!r} lacks a discrete coarse curve")
    if len(blocks) == 1:
        return TilingSet(tuple(sorted(blocks[0].coarse_curve.points)))

    n = len(blocks)
    disc_off = np.zeros(n + 1, dtype=np.int64)
    disc_w: list[float] = []
    disc_h: list[float] = []
    min_area = 0.0
    for i, b in enumerate(blocks):
        for w, h in sorted(b.coarse_curve.points):
            disc_w.append(w)
            disc_h.append(h)
        disc_off[i + 1] = len(disc_w)
        min_area += min(w * h for w, h in b.coarse_curve.points)

    # 10% linear slack so near-perfect packings stay inside their band
    budget = min_area * 1.21
    k = max(sa_params.num_workers, 2)
    lo, hi = math.log(min_ar), math.log(1.0 / min_ar)
    candidates: set[tuple[float, float]] = set()
    fallback: tuple[float, float] | None = None
    fallback_key = (math.inf, math.inf)
    for idx in range(k):
        ar = math.exp(lo + (hi - lo) * idx / (k - 1))
        vw = min(canvas.width, math.sqrt(budget / ar))
        vh = min(canvas.height, math.sqrt(budget * ar))
        init = kernels.make_state(n)
        for i, b in enumerate(blocks):
            init.w[i], init.h[i] = b.coarse_curve.default_shape()
        packed = kernels.PackedProblem(
            n=n,
            ow=vw,
            oh=vh,
            init=init,
            disc_off=disc_off,
            disc_w=np.array(disc_w, dtype=np.float64),
            disc_h=np.array(disc_h, dtype=np.float64),
            weights=np.array([1.0, 0.0, 10.0, 0.0, 0.0, 0.0, 0.0]),
            op4_mode=kernels.OP4_RESIZE,
        )
        r = annealer.anneal(packed, sa_params.with_seed(sa_params.seed + idx))
        state = r.best_valid if r.best_valid is not None else r.best
        x, y = packed.positions(state)
        bw = max(float(x[i] + state.w[i]) for i in range(n))
        bh = max(float(y[i] + state.h[i]) for i in range(n))
        key = (bw * bh, bw)
        if key < fallback_key:
            fallback_key = key
            fallback = (bw, bh)
        if bw <= canvas.width + _EPS and bh <= canvas.height + _EPS:
            candidates.add((bw, bh))
    if not candidates:
        return TilingSet((fallback,))
    pts = pareto_prune(sorted(candidates))
    if len(pts) > 1:
        clamped = tuple(
            (w, h) for w, h in pts if min_ar - _EPS <= h / w <= 1.0 / min_ar + _EPS
        )
        if clamped:
            pts = clamped
    return TilingSet(pts)


def coarse_shape(
    hierarchy: PhysicalHierarchy,
    canvas,
    min_ar: float = 0.33,
    sa_params: annealer.SaSchedule | None = None,
    halo: float = 0.0,
) -> None:
    """Post-order pass writing coarse_curve on every cluster."""
    if sa_params is None:
        sa_params = annealer.SaSchedule()
    ar_band = ((min_ar, 1.0 / min_ar),)

    def visit(c: PhysicalCluster) -> None:
        for child in c.children:
            visit(child)
        if c.kind == IO_BUNDLE:
            c.coarse_curve = ShapeCurve(kind="zero")
            return
        if c is hierarchy.root:
            c.coarse_curve = ShapeCurve(
                kind="soft", area=c.std_cell_area() + c.macro_area(), ar_intervals=ar_band
            )
            return
        if c.num_macro() == 0:
            c.coarse_curve = ShapeCurve(
                kind="soft", area=c.std_cell_area(), ar_intervals=ar_band
            )
        elif c.is_leaf:
            tiles = macro_tilings(c, canvas, halo)
            c.coarse_curve = ShapeCurve(kind="discrete", points=tuple(tiles))
        else:
            tiles = mixed_tilings(c, canvas, sa_params, min_ar)
            c.coarse_curve = ShapeCurve(kind="discrete", points=tuple(tiles))

    visit(hierarchy.root)


def _fits(w: float, h: float, outline) -> bool:
    return w <= outline.width + _EPS and h <= outline.height + _EPS


def _merge_intervals(intervals: list[tuple[float, float]]) -> tuple[tuple[float, float], ...]:
    out: list[list[float]] = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1] + _EPS:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return tuple((lo, hi) for lo, hi in out)


def fine_shape(
    parent: PhysicalCluster,
    util: float,
    t_dead_space: float,
    min_ar: float = 0.33,
    tiny_thr: int = 50,
    blockages: list = (),
) -> bool:
    """Specialize the children's curves to the parent's placed outline.

    Macro-bearing children keep only outline-fitting shapes (mixed ones
    budgeted at min tiling area + std area / util, each shape widened to
    the aspect-ratio interval [h^2/area, area/w^2]); stdcell children are
    inflated to soak up the remaining area at the dead-space target, tiny
    ones collapsing to zero footprint.  Returns False when the area
    accounting shows the outline cannot host the children.
    """
    outline = parent.placed_rect
    if outline is None:
        raise ValueError(f"parent {parent.name!r} has no placed rect")
    avail = outline.area
    for b in blockages:
        avail -= b.overlap_area(outline)

    std_children: list[PhysicalCluster] = []
    for c in parent.children:
        if c.kind == IO_BUNDLE:
            continue
        if c.num_macro() == 0:
            std_children.append(c)
            continue
        if c.coarse_curve is None or c.coarse_curve.kind != "discrete":
            raise ValueError(f"child {c.name!r} lacks a discrete coarse curve")
        fitting = [
            (w, h) for w, h in sorted(c.coarse_curve.points) if _fits(w, h, outline)
        ]
        if not fitting:
            return False
        min_area = min(w * h for w, h in fitting)
        std_area = c.std_cell_area()
        if std_area == 0.0:
            c.fine_curve = ShapeCurve(kind="discrete", points=tuple(fitting))
            avail -= min_area
        else:
            area = min_area + std_area / util
            intervals = []
            for w, h in fitting:
                if w * h > area + _EPS:
                    continue
                intervals.append((h * h / area, area / (w * w)))
            c.fine_curve = ShapeCurve(
                kind="piecewise", area=area, ar_intervals=_merge_intervals(intervals)
            )
            avail -= area

    if parent.std_cell_area() == 0.0:
        return True
    if avail <= 0.0:
        return False
    inflat_ratio = parent.std_cell_area() / (avail * (1.0 - t_dead_space))
    for c in std_children:
        if c.num_std_cell() < tiny_thr:
            c.fine_curve = ShapeCurve(kind="zero")
        else:
            c.fine_curve = ShapeCurve(
                kind="soft",
                area=c.std_cell_area() / inflat_ratio,
                ar_intervals=((min_ar, 1.0 / min_ar),),
            )
    return True
