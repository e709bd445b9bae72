"""Fixed-outline placement of child clusters and of macros.

Child clusters of one parent are packed by simulated annealing over a
sequence pair plus per-child shape choices; the cost blends packing area,
weighted wirelength to fixed terminals, and penalties for outline
violation, missing peripheral bias, blockage overlap, guidance distance
and notches.  Leaf macro clusters get a second, lighter cost (area,
wirelength, outline, guidance) with an all-macro flip operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import annealer, kernels
from .model import MACRO, MIXED, ORIENT_NAMES, Rect, ShapeCurve


class PlacerError(RuntimeError):
    """A placement that shaping guaranteed feasible could not be realized."""


# term order shared with the kernels: area, wl, outline, bias, blockage,
# guidance, notch
DEFAULT_CLUSTER_WEIGHTS = (0.1, 1.0, 10.0, 0.05, 10.0, 1.0, 1.0)
DEFAULT_MACRO_WEIGHTS = (0.1, 1.0, 10.0, 0.0, 0.0, 1.0, 0.0)

# legalization fallback: when no worker of the main anneal fits the
# outline, the wirelength pull can be what keeps dragging the search into
# overflowing states; retry with everything but area and outline muted
RESCUE_WEIGHTS = (1.0, 0.0, 10.0, 0.0, 0.0, 0.0, 0.0)
_RESCUE_SEED_OFFSET = 7919

PIN_ACCESS_DEPTH_FRAC = 0.02
NOTCH_MIN_DIM_FRAC = 0.05


# ---------------------------------------------------------------------------
# penalty terms (reference implementations; the SA kernels mirror these)


def wirelength(positions: dict, weighted_edges: list[tuple]) -> float:
    """Sum of w * (|dx| + |dy|) between endpoint centers."""
    total = 0.0
    for a, b, w in weighted_edges:
        if a not in positions or b not in positions:
            raise KeyError(f"unplaced endpoint {a if a not in positions else b!r}")
        ax, ay = positions[a]
        bx, by = positions[b]
        total += w * (abs(ax - bx) + abs(ay - by))
    return total


def penalty_outline(rects: list[Rect], outline: Rect) -> float:
    """Total area lying outside the outline."""
    total = 0.0
    for r in rects:
        total += r.area - r.overlap_area(outline)
    return total


def penalty_bias(rects: list[Rect], kinds: list[str], outline: Rect) -> float:
    """Distance of each macro-bearing cluster from the nearest boundary,
    normalized by the outline half-perimeter."""
    total = 0.0
    for r, kind in zip(rects, kinds):
        if kind not in (MACRO, MIXED):
            continue
        d = min(r.lx - outline.lx, r.ly - outline.ly, outline.ux - r.ux, outline.uy - r.uy)
        if d > 0.0:
            total += d
    return total / (outline.width + outline.height)


def penalty_blockage(
    rects: list[Rect],
    kinds: list[str],
    blockages: list[Rect],
    pin_access_regions: list[Rect],
    outline: Rect,
) -> float:
    """Overlap of macro-bearing clusters with blockages and pin keep-outs,
    normalized by the outline area."""
    total = 0.0
    for r, kind in zip(rects, kinds):
        if kind not in (MACRO, MIXED):
            continue
        for b in list(blockages) + list(pin_access_regions):
            total += r.overlap_area(b)
    return total / outline.area


def penalty_guidance(rects: dict, guidance_map: dict, outline: Rect) -> float:
    """Manhattan distance from each guided cluster's center to its region,
    normalized by the outline half-perimeter (0 when the center is inside)."""
    total = 0.0
    for key, region in guidance_map.items():
        if key not in rects:
            continue
        r = rects[key]
        dx = max(region.lx - r.cx, r.cx - region.ux, 0.0)
        dy = max(region.ly - r.cy, r.cy - region.uy, 0.0)
        total += dx + dy
    return total / (outline.width + outline.height)


def penalty_notch(
    rects: list[Rect],
    outline: Rect,
    notch_min_dim: float,
    blockages: list[Rect] = (),
) -> float:
    """Thin-whitespace penalty.

    Whitespace is rasterized at cell size notch_min_dim/2 (a cell is
    occupied when a rect covers its center); a 4-connected whitespace
    component whose bounding box is narrower or shorter than notch_min_dim
    counts as a notch.  Returns notch cell area / outline area.
    """
    cell = notch_min_dim / 2.0
    if cell <= 0.0:
        return 0.0
    ncx = int(math.ceil(outline.width / cell))
    ncy = int(math.ceil(outline.height / cell))
    occ = [[False] * ncx for _ in range(ncy)]
    for jj in range(ncy):
        cy = outline.ly + (jj + 0.5) * cell
        for ii in range(ncx):
            cx = outline.lx + (ii + 0.5) * cell
            if cx > outline.ux or cy > outline.uy:
                occ[jj][ii] = True
                continue
            for r in list(rects) + list(blockages):
                if r.lx <= cx <= r.ux and r.ly <= cy <= r.uy:
                    occ[jj][ii] = True
                    break
    seen = [[False] * ncx for _ in range(ncy)]
    notch_area = 0.0
    for j0 in range(ncy):
        for i0 in range(ncx):
            if occ[j0][i0] or seen[j0][i0]:
                continue
            stack = [(i0, j0)]
            seen[j0][i0] = True
            cells = 0
            mini = maxi = i0
            minj = maxj = j0
            while stack:
                ii, jj = stack.pop()
                cells += 1
                mini = min(mini, ii)
                maxi = max(maxi, ii)
                minj = min(minj, jj)
                maxj = max(maxj, jj)
                for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    ni, nj = ii + di, jj + dj
                    if 0 <= ni < ncx and 0 <= nj < ncy and not occ[nj][ni] and not seen[nj][ni]:
                        seen[nj][ni] = True
                        stack.append((ni, nj))
            bbw = (maxi - mini + 1) * cell
            bbh = (maxj - minj + 1) * cell
            if bbw < notch_min_dim or bbh < notch_min_dim:
                notch_area += cells * cell * cell
    return notch_area / outline.area


def pin_access_keepouts(
    outline: Rect, segments: list[tuple[str, float, float]], depth: float
) -> list[Rect]:
    """Keep-out strip of the given depth inward from each populated
    boundary segment, given as (edge, span_lo, span_hi) with edge one of
    bottom/top/left/right and the span measured along that edge."""
    out = []
    for edge, lo, hi in segments:
        if edge == "bottom":
            out.append(Rect(lo, outline.ly, hi, outline.ly + depth))
        elif edge == "top":
            out.append(Rect(lo, outline.uy - depth, hi, outline.uy))
        elif edge == "left":
            out.append(Rect(outline.lx, lo, outline.lx + depth, hi))
        elif edge == "right":
            out.append(Rect(outline.ux - depth, lo, outline.ux, hi))
        else:
            raise ValueError(f"unknown edge {edge!r}")
    return out


# ---------------------------------------------------------------------------
# cost bookkeeping


@dataclass
class CostVector:
    area: float = 0.0
    wl: float = 0.0
    p_outline: float = 0.0
    p_bias: float = 0.0
    p_blockage: float = 0.0
    p_guidance: float = 0.0
    p_notch: float = 0.0
    normalizers: tuple = (1.0,) * 7

    @classmethod
    def from_terms(cls, terms, norms) -> "CostVector":
        return cls(
            area=float(terms[0]),
            wl=float(terms[1]),
            p_outline=float(terms[2]),
            p_bias=float(terms[3]),
            p_blockage=float(terms[4]),
            p_guidance=float(terms[5]),
            p_notch=float(terms[6]),
            normalizers=tuple(float(v) for v in norms),
        )

    def raw_terms(self) -> tuple:
        return (
            self.area,
            self.wl,
            self.p_outline,
            self.p_bias,
            self.p_blockage,
            self.p_guidance,
            self.p_notch,
        )

    def total(self, weights) -> float:
        return sum(
            w * t / n
            for w, t, n in zip(weights, self.raw_terms(), self.normalizers)
            if n > 0.0
        )


# ---------------------------------------------------------------------------
# problems


@dataclass
class ChildBlock:
    """Movable child cluster inside a parent outline."""

    name: str
    cluster_id: int
    kind: str
    curve: ShapeCurve
    guidance: Rect | None = None  # global coords


@dataclass
class Terminal:
    name: str
    x: float
    y: float


@dataclass
class ClusterPlacementProblem:
    """Everything the child-placement cost function depends on.

    Edges reference endpoints as ("m", child_index) or ("t", terminal
    index); all geometry is in global (canvas) coordinates.
    """

    outline: Rect
    children: list[ChildBlock]
    terminals: list[Terminal] = field(default_factory=list)
    edges: list[tuple[tuple[str, int], tuple[str, int], float]] = field(default_factory=list)
    weights: tuple = DEFAULT_CLUSTER_WEIGHTS
    blockages: list[Rect] = field(default_factory=list)
    pin_access_regions: list[Rect] = field(default_factory=list)
    notch_min_dim: float = 0.0

    def to_packed(self) -> kernels.PackedProblem:
        n = len(self.children)
        ox, oy = self.outline.lx, self.outline.ly
        init = kernels.make_state(n)
        disc_off = np.zeros(n + 1, dtype=np.int64)
        disc_w: list[float] = []
        disc_h: list[float] = []
        area = np.zeros(n, dtype=np.float64)
        ar_off = np.zeros(n + 1, dtype=np.int64)
        ar_lo: list[float] = []
        ar_hi: list[float] = []
        is_macroish = np.zeros(n, dtype=np.uint8)
        guid = np.zeros((n, 4), dtype=np.float64)
        guid_mask = np.zeros(n, dtype=np.uint8)
        for i, child in enumerate(self.children):
            curve = child.curve
            if curve.kind == "discrete":
                for w, h in curve.points:
                    disc_w.append(w)
                    disc_h.append(h)
            elif curve.kind in ("soft", "piecewise"):
                area[i] = curve.area
                for lo, hi in curve.ar_intervals:
                    ar_lo.append(lo)
                    ar_hi.append(hi)
            elif curve.kind == "zero":
                disc_w.append(0.0)
                disc_h.append(0.0)
            disc_off[i + 1] = len(disc_w)
            ar_off[i + 1] = len(ar_lo)
            if child.kind in (MACRO, MIXED):
                is_macroish[i] = 1
            if child.guidance is not None:
                g = child.guidance
                guid[i] = (g.lx - ox, g.ly - oy, g.ux - ox, g.uy - oy)
                guid_mask[i] = 1
            w0, h0 = curve.default_shape()
            init.w[i] = w0
            init.h[i] = h0
        e_a = np.zeros(len(self.edges), dtype=np.int64)
        e_b = np.zeros(len(self.edges), dtype=np.int64)
        e_w = np.zeros(len(self.edges), dtype=np.float64)
        for m, (a, b, w) in enumerate(self.edges):
            e_a[m] = a[1] if a[0] == "m" else n + a[1]
            e_b[m] = b[1] if b[0] == "m" else n + b[1]
            e_w[m] = w
        # wirelength edges need a movable first endpoint
        for m in range(len(self.edges)):
            if e_a[m] >= n:
                e_a[m], e_b[m] = e_b[m], e_a[m]
        term_x = np.array([t.x - ox for t in self.terminals], dtype=np.float64)
        term_y = np.array([t.y - oy for t in self.terminals], dtype=np.float64)
        blk_rows = [
            (b.lx - ox, b.ly - oy, b.ux - ox, b.uy - oy)
            for b in list(self.blockages) + list(self.pin_access_regions)
        ]
        blk = np.array(blk_rows, dtype=np.float64).reshape(len(blk_rows), 4)
        return kernels.PackedProblem(
            n=n,
            ow=self.outline.width,
            oh=self.outline.height,
            init=init,
            disc_off=disc_off,
            disc_w=np.array(disc_w, dtype=np.float64),
            disc_h=np.array(disc_h, dtype=np.float64),
            area=area,
            ar_off=ar_off,
            ar_lo=np.array(ar_lo, dtype=np.float64),
            ar_hi=np.array(ar_hi, dtype=np.float64),
            is_macroish=is_macroish,
            e_a=e_a,
            e_b=e_b,
            e_w=e_w,
            term_x=term_x,
            term_y=term_y,
            blk=blk,
            nb_hard=len(self.blockages),
            guid=guid,
            guid_mask=guid_mask,
            notch_cell=self.notch_min_dim / 2.0,
            notch_min=self.notch_min_dim,
            weights=np.array(self.weights, dtype=np.float64),
            op4_mode=kernels.OP4_RESIZE,
        )


@dataclass
class MacroBlock:
    inst: str
    width: float  # effective (halo-padded) footprint
    height: float
    guidance: Rect | None = None


@dataclass
class MacroPlacementProblem:
    """Macros of one leaf macro cluster inside its placed rect."""

    outline: Rect
    macros: list[MacroBlock]
    grid_cols: int
    terminals: list[Terminal] = field(default_factory=list)
    edges: list[tuple[tuple[str, int], tuple[str, int], float]] = field(default_factory=list)
    weights: tuple = DEFAULT_MACRO_WEIGHTS
    halo: float = 0.0

    def to_packed(self) -> kernels.PackedProblem:
        n = len(self.macros)
        ox, oy = self.outline.lx, self.outline.ly
        init = kernels.make_state(n)
        cols = max(self.grid_cols, 1)
        rows = (n + cols - 1) // cols
        # row-major grid seed: pos lists rows top-down, neg bottom-up
        order_bottom_up = list(range(n))
        pos: list[int] = []
        for r in range(rows - 1, -1, -1):
            pos.extend(order_bottom_up[r * cols : (r + 1) * cols])
        init.pos[:] = np.array(pos, dtype=np.int64)
        init.neg[:] = np.array(order_bottom_up, dtype=np.int64)
        disc_off = np.zeros(n + 1, dtype=np.int64)
        disc_w = np.zeros(n, dtype=np.float64)
        disc_h = np.zeros(n, dtype=np.float64)
        guid = np.zeros((n, 4), dtype=np.float64)
        guid_mask = np.zeros(n, dtype=np.uint8)
        for i, m in enumerate(self.macros):
            init.w[i] = m.width
            init.h[i] = m.height
            disc_off[i + 1] = i + 1
            disc_w[i] = m.width
            disc_h[i] = m.height
            if m.guidance is not None:
                g = m.guidance
                guid[i] = (g.lx - ox, g.ly - oy, g.ux - ox, g.uy - oy)
                guid_mask[i] = 1
        e_a = np.zeros(len(self.edges), dtype=np.int64)
        e_b = np.zeros(len(self.edges), dtype=np.int64)
        e_w = np.zeros(len(self.edges), dtype=np.float64)
        for m_, (a, b, w) in enumerate(self.edges):
            e_a[m_] = a[1] if a[0] == "m" else n + a[1]
            e_b[m_] = b[1] if b[0] == "m" else n + b[1]
            e_w[m_] = w
        for m_ in range(len(self.edges)):
            if e_a[m_] >= n:
                e_a[m_], e_b[m_] = e_b[m_], e_a[m_]
        return kernels.PackedProblem(
            n=n,
            ow=self.outline.width,
            oh=self.outline.height,
            init=init,
            disc_off=disc_off,
            disc_w=disc_w,
            disc_h=disc_h,
            is_macroish=np.ones(n, dtype=np.uint8),
            e_a=e_a,
            e_b=e_b,
            e_w=e_w,
            term_x=np.array([t.x - ox for t in self.terminals], dtype=np.float64),
            term_y=np.array([t.y - oy for t in self.terminals], dtype=np.float64),
            weights=np.array(self.weights, dtype=np.float64),
            op4_mode=kernels.OP4_FLIP,
        )


# ---------------------------------------------------------------------------
# drivers


@dataclass
class ClusterPlacementResult:
    valid: bool
    rects: list[Rect]  # global coords, one per child
    cost: CostVector
    total_cost: float
    t_init: float
    worker: int


def _pick_result(results: list[kernels.KernelResult]):
    """Prefer the cheapest valid worker state, else the cheapest overall."""
    valid = [r for r in results if r.best_valid is not None]
    if valid:
        chosen = min(valid, key=lambda r: (r.best_valid_cost, r.worker))
        return chosen, chosen.best_valid, chosen.best_valid_terms, chosen.best_valid_cost, True
    chosen = min(results, key=lambda r: (r.best_cost, r.worker))
    return chosen, chosen.best, chosen.best_terms, chosen.best_cost, False


def _anneal_with_rescue(
    packed: kernels.PackedProblem,
    schedule: annealer.SaSchedule,
    norms: np.ndarray,
) -> list[kernels.KernelResult]:
    """Anneal all workers; rerun with legalization weights if none fit.

    Rescued states are re-costed under the caller's weights and norms so
    result selection stays comparable, and their worker ids are offset
    past the first phase to keep tie-breaking deterministic.
    """
    results = annealer.multi_start_all(packed, schedule, schedule.num_workers)
    if any(r.best_valid is not None for r in results):
        return results
    rescue = replace(packed, weights=np.asarray(RESCUE_WEIGHTS, dtype=np.float64))
    rescued = annealer.multi_start_all(
        rescue,
        schedule.with_seed(schedule.seed + _RESCUE_SEED_OFFSET),
        schedule.num_workers,
    )
    out = list(results)
    for r in rescued:
        if r.best_valid is None:
            continue
        # rescue muted most terms, so its reported terms are partial;
        # re-evaluate the state under the caller's term set
        terms = packed.evaluate(r.best_valid)
        cost = float(kernels._weighted_cost(terms, packed.weights, norms))
        out.append(
            replace(
                r,
                best_valid_terms=terms,
                best_valid_cost=cost,
                worker=schedule.num_workers + r.worker,
            )
        )
    return out


def place_children(
    problem: ClusterPlacementProblem, schedule: annealer.SaSchedule
) -> ClusterPlacementResult:
    packed = problem.to_packed()
    norms, samples = packed.calibrate(schedule.seed, annealer.CALIBRATION_STEPS)
    t_init = kernels.derive_t_init(
        samples, packed.weights, norms, schedule.init_accept_prob, schedule.t_min
    )
    results = _anneal_with_rescue(packed, schedule, norms)
    chosen, state, terms, cost, valid = _pick_result(results)
    x, y = packed.positions(state)
    ox, oy = problem.outline.lx, problem.outline.ly
    rects = [
        Rect(ox + x[i], oy + y[i], ox + x[i] + state.w[i], oy + y[i] + state.h[i])
        for i in range(packed.n)
    ]
    return ClusterPlacementResult(
        valid=valid,
        rects=rects,
        cost=CostVector.from_terms(terms, norms),
        total_cost=float(cost),
        t_init=float(t_init),
        worker=chosen.worker,
    )


@dataclass
class MacroPlacementResult:
    placements: list[tuple[str, float, float, str]]
    rects: list[Rect]
    cost: CostVector
    total_cost: float
    worker: int


def place_macros(
    problem: MacroPlacementProblem, schedule: annealer.SaSchedule
) -> MacroPlacementResult:
    packed = problem.to_packed()
    norms, _ = packed.calibrate(schedule.seed, annealer.CALIBRATION_STEPS)
    results = _anneal_with_rescue(packed, schedule, norms)
    valid = [r for r in results if r.best_valid is not None]
    if not valid:
        raise PlacerError(
            f"no legal macro arrangement found inside {problem.outline} "
            f"for {len(problem.macros)} macros"
        )
    chosen = min(valid, key=lambda r: (r.best_valid_cost, r.worker))
    state = chosen.best_valid
    terms = chosen.best_valid_terms
    x, y = packed.positions(state)
    ox, oy = problem.outline.lx, problem.outline.ly
    placements = []
    rects = []
    for i, m in enumerate(problem.macros):
        lx = ox + float(x[i]) + problem.halo
        ly = oy + float(y[i]) + problem.halo
        placements.append((m.inst, lx, ly, ORIENT_NAMES[int(state.orient[i]) & 3]))
        rects.append(
            Rect(
                lx,
                ly,
                lx + m.width - 2.0 * problem.halo,
                ly + m.height - 2.0 * problem.halo,
            )
        )
    return MacroPlacementResult(
        placements=placements,
        rects=rects,
        cost=CostVector.from_terms(terms, norms),
        total_cost=float(chosen.best_valid_cost),
        worker=chosen.worker,
    )
