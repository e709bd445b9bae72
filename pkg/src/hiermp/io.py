"""Line-oriented input parsing and output writing.

Three input files describe a design: a cell library, a hierarchical netlist
and a floorplan (canvas, io pins, blockages, preplaced macros, guidance
regions).  Outputs are a placement file, a metrics file and an optional SVG
rendering.  All formats are whitespace-separated tokens, one record per
line; `#` starts a comment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import (
    Canvas,
    DesignDatabase,
    Instance,
    IoPin,
    LogicalModule,
    Master,
    NetArc,
    ORIENT_CODES,
    PinRef,
    PreplacedMacro,
    Rect,
)


class DesignInputError(ValueError):
    """Base error for malformed or inconsistent input files."""

    def __init__(self, message: str, path: str = "", line: int = 0) -> None:
        loc = f"{path}:{line}: " if path else ""
        super().__init__(loc + message)
        self.path = path
        self.line = line


class FormatSyntaxError(DesignInputError):
    """A line does not match its record grammar."""


class DanglingReferenceError(DesignInputError):
    """A record references an undeclared name, or redeclares one."""


class PinOffBoundaryError(DesignInputError):
    """An io pin does not sit on the canvas boundary."""


def _records(text: str, path: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        yield lineno, line.split()


def _as_float(tok: str, path: str, lineno: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise FormatSyntaxError(f"expected a number, got {tok!r}", path, lineno)


def _as_int(tok: str, path: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise FormatSyntaxError(f"expected an integer, got {tok!r}", path, lineno)


# ---------------------------------------------------------------------------
# library


def parse_library(text: str, path: str = "<library>") -> dict[str, Master]:
    masters: dict[str, Master] = {}
    for lineno, toks in _records(text, path):
        kind = toks[0]
        if kind == "MACRO":
            if len(toks) != 4:
                raise FormatSyntaxError("MACRO <name> <w> <h>", path, lineno)
            name = toks[1]
            w = _as_float(toks[2], path, lineno)
            h = _as_float(toks[3], path, lineno)
            if w <= 0 or h <= 0:
                raise FormatSyntaxError("macro dims must be positive", path, lineno)
            m = Master(name=name, is_macro=True, area=w * h, width=w, height=h)
        elif kind == "STDCELL":
            if len(toks) == 3:
                is_ff = False
            elif len(toks) == 4 and toks[3] == "FF":
                is_ff = True
            else:
                raise FormatSyntaxError("STDCELL <name> <area> [FF]", path, lineno)
            name = toks[1]
            area = _as_float(toks[2], path, lineno)
            if area <= 0:
                raise FormatSyntaxError("cell area must be positive", path, lineno)
            m = Master(name=name, is_macro=False, area=area, is_ff=is_ff)
        else:
            raise FormatSyntaxError(f"unknown record {kind!r}", path, lineno)
        if m.name in masters:
            raise DanglingReferenceError(f"duplicate master {m.name!r}", path, lineno)
        masters[m.name] = m
    return masters


# ---------------------------------------------------------------------------
# netlist


def _parse_endpoints(toks: list[str], path: str, lineno: int) -> list[PinRef]:
    """Endpoint tokens: `inst.pin` or the pair `PIN io_name`."""
    out: list[PinRef] = []
    i = 0
    while i < len(toks):
        if toks[i] == "PIN":
            if i + 1 >= len(toks):
                raise FormatSyntaxError("PIN needs an io pin name", path, lineno)
            out.append(PinRef(inst=None, pin=toks[i + 1]))
            i += 2
        else:
            if "." not in toks[i]:
                raise FormatSyntaxError(
                    f"endpoint {toks[i]!r} is not inst.pin or PIN name", path, lineno
                )
            inst, pin = toks[i].rsplit(".", 1)
            out.append(PinRef(inst=inst, pin=pin))
            i += 1
    return out


def parse_netlist(
    text: str, masters: dict[str, Master], path: str = "<netlist>"
) -> tuple[dict[str, LogicalModule], LogicalModule, dict[str, Instance], list[NetArc]]:
    modules: dict[str, LogicalModule] = {}
    instances: dict[str, Instance] = {}
    arcs: list[NetArc] = []
    net_names: set[str] = set()
    roots: list[LogicalModule] = []

    for lineno, toks in _records(text, path):
        kind = toks[0]
        if kind == "MODULE":
            if len(toks) != 4 or toks[2] != "PARENT":
                raise FormatSyntaxError("MODULE <path> PARENT <path|->", path, lineno)
            mpath, parent_path = toks[1], toks[3]
            if mpath in modules:
                raise DanglingReferenceError(f"duplicate module {mpath!r}", path, lineno)
            mod = LogicalModule(path=mpath)
            if parent_path == "-":
                roots.append(mod)
            else:
                parent = modules.get(parent_path)
                if parent is None:
                    raise DanglingReferenceError(
                        f"parent module {parent_path!r} not declared", path, lineno
                    )
                mod.parent = parent
                parent.children.append(mod)
            modules[mpath] = mod
        elif kind == "INST":
            if len(toks) != 4:
                raise FormatSyntaxError("INST <name> <master> <module_path>", path, lineno)
            name, master_name, mpath = toks[1], toks[2], toks[3]
            if name in instances:
                raise DanglingReferenceError(f"duplicate instance {name!r}", path, lineno)
            master = masters.get(master_name)
            if master is None:
                raise DanglingReferenceError(
                    f"master {master_name!r} not in library", path, lineno
                )
            mod = modules.get(mpath)
            if mod is None:
                raise DanglingReferenceError(f"module {mpath!r} not declared", path, lineno)
            inst = Instance(name=name, master=master, module_path=mpath)
            instances[name] = inst
            mod.instances.append(inst)
        elif kind == "NET":
            if len(toks) < 2:
                raise FormatSyntaxError("NET <name> [WIDTH k] <endpoints>", path, lineno)
            net = toks[1]
            if net in net_names:
                raise DanglingReferenceError(f"duplicate net {net!r}", path, lineno)
            net_names.add(net)
            rest = toks[2:]
            width = 1
            if rest and rest[0] == "WIDTH":
                if len(rest) < 2:
                    raise FormatSyntaxError("WIDTH needs a value", path, lineno)
                width = _as_int(rest[1], path, lineno)
                if width < 1:
                    raise FormatSyntaxError("WIDTH must be >= 1", path, lineno)
                rest = rest[2:]
            eps = _parse_endpoints(rest, path, lineno)
            if len(eps) < 2:
                raise FormatSyntaxError("net needs a driver and >=1 sink", path, lineno)
            for ep in eps:
                if ep.inst is not None and ep.inst not in instances:
                    raise DanglingReferenceError(
                        f"net {net!r} references undeclared instance {ep.inst!r}",
                        path,
                        lineno,
                    )
            driver = eps[0]
            for sink in eps[1:]:
                arcs.append(NetArc(net=net, driver=driver, sink=sink, bitwidth=width))
        else:
            raise FormatSyntaxError(f"unknown record {kind!r}", path, lineno)

    if len(roots) != 1:
        raise DanglingReferenceError(
            f"netlist must declare exactly one root module, found {len(roots)}", path, 0
        )
    return modules, roots[0], instances, arcs


# ---------------------------------------------------------------------------
# floorplan


def parse_floorplan(
    text: str, path: str = "<floorplan>"
) -> tuple[Canvas, dict[str, Rect], dict[str, str]]:
    """Returns (canvas, guidance, preplaced orientations keyed by inst)."""
    canvas: Canvas | None = None
    io_pins: list[IoPin] = []
    blockages: list[Rect] = []
    preplaced_raw: list[tuple[str, float, float, str, int]] = []
    guidance: dict[str, Rect] = {}
    seen_pins: set[str] = set()

    for lineno, toks in _records(text, path):
        kind = toks[0]
        if kind == "CANVAS":
            if len(toks) != 3:
                raise FormatSyntaxError("CANVAS <w> <h>", path, lineno)
            if canvas is not None:
                raise FormatSyntaxError("duplicate CANVAS", path, lineno)
            w = _as_float(toks[1], path, lineno)
            h = _as_float(toks[2], path, lineno)
            if w <= 0 or h <= 0:
                raise FormatSyntaxError("canvas dims must be positive", path, lineno)
            canvas = Canvas(width=w, height=h)
        elif kind == "IOPIN":
            if len(toks) != 4:
                raise FormatSyntaxError("IOPIN <name> <x> <y>", path, lineno)
            name = toks[1]
            if name in seen_pins:
                raise DanglingReferenceError(f"duplicate io pin {name!r}", path, lineno)
            seen_pins.add(name)
            io_pins.append(
                IoPin(name, _as_float(toks[2], path, lineno), _as_float(toks[3], path, lineno))
            )
        elif kind == "BLOCKAGE":
            if len(toks) != 5:
                raise FormatSyntaxError("BLOCKAGE <lx> <ly> <ux> <uy>", path, lineno)
            vals = [_as_float(t, path, lineno) for t in toks[1:]]
            if vals[2] <= vals[0] or vals[3] <= vals[1]:
                raise FormatSyntaxError("blockage must have positive extent", path, lineno)
            blockages.append(Rect(*vals))
        elif kind == "PREPLACED":
            if len(toks) not in (4, 5):
                raise FormatSyntaxError("PREPLACED <inst> <lx> <ly> [<orient>]", path, lineno)
            orient = toks[4] if len(toks) == 5 else "R0"
            if orient not in ORIENT_CODES:
                raise FormatSyntaxError(f"unknown orientation {orient!r}", path, lineno)
            preplaced_raw.append(
                (toks[1], _as_float(toks[2], path, lineno), _as_float(toks[3], path, lineno), orient, lineno)
            )
        elif kind == "GUIDANCE":
            if len(toks) != 6:
                raise FormatSyntaxError(
                    "GUIDANCE <inst|module_path> <lx> <ly> <ux> <uy>", path, lineno
                )
            vals = [_as_float(t, path, lineno) for t in toks[2:]]
            if vals[2] <= vals[0] or vals[3] <= vals[1]:
                raise FormatSyntaxError("guidance must have positive extent", path, lineno)
            if toks[1] in guidance:
                raise DanglingReferenceError(f"duplicate guidance for {toks[1]!r}", path, lineno)
            guidance[toks[1]] = Rect(*vals)
        else:
            raise FormatSyntaxError(f"unknown record {kind!r}", path, lineno)

    if canvas is None:
        raise FormatSyntaxError("floorplan has no CANVAS record", path, 0)
    canvas.io_pins = io_pins
    canvas.blockages = blockages
    orients = {name: (x, y, orient, lineno) for name, x, y, orient, lineno in preplaced_raw}
    return canvas, guidance, orients  # type: ignore[return-value]


# ---------------------------------------------------------------------------
# cross-linking


def _on_boundary(p: IoPin, w: float, h: float, tol: float = 1e-9) -> bool:
    if not (-tol <= p.x <= w + tol and -tol <= p.y <= h + tol):
        return False
    return (
        abs(p.x) <= tol or abs(p.x - w) <= tol or abs(p.y) <= tol or abs(p.y - h) <= tol
    )


def link_design(
    masters: dict[str, Master],
    modules: dict[str, LogicalModule],
    root: LogicalModule,
    instances: dict[str, Instance],
    arcs: list[NetArc],
    canvas: Canvas,
    guidance: dict[str, Rect],
    preplaced_raw: dict,
    floorplan_path: str = "<floorplan>",
) -> DesignDatabase:
    pin_names = {p.name for p in canvas.io_pins}
    for p in canvas.io_pins:
        if not _on_boundary(p, canvas.width, canvas.height):
            raise PinOffBoundaryError(
                f"io pin {p.name!r} at ({p.x}, {p.y}) is not on the canvas boundary",
                floorplan_path,
            )
    for arc in arcs:
        for ep in (arc.driver, arc.sink):
            if ep.is_io and ep.pin not in pin_names:
                raise DanglingReferenceError(
                    f"net {arc.net!r} references undeclared io pin {ep.pin!r}",
                    floorplan_path,
                )
    outline = canvas.outline
    for b in canvas.blockages:
        if not outline.contains_rect(b):
            raise DanglingReferenceError(
                f"blockage {b} extends outside the canvas", floorplan_path
            )
    placed: list[PreplacedMacro] = []
    for name, (x, y, orient, lineno) in sorted(preplaced_raw.items()):
        inst = instances.get(name)
        if inst is None:
            raise DanglingReferenceError(
                f"preplaced instance {name!r} not in netlist", floorplan_path, lineno
            )
        if not inst.is_macro:
            raise DanglingReferenceError(
                f"preplaced instance {name!r} is not a macro", floorplan_path, lineno
            )
        rect = Rect(x, y, x + inst.master.width, y + inst.master.height)
        if not outline.contains_rect(rect):
            raise DanglingReferenceError(
                f"preplaced macro {name!r} extends outside the canvas", floorplan_path, lineno
            )
        placed.append(PreplacedMacro(inst=name, rect=rect, orient=orient))
    canvas.preplaced = placed
    for target in sorted(guidance):
        if target not in instances and target not in modules:
            raise DanglingReferenceError(
                f"guidance target {target!r} matches no instance or module",
                floorplan_path,
            )
    return DesignDatabase(
        masters=masters,
        instances=instances,
        modules=modules,
        root_module=root,
        arcs=arcs,
        canvas=canvas,
        guidance=dict(sorted(guidance.items())),
    )


def parse_design_text(
    netlist_text: str,
    library_text: str,
    floorplan_text: str,
    netlist_path: str = "<netlist>",
    library_path: str = "<library>",
    floorplan_path: str = "<floorplan>",
) -> DesignDatabase:
    masters = parse_library(library_text, library_path)
    modules, root, instances, arcs = parse_netlist(netlist_text, masters, netlist_path)
    canvas, guidance, preplaced = parse_floorplan(floorplan_text, floorplan_path)
    return link_design(
        masters, modules, root, instances, arcs, canvas, guidance, preplaced, floorplan_path
    )


def parse_design(netlist_path: str, library_path: str, floorplan_path: str) -> DesignDatabase:
    with open(netlist_path) as f:
        netlist_text = f.read()
    with open(library_path) as f:
        library_text = f.read()
    with open(floorplan_path) as f:
        floorplan_text = f.read()
    return parse_design_text(
        netlist_text, library_text, floorplan_text, netlist_path, library_path, floorplan_path
    )


# ---------------------------------------------------------------------------
# outputs


@dataclass
class MetricsReport:
    hpwl: float = 0.0
    dead_space_frac: float = 0.0
    num_trials: int = 0
    num_skipped: int = 0
    cost_breakdown: dict[str, float] = field(default_factory=dict)
    seed: int = 0
    wall_time: float = 0.0  # kept in memory only; not serialized


@dataclass
class PlacementResult:
    macro_placements: list[tuple[str, float, float, str]] = field(default_factory=list)
    stdcell_regions: list[tuple[str, Rect]] = field(default_factory=list)
    metrics: MetricsReport = field(default_factory=MetricsReport)


def format_placement(result: PlacementResult) -> str:
    lines = ["# macro placement"]
    for inst, lx, ly, orient in result.macro_placements:
        lines.append(f"MACRO {inst} {lx:.3f} {ly:.3f} {orient}")
    for cid, r in result.stdcell_regions:
        lines.append(f"REGION {cid} {r.lx:.3f} {r.ly:.3f} {r.ux:.3f} {r.uy:.3f}")
    return "\n".join(lines) + "\n"


def write_placement(result: PlacementResult, path: str) -> None:
    with open(path, "w") as f:
        f.write(format_placement(result))


def parse_placement(text: str, path: str = "<placement>") -> PlacementResult:
    result = PlacementResult()
    for lineno, toks in _records(text, path):
        kind = toks[0]
        if kind == "MACRO":
            if len(toks) != 5:
                raise FormatSyntaxError("MACRO <inst> <lx> <ly> <orient>", path, lineno)
            if toks[4] not in ORIENT_CODES:
                raise FormatSyntaxError(f"unknown orientation {toks[4]!r}", path, lineno)
            result.macro_placements.append(
                (toks[1], _as_float(toks[2], path, lineno), _as_float(toks[3], path, lineno), toks[4])
            )
        elif kind == "REGION":
            if len(toks) != 6:
                raise FormatSyntaxError("REGION <cluster_id> <lx> <ly> <ux> <uy>", path, lineno)
            vals = [_as_float(t, path, lineno) for t in toks[2:]]
            result.stdcell_regions.append((toks[1], Rect(*vals)))
        else:
            raise FormatSyntaxError(f"unknown record {kind!r}", path, lineno)
    return result


def format_metrics(metrics: MetricsReport) -> str:
    """Flat key=value text, deterministically ordered.

    wall_time is intentionally excluded so repeated runs produce
    byte-identical files.
    """
    items: dict[str, str] = {
        "hpwl": f"{metrics.hpwl:.3f}",
        "dead_space_frac": f"{metrics.dead_space_frac:.6f}",
        "num_trials": str(metrics.num_trials),
        "num_skipped": str(metrics.num_skipped),
        "seed": str(metrics.seed),
    }
    for key, val in metrics.cost_breakdown.items():
        items[f"cost.{key}"] = f"{val:.6f}"
    return "\n".join(f"{k}={items[k]}" for k in sorted(items)) + "\n"


def write_metrics(metrics: MetricsReport, path: str) -> None:
    with open(path, "w") as f:
        f.write(format_metrics(metrics))


def parse_metrics(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, val = line.partition("=")
        out[key] = val
    return out


# ---------------------------------------------------------------------------
# svg rendering

_KIND_FILL = {
    "stdcell": "#c8e6c9",
    "mixed": "#ffe0b2",
    "macro": "#bbdefb",
    "io_bundle": "#eeeeee",
}


def _svg_rect(r: Rect, ch: float, scale: float, fill: str, stroke: str, extra: str = "") -> str:
    # svg y axis points down; flip about the canvas height
    x = r.lx * scale
    y = (ch - r.uy) * scale
    return (
        f'<rect x="{x:.3f}" y="{y:.3f}" width="{r.width * scale:.3f}" '
        f'height="{r.height * scale:.3f}" fill="{fill}" stroke="{stroke}" {extra}/>'
    )


def svg_text(hierarchy, result: PlacementResult, level: int = 1, db=None) -> str:
    """Draw the canvas, cluster outlines at the given depth, and macros.

    hierarchy may be None when only macros/regions should be drawn.
    """
    if hierarchy is not None:
        max_depth = max((c.depth() for c in hierarchy.live_clusters()), default=0)
        if level > max_depth:
            raise ValueError(f"level {level} deeper than hierarchy (max {max_depth})")
    if db is not None:
        cw, ch = db.canvas.width, db.canvas.height
    else:
        cw = max([r.ux for _, r in result.stdcell_regions] + [1.0])
        ch = max([r.uy for _, r in result.stdcell_regions] + [1.0])
    scale = 900.0 / max(cw, ch)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{cw * scale:.0f}" '
        f'height="{ch * scale:.0f}" viewBox="0 0 {cw * scale:.3f} {ch * scale:.3f}">',
        _svg_rect(Rect(0, 0, cw, ch), ch, scale, "#ffffff", "#000000", 'stroke-width="2" '),
    ]
    if db is not None:
        for b in db.canvas.blockages:
            lines.append(_svg_rect(b, ch, scale, "#9e9e9e", "#616161"))
    if hierarchy is not None:
        for c in hierarchy.live_clusters():
            if c.depth() == level and c.placed_rect is not None and not c.fixed:
                lines.append(
                    _svg_rect(
                        c.placed_rect, ch, scale, "none", "#d32f2f", 'stroke-dasharray="6 3" '
                    )
                )
    for cid, r in result.stdcell_regions:
        lines.append(_svg_rect(r, ch, scale, _KIND_FILL["stdcell"], "#388e3c", 'opacity="0.6" '))
    for inst, lx, ly, orient in result.macro_placements:
        if db is not None and inst in db.instances:
            m = db.instances[inst].master
            r = Rect(lx, ly, lx + m.width, ly + m.height)
        else:
            r = Rect(lx, ly, lx + 1.0, ly + 1.0)
        lines.append(_svg_rect(r, ch, scale, _KIND_FILL["macro"], "#1565c0"))
    if db is not None:
        for p in db.canvas.io_pins:
            r = Rect(p.x - 0.002 * cw, p.y - 0.002 * ch, p.x + 0.002 * cw, p.y + 0.002 * ch)
            lines.append(_svg_rect(r, ch, scale, "#000000", "none"))
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_svg(hierarchy, result: PlacementResult, path: str, level: int = 1, db=None) -> None:
    with open(path, "w") as f:
        f.write(svg_text(hierarchy, result, level=level, db=db))
