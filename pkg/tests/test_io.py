"""Tests for file parsing, linking checks, writers and the SVG renderer."""

import random

import pytest

from hiermp.io import (
    DanglingReferenceError,
    DesignInputError,
    FormatSyntaxError,
    MetricsReport,
    PinOffBoundaryError,
    PlacementResult,
    format_metrics,
    format_placement,
    parse_design_text,
    parse_library,
    parse_metrics,
    parse_placement,
    svg_text,
)
from hiermp.model import PhysicalHierarchy, Rect

from conftest import BASIC_LIB, build_design


# ---------------------------------------------------------------------------
# happy-path parsing


def test_minimal_design(two_macro_db):
    db = two_macro_db
    assert set(db.instances) == {"a", "b"}
    assert db.instances["a"].master.width == 10.0
    assert len(db.arcs) == 2
    assert db.canvas.width == 100.0
    assert db.io_pin("p0").x == 0.0


def test_star_decomposition_four_pin_net():
    netlist = """\
MODULE top PARENT -
INST a inv top
INST b inv top
INST c inv top
INST d inv top
NET n1 a.y b.a c.a d.a
"""
    db = build_design(netlist, "CANVAS 10 10\n")
    assert len(db.arcs) == 3
    assert all(arc.driver.inst == "a" for arc in db.arcs)
    assert [arc.sink.inst for arc in db.arcs] == ["b", "c", "d"]
    assert all(arc.net == "n1" for arc in db.arcs)


def test_net_width_multiplies_nothing_but_is_recorded():
    netlist = """\
MODULE top PARENT -
INST a inv top
INST b inv top
NET bus WIDTH 64 a.y b.a
"""
    db = build_design(netlist, "CANVAS 10 10\n")
    assert len(db.arcs) == 1
    assert db.arcs[0].bitwidth == 64


def test_comments_and_blank_lines_are_skipped():
    lib = "# header\n\nMACRO m 2 3  # trailing comment\n"
    masters = parse_library(lib)
    assert masters["m"].width == 2.0


def test_module_tree_links():
    netlist = """\
MODULE top PARENT -
MODULE top.a PARENT top
MODULE top.a.b PARENT top.a
INST i0 inv top.a.b
"""
    db = build_design(netlist, "CANVAS 10 10\n")
    assert db.root_module.path == "top"
    assert db.modules["top.a.b"].parent is db.modules["top.a"]
    assert db.instances["i0"].module_path == "top.a.b"


def test_floorplan_records(two_macro_db):
    floorplan = """\
CANVAS 100 100
IOPIN p0 0 50
BLOCKAGE 10 10 20 20
PREPLACED b 50 50 MX
GUIDANCE a 0 0 30 30
"""
    netlist = """\
MODULE top PARENT -
INST a m10x20 top
INST b m10x20 top
NET n1 a.q b.d
"""
    db = build_design(netlist, floorplan)
    assert db.canvas.blockages == [Rect(10, 10, 20, 20)]
    assert len(db.canvas.preplaced) == 1
    p = db.canvas.preplaced[0]
    assert p.inst == "b" and p.orient == "MX"
    assert p.rect == Rect(50, 50, 60, 70)
    assert db.guidance["a"] == Rect(0, 0, 30, 30)
    # preplaced footprints join blockages as hard obstacles
    assert db.canvas.hard_blockages() == [Rect(10, 10, 20, 20), Rect(50, 50, 60, 70)]


# ---------------------------------------------------------------------------
# error reporting


def test_syntax_error_carries_location():
    with pytest.raises(FormatSyntaxError) as err:
        parse_library("MACRO only_two 1\n", path="lib.txt")
    assert "lib.txt:1" in str(err.value)


@pytest.mark.parametrize(
    "library",
    [
        "MACRO m 0 5\n",  # non-positive dims
        "STDCELL s -1\n",  # non-positive area
        "STDCELL s 1 XX\n",  # bad flag
        "WHAT is this\n",  # unknown record
    ],
)
def test_library_syntax_errors(library):
    with pytest.raises(FormatSyntaxError):
        parse_library(library)


def test_duplicate_master_rejected():
    with pytest.raises(DanglingReferenceError):
        parse_library("STDCELL s 1\nSTDCELL s 2\n")


@pytest.mark.parametrize(
    "netlist,kind",
    [
        ("MODULE top PARENT -\nINST a nosuch top\n", DanglingReferenceError),
        ("MODULE top PARENT -\nINST a inv nowhere\n", DanglingReferenceError),
        ("MODULE top PARENT -\nMODULE top PARENT -\n", DanglingReferenceError),
        ("MODULE top PARENT missing\n", DanglingReferenceError),
        ("MODULE a PARENT -\nMODULE b PARENT -\n", DanglingReferenceError),
        ("INST a inv top\n", DanglingReferenceError),
        ("MODULE top PARENT -\nINST a inv top\nNET n a.y\n", FormatSyntaxError),
        ("MODULE top PARENT -\nINST a inv top\nNET n a.y ghost.a\n", DanglingReferenceError),
        (
            "MODULE top PARENT -\nINST a inv top\nINST b inv top\n"
            "NET n a.y b.a\nNET n a.y b.b\n",
            DanglingReferenceError,
        ),
        ("MODULE top PARENT -\nINST a inv top\nINST b inv top\nNET n a b\n", FormatSyntaxError),
    ],
)
def test_netlist_errors(netlist, kind):
    with pytest.raises(kind):
        build_design(netlist, "CANVAS 10 10\n")


def test_io_pin_off_boundary_rejected():
    netlist = "MODULE top PARENT -\nINST a inv top\nINST b inv top\nNET n a.y b.a\n"
    with pytest.raises(PinOffBoundaryError):
        build_design(netlist, "CANVAS 100 100\nIOPIN p 50 120\n")
    # interior points are just as wrong as far-out ones
    with pytest.raises(PinOffBoundaryError):
        build_design(netlist, "CANVAS 100 100\nIOPIN p 50 50\n")


def test_undeclared_io_pin_in_net_rejected():
    netlist = "MODULE top PARENT -\nINST a inv top\nNET n PIN ghost a.a\n"
    with pytest.raises(DanglingReferenceError):
        build_design(netlist, "CANVAS 10 10\n")


def test_blockage_outside_canvas_rejected():
    netlist = "MODULE top PARENT -\nINST a inv top\nINST b inv top\nNET n a.y b.a\n"
    with pytest.raises(DanglingReferenceError):
        build_design(netlist, "CANVAS 10 10\nBLOCKAGE 5 5 15 8\n")


@pytest.mark.parametrize(
    "floorplan",
    [
        "CANVAS 100 100\nPREPLACED ghost 0 0\n",  # unknown instance
        "CANVAS 100 100\nPREPLACED s 0 0\n",  # not a macro
        "CANVAS 100 100\nPREPLACED a 95 95\n",  # footprint leaves the canvas
        "CANVAS 100 100\nGUIDANCE ghost 0 0 10 10\n",  # unknown target
    ],
)
def test_link_errors(floorplan):
    netlist = """\
MODULE top PARENT -
INST a m10x20 top
INST s inv top
NET n a.q s.a
"""
    with pytest.raises(DanglingReferenceError):
        build_design(netlist, floorplan)


def test_all_error_kinds_share_a_base():
    for kind in (FormatSyntaxError, DanglingReferenceError, PinOffBoundaryError):
        assert issubclass(kind, DesignInputError)
        assert issubclass(kind, ValueError)


# ---------------------------------------------------------------------------
# placement files


def test_format_placement_exact_text():
    result = PlacementResult(
        macro_placements=[("m1", 0.0, 2.5, "R0")],
        stdcell_regions=[("c3", Rect(1, 2, 3, 4))],
    )
    assert format_placement(result) == (
        "# macro placement\n"
        "MACRO m1 0.000 2.500 R0\n"
        "REGION c3 1.000 2.000 3.000 4.000\n"
    )


def test_placement_round_trip_on_grid_values():
    rng = random.Random(12)
    for _ in range(100):
        macros = []
        for k in range(rng.randrange(0, 6)):
            x = float(f"{rng.uniform(0, 500):.3f}")
            y = float(f"{rng.uniform(0, 500):.3f}")
            orient = rng.choice(["R0", "MX", "MY", "R180"])
            macros.append((f"m{k}", x, y, orient))
        regions = []
        for k in range(rng.randrange(0, 4)):
            lx = float(f"{rng.uniform(0, 100):.3f}")
            ly = float(f"{rng.uniform(0, 100):.3f}")
            w = float(f"{rng.uniform(0.001, 50):.3f}")
            h = float(f"{rng.uniform(0.001, 50):.3f}")
            regions.append((f"c{k}", Rect(lx, ly, lx + w, ly + h)))
        result = PlacementResult(macro_placements=macros, stdcell_regions=regions)
        back = parse_placement(format_placement(result))
        assert back.macro_placements == macros
        # rebuild rects from formatted endpoints: widths may re-quantize
        assert [
            (cid, f"{r.lx:.3f}", f"{r.ly:.3f}", f"{r.ux:.3f}", f"{r.uy:.3f}")
            for cid, r in back.stdcell_regions
        ] == [
            (cid, f"{r.lx:.3f}", f"{r.ly:.3f}", f"{r.ux:.3f}", f"{r.uy:.3f}")
            for cid, r in regions
        ]


def test_parse_placement_rejects_bad_records():
    with pytest.raises(FormatSyntaxError):
        parse_placement("MACRO m 0 0 R90\n")
    with pytest.raises(FormatSyntaxError):
        parse_placement("REGION c 1 2 3\n")
    with pytest.raises(FormatSyntaxError):
        parse_placement("SOMETHING else\n")


# ---------------------------------------------------------------------------
# metrics files


def test_metrics_round_trip_and_wall_time_exclusion():
    m = MetricsReport(
        hpwl=123.4567,
        dead_space_frac=0.25,
        num_trials=3,
        num_skipped=1,
        cost_breakdown={"level1": 1.25, "macro": 0.5},
        seed=42,
        wall_time=99.9,
    )
    text = format_metrics(m)
    assert "wall_time" not in text
    parsed = parse_metrics(text)
    assert parsed["hpwl"] == "123.457"
    assert parsed["dead_space_frac"] == "0.250000"
    assert parsed["num_trials"] == "3"
    assert parsed["num_skipped"] == "1"
    assert parsed["seed"] == "42"
    assert parsed["cost.level1"] == "1.250000"
    assert parsed["cost.macro"] == "0.500000"
    # deterministic ordering: sorted keys
    keys = [line.split("=")[0] for line in text.strip().splitlines()]
    assert keys == sorted(keys)


# ---------------------------------------------------------------------------
# svg rendering


def test_svg_canvas_only():
    text = svg_text(None, PlacementResult())
    assert text.count("<rect") == 1
    assert text.startswith("<?xml")
    assert "</svg>" in text


def test_svg_single_macro_scaled(two_macro_db):
    db = two_macro_db
    result = PlacementResult(macro_placements=[("a", 5.0, 5.0, "R0")])
    text = svg_text(None, result, db=db)
    # canvas + 1 macro + 1 io pin dot
    assert text.count("<rect") == 3
    # 10x20 master under scale 900/100
    assert 'width="90.000" height="180.000"' in text


def test_svg_draws_cluster_outlines_at_level():
    h = PhysicalHierarchy(num_level=2)
    for k in range(3):
        c = h.new_cluster(f"c{k}")
        c.placed_rect = Rect(10.0 * k, 0.0, 10.0 * k + 8.0, 12.0)
        h.root.attach(c)
    h.root.placed_rect = Rect(0, 0, 40, 40)
    text = svg_text(h, PlacementResult())
    assert text.count("stroke-dasharray") == 3


def test_svg_level_beyond_tree_raises():
    h = PhysicalHierarchy(num_level=2)
    c = h.new_cluster("c0")
    h.root.attach(c)
    with pytest.raises(ValueError):
        svg_text(h, PlacementResult(), level=5)


def test_svg_regions_and_blockages(two_macro_db):
    db = two_macro_db
    db.canvas.blockages = [Rect(0, 0, 10, 10)]
    result = PlacementResult(stdcell_regions=[("c1", Rect(20, 20, 40, 40))])
    text = svg_text(None, result, db=db)
    # canvas + blockage + region + io dot
    assert text.count("<rect") == 4
