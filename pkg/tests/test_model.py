"""Unit tests for the geometric primitives and the cluster data model."""

import random

import pytest

from hiermp.model import (
    IO_BUNDLE,
    MACRO,
    MIXED,
    ORIENT_CODES,
    STDCELL,
    Canvas,
    Instance,
    Master,
    PhysicalHierarchy,
    PinRef,
    PreplacedMacro,
    Rect,
    ShapeCurve,
    compose_orient,
)

MACRO_MASTER = Master(name="m10x20", is_macro=True, area=200.0, width=10.0, height=20.0)
STD_MASTER = Master(name="inv", is_macro=False, area=1.0)
FF_MASTER = Master(name="ff", is_macro=False, area=2.0, is_ff=True)


def make_inst(name: str, master: Master) -> Instance:
    return Instance(name=name, master=master, module_path="top")


# ---------------------------------------------------------------------------
# Rect


def test_rect_dimensions():
    r = Rect(1.0, 2.0, 4.0, 8.0)
    assert r.width == 3.0
    assert r.height == 6.0
    assert r.area == 18.0
    assert r.cx == 2.5
    assert r.cy == 5.0


def test_rect_overlap_area():
    a = Rect(0, 0, 10, 10)
    assert a.overlap_area(Rect(5, 5, 15, 15)) == 25.0
    assert a.overlap_area(Rect(20, 20, 30, 30)) == 0.0
    # rects sharing only an edge do not overlap
    assert a.overlap_area(Rect(10, 0, 20, 10)) == 0.0
    assert a.overlap_area(a) == 100.0


def test_rect_contains_point_includes_boundary():
    r = Rect(0, 0, 10, 10)
    assert r.contains_point(5, 5)
    assert r.contains_point(0, 0)
    assert r.contains_point(10, 10)
    assert not r.contains_point(10.001, 5)


def test_rect_contains_rect_with_tolerance():
    r = Rect(0, 0, 10, 10)
    assert r.contains_rect(Rect(2, 2, 8, 8))
    assert r.contains_rect(Rect(0, 0, 10, 10))
    # a hair outside still passes under the default tolerance
    assert r.contains_rect(Rect(0, 0, 10 + 1e-12, 10))
    assert not r.contains_rect(Rect(0, 0, 10.1, 10))


def test_rect_translated():
    r = Rect(1, 1, 2, 3).translated(10, -1)
    assert (r.lx, r.ly, r.ux, r.uy) == (11, 0, 12, 2)


# ---------------------------------------------------------------------------
# masters, instances, pin refs


def test_instance_forwards_master_properties():
    m = make_inst("a", MACRO_MASTER)
    s = make_inst("b", FF_MASTER)
    assert m.is_macro and not m.is_ff and m.area == 200.0
    assert not s.is_macro and s.is_ff and s.area == 2.0


def test_pinref_keys_cannot_collide():
    io = PinRef(inst=None, pin="x")
    inst = PinRef(inst="x", pin="d")
    assert io.is_io and not inst.is_io
    assert io.key() == "io:x"
    assert inst.key() == "i:x"
    assert io.key() != inst.key()


# ---------------------------------------------------------------------------
# orientation group


def test_orientation_codes():
    assert ORIENT_CODES == {"R0": 0, "MX": 1, "MY": 2, "R180": 3}


def test_orientation_composition_is_klein_group():
    names = list(ORIENT_CODES)
    for a in names:
        assert compose_orient(a, "R0") == a
        assert compose_orient("R0", a) == a
        # every element is its own inverse
        assert compose_orient(a, a) == "R0"
    assert compose_orient("MX", "MY") == "R180"
    assert compose_orient("MY", "MX") == "R180"
    assert compose_orient("MX", "R180") == "MY"
    # associativity over the whole table
    for a in names:
        for b in names:
            for c in names:
                assert compose_orient(compose_orient(a, b), c) == compose_orient(
                    a, compose_orient(b, c)
                )


# ---------------------------------------------------------------------------
# canvas


def test_canvas_outline_and_hard_blockages():
    canvas = Canvas(width=50.0, height=40.0)
    assert canvas.outline == Rect(0, 0, 50, 40)
    canvas.blockages = [Rect(0, 0, 5, 5)]
    canvas.preplaced = [PreplacedMacro(inst="a", rect=Rect(10, 10, 20, 30))]
    hard = canvas.hard_blockages()
    assert hard == [Rect(0, 0, 5, 5), Rect(10, 10, 20, 30)]


# ---------------------------------------------------------------------------
# shape curves


def test_shape_curve_min_area():
    disc = ShapeCurve(kind="discrete", points=((10, 20), (40, 20), (20, 40)))
    assert disc.min_area() == 200.0
    soft = ShapeCurve(kind="soft", area=123.0, ar_intervals=((0.5, 2.0),))
    assert soft.min_area() == 123.0
    assert ShapeCurve(kind="zero").min_area() == 0.0


def test_shape_curve_realize():
    soft = ShapeCurve(kind="soft", area=12.0, ar_intervals=((1.0 / 3.0, 3.0),))
    w, h = soft.realize(1.0 / 3.0)
    assert w == pytest.approx(6.0)
    assert h == pytest.approx(2.0)
    w, h = soft.realize(3.0)
    assert w == pytest.approx(2.0)
    assert h == pytest.approx(6.0)


def test_shape_curve_default_shapes():
    disc = ShapeCurve(kind="discrete", points=((40, 20), (10, 80), (20, 40)))
    # median of the sorted point list
    assert disc.default_shape() == (20, 40)
    soft = ShapeCurve(kind="soft", area=16.0, ar_intervals=((0.25, 4.0),))
    assert soft.default_shape() == pytest.approx((4.0, 4.0))
    # square not reachable: fall back to the first interval's midpoint
    skew = ShapeCurve(kind="soft", area=16.0, ar_intervals=((2.0, 4.0),))
    w, h = skew.default_shape()
    assert h / w == pytest.approx(3.0)
    assert ShapeCurve(kind="zero").default_shape() == (0.0, 0.0)


# ---------------------------------------------------------------------------
# cluster stats


def test_cluster_stats_empty(hierarchy=None):
    h = PhysicalHierarchy(num_level=2)
    c = h.new_cluster("c")
    assert c.num_std_cell() == 0
    assert c.num_macro() == 0
    assert c.std_cell_area() == 0.0
    assert c.macro_area() == 0.0
    assert c.kind == STDCELL


def test_cluster_stats_leaf_payload():
    h = PhysicalHierarchy(num_level=2)
    c = h.new_cluster("c")
    c.instances = [make_inst("i1", STD_MASTER), make_inst("i2", STD_MASTER),
                   make_inst("i3", STD_MASTER)]
    assert c.num_std_cell() == 3
    assert c.std_cell_area() == 3.0
    assert c.kind == STDCELL


def test_cluster_stats_aggregate_children():
    h = PhysicalHierarchy(num_level=2)
    parent = h.new_cluster("p")
    a = h.new_cluster("a")
    b = h.new_cluster("b")
    parent.attach(a)
    parent.attach(b)
    a.instances = [make_inst("m", MACRO_MASTER)]
    b.instances = [make_inst("s", FF_MASTER)]
    assert parent.num_macro() == 1
    assert parent.macro_area() == 200.0
    assert parent.num_std_cell() == 1
    assert parent.std_cell_area() == 2.0
    assert parent.kind == MIXED
    assert a.kind == MACRO


def test_cluster_stats_match_leaf_sums_on_random_trees():
    rng = random.Random(7)
    for _ in range(20):
        h = PhysicalHierarchy(num_level=3)
        nodes = [h.root]
        count = 0
        for _ in range(rng.randrange(2, 15)):
            parent = rng.choice(nodes)
            c = h.new_cluster(f"c{len(nodes)}")
            parent.attach(c)
            nodes.append(c)
            for _ in range(rng.randrange(0, 4)):
                master = rng.choice([MACRO_MASTER, STD_MASTER, FF_MASTER])
                c.instances.append(make_inst(f"i{count}", master))
                count += 1
        leaf_sum_macro = sum(
            1 for n in nodes for i in n.instances if i.is_macro
        )
        leaf_sum_std = sum(
            1 for n in nodes for i in n.instances if not i.is_macro
        )
        assert h.root.num_macro() == leaf_sum_macro
        assert h.root.num_std_cell() == leaf_sum_std


def test_cluster_kind_io_bundle():
    h = PhysicalHierarchy(num_level=2)
    b = h.new_cluster("bp")
    b.io_pin_names = ["p0"]
    assert b.kind == IO_BUNDLE
    fixed = h.new_cluster("corner")
    fixed.fixed = True
    assert fixed.kind == IO_BUNDLE


# ---------------------------------------------------------------------------
# hierarchy bookkeeping


def test_attach_detach_keeps_links_consistent():
    h = PhysicalHierarchy(num_level=2)
    a = h.new_cluster("a")
    h.root.attach(a)
    assert a.parent is h.root
    assert a in h.root.children
    a.detach()
    assert a.parent is None
    assert a not in h.root.children


def test_depth_counts_edges_to_root():
    h = PhysicalHierarchy(num_level=2)
    a = h.new_cluster("a")
    b = h.new_cluster("b")
    h.root.attach(a)
    a.attach(b)
    assert h.root.depth() == 0
    assert a.depth() == 1
    assert b.depth() == 2


def test_live_clusters_follow_the_tree():
    h = PhysicalHierarchy(num_level=2)
    a = h.new_cluster("a")
    b = h.new_cluster("b")
    h.root.attach(a)
    a.attach(b)
    assert {c.name for c in h.live_clusters()} == {"root", "a", "b"}
    b.detach()
    h.drop(b)
    assert {c.name for c in h.live_clusters()} == {"root", "a"}
    # ids are never reused
    c = h.new_cluster("c")
    assert c.id > b.id


def test_leaf_and_bundle_maps():
    h = PhysicalHierarchy(num_level=2)
    a = h.new_cluster("a")
    h.root.attach(a)
    inst = make_inst("i0", STD_MASTER)
    a.instances = [inst]
    bundle = h.new_cluster("bp_left_0")
    bundle.io_pin_names = ["p0", "p1"]
    bundle.fixed = True
    h.root.attach(bundle)
    assert h.leaf_of_instance()["i0"] is a
    assert h.bundle_of_pin()["p0"] is bundle
    assert h.bundle_of_pin()["p1"] is bundle
    assert h.io_bundles() == [bundle]


def test_reset_placement_spares_fixed_clusters():
    h = PhysicalHierarchy(num_level=2)
    a = h.new_cluster("a")
    h.root.attach(a)
    bundle = h.new_cluster("bp")
    bundle.fixed = True
    bundle.placed_rect = Rect(0, 0, 0, 0)
    h.root.attach(bundle)
    a.placed_rect = Rect(0, 0, 5, 5)
    a.fine_curve = ShapeCurve(kind="zero")
    h.reset_placement()
    assert a.placed_rect is None
    assert a.fine_curve is None
    assert bundle.placed_rect is not None
