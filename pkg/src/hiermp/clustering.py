"""Multilevel autoclustering of the logical hierarchy.

The logical module tree is first mirrored one-to-one into a cluster tree,
then reworked level by level: clusters too large for their level dissolve
into their children or get bipartitioned, clusters too small merge with
similarly-connected neighbours.  Chip io pins are bundled into fixed
clusters on the outline boundary.  Afterwards mixed leaves split into a
macro half and a stdcell half, macro leaves regroup by connectivity
signature and footprint, and the cluster connectivity graph is built from
netlist arcs plus dataflow-derived virtual edges.
"""

from __future__ import annotations

import math
from collections import defaultdict, deque
from dataclasses import dataclass

from .dataflow import (
    add_virtual_edges,
    build_sequential_graph,
    compute_hops,
    vertex_cluster_map,
)
from .model import (
    IO_BUNDLE,
    MACRO,
    MIXED,
    STDCELL,
    Canvas,
    ClusterGraph,
    DesignDatabase,
    Instance,
    NetArc,
    PhysicalCluster,
    PhysicalHierarchy,
)
from .partition import recursive_split

DEFAULT_EPSILON_NET = 50.0
DEFAULT_NUM_SEGMENT = 4
# weight (times epsilon_net) of the virtual edge tying the two halves of a
# split mixed leaf together
PAIR_EDGE_FACTOR = 10.0

_EDGE_ORDER = ("bottom", "right", "top", "left")


# ---------------------------------------------------------------------------
# size thresholds


@dataclass(frozen=True)
class SizeThresholds:
    """Per-level cluster size band.

    max counts shrink geometrically with depth; min is half of max, so a
    cluster is well-sized when it lands in [max/2, max].
    """

    max_num_inst: int
    min_num_inst: float
    max_num_macro: int
    min_num_macro: float


def size_thresholds(
    level_id: int, total_inst: int, total_macro: int, level_ratio: float
) -> SizeThresholds:
    if level_id < 1:
        raise ValueError("level_id starts at 1")
    if level_ratio <= 0.0:
        raise ValueError("level_ratio must be positive")
    denom = level_ratio**level_id
    max_inst = math.ceil(total_inst / denom)
    max_macro = math.ceil(total_macro / denom)
    return SizeThresholds(
        max_num_inst=max_inst,
        min_num_inst=max_inst / 2.0,
        max_num_macro=max_macro,
        min_num_macro=max_macro / 2.0,
    )


# ---------------------------------------------------------------------------
# bundled io pins


def _locate_on_boundary(
    x: float, y: float, width: float, height: float, tol: float
) -> tuple[str, float]:
    """(edge, coordinate along it) for a boundary point.

    Corners belong to the edge that starts there walking counterclockwise
    from the origin: (0,0) bottom, (W,0) right, (W,H) top, (0,H) left.
    """
    if y <= tol and x <= width - tol:
        return "bottom", x
    if x >= width - tol and y <= height - tol:
        return "right", y
    if y >= height - tol and x >= tol:
        return "top", x
    if x <= tol and y >= tol:
        return "left", y
    # off-boundary points were rejected at parse time; snap to the closest
    # edge just in case
    d = [(y, "bottom", x), (width - x, "right", y), (height - y, "top", x), (x, "left", y)]
    _, edge, along = min(d)
    return edge, along


def create_bundled_pins(
    hierarchy: PhysicalHierarchy,
    canvas: Canvas,
    num_segment: int = DEFAULT_NUM_SEGMENT,
) -> list[PhysicalCluster]:
    """Bundle chip io pins into fixed boundary clusters under the root.

    Every boundary edge splits into num_segment equal spans, giving
    4*num_segment bundles (bottom, right, top, left order).  Each bundle
    is fixed at its span center; empty spans still get a bundle so the
    anchor set does not depend on the pin list.
    """
    if num_segment < 1:
        raise ValueError("num_segment must be >= 1")
    width, height = canvas.width, canvas.height
    tol = 1e-9 * max(width, height, 1.0)
    members: dict[tuple[str, int], list[str]] = defaultdict(list)
    for pin in canvas.io_pins:
        edge, along = _locate_on_boundary(pin.x, pin.y, width, height, tol)
        span = width if edge in ("bottom", "top") else height
        idx = min(int(along / (span / num_segment)), num_segment - 1)
        members[(edge, idx)].append(pin.name)

    bundles: list[PhysicalCluster] = []
    for edge in _EDGE_ORDER:
        span = width if edge in ("bottom", "top") else height
        step = span / num_segment
        for i in range(num_segment):
            mid = (i + 0.5) * step
            if edge == "bottom":
                pos = (mid, 0.0)
            elif edge == "right":
                pos = (width, mid)
            elif edge == "top":
                pos = (mid, height)
            else:
                pos = (0.0, mid)
            c = hierarchy.new_cluster(f"bp_{edge}_{i}")
            c.fixed = True
            c.fixed_pos = pos
            c.segment = (edge, i * step, (i + 1) * step)
            c.io_pin_names = sorted(members.get((edge, i), []))
            hierarchy.root.attach(c)
            bundles.append(c)
    return bundles


# ---------------------------------------------------------------------------
# connection signatures


def _arc_index(db: DesignDatabase) -> dict[str, list[NetArc]]:
    """Flat endpoint key -> incident net arcs."""
    index: dict[str, list[NetArc]] = defaultdict(list)
    for arc in db.arcs:
        dk = arc.driver.key()
        sk = arc.sink.key()
        index[dk].append(arc)
        if sk != dk:
            index[sk].append(arc)
    return index


def connection_counts(
    cluster: PhysicalCluster,
    references: list[PhysicalCluster],
    db: DesignDatabase,
    arc_index: dict[str, list[NetArc]] | None = None,
) -> list[float]:
    """Bit-weighted real connectivity from a cluster to each reference.

    An n-bit bus contributes n; arcs internal to the cluster contribute
    nothing.  References may be io bundles (matched through their pins).
    """
    if arc_index is None:
        arc_index = _arc_index(db)
    ref_of: dict[str, int] = {}
    for k, ref in enumerate(references):
        for inst in ref.subtree_instances():
            ref_of["i:" + inst.name] = k
        for pin in ref.io_pin_names:
            ref_of["io:" + pin] = k
    own = {"i:" + i.name for i in cluster.subtree_instances()}
    own.update("io:" + p for p in cluster.io_pin_names)

    counts = [0.0] * len(references)
    seen: set[int] = set()
    for key in own:
        for arc in arc_index.get(key, ()):
            if id(arc) in seen:
                continue
            seen.add(id(arc))
            for ep in (arc.driver.key(), arc.sink.key()):
                if ep not in own:
                    k = ref_of.get(ep)
                    if k is not None:
                        counts[k] += float(arc.bitwidth)
    return counts


def connection_signature(
    cluster: PhysicalCluster,
    references: list[PhysicalCluster],
    db: DesignDatabase,
    epsilon_net: float = DEFAULT_EPSILON_NET,
    arc_index: dict[str, list[NetArc]] | None = None,
) -> tuple[int, ...]:
    """Boolean vector: 1 where connectivity strictly exceeds epsilon_net."""
    counts = connection_counts(cluster, references, db, arc_index)
    return tuple(1 if c > epsilon_net else 0 for c in counts)


def _bus_similar(
    counts_a: list[float], counts_b: list[float], signature: tuple[int, ...]
) -> bool:
    # strengths on the strong bits must stay within a 2x band
    for bit, a, b in zip(signature, counts_a, counts_b):
        if bit and max(a, b) > 2.0 * min(a, b):
            return False
    return True


# ---------------------------------------------------------------------------
# merging undersized clusters


def _ancestor_path(cluster: PhysicalCluster) -> list[PhysicalCluster]:
    path: list[PhysicalCluster] = []
    node: PhysicalCluster | None = cluster
    while node is not None:
        path.append(node)
        node = node.parent
    path.reverse()
    return path


def _lca(clusters: list[PhysicalCluster]) -> PhysicalCluster:
    paths = [_ancestor_path(c) for c in clusters]
    lca = paths[0][0]
    for nodes in zip(*paths):
        first = nodes[0]
        if all(n is first for n in nodes[1:]):
            lca = first
        else:
            break
    return lca


def _drop_subtree(hierarchy: PhysicalHierarchy, cluster: PhysicalCluster) -> None:
    for node in list(cluster.iter_subtree()):
        hierarchy.drop(node)


def _absorb_into(
    hierarchy: PhysicalHierarchy, ref: PhysicalCluster, cand: PhysicalCluster
) -> None:
    """Move a candidate's instances into a reference cluster.

    Leaf references grow directly; internal references (already organized
    at an earlier level) collect merged payload in one glue leaf child so
    their existing children stay untouched.
    """
    insts = cand.subtree_instances()
    cand.detach()
    _drop_subtree(hierarchy, cand)
    target = ref
    if ref.children:
        glue_name = ref.name + ".merged"
        glue = next((ch for ch in ref.children if ch.name == glue_name), None)
        if glue is None:
            glue = hierarchy.new_cluster(glue_name)
            ref.attach(glue)
        target = glue
    target.instances = sorted(target.instances + insts, key=lambda i: i.name)


def merge_by_signature(
    candidates: list[PhysicalCluster],
    hierarchy: PhysicalHierarchy,
    db: DesignDatabase,
    epsilon_net: float = DEFAULT_EPSILON_NET,
) -> list[PhysicalCluster]:
    """Merge undersized clusters guided by their connectivity context.

    Reference clusters are the off-path children of the ancestors strictly
    above the candidates' lowest common ancestor.  A candidate whose real
    connectivity touches exactly one (non-bundle) reference is absorbed by
    it.  The remaining candidates group transitively when their boolean
    signatures are equal and per-reference strengths stay within a 2x
    band; each group of two or more becomes one new cluster attached at
    the group's common parent.  Returns clusters that grew or were born.
    """
    candidates = [c for c in candidates if c.parent is not None]
    if not candidates:
        return []
    lca = _lca(candidates)
    path = _ancestor_path(lca)
    on_path = {n.id for n in path}
    cand_ids = {c.id for c in candidates}
    references: list[PhysicalCluster] = []
    for node in path[:-1]:
        for ch in node.children:
            if ch.id not in on_path and ch.id not in cand_ids:
                references.append(ch)

    arc_index = _arc_index(db)
    rows = [connection_counts(c, references, db, arc_index) for c in candidates]
    sigs = [
        tuple(1 if x > epsilon_net else 0 for x in row) for row in rows
    ]

    results: list[PhysicalCluster] = []
    remaining: list[int] = []
    for i, (cand, row) in enumerate(zip(candidates, rows)):
        touched = [k for k, x in enumerate(row) if x > 0.0]
        if len(touched) == 1 and references[touched[0]].kind != IO_BUNDLE:
            _absorb_into(hierarchy, references[touched[0]], cand)
            results.append(references[touched[0]])
        else:
            remaining.append(i)

    # union-find over the remaining candidates
    uf = {i: i for i in remaining}

    def find(i: int) -> int:
        while uf[i] != i:
            uf[i] = uf[uf[i]]
            i = uf[i]
        return i

    for a_pos, i in enumerate(remaining):
        for j in remaining[a_pos + 1 :]:
            if sigs[i] == sigs[j] and _bus_similar(rows[i], rows[j], sigs[i]):
                ri, rj = find(i), find(j)
                if ri != rj:
                    uf[max(ri, rj)] = min(ri, rj)

    groups: dict[int, list[int]] = defaultdict(list)
    for i in remaining:
        groups[find(i)].append(i)
    for root_i in sorted(groups):
        group = groups[root_i]
        if len(group) < 2:
            continue
        members = sorted((candidates[i] for i in group), key=lambda c: c.id)
        parents = {m.parent.id for m in members if m.parent is not None}
        attach_to = members[0].parent if len(parents) == 1 else _lca(members)
        insts: list[Instance] = []
        for m in members:
            insts.extend(m.subtree_instances())
            m.detach()
            _drop_subtree(hierarchy, m)
        merged = hierarchy.new_cluster("+".join(sorted(m.name for m in members)))
        merged.instances = sorted(insts, key=lambda i: i.name)
        attach_to.attach(merged)
        results.append(merged)
    return results


# ---------------------------------------------------------------------------
# one level of breakup and merge


def single_level_autocluster(
    parent: PhysicalCluster,
    level_id: int,
    thresholds: SizeThresholds,
    seed: int,
    *,
    db: DesignDatabase,
    hierarchy: PhysicalHierarchy,
    epsilon_net: float = DEFAULT_EPSILON_NET,
) -> None:
    """Bring the children of one cluster into the level's size band.

    Oversized children with children of their own are replaced by those
    children (re-examined at this level); oversized flat children are
    bipartitioned recursively.  Undersized children become merge
    candidates.  A flat oversized parent grows partition children instead.
    Finally a lone remaining child that owns the parent's whole payload is
    collapsed into the parent.
    """
    del level_id  # encoded in the thresholds; kept for call-site clarity
    max_i, min_i = thresholds.max_num_inst, thresholds.min_num_inst
    max_m, min_m = thresholds.max_num_macro, thresholds.min_num_macro

    def oversize(c: PhysicalCluster) -> bool:
        return c.num_std_cell() > max_i or c.num_macro() > max_m

    def undersize(c: PhysicalCluster) -> bool:
        return c.num_std_cell() < min_i and c.num_macro() < min_m

    if not parent.children:
        if parent.instances and oversize(parent):
            parts = recursive_split(
                parent.instances, db, max_i, seed, max_num_macro=max_m
            )
            if len(parts) > 1:
                parent.instances = []
                for k, part in enumerate(parts):
                    child = hierarchy.new_cluster(f"{parent.name}.p{k}")
                    child.instances = part
                    parent.attach(child)
        return

    work: deque[PhysicalCluster] = deque(parent.children)
    for c in parent.children:
        c.parent = None
    parent.children = []
    survivors: list[PhysicalCluster] = []
    candidates: list[PhysicalCluster] = []
    split_counter = 0
    while work:
        c = work.popleft()
        if c.kind == IO_BUNDLE:
            survivors.append(c)
            continue
        if oversize(c):
            if c.children:
                # dissolve: its children take its place at this level
                spliced = list(c.children)
                if c.instances:
                    glue = hierarchy.new_cluster(f"{c.name}.self")
                    glue.instances = c.instances
                    c.instances = []
                    spliced.append(glue)
                for gc in spliced:
                    gc.parent = None
                c.children = []
                hierarchy.drop(c)
                work.extendleft(reversed(spliced))
            else:
                parts = recursive_split(
                    c.instances, db, max_i, seed + split_counter, max_num_macro=max_m
                )
                split_counter += 1
                if len(parts) <= 1:
                    survivors.append(c)
                else:
                    c.instances = []
                    hierarchy.drop(c)
                    repl = []
                    for k, part in enumerate(parts):
                        nc = hierarchy.new_cluster(f"{c.name}.p{k}")
                        nc.instances = part
                        repl.append(nc)
                    work.extendleft(reversed(repl))
        elif undersize(c):
            survivors.append(c)
            candidates.append(c)
        else:
            survivors.append(c)

    for c in survivors:
        parent.attach(c)
    if candidates:
        merge_by_signature(candidates, hierarchy, db, epsilon_net)

    # collapse a redundant wrapper: one surviving child owning everything
    # the parent owns adds a tree level without information
    if parent.parent is not None and not parent.instances and len(parent.children) == 1:
        only = parent.children[0]
        parent.children = []
        only.parent = None
        for gc in list(only.children):
            gc.parent = parent
            parent.children.append(gc)
        only.children = []
        parent.instances = only.instances
        only.instances = []
        hierarchy.drop(only)


# ---------------------------------------------------------------------------
# whole-tree driver


@dataclass
class _Ctx:
    db: DesignDatabase
    hierarchy: PhysicalHierarchy
    num_level: int
    level_ratio: float
    epsilon_net: float
    total_inst: int
    total_macro: int
    seed: int
    seed_counter: int = 0

    def next_seed(self) -> int:
        s = self.seed + 7919 * self.seed_counter
        self.seed_counter += 1
        return s


def _identity_map(hierarchy: PhysicalHierarchy, db: DesignDatabase) -> None:
    """Mirror the logical module tree into the cluster tree.

    Preplaced macros never enter a cluster.  A module holding both
    submodules and direct instances keeps the instances in a glue leaf
    child; empty modules are skipped.  Root-level instances always go into
    a glue child because the root later gains io bundle children.
    """
    placeable = {i.name for i in db.placeable_instances()}

    def build(mod, cluster: PhysicalCluster, is_root: bool) -> None:
        insts = sorted(
            (i for i in mod.instances if i.name in placeable), key=lambda i: i.name
        )
        kids: list[PhysicalCluster] = []
        for sub in mod.children:
            sc = hierarchy.new_cluster(sub.path)
            build(sub, sc, False)
            if sc.children or sc.instances:
                kids.append(sc)
            else:
                hierarchy.drop(sc)
        for k in kids:
            cluster.attach(k)
        if insts:
            if kids or is_root:
                glue = hierarchy.new_cluster(f"{mod.path}.self")
                glue.instances = insts
                cluster.attach(glue)
            else:
                cluster.instances = insts

    hierarchy.root.name = db.root_module.path
    build(db.root_module, hierarchy.root, True)


def _flatten_subtree(hierarchy: PhysicalHierarchy, cluster: PhysicalCluster) -> None:
    if not cluster.children:
        return
    insts = cluster.subtree_instances()
    for node in list(cluster.iter_subtree()):
        if node is not cluster:
            hierarchy.drop(node)
    cluster.children = []
    cluster.instances = sorted(insts, key=lambda i: i.name)


def _process(ctx: _Ctx, cluster: PhysicalCluster, level: int) -> None:
    if level > ctx.num_level:
        _flatten_subtree(ctx.hierarchy, cluster)
        return
    thr = size_thresholds(level, ctx.total_inst, ctx.total_macro, ctx.level_ratio)
    single_level_autocluster(
        cluster,
        level,
        thr,
        ctx.next_seed(),
        db=ctx.db,
        hierarchy=ctx.hierarchy,
        epsilon_net=ctx.epsilon_net,
    )
    for child in list(cluster.children):
        if child.kind == IO_BUNDLE or child.parent is not cluster:
            continue
        _process(ctx, child, level + 1)


def _split_mixed_leaves(
    hierarchy: PhysicalHierarchy, db: DesignDatabase
) -> list[tuple[int, int]]:
    """Split each mixed leaf into macro and stdcell siblings.

    Returns (macro cluster id, stdcell cluster id) pairs for the virtual
    edges that keep the halves together during placement.
    """
    pairs: list[tuple[int, int]] = []
    for leaf in sorted(hierarchy.leaves(), key=lambda c: c.id):
        if leaf.kind != MIXED or leaf.parent is None:
            continue
        macros = [i for i in leaf.instances if i.is_macro]
        stds = [i for i in leaf.instances if not i.is_macro]
        parent = leaf.parent
        idx = parent.children.index(leaf)
        mc = hierarchy.new_cluster(f"{leaf.name}.macro")
        mc.instances = macros
        mc.parent = parent
        sc = hierarchy.new_cluster(f"{leaf.name}.std")
        sc.instances = stds
        sc.parent = parent
        parent.children[idx : idx + 1] = [mc, sc]
        leaf.parent = None
        leaf.instances = []
        hierarchy.drop(leaf)
        pairs.append((mc.id, sc.id))
    return pairs


def _regroup_macros(
    hierarchy: PhysicalHierarchy,
    db: DesignDatabase,
    pairs: list[tuple[int, int]],
    epsilon_net: float,
) -> list[tuple[int, int]]:
    """Regroup each macro leaf by per-macro signature, then footprint.

    Macros inside one cluster that talk to different stdcell clusters, or
    that have different dimensions, end up in separate sibling clusters so
    each one can be tiled uniformly.  Split-pair bookkeeping follows the
    replacement clusters.
    """
    arc_index = _arc_index(db)
    references = [c for c in hierarchy.leaves() if c.kind == STDCELL]
    references += hierarchy.io_bundles()
    references.sort(key=lambda c: c.id)
    ref_of: dict[str, int] = {}
    for k, ref in enumerate(references):
        for inst in ref.subtree_instances():
            ref_of["i:" + inst.name] = k
        for pin in ref.io_pin_names:
            ref_of["io:" + pin] = k

    def inst_signature(inst: Instance) -> tuple[int, ...]:
        counts = [0.0] * len(references)
        key = "i:" + inst.name
        seen: set[int] = set()
        for arc in arc_index.get(key, ()):
            if id(arc) in seen:
                continue
            seen.add(id(arc))
            for ep in (arc.driver.key(), arc.sink.key()):
                if ep != key:
                    k = ref_of.get(ep)
                    if k is not None:
                        counts[k] += float(arc.bitwidth)
        return tuple(1 if x > epsilon_net else 0 for x in counts)

    replaced: dict[int, list[int]] = {}
    macro_leaves = sorted(
        (c for c in hierarchy.leaves() if c.kind == MACRO and c.parent is not None),
        key=lambda c: c.id,
    )
    for mc in macro_leaves:
        members = sorted(mc.instances, key=lambda i: i.name)
        groups: dict[tuple, list[Instance]] = {}
        for m in members:
            key = (inst_signature(m), (m.master.width, m.master.height))
            groups.setdefault(key, []).append(m)
        if len(groups) <= 1:
            continue
        parent = mc.parent
        idx = parent.children.index(mc)
        born: list[PhysicalCluster] = []
        for gi, insts in enumerate(groups.values()):
            gc = hierarchy.new_cluster(f"{mc.name}.g{gi}")
            gc.instances = insts
            gc.parent = parent
            born.append(gc)
        parent.children[idx : idx + 1] = born
        mc.parent = None
        mc.instances = []
        hierarchy.drop(mc)
        replaced[mc.id] = [g.id for g in born]

    out: list[tuple[int, int]] = []
    for mid, sid in pairs:
        for gid in replaced.get(mid, [mid]):
            out.append((gid, sid))
    return out


def _build_graph(
    hierarchy: PhysicalHierarchy,
    db: DesignDatabase,
    pairs: list[tuple[int, int]],
    epsilon_net: float,
) -> ClusterGraph:
    graph = ClusterGraph()
    vmap = vertex_cluster_map(hierarchy)
    for arc in db.arcs:
        a = vmap.get(arc.driver.key())
        b = vmap.get(arc.sink.key())
        if a is None or b is None:
            continue
        graph.add_real(a, b, float(arc.bitwidth))
    for mid, sid in pairs:
        graph.add_virtual(mid, sid, PAIR_EDGE_FACTOR * epsilon_net)
    return graph


def multilevel_autocluster(
    db: DesignDatabase,
    num_level: int = 2,
    level_ratio: float = 10.0,
    num_segment: int = DEFAULT_NUM_SEGMENT,
    seed: int = 0,
    epsilon_net: float = DEFAULT_EPSILON_NET,
    num_hop_thr: int = 4,
) -> tuple[PhysicalHierarchy, ClusterGraph]:
    """Build the physical hierarchy and its connectivity graph.

    Runs the identity mapping, io bundling, per-level breakup and merge,
    the mixed-leaf split, macro regrouping, and finally assembles real
    edges (summed arc bitwidths between leaves) plus virtual edges from
    split pairs and bounded-hop dataflow.
    """
    if num_level < 1:
        raise ValueError("num_level must be >= 1")
    hierarchy = PhysicalHierarchy(num_level)
    _identity_map(hierarchy, db)
    create_bundled_pins(hierarchy, db.canvas, num_segment)
    ctx = _Ctx(
        db=db,
        hierarchy=hierarchy,
        num_level=num_level,
        level_ratio=level_ratio,
        epsilon_net=epsilon_net,
        total_inst=db.total_std_cells(),
        total_macro=db.total_macros(),
        seed=seed,
    )
    _process(ctx, hierarchy.root, 1)
    pairs = _split_mixed_leaves(hierarchy, db)
    pairs = _regroup_macros(hierarchy, db, pairs, epsilon_net)
    graph = _build_graph(hierarchy, db, pairs, epsilon_net)
    seq = build_sequential_graph(db)
    table = compute_hops(seq, num_hop_thr=num_hop_thr)
    add_virtual_edges(graph, table, hierarchy)
    return hierarchy, graph
