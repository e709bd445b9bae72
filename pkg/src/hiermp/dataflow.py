"""Dataflow analysis over the register/macro/io graph.

Combinational logic is transparent: the sequential graph keeps only
registered vertices (flip-flops, macros, chip io pins) and connects u -> v
when v is reachable from u through combinational cells without crossing
another registered vertex.  A bounded BFS from macros and io pins yields a
hop table; each (source, target) entry contributes a virtual connection
whose weight decays by a factor of two per hop.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

from .model import DesignDatabase


def _vertex_kind(db: DesignDatabase, key: str) -> str | None:
    """Registered-vertex kind for a flat endpoint key, else None."""
    if key.startswith("io:"):
        return "io"
    inst = db.instances[key[2:]]
    if inst.is_macro:
        return "macro"
    if inst.is_ff:
        return "ff"
    return None


@dataclass
class SequentialGraph:
    """Arcs between registered vertices with summed bus widths."""

    vertices: list[str] = field(default_factory=list)
    kinds: dict[str, str] = field(default_factory=dict)
    arcs: dict[str, list[tuple[str, float]]] = field(default_factory=dict)

    def successors(self, v: str) -> list[tuple[str, float]]:
        return self.arcs.get(v, [])


def build_sequential_graph(db: DesignDatabase) -> SequentialGraph:
    """Collapse combinational paths into direct registered-to-registered arcs.

    The width of an arc u -> v sums the bitwidths of the distinct netlist
    arcs that finally enter v along some combinational path from u; an
    n-bit bus fanning through buffers still counts n once per entered arc.
    """
    succs: dict[str, list[tuple[str, int, int]]] = defaultdict(list)
    for idx, arc in enumerate(db.arcs):
        succs[arc.driver.key()].append((arc.sink.key(), arc.bitwidth, idx))

    g = SequentialGraph()
    keys: list[str] = ["io:" + p.name for p in db.canvas.io_pins]
    keys += ["i:" + name for name in sorted(db.instances)]
    for key in keys:
        kind = _vertex_kind(db, key)
        if kind is not None:
            g.vertices.append(key)
            g.kinds[key] = kind

    registered = set(g.vertices)
    for u in g.vertices:
        # expand combinational fan-out of u; dedupe by final arc index
        final_arcs: dict[str, set[tuple[int, int]]] = defaultdict(set)
        seen_comb: set[str] = set()
        stack: list[str] = []
        for v, bw, idx in succs.get(u, []):
            if v in registered:
                final_arcs[v].add((idx, bw))
            elif v not in seen_comb:
                seen_comb.add(v)
                stack.append(v)
        while stack:
            c = stack.pop()
            for v, bw, idx in succs.get(c, []):
                if v in registered:
                    final_arcs[v].add((idx, bw))
                elif v not in seen_comb:
                    seen_comb.add(v)
                    stack.append(v)
        if final_arcs:
            g.arcs[u] = [
                (t, float(sum(bw for _, bw in ids)))
                for t, ids in sorted(final_arcs.items())
            ]
    return g


@dataclass
class HopTable:
    """Shortest hop counts and accumulated information flow per pair.

    Keys are (source, target) vertex keys; sources are macros and io pins,
    targets any registered vertex reached within num_hop_thr hops.
    """

    num_hops: dict[tuple[str, str], int] = field(default_factory=dict)
    flows: dict[tuple[str, str], float] = field(default_factory=dict)
    num_hop_thr: int = 4


def compute_hops(
    graph: SequentialGraph,
    sources: list[str] | None = None,
    num_hop_thr: int = 4,
) -> HopTable:
    """Bounded BFS from every source (default: all macros and io pins).

    Flow accumulates layer by layer: reaching t at shortest distance d,
    flow(s, t) = sum over predecessors p at d-1 of min(flow(s, p), w(p, t)).
    Parallel shortest paths add; longer paths are ignored.
    """
    table = HopTable(num_hop_thr=num_hop_thr)
    if sources is None:
        sources = [v for v in graph.vertices if graph.kinds[v] in ("macro", "io")]
    for s in sources:
        dist: dict[str, int] = {s: 0}
        flow: dict[str, float] = {s: math.inf}
        frontier: list[str] = [s]
        for depth in range(1, num_hop_thr + 1):
            gains: dict[str, float] = defaultdict(float)
            order: list[str] = []
            for u in frontier:
                fu = flow[u]
                for v, w in graph.successors(u):
                    d = dist.get(v)
                    if d is None:
                        dist[v] = depth
                        order.append(v)
                        gains[v] += min(fu, w)
                    elif d == depth:
                        gains[v] += min(fu, w)
            for v in order:
                flow[v] = gains[v]
            frontier = order
            if not frontier:
                break
        for t, d in dist.items():
            if t != s:
                table.num_hops[(s, t)] = d
                table.flows[(s, t)] = flow[t]
    return table


def virtual_weight(information_flow: float, num_hops: int, num_hop_thr: int = 4) -> float:
    """Flow halved per hop; beyond the hop threshold the weight is zero."""
    if num_hops < 1 or num_hops > num_hop_thr:
        return 0.0
    return information_flow / float(2 ** num_hops)


def vertex_cluster_map(hierarchy) -> dict[str, int]:
    """Map flat vertex keys onto leaf cluster / io bundle ids."""
    mapping: dict[str, int] = {}
    for c in hierarchy.leaves():
        for inst in c.instances:
            mapping["i:" + inst.name] = c.id
    for b in hierarchy.io_bundles():
        for pin in b.io_pin_names:
            mapping["io:" + pin] = b.id
    return mapping


def add_virtual_edges(cluster_graph, table: HopTable, hierarchy) -> int:
    """Accumulate hop-table entries onto the cluster graph.

    Endpoints resolve to leaf clusters and io bundles of the hierarchy;
    entries whose endpoints fall in the same cluster, or whose endpoint is
    unclustered (a preplaced macro), contribute nothing.  Returns the
    number of entries applied.
    """
    vertex_cluster = vertex_cluster_map(hierarchy)
    applied = 0
    for (s, t), hops in sorted(table.num_hops.items()):
        cs = vertex_cluster.get(s)
        ct = vertex_cluster.get(t)
        if cs is None or ct is None or cs == ct:
            continue
        w = virtual_weight(table.flows[(s, t)], hops, table.num_hop_thr)
        if w > 0.0:
            cluster_graph.add_virtual(cs, ct, w)
            applied += 1
    return applied
