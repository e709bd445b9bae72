"""Min-cut bipartitioning of netlist subsets.

A Fiduccia-Mattheyses style pass engine: gain-driven single-vertex moves
with an area balance cap, best-prefix rollback per pass, repeated until no
pass improves the cut (at most 10 passes).  Deterministic for a fixed seed.
"""

from __future__ import annotations

import heapq
import random
import statistics
from collections import defaultdict
from dataclasses import dataclass, field

from .model import DesignDatabase, Instance


class PartitionError(ValueError):
    """Raised when no balanced partition exists (e.g. one vertex too heavy)."""


@dataclass
class PartitionProblem:
    """Hypergraph with vertex weights and a balance cap.

    Each part of the result must weigh at most balance * total weight.
    Hyperedges are index lists into `names`.
    """

    names: list[str]
    weights: list[float]
    hyperedges: list[list[int]] = field(default_factory=list)
    balance: float = 0.55
    seed: int = 0


def _initial_sides(problem: PartitionProblem, cap: float) -> tuple[list[int], list[float]]:
    rng = random.Random(problem.seed)
    order = list(range(len(problem.names)))
    rng.shuffle(order)
    side = [0] * len(order)
    pw = [0.0, 0.0]
    for v in order:
        w = problem.weights[v]
        first = 0 if pw[0] <= pw[1] else 1
        if pw[first] + w <= cap:
            side[v] = first
        elif pw[1 - first] + w <= cap:
            side[v] = 1 - first
        else:
            raise PartitionError(
                f"cannot seed a balanced partition (vertex {problem.names[v]!r})"
            )
        pw[side[v]] += w
    return side, pw


def fm_bipartition(problem: PartitionProblem, max_passes: int = 10) -> tuple[list[int], int]:
    """Returns (side per vertex, cut size in hyperedges)."""
    n = len(problem.names)
    if n == 0:
        return [], 0
    total = sum(problem.weights)
    # small or lumpy weight sets can make balance * total unreachable by any
    # bipartition; a greedy longest-processing-time split always achieves
    # total/2 + max_weight/2, so relax the cap to that floor.  The floor
    # guarantees a feasible seed only in exact arithmetic; a hair of headroom
    # keeps float noise at a tie from rejecting both sides
    max_w = max(problem.weights) if problem.weights else 0.0
    cap = max(problem.balance * total, (total / 2.0 + max_w / 2.0) * (1.0 + 1e-9))
    for v, w in enumerate(problem.weights):
        if w > cap:
            raise PartitionError(
                f"vertex {problem.names[v]!r} weight {w} exceeds balance cap {cap}"
            )
    edges = [sorted(set(e)) for e in problem.hyperedges if len(set(e)) >= 2]
    edges_of: list[list[int]] = [[] for _ in range(n)]
    for ei, e in enumerate(edges):
        for v in e:
            edges_of[v].append(ei)

    side, pw = _initial_sides(problem, cap)

    def make_counts() -> list[list[int]]:
        cnt = [[0, 0] for _ in edges]
        for ei, e in enumerate(edges):
            for v in e:
                cnt[ei][side[v]] += 1
        return cnt

    def cut_of(cnt: list[list[int]]) -> int:
        return sum(1 for c0, c1 in cnt if c0 > 0 and c1 > 0)

    def gain_of(v: int, cnt: list[list[int]]) -> int:
        s = side[v]
        g = 0
        for ei in edges_of[v]:
            if cnt[ei][s] == 1:
                g += 1
            if cnt[ei][1 - s] == 0:
                g -= 1
        return g

    cnt = make_counts()
    cut = cut_of(cnt)

    for _ in range(max_passes):
        start_cut = cut
        locked = [False] * n
        gain = [gain_of(v, cnt) for v in range(n)]
        heap = [(-gain[v], v) for v in range(n)]
        heapq.heapify(heap)
        best_cut = cut
        best_side = side[:]
        blocked: list[tuple[int, int]] = []
        while heap or blocked:
            chosen = -1
            while heap:
                negg, v = heapq.heappop(heap)
                if locked[v] or -negg != gain[v]:
                    continue
                if pw[1 - side[v]] + problem.weights[v] > cap:
                    blocked.append((negg, v))
                    continue
                chosen = v
                break
            if chosen < 0:
                break
            v = chosen
            s = side[v]
            t = 1 - s
            for ei in edges_of[v]:
                was_cut = cnt[ei][0] > 0 and cnt[ei][1] > 0
                cnt[ei][s] -= 1
                cnt[ei][t] += 1
                now_cut = cnt[ei][0] > 0 and cnt[ei][1] > 0
                cut += int(now_cut) - int(was_cut)
            side[v] = t
            pw[s] -= problem.weights[v]
            pw[t] += problem.weights[v]
            locked[v] = True
            # refresh gains of unlocked vertices sharing an edge with v
            touched: set[int] = set()
            for ei in edges_of[v]:
                touched.update(edges[ei])
            for u in sorted(touched):
                if not locked[u]:
                    g = gain_of(u, cnt)
                    if g != gain[u]:
                        gain[u] = g
                        heapq.heappush(heap, (-g, u))
            # previously balance-blocked vertices may be movable now
            for item in blocked:
                heapq.heappush(heap, item)
            blocked = []
            if cut < best_cut:
                best_cut = cut
                best_side = side[:]
        side = best_side
        cnt = make_counts()
        cut = cut_of(cnt)
        pw = [0.0, 0.0]
        for v in range(n):
            pw[side[v]] += problem.weights[v]
        if cut >= start_cut:
            break
    return side, cut


# ---------------------------------------------------------------------------
# netlist-level helpers


def _instance_weights(instances: list[Instance]) -> list[float]:
    # balance is about distributing the standard-cell mass; macros are
    # regrouped later, so give them a nominal stdcell-sized weight instead
    # of letting one large macro make the 0.55 cap infeasible
    std_areas = [i.area for i in instances if not i.is_macro]
    macro_w = statistics.median(std_areas) if std_areas else 1.0
    return [macro_w if i.is_macro else i.area for i in instances]


def build_partition_problem(
    instances: list[Instance], db: DesignDatabase, seed: int, balance: float = 0.55
) -> PartitionProblem:
    """Hypergraph of the nets restricted to the given instance set."""
    order = sorted(instances, key=lambda i: i.name)
    index = {inst.name: k for k, inst in enumerate(order)}
    by_net: dict[str, set[int]] = defaultdict(set)
    for arc in db.arcs:
        pins = by_net[arc.net]
        for ep in (arc.driver, arc.sink):
            if ep.inst is not None and ep.inst in index:
                pins.add(index[ep.inst])
    hyperedges = [sorted(p) for net, p in sorted(by_net.items()) if len(p) >= 2]
    return PartitionProblem(
        names=[i.name for i in order],
        weights=_instance_weights(order),
        hyperedges=hyperedges,
        balance=balance,
        seed=seed,
    )


def split_instances(
    instances: list[Instance], db: DesignDatabase, seed: int, balance: float = 0.55
) -> tuple[list[Instance], list[Instance]]:
    problem = build_partition_problem(instances, db, seed, balance)
    order = sorted(instances, key=lambda i: i.name)
    side, _ = fm_bipartition(problem)
    part0 = [inst for k, inst in enumerate(order) if side[k] == 0]
    part1 = [inst for k, inst in enumerate(order) if side[k] == 1]
    if not part0 or not part1:
        raise PartitionError("bipartition produced an empty part")
    return part0, part1


def recursive_split(
    instances: list[Instance],
    db: DesignDatabase,
    max_num_inst: int,
    seed: int,
    max_num_macro: int | None = None,
) -> list[list[Instance]]:
    """Split until each part has fewer stdcells than max_num_inst.

    With max_num_macro given, parts holding more macros than that are also
    split (macro counts shrink because macros carry equal weights).
    """

    def needs_split(part: list[Instance]) -> bool:
        num_std = sum(1 for i in part if not i.is_macro)
        if num_std >= max_num_inst:
            return True
        if max_num_macro is not None:
            num_macro = len(part) - num_std
            if num_macro > max_num_macro:
                return True
        return False

    out: list[list[Instance]] = []
    work: list[list[Instance]] = [list(instances)]
    counter = 0
    while work:
        part = work.pop(0)
        if len(part) >= 2 and needs_split(part):
            a, b = split_instances(part, db, seed + counter)
            counter += 1
            work.append(a)
            work.append(b)
        else:
            out.append(part)
    return out


def recursive_bipartition(cluster, max_num_inst: int, seed: int, db: DesignDatabase, hierarchy):
    """Split an oversized flat cluster into new child clusters.

    Returns freshly created, unattached clusters named <cluster>.p<i>; a
    cluster already under the threshold is returned unchanged (as a
    singleton list).  The caller wires them into the tree.
    """
    if cluster.num_std_cell() < max_num_inst:
        return [cluster]
    parts = recursive_split(cluster.instances, db, max_num_inst, seed)
    out = []
    for k, part in enumerate(parts):
        child = hierarchy.new_cluster(f"{cluster.name}.p{k}")
        child.instances = part
        out.append(child)
    return out
