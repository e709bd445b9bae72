"""Independent reference implementations used to cross-check the engine.

These are deliberately written in a different style from the package code
(plain dictionaries, quadratic loops) so that agreement is meaningful.
"""

import math


def sp_positions_oracle(pos, neg, widths, heights):
    """Block placement for a sequence pair via constraint-graph longest paths.

    pos/neg are permutations of hashable block ids; widths/heights map ids
    to dimensions.  Block a sits left of b when a precedes b in both
    sequences, and below b when a follows b in the positive sequence but
    precedes it in the negative one.  Returns (x, y, bbox_w, bbox_h) with
    the origin at the lower-left corner.
    """
    pi = {b: i for i, b in enumerate(pos)}
    ni = {b: i for i, b in enumerate(neg)}
    x = {}
    for b in pos:
        best = 0.0
        for a in pos:
            if a is not b and pi[a] < pi[b] and ni[a] < ni[b]:
                if x[a] + widths[a] > best:
                    best = x[a] + widths[a]
        x[b] = best
    y = {}
    for b in reversed(pos):
        best = 0.0
        for a in pos:
            if a is not b and pi[a] > pi[b] and ni[a] < ni[b]:
                if y[a] + heights[a] > best:
                    best = y[a] + heights[a]
        y[b] = best
    bw = max((x[b] + widths[b] for b in pos), default=0.0)
    bh = max((y[b] + heights[b] for b in pos), default=0.0)
    return x, y, bw, bh


def hop_flow_oracle(succ, source, num_hop_thr):
    """Layered shortest-hop search with information-flow accumulation.

    succ maps a vertex to a list of (successor, bus_width) pairs.  The
    flow into a vertex first reached at depth d sums min(flow(pred), w)
    over every arc from a depth d-1 vertex.  Returns ({target: hops},
    {target: flow}) for targets other than the source within the bound.
    """
    hops = {source: 0}
    flow = {source: math.inf}
    layer = [source]
    depth = 0
    while layer and depth < num_hop_thr:
        depth += 1
        frontier = set()
        for u in layer:
            for v, _ in succ.get(u, []):
                if v not in hops:
                    frontier.add(v)
        for v in frontier:
            hops[v] = depth
        for v in frontier:
            f = 0.0
            for u in layer:
                for vv, w in succ.get(u, []):
                    if vv == v:
                        f += min(flow[u], w)
            flow[v] = f
        layer = sorted(frontier)
    del hops[source]
    del flow[source]
    return hops, flow


def fine_shape_reference(
    outline_area,
    blocked_area,
    macroish_children,
    std_children,
    util,
    t_dead_space,
    tiny_thr,
):
    """Area accounting for specializing child curves to a parent outline.

    macroish_children: list of (min_fitting_tiling_area, std_cell_area)
    for children holding macros.  std_children: list of (num_std_cells,
    std_cell_area) for pure standard-cell children.  Returns
    (inflat_ratio, [area assigned to each std child]).
    """
    avail = outline_area - blocked_area
    parent_std = 0.0
    for min_area, std_area in macroish_children:
        parent_std += std_area
        if std_area == 0.0:
            avail -= min_area
        else:
            avail -= min_area + std_area / util
    for _, std_area in std_children:
        parent_std += std_area
    inflat_ratio = parent_std / (avail * (1.0 - t_dead_space))
    areas = []
    for num_cells, std_area in std_children:
        if num_cells < tiny_thr:
            areas.append(0.0)
        else:
            areas.append(std_area / inflat_ratio)
    return inflat_ratio, areas
