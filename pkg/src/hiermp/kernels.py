"""Compiled simulated-annealing engine for sequence-pair packing.

One kernel family serves coarse-shaping tilings, cluster placement and
macro placement; they differ only in the fourth move operator and in which
cost terms carry weight.  Everything inside the move loop is numba-compiled
and allocation-free; the RNG is an in-kernel xorshift64* so worker runs are
deterministic and thread-independent.

Cost terms, in fixed order:
  0 area, 1 wirelength, 2 outline, 3 bias, 4 blockage, 5 guidance, 6 notch,
  7 hard-blockage overlap (validity only, never weighted).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

U64 = np.uint64

NUM_TERMS = 8
TERM_NAMES = ("area", "wl", "outline", "bias", "blockage", "guidance", "notch")

# move operators: swap in pos / swap in neg / swap pair in both / op4
OP_PROBS = (0.3, 0.3, 0.3, 0.1)

OP4_RESIZE = 0
OP4_FLIP = 1
OP4_NONE = 2


@njit(cache=True, nogil=True, inline="always")
def _rng_next(s):
    s ^= s >> U64(12)
    s ^= (s << U64(25)) & U64(0xFFFFFFFFFFFFFFFF)
    s ^= s >> U64(27)
    return s


@njit(cache=True, nogil=True, inline="always")
def _rng_f64(s):
    s = _rng_next(s)
    x = (s * U64(0x2545F4914F6CDD1D)) >> U64(11)
    return s, x * (1.0 / 9007199254740992.0)


@njit(cache=True, nogil=True)
def _eval_terms(
    pos,
    neg,
    w,
    h,
    is_macroish,
    e_a,
    e_b,
    e_w,
    term_x,
    term_y,
    blk,
    nb_hard,
    guid,
    guid_mask,
    ow,
    oh,
    notch_cell,
    notch_min,
    use_term,
    xbuf,
    ybuf,
    ninv,
    occ,
    stk,
    ncx,
    ncy,
    terms,
):
    n = pos.shape[0]
    for k in range(n):
        ninv[neg[k]] = k

    # x from the weighted common subsequence over (pos, neg); a block's left
    # edge is the max right edge among blocks before it in both sequences
    bw_ = 0.0
    for k in range(n):
        b = pos[k]
        mb = ninv[b]
        best = 0.0
        for k2 in range(k):
            a = pos[k2]
            if ninv[a] < mb:
                t = xbuf[a] + w[a]
                if t > best:
                    best = t
        xbuf[b] = best
        if best + w[b] > bw_:
            bw_ = best + w[b]
    # y symmetric on (reversed pos, neg)
    bh_ = 0.0
    for k in range(n - 1, -1, -1):
        b = pos[k]
        mb = ninv[b]
        best = 0.0
        for k2 in range(n - 1, k, -1):
            a = pos[k2]
            if ninv[a] < mb:
                t = ybuf[a] + h[a]
                if t > best:
                    best = t
        ybuf[b] = best
        if best + h[b] > bh_:
            bh_ = best + h[b]

    terms[0] = bw_ * bh_

    wl = 0.0
    for m in range(e_a.shape[0]):
        a = e_a[m]
        ax = xbuf[a] + 0.5 * w[a]
        ay = ybuf[a] + 0.5 * h[a]
        bidx = e_b[m]
        if bidx >= n:
            bx = term_x[bidx - n]
            by = term_y[bidx - n]
        else:
            bx = xbuf[bidx] + 0.5 * w[bidx]
            by = ybuf[bidx] + 0.5 * h[bidx]
        dx = ax - bx
        if dx < 0.0:
            dx = -dx
        dy = ay - by
        if dy < 0.0:
            dy = -dy
        wl += e_w[m] * (dx + dy)
    terms[1] = wl

    out_area = 0.0
    for i in range(n):
        wi = w[i]
        hi = h[i]
        if wi <= 0.0 or hi <= 0.0:
            continue
        lx = xbuf[i]
        ly = ybuf[i]
        iw = min(lx + wi, ow) - max(lx, 0.0)
        ih = min(ly + hi, oh) - max(ly, 0.0)
        if iw < 0.0:
            iw = 0.0
        if ih < 0.0:
            ih = 0.0
        ex = wi * hi - iw * ih
        # exact-fit outlines leave ~1e-15 residue; snap it so validity stays exact
        if ex < 1e-9 * wi * hi:
            ex = 0.0
        out_area += ex
    terms[2] = out_area

    bias = 0.0
    if use_term[3] != 0:
        for i in range(n):
            if is_macroish[i] == 0:
                continue
            lx = xbuf[i]
            ly = ybuf[i]
            d = lx
            if ly < d:
                d = ly
            t = ow - (lx + w[i])
            if t < d:
                d = t
            t = oh - (ly + h[i])
            if t < d:
                d = t
            if d > 0.0:
                bias += d
        bias /= ow + oh
    terms[3] = bias

    blocked = 0.0
    hard = 0.0
    if blk.shape[0] > 0:
        for i in range(n):
            if is_macroish[i] == 0:
                continue
            lx = xbuf[i]
            ly = ybuf[i]
            ux = lx + w[i]
            uy = ly + h[i]
            for r in range(blk.shape[0]):
                iw = min(ux, blk[r, 2]) - max(lx, blk[r, 0])
                if iw <= 0.0:
                    continue
                ih = min(uy, blk[r, 3]) - max(ly, blk[r, 1])
                if ih <= 0.0:
                    continue
                o = iw * ih
                if o < 1e-9 * w[i] * h[i]:
                    o = 0.0
                blocked += o
                if r < nb_hard:
                    hard += o
    terms[4] = blocked / (ow * oh)
    terms[7] = hard

    gpen = 0.0
    if use_term[5] != 0:
        for i in range(n):
            if guid_mask[i] == 0:
                continue
            cx = xbuf[i] + 0.5 * w[i]
            cy = ybuf[i] + 0.5 * h[i]
            dx = guid[i, 0] - cx
            t = cx - guid[i, 2]
            if t > dx:
                dx = t
            if dx < 0.0:
                dx = 0.0
            dy = guid[i, 1] - cy
            t = cy - guid[i, 3]
            if t > dy:
                dy = t
            if dy < 0.0:
                dy = 0.0
            gpen += dx + dy
        gpen /= ow + oh
    terms[5] = gpen

    notch = 0.0
    if use_term[6] != 0 and notch_cell > 0.0:
        ncells = ncx * ncy
        for c in range(ncells):
            occ[c] = 0
        # cells whose center lies beyond the outline never count as whitespace
        for jj in range(ncy):
            cyc = (jj + 0.5) * notch_cell
            if cyc > oh:
                for ii in range(ncx):
                    occ[jj * ncx + ii] = 1
        for ii in range(ncx):
            cxc = (ii + 0.5) * notch_cell
            if cxc > ow:
                for jj in range(ncy):
                    occ[jj * ncx + ii] = 1
        # occupancy: placed children plus hard blockages
        for i in range(n):
            wi = w[i]
            hi = h[i]
            if wi <= 0.0 or hi <= 0.0:
                continue
            lx = xbuf[i]
            ly = ybuf[i]
            _mark_cells(occ, lx, ly, lx + wi, ly + hi, notch_cell, ncx, ncy)
        for r in range(nb_hard):
            _mark_cells(occ, blk[r, 0], blk[r, 1], blk[r, 2], blk[r, 3], notch_cell, ncx, ncy)
        # whitespace components with a thin bounding box are notches
        for c0 in range(ncells):
            if occ[c0] != 0:
                continue
            occ[c0] = 2
            stk[0] = c0
            top = 1
            cnt = 0
            mini = ncx
            maxi = -1
            minj = ncy
            maxj = -1
            while top > 0:
                top -= 1
                c = stk[top]
                cnt += 1
                jj = c // ncx
                ii = c - jj * ncx
                if ii < mini:
                    mini = ii
                if ii > maxi:
                    maxi = ii
                if jj < minj:
                    minj = jj
                if jj > maxj:
                    maxj = jj
                if ii > 0 and occ[c - 1] == 0:
                    occ[c - 1] = 2
                    stk[top] = c - 1
                    top += 1
                if ii < ncx - 1 and occ[c + 1] == 0:
                    occ[c + 1] = 2
                    stk[top] = c + 1
                    top += 1
                if jj > 0 and occ[c - ncx] == 0:
                    occ[c - ncx] = 2
                    stk[top] = c - ncx
                    top += 1
                if jj < ncy - 1 and occ[c + ncx] == 0:
                    occ[c + ncx] = 2
                    stk[top] = c + ncx
                    top += 1
            bbw = (maxi - mini + 1) * notch_cell
            bbh = (maxj - minj + 1) * notch_cell
            if bbw < notch_min or bbh < notch_min:
                notch += cnt * notch_cell * notch_cell
        notch /= ow * oh
    terms[6] = notch


@njit(cache=True, nogil=True, inline="always")
def _mark_cells(occ, lx, ly, ux, uy, cell, ncx, ncy):
    i0 = int(lx / cell)
    if i0 < 0:
        i0 = 0
    i1 = int(ux / cell)
    if i1 > ncx - 1:
        i1 = ncx - 1
    j0 = int(ly / cell)
    if j0 < 0:
        j0 = 0
    j1 = int(uy / cell)
    if j1 > ncy - 1:
        j1 = ncy - 1
    for jj in range(j0, j1 + 1):
        cyc = (jj + 0.5) * cell
        if cyc < ly or cyc > uy:
            continue
        base = jj * ncx
        for ii in range(i0, i1 + 1):
            cxc = (ii + 0.5) * cell
            if lx <= cxc <= ux:
                occ[base + ii] = 1


@njit(cache=True, nogil=True, inline="always")
def _weighted_cost(terms, weights, norms):
    c = 0.0
    for t in range(7):
        if norms[t] > 0.0:
            c += weights[t] * terms[t] / norms[t]
    return c


@njit(cache=True, nogil=True)
def _rand_move(
    s,
    flip_count,
    pos,
    neg,
    w,
    h,
    orient,
    disc_off,
    disc_w,
    disc_h,
    area,
    ar_off,
    ar_lo,
    ar_hi,
    op4_mode,
):
    """Apply one random move in place.

    Returns (seed, flip_count, op, i, j, k, old_w, old_h) with enough
    information to undo the move.  The returned op disambiguates the
    fourth operator: 3 = resize, 5 = flip, 4 = no-op.
    """
    n = pos.shape[0]
    s, u = _rng_f64(s)
    if u < 0.3:
        op = 0
    elif u < 0.6:
        op = 1
    elif u < 0.9:
        op = 2
    else:
        op = 3
    if n < 2 and op != 3:
        op = 3
    if op == 3:
        if op4_mode == OP4_FLIP:
            op = 5
        elif op4_mode == OP4_NONE:
            op = 2 if n >= 2 else 4  # 4 = explicit no-op

    i = 0
    j = 0
    k = 0
    old_w = 0.0
    old_h = 0.0
    if op == 0 or op == 1 or op == 2:
        s, u = _rng_f64(s)
        i = int(u * n)
        if i > n - 1:
            i = n - 1
        s, u = _rng_f64(s)
        j = int(u * (n - 1))
        if j > n - 2:
            j = n - 2
        if j >= i:
            j += 1
        if op == 0:
            t = pos[i]
            pos[i] = pos[j]
            pos[j] = t
        elif op == 1:
            t = neg[i]
            neg[i] = neg[j]
            neg[j] = t
        else:
            a = pos[i]
            b = pos[j]
            pos[i] = b
            pos[j] = a
            ia = -1
            ib = -1
            for q in range(n):
                if neg[q] == a:
                    ia = q
                elif neg[q] == b:
                    ib = q
            t = neg[ia]
            neg[ia] = neg[ib]
            neg[ib] = t
    elif op == 3:
        s, u = _rng_f64(s)
        k = int(u * n)
        if k > n - 1:
            k = n - 1
        old_w = w[k]
        old_h = h[k]
        nd = disc_off[k + 1] - disc_off[k]
        if nd > 0:
            s, u = _rng_f64(s)
            pick = disc_off[k] + int(u * nd)
            if pick > disc_off[k + 1] - 1:
                pick = disc_off[k + 1] - 1
            w[k] = disc_w[pick]
            h[k] = disc_h[pick]
        else:
            na = ar_off[k + 1] - ar_off[k]
            if na > 0 and area[k] > 0.0:
                s, u = _rng_f64(s)
                pick = ar_off[k] + int(u * na)
                if pick > ar_off[k + 1] - 1:
                    pick = ar_off[k + 1] - 1
                s, u = _rng_f64(s)
                ar = ar_lo[pick] + u * (ar_hi[pick] - ar_lo[pick])
                w[k] = np.sqrt(area[k] / ar)
                h[k] = area[k] / w[k]
    elif op == 5:
        # flip every macro; axis alternates MY (2), MX (1)
        axis = 2 if flip_count % 2 == 0 else 1
        flip_count += 1
        for q in range(n):
            orient[q] ^= axis
    return s, flip_count, op, i, j, k, old_w, old_h


@njit(cache=True, nogil=True)
def _undo_move(flip_count, pos, neg, w, h, orient, op, i, j, k, old_w, old_h):
    n = pos.shape[0]
    if op == 0:
        t = pos[i]
        pos[i] = pos[j]
        pos[j] = t
    elif op == 1:
        t = neg[i]
        neg[i] = neg[j]
        neg[j] = t
    elif op == 2:
        a = pos[i]
        b = pos[j]
        pos[i] = b
        pos[j] = a
        ia = -1
        ib = -1
        for q in range(n):
            if neg[q] == a:
                ia = q
            elif neg[q] == b:
                ib = q
        t = neg[ia]
        neg[ia] = neg[ib]
        neg[ib] = t
    elif op == 3:
        w[k] = old_w
        h[k] = old_h
    elif op == 5:
        axis = 1 if flip_count % 2 == 0 else 2
        flip_count -= 1
        for q in range(n):
            orient[q] ^= axis
    return flip_count


@njit(cache=True, nogil=True)
def calibrate_walk(
    pos,
    neg,
    w,
    h,
    orient,
    disc_off,
    disc_w,
    disc_h,
    area,
    ar_off,
    ar_lo,
    ar_hi,
    is_macroish,
    e_a,
    e_b,
    e_w,
    term_x,
    term_y,
    blk,
    nb_hard,
    guid,
    guid_mask,
    ow,
    oh,
    notch_cell,
    notch_min,
    use_term,
    op4_mode,
    seed,
    out_terms,
):
    """Accept-all random walk; row 0 holds the initial state's raw terms."""
    n = pos.shape[0]
    xbuf = np.zeros(n, dtype=np.float64)
    ybuf = np.zeros(n, dtype=np.float64)
    ninv = np.zeros(n, dtype=np.int64)
    ncx = 0
    ncy = 0
    if notch_cell > 0.0:
        ncx = int(np.ceil(ow / notch_cell))
        ncy = int(np.ceil(oh / notch_cell))
    occ = np.zeros(max(ncx * ncy, 1), dtype=np.int8)
    stk = np.zeros(max(ncx * ncy, 1), dtype=np.int64)
    terms = np.zeros(NUM_TERMS, dtype=np.float64)

    s = seed
    if s == U64(0):
        s = U64(0x9E3779B97F4A7C15)
    flip_count = 0
    _eval_terms(
        pos, neg, w, h, is_macroish, e_a, e_b, e_w, term_x, term_y, blk, nb_hard,
        guid, guid_mask, ow, oh, notch_cell, notch_min, use_term,
        xbuf, ybuf, ninv, occ, stk, ncx, ncy, terms,
    )
    for t in range(NUM_TERMS):
        out_terms[0, t] = terms[t]
    steps = out_terms.shape[0] - 1
    for step in range(steps):
        s, flip_count, op, i, j, k, o_w, o_h = _rand_move(
            s, flip_count, pos, neg, w, h, orient,
            disc_off, disc_w, disc_h, area, ar_off, ar_lo, ar_hi, op4_mode,
        )
        _eval_terms(
            pos, neg, w, h, is_macroish, e_a, e_b, e_w, term_x, term_y, blk, nb_hard,
            guid, guid_mask, ow, oh, notch_cell, notch_min, use_term,
            xbuf, ybuf, ninv, occ, stk, ncx, ncy, terms,
        )
        for t in range(NUM_TERMS):
            out_terms[step + 1, t] = terms[t]


@njit(cache=True, nogil=True)
def run_sa(
    pos,
    neg,
    w,
    h,
    orient,
    disc_off,
    disc_w,
    disc_h,
    area,
    ar_off,
    ar_lo,
    ar_hi,
    is_macroish,
    e_a,
    e_b,
    e_w,
    term_x,
    term_y,
    blk,
    nb_hard,
    guid,
    guid_mask,
    ow,
    oh,
    notch_cell,
    notch_min,
    use_term,
    op4_mode,
    weights,
    norms,
    t_init,
    cool,
    num_iters,
    moves_per_iter,
    t_min,
    seed,
    best_pos,
    best_neg,
    best_w,
    best_h,
    best_orient,
    bv_pos,
    bv_neg,
    bv_w,
    bv_h,
    bv_orient,
    out_terms,
    out_scalars,
):
    """Full annealing run; state arrays are mutated as scratch.

    out_terms rows: 0 = best state raw terms, 1 = best-valid state raw terms.
    out_scalars: 0 best cost, 1 best-valid cost, 2 best-valid found flag,
    3 accepted moves, 4 initial cost.
    """
    n = pos.shape[0]
    xbuf = np.zeros(n, dtype=np.float64)
    ybuf = np.zeros(n, dtype=np.float64)
    ninv = np.zeros(n, dtype=np.int64)
    ncx = 0
    ncy = 0
    if notch_cell > 0.0:
        ncx = int(np.ceil(ow / notch_cell))
        ncy = int(np.ceil(oh / notch_cell))
    occ = np.zeros(max(ncx * ncy, 1), dtype=np.int8)
    stk = np.zeros(max(ncx * ncy, 1), dtype=np.int64)
    terms = np.zeros(NUM_TERMS, dtype=np.float64)

    s = seed
    if s == U64(0):
        s = U64(0x9E3779B97F4A7C15)
    flip_count = 0

    _eval_terms(
        pos, neg, w, h, is_macroish, e_a, e_b, e_w, term_x, term_y, blk, nb_hard,
        guid, guid_mask, ow, oh, notch_cell, notch_min, use_term,
        xbuf, ybuf, ninv, occ, stk, ncx, ncy, terms,
    )
    cur = _weighted_cost(terms, weights, norms)
    best = cur
    bv_found = 0.0
    bv_cost = 0.0
    for q in range(n):
        best_pos[q] = pos[q]
        best_neg[q] = neg[q]
        best_w[q] = w[q]
        best_h[q] = h[q]
        best_orient[q] = orient[q]
    for t in range(NUM_TERMS):
        out_terms[0, t] = terms[t]
    if terms[2] == 0.0 and terms[7] == 0.0:
        bv_found = 1.0
        bv_cost = cur
        for q in range(n):
            bv_pos[q] = pos[q]
            bv_neg[q] = neg[q]
            bv_w[q] = w[q]
            bv_h[q] = h[q]
            bv_orient[q] = orient[q]
        for t in range(NUM_TERMS):
            out_terms[1, t] = terms[t]
    out_scalars[4] = cur

    temp = t_init
    if temp < t_min:
        temp = t_min
    accepted = 0.0
    for _ in range(num_iters):
        for _ in range(moves_per_iter):
            s, flip_count, op, i, j, k, o_w, o_h = _rand_move(
                s, flip_count, pos, neg, w, h, orient,
                disc_off, disc_w, disc_h, area, ar_off, ar_lo, ar_hi, op4_mode,
            )
            _eval_terms(
                pos, neg, w, h, is_macroish, e_a, e_b, e_w, term_x, term_y, blk,
                nb_hard, guid, guid_mask, ow, oh, notch_cell, notch_min, use_term,
                xbuf, ybuf, ninv, occ, stk, ncx, ncy, terms,
            )
            cand = _weighted_cost(terms, weights, norms)
            delta = cand - cur
            s, u = _rng_f64(s)
            if delta <= 0.0 or u < np.exp(-delta / temp):
                cur = cand
                accepted += 1.0
                if cand < best:
                    best = cand
                    for q in range(n):
                        best_pos[q] = pos[q]
                        best_neg[q] = neg[q]
                        best_w[q] = w[q]
                        best_h[q] = h[q]
                        best_orient[q] = orient[q]
                    for t in range(NUM_TERMS):
                        out_terms[0, t] = terms[t]
                if terms[2] == 0.0 and terms[7] == 0.0 and (
                    bv_found == 0.0 or cand < bv_cost
                ):
                    bv_found = 1.0
                    bv_cost = cand
                    for q in range(n):
                        bv_pos[q] = pos[q]
                        bv_neg[q] = neg[q]
                        bv_w[q] = w[q]
                        bv_h[q] = h[q]
                        bv_orient[q] = orient[q]
                    for t in range(NUM_TERMS):
                        out_terms[1, t] = terms[t]
            else:
                flip_count = _undo_move(
                    flip_count, pos, neg, w, h, orient, op, i, j, k, o_w, o_h
                )
        temp *= cool
        if temp < t_min:
            temp = t_min
    out_scalars[0] = best
    out_scalars[1] = bv_cost
    out_scalars[2] = bv_found
    out_scalars[3] = accepted


@njit(cache=True, nogil=True)
def eval_state(
    pos,
    neg,
    w,
    h,
    is_macroish,
    e_a,
    e_b,
    e_w,
    term_x,
    term_y,
    blk,
    nb_hard,
    guid,
    guid_mask,
    ow,
    oh,
    notch_cell,
    notch_min,
    use_term,
):
    """Single evaluation returning (terms, x, y) for a given state."""
    n = pos.shape[0]
    xbuf = np.zeros(n, dtype=np.float64)
    ybuf = np.zeros(n, dtype=np.float64)
    ninv = np.zeros(n, dtype=np.int64)
    ncx = 0
    ncy = 0
    if notch_cell > 0.0:
        ncx = int(np.ceil(ow / notch_cell))
        ncy = int(np.ceil(oh / notch_cell))
    occ = np.zeros(max(ncx * ncy, 1), dtype=np.int8)
    stk = np.zeros(max(ncx * ncy, 1), dtype=np.int64)
    terms = np.zeros(NUM_TERMS, dtype=np.float64)
    _eval_terms(
        pos, neg, w, h, is_macroish, e_a, e_b, e_w, term_x, term_y, blk, nb_hard,
        guid, guid_mask, ow, oh, notch_cell, notch_min, use_term,
        xbuf, ybuf, ninv, occ, stk, ncx, ncy, terms,
    )
    return terms, xbuf, ybuf


# ---------------------------------------------------------------------------
# python-side packaging


@dataclass
class PackedState:
    pos: np.ndarray
    neg: np.ndarray
    w: np.ndarray
    h: np.ndarray
    orient: np.ndarray

    def copy(self) -> "PackedState":
        return PackedState(
            self.pos.copy(), self.neg.copy(), self.w.copy(), self.h.copy(), self.orient.copy()
        )


def make_state(n: int) -> PackedState:
    return PackedState(
        pos=np.arange(n, dtype=np.int64),
        neg=np.arange(n, dtype=np.int64),
        w=np.zeros(n, dtype=np.float64),
        h=np.zeros(n, dtype=np.float64),
        orient=np.zeros(n, dtype=np.int64),
    )


@dataclass
class PackedProblem:
    """Array form of one packing problem plus its initial state."""

    n: int
    ow: float
    oh: float
    init: PackedState
    # per-block shape model
    disc_off: np.ndarray = field(default=None)  # type: ignore[assignment]
    disc_w: np.ndarray = field(default=None)  # type: ignore[assignment]
    disc_h: np.ndarray = field(default=None)  # type: ignore[assignment]
    area: np.ndarray = field(default=None)  # type: ignore[assignment]
    ar_off: np.ndarray = field(default=None)  # type: ignore[assignment]
    ar_lo: np.ndarray = field(default=None)  # type: ignore[assignment]
    ar_hi: np.ndarray = field(default=None)  # type: ignore[assignment]
    is_macroish: np.ndarray = field(default=None)  # type: ignore[assignment]
    # connectivity
    e_a: np.ndarray = field(default=None)  # type: ignore[assignment]
    e_b: np.ndarray = field(default=None)  # type: ignore[assignment]
    e_w: np.ndarray = field(default=None)  # type: ignore[assignment]
    term_x: np.ndarray = field(default=None)  # type: ignore[assignment]
    term_y: np.ndarray = field(default=None)  # type: ignore[assignment]
    # constraints
    blk: np.ndarray = field(default=None)  # type: ignore[assignment]
    nb_hard: int = 0
    guid: np.ndarray = field(default=None)  # type: ignore[assignment]
    guid_mask: np.ndarray = field(default=None)  # type: ignore[assignment]
    notch_cell: float = 0.0
    notch_min: float = 0.0
    # cost model
    weights: np.ndarray = field(default=None)  # type: ignore[assignment]
    op4_mode: int = OP4_RESIZE

    def __post_init__(self) -> None:
        n = self.n
        empty_i = np.zeros(0, dtype=np.int64)
        empty_f = np.zeros(0, dtype=np.float64)
        if self.disc_off is None:
            self.disc_off = np.zeros(n + 1, dtype=np.int64)
        if self.disc_w is None:
            self.disc_w = empty_f.copy()
        if self.disc_h is None:
            self.disc_h = empty_f.copy()
        if self.area is None:
            self.area = np.zeros(n, dtype=np.float64)
        if self.ar_off is None:
            self.ar_off = np.zeros(n + 1, dtype=np.int64)
        if self.ar_lo is None:
            self.ar_lo = empty_f.copy()
        if self.ar_hi is None:
            self.ar_hi = empty_f.copy()
        if self.is_macroish is None:
            self.is_macroish = np.zeros(n, dtype=np.uint8)
        if self.e_a is None:
            self.e_a = empty_i.copy()
        if self.e_b is None:
            self.e_b = empty_i.copy()
        if self.e_w is None:
            self.e_w = empty_f.copy()
        if self.term_x is None:
            self.term_x = empty_f.copy()
        if self.term_y is None:
            self.term_y = empty_f.copy()
        if self.blk is None:
            self.blk = np.zeros((0, 4), dtype=np.float64)
        if self.guid is None:
            self.guid = np.zeros((n, 4), dtype=np.float64)
        if self.guid_mask is None:
            self.guid_mask = np.zeros(n, dtype=np.uint8)
        if self.weights is None:
            self.weights = np.zeros(7, dtype=np.float64)
        self.use_term = np.zeros(7, dtype=np.uint8)
        for t in range(7):
            if self.weights[t] != 0.0:
                self.use_term[t] = 1
        # outline and blockage terms feed the validity flag even when unweighted
        self.use_term[2] = 1

    def _static_args(self):
        return (
            self.is_macroish,
            self.e_a,
            self.e_b,
            self.e_w,
            self.term_x,
            self.term_y,
            self.blk,
            self.nb_hard,
            self.guid,
            self.guid_mask,
            self.ow,
            self.oh,
            self.notch_cell,
            self.notch_min,
            self.use_term,
        )

    def _shape_args(self):
        return (
            self.disc_off,
            self.disc_w,
            self.disc_h,
            self.area,
            self.ar_off,
            self.ar_lo,
            self.ar_hi,
        )

    def evaluate(self, state: PackedState) -> np.ndarray:
        terms, _, _ = eval_state(
            state.pos, state.neg, state.w, state.h, *self._static_args()
        )
        return terms

    def positions(self, state: PackedState) -> tuple[np.ndarray, np.ndarray]:
        _, x, y = eval_state(
            state.pos, state.neg, state.w, state.h, *self._static_args()
        )
        return x, y

    def is_valid(self, terms: np.ndarray) -> bool:
        return terms[2] == 0.0 and terms[7] == 0.0

    def calibrate(self, seed: int, steps: int = 100) -> tuple[np.ndarray, np.ndarray]:
        """Random-walk term samples: (steps+1, 8) matrix, row 0 = initial."""
        st = self.init.copy()
        out = np.zeros((steps + 1, NUM_TERMS), dtype=np.float64)
        calibrate_walk(
            st.pos, st.neg, st.w, st.h, st.orient,
            *self._shape_args(), *self._static_args(),
            self.op4_mode, U64(seed & 0xFFFFFFFFFFFFFFFF), out,
        )
        norms = np.ones(7, dtype=np.float64)
        for t in range(7):
            m = float(np.mean(out[:, t]))
            norms[t] = m if m > 0.0 else 1.0
        return norms, out


@dataclass
class KernelResult:
    best: PackedState
    best_cost: float
    best_terms: np.ndarray
    best_valid: PackedState | None
    best_valid_cost: float
    best_valid_terms: np.ndarray | None
    initial_cost: float
    accepted: float
    t_init: float
    worker: int = 0


def derive_t_init(
    samples: np.ndarray, weights: np.ndarray, norms: np.ndarray,
    init_accept_prob: float, t_min: float,
) -> float:
    costs = np.zeros(samples.shape[0], dtype=np.float64)
    for r in range(samples.shape[0]):
        costs[r] = _weighted_cost(samples[r], weights, norms)
    deltas = np.diff(costs)
    uphill = deltas[deltas > 0.0]
    if uphill.size == 0:
        return t_min
    return float(np.mean(uphill)) / (-np.log(init_accept_prob))


def run_packed(
    problem: PackedProblem,
    norms: np.ndarray,
    t_init: float,
    num_iters: int,
    moves_per_iter: int,
    t_min: float,
    seed: int,
    worker: int = 0,
) -> KernelResult:
    n = problem.n
    st = problem.init.copy()
    best = make_state(n)
    bv = make_state(n)
    out_terms = np.zeros((2, NUM_TERMS), dtype=np.float64)
    out_scalars = np.zeros(5, dtype=np.float64)
    cool = 1.0
    if t_init > t_min and num_iters > 0:
        cool = (t_min / t_init) ** (1.0 / num_iters)
    run_sa(
        st.pos, st.neg, st.w, st.h, st.orient,
        *problem._shape_args(), *problem._static_args(),
        problem.op4_mode, problem.weights, norms,
        t_init, cool, num_iters, moves_per_iter, t_min,
        U64(seed & 0xFFFFFFFFFFFFFFFF),
        best.pos, best.neg, best.w, best.h, best.orient,
        bv.pos, bv.neg, bv.w, bv.h, bv.orient,
        out_terms, out_scalars,
    )
    found = out_scalars[2] > 0.0
    return KernelResult(
        best=best,
        best_cost=float(out_scalars[0]),
        best_terms=out_terms[0].copy(),
        best_valid=bv if found else None,
        best_valid_cost=float(out_scalars[1]) if found else float("inf"),
        best_valid_terms=out_terms[1].copy() if found else None,
        initial_cost=float(out_scalars[4]),
        accepted=float(out_scalars[3]),
        t_init=t_init,
        worker=worker,
    )


def warmup() -> None:
    """Force JIT compilation with a tiny problem (cache-backed)."""
    p = PackedProblem(
        n=2,
        ow=4.0,
        oh=4.0,
        init=make_state(2),
        weights=np.array([1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]),
    )
    p.init.w[:] = 1.0
    p.init.h[:] = 1.0
    norms, _ = p.calibrate(seed=1, steps=3)
    run_packed(p, norms, 1.0, 2, 4, 1e-10, seed=1)
