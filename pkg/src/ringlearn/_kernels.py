"""Compiled inner loops: adversary placement and the revision chain.

The aggressive-policy placement lives here as a single njit function so the
simulator, the policy object and the exact oracle all evaluate the identical
rule; everything else calls through it.

Influence codes: 0 = uninfluenced, 1 = x-adversary attached, 2 = y-adversary.
Action codes: 0 = x, 1 = y (see topology.X/Y).
"""
from __future__ import annotations

import numpy as np
from numba import njit

POLICY_NONE = 0
POLICY_STATIC = 1
POLICY_DU = 2
POLICY_AGGRESSIVE = 3


@njit(cache=True)
def _longest_run(cur, start, length, n, kind):
    """Longest contiguous run of `kind` inside the segment, as (offset, len).

    Offsets are relative to `start` in ring order.  Ties resolve to the
    lowest offset.  Only a whole-ring segment can wrap, in which case the
    first and last runs merge.
    """
    best_off = 0
    best_len = 0
    run_off = -1
    run_len = 0
    first_off = -1
    first_len = 0
    last_off = -1
    last_len = 0
    for off in range(length):
        if cur[(start + off) % n] == kind:
            if run_len == 0:
                run_off = off
            run_len += 1
        else:
            if run_len > 0:
                if first_off < 0:
                    first_off = run_off
                    first_len = run_len
                last_off = run_off
                last_len = run_len
                if run_len > best_len:
                    best_off = run_off
                    best_len = run_len
            run_len = 0
    if run_len > 0:
        if first_off < 0:
            first_off = run_off
            first_len = run_len
        last_off = run_off
        last_len = run_len
        if run_len > best_len:
            best_off = run_off
            best_len = run_len
    if length == n and first_off == 0 and last_off > 0 and last_off + last_len == length:
        # boundary-free segment: the run through position `start` wraps
        merged = first_len + last_len
        if merged >= length:
            return 0, length
        if merged > best_len:
            return last_off, merged
    return best_off, best_len


@njit(cache=True)
def aggressive_fill(inf, cur, seg_start, seg_len, seg_kind, short_thresh, drop_seg, drop_high):
    """Adversary placement of the aggressive policy for the current state.

    Defensive placements guard the endpoints of the longest aligned run in
    every target segment (x-segments only below the short-length threshold,
    and only once eroded to exactly two agents).  One offensive adversary is
    spent on the lowest-index misaligned segment.

    drop_seg >= 0 caps that segment's defensive allocation to a single node
    (the lower run endpoint if drop_high, else the upper one), modelling the
    removal of one defensive adversary from the budget.
    """
    n = cur.shape[0]
    nsegs = seg_start.shape[0]
    for j in range(n):
        inf[j] = 0

    for s in range(nsegs):
        start = seg_start[s]
        length = seg_len[s]
        kind = seg_kind[s]
        code = 1 if kind == 0 else 2
        want_p = False
        want_q = False
        if kind == 0:
            # defensive x: only short segments, only once eroded to exactly
            # two surviving x-players, and then both of them
            if short_thresh < 0 or length > short_thresh:
                continue
            off, rl = _longest_run(cur, start, length, n, kind)
            if rl != 2:
                continue
            want_p = True
            want_q = True
        else:
            # defensive y: run endpoints whose outside neighbor plays x
            off, rl = _longest_run(cur, start, length, n, kind)
            if rl < 2:
                continue
        p = (start + off) % n
        q = (start + off + rl - 1) % n
        if kind == 1:
            left = cur[(p - 1) % n]
            right = cur[(q + 1) % n]
            if left != kind and right != kind:
                want_p = True
                want_q = True
            elif left != kind:
                want_p = True
            elif right != kind:
                want_q = True
        if drop_seg == s and want_p and want_q:
            if drop_high:
                want_q = False
            else:
                want_p = False
        if want_p:
            inf[p] = code
        if want_q:
            inf[q] = code

    # one offensive adversary on the lowest-index misaligned segment
    for s in range(nsegs):
        start = seg_start[s]
        length = seg_len[s]
        kind = seg_kind[s]
        aligned = True
        for off in range(length):
            if cur[(start + off) % n] != kind:
                aligned = False
                break
        if aligned:
            continue
        code = 1 if kind == 0 else 2
        off, rl = _longest_run(cur, start, length, n, kind)
        if rl == 0:
            # fully flipped: convert from whichever endpoint already has an
            # aligned outside neighbor; default to the low endpoint
            u = start
            v = (start + length - 1) % n
            left = cur[(u - 1) % n]
            right = cur[(v + 1) % n]
            if right == kind and left != kind:
                inf[v] = code
            else:
                inf[u] = code
        else:
            # attach next to the longest aligned run, preferring the low side
            if off > 0:
                inf[(start + off - 1) % n] = code
            else:
                inf[(start + off + rl) % n] = code
        break


@njit(cache=True)
def aggressive_influence_table(n, seg_start, seg_len, seg_kind, short_thresh, drop_seg, drop_high):
    """Influence codes of the aggressive policy for every one of the 2^n states."""
    size = 1 << n
    out = np.zeros((size, n), dtype=np.int8)
    cur = np.zeros(n, dtype=np.int8)
    inf = np.zeros(n, dtype=np.int8)
    for st in range(size):
        for j in range(n):
            cur[j] = (st >> j) & 1
        aggressive_fill(inf, cur, seg_start, seg_len, seg_kind, short_thresh, drop_seg, drop_high)
        for j in range(n):
            out[st, j] = inf[j]
    return out


@njit(cache=True, inline="always")
def _match_counts(a, i, k, n):
    """(#neighbors playing x, #neighbors playing y) for agent i; needs 2k < n."""
    cx = 0
    cy = 0
    for d in range(1, k + 1):
        if a[(i + d) % n] == 0:
            cx += 1
        else:
            cy += 1
        if a[(i - d) % n] == 0:
            cx += 1
        else:
            cy += 1
    return cx, cy


@njit(cache=True, inline="always")
def _link_sum(a, i, k, alpha, n):
    cx, cy = _match_counts(a, i, k, n)
    if a[i] == 0:
        return cx * (1.0 + alpha)
    return float(cy)


@njit(cache=True)
def run_chain(
    a0,
    k,
    alpha,
    beta,
    steps,
    burn_in,
    seed,
    policy_id,
    inf_static,
    t_mask,
    extra_count,
    seg_start,
    seg_len,
    seg_kind,
    short_thresh,
    drop_seg,
    drop_high,
    w_opt,
    record_states,
):
    """Asynchronous softmax-revision chain with a state-dependent adversary.

    Per step the RNG is consumed in a fixed order: agent index, then (for
    the randomized uninformed policy) one membership uniform, then the
    action uniform.  The uninformed policy's per-step random subset enters
    only through the updating agent's marginal membership probability
    extra_count / (n - |T|), which induces the identical chain law.

    Returns (final_state, mean_efficiency, recorded_bitmasks).
    """
    np.random.seed(seed)
    n = a0.shape[0]
    a = a0.copy()
    inf = np.zeros(n, dtype=np.int8)
    if policy_id == POLICY_STATIC:
        for j in range(n):
            inf[j] = inf_static[j]

    w = 0.0
    for j in range(n):
        w += _link_sum(a, j, k, alpha, n)

    pool = 0
    if policy_id == POLICY_DU:
        pool = n
        for j in range(n):
            if t_mask[j] == 1:
                pool -= 1

    nrec = steps if record_states else 0
    rec = np.zeros(nrec, dtype=np.uint64)
    eff_sum = 0.0

    for t in range(steps):
        i = np.random.randint(0, n)
        code = 0
        if policy_id == POLICY_STATIC:
            code = inf[i]
        elif policy_id == POLICY_DU:
            if t_mask[i] == 1:
                code = 2
            elif extra_count > 0:
                if np.random.random() * pool < extra_count:
                    code = 2
        elif policy_id == POLICY_AGGRESSIVE:
            aggressive_fill(inf, a, seg_start, seg_len, seg_kind, short_thresh, drop_seg, drop_high)
            code = inf[i]

        cx, cy = _match_counts(a, i, k, n)
        ux = cx * (1.0 + alpha)
        uy = float(cy)
        if code == 1:
            ux += 1.0 + alpha
        elif code == 2:
            uy += 1.0
        d = beta * (ux - uy)
        if d >= 0.0:
            px = 1.0 / (1.0 + np.exp(-d))
        else:
            e = np.exp(d)
            px = e / (1.0 + e)
        new = 0 if np.random.random() < px else 1
        if new != a[i]:
            before = _link_sum(a, i, k, alpha, n)
            a[i] = new
            after = _link_sum(a, i, k, alpha, n)
            w += 2.0 * (after - before)

        if t >= burn_in:
            eff_sum += w
        if record_states:
            m = np.uint64(0)
            for j in range(n):
                m |= np.uint64(a[j]) << np.uint64(j)
            rec[t] = m

    mean_eff = eff_sum / ((steps - burn_in) * w_opt)
    return a, mean_eff, rec
