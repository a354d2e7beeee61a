"""Worst-case efficiency bounds for the four adversary classes.

Uninformed adversaries have closed forms.  Informed adversaries reduce to
integer programs over at most two repeated x/y segment-pattern lengths,
solved here by exact enumeration up to a length cap: surplus arithmetic is
done in scaled integers (alpha and gamma as exact rationals) so feasibility
signs are never a float artifact, and the two-pattern search uses the
linear-fractional structure of the mixed objective, which makes the check
"is any mix below t" separable and bisectable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .game import GameParams, guarded_ceil
from .policies import (
    _all_y_adversary_count,
    aggressive_budget,
    budget_nodes,
    defended_x_threshold,
    min_x_adversaries,
    min_y_adversaries,
    min_y_segment_length,
)
from .topology import RingGraph, X, Y, all_x, all_y

DEFAULT_SEARCH_BOUND = 100


@dataclass(frozen=True)
class SegmentDescription:
    """Repeated-pattern description: lengths, repetitions and surpluses."""

    lx: tuple[int, ...]
    ly: tuple[int, ...]
    r: tuple[int, ...]
    s: tuple[float, ...]

    def ring_length(self) -> int:
        return sum(rr * (a + b) for rr, a, b in zip(self.r, self.lx, self.ly))


@dataclass(frozen=True)
class BoundResult:
    value: float
    witness: Optional[SegmentDescription]
    search_bound: int


def su_bound(alpha: float, gamma: float, k: int = 1) -> float:
    """Worst-case efficiency against a static structure-blind adversary."""
    _check_args(alpha, gamma)
    ka = k * alpha
    if ka >= 1.0 or gamma < ka - 1e-12:
        return 1.0
    return ((1.0 - (k - 1) * alpha) - alpha * gamma) / ((1.0 + alpha) * (1.0 - ka))


def du_bound(alpha: float, gamma: float, k: int = 1) -> float:
    """Worst-case efficiency against a dynamic structure-blind adversary."""
    _check_args(alpha, gamma)
    if gamma == 0.0 or alpha >= 1.0 / k:
        return 1.0
    return 1.0 / (1.0 + alpha)


def _check_args(alpha: float, gamma: float):
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")


def saturation(alpha: float) -> tuple[int, float, float, float]:
    """(l_star, saturated value, SI saturation budget, DI saturation budget).

    l_star is the shortest stabilizable y-segment; the saturated value is
    the efficiency of endlessly repeating the minimum pattern (x-length 2,
    y-length l_star), reached by informed adversaries once their budget
    covers that pattern's stabilization cost.
    """
    _check_args(alpha, 0.0)
    l_star = min_y_segment_length(alpha)
    sat_value = (l_star + alpha) / ((1.0 + alpha) * (l_star + 2))
    g_si = (l_star + guarded_ceil((2.0 - alpha) / (1.0 + alpha))) / (l_star + 2)
    g_di = (2 + 2 * (1 if alpha < 0.5 else 0)) / (l_star + 2)
    return l_star, sat_value, g_si, g_di


def si_closed_form(alpha: float, gamma: float) -> float:
    """Analytic value of the informed-static program.

    Exact for gamma <= alpha; for gamma > alpha it is the efficiency of the
    explicit witness family (saturated patterns plus one long y block) and
    therefore an upper bound on the infimum -- the solver value is the
    authority there.
    """
    _check_args(alpha, gamma)
    if gamma <= alpha:
        return 1.0 - gamma / (1.0 + alpha)
    l_star = min_y_segment_length(alpha)
    return (gamma - alpha) * (l_star + alpha) / (
        (1.0 + alpha) * (1.0 - alpha) * (l_star + 2)
    ) + (1.0 - gamma) / ((1.0 + alpha) * (1.0 - alpha))


def comparison(alpha: float, gamma: float) -> str:
    """Which adversary degrades more at this budget: sophistication vs. information."""
    du = du_bound(alpha, gamma, k=1)
    si = si_closed_form(alpha, gamma)
    if abs(du - si) <= 1e-9:
        return "equal"
    return "dynamic-uninformed stronger" if du < si else "informed-static stronger"


# ---------------------------------------------------------------------------
# integer programs


def _rational(x: float) -> Fraction:
    return Fraction(x).limit_denominator(10**6)


def _si_need_grids(alpha: Fraction, lengths: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pa, qa = alpha.numerator, alpha.denominator
    ly = lengths
    yneed = -((-(pa * (ly + 1))) // qa) + 2  # ceil division
    lx = lengths
    raw = np.maximum(2 * qa - pa * (lx - 1), 0)
    xneed = -((-raw) // (qa + pa))
    return xneed.astype(np.int64), yneed.astype(np.int64)


def _solve_pattern_program(
    alpha: float, gamma: float, search_bound: int, model: str
) -> BoundResult:
    """Minimize pattern efficiency over single patterns (surplus >= 0) and
    exact-budget mixes of one surplus and one deficit pattern."""
    af = _rational(alpha)
    gf = _rational(gamma)
    pa, qa = af.numerator, af.denominator
    pg, qg = gf.numerator, gf.denominator
    c = 1.0 + alpha

    lx_min = 3 if alpha == 0.0 else 2
    ly_min = min_y_segment_length(alpha)
    top = search_bound
    if gamma == 0.0 or ly_min > top:
        return BoundResult(1.0, None, search_bound)

    lxs = np.arange(lx_min, top + 1, dtype=np.int64)
    lys = np.arange(ly_min, top + 1, dtype=np.int64)
    LX, LY = np.meshgrid(lxs, lys, indexing="ij")
    if model == "si":
        lengths = np.arange(0, top + 2, dtype=np.int64)
        xneed, yneed = _si_need_grids(af, lengths)
        need = xneed[LX] + yneed[LY]
    elif model == "di":
        thresh = defended_x_threshold(alpha)
        per_x = np.where((alpha < 0.5) & (LX <= (thresh if thresh >= 0 else -1)), 4, 2)
        need = per_x.astype(np.int64)
    else:
        raise ValueError(model)

    ell = (LX + LY).astype(np.int64)
    surplus = pg * ell - qg * need  # qg * true surplus, exact integer
    gval = c * LX + LY - (2.0 + alpha)

    best_val = 1.0
    best_witness: Optional[SegmentDescription] = None

    single = surplus >= 0
    if np.any(single):
        vals = np.where(single, gval / (c * ell), np.inf)
        idx = np.unravel_index(np.argmin(vals), vals.shape)
        if vals[idx] < best_val:
            best_val = float(vals[idx])
            best_witness = SegmentDescription(
                lx=(int(LX[idx]),),
                ly=(int(LY[idx]),),
                r=(1,),
                s=(surplus[idx] / qg,),
            )

    pos = surplus > 0
    neg = surplus < 0
    if np.any(pos) and np.any(neg):
        ga, la, sa = gval[pos], ell[pos].astype(float), surplus[pos].astype(float)
        gb, lb, sb = gval[neg], ell[neg].astype(float), -surplus[neg].astype(float)
        lxa, lya = LX[pos], LY[pos]
        lxb, lyb = LX[neg], LY[neg]

        def min_sum(t: float) -> tuple[float, int, int]:
            ta = (ga - t * c * la) / sa
            tb = (gb - t * c * lb) / sb
            ia = int(np.argmin(ta))
            ib = int(np.argmin(tb))
            return float(ta[ia] + tb[ib]), ia, ib

        lo, hi = 0.0, best_val
        if min_sum(hi)[0] < 0.0:
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if min_sum(mid)[0] < 0.0:
                    hi = mid
                else:
                    lo = mid
            _, ia, ib = min_sum(hi + 1e-12)
            s_a = int(sa[ia])
            s_b = int(sb[ib])
            r_a = s_b // math.gcd(s_a, s_b)
            r_b = s_a // math.gcd(s_a, s_b)
            num = r_a * ga[ia] + r_b * gb[ib]
            den = c * (r_a * la[ia] + r_b * lb[ib])
            val = float(num / den)
            if val < best_val:
                best_val = val
                best_witness = SegmentDescription(
                    lx=(int(lxa[ia]), int(lxb[ib])),
                    ly=(int(lya[ia]), int(lyb[ib])),
                    r=(int(r_a), int(r_b)),
                    s=(s_a / qg, -s_b / qg),
                )

    return BoundResult(best_val, best_witness, search_bound)


def si_bound(
    alpha: float, gamma: float, search_bound: int = DEFAULT_SEARCH_BOUND
) -> BoundResult:
    """Informed-static worst-case efficiency via the pattern program."""
    _check_args(alpha, gamma)
    return _solve_pattern_program(alpha, gamma, search_bound, "si")


def di_bound(
    alpha: float, gamma: float, search_bound: int = DEFAULT_SEARCH_BOUND
) -> BoundResult:
    """Informed-dynamic worst-case efficiency via the pattern program."""
    _check_args(alpha, gamma)
    return _solve_pattern_program(alpha, gamma, search_bound, "di")


# ---------------------------------------------------------------------------
# finite-ring witness targets


def _partitions(total: int, parts: int, low: int):
    """Non-increasing integer partitions of `total` into `parts` parts >= low."""
    if parts == 1:
        if total >= low:
            yield (total,)
        return
    for head in range(low, total - low * (parts - 1) + 1):
        for tail in _partitions(total - head, parts - 1, head):
            yield (head,) + tail


def min_efficiency_target(
    g: RingGraph, p: GameParams, gamma: float, model: str
) -> tuple[np.ndarray, float]:
    """Lowest-efficiency profile a budgeted informed adversary can hold on
    this ring, by exhaustive search over segment-length compositions.

    model 'si' costs segments by the static stabilization counts, 'di' by
    the aggressive policy's budget.  The homogeneous profiles are always
    candidates; all-x (efficiency 1) is the fallback when nothing else fits.
    """
    if model not in ("si", "di"):
        raise ValueError(model)
    n = g.n
    budget = budget_nodes(gamma, n)
    al = p.alpha
    best_prof = all_x(n)
    best_eff = 1.0

    ally_need = _all_y_adversary_count(g, p) if model == "si" else 3
    if ally_need <= budget:
        eff = 1.0 / (1.0 + al)
        if eff < best_eff:
            best_eff = eff
            best_prof = all_y(n)

    lx_min = 3 if al == 0.0 else 2
    ly_min = min_y_segment_length(al)
    unit = lx_min + ly_min
    for m in range(1, n // unit + 1):
        for x_total in range(lx_min * m, n - ly_min * m + 1):
            y_total = n - x_total
            for xp in _partitions(x_total, m, lx_min):
                for yp in _partitions(y_total, m, ly_min):
                    if model == "si":
                        need = 0
                        ok = True
                        for ly in yp:
                            cnt = min_y_adversaries(ly, al, k=1)
                            if cnt > ly:
                                ok = False
                                break
                            need += cnt
                        if not ok:
                            continue
                        need += sum(min_x_adversaries(lx, al) for lx in xp)
                    else:
                        thresh = defended_x_threshold(al)
                        n_short = sum(1 for lx in xp if thresh >= 0 and lx <= thresh)
                        need = 2 * (m + n_short) + 1 if al < 0.5 else 2 * m + 1
                    if need > budget:
                        continue
                    eff = ((1.0 + al) * (x_total - m) + (y_total - m)) / (
                        (1.0 + al) * n
                    )
                    if eff < best_eff - 1e-12:
                        best_eff = eff
                        prof = np.empty(n, dtype=np.int8)
                        pos = 0
                        for lx, ly in zip(xp, yp):
                            prof[pos : pos + lx] = X
                            prof[pos + lx : pos + lx + ly] = Y
                            pos += lx + ly
                        best_prof = prof
    return best_prof, best_eff


def realize_witness(witness: SegmentDescription) -> np.ndarray:
    """Assemble the one-repetition ring profile of a pattern description."""
    parts = []
    for lx, ly, rr in zip(witness.lx, witness.ly, witness.r):
        parts.extend([np.full(lx, X, dtype=np.int8), np.full(ly, Y, dtype=np.int8)] * rr)
    return np.concatenate(parts)
