"""Two-convention coordination payoffs, utilities, welfare and efficiency.

Convention x carries a premium: a coordinating x-link pays 1+alpha to each
endpoint, a y-link pays 1, mismatches pay 0.  Adversarial nodes attach to
single agents and add the corresponding link payoff to that agent's
perceived utility only; they never contribute to system welfare.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .topology import RingGraph, X, Y, all_x, as_profile, neighbors

#: absolute/relative guard applied before integer rounding of exact rationals
ROUND_GUARD = 1e-9


def guarded_ceil(z: float) -> int:
    """Ceiling with a guard band so 3.0000000001 stays 3, not 4.

    Values like alpha*(l+1) are exact rationals computed in floats; without
    the guard a one-ulp overshoot would inflate adversary counts by one.
    """
    r = round(z)
    if abs(z - r) <= ROUND_GUARD * max(1.0, abs(z)):
        return int(r)
    return math.ceil(z)


def guarded_floor(z: float) -> int:
    r = round(z)
    if abs(z - r) <= ROUND_GUARD * max(1.0, abs(z)):
        return int(r)
    return math.floor(z)


@dataclass(frozen=True)
class GameParams:
    """Payoff premium alpha for convention x, restricted to [0, 1).

    alpha >= 1 is rejected outright: a single x-link then outweighs two
    y-links, no y-play can be induced on a ring by any adversary, and the
    downstream threshold formulas (which divide by 1-alpha) lose meaning.
    """

    alpha: float

    def __post_init__(self):
        if not 0.0 <= self.alpha:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")
        if self.alpha >= 1.0:
            raise ValueError(
                f"alpha must be < 1 (got {self.alpha}): x-links would dominate "
                "two y-links and no y-convention can ever be stabilized"
            )


@dataclass(frozen=True)
class InfluenceSets:
    """Agents hosting an x-promoting / y-promoting adversarial node.

    Each influenced agent hosts at most one node, so the sets are disjoint.
    """

    s_x: frozenset[int]
    s_y: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "s_x", frozenset(self.s_x))
        object.__setattr__(self, "s_y", frozenset(self.s_y))
        if self.s_x & self.s_y:
            raise ValueError(f"influence sets overlap: {sorted(self.s_x & self.s_y)}")

    @property
    def size(self) -> int:
        return len(self.s_x) + len(self.s_y)


EMPTY_INFLUENCE = InfluenceSets(frozenset(), frozenset())


def pairwise_payoff(p: GameParams, mine: int, theirs: int) -> float:
    """Per-link benefit V: (x,x) -> 1+alpha, (y,y) -> 1, mismatch -> 0."""
    if mine != theirs:
        return 0.0
    return 1.0 + p.alpha if mine == X else 1.0


def agent_utility(g: RingGraph, p: GameParams, a: Sequence[int], i: int) -> float:
    arr = as_profile(a)
    return sum(pairwise_payoff(p, int(arr[i]), int(arr[j])) for j in neighbors(g, i))


def perceived_utility(
    g: RingGraph, p: GameParams, a: Sequence[int], i: int, inf: InfluenceSets
) -> float:
    """Agent utility plus the attached adversarial link payoff, if any."""
    u = agent_utility(g, p, a, i)
    arr = as_profile(a)
    if i in inf.s_x:
        u += pairwise_payoff(p, int(arr[i]), X)
    elif i in inf.s_y:
        u += pairwise_payoff(p, int(arr[i]), Y)
    return u


def welfare(g: RingGraph, p: GameParams, a: Sequence[int]) -> float:
    """Total utility; each coordinating edge contributes twice (once per side)."""
    arr = as_profile(a)
    w = 0.0
    for i, j in g.edges():
        w += 2.0 * pairwise_payoff(p, int(arr[i]), int(arr[j]))
    return w


def optimal_welfare(g: RingGraph, p: GameParams) -> float:
    """Welfare of the all-x profile, the optimum under full convention choice."""
    return welfare(g, p, all_x(g.n))


def potential(
    g: RingGraph, p: GameParams, a: Sequence[int], inf: InfluenceSets = EMPTY_INFLUENCE
) -> float:
    """Exact potential of the statically influenced game.

    Counts every coordinating link once, weighted by payoff, with adversary
    attachments counting as links of their promoted convention.
    """
    arr = as_profile(a)
    phi = welfare(g, p, a) / 2.0
    for i in inf.s_x:
        phi += pairwise_payoff(p, int(arr[i]), X)
    for i in inf.s_y:
        phi += pairwise_payoff(p, int(arr[i]), Y)
    return phi


def efficiency(g: RingGraph, p: GameParams, a: Sequence[int]) -> float:
    return welfare(g, p, a) / optimal_welfare(g, p)


def efficiency_from_description(
    p: GameParams,
    lx: Iterable[int],
    ly: Iterable[int],
    r: Iterable[int],
) -> float:
    """Efficiency of a ring built by repeating alternating x/y segment patterns.

    Pattern j contributes r_j copies of an x-segment of length lx_j followed
    by a y-segment of length ly_j.  Every segment loses its two boundary
    links, which is where the -(2+alpha) per pattern copy comes from.
    """
    lx = np.asarray(list(lx), dtype=float)
    ly = np.asarray(list(ly), dtype=float)
    r = np.asarray(list(r), dtype=float)
    if not (len(lx) == len(ly) == len(r)):
        raise ValueError("lx, ly, r must have equal lengths")
    if np.any(lx <= 0) or np.any(ly <= 0) or np.any(r <= 0):
        raise ValueError("lengths and repetition counts must be positive")
    al = p.alpha
    num = r @ ((1.0 + al) * lx + ly) - (2.0 + al) * np.sum(r)
    den = (1.0 + al) * (r @ (lx + ly))
    return float(num / den)
