"""The four adversarial policy classes.

Static uninformed: fixed y-adversary counts placed without structural
knowledge.  Static informed: segment-stabilizing placement for a chosen
target profile.  Dynamic uninformed: a fixed always-on block plus a subset
resampled uniformly every step.  Dynamic informed: the aggressive policy,
which defends a target profile's segments and converts one strayed segment
at a time.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .game import (
    EMPTY_INFLUENCE,
    GameParams,
    InfluenceSets,
    guarded_ceil,
    guarded_floor,
)
from .topology import RingGraph, Segment, X, Y, as_profile, decompose_segments


class InfeasibleBudgetError(ValueError):
    """The policy needs more adversarial nodes than the budget allows."""

    def __init__(self, needed: int, budget: int):
        self.needed = needed
        self.budget = budget
        super().__init__(
            f"policy needs {needed} adversarial nodes but the budget allows "
            f"{budget} (shortfall {needed - budget})"
        )


class UnstabilizableTargetError(ValueError):
    """No static allocation can stabilize the target (segment too short)."""


def budget_nodes(gamma: float, n: int) -> int:
    """Adversarial node budget floor(gamma * n), guard-banded."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    return guarded_floor(gamma * n)


def min_y_adversaries(ly: int, alpha: float, k: int = 1) -> int:
    """Adversary count needed to hold a y-segment of length ly on a k-ring."""
    if ly < 1:
        raise ValueError("segment length must be positive")
    return guarded_ceil(alpha * (k * ly + k * (k + 1) / 2)) + k * (k + 1)


def min_x_adversaries(lx: int, alpha: float) -> int:
    """Adversary count needed to hold an x-segment of length lx (k = 1)."""
    if lx < 2:
        raise UnstabilizableTargetError(
            f"x-segments of length {lx} < 2 cannot be stabilized"
        )
    return guarded_ceil(max(2.0 - alpha * (lx - 1), 0.0) / (1.0 + alpha))


def min_y_segment_length(alpha: float) -> int:
    """Shortest y-segment any informed policy can hold, ceil((2+a)/(1-a))."""
    return guarded_ceil((2.0 + alpha) / (1.0 - alpha))


def defended_x_threshold(alpha: float) -> int:
    """Longest x-segment that receives defensive x-adversaries.

    -1 encodes "never" (alpha >= 1/2, where losing an x-link costs more than
    a y-link gains); alpha = 0 makes every x-segment defensible.
    """
    if alpha >= 0.5:
        return -1
    if alpha == 0.0:
        return 1 << 30
    return 1 + guarded_floor((1.0 - alpha) / alpha)


def stabilizing_y_placement(segment: Segment, alpha: float) -> frozenset[int]:
    """Adversary positions that hold a y-segment against every deviation.

    Interior nodes go wherever floor(alpha*(offset+1)) increments, which
    spreads them at most ceil(1/alpha) apart; both endpoints and the largest
    still-free interior index are always included.  The set is padded with
    the lowest free offsets up to the necessary count.
    """
    if segment.kind != Y:
        raise ValueError("placement is defined for y-segments")
    ly = segment.length
    need = min_y_adversaries(ly, alpha, k=1)
    if need > ly:
        raise UnstabilizableTargetError(
            f"y-segment of length {ly} needs {need} adversaries at alpha={alpha}"
        )
    if alpha == 0.0:
        w1: set[int] = set()
    else:
        w1 = {
            o
            for o in range(ly)
            if guarded_floor(alpha * (o + 1)) - guarded_floor(alpha * o) > 0
        }
    free = [o for o in range(ly - 1) if o not in w1]
    w = max(free) if free else 0
    offsets = w1 | {0, w, ly - 1}
    if alpha > 0.0:
        for o in range(ly):
            if len(offsets) >= need:
                break
            offsets.add(o)
    return frozenset((segment.start + o) % segment.n for o in sorted(offsets))


def _evenly_spaced(count: int, length: int) -> list[int]:
    return sorted({int((t + 0.5) * length / count) for t in range(count)}) if count else []


def _all_y_adversary_count(g: RingGraph, p: GameParams) -> int:
    """y-adversaries needed to make the homogeneous y profile potential-maximal."""
    al = p.alpha
    if al == 0.0:
        return 1
    beat_all_x = guarded_ceil(al * g.n)
    spacing = guarded_ceil(g.n / guarded_ceil(1.0 / al))
    return max(beat_all_x, spacing, 1)


class StaticPolicy:
    """Fixed influence sets, the common case for informed-static adversaries."""

    dynamic = False

    def __init__(self, inf: InfluenceSets, intended_profile: Optional[np.ndarray] = None):
        self.inf = inf
        self.intended_profile = intended_profile

    def influence_sets(self, a=None, rng=None) -> InfluenceSets:
        return self.inf

    def agent_influence_options(self, a, i: int) -> tuple[int, ...]:
        if i in self.inf.s_x:
            return (1,)
        if i in self.inf.s_y:
            return (2,)
        return (0,)

    def max_nodes(self) -> int:
        return self.inf.size

    def kernel_args(self, g: RingGraph, p: GameParams) -> Optional[dict]:
        codes = np.zeros(g.n, dtype=np.int8)
        for i in self.inf.s_x:
            codes[i] = 1
        for i in self.inf.s_y:
            codes[i] = 2
        return {"policy_id": _kernels.POLICY_STATIC, "inf_static": codes}


class NoAdversary(StaticPolicy):
    def __init__(self):
        super().__init__(EMPTY_INFLUENCE)

    def kernel_args(self, g, p):
        return {"policy_id": _kernels.POLICY_NONE}


def static_informed_policy(
    g: RingGraph, p: GameParams, target: Sequence[int], gamma: float
) -> StaticPolicy:
    """Segment-stabilizing static allocation for a target profile.

    Every y-segment gets its spread placement, every x-segment its minimum
    count evenly spaced; leftover budget is appended to existing segments so
    the full budget is in play.  Raises if the target has unstabilizable
    segment lengths or the budget falls short.
    """
    if g.k != 1:
        raise ValueError("the informed static construction is defined on 1-rings")
    arr = as_profile(target)
    budget = budget_nodes(gamma, g.n)
    segs = decompose_segments(arr)

    if len(segs) == 1:
        if segs[0].kind == X:
            return StaticPolicy(EMPTY_INFLUENCE, intended_profile=arr)
        need = _all_y_adversary_count(g, p)
        if need > budget:
            raise InfeasibleBudgetError(need, budget)
        positions = set(_evenly_spaced(need, g.n))
        free = [i for i in range(g.n) if i not in positions]
        for i in free:
            if len(positions) >= budget:
                break
            positions.add(i)
        return StaticPolicy(
            InfluenceSets(frozenset(), frozenset(positions)), intended_profile=arr
        )

    s_x: set[int] = set()
    s_y: set[int] = set()
    ly_min = min_y_segment_length(p.alpha)
    for seg in segs:
        if seg.kind == Y:
            if seg.length < ly_min:
                raise UnstabilizableTargetError(
                    f"y-segment of length {seg.length} < {ly_min} at alpha={p.alpha}"
                )
            s_y |= stabilizing_y_placement(seg, p.alpha)
        else:
            cnt = min_x_adversaries(seg.length, p.alpha)
            s_x |= {(seg.start + o) % g.n for o in _evenly_spaced(cnt, seg.length)}
    needed = len(s_x) + len(s_y)
    if needed > budget:
        raise InfeasibleBudgetError(needed, budget)

    # append the surplus within existing segments, y-segments first
    surplus = budget - needed
    for seg in segs:
        pool = s_y if seg.kind == Y else s_x
        for m in seg.members():
            if surplus == 0:
                break
            if m not in s_x and m not in s_y:
                pool.add(m)
                surplus -= 1
    return StaticPolicy(
        InfluenceSets(frozenset(s_x), frozenset(s_y)), intended_profile=arr
    )


def static_uninformed_allocation(g: RingGraph, p: GameParams, gamma: float) -> InfluenceSets:
    """Network-best arrangement of a structure-blind adversary's y-nodes.

    Below the kα density threshold the nodes are spread too thin to convert
    anything.  Above it, the most favorable arrangement saturates one
    contiguous block (which converts to y) and dilutes the rest of the
    budget at sub-threshold density over the remainder.
    """
    al, k, n = p.alpha, g.k, g.n
    budget = budget_nodes(gamma, n)
    if budget == 0:
        return EMPTY_INFLUENCE
    ka = k * al
    if gamma < ka - 1e-12 or ka >= 1.0:
        return InfluenceSets(frozenset(), frozenset(_evenly_spaced(budget, n)))
    block = guarded_ceil(max(budget - ka * n, 0.0) / (1.0 - ka))
    block = min(max(block, 0), budget)
    rest = budget - block
    positions = set(range(block))
    if rest:
        tail = n - block
        positions |= {block + o for o in _evenly_spaced(rest, tail)}
    return InfluenceSets(frozenset(), frozenset(positions))


def static_uninformed_profile(g: RingGraph, p: GameParams, gamma: float) -> np.ndarray:
    """The stable profile the uninformed-static arrangement is built to induce."""
    from .topology import all_x

    al, k, n = p.alpha, g.k, g.n
    budget = budget_nodes(gamma, n)
    ka = k * al
    if budget == 0 or gamma < ka - 1e-12 or ka >= 1.0:
        return all_x(n)
    block = guarded_ceil(max(budget - ka * n, 0.0) / (1.0 - ka))
    block = min(max(block, 0), budget)
    min_len = max(1, guarded_ceil(k * (k + 1) * (1 + al / 2) / (1 - ka))) if ka < 1 else n + 1
    prof = all_x(n)
    if block >= min_len:
        prof[:block] = Y
    return prof


class DynamicUninformedPolicy:
    """Partially static randomized y-adversary placement.

    A fixed contiguous block T of floor(gamma_prime * n) agents is always
    influenced; the rest of the budget is a uniform subset of the remaining
    agents, redrawn at every step, so every agent is influenced with
    positive probability infinitely often.  No x-adversaries, ever.
    """

    dynamic = True

    def __init__(
        self,
        g: RingGraph,
        gamma: float,
        gamma_prime: Optional[float] = None,
    ):
        self.g = g
        self.gamma = gamma
        self.budget = budget_nodes(gamma, g.n)
        if gamma_prime is None:
            gamma_prime = gamma / 2.0
        if gamma > 0 and not 0.0 <= gamma_prime < gamma:
            raise ValueError("need 0 <= gamma_prime < gamma")
        self.gamma_prime = gamma_prime
        t_len = min(budget_nodes(gamma_prime, g.n), self.budget)
        self.fixed_block = frozenset(range(t_len))
        self.extra = self.budget - t_len
        self._complement = np.array(
            [i for i in range(g.n) if i not in self.fixed_block], dtype=np.int64
        )

    def influence_sets(self, a=None, rng: Optional[np.random.Generator] = None) -> InfluenceSets:
        s_y = set(self.fixed_block)
        if self.extra:
            if rng is None:
                raise ValueError("randomized policy needs an rng")
            pick = rng.choice(self._complement, size=self.extra, replace=False)
            s_y.update(int(i) for i in pick)
        return InfluenceSets(frozenset(), frozenset(s_y))

    def agent_influence_options(self, a, i: int) -> tuple[int, ...]:
        if i in self.fixed_block:
            return (2,)
        opts = []
        if self.extra > 0:
            opts.append(2)
        if self.extra < len(self._complement):
            opts.append(0)
        return tuple(opts) if opts else (0,)

    def max_nodes(self) -> int:
        return self.budget

    def kernel_args(self, g: RingGraph, p: GameParams) -> Optional[dict]:
        t_mask = np.zeros(g.n, dtype=np.int8)
        for i in self.fixed_block:
            t_mask[i] = 1
        return {
            "policy_id": _kernels.POLICY_DU,
            "t_mask": t_mask,
            "extra_count": self.extra,
        }


def aggressive_budget(target: Sequence[int], alpha: float) -> int:
    """Nodes needed to run the aggressive policy: two defenders per y-segment,
    two per short x-segment when the premium is below 1/2, plus one converter."""
    segs = decompose_segments(target)
    n_y = sum(1 for s in segs if s.kind == Y)
    if alpha >= 0.5:
        return 2 * n_y + 1
    thresh = defended_x_threshold(alpha)
    n_x = sum(1 for s in segs if s.kind == X and s.length <= thresh)
    return 2 * (n_y + n_x) + 1


class AggressivePolicy:
    """State-dependent defense of a target profile with one roaming converter.

    ``drop_defense=(segment_index, side)`` caps that target segment's
    defensive allocation to a single node (keeping the low or high run
    endpoint), which models the loss of one defensive adversary.
    """

    dynamic = True

    def __init__(
        self,
        g: RingGraph,
        p: GameParams,
        target: Sequence[int],
        gamma: Optional[float] = None,
        drop_defense: Optional[tuple[int, str]] = None,
    ):
        if g.k != 1:
            raise ValueError("the aggressive policy is defined on 1-rings")
        self.g = g
        self.p = p
        self.target = as_profile(target)
        if len(self.target) != g.n:
            raise ValueError("target length does not match the ring size")
        self.segments = decompose_segments(self.target)
        self.seg_start = np.array([s.start for s in self.segments], dtype=np.int64)
        self.seg_len = np.array([s.length for s in self.segments], dtype=np.int64)
        self.seg_kind = np.array([s.kind for s in self.segments], dtype=np.int64)
        self.short_thresh = defended_x_threshold(p.alpha)
        self.budget = aggressive_budget(self.target, p.alpha)
        if drop_defense is None:
            self.drop_seg, self.drop_high = -1, False
        else:
            idx, side = drop_defense
            if side not in ("low", "high"):
                raise ValueError("drop side must be 'low' or 'high'")
            self.drop_seg, self.drop_high = idx, side == "high"
            self.budget -= 1
        if gamma is not None:
            allowed = budget_nodes(gamma, g.n)
            if self.budget > allowed:
                raise InfeasibleBudgetError(self.budget, allowed)

    def influence_sets(self, a, rng=None) -> InfluenceSets:
        cur = as_profile(a)
        inf = np.zeros(self.g.n, dtype=np.int8)
        _kernels.aggressive_fill(
            inf, cur, self.seg_start, self.seg_len, self.seg_kind,
            self.short_thresh, self.drop_seg, self.drop_high,
        )
        return InfluenceSets(
            frozenset(np.flatnonzero(inf == 1).tolist()),
            frozenset(np.flatnonzero(inf == 2).tolist()),
        )

    def agent_influence_options(self, a, i: int) -> tuple[int, ...]:
        inf = self.influence_sets(a)
        if i in inf.s_x:
            return (1,)
        if i in inf.s_y:
            return (2,)
        return (0,)

    def max_nodes(self) -> int:
        return self.budget

    def influence_table(self) -> np.ndarray:
        """Influence codes for all 2^n states (oracle support)."""
        return _kernels.aggressive_influence_table(
            self.g.n, self.seg_start, self.seg_len, self.seg_kind,
            self.short_thresh, self.drop_seg, self.drop_high,
        )

    def kernel_args(self, g: RingGraph, p: GameParams) -> Optional[dict]:
        return {
            "policy_id": _kernels.POLICY_AGGRESSIVE,
            "seg_start": self.seg_start,
            "seg_len": self.seg_len,
            "seg_kind": self.seg_kind,
            "short_thresh": self.short_thresh,
            "drop_seg": self.drop_seg,
            "drop_high": self.drop_high,
        }


def aggressive_influence(
    g: RingGraph, p: GameParams, target: Sequence[int], current: Sequence[int]
) -> InfluenceSets:
    """One-shot evaluation of the aggressive placement at a state."""
    return AggressivePolicy(g, p, target).influence_sets(current)


@dataclass
class PolicySpec:
    """Serializable description of an adversary for experiment configs."""

    klass: str  # SU | SI | DU | DI | NONE
    gamma: float = 0.0
    gamma_prime: Optional[float] = None
    target: Optional[np.ndarray] = None

    def build(self, g: RingGraph, p: GameParams):
        kl = self.klass.upper()
        if kl == "NONE":
            return NoAdversary()
        if kl == "SU":
            return StaticPolicy(
                static_uninformed_allocation(g, p, self.gamma),
                intended_profile=static_uninformed_profile(g, p, self.gamma),
            )
        if kl == "SI":
            if self.target is None:
                raise ValueError("SI policy needs a target profile")
            return static_informed_policy(g, p, self.target, self.gamma)
        if kl == "DU":
            return DynamicUninformedPolicy(g, self.gamma, self.gamma_prime)
        if kl == "DI":
            if self.target is None:
                raise ValueError("DI policy needs a target profile")
            return AggressivePolicy(g, p, self.target, gamma=self.gamma)
        raise ValueError(f"unknown policy class {self.klass!r}")
