"""k-connected ring graphs and segment decomposition of action profiles.

Agents sit on a ring of n nodes; each is linked to its k nearest nodes on
either side (modulo n).  k = 1 is the plain cycle, k = floor(n/2) with even
n is the complete graph.  Profiles over the two conventions decompose into
maximal alternating runs ("segments"), which all the segment-level analysis
downstream builds on.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Convention codes used everywhere in the package.
X, Y = 0, 1


@dataclass(frozen=True)
class RingGraph:
    """A k-connected ring on n agents."""

    n: int
    k: int = 1

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"need at least 3 agents, got n={self.n}")
        if not 1 <= self.k <= self.n // 2:
            raise ValueError(f"k must be in [1, n//2]={self.n // 2}, got k={self.k}")

    def neighbors(self, i: int) -> frozenset[int]:
        return neighbors(self, i)

    def edges(self) -> list[tuple[int, int]]:
        """Undirected edge list, each pair listed once with i < j."""
        out = set()
        for i in range(self.n):
            for j in neighbors(self, i):
                out.add((min(i, j), max(i, j)))
        return sorted(out)


def neighbors(g: RingGraph, i: int) -> frozenset[int]:
    """Set of the 2k modular neighbors of agent i (duplicates collapse).

    For k = n/2 on an even ring the offsets +k and -k coincide, so set
    semantics yield n-1 neighbors and the graph is complete.
    """
    if not 0 <= i < g.n:
        raise IndexError(f"agent index {i} out of range for n={g.n}")
    out = set()
    for d in range(1, g.k + 1):
        out.add((i + d) % g.n)
        out.add((i - d) % g.n)
    out.discard(i)
    return frozenset(out)


@dataclass(frozen=True)
class Segment:
    """Maximal run of agents playing one convention, in ring order.

    ``boundary_free`` marks the degenerate single segment of a homogeneous
    profile, which has no x/y boundary on either side.
    """

    start: int
    length: int
    kind: int  # X or Y
    n: int
    boundary_free: bool = False

    def members(self) -> list[int]:
        return [(self.start + j) % self.n for j in range(self.length)]

    @property
    def end(self) -> int:
        """Last member (inclusive)."""
        return (self.start + self.length - 1) % self.n


def as_profile(a: Sequence[int] | np.ndarray) -> np.ndarray:
    arr = np.asarray(a, dtype=np.int8)
    if arr.ndim != 1:
        raise ValueError("profile must be one-dimensional")
    if not np.all((arr == X) | (arr == Y)):
        raise ValueError("profile entries must be X (0) or Y (1)")
    return arr


def decompose_segments(a: Sequence[int] | np.ndarray) -> list[Segment]:
    """Split a ring profile into maximal alternating segments.

    Segments are returned in ring order starting from the lowest-index
    boundary (an agent whose predecessor plays the other convention), which
    makes the decomposition canonical.  A homogeneous profile yields a
    single boundary-free segment covering the ring.
    """
    arr = as_profile(a)
    n = len(arr)
    starts = [i for i in range(n) if arr[i] != arr[(i - 1) % n]]
    if not starts:
        return [Segment(0, n, int(arr[0]), n, boundary_free=True)]
    segs = []
    for idx, s in enumerate(starts):
        nxt = starts[(idx + 1) % len(starts)]
        length = (nxt - s) % n or n
        segs.append(Segment(s, length, int(arr[s]), n))
    return segs


def profile_from_segments(segs: Sequence[Segment], n: int) -> np.ndarray:
    out = np.empty(n, dtype=np.int8)
    out.fill(-1)
    for seg in segs:
        for m in seg.members():
            out[m] = seg.kind
    if np.any(out < 0):
        raise ValueError("segments do not cover the ring")
    return out


def all_x(n: int) -> np.ndarray:
    return np.full(n, X, dtype=np.int8)


def all_y(n: int) -> np.ndarray:
    return np.full(n, Y, dtype=np.int8)


def profile_from_string(spec: str, n: int) -> np.ndarray:
    """Parse a run-length profile spec like ``"x2y5"``.

    The pattern is repeated to fill the ring, so its total length must
    divide n.
    """
    import re

    tokens = re.findall(r"([xy])(\d+)", spec.strip().lower())
    if not tokens or "".join(f"{c}{d}" for c, d in tokens) != spec.strip().lower():
        raise ValueError(f"bad profile spec {spec!r}; expected e.g. 'x2y5'")
    unit = []
    for conv, cnt in tokens:
        unit.extend([X if conv == "x" else Y] * int(cnt))
    if n % len(unit) != 0:
        raise ValueError(f"pattern length {len(unit)} does not divide n={n}")
    return np.asarray(unit * (n // len(unit)), dtype=np.int8)


def profile_to_string(a: Sequence[int] | np.ndarray) -> str:
    segs = decompose_segments(a)
    return "".join(f"{'x' if s.kind == X else 'y'}{s.length}" for s in segs)
