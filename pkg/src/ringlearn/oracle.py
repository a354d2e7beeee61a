"""Exact stochastic-stability computation on small rings.

States are profile bitmasks (bit i set means agent i plays y).  For a
stationary adversary the perturbed revision chain is analyzed through its
resistance graph: recurrent classes are the sink strongly connected
components of the zero-resistance digraph, inter-class resistances are
shortest paths over the full single-revision graph, and the stochastic
potential of a class is the cheapest spanning in-arborescence rooted there.
Stochastically stable states are the classes of minimum stochastic
potential; for static adversaries they coincide with the maximizers of the
potential function, which gives an independent cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Optional, Sequence

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from .game import GameParams, InfluenceSets, optimal_welfare, pairwise_payoff
from .policies import AggressivePolicy, DynamicUninformedPolicy, StaticPolicy
from .topology import RingGraph, X, Y, as_profile

#: 2^n states are enumerated; refuse anything beyond this by default
DEFAULT_ENUM_CAP = 14

#: resistances are affine in alpha with small integer coefficients, so
#: anything closer than this is a genuine tie
RESIST_TOL = 1e-9


class EnumerationCapError(ValueError):
    def __init__(self, n: int, cap: int):
        super().__init__(
            f"exact analysis enumerates 2^n profiles; n={n} exceeds the cap {cap} "
            "(raise `cap` explicitly if you really want this)"
        )


def state_to_profile(s: int, n: int) -> np.ndarray:
    return np.array([(s >> i) & 1 for i in range(n)], dtype=np.int8)


def profile_to_state(a: Sequence[int]) -> int:
    arr = as_profile(a)
    return int(sum(int(b) << i for i, b in enumerate(arr)))


def _action_code(z) -> int:
    if z in (X, Y):
        return int(z)
    if isinstance(z, str):
        if z.lower() == "x":
            return X
        if z.lower() == "y":
            return Y
    raise ValueError(f"unknown action {z!r}")


def _adv_code(s) -> int:
    if s in (None, 0, "none", ""):
        return 0
    if s in (1, "x"):
        return 1
    if s in (2, "y"):
        return 2
    raise ValueError(f"unknown adversary type {s!r}")


def deviation_resistance(z, b: int, s, alpha: float, k: int = 1) -> float:
    """Resistance of a unilateral deviation from local data.

    The deviating agent plays z with b same-convention neighbors (out of 2k)
    and hosts an adversary of type s; the resistance is its clamped
    perceived-utility loss from switching.
    """
    if not 0 <= b <= 2 * k:
        raise ValueError(f"need 0 <= b <= 2k, got b={b}, k={k}")
    z = _action_code(z)
    s = _adv_code(s)
    zp = 1 - z
    pay = {X: 1.0 + alpha, Y: 1.0}
    u_cur = b * pay[z]
    u_dev = (2 * k - b) * pay[zp]
    if s == 1:
        u_cur += pay[X] if z == X else 0.0
        u_dev += pay[X] if zp == X else 0.0
    elif s == 2:
        u_cur += pay[Y] if z == Y else 0.0
        u_dev += pay[Y] if zp == Y else 0.0
    return max(u_cur - u_dev, 0.0)


def transition_resistance(g: RingGraph, p: GameParams, a1, a2, policy) -> float:
    """Resistance of the single-revision edge a1 -> a2.

    Influence sets are evaluated at the source state; for randomized
    policies the minimum over the support's per-agent membership options is
    taken, since the selection probabilities carry no perturbation order.
    """
    a1 = as_profile(a1)
    a2 = as_profile(a2)
    diff = np.flatnonzero(a1 != a2)
    if len(diff) == 0:
        return 0.0
    if len(diff) > 1:
        raise ValueError("profiles differ in more than one coordinate; no edge")
    i = int(diff[0])
    nbrs = g.neighbors(i)
    b = sum(1 for j in nbrs if a1[j] == a1[i])
    options = _policy_options_at(policy, a1, i)
    deg = len(nbrs)
    # collapsed neighbor pairs (k = n/2) reduce the degree below 2k
    best = None
    for code in options:
        r = _resist_local(int(a1[i]), b, deg, code, p.alpha)
        best = r if best is None else min(best, r)
    return best


def _resist_local(z: int, b: int, deg: int, code: int, alpha: float) -> float:
    pay = {X: 1.0 + alpha, Y: 1.0}
    zp = 1 - z
    u_cur = b * pay[z]
    u_dev = (deg - b) * pay[zp]
    if code == 1:
        u_cur += pay[X] if z == X else 0.0
        u_dev += pay[X] if zp == X else 0.0
    elif code == 2:
        u_cur += pay[Y] if z == Y else 0.0
        u_dev += pay[Y] if zp == Y else 0.0
    return max(u_cur - u_dev, 0.0)


def _policy_options_at(policy, a, i: int) -> tuple[int, ...]:
    if hasattr(policy, "agent_influence_options"):
        return policy.agent_influence_options(a, i)
    inf = policy.influence_sets(a)
    if i in inf.s_x:
        return (1,)
    if i in inf.s_y:
        return (2,)
    return (0,)


# ---------------------------------------------------------------------------
# vectorized resistance matrix over the full state space


def _check_cap(n: int, cap: Optional[int]):
    cap = DEFAULT_ENUM_CAP if cap is None else cap
    if n > cap:
        raise EnumerationCapError(n, cap)


def _bits(n: int) -> np.ndarray:
    states = np.arange(1 << n, dtype=np.int64)
    return ((states[:, None] >> np.arange(n)) & 1).astype(np.int8)


def _resistance_by_code(g: RingGraph, p: GameParams, bits: np.ndarray) -> np.ndarray:
    """r[code, state, agent] for the three influence codes (none, x, y)."""
    n, al = g.n, p.alpha
    nstates = bits.shape[0]
    out = np.empty((3, nstates, n))
    for i in range(n):
        nbrs = sorted(g.neighbors(i))
        deg = len(nbrs)
        cy = np.zeros(nstates, dtype=np.int16)
        for j in nbrs:
            cy += bits[:, j]
        cx = deg - cy
        is_x = bits[:, i] == 0
        u_cur = np.where(is_x, cx * (1.0 + al), cy.astype(float))
        u_dev = np.where(is_x, cy.astype(float), cx * (1.0 + al))
        base = u_cur - u_dev
        # x-adversary adds (1+alpha) to whichever side plays x, y adds 1 to y
        out[0, :, i] = np.maximum(base, 0.0)
        out[1, :, i] = np.maximum(base + np.where(is_x, 1.0 + al, -(1.0 + al)), 0.0)
        out[2, :, i] = np.maximum(base + np.where(is_x, -1.0, 1.0), 0.0)
    return out


def _influence_plan(g: RingGraph, policy, nstates: int):
    """('options', per-agent code tuples) or ('table', per-state code matrix)."""
    if isinstance(policy, AggressivePolicy):
        return "table", policy.influence_table()
    if isinstance(policy, (StaticPolicy, DynamicUninformedPolicy)):
        opts = [policy.agent_influence_options(None, i) for i in range(g.n)]
        return "options", opts
    # generic deterministic fallback
    table = np.zeros((nstates, g.n), dtype=np.int8)
    for s in range(nstates):
        inf = policy.influence_sets(state_to_profile(s, g.n))
        for i in inf.s_x:
            table[s, i] = 1
        for i in inf.s_y:
            table[s, i] = 2
    return "table", table


def resistance_matrix(
    g: RingGraph, p: GameParams, policy, cap: Optional[int] = None
) -> np.ndarray:
    """r[state, agent]: resistance of flipping that agent from that state."""
    _check_cap(g.n, cap)
    bits = _bits(g.n)
    by_code = _resistance_by_code(g, p, bits)
    kind, plan = _influence_plan(g, policy, bits.shape[0])
    n = g.n
    if kind == "table":
        r = np.empty((bits.shape[0], n))
        for i in range(n):
            r[:, i] = by_code[plan[:, i], np.arange(bits.shape[0]), i]
        return r
    r = np.full((bits.shape[0], n), np.inf)
    for i in range(n):
        for code in plan[i]:
            r[:, i] = np.minimum(r[:, i], by_code[code, :, i])
    return r


def _flip_targets(n: int) -> np.ndarray:
    states = np.arange(1 << n, dtype=np.int64)
    return states[:, None] ^ (np.int64(1) << np.arange(n, dtype=np.int64))


def _graph_csr(r: np.ndarray, n: int, only_zero: bool = False) -> csr_matrix:
    nstates = r.shape[0]
    rows = np.repeat(np.arange(nstates, dtype=np.int64), n)
    cols = _flip_targets(n).ravel()
    data = r.ravel()
    if only_zero:
        mask = data <= RESIST_TOL
        return csr_matrix(
            (np.ones(mask.sum()), (rows[mask], cols[mask])), shape=(nstates, nstates)
        )
    # keep zero-resistance edges explicit so dijkstra sees them
    data = np.maximum(data, 0.0)
    m = csr_matrix((data + 1.0, (rows, cols)), shape=(nstates, nstates))
    m.data -= 1.0
    return m


def recurrent_classes(
    g: RingGraph, p: GameParams, policy, cap: Optional[int] = None
) -> list[frozenset[int]]:
    """Sink strongly connected components of the zero-resistance digraph."""
    r = resistance_matrix(g, p, policy, cap)
    return _recurrent_from_matrix(r, g.n)


def _recurrent_from_matrix(r: np.ndarray, n: int) -> list[frozenset[int]]:
    zero = _graph_csr(r, n, only_zero=True)
    ncomp, labels = connected_components(zero, directed=True, connection="strong")
    targets = _flip_targets(n)
    sinks = np.ones(ncomp, dtype=bool)
    zmask = r <= RESIST_TOL
    src_labels = labels[np.arange(r.shape[0])]
    for i in range(n):
        m = zmask[:, i]
        leaving = labels[targets[m, i]] != src_labels[m]
        bad = np.unique(src_labels[m][leaving])
        sinks[bad] = False
    classes = []
    for c in range(ncomp):
        if sinks[c]:
            classes.append(frozenset(np.flatnonzero(labels == c).tolist()))
    classes.sort(key=min)
    return classes


@dataclass
class ResistanceModel:
    """Recurrent classes with pairwise path resistances and potentials."""

    classes: list[frozenset[int]]
    rho: np.ndarray
    psi: np.ndarray

    def sss(self) -> frozenset[int]:
        best = self.psi.min()
        out: set[int] = set()
        for k, cls in enumerate(self.classes):
            if self.psi[k] <= best + RESIST_TOL:
                out |= cls
        return frozenset(out)


def inter_class_resistances(
    r: np.ndarray, n: int, classes: list[frozenset[int]]
) -> np.ndarray:
    """Minimum path resistance between every ordered pair of classes."""
    graph = _graph_csr(r, n)
    nc = len(classes)
    rho = np.zeros((nc, nc))
    for a, cls in enumerate(classes):
        dist = dijkstra(graph, directed=True, indices=sorted(cls), min_only=True)
        for b, other in enumerate(classes):
            if a != b:
                rho[a, b] = min(dist[s] for s in other)
    return rho


def _psi_brute(rho: np.ndarray) -> np.ndarray:
    """Exhaustive minimum in-arborescence weights, for small class counts."""
    nc = rho.shape[0]
    psi = np.full(nc, np.inf)
    for root in range(nc):
        others = [j for j in range(nc) if j != root]
        for succs in product(range(nc), repeat=len(others)):
            if any(s == o for o, s in zip(others, succs)):
                continue
            nxt = dict(zip(others, succs))
            ok = True
            total = 0.0
            for o in others:
                seen = {o}
                cur = o
                while cur != root:
                    cur = nxt[cur]
                    if cur in seen:
                        ok = False
                        break
                    seen.add(cur)
                if not ok:
                    break
            if ok:
                total = sum(rho[o, s] for o, s in nxt.items())
                psi[root] = min(psi[root], total)
    return psi


def _psi_arborescence(rho: np.ndarray) -> np.ndarray:
    """Minimum in-arborescence weights via Edmonds on the reversed digraph."""
    nc = rho.shape[0]
    psi = np.empty(nc)
    for root in range(nc):
        rev = nx.DiGraph()
        rev.add_nodes_from(range(nc))
        for u in range(nc):
            if u == root:
                continue  # forcing the root: it must not gain a parent edge
            for v in range(nc):
                if u != v:
                    rev.add_edge(v, u, weight=float(rho[u, v]))
        tree = nx.algorithms.tree.branchings.minimum_spanning_arborescence(rev)
        psi[root] = sum(d["weight"] for _, _, d in tree.edges(data=True))
    return psi


def stochastic_potentials(rho: np.ndarray) -> np.ndarray:
    nc = rho.shape[0]
    if nc == 1:
        return np.zeros(1)
    if nc <= 5:
        return _psi_brute(rho)
    return _psi_arborescence(rho)


def resistance_model(
    g: RingGraph, p: GameParams, policy, cap: Optional[int] = None
) -> ResistanceModel:
    r = resistance_matrix(g, p, policy, cap)
    classes = _recurrent_from_matrix(r, g.n)
    rho = inter_class_resistances(r, g.n, classes)
    psi = stochastic_potentials(rho)
    return ResistanceModel(classes=classes, rho=rho, psi=psi)


def stochastically_stable_states(
    g: RingGraph, p: GameParams, policy, cap: Optional[int] = None
) -> frozenset[int]:
    """States in minimum-stochastic-potential recurrent classes."""
    return resistance_model(g, p, policy, cap).sss()


def potential_vector(g: RingGraph, p: GameParams, inf: InfluenceSets) -> np.ndarray:
    """Potential of every state under static influence sets, vectorized."""
    bits = _bits(g.n)
    al = p.alpha
    phi = np.zeros(bits.shape[0])
    for i, j in g.edges():
        same = bits[:, i] == bits[:, j]
        phi += np.where(same & (bits[:, i] == 0), 1.0 + al, 0.0)
        phi += np.where(same & (bits[:, i] == 1), 1.0, 0.0)
    for i in inf.s_x:
        phi += np.where(bits[:, i] == 0, 1.0 + al, 0.0)
    for i in inf.s_y:
        phi += np.where(bits[:, i] == 1, 1.0, 0.0)
    return phi


def sss_static(
    g: RingGraph, p: GameParams, inf: InfluenceSets, cap: Optional[int] = None
) -> frozenset[int]:
    """Potential-maximizing states: the static-adversary SSS, computed directly."""
    _check_cap(g.n, cap)
    phi = potential_vector(g, p, inf)
    return frozenset(np.flatnonzero(phi >= phi.max() - RESIST_TOL).tolist())


def efficiency_of_state(g: RingGraph, p: GameParams, s: int) -> float:
    prof = state_to_profile(s, g.n)
    w = 0.0
    for i, j in g.edges():
        w += 2.0 * pairwise_payoff(p, int(prof[i]), int(prof[j]))
    return w / optimal_welfare(g, p)


def uninformed_path_resistances(k: int, alpha: float) -> tuple[float, float]:
    """Resistances of the seed paths between the homogeneous profiles.

    These are the k-consecutive-switch paths used by the randomized
    uninformed adversary: all-x to all-y with every switcher influenced, and
    all-y to all-x with none influenced.  The y-to-x value ignores the cost
    of eroding the always-influenced block, which adds (|T|-1)(1-alpha) on a
    1-ring with a block of size |T|.
    """
    rho_xy = sum((1.0 + alpha) * (2 * k - (i - 1)) - i for i in range(1, k + 1))
    rho_yx = sum(
        max((2 * k - (i - 1)) - (i - 1) * (1.0 + alpha), 0.0) for i in range(1, k + 1)
    )
    return rho_xy, rho_yx
