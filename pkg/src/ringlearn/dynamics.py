"""Log-linear learning: asynchronous softmax revisions on the ring.

One uniformly chosen agent per step re-samples its convention with
probabilities proportional to exp(beta * perceived utility); everyone else
repeats.  Trajectories are deterministic given (config, seed).  The four
built-in adversary classes run through a compiled kernel; any other policy
object with an ``influence_sets(profile, rng)`` method runs on a plain
Python path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .game import GameParams, InfluenceSets, optimal_welfare, perceived_utility, welfare
from .policies import NoAdversary
from .topology import RingGraph, as_profile


@dataclass(frozen=True)
class SimConfig:
    beta: float = 25.0
    steps: int = 1_000_000
    seed: int = 0
    burn_in: int = 0

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if self.steps <= self.burn_in or self.burn_in < 0:
            raise ValueError("need steps > burn_in >= 0")


@dataclass
class Trajectory:
    """Outcome of one simulated run."""

    final_state: np.ndarray
    mean_efficiency: float
    steps: int
    burn_in: int
    states: Optional[np.ndarray] = None  # per-step state bitmasks when recorded
    metadata: dict = field(default_factory=dict)


def update_distribution(
    g: RingGraph,
    p: GameParams,
    a: Sequence[int],
    i: int,
    inf: InfluenceSets,
    beta: float,
) -> tuple[float, float]:
    """(P(x), P(y)) for agent i's revision, overflow-safe via max-shift."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    arr = as_profile(a).copy()
    arr[i] = 0
    ux = perceived_utility(g, p, arr, i, inf)
    arr[i] = 1
    uy = perceived_utility(g, p, arr, i, inf)
    m = max(ux, uy)
    ex = math.exp(beta * (ux - m))
    ey = math.exp(beta * (uy - m))
    return ex / (ex + ey), ey / (ex + ey)


def step(
    g: RingGraph,
    p: GameParams,
    a: Sequence[int],
    policy,
    beta: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """One revision.  RNG order: agent index, policy draws, action uniform."""
    arr = as_profile(a).copy()
    i = int(rng.integers(g.n))
    inf = policy.influence_sets(arr, rng)
    px, _ = update_distribution(g, p, arr, i, inf, beta)
    arr[i] = 0 if rng.random() < px else 1
    return arr


def _kernel_run(g, p, policy, cfg, a0, record_states):
    args = policy.kernel_args(g, p)
    n = g.n
    empty_i8 = np.zeros(0, dtype=np.int8)
    empty_i64 = np.zeros(0, dtype=np.int64)
    final, mean_eff, rec = _kernels.run_chain(
        a0,
        g.k,
        p.alpha,
        cfg.beta,
        cfg.steps,
        cfg.burn_in,
        cfg.seed % (2**32),
        args["policy_id"],
        args.get("inf_static", np.zeros(n, dtype=np.int8)),
        args.get("t_mask", np.zeros(n, dtype=np.int8)),
        args.get("extra_count", 0),
        args.get("seg_start", empty_i64),
        args.get("seg_len", empty_i64),
        args.get("seg_kind", empty_i64),
        args.get("short_thresh", -1),
        args.get("drop_seg", -1),
        args.get("drop_high", False),
        optimal_welfare(g, p),
        record_states,
    )
    return Trajectory(
        final_state=final,
        mean_efficiency=float(mean_eff),
        steps=cfg.steps,
        burn_in=cfg.burn_in,
        states=rec if record_states else None,
        metadata={"rng": "numba-mt19937", "seed": cfg.seed, "path": "kernel",
                  "draw_order": "agent,policy,action"},
    )


def _python_run(g, p, policy, cfg, a0, record_states):
    rng = np.random.default_rng(cfg.seed)
    arr = a0.copy()
    w_opt = optimal_welfare(g, p)
    eff_sum = 0.0
    rec = np.zeros(cfg.steps, dtype=np.uint64) if record_states else None
    for t in range(cfg.steps):
        i = int(rng.integers(g.n))
        inf = policy.influence_sets(arr, rng)
        px, _ = update_distribution(g, p, arr, i, inf, cfg.beta)
        arr[i] = 0 if rng.random() < px else 1
        if t >= cfg.burn_in:
            eff_sum += welfare(g, p, arr)
        if record_states:
            rec[t] = sum(int(b) << j for j, b in enumerate(arr))
    return Trajectory(
        final_state=arr,
        mean_efficiency=eff_sum / ((cfg.steps - cfg.burn_in) * w_opt),
        steps=cfg.steps,
        burn_in=cfg.burn_in,
        states=rec,
        metadata={"rng": "numpy-pcg64", "seed": cfg.seed, "path": "python",
                  "draw_order": "agent,policy,action"},
    )


def run(
    g: RingGraph,
    p: GameParams,
    policy,
    cfg: SimConfig,
    a0: Sequence[int],
    record_states: bool = False,
) -> Trajectory:
    """Simulate the chain for cfg.steps and time-average efficiency.

    Efficiency is averaged over the post-update states of every step after
    burn_in.  The compiled path is used whenever the policy provides kernel
    arguments and the ring has no collapsed neighbor pairs (2k < n).
    """
    a0 = as_profile(a0)
    if len(a0) != g.n:
        raise ValueError("initial profile length does not match the ring")
    kernel_ok = 2 * g.k < g.n and (not record_states or g.n <= 62)
    if kernel_ok and getattr(policy, "kernel_args", None):
        args = policy.kernel_args(g, p)
        if args is not None:
            return _kernel_run(g, p, policy, cfg, a0, record_states)
    return _python_run(g, p, policy, cfg, a0, record_states)


def mean_efficiency_over_reps(
    g: RingGraph,
    p: GameParams,
    policy_factory,
    cfg: SimConfig,
    reps: int,
    a0_factory,
) -> tuple[float, float, list[float]]:
    """Average per-repetition mean efficiencies over independent seeds.

    ``policy_factory(rep)`` and ``a0_factory(rep, rng)`` build the adversary
    and initial profile per repetition; repetition seeds derive from the
    base seed through SeedSequence spawn keys.  Returns (mean, standard
    error, per-rep values).
    """
    if reps < 1:
        raise ValueError("need at least one repetition")
    vals = []
    for rep in range(reps):
        ss = np.random.SeedSequence(entropy=cfg.seed, spawn_key=(rep,))
        rep_seed = int(ss.generate_state(1)[0])
        rep_cfg = SimConfig(beta=cfg.beta, steps=cfg.steps, seed=rep_seed, burn_in=cfg.burn_in)
        rng = np.random.default_rng(rep_seed)
        policy = policy_factory(rep)
        a0 = a0_factory(rep, rng)
        vals.append(run(g, p, policy, rep_cfg, a0).mean_efficiency)
    arr = np.asarray(vals)
    stderr = float(arr.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    return float(arr.mean()), stderr, vals
