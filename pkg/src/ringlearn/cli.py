"""Command-line harness: simulate, bounds, oracle, sweep.

Outputs are CSV with a key=value metadata sidecar (UTF-8, LF, reals at six
significant digits).  Exit codes: 0 success, 2 configuration error,
3 infeasible experiment, 4 enumeration cap exceeded.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import __version__, bounds, dynamics, oracle, policies, topology
from .game import GameParams
from .game import efficiency as game_efficiency
from .oracle import EnumerationCapError
from .policies import InfeasibleBudgetError, UnstabilizableTargetError
from .topology import RingGraph, profile_from_string, profile_to_string

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_CAP = 4

MODELS = ("none", "su", "si", "du", "di")


@dataclass
class ExperimentConfig:
    model: str = "none"
    n: int = 30
    k: int = 1
    alpha: float = 0.5
    gamma: float = 1.0
    gamma_prime: Optional[float] = None
    beta: float = 25.0
    steps: int = 1_000_000
    reps: int = 30
    seed: int = 0
    target: Optional[str] = None
    output: Optional[str] = None

    def row_key(self) -> tuple:
        return (self.model, self.n, self.k, self.alpha, self.gamma,
                self.beta, self.steps, self.reps, self.seed)


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _write_csv(path: str, header: list[str], rows: list[list]):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_meta(path: str, entries: dict):
    with open(path + ".meta", "w", encoding="utf-8") as fh:
        for k, v in entries.items():
            fh.write(f"{k}={_fmt(v)}\n")


def _base_meta(extra: dict) -> dict:
    meta = {
        "ringlearn_version": __version__,
        "numpy_version": np.__version__,
        "python_version": platform.python_version(),
        "rng": "numba-mt19937/numpy-pcg64",
        "timestamp_unix": int(time.time()),
    }
    meta.update(extra)
    return meta


def build_experiment(cfg: ExperimentConfig):
    """Graph, params, per-rep policy and initial-state factories for a config.

    Informed models pick the minimum-efficiency stabilizable target for the
    given ring and budget unless an explicit target is supplied, then start
    at it; the uninformed-static model starts at its intended stable
    profile, and the uninformed-dynamic model starts from a random profile.
    """
    g = RingGraph(cfg.n, cfg.k)
    p = GameParams(cfg.alpha)
    model = cfg.model.lower()
    info: dict = {"model": model}

    if model == "none":
        policy = policies.NoAdversary()
        return g, p, (lambda rep: policy), (lambda rep, rng: topology.all_x(g.n)), info

    if model == "su":
        inf = policies.static_uninformed_allocation(g, p, cfg.gamma)
        prof = policies.static_uninformed_profile(g, p, cfg.gamma)
        policy = policies.StaticPolicy(inf, intended_profile=prof)
        info["target"] = profile_to_string(prof)
        return g, p, (lambda rep: policy), (lambda rep, rng: prof.copy()), info

    if model == "du":
        policy = policies.DynamicUninformedPolicy(g, cfg.gamma, cfg.gamma_prime)
        info["fixed_block"] = len(policy.fixed_block)

        def random_start(rep, rng):
            return rng.integers(0, 2, size=g.n).astype(np.int8)

        return g, p, (lambda rep: policy), random_start, info

    if model in ("si", "di"):
        if cfg.target:
            target = profile_from_string(cfg.target, g.n)
            info["target_efficiency"] = game_efficiency(g, p, target)
        else:
            target, eff = bounds.min_efficiency_target(g, p, cfg.gamma, model)
            info["target_efficiency"] = eff
        info["target"] = profile_to_string(target)
        if model == "si":
            policy = policies.static_informed_policy(g, p, target, cfg.gamma)
        else:
            policy = policies.AggressivePolicy(g, p, target, gamma=cfg.gamma)
        return g, p, (lambda rep: policy), (lambda rep, rng: target.copy()), info

    raise ValueError(f"unknown model {cfg.model!r}; expected one of {MODELS}")


def run_experiment(cfg: ExperimentConfig):
    g, p, policy_factory, a0_factory, info = build_experiment(cfg)
    sim = dynamics.SimConfig(beta=cfg.beta, steps=cfg.steps, seed=cfg.seed)
    mean, stderr, per_rep = dynamics.mean_efficiency_over_reps(
        g, p, policy_factory, sim, cfg.reps, a0_factory
    )
    return mean, stderr, per_rep, info


def _sim_rows(cfg: ExperimentConfig, mean, stderr, per_rep) -> list[list]:
    base = list(cfg.row_key())
    rows = [base + [rep, eff, ""] for rep, eff in enumerate(per_rep)]
    rows.append(base + ["all", mean, stderr])
    return rows


SIM_HEADER = ["model", "n", "k", "alpha", "gamma", "beta", "steps", "reps",
              "seed", "rep", "mean_efficiency", "std_error"]


def cmd_simulate(args) -> int:
    cfg = _config_from_args(args)
    t0 = time.time()
    mean, stderr, per_rep, info = run_experiment(cfg)
    elapsed = time.time() - t0
    print(f"model={cfg.model} n={cfg.n} alpha={cfg.alpha:.6g} gamma={cfg.gamma:.6g} "
          f"beta={cfg.beta:.6g} steps={cfg.steps} reps={cfg.reps}")
    if info.get("target"):
        print(f"target={info['target']}"
              + (f" target_efficiency={info['target_efficiency']:.6g}"
                 if info.get("target_efficiency") is not None else ""))
    print(f"mean_efficiency={mean:.6g} std_error={stderr:.6g} ({elapsed:.1f}s)")
    if cfg.output:
        _write_csv(cfg.output, SIM_HEADER, _sim_rows(cfg, mean, stderr, per_rep))
        meta = _base_meta({**{k: v for k, v in asdict(cfg).items() if v is not None},
                           **info, "elapsed_s": elapsed})
        _write_meta(cfg.output, meta)
    return EXIT_OK


def _parse_grid(text: str) -> list[float]:
    vals = [float(v) for v in text.split(",") if v.strip() != ""]
    if not vals:
        raise ValueError(f"empty grid {text!r}")
    return vals


BOUNDS_HEADER = ["model", "alpha", "gamma", "k", "search_bound", "value", "witness"]


def _witness_summary(w: Optional[bounds.SegmentDescription]) -> str:
    if w is None:
        return ""
    pats = [f"x{a}y{b}*{r}" for a, b, r in zip(w.lx, w.ly, w.r)]
    return "+".join(pats)


def cmd_bounds(args) -> int:
    alphas = _parse_grid(args.alpha_grid)
    gammas = _parse_grid(args.gamma_grid)
    rows = []
    for al in alphas:
        for gm in gammas:
            rows.append(["su", al, gm, args.k, "", bounds.su_bound(al, gm, args.k), ""])
            rows.append(["du", al, gm, args.k, "", bounds.du_bound(al, gm, args.k), ""])
            if args.k == 1:
                si = bounds.si_bound(al, gm, args.search_bound)
                di = bounds.di_bound(al, gm, args.search_bound)
                rows.append(["si", al, gm, 1, args.search_bound, si.value,
                             _witness_summary(si.witness)])
                rows.append(["di", al, gm, 1, args.search_bound, di.value,
                             _witness_summary(di.witness)])
    for row in rows:
        print(",".join(_fmt(v) for v in row))
    if args.output:
        _write_csv(args.output, BOUNDS_HEADER, rows)
        _write_meta(args.output, _base_meta({
            "alpha_grid": args.alpha_grid, "gamma_grid": args.gamma_grid,
            "k": args.k, "search_bound": args.search_bound,
        }))
    return EXIT_OK


ORACLE_HEADER = ["kind", "profile", "psi", "efficiency"]


def cmd_oracle(args) -> int:
    cfg = _config_from_args(args)
    g = RingGraph(cfg.n, cfg.k)
    p = GameParams(cfg.alpha)
    model = cfg.model.lower()
    target = profile_from_string(cfg.target, g.n) if cfg.target else None
    if model == "none":
        policy = policies.NoAdversary()
    elif model == "su":
        policy = policies.StaticPolicy(policies.static_uninformed_allocation(g, p, cfg.gamma))
    elif model == "si":
        if target is None:
            target, _ = bounds.min_efficiency_target(g, p, cfg.gamma, "si")
        policy = policies.static_informed_policy(g, p, target, cfg.gamma)
    elif model == "du":
        policy = policies.DynamicUninformedPolicy(g, cfg.gamma, cfg.gamma_prime)
    elif model == "di":
        if target is None:
            target, _ = bounds.min_efficiency_target(g, p, cfg.gamma, "di")
        policy = policies.AggressivePolicy(g, p, target, gamma=cfg.gamma)
    else:
        raise ValueError(f"unknown model {cfg.model!r}")

    model_res = oracle.resistance_model(g, p, policy, cap=args.cap)
    sss = model_res.sss()
    effs = {s: oracle.efficiency_of_state(g, p, s) for s in sss}
    rows = []
    print(f"recurrent classes: {len(model_res.classes)}")
    for idx, cls in enumerate(model_res.classes):
        rep = profile_to_string(oracle.state_to_profile(min(cls), g.n))
        print(f"  class {idx}: size={len(cls)} rep={rep} psi={model_res.psi[idx]:.6g}")
        rows.append(["class", rep, model_res.psi[idx],
                     oracle.efficiency_of_state(g, p, min(cls))])
    print(f"stochastically stable states ({len(sss)}):")
    for s in sorted(sss):
        prof = profile_to_string(oracle.state_to_profile(s, g.n))
        print(f"  {prof} efficiency={effs[s]:.6g}")
        rows.append(["sss", prof, "", effs[s]])
    print(f"min efficiency among SSS: {min(effs.values()):.6g}")
    if args.output:
        _write_csv(args.output, ORACLE_HEADER, rows)
        _write_meta(args.output, _base_meta(
            {k: v for k, v in asdict(cfg).items() if v is not None}))
    return EXIT_OK


def _table_preset() -> dict:
    return {
        "grid": {"model": ["su", "si", "du", "di"], "n": [10, 20, 30],
                 "alpha": [0.3, 0.5, 0.7]},
        "defaults": {"gamma": 1.0, "beta": 25.0, "steps": 1_000_000,
                     "reps": 30, "seed": 0, "k": 1},
    }


def _expand_grid(spec: dict) -> list[dict]:
    defaults = dict(spec.get("defaults", {}))
    grid = spec.get("grid", {})
    keys = sorted(grid)
    combos = [{}]
    for key in keys:
        vals = grid[key]
        if not isinstance(vals, list):
            raise ValueError(f"grid entry {key!r} must be a list")
        combos = [{**c, key: v} for c in combos for v in vals]
    return [{**defaults, **c} for c in combos]


def _run_row(row: dict) -> dict:
    cfg = ExperimentConfig(**row)
    t0 = time.time()
    try:
        mean, stderr, per_rep, info = run_experiment(cfg)
        status = "ok"
    except (InfeasibleBudgetError, UnstabilizableTargetError) as exc:
        mean, stderr, info, status = float("nan"), float("nan"), {}, f"infeasible: {exc}"
    return {"row": row, "mean": mean, "stderr": stderr,
            "status": status, "elapsed": time.time() - t0,
            "target": info.get("target", "")}


SWEEP_HEADER = ["model", "n", "k", "alpha", "gamma", "beta", "steps", "reps",
                "seed", "mean_efficiency", "std_error", "target", "status",
                "elapsed_s"]


def cmd_sweep(args) -> int:
    if args.preset == "table":
        spec = _table_preset()
    else:
        try:
            with open(args.config, encoding="utf-8") as fh:
                spec = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"cannot parse sweep config {args.config!r}: {exc}")
    rows = _expand_grid(spec)
    out_path = args.output or spec.get("output", "sweep.csv")

    done: set[tuple] = set()
    existing: list[list] = []
    if args.resume and os.path.exists(out_path):
        with open(out_path, newline="", encoding="utf-8") as fh:
            rd = csv.reader(fh)
            header = next(rd, None)
            for line in rd:
                existing.append(line)
                done.add(tuple(line[:9]))

    todo = []
    for row in rows:
        cfg = ExperimentConfig(**row)
        key = tuple(_fmt(v) for v in cfg.row_key())
        if key not in done:
            todo.append(row)

    workers = args.workers or int(os.environ.get("RINGLEARN_WORKERS", "1"))
    results = []
    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_row, todo))
    else:
        for row in todo:
            results.append(_run_row(row))

    out_rows = list(existing)
    for res in results:
        cfg = ExperimentConfig(**res["row"])
        out_rows.append([_fmt(v) for v in cfg.row_key()]
                        + [_fmt(res["mean"]), _fmt(res["stderr"]),
                           res["target"], res["status"], _fmt(res["elapsed"])])
        print(f"{cfg.model} n={cfg.n} alpha={cfg.alpha} gamma={cfg.gamma}: "
              f"{_fmt(res['mean'])} ({res['status']})")
    _write_csv(out_path, SWEEP_HEADER, out_rows)
    _write_meta(out_path, _base_meta({
        "rows_total": len(rows), "rows_run": len(todo),
        "workers": workers, "preset": args.preset or "",
    }))
    return EXIT_OK


def _config_from_args(args) -> ExperimentConfig:
    return ExperimentConfig(
        model=args.model, n=args.n, k=args.k, alpha=args.alpha,
        gamma=args.gamma, gamma_prime=args.gamma_prime, beta=args.beta,
        steps=args.steps, reps=args.reps, seed=args.seed,
        target=args.target, output=args.output,
    )


def _add_experiment_flags(sp, sim: bool):
    sp.add_argument("--model", default="none", choices=MODELS)
    sp.add_argument("--n", type=int, default=30 if sim else 10)
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--alpha", type=float, default=0.5)
    sp.add_argument("--gamma", type=float, default=1.0)
    sp.add_argument("--gamma-prime", type=float, default=None, dest="gamma_prime")
    sp.add_argument("--beta", type=float, default=25.0)
    sp.add_argument("--steps", type=int, default=1_000_000)
    sp.add_argument("--reps", type=int, default=30)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--target", type=str, default=None,
                    help="run-length profile spec, e.g. x2y5 (repeated to fill n)")
    sp.add_argument("--output", type=str, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ringlearn",
        description="Adversarially influenced log-linear learning on ring coordination games",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="run the learning dynamics under an adversary")
    _add_experiment_flags(sp, sim=True)
    sp.set_defaults(func=cmd_simulate)

    bp = sub.add_parser("bounds", help="evaluate worst-case efficiency bounds")
    bp.add_argument("--alpha-grid", default="0.5", dest="alpha_grid")
    bp.add_argument("--gamma-grid", default="0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0",
                    dest="gamma_grid")
    bp.add_argument("--k", type=int, default=1)
    bp.add_argument("--search-bound", type=int, default=bounds.DEFAULT_SEARCH_BOUND,
                    dest="search_bound")
    bp.add_argument("--output", type=str, default=None)
    bp.set_defaults(func=cmd_bounds)

    op = sub.add_parser("oracle", help="exact stochastically stable states (small n)")
    _add_experiment_flags(op, sim=False)
    op.add_argument("--cap", type=int, default=oracle.DEFAULT_ENUM_CAP)
    op.set_defaults(func=cmd_oracle)

    wp = sub.add_parser("sweep", help="batch experiments over parameter grids")
    wp.add_argument("--config", type=str, default=None, help="JSON sweep spec")
    wp.add_argument("--preset", type=str, default=None, choices=["table"])
    wp.add_argument("--output", type=str, default=None)
    wp.add_argument("--workers", type=int, default=None)
    wp.add_argument("--resume", action="store_true")
    wp.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "sweep" and not (args.config or args.preset):
        ap.error("sweep needs --config or --preset")
    try:
        return args.func(args)
    except (InfeasibleBudgetError, UnstabilizableTargetError) as exc:
        print(f"infeasible experiment: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except EnumerationCapError as exc:
        print(f"enumeration cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
