"""Seeded Monte Carlo trials, sweeps, oracle validation and support-profile dumps."""
from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from frisopt.ao import achievable_rate, ao_solve, initial_configuration, trace_rows, write_trace_csv
from frisopt.baselines import (
    draw_port_subset,
    exhaustive_oracle,
    gain_ratio,
    joint_exhaustive_oracle,
    oracle_work,
    per_port_codebooks,
    random_ports_baseline,
    top_h_baseline,
    ORACLE_GUARD,
)
from frisopt.channel import correlation_matrix, draw_channels, los_component, port_positions
from frisopt.config import ExperimentConfig
from frisopt.errors import InstanceTooLargeError
from frisopt.rng import stream
from frisopt.support_search import build_partition, support_at, support_profile

SCHEMES = ("proposed", "top_h", "random_ports")
CSV_HEADER = ["trial", "scheme", "iters", "abs_z", "rate", "delta_g"]
PROFILE_GRID = 4096


@dataclass(frozen=True)
class TrialRow:
    trial: int
    scheme: str
    iters: int
    abs_z: float
    rate: float
    delta_g: Optional[float] = None
    sweep_value: Optional[float] = None


@dataclass
class TrialResult:
    rows: list
    trace: object  # AoTrace of the proposed scheme
    # min over AO iterations of proposed |z| minus the best benchmark |z| on the same link
    dominance_margin: float = float("inf")
    subproblem_delta_g: list = field(default_factory=list)


@lru_cache(maxsize=16)
def _geometry_cache(geom, n):
    corr = correlation_matrix(port_positions(geom), geom.wavelength)
    return corr, los_component(geom, n)


def realization(cfg: ExperimentConfig, trial: int):
    corr, los = _geometry_cache(cfg.geometry, cfg.n)
    return draw_channels(cfg.geometry, cfg.params, corr, stream(cfg.master_seed, trial, "channel"), los=los)


def run_trial(cfg: ExperimentConfig, trial: int, oracle: bool = False) -> TrialResult:
    """All schemes on one shared realization, started from one shared random configuration."""
    params = cfg.params
    real = realization(cfg, trial)
    cb = cfg.codebook_for_trial(trial)
    m_o = params.m_o
    w0 = initial_configuration(real.num_ports, m_o, cb, stream(cfg.master_seed, trial, "init"))
    rand_gamma = draw_port_subset(real.num_ports, m_o, stream(cfg.master_seed, trial, "baseline"))
    cbs = per_port_codebooks(cb, real.num_ports)

    margin = [float("inf")]
    sub_dg = []

    def watch(t, link, config):
        best_bench = max(top_h_baseline(link, m_o, cbs).abs_z,
                         random_ports_baseline(link, m_o, cbs, None, gamma=rand_gamma).abs_z)
        margin[0] = min(margin[0], config.abs_z - best_bench)
        if oracle:
            z_opt, _ = exhaustive_oracle(link, m_o, cb)
            sub_dg.append(gain_ratio(config.z, z_opt))

    results = {
        "proposed": ao_solve(real, params, cb, w0=w0, observer=watch),
        "top_h": ao_solve(real, params, cb, w0=w0, fris_update=lambda link: top_h_baseline(link, m_o, cbs)),
        "random_ports": ao_solve(
            real, params, cb, w0=w0,
            fris_update=lambda link: random_ports_baseline(link, m_o, cbs, None, gamma=rand_gamma)),
    }
    z_opt = joint_exhaustive_oracle(real, m_o, cb, params.p)[0] if oracle else None
    rows = [
        TrialRow(trial, name, res.trace.iterations, res.abs_z, achievable_rate(res.config.z, params.sigma2),
                 None if z_opt is None else gain_ratio(res.config.z, z_opt))
        for name, res in results.items()
    ]
    return TrialResult(rows, results["proposed"].trace, margin[0], sub_dg)


def _run_one(args):
    cfg, trial, oracle = args
    return run_trial(cfg, trial, oracle)


@dataclass
class RunResult:
    config: ExperimentConfig
    rows: list
    trials: list  # TrialResult per (sweep point, trial), in order
    summary: dict

    def csv_text(self) -> str:
        swept = self.config.sweep is not None
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow((["sweep_value"] if swept else []) + CSV_HEADER)
        for r in self.rows:
            row = [r.trial, r.scheme, r.iters, f"{r.abs_z:.17g}", f"{r.rate:.17g}",
                   "" if r.delta_g is None else f"{r.delta_g:.17g}"]
            writer.writerow(([r.sweep_value] if swept else []) + row)
        return buf.getvalue()

    def write(self, path: str):
        with open(path, "w", newline="") as fh:
            fh.write(self.csv_text())
        with open(path + ".summary.json", "w") as fh:
            json.dump(self.summary, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _summarize(rows: list, extra: dict) -> dict:
    groups = {}
    for r in rows:
        groups.setdefault((r.sweep_value, r.scheme), []).append(r)
    points = []
    for (value, scheme), rs in groups.items():
        entry = {
            "sweep_value": value,
            "scheme": scheme,
            "trials": len(rs),
            "mean_rate": float(np.mean([r.rate for r in rs])),
            "mean_abs_z": float(np.mean([r.abs_z for r in rs])),
            "mean_iters": float(np.mean([r.iters for r in rs])),
        }
        if all(r.delta_g is not None for r in rs):
            entry["mean_delta_g"] = float(np.mean([r.delta_g for r in rs]))
        points.append(entry)
    return {"points": points, **extra}


def _execute(cfg: ExperimentConfig, oracle: bool, threads: int) -> RunResult:
    jobs, values = [], []
    for value, point in cfg.points():
        if oracle:
            sizes = [len(c) for c in per_port_codebooks(point.codebook_for_trial(0), point.num_ports)]
            work = oracle_work(point.num_ports, point.m_o, sizes)
            if work > ORACLE_GUARD:
                raise InstanceTooLargeError(f"exhaustive search needs {work} evaluations (> {ORACLE_GUARD})")
        for trial in range(cfg.trials):
            jobs.append((point, trial, oracle))
            values.append(value)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (8 * threads))))
    else:
        results = [_run_one(j) for j in jobs]
    rows = []
    for value, res in zip(values, results):
        rows.extend(TrialRow(**{**r.__dict__, "sweep_value": value}) for r in res.rows)
    extra = {"config": cfg.to_dict()}
    if oracle:
        sub = [g for res in results for g in res.subproblem_delta_g]
        extra["subproblem_delta_g"] = {"min": float(np.min(sub)), "max": float(np.max(sub)), "count": len(sub)}
    return RunResult(cfg, rows, results, _summarize(rows, extra))


def run_trials(cfg: ExperimentConfig, threads: int = 1) -> RunResult:
    """Monte Carlo over ``cfg.trials`` realizations for every sweep point."""
    return _execute(cfg, oracle=False, threads=threads)


def validate_against_oracle(cfg: ExperimentConfig, threads: int = 1) -> RunResult:
    """Like :func:`run_trials` but with gain ratios against exhaustive search.

    ``delta_g`` compares each scheme with the joint optimum (every configuration paired
    with its MRT beamformer); the summary also carries the per-iteration ratio of the
    proposed FRIS update against the fixed-beamformer oracle.
    """
    return _execute(cfg, oracle=True, threads=threads)


def convergence_rows(cfg: ExperimentConfig, threads: int = 1) -> str:
    result = run_trials(cfg, threads)
    rows = [row for i, res in enumerate(result.trials) for row in trace_rows(i % cfg.trials, res.trace)]
    return write_trace_csv(rows)


def dump_support_profile(cfg: ExperimentConfig, trial: int = 0, n_grid: int = PROFILE_GRID) -> str:
    """CSV ``phi,support,gamma,kind`` at the converged beamformer of the proposed scheme.

    ``kind`` is ``grid`` for the uniform samples, ``candidate`` for critical angles and
    ``star`` for the selected direction.
    """
    params = cfg.params
    real = realization(cfg, trial)
    cb = cfg.codebook_for_trial(trial)
    w0 = initial_configuration(real.num_ports, params.m_o, cb, stream(cfg.master_seed, trial, "init"))
    res = ao_solve(real, params, cb, w0=w0)
    return profile_csv(res.link, cb, params.m_o, res.config.phi, n_grid)


def profile_csv(link, cb, m_o, phi_star, n_grid: int = PROFILE_GRID) -> str:
    grid = 2.0 * np.pi * np.arange(n_grid) / n_grid
    cands = build_partition(link, m_o, cb).candidates()
    phis = np.concatenate([grid, cands, [phi_star]])
    kinds = ["grid"] * grid.size + ["candidate"] * cands.size + ["star"]
    values = support_profile(phis, link, cb, m_o)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["phi", "support", "gamma", "kind"])
    for phi, val, kind in zip(phis, values, kinds):
        gamma = support_at(phi, link, cb, m_o).gamma
        writer.writerow([f"{phi:.17g}", f"{val:.17g}", " ".join(map(str, gamma)), kind])
    return buf.getvalue()
