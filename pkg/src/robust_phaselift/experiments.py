"""Experiment drivers: phase diagrams, threshold sweeps, the balance curve,
ROBC and certificate studies.

Every trial draws from its own PCG64 stream keyed by (seed, n, m, s, trial),
so a cell's results do not depend on which worker ran it or in what order.
Workers are processes; results are reassembled in task order before anything
is written.
"""
from __future__ import annotations

import csv
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import balance as _balance
from .certificate import construct_dual, expected_certificate, verify_certificate
from .robc import empirical_lower_bound
from .sensing import (
    SensingEnsemble,
    gen_adversarial_outliers,
    gen_rademacher_outliers,
    make_rng,
    measure,
)
from .solver import SolverConfig, relative_error, solve

RHO_STAR = 0.795
SIGNAL_AMPLITUDE = 0.1
SUCCESS_TOL = 0.1


def fmt(x) -> str:
    """Fixed CSV number format: 9 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.9g}"


def write_csv(path, header, rows, footer=()):
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
        for row in footer:
            w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("RPL_THREADS", "1") or 1)
    return max(1, int(threads))


def run_tasks(fn, tasks, threads: int | None = None):
    """``[fn(t) for t in tasks]``, optionally fanned out over processes."""
    threads = resolve_threads(threads)
    tasks = list(tasks)
    if threads == 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * threads))))


def s_key(s: float) -> int:
    return int(round(s * 1_000_000))


def derived_seed(seed: int, *keys: int) -> int:
    """A 64-bit child seed for generators that take a plain integer."""
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), *map(int, keys)])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class ExperimentConfig:
    kind: str
    n_values: list = field(default_factory=lambda: [5])
    m_values: list = field(default_factory=lambda: [1500])
    s_values: list = field(default_factory=lambda: [0.0])
    trials: int = 10
    seed: int = 0
    solver: SolverConfig = field(default_factory=SolverConfig)
    noise: str = "adversarial"
    magnitude: float = 1.0
    rho_star: float = RHO_STAR
    threads: int | None = None
    out_path: str | None = None

    def __post_init__(self):
        if not (self.n_values and self.m_values and self.s_values):
            raise ValueError("n, m and s ranges must be nonempty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.noise not in ("adversarial", "rademacher"):
            raise ValueError(f"unknown noise model {self.noise!r}")


@dataclass(frozen=True)
class RecoveryTask:
    n: int
    m: int
    s: float
    trial: int
    seed: int
    solver: SolverConfig
    noise: str = "adversarial"
    magnitude: float = 1.0
    rho_star: float = RHO_STAR


def trial_ensemble(n: int, m: int, s: float, trial: int, seed: int) -> SensingEnsemble:
    rng = make_rng(seed, n, m, s_key(s), trial)
    return SensingEnsemble(rng.standard_normal((m, n)), seed=seed)


def recovery_problem(task: RecoveryTask):
    """(ensemble, b, X0) for one trial: x0 = 0.1 e1, no dense noise."""
    ens = trial_ensemble(task.n, task.m, task.s, task.trial, task.seed)
    x0 = np.zeros(task.n)
    x0[0] = SIGNAL_AMPLITUDE
    X0 = np.outer(x0, x0)
    if task.noise == "adversarial":
        noise, _ = gen_adversarial_outliers(ens, task.s, task.rho_star)
    else:
        noise = gen_rademacher_outliers(task.m, task.s, task.magnitude,
                                        seed=derived_seed(task.seed, task.n, task.m, s_key(task.s), task.trial))
    return ens, measure(ens, X0, noise), X0


def recovery_trial(task: RecoveryTask) -> float:
    """Relative Frobenius error of the recovered X."""
    ens, b, X0 = recovery_problem(task)
    return relative_error(solve(ens, b, task.solver).X_hat, X0)


def _recovery_tasks(cfg: ExperimentConfig, n, m, s):
    return [RecoveryTask(n, m, float(s), t, cfg.seed, cfg.solver, cfg.noise,
                         cfg.magnitude, cfg.rho_star) for t in range(cfg.trials)]


def run_phase_diagram(cfg: ExperimentConfig, out_path=None):
    """Success rate per (n, m, s) cell. Rows: n, m, s, success_rate,
    mean_rel_error, trials."""
    cells = [(n, m, float(s)) for s in cfg.s_values for n in cfg.n_values for m in cfg.m_values]
    tasks = [t for c in cells for t in _recovery_tasks(cfg, *c)]
    errs = np.array(run_tasks(recovery_trial, tasks, cfg.threads)).reshape(len(cells), cfg.trials)
    rows = []
    for (n, m, s), e in zip(cells, errs):
        rows.append((n, m, s, float(np.mean(e < SUCCESS_TOL)), float(np.mean(e)), cfg.trials))
    out = out_path or cfg.out_path
    if out:
        write_csv(out, ["n", "m", "s", "success_rate", "mean_rel_error", "trials"], rows)
    return rows


def sweep_grid(step: float = 0.01) -> list:
    k = int(round(1.0 / step))
    return [round(i * step, 10) for i in range(k + 1)]


def run_threshold_sweep(cfg: ExperimentConfig, out_path=None):
    """Median relative error against s at fixed (n, m). Rows: s, rel_error,
    success_rate, trials."""
    n, m = cfg.n_values[0], cfg.m_values[0]
    tasks = [t for s in cfg.s_values for t in _recovery_tasks(cfg, n, m, s)]
    errs = np.array(run_tasks(recovery_trial, tasks, cfg.threads)).reshape(len(cfg.s_values), cfg.trials)
    rows = [(float(s), float(np.median(e)), float(np.mean(e < SUCCESS_TOL)), cfg.trials)
            for s, e in zip(cfg.s_values, errs)]
    out = out_path or cfg.out_path
    if out:
        write_csv(out, ["s", "rel_error", "success_rate", "trials"], rows)
    return rows


def largest_recoverable_fraction(rows) -> float:
    """Largest s in sweep rows (s, rel_error, ...) with rel_error < 0.1."""
    ok = [r[0] for r in rows if r[1] < SUCCESS_TOL]
    return max(ok) if ok else float("nan")


def balance_paths(out_path):
    p = Path(out_path)
    return p, p.with_name(p.stem + "_hstar" + p.suffix), p.with_name(p.stem + "_summary" + p.suffix)


def run_balance(out_path=None, rho_step: float = 0.005, s_step: float = 0.01):
    """Threshold computation. Writes the t-curve (rho, t_rho, s_rho), the
    hstar samples (s, hstar) and a one-row summary next to ``out_path``."""
    t0 = time.perf_counter()
    sol = _balance.compute_sstar(rho_step=rho_step, s_step=s_step)
    elapsed = time.perf_counter() - t0
    if out_path:
        curve, hs, summary = balance_paths(out_path)
        write_csv(curve, ["rho", "t_rho", "s_rho"], sol.t_curve.tolist())
        write_csv(hs, ["s", "hstar"], sol.hstar_samples.tolist())
        write_csv(summary,
                  ["s_star", "rho_star", "hstar_root", "hstar_0", "hstar_1",
                   "lipschitz_upper", "slope_at_root"],
                  [(sol.s_star, sol.rho_star, sol.hstar_root,
                    sol.hstar_samples[0, 1], sol.hstar_samples[-1, 1],
                    sol.lipschitz_upper, sol.slope_at_root)])
    return sol, elapsed


def run_robc(n: int, m: int, s: float, trials: int, seed: int, out_path=None):
    """Worst-case ratio over sampled tangent directions of one ensemble."""
    ens = trial_ensemble(n, m, s, 0, seed)
    rep = empirical_lower_bound(ens, s, trials, seed)
    if out_path:
        rows = [(t, rho, ratio) for t, (rho, ratio) in enumerate(rep.per_trial)]
        footer = [("min", "", fmt(rep.min_ratio)), ("mean", "", fmt(rep.mean_ratio)),
                  ("theoretical", "", fmt(rep.theoretical))]
        write_csv(out_path, ["trial", "rho", "ratio"], rows, footer)
    return rep


@dataclass(frozen=True)
class CertTask:
    n: int
    m: int
    s: float
    trial: int
    seed: int


def certificate_x0(n: int, seed: int) -> np.ndarray:
    v = make_rng(seed, n, 0xC0FFEE).standard_normal(n)
    return v / np.linalg.norm(v)


def certificate_trial(task: CertTask):
    """One fresh ensemble with Rademacher-signed outliers on a random support.

    Returns (report, Y, |S|) so callers can average Y across trials.
    """
    ens = trial_ensemble(task.n, task.m, task.s, task.trial, task.seed)
    x0 = certificate_x0(task.n, task.seed)
    noise = gen_rademacher_outliers(task.m, task.s, 1.0, seed=derived_seed(
        task.seed, task.n, task.m, s_key(task.s), task.trial))
    Y, y = construct_dual(ens, x0, noise.support, np.sign(noise.values))
    return verify_certificate(Y, y, x0, noise.support, np.sign(noise.values)), Y, len(noise.support)


def run_certificate(n: int, m: int, s: float, trials: int, seed: int,
                    out_path=None, threads=None):
    """Per-trial certificate measurements plus the trial-averaged Y deviation
    ``||mean Y - E Y|| / ||E Y||`` (operator norms)."""
    tasks = [CertTask(n, m, s, t, seed) for t in range(trials)]
    results = run_tasks(certificate_trial, tasks, threads)
    reports = [r for r, _, _ in results]
    Ybar = sum(Y for _, Y, _ in results) / trials
    EY = expected_certificate(certificate_x0(n, seed), m, results[0][2])
    dev = float(np.linalg.norm(Ybar - EY, 2) / np.linalg.norm(EY, 2))
    if out_path:
        rows = [(t, r.lambda_min_Tperp, r.y_T_frobenius, bool(r.coeff_ok))
                for t, r in enumerate(reports)]
        write_csv(out_path, ["trial", "lambda_min_Tperp", "y_T_frobenius", "coeff_ok"], rows)
    return reports, dev


def write_history(solution, path):
    """Solver objective trace as CSV (iter, objective)."""
    write_csv(path, ["iter", "objective"], [(int(i), f) for i, f in solution.history])


def default_solver(max_iters=None, step_c=None) -> SolverConfig:
    cfg = SolverConfig()
    if max_iters is not None:
        cfg = replace(cfg, max_iters=int(max_iters))
    if step_c is not None:
        cfg = replace(cfg, step_c=float(step_c))
    return cfg

