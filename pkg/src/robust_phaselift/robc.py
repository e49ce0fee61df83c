"""Empirical s-robust outlier bound condition (ROBC).

For X = x y^T + y x^T the condition asks that

    (1/m) min_{|S| <= s m} ( ||A_{S^c}(X)||_1 - ||A_S(X)||_1 ) >= C(s) ||X||_F.

The minimizing S is the set of the floor(s m) largest |A(X)_i|, so the
worst case over 2^m subsets costs one sort.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .balance import hstar, weighted_balance
from .sensing import (
    SensingEnsemble,
    apply,
    apply_tangent_fast,
    make_rng,
    outlier_count,
    top_k_indices,
)


@dataclass
class RobcReport:
    s: float
    trials: int
    min_ratio: float
    mean_ratio: float
    theoretical: float
    per_trial: np.ndarray = field(repr=False)  # rows (rho, ratio)


def _tangent_fro(x, y) -> float:
    # ||x y^T + y x^T||_F^2 = 2 |x|^2 |y|^2 + 2 <x, y>^2
    xy = float(x @ y)
    return math.sqrt(2.0 * float(x @ x) * float(y @ y) + 2.0 * xy * xy)


def worst_case_ratio(ens: SensingEnsemble, x, y, s: float) -> float:
    """(1/m) [||A_{S^c}(X)||_1 - ||A_S(X)||_1] / ||X||_F at the worst S."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    fro = _tangent_fro(x, y)
    if fro == 0.0:
        raise ValueError("x y^T + y x^T is the zero matrix")
    v = np.abs(apply_tangent_fast(ens, x, y))
    k = outlier_count(ens.m, s)
    on = v[top_k_indices(v, k)].sum()
    return float((v.sum() - 2.0 * on) / (ens.m * fro))


def brute_force_ratio(ens: SensingEnsemble, x, y, s: float) -> float:
    """Exhaustive minimum over every subset |S| <= floor(s m); m <= 16 only."""
    if ens.m > 16:
        raise ValueError("exhaustive search is limited to m <= 16")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    v = np.abs(apply(ens, np.outer(x, y) + np.outer(y, x)))
    total = v.sum()
    k = outlier_count(ens.m, s)
    best = total
    for size in range(1, k + 1):
        for S in itertools.combinations(range(ens.m), size):
            best = min(best, total - 2.0 * v[list(S)].sum())
    return float(best / (ens.m * _tangent_fro(x, y)))


def expected_ratio(rho: float, s: float) -> float:
    """Population value of ``worst_case_ratio`` for unit x, y with <x, y> = rho."""
    return weighted_balance(abs(rho), s)


def _unit(v):
    return v / np.linalg.norm(v)


def direction_pairs(n: int, trials: int, seed: int, rho_grid=None):
    """Unit pairs (x, y): every other trial is uniform on the sphere, the rest
    cycle through ``rho_grid`` via y = rho x + sqrt(1 - rho^2) x_perp."""
    if rho_grid is None:
        rho_grid = np.round(np.linspace(0.0, 1.0, 11), 10)
    for t in range(trials):
        rng = make_rng(seed, n, t)
        x = _unit(rng.standard_normal(n))
        w = rng.standard_normal(n)
        if t % 2 == 0:
            y = _unit(w)
        else:
            rho = float(rho_grid[(t // 2) % len(rho_grid)])
            perp = _unit(w - (w @ x) * x)
            y = rho * x + math.sqrt(max(0.0, 1.0 - rho * rho)) * perp
        yield t, x, y


def empirical_lower_bound(ens: SensingEnsemble, s: float, trials: int, seed: int,
                          with_theory: bool = True) -> RobcReport:
    """Worst-case ratio over sampled tangent directions, against hstar(s)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rows = np.empty((trials, 2))
    for t, x, y in direction_pairs(ens.n, trials, seed):
        rows[t] = (float(x @ y), worst_case_ratio(ens, x, y, s))
    ratios = rows[:, 1]
    theory = hstar(s) if with_theory else float("nan")
    return RobcReport(s, trials, float(ratios.min()), float(ratios.mean()), theory, rows)


def random_symmetric(n: int, rng: np.random.Generator) -> np.ndarray:
    G = rng.standard_normal((n, n))
    return 0.5 * (G + G.T)


def upper_rip_ratio(ens: SensingEnsemble, X) -> float:
    """(1/m) ||A(X)||_1 / ||X||_1 with ||.||_1 the nuclear norm."""
    nuc = np.abs(np.linalg.eigvalsh(X)).sum()
    return float(np.abs(apply(ens, X)).sum() / (ens.m * nuc))


def upper_rip_check(ens: SensingEnsemble, trials: int, seed: int) -> float:
    """Largest observed upper-RIP ratio over random symmetric (indefinite) X."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    out = -math.inf
    for t in range(trials):
        X = random_symmetric(ens.n, make_rng(seed, ens.n, t))
        out = max(out, upper_rip_ratio(ens, X))
    return out
