"""Balance function of |XY| and the critical outlier fraction s*.

``H(rho, s)`` is the expected l1 mass of the smallest (1 - s) fraction of
|XY| minus that of the largest s fraction. Weighted by sqrt(2 / (1 + rho^2))
and minimized over rho in [0, 1] it gives ``hstar(s)``, strictly decreasing
from 2 sqrt(2)/pi at s = 0 to -1 at s = 1. Its zero is

    s* = min over rho of s_rho,   where H(rho, s_rho) = 0,

and ``s_rho = 1 - F(t_rho)`` with ``t_rho`` splitting E|XY| into equal
halves. ``compute_sstar`` evaluates both routes (minimum of s_rho, and the
root of hstar) so they can be checked against each other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .product import check_correlation, get_dist

def balance_h(rho: float, s: float) -> float:
    """H(rho, s) = 2 * E[|Z| 1(|Z| <= F^-1(1 - s))] - E|Z|."""
    s = float(s)
    if not 0.0 <= s <= 1.0:
        raise ValueError("s must lie in [0, 1]")
    d = get_dist(rho)
    if s == 0.0:
        return d.mean
    if s == 1.0:
        return -d.mean
    t = d.quantile(1.0 - s)
    return 2.0 * d.partial_moment(t) - d.mean


def weighted_balance(rho: float, s: float) -> float:
    """sqrt(2 / (1 + rho^2)) * H(rho, s), the population worst-case ratio."""
    rho = check_correlation(rho)
    return math.sqrt(2.0 / (1.0 + rho * rho)) * balance_h(rho, s)


def golden_section(f, lo: float, hi: float, tol: float = 1e-5):
    """Minimize a unimodal ``f`` on [lo, hi]; returns (x, f(x)).

    Bounded Brent search (golden section with parabolic steps). The
    endpoints are compared too, and ties go to the smaller abscissa so the
    result is deterministic.
    """
    res = optimize.minimize_scalar(f, bounds=(lo, hi), method="bounded",
                                   options={"xatol": tol})
    cands = [(float(f(lo)), float(lo)), (float(res.fun), float(res.x)), (float(f(hi)), float(hi))]
    fx, x = min(cands)
    return x, fx


def grid_golden_minimize(f, step: float, tol: float = 1e-5):
    """Global minimum of ``f`` on [0, 1]: grid scan, then golden section on
    the cell pair around the best grid point."""
    grid = np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1)
    vals = np.array([f(x) for x in grid])
    i = int(np.argmin(vals))  # first occurrence -> smaller rho on ties
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    x, fx = golden_section(f, lo, hi, tol)
    if vals[i] <= fx:
        return float(grid[i]), float(vals[i])
    return x, fx


def minimum_balance(s: float, step: float = 0.01, tol: float = 1e-5):
    """(hstar(s), argmin rho)."""
    s = float(s)
    if not 0.0 <= s <= 1.0:
        raise ValueError("s must lie in [0, 1]")
    rho, val = grid_golden_minimize(lambda r: weighted_balance(r, s), step, tol)
    return val, rho


def hstar(s: float) -> float:
    """Minimum balance function: min over rho of sqrt(2/(1+rho^2)) H(rho, s)."""
    return minimum_balance(s)[0]


def balanced_threshold(rho: float) -> float:
    """t_rho with int_0^t z f(z) dz = E|Z| / 2."""
    rho = check_correlation(rho)
    d = get_dist(rho)
    return d.moment_quantile(0.5 * d.mean)


def balance_ratio(rho: float) -> float:
    """s_rho = 1 - F(t_rho), the outlier fraction that zeroes H(rho, .)."""
    d = get_dist(rho)
    return 1.0 - d.cdf(balanced_threshold(rho))


@dataclass
class BalanceSolution:
    """Output of :func:`compute_sstar`.

    ``t_curve`` rows are (rho, t_rho, s_rho) and ``hstar_samples`` rows are
    (s, hstar(s)). ``hstar_root`` is the zero of hstar located by root
    finding, an independent route to ``s_star``. ``lipschitz_upper`` is the
    largest finite-difference slope magnitude of hstar on the sample grid and
    ``slope_at_root`` the local slope magnitude at the zero.
    """

    s_star: float
    rho_star: float
    t_curve: np.ndarray
    hstar_samples: np.ndarray
    hstar_root: float = float("nan")
    lipschitz_upper: float = float("nan")
    slope_at_root: float = float("nan")


def compute_sstar(rho_step: float = 0.005, s_step: float = 0.01,
                  tol: float = 1e-5, sample_hstar: bool = True) -> BalanceSolution:
    """Minimal balance ratio s* and its minimizer rho*.

    Scans ``balance_ratio`` on a rho grid, refines the minimum by golden
    section, then (optionally) samples hstar on an s grid and brackets its
    zero.
    """
    rhos = np.linspace(0.0, 1.0, int(round(1.0 / rho_step)) + 1)
    ts = np.array([balanced_threshold(r) for r in rhos])
    ss = np.array([1.0 - get_dist(r).cdf(t) for r, t in zip(rhos, ts)])
    i = int(np.argmin(ss))
    lo, hi = rhos[max(i - 1, 0)], rhos[min(i + 1, len(rhos) - 1)]
    rho_star, s_star = golden_section(balance_ratio, lo, hi, tol)
    if ss[i] <= s_star:
        rho_star, s_star = float(rhos[i]), float(ss[i])
    t_curve = np.column_stack([rhos, ts, ss])

    sol = BalanceSolution(s_star=float(s_star), rho_star=float(rho_star),
                          t_curve=t_curve, hstar_samples=np.empty((0, 2)))
    if not sample_hstar:
        return sol

    s_grid = np.linspace(0.0, 1.0, int(round(1.0 / s_step)) + 1)
    h = np.array([hstar(s) for s in s_grid])
    sol.hstar_samples = np.column_stack([s_grid, h])
    slopes = -np.diff(h) / np.diff(s_grid)
    sol.lipschitz_upper = float(np.max(np.abs(slopes)))

    k = int(np.flatnonzero((h[:-1] > 0) & (h[1:] <= 0))[0])
    root = optimize.brentq(hstar, s_grid[k], s_grid[k + 1], xtol=1e-7)
    sol.hstar_root = float(root)
    eps = 1e-3
    sol.slope_at_root = float((hstar(root - eps) - hstar(root + eps)) / (2 * eps))
    return sol

