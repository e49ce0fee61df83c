"""Law of the product Z = X*Y of standard bivariate normals with correlation rho.

The signed density is

    f(z) = exp(rho z / (1 - rho^2)) K0(|z| / (1 - rho^2)) / (pi sqrt(1 - rho^2))

and |Z| has density ``2/(pi sqrt(1-rho^2)) cosh(rho z/(1-rho^2)) K0(z/(1-rho^2))``,
which collapses to the chi-square(1) density when |rho| = 1. Both are
evaluated in log-scaled form, ``cosh(r u) K0(u) = exp(-(1-r) u) k0e(u) (1 +
exp(-2 r u)) / 2``, so nothing overflows as rho -> 1.

Distribution functions of |Z| are backed by a table of the CDF and of the
partial first moment on a quadratically graded grid. Each panel is
integrated with 16-point Gauss-Legendre; the first panel, which carries the
logarithmic singularity at 0, is split into geometrically shrinking panels
so every piece sees an analytic integrand. Values between
nodes are obtained by integrating from the nearest node, so lookups are exact
to quadrature accuracy rather than interpolated.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import optimize

from .special import (
    QuadratureConfig,
    bessel_k0e,
    std_normal_cdf,
    std_normal_pdf,
    truncated_gaussian_moment,
)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
_N_PANELS = 512
_LOOKUP_BLOCK = 4096


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


def check_correlation(rho: float) -> float:
    rho = float(rho)
    if not -1.0 <= rho <= 1.0:
        raise ValueError(f"correlation must lie in [-1, 1], got {rho}")
    return rho


def mean_abs(rho: float) -> float:
    """E|XY| = (2/pi) (sqrt(1 - rho^2) + rho arcsin(rho)), symmetric in rho."""
    r = abs(check_correlation(rho))
    return 2.0 / math.pi * (math.sqrt(max(0.0, 1.0 - r * r)) + r * math.asin(r))


def pdf_signed(rho: float, z):
    """Density of Z = X*Y at z.

    For |rho| < 1 the density has a logarithmic singularity at 0 and z = 0
    raises. For rho = +1 (-1) the law is chi-square(1) on the positive
    (negative) half-line.
    """
    rho = check_correlation(rho)
    z = np.asarray(z, dtype=float)
    if abs(rho) == 1.0:
        w = z * rho
        if np.any(w <= 0):
            raise ValueError("for rho = +-1 the product has support sign(z) = sign(rho), z != 0")
        out = np.exp(-0.5 * w) / np.sqrt(2.0 * math.pi * w)
    else:
        if np.any(z == 0):
            raise ValueError("the product density is singular at z = 0")
        c = (1.0 - rho) * (1.0 + rho)
        u = np.abs(z) / c
        out = bessel_k0e(u) * np.exp((rho * z - np.abs(z)) / c) / (math.pi * math.sqrt(c))
    return float(out) if out.ndim == 0 else out


def _pdf_abs_unchecked(r: float, z):
    # r = |rho|, z > 0 (array)
    if r == 1.0:
        return np.exp(-0.5 * z) / np.sqrt(2.0 * math.pi * z)
    c = (1.0 - r) * (1.0 + r)
    u = z / c
    return (
        bessel_k0e(u)
        * np.exp(-(1.0 - r) * u)
        * (1.0 + np.exp(-2.0 * r * u))
        / (math.pi * math.sqrt(c))
    )


def pdf_abs(rho: float, z):
    """Density of |XY| at z > 0."""
    r = abs(check_correlation(rho))
    z = np.asarray(z, dtype=float)
    if np.any(~(z > 0)):
        raise ValueError("pdf_abs is defined for z > 0")
    out = _pdf_abs_unchecked(r, z)
    return float(out) if out.ndim == 0 else out


class AbsProductDist:
    """Distribution of |XY| for a fixed correlation.

    The CDF / partial-moment table is built once, on first use, and the
    object is read-only afterwards.

    Parameters
    ----------
    rho : float
        Correlation in [-1, 1]; only |rho| matters.
    quad : QuadratureConfig, optional
    """

    def __init__(self, rho: float, quad: QuadratureConfig | None = None):
        self.rho = check_correlation(rho)
        self.quad = quad or QuadratureConfig()
        self._r = abs(self.rho)
        self._table = None

    def __repr__(self):
        return f"AbsProductDist(rho={self.rho!r})"

    @property
    def chi_square(self) -> bool:
        return self._r == 1.0

    def pdf(self, z):
        return pdf_abs(self._r, z)

    @property
    def mean(self) -> float:
        return mean_abs(self._r)

    # -- table --------------------------------------------------------

    @property
    def table(self):
        """(t, F(t), M(t)) on the grid, with M the partial first moment."""
        if self._table is None:
            self._table = self._build_table()
        return self._table

    def _build_table(self):
        T = self.quad.truncation_z
        t = T * (np.arange(_N_PANELS + 1) / _N_PANELS) ** 2
        a, b = t[1:-1], t[2:]
        half = 0.5 * (b - a)
        z = (0.5 * (a + b))[:, None] + half[:, None] * _GL_NODES
        f = _pdf_abs_unchecked(self._r, z) * _GL_WEIGHTS
        dF = (f.sum(axis=1)) * half
        dM = ((f * z).sum(axis=1)) * half
        F0 = float(self._head_integral(t[1], moment=False))
        M0 = float(self._head_integral(t[1], moment=True))
        F = np.concatenate(([0.0, F0], F0 + np.cumsum(dF)))
        M = np.concatenate(([0.0, M0], M0 + np.cumsum(dM)))
        if abs(F[-1] - 1.0) > 1e-9 or abs(M[-1] - self.mean) > 1e-9:
            raise QuadratureError(
                f"rho={self.rho}: tabulated mass {F[-1]!r} / mean {M[-1]!r} off target"
            )
        return t, F, M

    def _head_integral(self, t, moment):
        # Geometric panels [t 2^-(k+1), t 2^-k] toward the log singularity;
        # each panel is resolved by Gauss-Legendre to rounding. The piece
        # below the last panel is under depth * 2^-depth * t * |log| and is
        # dropped once that falls below abs_tol.
        t = np.asarray(t, dtype=float)
        if self.chi_square:
            rt = np.sqrt(t)
            mass = 2.0 * std_normal_cdf(rt) - 1.0
            return mass - 2.0 * rt * std_normal_pdf(rt) if moment else mass
        k = np.arange(self._head_depth)
        hi = t[..., None] * 0.5 ** k
        live = hi > 1e-280
        pieces = self._panel_integral(0.5 * np.where(live, hi, 1.0), np.where(live, hi, 1.0), moment)
        return np.where(live, pieces, 0.0).sum(axis=-1)

    @property
    def _head_depth(self):
        # K0(u) ~ -log(u): mass below eps is about eps * (|log eps| + 1) / sqrt(c)
        c = max((1.0 - self._r) * (1.0 + self._r), 1e-300)
        depth = 40
        while 2.0**-depth * (depth + 10) / math.sqrt(c) > self.quad.abs_tol * 1e-3:
            depth += 8
        return min(depth, self.quad.max_subdivisions)

    def _panel_integral(self, lo, hi, moment):
        half = 0.5 * (hi - lo)
        z = (0.5 * (lo + hi))[..., None] + half[..., None] * _GL_NODES
        f = _pdf_abs_unchecked(self._r, z) * _GL_WEIGHTS
        if moment:
            f = f * z
        return f.sum(axis=-1) * half

    def _lookup(self, x, moment):
        t, F, M = self.table
        vals = M if moment else F
        x = np.asarray(x, dtype=float)
        if np.any(x < 0):
            raise ValueError("argument must be nonnegative")
        flat = np.atleast_1d(x).ravel()
        out = np.empty_like(flat)
        # blocks bound the (points x nodes x K0 nodes) temporaries
        for lo in range(0, flat.size, _LOOKUP_BLOCK):
            sl = slice(lo, lo + _LOOKUP_BLOCK)
            out[sl] = self._lookup_block(flat[sl], t, vals, moment)
        out = out.reshape(np.shape(x))
        return float(out) if out.ndim == 0 else out

    def _lookup_block(self, flat, t, vals, moment):
        out = np.empty_like(flat)
        head = flat < t[1]
        tail = flat >= t[-1]
        mid = ~(head | tail)
        if head.any():
            out[head] = self._head_integral(flat[head], moment)
        out[tail] = vals[-1]
        if mid.any():
            xm = flat[mid]
            j = np.searchsorted(t, xm, side="right") - 1
            out[mid] = vals[j] + self._panel_integral(t[j], xm, moment)
        return out

    def cdf(self, t):
        """P(|XY| <= t)."""
        if self.chi_square:
            t = np.asarray(t, dtype=float)
            if np.any(t < 0):
                raise ValueError("argument must be nonnegative")
            out = 2.0 * std_normal_cdf(np.sqrt(t)) - 1.0
            return float(out) if np.ndim(out) == 0 else out
        return self._lookup(t, moment=False)

    def partial_moment(self, t):
        """E[|XY| 1(|XY| <= t)] = int_0^t z f(z) dz."""
        if self.chi_square:
            t = np.asarray(t, dtype=float)
            if np.any(t < 0):
                raise ValueError("argument must be nonnegative")
            rt = np.sqrt(t)
            out = 2.0 * std_normal_cdf(rt) - 1.0 - 2.0 * rt * std_normal_pdf(rt)
            return float(out) if np.ndim(out) == 0 else out
        return self._lookup(t, moment=True)

    def _invert(self, target, moment):
        t, F, M = self.table
        vals = M if moment else F
        fn = self.partial_moment if moment else self.cdf
        j = int(np.searchsorted(vals, target, side="left"))
        if j >= len(t):
            return float(t[-1])
        lo, hi = float(t[max(j - 1, 0)]), float(t[j])
        if fn(hi) - target <= 0:
            return hi
        return optimize.brentq(lambda x: fn(x) - target, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)

    def quantile(self, p: float) -> float:
        """Smallest t with F(t) = p, for 0 < p < 1."""
        p = float(p)
        if not 0.0 < p < 1.0:
            raise ValueError("quantile level must lie in (0, 1)")
        return self._invert(p, moment=False)

    def moment_quantile(self, q: float) -> float:
        """t with partial_moment(t) = q, for 0 < q < mean."""
        q = float(q)
        if not 0.0 < q < self.mean:
            raise ValueError("target must lie strictly between 0 and the mean")
        return self._invert(q, moment=True)


@lru_cache(maxsize=1024)
def _cached_dist(r: float) -> AbsProductDist:
    return AbsProductDist(r)


def get_dist(rho: float) -> AbsProductDist:
    """Shared default-tolerance distribution object for |rho|."""
    return _cached_dist(abs(check_correlation(rho)))


def cdf_abs(rho: float, t):
    return get_dist(rho).cdf(t)


def quantile_abs(rho: float, p: float) -> float:
    return get_dist(rho).quantile(p)


def partial_first_moment(rho: float, t):
    return get_dist(rho).partial_moment(t)
