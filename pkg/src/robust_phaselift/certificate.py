"""Inexact dual certificate for l1 PhaseLift with sparse outliers.

Given a unit signal x0 and the outlier support S with signs sgn(z_i),

    y_i = (beta0 - <a_i, x0>^2 1(|<a_i, x0>| <= 3)) / m     for i not in S
    y_i = -(9 - beta0) sgn(z_i) / m                            for i in S

and Y = A*(y). Here alpha0, beta0, eta0 are the second, fourth and sixth
moments of a standard normal truncated to [-3, 3]. In expectation Y vanishes
on T and equals (|S^c| / m)(beta0 - alpha0) on T-perp.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sensing import SensingEnsemble, apply_adjoint, project_tangent
from .special import truncated_gaussian_moment

TRUNCATION = 3.0
ALPHA0 = truncated_gaussian_moment(2, TRUNCATION)
BETA0 = truncated_gaussian_moment(4, TRUNCATION)
ETA0 = truncated_gaussian_moment(6, TRUNCATION)
SUPPORT_COEFF = 9.0 - BETA0


@dataclass
class CertificateReport:
    lambda_min_Tperp: float
    y_T_frobenius: float
    coeff_max_offsupport: float
    coeff_on_support_ok: bool
    coeff_offsupport_ok: bool
    constants: tuple = (ALPHA0, BETA0, ETA0)

    @property
    def coeff_ok(self) -> bool:
        """Exact values on S and the (9 - beta0)/m bound off S."""
        return self.coeff_on_support_ok and self.coeff_offsupport_ok


def _check_inputs(m: int, x0, support, signs):
    x0 = np.asarray(x0, dtype=float)
    if abs(np.linalg.norm(x0) - 1.0) > 1e-10:
        raise ValueError("x0 must be a unit vector")
    support = np.asarray(support, dtype=int).ravel()
    signs = np.asarray(signs, dtype=float).ravel()
    if support.shape != signs.shape:
        raise ValueError("support and signs must have the same length")
    if support.size and (support.min() < 0 or support.max() >= m):
        raise ValueError("support index out of range")
    if len(np.unique(support)) != support.size:
        raise ValueError("support indices must be distinct")
    if np.any(np.abs(signs) != 1.0):
        raise ValueError("signs must be +-1")
    return x0, support, signs


def support_coefficients(signs, m: int) -> np.ndarray:
    """-(9 - beta0) sgn(z_i) / m, the required values of y on the support."""
    return (-SUPPORT_COEFF) * np.asarray(signs, dtype=float) / m


def construct_dual(ens: SensingEnsemble, x0, support, signs):
    """Return ``(Y, y)`` with Y = A*(y) and y as in the module docstring.

    ``signs`` are the signs of the outliers on ``support``; the Rademacher
    variables of the construction are taken as eps_i = -sgn(z_i).
    """
    x0, support, signs = _check_inputs(ens.m, x0, support, signs)
    m = ens.m
    proj = ens.vectors @ x0
    y = (BETA0 - proj * proj * (np.abs(proj) <= TRUNCATION)) / m
    y[support] = support_coefficients(signs, m)
    return apply_adjoint(ens, y), y


def tperp_basis(x0) -> np.ndarray:
    """Orthonormal n x (n-1) basis of the complement of x0."""
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    # Householder reflector mapping x0 to +-e1; its other columns span x0-perp
    v = x0.copy()
    v[0] += 1.0 if x0[0] >= 0 else -1.0
    Hh = np.eye(n) - 2.0 * np.outer(v, v) / (v @ v)
    return Hh[:, 1:]


def verify_certificate(Y, y, x0, support, signs) -> CertificateReport:
    """Measure the certificate conditions on (Y, y).

    ``lambda_min_Tperp`` is the smallest eigenvalue of Y restricted to the
    complement of x0 (computed in an (n-1)-dimensional basis, so there is no
    spurious zero along x0) and ``y_T_frobenius`` is ||Y_T||_F.
    """
    Y = np.asarray(Y, dtype=float)
    y = np.asarray(y, dtype=float)
    x0, support, signs = _check_inputs(len(y), x0, support, signs)
    m = len(y)
    Q = tperp_basis(x0)
    lam = float(np.linalg.eigvalsh(Q.T @ Y @ Q).min()) if Q.shape[1] else float("nan")
    YT, _ = project_tangent(x0, Y)
    off = np.ones(m, dtype=bool)
    off[support] = False
    coeff_max = float(np.abs(y[off]).max()) if off.any() else 0.0
    on_ok = bool(np.array_equal(y[support], support_coefficients(signs, m)))
    return CertificateReport(lam, float(np.linalg.norm(YT)), coeff_max, on_ok,
                             coeff_max <= SUPPORT_COEFF / m)


def expected_certificate(x0, m: int, n_support: int) -> np.ndarray:
    """E[Y] = (|S^c| / m)(beta0 - alpha0)(I - x0 x0^T)."""
    x0 = np.asarray(x0, dtype=float)
    P = np.eye(x0.size) - np.outer(x0, x0)
    return (m - n_support) / m * (BETA0 - ALPHA0) * P
