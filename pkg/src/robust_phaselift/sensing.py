"""Gaussian rank-one measurements, the lifted operator and its adjoint, tangent
space projections, and the outlier generators.

Matrices are plain symmetric ``numpy`` arrays. The measurement operator is

    A(X)_i = a_i^T X a_i,        A*(y) = sum_i y_i a_i a_i^T.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

ENSEMBLE_MAGIC = b"RPLENS1"
_HEADER = struct.Struct("<QQQ")


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """PCG64 stream for ``seed`` split by integer ``keys``.

    ``SeedSequence`` hashes the full key tuple, so (seed, 1, 2) and
    (seed, 2, 1) give unrelated streams; output is identical on every
    platform numpy supports.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed) & (2**64 - 1), *map(int, keys)])))


@dataclass(frozen=True)
class SensingEnsemble:
    """m Gaussian sensing vectors in R^n (rows of ``vectors``)."""

    vectors: np.ndarray
    seed: int = 0

    def __post_init__(self):
        v = np.array(self.vectors, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError("vectors must be a nonempty m x n array")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def m(self) -> int:
        return self.vectors.shape[0]

    @property
    def n(self) -> int:
        return self.vectors.shape[1]

    def dump(self, path) -> None:
        """Write the binary replay format: magic, u64 m, n, seed, float64 rows."""
        with open(path, "wb") as fh:
            fh.write(ENSEMBLE_MAGIC)
            fh.write(_HEADER.pack(self.m, self.n, int(self.seed) & (2**64 - 1)))
            fh.write(np.ascontiguousarray(self.vectors, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path) -> "SensingEnsemble":
        data = Path(path).read_bytes()
        if not data.startswith(ENSEMBLE_MAGIC):
            raise ValueError(f"{path}: not an ensemble dump (bad magic)")
        off = len(ENSEMBLE_MAGIC)
        m, n, seed = _HEADER.unpack_from(data, off)
        off += _HEADER.size
        if len(data) - off != 8 * m * n:
            raise ValueError(f"{path}: payload size does not match header {m}x{n}")
        vec = np.frombuffer(data, dtype="<f8", offset=off).reshape(m, n)
        return cls(vec, seed=seed)


def sample_ensemble(m: int, n: int, seed: int) -> SensingEnsemble:
    """i.i.d. N(0, 1) sensing vectors; bit-identical for equal (m, n, seed)."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    rng = make_rng(seed, m, n)
    return SensingEnsemble(rng.standard_normal((m, n)), seed=seed)


def _check_square(ens: SensingEnsemble, X):
    X = np.asarray(X, dtype=float)
    if X.shape != (ens.n, ens.n):
        raise ValueError(f"matrix shape {X.shape} does not match ensemble dimension {ens.n}")
    return X


def apply(ens: SensingEnsemble, X) -> np.ndarray:
    """A(X)_i = a_i^T X a_i."""
    X = _check_square(ens, X)
    A = ens.vectors
    return np.einsum("ij,ij->i", A @ X, A)


def apply_tangent_fast(ens: SensingEnsemble, x, y) -> np.ndarray:
    """A(x y^T + y x^T) = 2 <x, a_i> <y, a_i> without forming the lift."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (ens.n,) or y.shape != (ens.n,):
        raise ValueError("x and y must be vectors of the ensemble dimension")
    A = ens.vectors
    return 2.0 * (A @ x) * (A @ y)


def apply_adjoint(ens: SensingEnsemble, y) -> np.ndarray:
    """A*(y) = sum_i y_i a_i a_i^T."""
    y = np.asarray(y, dtype=float)
    if y.shape != (ens.m,):
        raise ValueError(f"adjoint input must have length m={ens.m}")
    A = ens.vectors
    out = (A.T * y) @ A
    return 0.5 * (out + out.T)


def project_tangent(x, X):
    """Split X into its components on T_x and T_x-perp.

    With P = x x^T: X_T = P X + (I - P) X P and X_Tperp = (I - P) X (I - P).
    """
    x = np.asarray(x, dtype=float)
    if abs(np.linalg.norm(x) - 1.0) > 1e-10:
        raise ValueError("tangent frame vector must have unit norm")
    X = np.asarray(X, dtype=float)
    Xx = X @ x
    xXx = x @ Xx
    # (I - P) X (I - P) = X - x (Xx)^T - (Xx) x^T + (x^T X x) x x^T
    perp = X - np.outer(x, Xx) - np.outer(Xx, x) + xXx * np.outer(x, x)
    return X - perp, perp


@dataclass
class NoiseSpec:
    """Dense noise ``omega`` plus sparse outliers ``z`` supported on ``support``."""

    omega: np.ndarray
    support: np.ndarray
    values: np.ndarray
    s: float = 0.0

    @property
    def m(self) -> int:
        return len(self.omega)

    @property
    def z(self) -> np.ndarray:
        out = np.zeros(self.m)
        out[self.support] = self.values
        return out

    @classmethod
    def zero(cls, m: int) -> "NoiseSpec":
        return cls(np.zeros(m), np.zeros(0, dtype=int), np.zeros(0))


def outlier_count(m: int, s: float) -> int:
    """floor(s m), guarded against 0.29 * 100 = 28.999... style rounding."""
    if not 0.0 <= s <= 1.0:
        raise ValueError("outlier fraction must lie in [0, 1]")
    return min(m, int(math.floor(s * m + 1e-9)))


def top_k_indices(values, k: int) -> np.ndarray:
    """Indices of the k largest |values|, ties broken by lower index."""
    v = np.abs(np.asarray(values, dtype=float))
    order = np.lexsort((np.arange(len(v)), -v))
    return np.sort(order[:k])


def gen_rademacher_outliers(m: int, s: float, magnitude: float, seed: int) -> NoiseSpec:
    """Uniform random support of size floor(s m) with +-magnitude entries."""
    if not magnitude > 0:
        raise ValueError("magnitude must be positive")
    k = outlier_count(m, s)
    rng = make_rng(seed, m, k)
    support = np.sort(rng.choice(m, size=k, replace=False))
    signs = rng.choice(np.array([-1.0, 1.0]), size=k)
    return NoiseSpec(np.zeros(m), support, magnitude * signs, s=s)


def adversarial_direction(n: int, rho_star: float) -> np.ndarray:
    """H_T = x y^T + y x^T with x = e1, y = rho e1 + sqrt(1 - rho^2) e2."""
    if n < 2:
        raise ValueError("the adversarial construction needs n >= 2")
    if not -1.0 <= rho_star <= 1.0:
        raise ValueError("rho_star must lie in [-1, 1]")
    off = math.sqrt(1.0 - rho_star * rho_star)
    H = np.zeros((n, n))
    H[:2, :2] = [[2.0 * rho_star, off], [off, 0.0]]
    return H


def gen_adversarial_outliers(ens: SensingEnsemble, s: float, rho_star: float):
    """Outliers copying A(H_T) on its floor(s m) largest-magnitude entries.

    Returns ``(noise, H_T)``. Against ground truth x0 = alpha e1, the PSD
    matrix x0 x0^T + H_T + c e2 e2^T (c = (1 - rho^2) / (alpha^2 + 2 rho))
    fits every corrupted entry up to the small A(c e2 e2^T) term, and beats
    x0 x0^T in l1 loss once s exceeds the critical fraction.
    """
    H = adversarial_direction(ens.n, rho_star)
    aH = apply(ens, H)
    support = top_k_indices(aH, outlier_count(ens.m, s))
    return NoiseSpec(np.zeros(ens.m), support, aH[support], s=s), H


def measure(ens: SensingEnsemble, X0, noise: NoiseSpec | None = None) -> np.ndarray:
    """b = A(X0) + omega + z."""
    b = apply(ens, X0)
    if noise is None:
        return b
    if noise.m != ens.m:
        raise ValueError("noise length does not match the number of measurements")
    return b + noise.omega + noise.z
