"""Robust phase retrieval by PSD-constrained l1 minimization, and the
critical outlier fraction it tolerates under adversarial corruption."""
from .balance import BalanceSolution, balance_h, compute_sstar, hstar, minimum_balance
from .certificate import (
    ALPHA0,
    BETA0,
    ETA0,
    CertificateReport,
    construct_dual,
    expected_certificate,
    verify_certificate,
)
from .product import AbsProductDist, cdf_abs, get_dist, mean_abs, pdf_abs, quantile_abs
from .robc import RobcReport, brute_force_ratio, empirical_lower_bound, worst_case_ratio
from .sensing import (
    NoiseSpec,
    SensingEnsemble,
    apply,
    apply_adjoint,
    gen_adversarial_outliers,
    gen_rademacher_outliers,
    make_rng,
    measure,
    project_tangent,
    sample_ensemble,
)
from .solver import Solution, SolverConfig, extract_signal, project_psd, relative_error, solve
from .special import bessel_k0, truncated_gaussian_moment

__version__ = "0.1.0"
