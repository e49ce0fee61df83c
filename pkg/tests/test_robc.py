import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robust_phaselift.robc import (
    brute_force_ratio,
    direction_pairs,
    empirical_lower_bound,
    expected_ratio,
    upper_rip_check,
    upper_rip_ratio,
    worst_case_ratio,
)
from robust_phaselift.sensing import apply, make_rng, sample_ensemble


def pair(rng, n, rho):
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    w = rng.standard_normal(n)
    w -= (w @ x) * x
    return x, rho * x + math.sqrt(1 - rho * rho) * w / np.linalg.norm(w)


class TestWorstCase:
    def test_empty_and_full_sets(self):
        ens = sample_ensemble(40, 4, 0)
        rng = make_rng(0, 1)
        x, y = rng.standard_normal(4), rng.standard_normal(4)
        X = np.outer(x, y) + np.outer(y, x)
        base = np.abs(apply(ens, X)).sum() / (ens.m * np.linalg.norm(X))
        assert worst_case_ratio(ens, x, y, 0.0) == pytest.approx(base, rel=1e-12)
        assert worst_case_ratio(ens, x, y, 1.0) == pytest.approx(-base, rel=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 12), st.integers(1, 5), st.floats(0.0, 1.0), st.integers(0, 10**6))
    def test_matches_exhaustive(self, m, n, s, seed):
        ens = sample_ensemble(m, n, seed)
        rng = make_rng(seed, 3)
        x, y = rng.standard_normal(n), rng.standard_normal(n)
        assert worst_case_ratio(ens, x, y, s) == pytest.approx(brute_force_ratio(ens, x, y, s),
                                                               rel=1e-12, abs=1e-14)

    @pytest.mark.parametrize("s", [0.1, 0.25, 0.5])
    def test_exhaustive_grid(self, s):
        rng = make_rng(21, int(s * 100))
        for i in range(20):
            m, n = int(rng.integers(2, 13)), int(rng.integers(1, 6))
            ens = sample_ensemble(m, n, 500 + i)
            x, y = rng.standard_normal(n), rng.standard_normal(n)
            assert worst_case_ratio(ens, x, y, s) == pytest.approx(brute_force_ratio(ens, x, y, s),
                                                                   rel=1e-12, abs=1e-14)

    def test_scale_invariance(self):
        ens = sample_ensemble(60, 5, 9)
        rng = make_rng(0, 5)
        x, y = rng.standard_normal(5), rng.standard_normal(5)
        base = worst_case_ratio(ens, x, y, 0.1)
        assert worst_case_ratio(ens, -3.0 * x, 0.25 * y, 0.1) == pytest.approx(base, rel=1e-12)

    def test_monotone_in_s(self):
        ens = sample_ensemble(200, 4, 10)
        x, y = pair(make_rng(0, 6), 4, 0.3)
        vals = [worst_case_ratio(ens, x, y, s) for s in np.linspace(0, 1, 41)]
        assert np.all(np.diff(vals) <= 1e-15)

    def test_degenerate_direction(self):
        ens = sample_ensemble(10, 3, 0)
        with pytest.raises(ValueError):
            worst_case_ratio(ens, np.zeros(3), np.ones(3), 0.1)

    def test_brute_force_size_limit(self):
        ens = sample_ensemble(17, 2, 0)
        with pytest.raises(ValueError):
            brute_force_ratio(ens, np.ones(2), np.ones(2), 0.1)

    def test_law_of_large_numbers(self):
        ens = sample_ensemble(100_000, 4, 2)
        x, y = pair(make_rng(0, 4), 4, 0.5)
        assert worst_case_ratio(ens, x, y, 0.05) == pytest.approx(expected_ratio(0.5, 0.05), abs=0.01)


class TestStratifiedMeans:
    @pytest.mark.parametrize("rho", [0.0, 0.5, 0.795, 1.0])
    def test_within_three_standard_errors(self, rho):
        ens = sample_ensemble(2000, 8, 11)
        rng = make_rng(1, 8)
        vals = np.array([worst_case_ratio(ens, *pair(rng, 8, rho), 0.1) for _ in range(200)])
        se = vals.std(ddof=1) / np.sqrt(len(vals))
        # directions share one ensemble, so add the ensemble-level spread
        spread = 1.5 / np.sqrt(ens.m)
        assert abs(vals.mean() - expected_ratio(rho, 0.1)) <= 3 * se + spread


class TestExpected:
    def test_values(self):
        assert expected_ratio(0.0, 0.0) == pytest.approx(2 * math.sqrt(2) / math.pi, rel=1e-13)
        assert expected_ratio(0.795, 0.1185) == pytest.approx(0.0, abs=2e-3)
        assert expected_ratio(-0.3, 0.1) == expected_ratio(0.3, 0.1)


class TestEmpiricalBound:
    def test_directions_are_unit_and_stratified(self):
        pairs = list(direction_pairs(6, 22, seed=1))
        for _, x, y in pairs:
            assert np.linalg.norm(x) == pytest.approx(1.0) and np.linalg.norm(y) == pytest.approx(1.0)
        rhos = [x @ y for t, x, y in pairs if t % 2 == 1]
        np.testing.assert_allclose(rhos, np.linspace(0, 1, 11), atol=1e-12)

    def test_no_outliers(self):
        # per-direction sd is ~1.09 / sqrt(m) ~ 0.017, so the minimum over
        # 500 directions sits ~3 sd under 2 sqrt(2)/pi; allow 5 sd
        n = 20
        ens = sample_ensemble(200 * n, n, 3)
        rep = empirical_lower_bound(ens, 0.0, 500, seed=4)
        assert rep.min_ratio >= 0.9003 - 5 * 0.0173
        assert rep.mean_ratio >= 0.9003 - 0.0173
        assert rep.theoretical == pytest.approx(2 * math.sqrt(2) / math.pi, abs=1e-6)
        assert rep.per_trial.shape == (500, 2)

    def test_sign_change(self):
        ens = sample_ensemble(4000, 10, 5)
        assert empirical_lower_bound(ens, 0.2, 200, seed=1).min_ratio < 0
        near = empirical_lower_bound(ens, 0.1185, 200, seed=1, with_theory=False)
        assert abs(near.min_ratio) < 0.1 and math.isnan(near.theoretical)

    def test_trials_validation(self):
        with pytest.raises(ValueError):
            empirical_lower_bound(sample_ensemble(10, 2, 0), 0.1, 0, 0)


class TestUpperRip:
    def test_rank_one_mean(self):
        ens = sample_ensemble(100_000, 5, 6)
        x = np.ones(5) / math.sqrt(5)
        assert upper_rip_ratio(ens, np.outer(x, x)) == pytest.approx(1.0, abs=0.02)

    def test_identity(self):
        ens = sample_ensemble(10_000, 10, 7)
        assert upper_rip_ratio(ens, np.eye(10)) == pytest.approx(1.0, abs=0.02)

    def test_bound(self):
        ens = sample_ensemble(800, 10, 8)
        assert upper_rip_check(ens, 100, seed=2) <= 1.5

    def test_random_psd(self):
        n = 6
        ens = sample_ensemble(80 * n, n, 12)
        rng = make_rng(3, 3)
        ok = 0
        for _ in range(100):
            G = rng.standard_normal((n, int(rng.integers(1, n + 1))))
            ok += upper_rip_ratio(ens, G @ G.T) <= 1.5
        assert ok >= 99

    def test_trials_validation(self):
        with pytest.raises(ValueError):
            upper_rip_check(sample_ensemble(10, 2, 0), 0, 0)
