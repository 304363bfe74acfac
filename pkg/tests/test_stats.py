from __future__ import annotations

import math

import numpy as np
import pytest

from grayhilbert.stats import (
    ComparisonResult,
    DegenerateSampleError,
    FitResult,
    compare_models,
    fit_lognormal,
    fit_powerlaw,
    gof_bootstrap,
    tail_ccdf,
)


def pareto(rng, alpha, x_min, size):
    return x_min * (1.0 - rng.random(size)) ** (-1.0 / (alpha - 1.0))


class TestTailCcdf:
    def test_spot_values(self):
        td = tail_ccdf([1, 1, 2, 3])
        assert td.x.tolist() == [1.0, 2.0, 3.0]
        assert td.ccdf.tolist() == [1.0, 0.5, 0.25]

    def test_all_equal_single_step(self):
        td = tail_ccdf([4, 4, 4])
        assert td.x.tolist() == [4.0]
        assert td.ccdf.tolist() == [1.0]

    def test_monotone_and_starts_at_one(self, rng):
        td = tail_ccdf(rng.integers(1, 50, 1000))
        assert td.ccdf[0] == 1.0
        assert (np.diff(td.ccdf) < 0).all()

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            tail_ccdf([])

    def test_csv_three_lines(self):
        assert tail_ccdf([1, 1, 2, 3]).to_csv().count("\n") == 3


class TestFitLognormal:
    def test_constant_logs(self):
        fit = fit_lognormal([math.e] * 4)
        assert fit.mu == 1.0 and fit.sigma == 0.0

    def test_parameter_recovery(self):
        x = np.random.default_rng(10).lognormal(0.5, 1.2, 50_000)
        fit = fit_lognormal(x)
        assert abs(fit.mu - 0.5) < 0.02
        assert abs(fit.sigma - 1.2) < 0.02

    def test_too_small_or_nonpositive(self):
        with pytest.raises(ValueError):
            fit_lognormal([1.0])
        with pytest.raises(ValueError):
            fit_lognormal([1.0, -2.0])


class TestFitPowerlaw:
    def test_parameter_recovery(self):
        x = pareto(np.random.default_rng(11), 2.5, 1.0, 50_000)
        fit = fit_powerlaw(x)
        assert abs(fit.alpha - 2.5) < 0.05
        assert fit.x_min < 1.5

    def test_degenerate_tail_rejected(self):
        with pytest.raises(DegenerateSampleError):
            fit_powerlaw(np.full(100, 3.0))

    @pytest.mark.parametrize("seed", (0, 1, 2, 3, 4))
    def test_spliced_sample_finds_the_splice(self, seed):
        # uniform noise on [1, 10), Pareto tail from 10: the selected cutoff
        # always clears the noise decade and stays near the splice
        rng = np.random.default_rng(seed)
        sample = np.concatenate([rng.uniform(1, 10, 20_000), pareto(rng, 2.5, 10.0, 20_000)])
        fit = fit_powerlaw(sample)
        assert 9.0 <= fit.x_min <= 20.0
        assert abs(fit.alpha - 2.5) < 0.1

    def test_explicit_xmin(self):
        x = pareto(np.random.default_rng(3), 3.0, 2.0, 20_000)
        fit = fit_powerlaw(x, x_min=2.0)
        assert fit.x_min == 2.0
        assert abs(fit.alpha - 3.0) < 0.06

    def test_invariants(self):
        with pytest.raises(ValueError):
            FitResult("powerlaw", 0.0, alpha=0.9, x_min=1.0)
        with pytest.raises(ValueError):
            FitResult("lognormal", 0.0, mu=0.0, sigma=-1.0)


class TestCompareModels:
    def test_lognormal_sample_prefers_lognormal(self):
        x = np.random.default_rng(1).lognormal(0.5, 1.2, 50_000)
        comp = compare_models(x, fit_lognormal(x), fit_powerlaw(x, x_min=float(x.min())))
        assert comp.log_likelihood_ratio > 0
        assert comp.p_value < 0.05

    def test_pareto_sample_prefers_powerlaw(self):
        x = pareto(np.random.default_rng(2), 2.5, 1.0, 50_000)
        comp = compare_models(x, fit_lognormal(x), fit_powerlaw(x, x_min=1.0))
        assert comp.log_likelihood_ratio < 0
        assert comp.p_value < 0.05

    def test_antisymmetry(self):
        x = pareto(np.random.default_rng(4), 2.0, 1.0, 5_000)
        ln, pl = fit_lognormal(x), fit_powerlaw(x, x_min=1.0)
        a = compare_models(x, ln, pl)
        b = compare_models(x, pl, ln)
        assert a.log_likelihood_ratio == -b.log_likelihood_ratio
        assert a.p_value == b.p_value

    def test_identical_fits_ratio_zero_p_one(self):
        x = np.random.default_rng(5).lognormal(0.0, 1.0, 500)
        fit = fit_lognormal(x)
        comp = compare_models(x, fit, fit)
        assert comp == ComparisonResult(0.0, 1.0, 0.0, 500)

    def test_p_values_in_unit_interval(self, rng):
        x = rng.lognormal(0.0, 0.5, 2_000)
        comp = compare_models(x, fit_lognormal(x), fit_powerlaw(x, x_min=float(x.min())))
        assert 0.0 <= comp.p_value <= 1.0


class TestGofBootstrap:
    def test_minimum_replicates_enforced(self):
        x = np.random.default_rng(0).lognormal(0.0, 1.0, 200)
        with pytest.raises(ValueError):
            gof_bootstrap(x, fit_lognormal(x), replicates=99)

    def test_self_sample_calibration(self):
        x = np.random.default_rng(5).lognormal(0.0, 1.0, 5_000)
        p = gof_bootstrap(x, fit_lognormal(x), replicates=150, seed=3)
        assert p > 0.1

    def test_misfit_detected(self):
        x = pareto(np.random.default_rng(6), 2.5, 1.0, 10_000)
        p = gof_bootstrap(x, fit_lognormal(x), replicates=150, seed=3)
        assert p < 0.05

    def test_deterministic_per_seed(self):
        x = np.random.default_rng(7).lognormal(0.0, 1.0, 1_000)
        fit = fit_lognormal(x)
        assert gof_bootstrap(x, fit, 120, seed=1) == gof_bootstrap(x, fit, 120, seed=1)

    def test_powerlaw_semiparametric(self):
        rng = np.random.default_rng(8)
        sample = np.concatenate([rng.uniform(1, 5, 2_000), pareto(rng, 2.5, 5.0, 2_000)])
        fit = fit_powerlaw(sample)
        p = gof_bootstrap(sample, fit, replicates=100, seed=2)
        assert 0.0 <= p <= 1.0
