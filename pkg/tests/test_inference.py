import numpy as np
import pytest

from convexreg import (
    ConvexFit,
    Dataset,
    ScenarioSpec,
    argmin_estimator,
    boundary_diagnostics,
    boundary_inconsistency_study,
    evaluate,
    fit_convex_lse,
    generate_scenario,
    left_derivative,
    local_error_study,
    local_estimates,
    scaling_constants,
)

from helpers import noisy_convex_dataset

# frozen with 60-digit decimal arithmetic: 15 ** (1/9)
FIFTEEN_NINTH_ROOT = 1.35106675160177083134619815405


def vee():
    ds = Dataset(x=np.array([0.25, 0.5, 0.75]), y=np.array([1.0, 0.0, 1.0]),
                 weights=np.ones(3))
    return ConvexFit.from_values(ds, ds.y), ds


class TestArgmin:
    def test_increasing_fit_takes_first_point(self):
        x = np.linspace(0.1, 0.9, 7)
        ds = Dataset(x=x, y=2.0 * x, weights=np.ones(7))
        fit = ConvexFit.from_values(ds, ds.y)
        result = argmin_estimator(fit, ds)
        assert result.location == pytest.approx(0.1)
        assert result.tie_count == 1

    def test_tie_resolves_to_smaller_point(self):
        ds = Dataset(x=np.array([0.1, 0.4, 0.6, 0.9]),
                     y=np.array([1.0, 0.0, 0.0, 1.0]), weights=np.ones(4))
        fit = ConvexFit.from_values(ds, ds.y)
        result = argmin_estimator(fit, ds)
        assert result.location == pytest.approx(0.4)
        assert result.value == pytest.approx(0.0)
        assert result.tie_count == 2

    def test_location_attains_global_minimum_of_interpolant(self):
        for seed in range(5):
            ds = noisy_convex_dataset(seed, n=60)
            fit, _ = fit_convex_lse(ds)
            result = argmin_estimator(fit, ds)
            grid = np.linspace(ds.x[0], ds.x[-1], 401)
            assert result.value <= float(np.min(evaluate(fit, ds, grid))) + 1e-10


class TestBoundary:
    def test_line(self):
        x = np.linspace(0.2, 0.8, 5)
        ds = Dataset(x=x, y=x.copy(), weights=np.ones(5))
        fit = ConvexFit.from_values(ds, ds.y)
        b = boundary_diagnostics(fit, ds)
        assert (b.value_at_0, b.deriv_at_0) == (pytest.approx(0.0), pytest.approx(1.0))
        assert (b.value_at_1, b.deriv_at_1) == (pytest.approx(1.0), pytest.approx(1.0))

    def test_vee(self):
        fit, ds = vee()
        b = boundary_diagnostics(fit, ds)
        assert b.value_at_0 == pytest.approx(2.0)
        assert b.deriv_at_0 == pytest.approx(-4.0)
        assert b.value_at_1 == pytest.approx(2.0)
        assert b.deriv_at_1 == pytest.approx(4.0)

    def test_boundary_slopes_bracket_interior_slopes(self):
        for seed in range(5):
            ds = noisy_convex_dataset(seed, n=80)
            fit, _ = fit_convex_lse(ds)
            b = boundary_diagnostics(fit, ds)
            grid = np.linspace(0.01, 1.0, 50)
            slopes = left_derivative(fit, ds, grid)
            assert np.all(slopes >= b.deriv_at_0 - 1e-10)
            assert np.all(slopes <= b.deriv_at_1 + 1e-10)

    def test_overshoot_frequency_stays_positive(self):
        study = boundary_inconsistency_study((500, 2000), replicates=40, seed=5)
        assert all(f >= 0.05 for f in study.frequencies.values())


class TestScalingConstants:
    def test_unit_case(self):
        d1, d2 = scaling_constants(2, 1.0, 24.0)
        assert d1 == pytest.approx(1.0, abs=1e-15)
        assert d2 == pytest.approx(1.0, abs=1e-15)

    def test_r4_closed_form(self):
        d1, _ = scaling_constants(4, 1.0, 48.0)
        assert d1 == pytest.approx(FIFTEEN_NINTH_ROOT, rel=1e-14)

    @pytest.mark.parametrize("r,sigma,deriv", [(3, 1.0, 1.0), (2, 0.0, 1.0),
                                               (2, -1.0, 1.0), (2, 1.0, 0.0),
                                               (1, 1.0, 1.0)])
    def test_rejects_bad_arguments(self, r, sigma, deriv):
        with pytest.raises(ValueError):
            scaling_constants(r, sigma, deriv)

    def test_decreasing_in_sigma_and_curvature(self):
        sigmas = [0.5, 1.0, 2.0, 4.0]
        d1s = [scaling_constants(2, s, 24.0)[0] for s in sigmas]
        d2s = [scaling_constants(2, s, 24.0)[1] for s in sigmas]
        assert all(b < a for a, b in zip(d1s[:-1], d1s[1:]))
        assert all(b < a for a, b in zip(d2s[:-1], d2s[1:]))
        derivs = [4.0, 24.0, 120.0]
        d1m = [scaling_constants(2, 1.0, m)[0] for m in derivs]
        assert all(b < a for a, b in zip(d1m[:-1], d1m[1:]))


class TestLocalEstimates:
    def test_noiseless_profile_is_zero(self):
        x = np.linspace(0.0, 1.0, 60)
        truth = lambda t: 2.0 * (np.asarray(t) - 0.5) ** 2
        ds = Dataset(x=x, y=truth(x), weights=np.ones(60))
        fit, _ = fit_convex_lse(ds)
        est = local_estimates(fit, ds, 0.5, 0.2, reference=lambda t: evaluate(fit, ds, t))
        assert est.sup_dev_profile == pytest.approx(0.0, abs=1e-12)

    def test_line_values(self):
        x = np.linspace(0.0, 1.0, 9)
        ds = Dataset(x=x, y=x.copy(), weights=np.ones(9))
        fit = ConvexFit.from_values(ds, ds.y)
        est = local_estimates(fit, ds, 0.5, 0.25)
        assert est.value == pytest.approx(0.5, abs=1e-13)
        assert est.left_deriv == pytest.approx(1.0, abs=1e-13)
        assert est.sup_dev_profile is None

    def test_rejects_window_outside_domain(self):
        fit, ds = vee()
        with pytest.raises(ValueError):
            local_estimates(fit, ds, 0.05, 0.1)

    def test_scaled_sup_deviation_bounded_for_affine_truth(self):
        # sup deviation from the true line over a fixed window, scaled by
        # sqrt(n), should have stable quantiles across sample sizes
        q95 = {}
        for n in (1000, 4000):
            devs = []
            for rep in range(50):
                spec = ScenarioSpec(kind="affine", n=n, seed=3000 + rep)
                ds = generate_scenario(spec)
                fit, _ = fit_convex_lse(ds)
                line = lambda t: 2.0 * (np.asarray(t) - 0.5)
                est = local_estimates(fit, ds, 0.5, 0.1, reference=line)
                devs.append(np.sqrt(n) * est.sup_dev_profile)
            q95[n] = float(np.quantile(devs, 0.95))
        assert max(q95.values()) < 2.0 * min(q95.values())


def test_argmin_consistency_across_sample_sizes():
    study = local_error_study(2, (500, 2000, 8000), 50, seed=6)
    medians = [float(np.median(v)) for _, v in sorted(study.by_n("argmin_err").items())]
    assert all(b <= a for a, b in zip(medians[:-1], medians[1:]))
