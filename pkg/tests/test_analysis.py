"""Curve analysis: extrema, envelope/power-law fits, optimizers, spike analysis."""

import math

import numpy as np
import pytest
from scipy.optimize import brentq

from anneal_scaling.analysis import (
    Extremum,
    SuccessCurve,
    adiabatic_condition_estimate,
    adiabatic_runtime_threshold,
    critical_time,
    expected_runtime,
    find_extrema,
    fit_envelope,
    fit_power_law,
    measured_spike_half_width,
    optimal_expected_runtime,
    precision_width,
    runtime_bounds_from_envelopes,
    sample_success_curve,
)
from anneal_scaling.errors import NotApplicableError, SearchError
from anneal_scaling.evolution import evolve, evolve_tracked, leak_probability
from anneal_scaling.hamiltonians import BarrierProblem, SlopeProblem


def synthetic_curve(func, tau_min, tau_max, dtau=0.05):
    taus = np.arange(tau_min, tau_max + 1e-9, dtau)
    return SuccessCurve(problem=func, tau_values=taus,
                        p_values=np.array([func(t) for t in taus]), accuracy=1e-12)


@pytest.fixture(scope="module")
def mu15_extrema():
    curve = sample_success_curve(SlopeProblem(mu=1.5), 0.05, 60.0, 0.05, 1e-8)
    return find_extrema(curve, refine_accuracy=1e-6)


@pytest.fixture(scope="module")
def mu1_spike():
    return critical_time(SlopeProblem(mu=1.0))


class TestFindExtrema:
    def test_synthetic_oscillation_against_root_oracle(self):
        """p = 1 - (2 + cos tau)/tau^2: extrema from brentq on the exact derivative."""
        func = lambda t: 1.0 - (2.0 + math.cos(t)) / t ** 2
        curve = synthetic_curve(func, 2.0, 40.0)
        found = find_extrema(curve, refine_accuracy=1e-5)

        # p' = 0 where h(tau) = tau*sin(tau) + 4 + 2*cos(tau) = 0
        h = lambda t: t * math.sin(t) + 4.0 + 2.0 * math.cos(t)

        def exact_root_near(tau):
            probes = np.arange(tau - 0.3, tau + 0.3, 0.02)
            signs = np.sign([h(t) for t in probes])
            flips = np.flatnonzero(signs[:-1] != signs[1:])
            assert flips.size, f"no derivative root near {tau}"
            i = flips[0]
            return brentq(h, probes[i], probes[i + 1], xtol=1e-12)

        maxima = [e for e in found if e.kind == "max"]
        minima = [e for e in found if e.kind == "min"]
        assert len(maxima) >= 5 and len(minima) >= 5
        for e in maxima:
            m = round(e.tau / math.pi)
            assert m % 2 == 1 and abs(e.tau - m * math.pi) < 1.5  # near odd multiples
            assert e.tau == pytest.approx(exact_root_near(e.tau), abs=1e-4)
        for e in minima:
            assert e.tau == pytest.approx(exact_root_near(e.tau), abs=1e-4)

    def test_monotone_curve_has_no_extrema(self):
        curve = synthetic_curve(lambda t: 1.0 - 1.0 / t, 1.0, 30.0)
        assert find_extrema(curve) == []

    def test_too_few_points_rejected(self):
        curve = synthetic_curve(lambda t: 0.5, 1.0, 1.05)
        with pytest.raises(ValueError):
            find_extrema(curve)

    def test_too_coarse_grid_rejected(self):
        curve = synthetic_curve(lambda t: 0.5, 1.0, 10.0, dtau=0.5)
        with pytest.raises(ValueError):
            find_extrema(curve)

    def test_production_extrema_alternate(self, mu15_extrema):
        kinds = [e.kind for e in mu15_extrema]
        assert len(kinds) >= 10
        assert all(a != b for a, b in zip(kinds, kinds[1:]))
        taus = [e.tau for e in mu15_extrema]
        assert taus == sorted(taus)


class TestFitEnvelope:
    @staticmethod
    def exact_power_extrema(c, q, n_each=8):
        out = []
        for i in range(2 * n_each):
            tau = 3.0 + 1.7 * i
            kind = "max" if i % 2 == 0 else "min"
            out.append(Extremum(kind=kind, tau=tau, p=1.0 - c * tau ** (-q)))
        return out

    def test_exact_power_law_recovered(self):
        extrema = self.exact_power_extrema(4.0, 2.0)
        for side in ("upper", "lower"):
            fit = fit_envelope(extrema, side)
            assert fit.c == pytest.approx(4.0, abs=1e-12)
            assert fit.q == pytest.approx(2.0, abs=1e-13)
            assert fit.residual < 1e-12
            assert not fit.perfect_success

    def test_first_two_extrema_excluded(self):
        extrema = self.exact_power_extrema(4.0, 2.0)
        # corrupt the first two maxima; the fit must not see them
        bad = [
            Extremum(e.kind, e.tau, 0.1) if i in (0, 2) else e
            for i, e in enumerate(extrema)
        ]
        fit = fit_envelope(bad, "upper")
        assert fit.c == pytest.approx(4.0, abs=1e-12)
        assert len(fit.extrema_used) == len([e for e in bad if e.kind == "max"]) - 2

    def test_perfect_touch_degenerates_upper_fit(self):
        extrema = self.exact_power_extrema(4.0, 2.0)
        taus = [e.tau for e in extrema if e.kind == "max"]
        extrema.append(Extremum("max", taus[-1] + 1.7, 1.0 - 1e-14))
        fit = fit_envelope(extrema, "upper")
        assert fit.perfect_success
        assert fit.c == 0.0
        fit_lower = fit_envelope(extrema, "lower")
        assert not fit_lower.perfect_success

    def test_needs_five_after_exclusion(self):
        extrema = self.exact_power_extrema(4.0, 2.0, n_each=6)[:12]
        with pytest.raises(ValueError):
            fit_envelope(extrema, "upper")

    def test_side_validated(self):
        with pytest.raises(ValueError):
            fit_envelope([], "middle")

    def test_production_envelopes_bracket_each_other(self, mu15_extrema):
        upper = fit_envelope(mu15_extrema, "upper")
        lower = fit_envelope(mu15_extrema, "lower")
        assert upper.c < lower.c
        assert 1.9 < upper.q < 2.1
        assert 1.9 < lower.q < 2.1


class TestEnvelopeSweep:
    def test_near_symmetric_slope_reports_tiny_upper_coefficient(self):
        """Close to mu = 1 the upper coefficient collapses but stays reportable."""
        from anneal_scaling.analysis import envelope_sweep

        summary, = envelope_sweep([0.95], tau_range=(0.05, 60.0))
        assert not summary.perfect_upper
        assert 0.0 < summary.c_upper < 0.01
        assert summary.c_upper < summary.c_lower
        assert summary.residual_lower < 0.05


class TestCurveExamples:
    def test_symmetric_slope_grid_reaches_near_perfect(self):
        """A dense [0, 20] grid at mu = 1 lands within 1e-4 of perfect success."""
        curve = sample_success_curve(SlopeProblem(mu=1.0), 0.0, 20.0, 0.05, 1e-8)
        assert curve.p_values[0] == pytest.approx(0.5, abs=1e-12)
        assert curve.p_values.max() >= 1.0 - 1e-4

    def test_steep_slope_stays_bounded_away_from_one(self):
        """mu = 2 on [0, 50]: maxima follow 1 - c/tau^2 with c > 0, never touching 1."""
        problem = SlopeProblem(mu=2.0)
        taus = np.arange(40.0, 50.01, 0.1)
        leaks = [leak_probability(problem, t, 1e-3, 1e-12) for t in taus]
        assert min(leaks) > 5e-5


class TestFitPowerLaw:
    def test_exact(self):
        x = np.array([1.0, 2.0, 4.0, 8.0, 32.0])
        fit = fit_power_law(x, 3.0 * x ** 0.5)
        assert fit.amplitude == pytest.approx(3.0, rel=1e-13)
        assert fit.exponent == pytest.approx(0.5, abs=1e-13)
        assert fit.residual < 1e-12

    def test_two_points_interpolated(self):
        fit = fit_power_law([2.0, 8.0], [5.0, 11.0])
        assert fit.residual < 1e-12
        assert fit.amplitude * 2.0 ** fit.exponent == pytest.approx(5.0, rel=1e-12)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            fit_power_law([1.0, -2.0, 3.0], [1.0, 2.0, 3.0])
        with pytest.raises(ValueError):
            fit_power_law([1.0, 2.0, 3.0], [1.0, 0.0, 3.0])
        with pytest.raises(ValueError):
            fit_power_law([1.0], [1.0])


class TestRuntimeBounds:
    def test_collapsed_envelope(self):
        lo, hi = runtime_bounds_from_envelopes(0.3, 0.3, 2.0, 100, 0.5)
        assert lo == hi == pytest.approx((0.3 * 100 / math.log(2.0)) ** 0.5, rel=1e-12)

    def test_degenerate_upper_unbounds_below(self):
        lo, hi = runtime_bounds_from_envelopes(0.0, 0.3, 2.0, 100, 0.5)
        assert lo == 0.0
        assert hi > 0.0

    def test_sqrt_scaling_at_q_two(self):
        lo1, hi1 = runtime_bounds_from_envelopes(0.1, 0.3, 2.0, 100, 0.75)
        lo4, hi4 = runtime_bounds_from_envelopes(0.1, 0.3, 2.0, 400, 0.75)
        assert lo4 == pytest.approx(2.0 * lo1, rel=1e-12)
        assert hi4 == pytest.approx(2.0 * hi1, rel=1e-12)

    def test_target_validated(self):
        with pytest.raises(ValueError):
            runtime_bounds_from_envelopes(0.1, 0.3, 2.0, 10, 1.0)
        with pytest.raises(ValueError):
            runtime_bounds_from_envelopes(0.4, 0.3, 2.0, 10, 0.5)


class TestExpectedRuntime:
    def test_perfect_success_returns_tau(self, mu1_spike):
        value = expected_runtime(1.0, 1, mu1_spike.tau_c)
        assert value == pytest.approx(mu1_spike.tau_c, rel=1e-8)

    def test_two_qubit_decoupling_oracle(self):
        mu, tau = 1.2, 6.0
        direct = expected_runtime(mu, 2, tau)
        joint = evolve(BarrierProblem(n=2, mu=mu), tau, 1e-10).success_probability
        assert direct == pytest.approx(tau / joint, rel=1e-6)

    def test_rises_from_zero(self):
        assert expected_runtime(1.0, 1, 0.01) < expected_runtime(1.0, 1, 0.02)

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            expected_runtime(1.0, 1, 0.0)
        with pytest.raises(ValueError):
            expected_runtime(1.0, 0, 1.0)


class TestOptimalExpectedRuntime:
    def test_matches_dense_brute_force(self):
        """Interior minimum at moderate n against a dtau = 0.005 dense scan."""
        mu, n = 1.3, 64
        result = optimal_expected_runtime(mu, n, accuracy=1e-6)
        problem = SlopeProblem(mu=mu)
        taus = np.arange(0.05, 20.0, 0.005)
        objective = [
            t * math.exp(-n * math.log1p(-leak_probability(problem, t, 1e-4, 1e-12)))
            for t in taus
        ]
        i = int(np.argmin(objective))
        assert result.tau_opt == pytest.approx(taus[i], abs=0.01)
        assert result.expected_runtime <= objective[i] + 1e-6 * objective[i]
        assert not result.perfect_success

    def test_perfect_spike_pins_all_n(self, mu1_spike):
        small = optimal_expected_runtime(1.0, 1)
        large = optimal_expected_runtime(1.0, 100)
        for r in (small, large):
            assert r.perfect_success
            assert r.tau_opt == pytest.approx(mu1_spike.tau_c, abs=1e-6)
            assert r.expected_runtime == pytest.approx(mu1_spike.tau_c, rel=1e-9)

    def test_boundary_dominated_small_n_rejected(self):
        with pytest.raises(SearchError):
            optimal_expected_runtime(1.3, 1)

    def test_rejects_bad_n(self):
        with pytest.raises(ValueError):
            optimal_expected_runtime(1.3, 0)


class TestAdiabaticThreshold:
    def test_near_half_cutoff_is_immediate(self):
        threshold = adiabatic_runtime_threshold(1.0, 1, cutoff=0.51)
        assert 0.0 < threshold < 2.0
        m = evolve_tracked(SlopeProblem(mu=1.0), threshold, 201).min_instantaneous_overlap
        assert m >= 0.51 - 1e-6

    def test_monotone_in_cutoff(self):
        a = adiabatic_runtime_threshold(1.0, 1, cutoff=0.51)
        b = adiabatic_runtime_threshold(1.0, 1, cutoff=0.6)
        assert b > a

    def test_decoupled_level_satisfied(self):
        n = 4
        threshold = adiabatic_runtime_threshold(1.0, n, cutoff=0.75)
        m = evolve_tracked(SlopeProblem(mu=1.0), threshold, 201).min_instantaneous_overlap
        assert m ** n >= 0.75 - 1e-6

    def test_cutoff_validated(self):
        with pytest.raises(ValueError):
            adiabatic_runtime_threshold(1.0, 1, cutoff=1.0)


class TestAdiabaticConditionEstimate:
    def test_closed_forms(self):
        assert adiabatic_condition_estimate(1.0, 1) == pytest.approx(1 / math.sqrt(2), rel=1e-14)
        assert adiabatic_condition_estimate(2.0, 1) == pytest.approx(5.0 ** 1.5 / 16, rel=1e-14)

    def test_linear_in_n(self):
        assert adiabatic_condition_estimate(1.3, 64) == pytest.approx(
            64 * adiabatic_condition_estimate(1.3, 1), rel=1e-14
        )


class TestCriticalTime:
    def test_symmetric_slope_has_finite_spike(self, mu1_spike):
        assert 0.0 < mu1_spike.tau_c < 20.0
        leak = leak_probability(SlopeProblem(mu=1.0), mu1_spike.tau_c, 1e-3, 1e-14)
        assert leak <= 1e-9
        assert 0.003 < mu1_spike.k < 0.01
        # the spike is slightly asymmetric, so the one-parameter quadratic
        # carries a systematic residual well below the window's leak scale
        assert mu1_spike.residual < 0.3 * mu1_spike.k * mu1_spike.fit_half_width ** 2

    def test_generic_slope_has_no_spike(self):
        with pytest.raises(NotApplicableError):
            critical_time(SlopeProblem(mu=1.5))


class TestPrecisionWidth:
    def test_square_root_laws(self, mu1_spike):
        w = precision_width(mu1_spike, 100, 0.1)
        assert precision_width(mu1_spike, 400, 0.1) == pytest.approx(w / 2, rel=1e-12)
        assert precision_width(mu1_spike, 100, 0.025) == pytest.approx(w / 2, rel=1e-12)
        tiny = precision_width(mu1_spike, 100, 1e-9)
        assert tiny < 1e-4

    def test_epsilon_validated(self, mu1_spike):
        with pytest.raises(ValueError):
            precision_width(mu1_spike, 10, 0.0)

    def test_measured_width_matches_formula_at_large_n(self, mu1_spike):
        left, right = measured_spike_half_width(
            SlopeProblem(mu=1.0), mu1_spike.tau_c, 1000, 0.1
        )
        formula = precision_width(mu1_spike, 1000, 0.1)
        assert left == pytest.approx(formula, rel=0.2)
        if right is not None:
            assert right == pytest.approx(formula, rel=0.2)
