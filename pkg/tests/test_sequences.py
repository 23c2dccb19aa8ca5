import math

import numpy as np
import pytest

from rkreg.exceptions import DivergentXi
from rkreg.sequences import (
    EstimatorConfig,
    SequenceSpec,
    gs_exponent_estimate,
    inv_n_stepsize_limit,
    limit_n_times,
    reference_config,
    validate_assumptions,
)


def make_config(alpha=0.9, a=0.2, q=None, stepsize_log=0.0):
    q = a if q is None else q
    return EstimatorConfig(
        stepsize=SequenceSpec(1.0, alpha, stepsize_log),
        bandwidth=SequenceSpec(1.0, a, -1.0),
        weights=SequenceSpec(1.0, q, -1.0),
        density_stepsize=SequenceSpec(0.8, 1.0),
    )


class TestEval:
    def test_plain_reciprocal(self):
        assert SequenceSpec(1.0, 1.0)(10) == pytest.approx(0.1, abs=1e-15)

    def test_log_factor(self):
        # direct arithmetic oracle: 100**-0.2 / ln(100)
        spec = SequenceSpec(1.0, 0.2, -1.0)
        assert spec(100) == pytest.approx(0.08644787368875029, rel=1e-12)

    def test_scaled_reciprocal(self):
        assert SequenceSpec(0.8, 1.0)(5) == pytest.approx(0.16, abs=1e-15)

    def test_value_at_one_is_scale(self):
        # log factor is read as 1 at n=1, whatever its exponent
        assert SequenceSpec(2.5, 0.2, -1.0)(1) == 2.5
        assert SequenceSpec(2.5, 0.2, 3.0)(1) == 2.5

    def test_vectorized_matches_scalar(self):
        spec = SequenceSpec(1.3, 0.4, -0.7)
        ns = np.arange(1, 50)
        np.testing.assert_allclose(spec(ns), [spec(int(k)) for k in ns], rtol=1e-15)

    def test_positivity(self):
        for spec in (SequenceSpec(1.0, 0.9), SequenceSpec(1.0, 0.2, -1.0),
                     SequenceSpec(0.8, 1.0), SequenceSpec(2.0, 0.0, 2.0)):
            assert np.all(spec.head(10_000) > 0.0)

    def test_reference_sequences_eventually_decreasing(self):
        cfg = reference_config()
        for spec in (cfg.stepsize, cfg.bandwidth, cfg.weights, cfg.density_stepsize):
            values = spec(np.arange(10, 100_001))
            assert np.all(np.diff(values) < 0.0)

    def test_rejects_bad_scale(self):
        with pytest.raises(ValueError):
            SequenceSpec(0.0, 1.0)
        with pytest.raises(ValueError):
            SequenceSpec(-1.0, 1.0)

    def test_rejects_index_zero(self):
        with pytest.raises(ValueError):
            SequenceSpec(1.0, 1.0)(0)


class TestMaxValue:
    def test_decaying_peaks_early(self):
        spec = SequenceSpec(1.0, 0.9)
        assert spec.max_value() == spec(1)

    def test_log_bump_found(self):
        # n^-0.1 (ln n)^2 peaks near exp(20); the supremum must see it
        spec = SequenceSpec(1.0, 0.1, 2.0)
        peak = spec.max_value()
        n_star = math.exp(20.0)
        assert peak >= spec(int(n_star))
        assert peak == pytest.approx(spec(int(n_star)), rel=1e-3)

    def test_growing_is_unbounded(self):
        assert SequenceSpec(1.0, -0.5).max_value() == math.inf
        assert SequenceSpec(1.0, 0.0, 1.0).max_value() == math.inf

    def test_log_only_decay_peaks_at_two(self):
        spec = SequenceSpec(1.0, 0.0, -1.0)
        assert spec.max_value() == pytest.approx(spec(2))


class TestGsExponentEstimate:
    def test_reciprocal(self):
        est = gs_exponent_estimate(SequenceSpec(1.0, 1.0), 10**6)
        assert est == pytest.approx(-1.0, abs=1e-4)

    def test_log_factor_sequence(self):
        # analytic limit is -0.2; the log factor contributes an O(1/ln n)
        # error, about 0.072 at n=1e6 (frozen from the arithmetic oracle)
        est = gs_exponent_estimate(SequenceSpec(1.0, 0.2, -1.0), 10**6)
        assert est == pytest.approx(-0.2723825895944998, abs=1e-6)
        assert abs(est + 0.2) <= 5.0 / math.log(10**6)

    def test_constant_sequence(self):
        assert gs_exponent_estimate(SequenceSpec(1.0), 1000) == 0.0

    def test_requires_large_n(self):
        with pytest.raises(ValueError):
            gs_exponent_estimate(SequenceSpec(1.0, 1.0), 50)

    @pytest.mark.parametrize("power,log_power", [(0.9, 0.0), (0.2, -1.0),
                                                 (1.0, 0.0), (0.5, 1.0)])
    def test_probe_tracks_symbolic_exponent(self, power, log_power):
        spec = SequenceSpec(1.0, power, log_power)
        n = 10**6
        tol = max(1e-3, 5.0 / math.log(n) * max(1.0, abs(log_power)))
        assert abs(gs_exponent_estimate(spec, n) - spec.gs_exponent) <= tol

    def test_error_shrinks_with_n(self):
        spec = SequenceSpec(1.0, 0.2, -1.0)
        errors = [abs(gs_exponent_estimate(spec, n) + 0.2)
                  for n in (10**3, 10**4, 10**5, 10**6)]
        assert all(a > b for a, b in zip(errors, errors[1:]))


class TestLimits:
    def test_limit_n_times(self):
        assert limit_n_times(SequenceSpec(1.0, 0.9)) == math.inf
        assert limit_n_times(SequenceSpec(2.0, 1.0)) == 2.0
        assert limit_n_times(SequenceSpec(1.0, 1.0, 1.0)) == math.inf
        assert limit_n_times(SequenceSpec(1.0, 1.0, -1.0)) == 0.0
        assert limit_n_times(SequenceSpec(1.0, 1.5)) == 0.0

    def test_inv_limit_examples(self):
        assert inv_n_stepsize_limit(SequenceSpec(1.0, 1.0)) == 1.0
        assert inv_n_stepsize_limit(SequenceSpec(1.0, 0.9)) == 0.0
        assert inv_n_stepsize_limit(SequenceSpec(2.0, 1.0)) == 0.5

    def test_inv_limit_divergence(self):
        with pytest.raises(DivergentXi):
            inv_n_stepsize_limit(SequenceSpec(1.0, 1.1))
        # power 1 with negative log exponent: n*stepsize -> 0, limit infinite
        assert inv_n_stepsize_limit(SequenceSpec(1.0, 1.0, -1.0)) == math.inf


class TestValidateAssumptions:
    def test_reference_config_passes_both_modes(self):
        cfg = reference_config()
        assert validate_assumptions(cfg, "generalized").passed
        assert validate_assumptions(cfg, "averaged").passed

    def test_bandwidth_exponent_out_of_range(self):
        report = validate_assumptions(make_config(alpha=1.0, a=0.5), "generalized")
        assert not report.passed
        names = {c.name for c in report.failures()}
        assert "bandwidth_exponent_range" in names

    def test_weight_exponent_bound(self):
        report = validate_assumptions(make_config(alpha=0.9, a=0.2, q=0.65), "averaged")
        assert not report.passed
        assert "weight_exponent_bound" in {c.name for c in report.failures()}

    def test_log_growth_check(self):
        cfg = EstimatorConfig(
            stepsize=SequenceSpec(1.0, 1.0),  # n*stepsize constant: too slow
            bandwidth=SequenceSpec(1.0, 0.2, -1.0),
            weights=SequenceSpec(1.0, 0.2, -1.0),
            density_stepsize=SequenceSpec(0.8, 1.0),
        )
        report = validate_assumptions(cfg, "averaged")
        assert "stepsize_log_growth" in {c.name for c in report.failures()}
        # power 1 with positive log exponent qualifies
        cfg2 = EstimatorConfig(
            stepsize=SequenceSpec(1.0, 1.0, 1.0),
            bandwidth=SequenceSpec(1.0, 0.2, -1.0),
            weights=SequenceSpec(1.0, 0.2, -1.0),
            density_stepsize=SequenceSpec(0.8, 1.0),
        )
        names = {c.name for c in validate_assumptions(cfg2, "averaged").failures()}
        assert "stepsize_log_growth" not in names

    def test_mode_rejected(self):
        with pytest.raises(ValueError):
            validate_assumptions(reference_config(), "bogus")

    @pytest.mark.parametrize("mode", ["generalized", "averaged"])
    def test_monotone_toward_interval_midpoint(self, mode):
        # moving the bandwidth exponent toward the midpoint of its allowed
        # interval never flips a pass into a fail
        alpha = 0.9
        lo, hi = ((1 - alpha) / 4, alpha / 3) if mode == "generalized" else \
                 (1 - alpha, (4 * alpha - 3) / 2)
        mid = 0.5 * (lo + hi)
        for a in np.linspace(lo + 1e-3, hi - 1e-3, 9):
            if validate_assumptions(make_config(alpha=alpha, a=a, q=0.1), mode).passed:
                closer = a + 0.5 * (mid - a)
                assert validate_assumptions(
                    make_config(alpha=alpha, a=closer, q=0.1), mode
                ).passed

    def test_report_rendering(self):
        text = str(validate_assumptions(make_config(alpha=1.0, a=0.5), "generalized"))
        assert "FAIL" in text and "overall" in text


class TestSerialization:
    def test_sequence_round_trip(self):
        spec = SequenceSpec(1.5, 0.3, -2.0)
        assert SequenceSpec.from_dict(spec.to_dict()) == spec

    def test_config_round_trip(self):
        cfg = reference_config()
        assert EstimatorConfig.from_dict(cfg.to_dict()) == cfg

    def test_exponent_properties(self):
        cfg = reference_config()
        assert cfg.stepsize_exponent == 0.9
        assert cfg.bandwidth_exponent == 0.2
        assert cfg.weight_exponent == 0.2

    def test_summable_stepsize_rejected_at_construction(self):
        with pytest.raises(DivergentXi):
            EstimatorConfig(
                stepsize=SequenceSpec(1.0, 1.2),
                bandwidth=SequenceSpec(1.0, 0.2, -1.0),
                weights=SequenceSpec(1.0, 0.2, -1.0),
                density_stepsize=SequenceSpec(0.8, 1.0),
            )
