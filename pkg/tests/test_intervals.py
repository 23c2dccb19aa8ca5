import dataclasses
import math

import numpy as np
import pytest

from rkreg.estimators import (
    RecursiveDensityState,
    RecursiveRatioState,
    RecursiveRegressionState,
)
from rkreg.exceptions import DegenerateDenominator
from rkreg.intervals import Interval, averaged_interval, nw_interval
from rkreg.kernels import GAUSSIAN, get_kernel
from rkreg.sequences import reference_config
from rkreg.simulation import SimConfig, get_design, get_model, run_cell, sample_pair, replication_rng

TWO_SAMPLES = ([0.0, 1.0], [1.0, 3.0])


def reference_averaged_interval(X, y, x, cfg, kernel, z=1.96):
    """Plain-python reference: iterate-averaged center, fitted residuals."""
    kernel = get_kernel(kernel)
    n = len(X)
    gamma = [cfg.stepsize(k) for k in range(1, n + 1)]
    h = [cfg.bandwidth(k) for k in range(1, n + 1)]
    q = [cfg.weights(k) for k in range(1, n + 1)]
    beta = [cfg.density_stepsize(k) for k in range(1, n + 1)]

    def averaged_at(pt):
        r = 0.0
        acc = 0.0
        for k in range(n):
            zk = float(kernel((pt - X[k]) / h[k])) / h[k]
            r = (1.0 - gamma[k] * zk) * r + gamma[k] * y[k] * zk
            acc += q[k] * r
        return acc / sum(q)

    center = averaged_at(x)
    resid = sum((y[i] - averaged_at(X[i])) ** 2 for i in range(n))
    fx = 0.0
    for k in range(n):
        zk = float(kernel((x - X[k]) / h[k])) / h[k]
        fx = (1.0 - beta[k]) * fx + beta[k] * zk
    hw = z * math.sqrt(resid * kernel.square_integral / (n * n * h[-1] * fx))
    return center, hw


class TestInterval:
    def test_bounds_and_containment(self):
        iv = Interval(center=1.0, half_width=0.25)
        assert iv.lower == 0.75 and iv.upper == 1.25
        assert iv.contains(1.25) and not iv.contains(1.2500001)


class TestNwInterval:
    def test_fitted_hand_oracle(self):
        X, y = TWO_SAMPLES
        iv = nw_interval(X, y, 0.0, 1.0, variance="fitted")
        assert iv.center == pytest.approx(1.755081337596291, abs=1e-12)
        assert iv.half_width == pytest.approx(0.981856003224142, abs=1e-12)

    def test_marginal_hand_oracle(self):
        X, y = TWO_SAMPLES
        iv = nw_interval(X, y, 0.0, 1.0, variance="marginal")
        assert iv.center == pytest.approx(1.755081337596291, abs=1e-12)
        assert iv.half_width == pytest.approx(1.3003314402521995, abs=1e-12)

    def test_constant_responses_zero_width(self):
        rng = np.random.default_rng(31)
        X = rng.standard_normal(25)
        y = np.full(25, 3.3)
        for mode in ("fitted", "marginal"):
            iv = nw_interval(X, y, 0.2, 0.5, variance=mode)
            assert iv.center == pytest.approx(3.3, rel=1e-12)
            assert iv.half_width == pytest.approx(0.0, abs=1e-9)

    def test_width_scales_with_square_integral(self):
        X, y = TWO_SAMPLES
        doubled = dataclasses.replace(GAUSSIAN, square_integral=2 * GAUSSIAN.square_integral)
        base = nw_interval(X, y, 0.0, 1.0, kernel=GAUSSIAN)
        wide = nw_interval(X, y, 0.0, 1.0, kernel=doubled)
        assert wide.half_width == pytest.approx(math.sqrt(2.0) * base.half_width, rel=1e-12)
        assert wide.center == base.center

    def test_degenerate_density(self):
        with pytest.raises(DegenerateDenominator):
            nw_interval([0.0, 0.1], [1.0, 2.0], 5.0, 0.5, kernel="epanechnikov")

    def test_translation_equivariance_exact(self):
        rng = np.random.default_rng(32)
        X = rng.standard_normal(40)
        y = np.cos(X) + rng.standard_normal(40)
        b = 4.2
        base = nw_interval(X, y, 0.1, 0.3)
        shifted = nw_interval(X, y + b, 0.1, 0.3)
        assert shifted.center == pytest.approx(base.center + b, rel=1e-12)
        assert shifted.half_width == pytest.approx(base.half_width, rel=1e-12)


class TestAveragedInterval:
    def test_single_history_hand_oracle(self):
        # one sample (0.3, 1.2), evaluation at 0, first-step sequence values
        # gamma1 = h1 = q1 = 1, beta1 = 0.8
        cfg = reference_config()
        iv = averaged_interval([0.3], [1.2], 0.0, cfg, center="iterate_average",
                               variance="fitted")
        assert iv.center == pytest.approx(0.45766537855262895, abs=1e-12)
        assert iv.half_width == pytest.approx(1.359322889991229, abs=1e-12)

    def test_single_history_ratio_center(self):
        cfg = reference_config()
        iv = averaged_interval([0.3], [1.2], 0.0, cfg, center="ratio",
                               variance="fitted")
        # one ratio step returns the first response exactly
        assert iv.center == pytest.approx(1.2, rel=1e-12)

    def test_matches_reference_implementation_at_scale(self):
        cfg = reference_config()
        config = SimConfig(model=get_model("cosine"), design=get_design("std_normal"),
                           n=200, reps=1, seed=7171)
        X, y = sample_pair(config, replication_rng(config, 0))
        iv = averaged_interval(X, y, 0.0, cfg, center="iterate_average",
                               variance="fitted")
        center, hw = reference_averaged_interval(X, y, 0.0, cfg, "gaussian")
        assert iv.center == pytest.approx(center, abs=1e-10)
        assert iv.half_width == pytest.approx(hw, abs=1e-10)

    def test_precomputed_states_match_replay(self):
        cfg = reference_config()
        rng = np.random.default_rng(34)
        X = rng.standard_normal(60)
        y = np.cos(X) + rng.standard_normal(60)
        x = 0.25
        state = RecursiveRegressionState([x], cfg)
        state.update_many(X, y)
        density = RecursiveDensityState([x], cfg.bandwidth, cfg.density_stepsize)
        density.update_many(X)
        with_states = averaged_interval(X, y, x, cfg, center="iterate_average",
                                        state=state, density=density)
        without = averaged_interval(X, y, x, cfg, center="iterate_average")
        assert with_states.center == without.center
        assert with_states.half_width == without.half_width
        ratio_state = RecursiveRatioState([x], cfg.bandwidth, cfg.density_stepsize)
        ratio_state.update_many(X, y)
        with_ratio = averaged_interval(X, y, x, cfg, center="ratio",
                                       state=ratio_state, density=density)
        without_ratio = averaged_interval(X, y, x, cfg, center="ratio")
        assert with_ratio.center == without_ratio.center

    def test_residual_grid_approximates_exact(self):
        cfg = reference_config()
        rng = np.random.default_rng(35)
        X = rng.standard_normal(150)
        y = 1.0 + 0.4 * X + 0.5 * rng.standard_normal(150)
        exact = averaged_interval(X, y, 0.0, cfg, variance="fitted")
        gridded = averaged_interval(X, y, 0.0, cfg, variance="fitted",
                                    residual_grid=400)
        assert gridded.center == exact.center
        assert gridded.half_width == pytest.approx(exact.half_width, rel=5e-3)

    def test_translation_moves_centers(self):
        cfg = reference_config()
        rng = np.random.default_rng(36)
        X = rng.standard_normal(50)
        y = np.cos(X) + rng.standard_normal(50)
        b = -2.5
        # ratio center shifts exactly by b
        base = averaged_interval(X, y, 0.0, cfg, center="ratio")
        shifted = averaged_interval(X, y + b, 0.0, cfg, center="ratio")
        assert shifted.center == pytest.approx(base.center + b, rel=1e-12)
        # iterate-averaged center shifts by b times the unit-response estimate
        base_avg = averaged_interval(X, y, 0.0, cfg, center="iterate_average")
        shifted_avg = averaged_interval(X, y + b, 0.0, cfg, center="iterate_average")
        unit = averaged_interval(X, np.ones_like(y), 0.0, cfg, center="iterate_average")
        assert shifted_avg.center == pytest.approx(
            base_avg.center + b * unit.center, rel=1e-10
        )

    def test_degenerate_density_raises(self):
        cfg = reference_config()
        with pytest.raises(DegenerateDenominator):
            averaged_interval([0.0], [1.0], 30.0, cfg, kernel="epanechnikov")

    def test_requires_tracked_point(self):
        cfg = reference_config()
        state = RecursiveRegressionState([0.5], cfg)
        state.update(0.0, 1.0)
        with pytest.raises(ValueError, match="does not track"):
            averaged_interval([0.0], [1.0], 0.0, cfg, center="iterate_average",
                              state=state)


class TestWidthBehaviour:
    def test_width_ratio_sanity(self):
        # recursive and batch widths stay within a factor two of each other
        config = SimConfig(model=get_model("cosine"), design=get_design("std_normal"),
                           noise_scale=1.0, n=200, reps=200, points=(0.0,), seed=515)
        _, arrays = run_cell(config, return_arrays=True)
        ratios = arrays["av_width"][:, 0] / arrays["nw_width"][:, 0]
        assert 0.5 <= np.median(ratios) <= 2.0

    def test_coverage_ordering_smoke(self):
        # recursive-interval coverage dominates batch coverage on a small grid
        for d in (1.0, 2.0):
            for n in (50, 200):
                config = SimConfig(model=get_model("cosine"),
                                   design=get_design("std_normal"),
                                   noise_scale=d, n=n, reps=300,
                                   seed=616, seed_key=(int(d), n))
                report = run_cell(config)
                for x in config.points:
                    nw = report.cell(x=x, estimator="nw").coverage
                    av = report.cell(x=x, estimator="averaged").coverage
                    assert av >= nw
