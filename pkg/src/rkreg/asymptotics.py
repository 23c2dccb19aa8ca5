"""Closed-form asymptotic constants for the recursive and batch estimators.

Everything here is a pure function of a model oracle (true regression,
design density, conditional variance), a sequence configuration and a kernel:
limit-law bias and variance for the stepsize recursion and its iterate
average, the batch weight-ratio variance, the variance-optimal weight
exponent and the theoretical confidence levels of width-calibrated intervals.
"""

from dataclasses import dataclass
import math

import numpy as np

from .exceptions import ConditionViolated, PoleAtDenominator, ZeroDensity
from .kernels import get_kernel
from .sequences import inv_n_stepsize_limit, limit_n_times, validate_assumptions

DENSITY_FLOOR = 1e-12


def norm_cdf(x):
    """Standard normal CDF via the complementary error function."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def second_derivative(fn, x, step=1e-4):
    """Richardson-extrapolated central second difference."""
    def central(h):
        return (fn(x + h) - 2.0 * fn(x) + fn(x - h)) / (h * h)

    return (4.0 * central(step) - central(2.0 * step)) / 3.0


@dataclass(frozen=True)
class ModelOracle:
    """True model ingredients used to evaluate asymptotic constants.

    Parameters
    ----------
    regression : callable
        True regression function r(x).
    density : callable
        Design density f(x); must be positive wherever queried.
    conditional_variance : callable
        Var[Y | X = x]; a constant function for additive noise models.
    """

    regression: callable
    density: callable
    conditional_variance: callable

    def check_density(self, x):
        fx = float(self.density(x))
        if fx < DENSITY_FLOOR:
            raise ZeroDensity(f"design density vanishes at x={x}")
        return fx


@dataclass(frozen=True)
class CltParams:
    """Parameters of a limiting normal law and the normalizer it applies to."""

    bias: float
    variance: float
    rate: str


def bias_constant(oracle, x, kernel, step=1e-4):
    """Second-order smoothing-bias constant at ``x``.

    Equals ``((r f)''(x) - r(x) f''(x)) / (2 f(x)) * integral(z^2 K)``,
    with both second derivatives taken by Richardson-extrapolated central
    differences of the oracle, and algebraically equals
    ``0.5 * (r''(x) + 2 r'(x) f'(x) / f(x)) * integral(z^2 K)``.
    """
    kernel = get_kernel(kernel)
    fx = oracle.check_density(x)
    rf = lambda t: oracle.regression(t) * oracle.density(t)
    rf_dd = second_derivative(rf, x, step)
    f_dd = second_derivative(oracle.density, x, step)
    return (rf_dd - oracle.regression(x) * f_dd) / (2.0 * fx) * kernel.second_moment


def _stepsize_bandwidth_balance(cfg):
    """Limit of bandwidth(n)**5 / stepsize(n) in [0, inf]."""
    num_power = 5.0 * cfg.bandwidth.power - cfg.stepsize.power
    num_log = 5.0 * cfg.bandwidth.log_power - cfg.stepsize.log_power
    scale = cfg.bandwidth.scale ** 5 / cfg.stepsize.scale
    if num_power > 0.0 or (num_power == 0.0 and num_log < 0.0):
        return 0.0
    if num_power < 0.0 or num_log > 0.0:
        return math.inf
    return scale


def _sample_bandwidth_balance(cfg):
    """Limit of n * bandwidth(n)**5 in [0, inf]."""
    power = 5.0 * cfg.bandwidth.power - 1.0
    log_power = 5.0 * cfg.bandwidth.log_power
    if power > 0.0 or (power == 0.0 and log_power < 0.0):
        return 0.0
    if power < 0.0 or log_power > 0.0:
        return math.inf
    return cfg.bandwidth.scale ** 5


def _resolve_balance(c, derived, what):
    if c is not None:
        return float(c)
    if math.isinf(derived):
        raise ConditionViolated(
            f"{what} diverges for this configuration; use the bias_dominant regime"
        )
    return derived


def clt_generalized(oracle, x, cfg, kernel, regime="balanced", c=None):
    """Limit-law parameters for the stepsize-driven recursion at ``x``.

    ``regime="balanced"`` (bandwidth**5/stepsize -> c): normal limit under the
    normalizer sqrt(bandwidth/stepsize), with bias proportional to sqrt(c);
    ``regime="bias_dominant"`` (ratio -> inf): degenerate limit under
    bandwidth**-2.  ``c`` overrides the balance constant derived from the
    configuration.

    Raises
    ------
    ConditionViolated
        When the required lower bound on lim n*stepsize(n) fails; the limit
        theory gives no conclusion there.
    """
    kernel = get_kernel(kernel)
    fx = oracle.check_density(x)
    xi = inv_n_stepsize_limit(cfg.stepsize)
    a = cfg.bandwidth_exponent
    lim_ng = limit_n_times(cfg.stepsize)
    m2 = bias_constant(oracle, x, kernel)
    if regime == "balanced":
        threshold = (1.0 - a) / (2.0 * fx)
        if not lim_ng > threshold:
            raise ConditionViolated(
                f"lim n*stepsize = {lim_ng:.6g} must exceed (1-a)/(2 f(x)) = "
                f"{threshold:.6g}"
            )
        c_val = _resolve_balance(c, _stepsize_bandwidth_balance(cfg),
                                 "bandwidth**5/stepsize")
        bias = math.sqrt(c_val) * fx * m2 / (fx - 2.0 * a * xi)
        var = (oracle.conditional_variance(x) * fx * kernel.square_integral
               / (2.0 * fx - (1.0 - a) * xi))
        return CltParams(bias=bias, variance=var, rate="sqrt(bandwidth/stepsize)^-1")
    if regime == "bias_dominant":
        threshold = 2.0 * a / fx
        if not lim_ng > threshold:
            raise ConditionViolated(
                f"lim n*stepsize = {lim_ng:.6g} must exceed 2a/f(x) = {threshold:.6g}"
            )
        bias = fx * m2 / (fx - 2.0 * a * xi)
        return CltParams(bias=bias, variance=0.0, rate="bandwidth^-2")
    raise ValueError(f"unknown regime {regime!r}")


def clt_averaged(oracle, x, cfg, kernel, regime="balanced", c=None):
    """Limit-law parameters for the iterate-averaged recursion at ``x``.

    ``regime="balanced"`` (n * bandwidth**5 -> c): normal limit under
    sqrt(n * bandwidth); ``regime="bias_dominant"``: degenerate limit under
    bandwidth**-2.

    Raises
    ------
    ConditionViolated
        When the averaged-estimator assumptions fail for ``cfg``.
    """
    kernel = get_kernel(kernel)
    fx = oracle.check_density(x)
    report = validate_assumptions(cfg, mode="averaged")
    if not report.passed:
        failed = ", ".join(chk.name for chk in report.failures())
        raise ConditionViolated(f"averaged-estimator assumptions fail: {failed}")
    a = cfg.bandwidth_exponent
    q = cfg.weight_exponent
    m2 = bias_constant(oracle, x, kernel)
    if regime == "balanced":
        c_val = _resolve_balance(c, _sample_bandwidth_balance(cfg), "n*bandwidth**5")
        bias = math.sqrt(c_val) * (1.0 - q) / (1.0 - q - 2.0 * a) * m2
        var = (variance_factor(q, a) * oracle.conditional_variance(x)
               / fx * kernel.square_integral)
        return CltParams(bias=bias, variance=var, rate="sqrt(n*bandwidth)^-1")
    if regime == "bias_dominant":
        bias = (1.0 - q) / (1.0 - q - 2.0 * a) * m2
        return CltParams(bias=bias, variance=0.0, rate="bandwidth^-2")
    raise ValueError(f"unknown regime {regime!r}")


def nadaraya_watson_variance(oracle, x, kernel):
    """Limiting variance of the batch weight-ratio regressor under sqrt(n*bandwidth)."""
    kernel = get_kernel(kernel)
    fx = oracle.check_density(x)
    return oracle.conditional_variance(x) / fx * kernel.square_integral


def variance_factor(q, a):
    """The averaged-estimator variance multiplier ``(1-q)^2 / (1+a-2q)``."""
    denom = 1.0 + a - 2.0 * q
    if denom <= 0.0:
        raise PoleAtDenominator(
            f"variance factor has a pole at q = (1+a)/2; got q={q}, a={a}"
        )
    return (1.0 - q) ** 2 / denom


def optimal_weight_exponent(a):
    """Weight exponent minimising the averaged-estimator variance: q = a."""
    if not 0.0 <= a < 1.0:
        raise ValueError(f"bandwidth exponent must lie in [0, 1); got {a}")
    return float(a)


def theoretical_level(width_variance, true_variance, z=1.96):
    """Asymptotic coverage of an interval calibrated to the wrong variance.

    An interval of half-width ``z * sqrt(width_variance / norm)`` around an
    estimator whose limiting variance is ``true_variance / norm`` covers with
    probability ``2 Phi(z sqrt(width_variance/true_variance)) - 1``.
    """
    if width_variance <= 0.0 or true_variance <= 0.0:
        raise ValueError("variances must be positive")
    return 2.0 * norm_cdf(z * math.sqrt(width_variance / true_variance)) - 1.0


def oracle_from_model(model, design, noise_scale):
    """Build a :class:`ModelOracle` for an additive-noise simulation model."""
    d2 = float(noise_scale) ** 2
    return ModelOracle(
        regression=model.fn,
        density=design.pdf,
        conditional_variance=lambda x: d2,
    )
