"""Confidence intervals around the batch and recursive regression estimators.

Both intervals share one half-width template,

    z * sqrt( S * integral(K^2) / (n^2 * h_n * density(x)) ),

where ``S`` is a residual sum of squares, ``h_n`` the terminal bandwidth and
``density(x)`` a kernel density estimate at the evaluation point.  The batch
interval centers on the weight-ratio estimate with the batch density; the
recursive interval centers on a recursive estimate with the recursive
density.

Two conventions for ``S`` are supported:

* ``variance="marginal"``: residuals around the sample mean of Y, i.e. ``S``
  estimates n * Var(Y).  This slightly over-covers (Var(Y) >= Var[Y|X]) and is
  the convention under which the bundled coverage benchmarks were produced.
* ``variance="fitted"``: residuals around the estimator's own fitted values
  at the sample points, i.e. ``S`` estimates n * Var[Y|X].  Closer to nominal
  asymptotically but slightly anti-conservative at small samples.
"""

from dataclasses import dataclass
import math

import numpy as np

from ._validation import check_paired, check_positive_scalar
from .estimators import (
    DENSITY_FLOOR,
    evaluate_averaged_at,
    nadaraya_watson,
    replay_density,
    replay_ratio,
    replay_regression,
    rosenblatt_density,
)
from .exceptions import DegenerateDenominator
from .kernels import get_kernel

VARIANCE_MODES = ("marginal", "fitted")
CENTER_MODES = ("ratio", "iterate_average")


@dataclass(frozen=True)
class Interval:
    """A symmetric confidence interval."""

    center: float
    half_width: float

    @property
    def lower(self):
        return self.center - self.half_width

    @property
    def upper(self):
        return self.center + self.half_width

    def contains(self, value):
        return abs(value - self.center) <= self.half_width


def _half_width(residual_sum, n, h, density_value, kernel, z):
    if density_value < DENSITY_FLOOR:
        raise DegenerateDenominator("density estimate vanished at the query point")
    return z * math.sqrt(
        residual_sum * kernel.square_integral / (n * n * h * density_value)
    )


def _marginal_residual_sum(y):
    return float(np.sum((y - y.mean()) ** 2))


def nw_interval(X, y, x, bandwidth, kernel="gaussian", z=1.96, variance="marginal"):
    """Confidence interval around the batch weight-ratio estimate at ``x``."""
    X, y = check_paired(X, y)
    if X.shape[0] == 0:
        raise ValueError("samples must be nonempty")
    if variance not in VARIANCE_MODES:
        raise ValueError(f"variance must be one of {VARIANCE_MODES}")
    h = check_positive_scalar(bandwidth, "bandwidth")
    kernel = get_kernel(kernel)
    n = X.shape[0]
    center = nadaraya_watson(X, y, float(x), h, kernel)
    if variance == "marginal":
        residual_sum = _marginal_residual_sum(y)
    else:
        fitted = nadaraya_watson(X, y, X, h, kernel)
        residual_sum = float(np.sum((y - fitted) ** 2))
    f_at_x = rosenblatt_density(X, float(x), h, kernel)
    return Interval(center, _half_width(residual_sum, n, h, f_at_x, kernel, z))


def _fitted_values_recursive(X, y, config, kernel, center, residual_grid):
    """Recursive fitted values at every sample point, exactly or on a grid."""
    if residual_grid is None:
        eval_pts = X
    else:
        eval_pts = np.linspace(X.min(), X.max(), int(residual_grid))
    if center == "iterate_average":
        _, values = replay_regression(X, y, eval_pts, config, kernel, validate=False)
    else:
        num, den = replay_ratio(X, y, eval_pts, config.bandwidth,
                                config.density_stepsize, kernel)
        if np.any(np.abs(den) < DENSITY_FLOOR):
            raise DegenerateDenominator("ratio denominator vanished at a sample point")
        values = num / den
    if residual_grid is None:
        return values
    return np.interp(X, eval_pts, values)


def averaged_interval(X, y, x, config, kernel="gaussian", z=1.96,
                      variance="marginal", center="ratio",
                      state=None, density=None, residual_grid=None):
    """Confidence interval around a recursive regression estimate at ``x``.

    Parameters
    ----------
    center : {"ratio", "iterate_average"}
        Which recursive estimator provides the center.  The ratio form is the
        default: it carries no initialization transient, so its finite-sample
        coverage matches the asymptotic theory at small n.
    state : RecursiveRegressionState or RecursiveRatioState, optional
        A state already advanced through exactly this history with ``x``
        among its tracked points; used for the center instead of a replay.
    density : RecursiveDensityState, optional
        Same, for the recursive density at ``x``.
    residual_grid : int, optional
        With ``variance="fitted"``, evaluate fitted values on a uniform grid
        of this size and interpolate linearly instead of replaying at every
        sample point (an O(n^2) -> O(n * grid) approximation for large n).
    """
    X, y = check_paired(X, y)
    if X.shape[0] == 0:
        raise ValueError("history must be nonempty")
    if variance not in VARIANCE_MODES:
        raise ValueError(f"variance must be one of {VARIANCE_MODES}")
    if center not in CENTER_MODES:
        raise ValueError(f"center must be one of {CENTER_MODES}")
    kernel = get_kernel(kernel)
    n = X.shape[0]
    h_n = config.bandwidth(n)
    x = float(x)

    if state is not None:
        idx = np.flatnonzero(state.points == x)
        if idx.size == 0:
            raise ValueError("state does not track the requested point")
        if center == "iterate_average":
            center_value = float(state.average[idx[0]])
        else:
            center_value = float(state.value[idx[0]])
    elif center == "iterate_average":
        center_value = evaluate_averaged_at(X, y, x, config, kernel)
    else:
        num, den = replay_ratio(X, y, np.asarray([x]), config.bandwidth,
                                config.density_stepsize, kernel)
        if abs(den[0]) < DENSITY_FLOOR:
            raise DegenerateDenominator("ratio denominator vanished at the query point")
        center_value = float(num[0] / den[0])

    if density is not None:
        idx = np.flatnonzero(density.points == x)
        if idx.size == 0:
            raise ValueError("density state does not track the requested point")
        f_at_x = float(density.density[idx[0]])
    else:
        f_at_x = float(replay_density(X, np.asarray([x]), config.bandwidth,
                                      config.density_stepsize, kernel)[0])

    if variance == "marginal":
        residual_sum = _marginal_residual_sum(y)
    else:
        fitted = _fitted_values_recursive(X, y, config, kernel, center, residual_grid)
        residual_sum = float(np.sum((y - fitted) ** 2))
    return Interval(center_value, _half_width(residual_sum, n, h_n, f_at_x, kernel, z))
