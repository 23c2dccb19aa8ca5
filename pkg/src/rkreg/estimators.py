"""Recursive kernel regression estimators and their batch baselines.

Two recursive constructions are provided, both updating online from a stream
of (X, Y) pairs:

* the stepsize-driven recursion with running iterate average
  (:class:`RecursiveRegressionState`, :class:`RecursiveKernelRegressor`):
  ``r_n(x) = (1 - g_n Z_n(x)) r_{n-1}(x) + g_n W_n(x)`` with
  ``Z_n(x) = K((x - X_n)/h_n)/h_n`` and ``W_n(x) = Y_n Z_n(x)``, averaged as
  ``rbar_n = sum(q_k r_k) / sum(q_k)``;

* the recursive ratio (:class:`RecursiveRatioState`,
  :class:`RecursiveRatioRegressor`): numerator and denominator each follow the
  density-style recursion ``u_n = (1 - b_n) u_{n-1} + b_n * (kernel term)``,
  and the estimate is their ratio.  Both constructions share the same limit
  law for the default sequences; the ratio form mixes much faster at small
  samples because it carries no initialization transient.

The batch baselines are the classical weight-ratio regressor
(:func:`nadaraya_watson`) and the fixed-bandwidth density average
(:func:`rosenblatt_density`).
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from ._validation import check_paired, check_positive_scalar, check_univariate
from .exceptions import ContractionViolation, DegenerateDenominator, InvalidStepsize
from .kernels import get_kernel
from .sequences import EstimatorConfig, reference_config

DENSITY_FLOOR = 1e-12


def check_contraction(config, kernel):
    """Reject configurations whose updates could leave the convex regime.

    The update stays a convex combination whenever
    ``stepsize(n) * sup(K) / bandwidth(n) <= 1`` for every n; the left side is
    again a closed-form sequence, so its supremum is checked exactly.
    """
    kernel = get_kernel(kernel)
    bound = config.stepsize.ratio(config.bandwidth).max_value() * kernel.sup_norm
    if bound > 1.0:
        raise ContractionViolation(
            "stepsize/bandwidth combination allows an update weight of "
            f"{bound:.6g} > 1; reduce the stepsize scale or enlarge the bandwidth"
        )
    return bound


def check_density_stepsize(spec):
    """Reject density stepsizes exceeding 1 anywhere (sup over n)."""
    top = spec.max_value()
    if top > 1.0:
        raise InvalidStepsize(
            f"density stepsize reaches {top:.6g} > 1; the recursion would "
            "leave the convex-combination regime"
        )
    return top


class RecursiveRegressionState:
    """Online state of the stepsize recursion at a fixed set of points.

    Tracks the current iterate, the weighted running average of iterates and
    the accumulated weight mass.  One :meth:`update` consumes one sample and
    refreshes every tracked point.
    """

    def __init__(self, points, config, kernel="gaussian", validate=True):
        self.points = np.atleast_1d(np.asarray(points, dtype=float)).copy()
        self.config = config
        self.kernel = get_kernel(kernel)
        if validate:
            check_contraction(config, self.kernel)
        self.n = 0
        self.weight_sum = 0.0
        self.iterate = np.zeros_like(self.points)
        self.average = np.zeros_like(self.points)

    def update(self, x_obs, y_obs):
        """Advance the recursion by one observed pair."""
        self.n += 1
        k = self.n
        gamma = self.config.stepsize(k)
        h = self.config.bandwidth(k)
        z = self.kernel((self.points - x_obs) / h) / h
        gz = gamma * z
        if np.any(gz > 1.0):
            raise ContractionViolation(
                f"update weight {gz.max():.6g} > 1 at step {k}"
            )
        self.iterate = self.iterate + gz * (y_obs - self.iterate)
        q = self.config.weights(k)
        self.weight_sum += q
        self.average = self.average + (q / self.weight_sum) * (self.iterate - self.average)
        return self

    def update_many(self, X, y):
        X, y = check_paired(X, y)
        for xk, yk in zip(X, y):
            self.update(xk, yk)
        return self


class RecursiveDensityState:
    """Online state of the recursive density estimator at fixed points."""

    def __init__(self, points, bandwidth, density_stepsize, kernel="gaussian",
                 validate=True):
        self.points = np.atleast_1d(np.asarray(points, dtype=float)).copy()
        self.bandwidth = bandwidth
        self.density_stepsize = density_stepsize
        self.kernel = get_kernel(kernel)
        if validate:
            check_density_stepsize(density_stepsize)
        self.n = 0
        self.density = np.zeros_like(self.points)

    def update(self, x_obs):
        self.n += 1
        k = self.n
        beta = self.density_stepsize(k)
        if beta > 1.0:
            raise InvalidStepsize(f"density stepsize {beta:.6g} > 1 at step {k}")
        h = self.bandwidth(k)
        z = self.kernel((self.points - x_obs) / h) / h
        self.density = self.density + beta * (z - self.density)
        return self

    def update_many(self, X):
        for xk in check_univariate(X):
            self.update(xk)
        return self


class RecursiveRatioState:
    """Online numerator/denominator recursion whose ratio estimates the regression."""

    def __init__(self, points, bandwidth, density_stepsize, kernel="gaussian",
                 validate=True):
        self.points = np.atleast_1d(np.asarray(points, dtype=float)).copy()
        self.bandwidth = bandwidth
        self.density_stepsize = density_stepsize
        self.kernel = get_kernel(kernel)
        if validate:
            check_density_stepsize(density_stepsize)
        self.n = 0
        self.numerator = np.zeros_like(self.points)
        self.denominator = np.zeros_like(self.points)

    def update(self, x_obs, y_obs):
        self.n += 1
        k = self.n
        beta = self.density_stepsize(k)
        if beta > 1.0:
            raise InvalidStepsize(f"density stepsize {beta:.6g} > 1 at step {k}")
        h = self.bandwidth(k)
        z = self.kernel((self.points - x_obs) / h) / h
        self.numerator = self.numerator + beta * (y_obs * z - self.numerator)
        self.denominator = self.denominator + beta * (z - self.denominator)
        return self

    def update_many(self, X, y):
        X, y = check_paired(X, y)
        for xk, yk in zip(X, y):
            self.update(xk, yk)
        return self

    @property
    def value(self):
        """Current ratio estimate; raises on a vanished denominator."""
        if np.any(np.abs(self.denominator) < DENSITY_FLOOR):
            raise DegenerateDenominator(
                "recursive denominator vanished at one or more points"
            )
        return self.numerator / self.denominator


def replay_regression(X, y, x_eval, config, kernel="gaussian", validate=True):
    """Run the stepsize recursion over a stored history, vectorised over points.

    Returns ``(iterate, average)`` at ``x_eval`` after consuming the full
    history in order.  Bit-identical to having tracked ``x_eval`` online from
    the start, since per-point arithmetic is independent.
    """
    X, y = check_paired(X, y)
    kernel = get_kernel(kernel)
    if validate:
        check_contraction(config, kernel)
    pts = np.atleast_1d(np.asarray(x_eval, dtype=float))
    n = X.shape[0]
    r = np.zeros_like(pts)
    rbar = np.zeros_like(pts)
    if n == 0:
        return r, rbar
    gamma = config.stepsize.head(n)
    h = config.bandwidth.head(n)
    q = config.weights.head(n)
    wsum = np.cumsum(q)
    for k in range(n):
        z = kernel((pts - X[k]) / h[k]) / h[k]
        r = r + gamma[k] * z * (y[k] - r)
        rbar = rbar + (q[k] / wsum[k]) * (r - rbar)
    return r, rbar


def evaluate_averaged_at(X, y, x, config, kernel="gaussian"):
    """Iterate-averaged estimate at a single point from a stored history."""
    _, rbar = replay_regression(X, y, np.asarray([x], dtype=float), config, kernel)
    return float(rbar[0])


def replay_ratio(X, y, x_eval, bandwidth, density_stepsize, kernel="gaussian"):
    """Run the ratio recursion over a stored history; returns (numerator, denominator)."""
    X, y = check_paired(X, y)
    kernel = get_kernel(kernel)
    pts = np.atleast_1d(np.asarray(x_eval, dtype=float))
    n = X.shape[0]
    num = np.zeros_like(pts)
    den = np.zeros_like(pts)
    if n == 0:
        return num, den
    beta = density_stepsize.head(n)
    h = bandwidth.head(n)
    for k in range(n):
        z = kernel((pts - X[k]) / h[k]) / h[k]
        num = num + beta[k] * (y[k] * z - num)
        den = den + beta[k] * (z - den)
    return num, den


def replay_density(X, x_eval, bandwidth, density_stepsize, kernel="gaussian"):
    """Run the recursive density estimator over a stored history."""
    X = check_univariate(X)
    kernel = get_kernel(kernel)
    pts = np.atleast_1d(np.asarray(x_eval, dtype=float))
    f = np.zeros_like(pts)
    n = X.shape[0]
    if n == 0:
        return f
    beta = density_stepsize.head(n)
    h = bandwidth.head(n)
    for k in range(n):
        z = kernel((pts - X[k]) / h[k]) / h[k]
        f = f + beta[k] * (z - f)
    return f


def nadaraya_watson(X, y, x, bandwidth, kernel="gaussian"):
    """Batch weight-ratio regression estimate at ``x`` (scalar or array).

    All weights use the single bandwidth ``bandwidth``.  Raises
    :class:`DegenerateDenominator` when the weight sum vanishes at any
    requested point (possible with compact-support kernels).
    """
    X, y = check_paired(X, y)
    if X.shape[0] == 0:
        raise ValueError("samples must be nonempty")
    h = check_positive_scalar(bandwidth, "bandwidth")
    kernel = get_kernel(kernel)
    pts = np.atleast_1d(np.asarray(x, dtype=float))
    w = kernel((pts[:, None] - X[None, :]) / h)
    den = w.sum(axis=1)
    if np.any(den == 0.0):
        raise DegenerateDenominator("kernel weight sum is zero at a query point")
    out = (w * y[None, :]).sum(axis=1) / den
    if np.ndim(x) == 0:
        return float(out[0])
    return out


def rosenblatt_density(X, x, bandwidth, kernel="gaussian"):
    """Batch kernel density estimate ``sum K((x - X_k)/h) / (n h)``."""
    X = check_univariate(X)
    if X.shape[0] == 0:
        raise ValueError("samples must be nonempty")
    h = check_positive_scalar(bandwidth, "bandwidth")
    kernel = get_kernel(kernel)
    pts = np.atleast_1d(np.asarray(x, dtype=float))
    out = kernel((pts[:, None] - X[None, :]) / h).sum(axis=1) / (X.shape[0] * h)
    if np.ndim(x) == 0:
        return float(out[0])
    return out


class _HistoryRegressor(RegressorMixin, BaseEstimator):
    """Shared fit/partial_fit plumbing: store the sample stream in order."""

    def fit(self, X, y):
        X, y = check_paired(X, y)
        self.X_ = X
        self.y_ = y
        self.n_samples_seen_ = X.shape[0]
        self._post_fit()
        return self

    def partial_fit(self, X, y):
        X, y = check_paired(X, y)
        if not hasattr(self, "X_"):
            self.X_ = X
            self.y_ = y
        else:
            self.X_ = np.concatenate([self.X_, X])
            self.y_ = np.concatenate([self.y_, y])
        self.n_samples_seen_ = self.X_.shape[0]
        self._post_fit()
        return self

    def _post_fit(self):
        pass

    def _check_fitted(self):
        if not hasattr(self, "X_"):
            raise RuntimeError("estimator is not fitted; call fit or partial_fit first")


class RecursiveKernelRegressor(_HistoryRegressor):
    """Stepsize-driven recursive kernel regressor with iterate averaging.

    Parameters
    ----------
    config : EstimatorConfig, optional
        Sequence bundle; defaults to :func:`reference_config`.
    kernel : str or Kernel
        Kernel weight function.
    average : bool
        Predict the weighted iterate average (default) rather than the final
        iterate.
    """

    def __init__(self, config=None, kernel="gaussian", average=True):
        self.config = config
        self.kernel = kernel
        self.average = average

    def _effective_config(self):
        return self.config if self.config is not None else reference_config()

    def _post_fit(self):
        check_contraction(self._effective_config(), get_kernel(self.kernel))

    def predict(self, X):
        self._check_fitted()
        pts = check_univariate(X, "X")
        r, rbar = replay_regression(
            self.X_, self.y_, pts, self._effective_config(), self.kernel,
            validate=False,
        )
        return rbar if self.average else r


class RecursiveRatioRegressor(_HistoryRegressor):
    """Recursive numerator/denominator kernel regressor.

    Both parts follow the density-style recursion with the ``density_stepsize``
    sequence; the prediction is their ratio.  Shares the limiting distribution
    of the iterate-averaged recursion for the reference sequences while being
    free of the initialization transient, which makes it the estimator of
    choice at small and moderate sample sizes.
    """

    def __init__(self, config=None, kernel="gaussian"):
        self.config = config
        self.kernel = kernel

    def _effective_config(self):
        return self.config if self.config is not None else reference_config()

    def _post_fit(self):
        check_density_stepsize(self._effective_config().density_stepsize)

    def predict(self, X):
        self._check_fitted()
        pts = check_univariate(X, "X")
        cfg = self._effective_config()
        num, den = replay_ratio(
            self.X_, self.y_, pts, cfg.bandwidth, cfg.density_stepsize, self.kernel
        )
        if np.any(np.abs(den) < DENSITY_FLOOR):
            raise DegenerateDenominator("denominator vanished at a query point")
        return num / den


class NadarayaWatsonRegressor(_HistoryRegressor):
    """Batch weight-ratio kernel regressor.

    ``bandwidth`` may be a positive float or a :class:`SequenceSpec`, in which
    case it is evaluated at the fitted sample size.
    """

    def __init__(self, bandwidth=None, kernel="gaussian"):
        self.bandwidth = bandwidth
        self.kernel = kernel

    def _bandwidth_value(self):
        bw = self.bandwidth
        if bw is None:
            bw = reference_config().bandwidth
        if callable(bw):
            return float(bw(self.n_samples_seen_))
        return float(bw)

    def predict(self, X):
        self._check_fitted()
        pts = check_univariate(X, "X")
        return nadaraya_watson(self.X_, self.y_, pts, self._bandwidth_value(), self.kernel)


class RecursiveDensityEstimator(BaseEstimator):
    """Recursive kernel density estimator over a stored sample stream."""

    def __init__(self, config=None, kernel="gaussian"):
        self.config = config
        self.kernel = kernel

    def _effective_config(self):
        return self.config if self.config is not None else reference_config()

    def fit(self, X, y=None):
        self.X_ = check_univariate(X)
        check_density_stepsize(self._effective_config().density_stepsize)
        self.n_samples_seen_ = self.X_.shape[0]
        return self

    def partial_fit(self, X, y=None):
        X = check_univariate(X)
        if not hasattr(self, "X_"):
            self.X_ = X
        else:
            self.X_ = np.concatenate([self.X_, X])
        self.n_samples_seen_ = self.X_.shape[0]
        return self

    def predict(self, X):
        if not hasattr(self, "X_"):
            raise RuntimeError("estimator is not fitted; call fit or partial_fit first")
        pts = check_univariate(X, "X")
        cfg = self._effective_config()
        return replay_density(self.X_, pts, cfg.bandwidth, cfg.density_stepsize, self.kernel)
