"""Regularly varying positive sequences and the assumption checks built on them.

Every tuning sequence used by the estimators (stepsizes, bandwidths, averaging
weights) has the closed form ``c * n**(-power) * (ln n)**log_power``.  Keeping
the closed form explicit makes membership in the regular-variation class
decidable symbolically: the sequence varies regularly with index ``-power``,
which the numeric probe :func:`gs_exponent_estimate` can cross-check.
"""

from dataclasses import dataclass
import math

import numpy as np

from .exceptions import DivergentXi


@dataclass(frozen=True)
class SequenceSpec:
    """A positive sequence ``c * n**(-power) * (ln n)**log_power``.

    The value at ``n = 1`` is defined as ``c`` (the log factor is read as 1
    there); recursions start at the first sample and a zero or infinite first
    value would be meaningless.

    Parameters
    ----------
    scale : float
        Positive multiplier ``c``.
    power : float
        Exponent of ``n`` (the sequence decays like ``n**-power``).
    log_power : float
        Exponent of ``ln n``.
    """

    scale: float
    power: float = 0.0
    log_power: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.scale) and self.scale > 0.0):
            raise ValueError(f"scale must be positive and finite; got {self.scale!r}")
        if not (math.isfinite(self.power) and math.isfinite(self.log_power)):
            raise ValueError("power and log_power must be finite")

    def __call__(self, n):
        """Evaluate the sequence at integer index ``n >= 1`` (scalar or array)."""
        n_arr = np.asarray(n, dtype=float)
        if np.any(n_arr < 1):
            raise ValueError("sequence index must be >= 1")
        out = self.scale * n_arr ** (-self.power)
        if self.log_power != 0.0:
            with np.errstate(divide="ignore"):
                log_term = np.where(n_arr > 1.0, np.log(n_arr), 1.0) ** self.log_power
            out = out * np.where(n_arr > 1.0, log_term, 1.0)
        if np.ndim(n) == 0:
            return float(out)
        return out

    def head(self, n_max):
        """Values at 1..n_max as an array; index k holds the value at k+1."""
        return self(np.arange(1, n_max + 1))

    @property
    def gs_exponent(self):
        """Regular-variation index of the sequence (``-power``)."""
        return -self.power

    def ratio(self, other):
        """Closed-form parameters of the elementwise ratio ``self(n) / other(n)``."""
        return SequenceSpec(
            scale=self.scale / other.scale,
            power=self.power - other.power,
            log_power=self.log_power - other.log_power,
        )

    def max_value(self):
        """Supremum of the sequence over n >= 1.

        On ``n >= 2`` the continuous extension is unimodal, so the discrete
        maximum sits at the integer neighbours of the critical point
        ``exp(log_power / power)``; the n=1 value ``scale`` is compared
        separately.  Returns ``inf`` for non-decaying growth.
        """
        if self.power < 0.0 or (self.power == 0.0 and self.log_power > 0.0):
            return math.inf
        candidates = [1, 2, 3]
        if self.power > 0.0 and self.log_power > 0.0:
            peak = self.log_power / self.power
            if peak > 700.0:  # exp overflows; bound by the continuous supremum
                return self.scale * math.exp(-self.log_power) * peak ** self.log_power
            n_star = math.exp(peak)
            candidates.extend([max(2, math.floor(n_star)), math.ceil(n_star) + 1])
        return max(self(k) for k in candidates)

    def to_dict(self):
        return {"scale": self.scale, "power": self.power, "log_power": self.log_power}

    @classmethod
    def from_dict(cls, data):
        return cls(
            scale=float(data["scale"]),
            power=float(data.get("power", 0.0)),
            log_power=float(data.get("log_power", 0.0)),
        )


def gs_exponent_estimate(spec, n_max):
    """Numeric probe of the regular-variation index: ``n * (1 - v(n-1)/v(n))``.

    Converges to ``-spec.power`` as ``n_max`` grows; for sequences with a log
    factor the error decays like ``log_power / ln(n_max)``, so generous
    tolerances are needed even at large ``n_max``.
    """
    n_max = int(n_max)
    if n_max < 100:
        raise ValueError("n_max must be >= 100 for a meaningful estimate")
    return n_max * (1.0 - spec(n_max - 1) / spec(n_max))


def limit_n_times(spec):
    """Limit of ``n * spec(n)`` in [0, inf]."""
    if spec.power < 1.0:
        return math.inf
    if spec.power > 1.0:
        return 0.0
    if spec.log_power > 0.0:
        return math.inf
    if spec.log_power < 0.0:
        return 0.0
    return spec.scale


def inv_n_stepsize_limit(stepsize):
    """Limit of ``1 / (n * stepsize(n))``; zero when ``n * stepsize`` diverges.

    Raises
    ------
    DivergentXi
        If the limit is infinite (stepsize decaying faster than 1/n), in
        which case no convergence theory applies.
    """
    if stepsize.power > 1.0:
        raise DivergentXi(
            f"stepsize decays faster than 1/n (power={stepsize.power}); "
            "1/(n*stepsize) diverges"
        )
    lim = limit_n_times(stepsize)
    if lim == 0.0:
        return math.inf
    return 0.0 if math.isinf(lim) else 1.0 / lim


@dataclass(frozen=True)
class EstimatorConfig:
    """Sequence bundle driving the recursive estimators.

    Parameters
    ----------
    stepsize : SequenceSpec
        Gain sequence of the regression recursion.
    bandwidth : SequenceSpec
        Kernel bandwidth sequence.
    weights : SequenceSpec
        Averaging weights for the iterate average.
    density_stepsize : SequenceSpec
        Gain sequence of the recursive density (and ratio) estimator.
    """

    stepsize: SequenceSpec
    bandwidth: SequenceSpec
    weights: SequenceSpec
    density_stepsize: SequenceSpec

    def __post_init__(self):
        # stepsizes decaying faster than 1/n have finite mass: the recursion
        # freezes before converging and no limit theory applies
        if self.stepsize.power > 1.0:
            raise DivergentXi(
                f"stepsize power {self.stepsize.power} > 1; the stepsize "
                "series must diverge"
            )

    @property
    def stepsize_exponent(self):
        """Decay exponent of the stepsize (alpha)."""
        return self.stepsize.power

    @property
    def bandwidth_exponent(self):
        """Decay exponent of the bandwidth (a)."""
        return self.bandwidth.power

    @property
    def weight_exponent(self):
        """Decay exponent of the averaging weights (q)."""
        return self.weights.power

    def to_dict(self):
        return {
            "stepsize": self.stepsize.to_dict(),
            "bandwidth": self.bandwidth.to_dict(),
            "weights": self.weights.to_dict(),
            "density_stepsize": self.density_stepsize.to_dict(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            stepsize=SequenceSpec.from_dict(data["stepsize"]),
            bandwidth=SequenceSpec.from_dict(data["bandwidth"]),
            weights=SequenceSpec.from_dict(data["weights"]),
            density_stepsize=SequenceSpec.from_dict(data["density_stepsize"]),
        )


def reference_config():
    """The default, slightly undersmoothed configuration.

    Stepsize ``n**-0.9``, bandwidth and weights ``n**-0.2 / ln(n)`` (weights
    equal to the bandwidth minimise the averaged estimator's limiting
    variance), density stepsize ``0.8 / n`` (variance-optimal for the
    recursive density estimator).
    """
    bandwidth = SequenceSpec(scale=1.0, power=0.2, log_power=-1.0)
    return EstimatorConfig(
        stepsize=SequenceSpec(scale=1.0, power=0.9),
        bandwidth=bandwidth,
        weights=bandwidth,
        density_stepsize=SequenceSpec(scale=0.8, power=1.0),
    )


@dataclass(frozen=True)
class AssumptionCheck:
    name: str
    passed: bool
    message: str


class ValidationReport:
    """Pass/fail verdicts for the estimator assumptions, one entry per check."""

    def __init__(self, checks):
        self.checks = list(checks)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def __iter__(self):
        return iter(self.checks)

    def __str__(self):
        lines = []
        for c in self.checks:
            status = "pass" if c.passed else "FAIL"
            lines.append(f"[{status}] {c.name}: {c.message}")
        lines.append(f"overall: {'pass' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def _slow_stepsize_growth(stepsize):
    """True when n*stepsize(n) outgrows ln(sum of stepsizes)."""
    return stepsize.power < 1.0 or (
        stepsize.power == 1.0 and stepsize.log_power > 0.0
    )


def validate_assumptions(cfg, mode="generalized"):
    """Check the convergence-theory assumptions for an estimator configuration.

    ``mode="generalized"`` checks the conditions for the stepsize-driven
    recursion; ``mode="averaged"`` additionally checks the conditions under
    which the iterate average attains its limit law.  Failures are report
    entries, never exceptions.
    """
    if mode not in ("generalized", "averaged"):
        raise ValueError(f"unknown mode {mode!r}")
    alpha = cfg.stepsize_exponent
    a = cfg.bandwidth_exponent
    q = cfg.weight_exponent
    checks = [
        AssumptionCheck(
            "stepsize_exponent_range",
            0.75 < alpha <= 1.0,
            f"stepsize exponent alpha={alpha} must lie in (3/4, 1]",
        ),
        AssumptionCheck(
            "bandwidth_exponent_range",
            (1.0 - alpha) / 4.0 < a < alpha / 3.0,
            f"bandwidth exponent a={a} must lie in "
            f"({(1.0 - alpha) / 4.0}, {alpha / 3.0})",
        ),
        AssumptionCheck(
            "stepsize_rate_limit_exists",
            cfg.stepsize.power <= 1.0,
            f"1/(n*stepsize) must converge; stepsize power "
            f"{cfg.stepsize.power} must be <= 1",
        ),
    ]
    if mode == "averaged":
        lo, hi = 1.0 - alpha, (4.0 * alpha - 3.0) / 2.0
        checks.append(
            AssumptionCheck(
                "bandwidth_exponent_range_averaged",
                lo < a < hi,
                f"bandwidth exponent a={a} must lie in ({lo}, {hi}) for averaging",
            )
        )
        q_cap = min(1.0 - 2.0 * a, (1.0 + a) / 2.0)
        checks.append(
            AssumptionCheck(
                "weight_exponent_bound",
                q < q_cap,
                f"weight exponent q={q} must be < min(1-2a, (1+a)/2) = {q_cap}",
            )
        )
        checks.append(
            AssumptionCheck(
                "stepsize_log_growth",
                _slow_stepsize_growth(cfg.stepsize),
                "n*stepsize(n) must outgrow the log of the stepsize partial "
                "sums (power < 1, or power 1 with positive log exponent); "
                f"got power {cfg.stepsize.power}, log_power "
                f"{cfg.stepsize.log_power}",
            )
        )
    return ValidationReport(checks)
