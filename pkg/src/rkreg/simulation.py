"""Monte Carlo coverage experiments for the regression confidence intervals.

The harness draws ``(X, Y)`` samples from additive-noise models
``Y = r(X) + d * eps``, builds the batch and recursive confidence intervals
on each replication, and reports empirical coverage per evaluation point.

Reproducibility contract: replication ``i`` of a configuration with master
seed ``s`` always uses the PCG64 stream seeded by
``SeedSequence(s, spawn_key=(*seed_key, i))``.  Per-replication results are
therefore independent of block sizes, worker counts and execution order, and
aggregation runs in replication-index order, so identical configurations
produce bit-identical reports at any parallelism level.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
import csv
import io
import math

import numpy as np

from .asymptotics import (
    nadaraya_watson_variance,
    norm_cdf,
    oracle_from_model,
    theoretical_level,
    variance_factor,
)
from .estimators import DENSITY_FLOOR, check_contraction, check_density_stepsize
from .kernels import get_kernel
from .sequences import EstimatorConfig, reference_config, validate_assumptions

ESTIMATOR_ROWS = ("nw", "averaged")


# ---------------------------------------------------------------------------
# models and designs
# ---------------------------------------------------------------------------

def _r_cosine(x):
    return np.cos(x)


def _r_bimodal_exp(x):
    return 0.3 * np.exp(-4.0 * (x + 1.0) ** 2) + 0.7 * np.exp(-16.0 * (x - 1.0) ** 2)


def _r_linear(x):
    return 1.0 + 0.4 * x


@dataclass(frozen=True)
class RegressionModel:
    """A named true regression function."""

    name: str
    fn: callable

    def __call__(self, x):
        return self.fn(x)


REGRESSION_MODELS = {
    "cosine": RegressionModel("cosine", _r_cosine),
    "bimodal_exp": RegressionModel("bimodal_exp", _r_bimodal_exp),
    "linear": RegressionModel("linear", _r_linear),
}
_MODEL_ALIASES = {"cos": "cosine", "bimodal": "bimodal_exp"}


def get_model(model):
    if isinstance(model, RegressionModel):
        return model
    name = _MODEL_ALIASES.get(model, model)
    try:
        return REGRESSION_MODELS[name]
    except KeyError:
        raise ValueError(
            f"unknown model {model!r}; available: {sorted(REGRESSION_MODELS)}"
        ) from None


class _StdNormalDesign:
    name = "std_normal"

    def sample(self, rng, size):
        return rng.standard_normal(size)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


class _NormalMixtureDesign:
    """Equal mixture of unit normals centered at -1/2 and 1/2."""

    name = "normal_mixture"

    def sample(self, rng, size):
        # draw order: component selectors first, then the normal innovations
        u = rng.random(size)
        centers = np.where(u < 0.5, -0.5, 0.5)
        return centers + rng.standard_normal(size)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        c = 1.0 / math.sqrt(2.0 * math.pi)
        return 0.5 * c * (np.exp(-0.5 * (x + 0.5) ** 2) + np.exp(-0.5 * (x - 0.5) ** 2))


class _Student6Design:
    """Student distribution with 6 degrees of freedom.

    Sampled as normal / sqrt(chi2_6 / 6) with the chi-square built from six
    squared normals of the same stream, avoiding any library-specific
    transform.
    """

    name = "student6"
    _df = 6
    _pdf_const = math.gamma(3.5) / (math.sqrt(6.0 * math.pi) * math.gamma(3.0))

    def sample(self, rng, size):
        z = rng.standard_normal(size)
        w = rng.standard_normal((self._df, size))
        return z / np.sqrt((w * w).sum(axis=0) / self._df)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return self._pdf_const * (1.0 + x * x / self._df) ** -3.5


DESIGN_DENSITIES = {
    d.name: d for d in (_StdNormalDesign(), _NormalMixtureDesign(), _Student6Design())
}


def get_design(design):
    if hasattr(design, "sample") and hasattr(design, "pdf"):
        return design
    try:
        return DESIGN_DENSITIES[design]
    except KeyError:
        raise ValueError(
            f"unknown design {design!r}; available: {sorted(DESIGN_DENSITIES)}"
        ) from None


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimConfig:
    """One Monte Carlo experiment: model, design, sizes, sequences, seed."""

    model: RegressionModel
    design: object
    noise_scale: float = 1.0
    n: int = 200
    reps: int = 5000
    points: tuple = (-0.5, 0.0, 0.5)
    estimator_cfg: EstimatorConfig = field(default_factory=reference_config)
    kernel: str = "gaussian"
    seed: int = 42
    seed_key: tuple = ()
    z: float = 1.96
    variance_mode: str = "marginal"
    averaged_center: str = "ratio"
    estimator: str = "both"

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.noise_scale < 0.0:
            raise ValueError("noise_scale must be >= 0")
        if self.variance_mode not in ("marginal", "fitted"):
            raise ValueError("variance_mode must be 'marginal' or 'fitted'")
        if self.averaged_center not in ("ratio", "iterate_average"):
            raise ValueError("averaged_center must be 'ratio' or 'iterate_average'")
        if self.estimator not in ("nw", "averaged", "both"):
            raise ValueError("estimator must be 'nw', 'averaged' or 'both'")

    def validate(self):
        """Run the assumption, contraction and stepsize checks; raise on failure."""
        kernel = get_kernel(self.kernel)
        report = validate_assumptions(self.estimator_cfg, mode="averaged")
        if not report.passed:
            from .exceptions import ConditionViolated

            raise ConditionViolated(str(report))
        check_contraction(self.estimator_cfg, kernel)
        check_density_stepsize(self.estimator_cfg.density_stepsize)
        return self


def sample_pair(config, rng, size=None):
    """Draw (X, Y) from the configured model; X first, then the noise."""
    n = config.n if size is None else size
    X = get_design(config.design).sample(rng, n)
    eps = rng.standard_normal(n)
    Y = get_model(config.model)(X) + config.noise_scale * eps
    return X, Y


def replication_rng(config, rep_index):
    """The documented stream for one replication: PCG64(master seed, key + index)."""
    ss = np.random.SeedSequence(config.seed, spawn_key=(*config.seed_key, rep_index))
    return np.random.default_rng(ss)


def _draw_block(config, lo, hi):
    B = hi - lo
    X = np.empty((B, config.n))
    Y = np.empty((B, config.n))
    for j in range(B):
        X[j], Y[j] = sample_pair(config, replication_rng(config, lo + j))
    return X, Y


# ---------------------------------------------------------------------------
# vectorised engine
# ---------------------------------------------------------------------------

def _coverage_block(config, lo, hi):
    """Coverage indicators and widths for replications [lo, hi).

    Returns a dict with per-replication arrays of shape (B, m) per estimator;
    degenerate replications carry cover=False and width=NaN.
    """
    model = get_model(config.model)
    kernel = get_kernel(config.kernel)
    cfg = config.estimator_cfg
    n = config.n
    m = len(config.points)
    points = np.asarray(config.points, dtype=float)
    want_nw = config.estimator in ("nw", "both")
    want_av = config.estimator in ("averaged", "both")
    fitted = config.variance_mode == "fitted"

    gamma = cfg.stepsize.head(n)
    h = cfg.bandwidth.head(n)
    q = cfg.weights.head(n)
    wsum = np.cumsum(q)
    beta = cfg.density_stepsize.head(n)
    hn = h[-1]
    ksq = kernel.square_integral
    z_crit = config.z

    X, Y = _draw_block(config, lo, hi)
    B = hi - lo
    if fitted:
        P = np.concatenate([np.broadcast_to(points, (B, m)).copy(), X], axis=1)
    else:
        P = np.broadcast_to(points, (B, m)).copy()

    iterate = np.zeros_like(P)
    average = np.zeros_like(P)
    fhat = np.zeros((B, m))
    rnum = np.zeros_like(P)
    rden = np.zeros_like(P)
    nw_num = np.zeros_like(P) if want_nw else None
    nw_den = np.zeros_like(P) if want_nw else None

    use_iterate_avg = config.averaged_center == "iterate_average"
    for k in range(n):
        Xk = X[:, k][:, None]
        Yk = Y[:, k][:, None]
        zk = kernel((P - Xk) / h[k]) / h[k]
        if want_av:
            if use_iterate_avg or fitted:
                iterate = iterate + gamma[k] * zk * (Yk - iterate)
                average = average + (q[k] / wsum[k]) * (iterate - average)
            rnum = rnum + beta[k] * (Yk * zk - rnum)
            rden = rden + beta[k] * (zk - rden)
            fhat = fhat + beta[k] * (zk[:, :m] - fhat)
        if want_nw:
            knw = kernel((P - Xk) / hn)
            nw_num = nw_num + Yk * knw
            nw_den = nw_den + knw

    truth = model(points)[None, :]
    if config.variance_mode == "marginal":
        ybar = Y.mean(axis=1)[:, None]
        S_shared = ((Y - ybar) ** 2).sum(axis=1)[:, None]

    out = {}
    with np.errstate(divide="ignore", invalid="ignore"):
        if want_nw:
            nw_ok = nw_den[:, :m] > 0.0
            center = np.where(nw_ok, nw_num[:, :m] / np.where(nw_ok, nw_den[:, :m], 1.0), np.nan)
            f_nw = nw_den[:, :m] / (n * hn)
            if fitted:
                fit_ok = nw_den[:, m:] > 0.0
                fitted_vals = np.where(fit_ok, nw_num[:, m:] / np.where(fit_ok, nw_den[:, m:], 1.0), np.nan)
                S = ((Y - fitted_vals) ** 2).sum(axis=1)[:, None]
            else:
                S = S_shared
            width = z_crit * np.sqrt(S * ksq / (n * n * hn * f_nw))
            ok = nw_ok & (f_nw > DENSITY_FLOOR) & np.isfinite(width)
            cover = ok & (np.abs(truth - center) <= width)
            out["nw_cover"] = cover
            out["nw_width"] = np.where(ok, width, np.nan)
        if want_av:
            if use_iterate_avg:
                center = average[:, :m]
                center_ok = np.ones((B, m), dtype=bool)
            else:
                den_ok = np.abs(rden[:, :m]) > DENSITY_FLOOR
                center = np.where(den_ok, rnum[:, :m] / np.where(den_ok, rden[:, :m], 1.0), np.nan)
                center_ok = den_ok
            if fitted:
                if use_iterate_avg:
                    fitted_vals = average[:, m:]
                else:
                    fit_ok = np.abs(rden[:, m:]) > DENSITY_FLOOR
                    fitted_vals = np.where(fit_ok, rnum[:, m:] / np.where(fit_ok, rden[:, m:], 1.0), np.nan)
                S = ((Y - fitted_vals) ** 2).sum(axis=1)[:, None]
            else:
                S = S_shared
            width = z_crit * np.sqrt(S * ksq / (n * n * hn * fhat))
            ok = center_ok & (fhat > DENSITY_FLOOR) & np.isfinite(width)
            cover = ok & (np.abs(truth - center) <= width)
            out["av_cover"] = cover
            out["av_width"] = np.where(ok, width, np.nan)
    return out


def _estimate_block(config, lo, hi, estimator):
    """Point-estimate values at config.points for replications [lo, hi)."""
    model = get_model(config.model)
    kernel = get_kernel(config.kernel)
    cfg = config.estimator_cfg
    n = config.n
    m = len(config.points)
    points = np.asarray(config.points, dtype=float)

    gamma = cfg.stepsize.head(n)
    h = cfg.bandwidth.head(n)
    q = cfg.weights.head(n)
    wsum = np.cumsum(q)
    beta = cfg.density_stepsize.head(n)
    hn = h[-1]

    X, Y = _draw_block(config, lo, hi)
    B = hi - lo
    P = np.broadcast_to(points, (B, m)).copy()

    if estimator == "nw":
        num = np.zeros_like(P)
        den = np.zeros_like(P)
        for k in range(n):
            knw = kernel((P - X[:, k][:, None]) / hn)
            num = num + Y[:, k][:, None] * knw
            den = den + knw
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), np.nan)
    if estimator == "averaged":
        iterate = np.zeros_like(P)
        average = np.zeros_like(P)
        for k in range(n):
            zk = kernel((P - X[:, k][:, None]) / h[k]) / h[k]
            iterate = iterate + gamma[k] * zk * (Y[:, k][:, None] - iterate)
            average = average + (q[k] / wsum[k]) * (iterate - average)
        return average
    if estimator == "ratio":
        num = np.zeros_like(P)
        den = np.zeros_like(P)
        for k in range(n):
            zk = kernel((P - X[:, k][:, None]) / h[k]) / h[k]
            num = num + beta[k] * (Y[:, k][:, None] * zk - num)
            den = den + beta[k] * (zk - den)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(np.abs(den) > DENSITY_FLOOR,
                            num / np.where(np.abs(den) > DENSITY_FLOOR, den, 1.0),
                            np.nan)
    raise ValueError(f"unknown estimator {estimator!r}")


def _block_bounds(reps, n_jobs):
    blocks = max(1, min(reps, n_jobs * 4 if n_jobs > 1 else 1))
    edges = np.linspace(0, reps, blocks + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _coverage_task(args):
    return _coverage_block(*args)


def _estimate_task(args):
    return _estimate_block(*args)


def _run_blocks(task, arg_builder, reps, n_jobs):
    bounds = _block_bounds(reps, n_jobs)
    tasks = [arg_builder(lo, hi) for lo, hi in bounds]
    if n_jobs <= 1 or len(tasks) == 1:
        return [task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(task, tasks))


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoverageCell:
    """Empirical coverage of one (point, estimator) cell."""

    model: str
    design: str
    noise_scale: float
    n: int
    x: float
    estimator: str
    coverage: float
    se: float
    mean_width: float
    theoretical_level: float
    reps: int
    degenerate: int = 0


CSV_COLUMNS = ("model", "design", "d", "n", "x", "estimator", "coverage",
               "se", "mean_width", "theoretical_level")


class CoverageReport:
    """A collection of coverage cells with CSV and aligned-text rendering."""

    def __init__(self, cells):
        self.cells = list(cells)

    def extend(self, other):
        self.cells.extend(other.cells)
        return self

    def cell(self, **criteria):
        matches = [
            c for c in self.cells
            if all(getattr(c, k) == v for k, v in criteria.items())
        ]
        if len(matches) != 1:
            raise KeyError(f"{len(matches)} cells match {criteria}")
        return matches[0]

    def to_csv(self, path_or_file=None):
        """Write the report as CSV; returns the text when no target is given."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for c in self.cells:
            writer.writerow([
                c.model, c.design, repr(float(c.noise_scale)), c.n, repr(float(c.x)),
                c.estimator, repr(float(c.coverage)), repr(float(c.se)),
                repr(float(c.mean_width)), repr(float(c.theoretical_level)),
            ])
        text = buffer.getvalue()
        if path_or_file is None:
            return text
        if hasattr(path_or_file, "write"):
            path_or_file.write(text)
        else:
            with open(path_or_file, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text

    def to_text(self):
        """Aligned table: one block per (model, design, d), rows nw/averaged."""
        lines = []
        combos = sorted({(c.model, c.design, c.noise_scale) for c in self.cells})
        for model, design, d in combos:
            sub = [c for c in self.cells
                   if (c.model, c.design, c.noise_scale) == (model, design, d)]
            xs = sorted({c.x for c in sub})
            ns = sorted({c.n for c in sub})
            lines.append(f"model={model} design={design} d={d:g}")
            header = ["estimator"] + [f"x={x:g},n={n}" for x in xs for n in ns] + ["CL"]
            rows = []
            for est in ESTIMATOR_ROWS:
                cells = {(c.x, c.n): c for c in sub if c.estimator == est}
                if not cells:
                    continue
                row = [est]
                for x in xs:
                    for n in ns:
                        c = cells.get((x, n))
                        row.append("-" if c is None else f"{100 * c.coverage:.2f}%")
                row.append(f"{100 * next(iter(cells.values())).theoretical_level:.2f}%")
                rows.append(row)
            widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
            for r in [header] + rows:
                lines.append("  ".join(s.rjust(w) for s, w in zip(r, widths)))
            lines.append("")
        return "\n".join(lines)


def _aggregate(config, cover, width):
    reps = config.reps
    coverage = cover.sum(axis=0) / reps
    finite = np.isfinite(width)
    degenerate = reps - finite.sum(axis=0)
    with np.errstate(invalid="ignore"):
        mean_width = np.where(
            finite.any(axis=0),
            np.nansum(np.where(finite, width, 0.0), axis=0) / np.maximum(finite.sum(axis=0), 1),
            np.nan,
        )
    se = np.sqrt(coverage * (1.0 - coverage) / reps)
    return coverage, se, mean_width, degenerate


def run_cell(config, n_jobs=1, return_arrays=False):
    """Run the Monte Carlo experiment for one configuration.

    Returns a :class:`CoverageReport` with one cell per evaluation point and
    estimator.  Per-replication degeneracies (vanishing kernel denominators)
    are scored as non-covering, never raised.
    """
    config.validate()
    results = _run_blocks(
        _coverage_task, lambda lo, hi: (config, lo, hi), config.reps, n_jobs
    )
    merged = {
        key: np.concatenate([r[key] for r in results], axis=0)
        for key in results[0]
    }
    cells = []
    cfg = config.estimator_cfg
    model = get_model(config.model)
    design = get_design(config.design)
    for est in ESTIMATOR_ROWS:
        prefix = {"nw": "nw", "averaged": "av"}[est]
        if f"{prefix}_cover" not in merged:
            continue
        coverage, se, mean_width, degenerate = _aggregate(
            config, merged[f"{prefix}_cover"], merged[f"{prefix}_width"]
        )
        if est == "nw":
            level = theoretical_level(1.0, 1.0, config.z)
        else:
            level = theoretical_level(
                1.0,
                variance_factor(cfg.weight_exponent, cfg.bandwidth_exponent),
                config.z,
            )
        for j, x in enumerate(config.points):
            cells.append(CoverageCell(
                model=model.name, design=design.name,
                noise_scale=config.noise_scale, n=config.n, x=float(x),
                estimator=est, coverage=float(coverage[j]), se=float(se[j]),
                mean_width=float(mean_width[j]), theoretical_level=level,
                reps=config.reps, degenerate=int(degenerate[j]),
            ))
    report = CoverageReport(cells)
    if return_arrays:
        return report, merged
    return report


def run_table(model, design, base_config=None, ns=(50, 100, 200),
              ds=(1.0, 2.0), n_jobs=1):
    """The full coverage grid for one model/design pair.

    Each (d, n) cell runs on its own replication streams, derived from the
    master seed and the cell's position in the grid.
    """
    if base_config is None:
        base_config = SimConfig(model=get_model(model), design=get_design(design))
    report = CoverageReport([])
    for di, d in enumerate(ds):
        for ni, n in enumerate(ns):
            cell_cfg = replace(
                base_config,
                model=get_model(model),
                design=get_design(design),
                noise_scale=float(d),
                n=int(n),
                seed_key=base_config.seed_key + (di, ni),
            )
            report.extend(run_cell(cell_cfg, n_jobs=n_jobs))
    return report


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

def estimate_samples(config, estimator, n_jobs=1):
    """Per-replication point estimates at ``config.points``; shape (reps, m)."""
    if estimator == "averaged":
        config.validate()
    results = _run_blocks(
        _estimate_task, lambda lo, hi: (config, lo, hi, estimator),
        config.reps, n_jobs,
    )
    return np.concatenate(results, axis=0)


def ks_distance_normal(sample):
    """Kolmogorov-Smirnov distance between a sample and the standard normal."""
    s = np.sort(np.asarray(sample, dtype=float))
    n = s.shape[0]
    cdf = np.array([norm_cdf(v) for v in s])
    grid = np.arange(n + 1) / n
    return float(max(np.max(np.abs(grid[1:] - cdf)), np.max(np.abs(grid[:-1] - cdf))))


@dataclass(frozen=True)
class CltDiagnostic:
    """Moments and normal-fit distance of standardized estimation errors."""

    estimator: str
    x: float
    n: int
    reps: int
    target_variance: float
    mean: float
    variance: float
    ks_distance: float


def clt_diagnostic(config, estimator="averaged", n_jobs=1):
    """Standardized-error diagnostics against the limiting normal law.

    Standardizes ``sqrt(n * bandwidth(n)) * (estimate - r(x))`` by the square
    root of the limiting variance (the averaged-estimator constant for the
    recursive estimators, the batch constant for "nw") and reports the sample
    mean, sample variance and Kolmogorov-Smirnov distance to the standard
    normal.  Requires a single evaluation point.
    """
    if len(config.points) != 1:
        raise ValueError("clt_diagnostic expects a single evaluation point")
    x = float(config.points[0])
    model = get_model(config.model)
    oracle = oracle_from_model(model, get_design(config.design), config.noise_scale)
    kernel = get_kernel(config.kernel)
    cfg = config.estimator_cfg
    if estimator == "nw":
        target_var = nadaraya_watson_variance(oracle, x, kernel)
    else:
        target_var = (
            variance_factor(cfg.weight_exponent, cfg.bandwidth_exponent)
            * oracle.conditional_variance(x) / oracle.check_density(x)
            * kernel.square_integral
        )
    values = estimate_samples(config, estimator, n_jobs=n_jobs)[:, 0]
    hn = cfg.bandwidth(config.n)
    truth = float(model(np.asarray(x)))
    if target_var > 0.0:
        standardized = np.sqrt(config.n * hn) * (values - truth) / math.sqrt(target_var)
    else:
        standardized = np.sqrt(config.n * hn) * (values - truth)
    var = float(standardized.var(ddof=1)) if config.reps > 1 else 0.0
    return CltDiagnostic(
        estimator=estimator, x=x, n=config.n, reps=config.reps,
        target_variance=target_var, mean=float(standardized.mean()),
        variance=var, ks_distance=ks_distance_normal(standardized),
    )
