"""Command-line front end: run coverage experiments, diagnostics and checks.

Configuration comes from an optional JSON file (``--config``) whose values
are overridden by command-line flags.  Exit codes: 0 on success, 2 on
configuration or assumption-validation failure, 1 on any other runtime fault.
"""

import argparse
import json
import math
import sys

from .asymptotics import (
    ModelOracle,
    bias_constant,
    clt_averaged,
    clt_generalized,
    inv_n_stepsize_limit,
    nadaraya_watson_variance,
    optimal_weight_exponent,
    oracle_from_model,
    theoretical_level,
    variance_factor,
)
from .exceptions import RkregError
from .kernels import get_kernel
from .sequences import EstimatorConfig, reference_config, validate_assumptions
from .simulation import (
    SimConfig,
    clt_diagnostic,
    get_design,
    get_model,
    run_cell,
    run_table,
)

SCHEMA_VERSION = 1

CONFIG_DEFAULTS = {
    "schema_version": SCHEMA_VERSION,
    "model": "cosine",
    "design": "std_normal",
    "d": 1.0,
    "n": 200,
    "x": [-0.5, 0.0, 0.5],
    "reps": 5000,
    "seed": 42,
    "kernel": "gaussian",
    "estimator": "both",
    "variance_mode": "marginal",
    "averaged_center": "ratio",
    "z": 1.96,
    "ns": [50, 100, 200],
    "ds": [1.0, 2.0],
    "sequences": None,
}


class ConfigError(Exception):
    """Malformed configuration input (file or flags)."""


def _parse_float_list(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(part) for part in str(text).split(",") if part.strip() != ""]


def _parse_int_list(text):
    return [int(v) for v in _parse_float_list(text)]


def _load_config_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r}")
    unknown = set(data) - set(CONFIG_DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return data


def _effective_config(args):
    """Defaults, overridden by the config file, overridden by CLI flags."""
    cfg = dict(CONFIG_DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(_load_config_file(args.config))
    overrides = {
        "model": args.model, "design": args.design, "d": args.d, "n": args.n,
        "reps": args.reps, "seed": args.seed, "kernel": args.kernel,
        "estimator": args.estimator, "variance_mode": args.variance_mode,
        "averaged_center": args.averaged_center,
    }
    for key, value in overrides.items():
        if value is not None:
            cfg[key] = value
    if getattr(args, "x", None) is not None:
        cfg["x"] = _parse_float_list(args.x)
    if getattr(args, "ns", None) is not None:
        cfg["ns"] = _parse_int_list(args.ns)
    if getattr(args, "ds", None) is not None:
        cfg["ds"] = _parse_float_list(args.ds)
    return cfg


def _estimator_config(cfg):
    if cfg.get("sequences") is None:
        return reference_config()
    try:
        return EstimatorConfig.from_dict(cfg["sequences"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad sequences block: {exc}") from exc


def _sim_config(cfg):
    try:
        return SimConfig(
            model=get_model(cfg["model"]),
            design=get_design(cfg["design"]),
            noise_scale=float(cfg["d"]),
            n=int(cfg["n"]),
            reps=int(cfg["reps"]),
            points=tuple(_parse_float_list(cfg["x"])),
            estimator_cfg=_estimator_config(cfg),
            kernel=cfg["kernel"],
            seed=int(cfg["seed"]),
            z=float(cfg["z"]),
            variance_mode=cfg["variance_mode"],
            averaged_center=cfg["averaged_center"],
            estimator=cfg["estimator"],
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _dump_config(cfg):
    out = dict(cfg)
    if out.get("sequences") is None:
        out["sequences"] = reference_config().to_dict()
    print(json.dumps(out, indent=2, sort_keys=True))


def _emit_report(report, out_path):
    if out_path:
        report.to_csv(out_path)
    print(report.to_text())
    if out_path:
        print(f"CSV written to {out_path}")


def _cmd_coverage_cell(args):
    cfg = _effective_config(args)
    if args.dump_config:
        _dump_config(cfg)
        return 0
    sim = _sim_config(cfg)
    report = run_cell(sim, n_jobs=args.threads)
    _emit_report(report, args.out)
    return 0


def _cmd_coverage_table(args):
    cfg = _effective_config(args)
    if args.dump_config:
        _dump_config(cfg)
        return 0
    sim = _sim_config(cfg)
    report = run_table(
        sim.model, sim.design, base_config=sim,
        ns=tuple(cfg["ns"]), ds=tuple(cfg["ds"]), n_jobs=args.threads,
    )
    _emit_report(report, args.out)
    return 0


def _cmd_clt_check(args):
    cfg = _effective_config(args)
    if args.dump_config:
        _dump_config(cfg)
        return 0
    if len(_parse_float_list(cfg["x"])) != 1:
        raise ConfigError("clt-check needs a single --x value")
    sim = _sim_config(cfg)
    diag = clt_diagnostic(sim, estimator=args.clt_estimator, n_jobs=args.threads)
    print(f"estimator          {diag.estimator}")
    print(f"x / n / reps       {diag.x:g} / {diag.n} / {diag.reps}")
    print(f"target variance    {diag.target_variance:.6g}")
    print(f"standardized mean  {diag.mean:.4f}")
    print(f"standardized var   {diag.variance:.4f}")
    print(f"KS distance        {diag.ks_distance:.4f}")
    return 0


def _cmd_validate_config(args):
    cfg = _effective_config(args)
    if args.dump_config:
        _dump_config(cfg)
        return 0
    sim = _sim_config(cfg)
    report = validate_assumptions(sim.estimator_cfg, mode="averaged")
    print(report)
    sim.validate()  # raises on contraction/stepsize violations
    print("contraction and density-stepsize checks: pass")
    return 0


def _cmd_constants(args):
    cfg = _effective_config(args)
    ecfg = _estimator_config(cfg)
    a = args.a if args.a is not None else ecfg.bandwidth_exponent
    q = args.q if args.q is not None else ecfg.weight_exponent
    z = float(cfg["z"])
    print(f"bandwidth exponent a        {a:g}")
    print(f"weight exponent q           {q:g}")
    print(f"optimal weight exponent     {optimal_weight_exponent(a):g}")
    vf = variance_factor(q, a)
    print(f"variance factor             {vf:.6f}")
    print(f"inv limit of n*stepsize     {inv_n_stepsize_limit(ecfg.stepsize):g}")
    print(f"theoretical level (batch)   {theoretical_level(1.0, 1.0, z):.4f}")
    print(f"theoretical level (avg)     {theoretical_level(1.0, vf, z):.4f}")
    if args.model is not None and args.design is not None:
        model = get_model(args.model)
        design = get_design(args.design)
        oracle = oracle_from_model(model, design, cfg["d"])
        kernel = get_kernel(cfg["kernel"])
        for x in _parse_float_list(cfg["x"]):
            print(f"-- x = {x:g}")
            print(f"  bias constant             {bias_constant(oracle, x, kernel):.6f}")
            try:
                p = clt_generalized(oracle, x, ecfg, kernel, regime="balanced")
                print(f"  recursion limit law       bias {p.bias:.6f} "
                      f"variance {p.variance:.6f} per {p.rate}")
            except RkregError as exc:
                print(f"  recursion limit law       unavailable: {exc}")
            try:
                p = clt_averaged(oracle, x, ecfg, kernel, regime="balanced")
                print(f"  averaged limit law        bias {p.bias:.6f} "
                      f"variance {p.variance:.6f} per {p.rate}")
            except RkregError as exc:
                print(f"  averaged limit law        unavailable: {exc}")
            print(f"  batch variance            "
                  f"{nadaraya_watson_variance(oracle, x, kernel):.6f}")
    return 0


def _add_common(parser):
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--model", help="regression model (cosine, bimodal_exp, linear)")
    parser.add_argument("--design", help="design density (std_normal, normal_mixture, student6)")
    parser.add_argument("--d", type=float, help="noise scale")
    parser.add_argument("--n", type=int, help="sample size")
    parser.add_argument("--x", help="evaluation point(s), comma separated")
    parser.add_argument("--reps", type=int, help="Monte Carlo replications")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--kernel", help="kernel name (gaussian, epanechnikov)")
    parser.add_argument("--estimator", choices=("nw", "averaged", "both"),
                        help="which interval rows to produce")
    parser.add_argument("--variance-mode", dest="variance_mode",
                        choices=("marginal", "fitted"),
                        help="residual convention for interval widths")
    parser.add_argument("--averaged-center", dest="averaged_center",
                        choices=("ratio", "iterate_average"),
                        help="recursive estimator used as the averaged-row center")
    parser.add_argument("--out", help="CSV output path")
    parser.add_argument("--threads", type=int, default=1, help="worker processes")
    parser.add_argument("--dump-config", action="store_true",
                        help="print the effective configuration and exit")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rkreg",
        description="Recursive kernel regression: coverage experiments and constants",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coverage-cell", help="one Monte Carlo coverage configuration")
    _add_common(p)
    p.set_defaults(func=_cmd_coverage_cell)

    p = sub.add_parser("coverage-table", help="the full (n, d) coverage grid")
    _add_common(p)
    p.add_argument("--ns", help="sample sizes, comma separated (default 50,100,200)")
    p.add_argument("--ds", help="noise scales, comma separated (default 1,2)")
    p.set_defaults(func=_cmd_coverage_table)

    p = sub.add_parser("clt-check", help="standardized-error diagnostics at one point")
    _add_common(p)
    p.add_argument("--clt-estimator", dest="clt_estimator", default="averaged",
                   choices=("averaged", "nw", "ratio"),
                   help="estimator whose limit law is checked")
    p.set_defaults(func=_cmd_clt_check)

    p = sub.add_parser("validate-config", help="check assumptions for a configuration")
    _add_common(p)
    p.set_defaults(func=_cmd_validate_config)

    p = sub.add_parser("constants", help="print asymptotic constants and levels")
    _add_common(p)
    p.add_argument("--a", type=float, help="bandwidth exponent override")
    p.add_argument("--q", type=float, help="weight exponent override")
    p.set_defaults(func=_cmd_constants)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, RkregError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime fault, never a traceback to the user
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
