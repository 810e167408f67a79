"""Command-line driver for the experiment harness.

Every subcommand reads a configuration file (see :mod:`vvkrr.config`),
writes its artifacts plus ``manifest.json`` under the output directory and
exits 0 when its checks pass, 1 when they fail, 2 on configuration errors
and 3 on I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .analysis import Schedule, bias_oracle, run_rate_experiment, write_rate_report
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .kernel import KernelSpec
from .lowerbound import (
    check_reduction_inequality,
    kl_scalar_joints,
    monte_carlo_kl,
    random_function_pair,
    reduction_sides,
)
from .spectral import certify_effective_dimension_bound, estimate_decay, nystrom_spectrum
from .synth import TargetSpec

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

KL_REL_TOL = 0.05
EQUALITY_TOL = 1e-12


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(config: ExperimentConfig, command: str, out: Path, artifacts, result: dict):
    """Record everything needed to reproduce the run next to its artifacts."""
    manifest = {
        "command": command,
        "config_id": config.config_id,
        "config_sha256": config.digest(),
        "master_seed": config["experiment"]["master_seed"],
        "config": config.canonical_text(),
        "versions": {
            "vvkrr": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "artifacts": {Path(p).name: _sha256(Path(p)) for p in artifacts},
        "result": result,
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _write_table(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return path


def _lambda_grid(section) -> np.ndarray:
    return np.geomspace(section["lambda_min"], section["lambda_max"], section["n_lambda"])


def _rates(config: ExperimentConfig, kernel, target, schedule, out: Path, tolerance: float):
    e = config["experiment"]
    report = run_rate_experiment(
        target,
        config.noise(),
        kernel,
        e["ns"],
        e["n_seeds"],
        e["gamma"],
        schedule,
        master_seed=e["master_seed"],
        tolerance=tolerance,
        config_id=config.config_id,
        exponent=e["theory_exponent"],
    )
    paths = write_rate_report(report, out)
    return report, list(paths.values())


def cmd_run_rates(config: ExperimentConfig) -> int:
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    report, artifacts = _rates(
        config, config.kernel(), config.target(), config.schedule(), out,
        config["experiment"]["tolerance"],
    )
    summary = report.summary()
    write_manifest(config, "run-rates", out, artifacts, summary)
    print(f"{config.config_id}: slope {report.fitted_slope:.4f}, "
          f"expected {-report.theory_exponent:.4f} +- {report.tolerance} -> "
          f"{'PASS' if report.passed else 'FAIL'}")
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_bias_check(config: ExperimentConfig) -> int:
    target = config.target()
    if not isinstance(target, TargetSpec):
        raise ConfigError(["bias-check needs a target with known coefficients"])
    gamma = config["experiment"]["gamma"]
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    rows, ok = [], True
    for lam in _lambda_grid(config["bias"]):
        lam = float(lam)
        bias = bias_oracle(target, lam, gamma)
        bound = target.B_bound**2 * lam ** (target.beta - gamma)
        ok &= bias <= bound * (1 + 1e-12)
        rows.append((lam, bias, bound))
    table = _write_table(out / "bias.csv", ["lambda", "bias", "bound"], rows)
    write_manifest(config, "bias-check", out, [table], {"pass": bool(ok)})
    print(f"bias <= B^2 lambda^(beta-gamma) on {len(rows)} values: {'PASS' if ok else 'FAIL'}")
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_edim(config: ExperimentConfig) -> int:
    model = config.spectral_model()
    p = config["spectral"]["p"]
    grid = _lambda_grid(config["edim"])
    D_hat, ok = certify_effective_dimension_bound(model, grid)
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for lam in grid:
        N = float(np.sum(model.mu / (model.mu + lam)))
        rows.append((float(lam), N, N * float(lam) ** p))
    table = _write_table(out / "edim.csv", ["lambda", "N", "N_lambda_p"], rows)
    write_manifest(config, "edim", out, [table], {"D_hat": D_hat, "pass": bool(ok)})
    print(f"sup N(lambda) lambda^p = {D_hat:.4g}: {'PASS' if ok else 'FAIL'}")
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_lower_bound_demo(config: ExperimentConfig) -> int:
    lb = config["lowerbound"]
    model = config.spectral_model()
    d_Y = config["target"]["d_Y"]
    rng = np.random.default_rng(lb["seed"])
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)

    violations = 0
    for _ in range(lb["trials"]):
        F = rng.standard_normal((model.I_max, d_Y)) * np.sqrt(model.mu)[:, None]
        a = rng.standard_normal(d_Y)
        gamma = rng.uniform(0.0, 1.0)
        violations += not check_reduction_inequality(F, a, gamma, model)
    # Rank-one F = f (x) a attains equality.
    f = rng.standard_normal(model.I_max) * np.sqrt(model.mu)
    a = rng.standard_normal(d_Y)
    lhs, rhs = reduction_sides(np.outer(f, a / np.linalg.norm(a)), a, 0.5, model)
    equality_ok = abs(lhs - rhs) <= EQUALITY_TOL * max(1.0, rhs)
    print(f"reduction inequality: {violations} violations in {lb['trials']} trials; "
          f"rank-one |lhs - rhs| = {abs(lhs - rhs):.2e}")

    rows, kl_ok = [], True
    print(f"{'pair':>4} {'sigma':>6} {'analytic':>12} {'monte carlo':>12} {'rel err':>8}")
    for k in range(lb["pairs"]):
        f, g = random_function_pair(model, rng)
        base = kl_scalar_joints(f, g, lb["sigmas"][0])
        for sigma in lb["sigmas"]:
            exact = kl_scalar_joints(f, g, sigma)
            mc = monte_carlo_kl(f, g, sigma, lb["n_mc"], seed=[lb["seed"], k])
            rel = abs(mc - exact) / exact
            # KL scales as sigma**-2; checked against the first sigma.
            scaled = base * (lb["sigmas"][0] / sigma) ** 2
            kl_ok &= rel <= KL_REL_TOL and abs(scaled - exact) <= 1e-12 * exact
            rows.append((k, float(sigma), exact, mc, rel))
            print(f"{k:>4} {sigma:>6.3g} {exact:>12.6g} {mc:>12.6g} {rel:>8.2%}")
    table = _write_table(out / "kl.csv", ["pair", "sigma", "kl_analytic", "kl_mc", "rel_err"], rows)
    ok = violations == 0 and equality_ok and kl_ok
    write_manifest(config, "lower-bound-demo", out, [table],
                   {"violations": violations, "equality": bool(equality_ok),
                    "kl": bool(kl_ok), "pass": bool(ok)})
    print("PASS" if ok else "FAIL")
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_sobolev_demo(config: ExperimentConfig) -> int:
    """Matern rate run; ``m = order + 1/2`` in dimension 1 gives ``p = 1/(2m)``."""
    k = config["kernel"]
    if k["family"] != "matern":
        raise ConfigError(["sobolev-demo needs kernel.family = matern"])
    if config["target"]["kind"] != "kernel-expansion":
        raise ConfigError(["sobolev-demo needs target.kind = kernel-expansion"])
    kernel = KernelSpec("matern", lengthscale=k["lengthscale"], order=k["order"])
    m = k["order"] + 0.5
    p = 1.0 / (2.0 * m)
    sob = config["sobolev"]
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng([config["experiment"]["master_seed"], sob["nystrom_m"]])
    mu_hat = nystrom_spectrum(kernel, rng.uniform(0.0, 1.0, sob["nystrom_m"]))
    p_hat = estimate_decay(mu_hat)
    p_ok = abs(p_hat - p) <= sob["p_tolerance"]
    spectrum = _write_table(out / "nystrom.csv", ["index", "eigenvalue"],
                            [(i + 1, float(v)) for i, v in enumerate(mu_hat)])

    s = config["schedule"]
    schedule = Schedule(p, s["alpha"], s["theta"], s["c0"], s["lambda"])
    report, artifacts = _rates(config, kernel, config.target(), schedule, out,
                               config["experiment"]["tolerance"])
    ok = report.passed and p_ok
    summary = dict(report.summary(), p=p, p_hat=p_hat, p_pass=bool(p_ok), pass_all=bool(ok))
    write_manifest(config, "sobolev-demo", out, artifacts + [spectrum], summary)
    print(f"Nystrom p_hat = {p_hat:.3f} (p = {p:.3f}); slope {report.fitted_slope:.4f}, "
          f"expected {-report.theory_exponent:.4f} +- {report.tolerance} -> "
          f"{'PASS' if ok else 'FAIL'}")
    return EXIT_PASS if ok else EXIT_FAIL


COMMANDS = {
    "run-rates": cmd_run_rates,
    "bias-check": cmd_bias_check,
    "edim": cmd_edim,
    "lower-bound-demo": cmd_lower_bound_demo,
    "sobolev-demo": cmd_sobolev_demo,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vvkrr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func in COMMANDS.items():
        p = sub.add_parser(name, help=(func.__doc__ or name).splitlines()[0])
        p.add_argument("config", nargs="?", help="configuration file (defaults apply if omitted)")
        p.add_argument("--seed", type=int, help="master seed (overrides experiment.master_seed)")
        p.add_argument("--output-dir", help="output directory (overrides experiment.output_dir)")
        p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                       help="override one configuration value; may be repeated")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {}
    try:
        for item in args.set:
            key, sep, value = item.partition("=")
            if not sep:
                raise ConfigError([f"--set {item!r} must look like section.key=value"])
            overrides[key.strip()] = value.strip()
        if args.seed is not None:
            overrides["experiment.master_seed"] = str(args.seed)
        if args.output_dir is not None:
            overrides["experiment.output_dir"] = args.output_dir
        if args.config:
            config = load_config(args.config, overrides)
        else:
            config = parse_config("", overrides)
        return COMMANDS[args.command](config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        where = f" ({exc.filename})" if exc.filename else ""
        print(f"error: {exc.strerror or exc}{where}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
