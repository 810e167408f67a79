"""Experiment configuration files.

The format is INI-style: ``[section]`` headers followed by ``key = value``
lines; ``#`` and ``;`` start comments and lists are comma separated. Every
key is optional. Unknown sections or keys are errors, and all range
violations are collected and reported together.

Sections and keys (defaults in parentheses)::

    [experiment] config_id (default), gamma (0), ns (64,...,4096), n_seeds (20),
                 tolerance (0.12), output_dir (runs/<config_id>), master_seed (0),
                 theory_exponent (derived from the schedule)
    [spectral]   I_max (512), p (0.5), scale (1), eigenvalues (none)
    [target]     beta (1), B (1), d_Y (4), kind (generic), seed (0), n_nodes (64)
    [noise]      kind (gaussian-iso), sigma (0.5)
    [kernel]     family (designed-mercer), lengthscale (1), order (0.5)
    [schedule]   alpha (p), theta (2), c0 (1), lambda (none: use the schedule)
    [bias]       lambda_min (1e-4), lambda_max (1), n_lambda (25)
    [edim]       lambda_min (1e-4), lambda_max (1), n_lambda (25)
    [lowerbound] trials (1000), pairs (10), sigmas (0.5,1,2), n_mc (100000), seed (0)
    [sobolev]    nystrom_m (2000), p_tolerance (0.15)

``lambda`` in ``[schedule]`` is the regularization of the averaged risk:
the linear system solved is ``(K + n lambda I) W = Y``.
"""

from __future__ import annotations

import configparser
import hashlib
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analysis import Schedule
from .kernel import FAMILIES, MATERN_ORDERS, KernelSpec
from .spectral import DEFAULT_I_MAX, SpectralModel
from .synth import NOISE_KINDS, TARGET_KINDS, NoiseSpec, make_kernel_target, make_target

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "load_config", "DEFAULT_NS"]

DEFAULT_NS = (64, 128, 256, 512, 1024, 2048, 4096)


class ConfigError(ValueError):
    """Invalid configuration; ``problems`` lists every diagnostic found."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.problems))


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _ints(text):
    return tuple(int(v) for v in text.split(",") if v.strip())


def _optional_float(text):
    return None if text.strip().lower() in ("", "none") else float(text)


# section -> key -> (converter, default)
SCHEMA = {
    "experiment": {
        "config_id": (str, "default"),
        "gamma": (float, 0.0),
        "ns": (_ints, DEFAULT_NS),
        "n_seeds": (int, 20),
        "tolerance": (float, 0.12),
        "output_dir": (str, None),
        "master_seed": (int, 0),
        "theory_exponent": (_optional_float, None),
    },
    "spectral": {
        "I_max": (int, DEFAULT_I_MAX),
        "p": (float, 0.5),
        "scale": (float, 1.0),
        "eigenvalues": (_floats, None),
    },
    "target": {
        "beta": (float, 1.0),
        "B": (float, 1.0),
        "d_Y": (int, 4),
        "kind": (str, "generic"),
        "seed": (int, 0),
        "n_nodes": (int, 64),
    },
    "noise": {
        "kind": (str, "gaussian-iso"),
        "sigma": (float, 0.5),
    },
    "kernel": {
        "family": (str, "designed-mercer"),
        "lengthscale": (float, 1.0),
        "order": (float, 0.5),
    },
    "schedule": {
        "alpha": (_optional_float, None),
        "theta": (float, 2.0),
        "c0": (float, 1.0),
        "lambda": (_optional_float, None),
    },
    "bias": {
        "lambda_min": (float, 1e-4),
        "lambda_max": (float, 1.0),
        "n_lambda": (int, 25),
    },
    "edim": {
        "lambda_min": (float, 1e-4),
        "lambda_max": (float, 1.0),
        "n_lambda": (int, 25),
    },
    "lowerbound": {
        "trials": (int, 1000),
        "pairs": (int, 10),
        "sigmas": (_floats, (0.5, 1.0, 2.0)),
        "n_mc": (int, 100_000),
        "seed": (int, 0),
    },
    "sobolev": {
        "nystrom_m": (int, 2000),
        "p_tolerance": (float, 0.15),
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated configuration; ``values[section][key]`` holds typed values."""

    values: dict
    text: str = ""

    def __getitem__(self, section):
        return self.values[section]

    @property
    def config_id(self) -> str:
        return self.values["experiment"]["config_id"]

    @property
    def output_dir(self) -> Path:
        out = self.values["experiment"]["output_dir"]
        return Path(out) if out else Path("runs") / self.config_id

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()

    def canonical_text(self) -> str:
        lines = []
        for section, keys in self.values.items():
            lines.append(f"[{section}]")
            for key, value in keys.items():
                if isinstance(value, tuple):
                    value = ",".join(repr(v) for v in value)
                lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"

    # builders

    def spectral_model(self) -> SpectralModel:
        s = self.values["spectral"]
        if s["eigenvalues"] is not None:
            return SpectralModel(np.array(s["eigenvalues"]), decay_p=s["p"])
        return SpectralModel.from_decay(s["p"], s["I_max"], s["scale"])

    def kernel(self) -> KernelSpec:
        k = self.values["kernel"]
        if k["family"] == "designed-mercer":
            return KernelSpec.designed(self.spectral_model())
        return KernelSpec(k["family"], lengthscale=k["lengthscale"], order=k["order"])

    def target(self):
        t = self.values["target"]
        if t["kind"] == "kernel-expansion":
            return make_kernel_target(self.kernel(), t["B"], t["d_Y"], t["n_nodes"], t["seed"])
        return make_target(self.spectral_model(), t["beta"], t["B"], t["d_Y"], t["kind"], t["seed"])

    def noise(self) -> NoiseSpec:
        n = self.values["noise"]
        return NoiseSpec(n["kind"], n["sigma"], self.values["target"]["d_Y"])

    def schedule(self) -> Schedule:
        s = self.values["schedule"]
        return Schedule(self.values["spectral"]["p"], s["alpha"], s["theta"], s["c0"], s["lambda"])


def _line_numbers(text: str) -> dict:
    """Map ``(section, key)`` to the 1-based line where the key is set."""
    where = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        m = re.match(r"\[([^\]]+)\]", stripped)
        if m:
            section = m.group(1).strip()
            continue
        m = re.match(r"([^=:#;\s][^=:]*?)\s*[=:]", stripped)
        if m and section is not None:
            where[(section, m.group(1).strip())] = lineno
    return where


def _validate(v: dict, problems: list, where):
    def bad(section, key, msg):
        line = where.get((section, key))
        loc = f"line {line}: " if line else ""
        problems.append(f"{loc}{section}.{key} {msg}")

    e, s, t, n, k, sch = (v[x] for x in ("experiment", "spectral", "target", "noise", "kernel", "schedule"))
    if not 0 < t["beta"] <= 2:
        bad("target", "beta", f"= {t['beta']} outside admissible range (0, 2]")
    if not 0 <= e["gamma"] <= 1:
        bad("experiment", "gamma", f"= {e['gamma']} outside [0, 1]")
    elif not e["gamma"] < t["beta"]:
        bad("experiment", "gamma", f"= {e['gamma']} must be smaller than beta = {t['beta']}")
    if not 0 < s["p"] <= 1:
        bad("spectral", "p", f"= {s['p']} outside (0, 1]")
    if s["I_max"] < 1:
        bad("spectral", "I_max", "must be positive")
    if not s["scale"] > 0:
        bad("spectral", "scale", "must be positive")
    if s["eigenvalues"] is not None:
        mu = np.array(s["eigenvalues"])
        if mu.size == 0 or np.any(mu <= 0) or np.any(np.diff(mu) > 0):
            bad("spectral", "eigenvalues", "must be positive and nonincreasing")
    if sch["alpha"] is not None and not s["p"] <= sch["alpha"] <= 1:
        bad("schedule", "alpha", f"= {sch['alpha']} outside [p, 1]")
    if not sch["theta"] > 1:
        bad("schedule", "theta", "must exceed 1")
    if not sch["c0"] > 0:
        bad("schedule", "c0", "must be positive")
    if sch["lambda"] is not None and not sch["lambda"] > 0:
        bad("schedule", "lambda", "must be positive")
    ns = e["ns"]
    if len(ns) < 4 or any(b <= a for a, b in zip(ns, ns[1:])) or min(ns, default=0) < 2:
        bad("experiment", "ns", "must list at least 4 strictly increasing sample sizes >= 2")
    if e["n_seeds"] < 1:
        bad("experiment", "n_seeds", "must be positive")
    if not e["tolerance"] > 0:
        bad("experiment", "tolerance", "must be positive")
    if t["d_Y"] < 1:
        bad("target", "d_Y", "must be positive")
    if not t["B"] > 0:
        bad("target", "B", "must be positive")
    if t["kind"] not in TARGET_KINDS + ("kernel-expansion",):
        bad("target", "kind", f"= {t['kind']!r} not one of {TARGET_KINDS + ('kernel-expansion',)}")
    if n["kind"] not in NOISE_KINDS:
        bad("noise", "kind", f"= {n['kind']!r} not one of {NOISE_KINDS}")
    if n["sigma"] < 0:
        bad("noise", "sigma", "must be nonnegative")
    if k["family"] not in FAMILIES:
        bad("kernel", "family", f"= {k['family']!r} not one of {FAMILIES}")
    if not k["lengthscale"] > 0:
        bad("kernel", "lengthscale", "must be positive")
    if k["family"] == "matern" and k["order"] not in MATERN_ORDERS:
        bad("kernel", "order", f"= {k['order']} not one of {MATERN_ORDERS}")
    if t["kind"] == "kernel-expansion" and k["family"] == "designed-mercer":
        bad("target", "kind", "kernel-expansion targets need a non-designed kernel")
    if t["kind"] != "kernel-expansion" and k["family"] != "designed-mercer":
        bad("target", "kind", f"{t['kind']!r} targets need the designed-mercer kernel")
    for sec in ("bias", "edim"):
        g = v[sec]
        if not 0 < g["lambda_min"] < g["lambda_max"] <= 1:
            bad(sec, "lambda_min", "need 0 < lambda_min < lambda_max <= 1")
        if g["n_lambda"] < 2:
            bad(sec, "n_lambda", "must be at least 2")
    lb = v["lowerbound"]
    if lb["trials"] < 1 or lb["pairs"] < 1 or lb["n_mc"] < 1:
        bad("lowerbound", "trials", "trials, pairs and n_mc must be positive")
    if not lb["sigmas"] or min(lb["sigmas"]) <= 0:
        bad("lowerbound", "sigmas", "must be positive")
    if v["sobolev"]["nystrom_m"] < 2:
        bad("sobolev", "nystrom_m", "must be at least 2")


def parse_config(text: str, overrides: dict | None = None) -> ExperimentConfig:
    """Parse and validate configuration text.

    ``overrides`` maps ``"section.key"`` to a string value and takes
    precedence over the file. Raises :class:`ConfigError` listing every
    problem found.
    """
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";"), empty_lines_in_values=False
    )
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"parse error: {exc}"]) from exc

    raw = {section: dict(parser[section]) for section in parser.sections()}
    for dotted, value in (overrides or {}).items():
        section, sep, key = dotted.partition(".")
        if not sep:
            raise ConfigError([f"override {dotted!r} must look like section.key"])
        raw.setdefault(section, {})[key] = value

    where = _line_numbers(text)
    problems = []
    values = {}
    for section in raw:
        if section not in SCHEMA:
            problems.append(f"unknown section [{section}]")
    for section, keys in SCHEMA.items():
        given = raw.get(section, {})
        for key in given:
            if key not in keys:
                line = where.get((section, key))
                problems.append(f"{f'line {line}: ' if line else ''}unknown key {section}.{key}")
        values[section] = {}
        for key, (convert, default) in keys.items():
            if key in given:
                try:
                    values[section][key] = convert(given[key])
                except ValueError:
                    line = where.get((section, key))
                    problems.append(
                        f"{f'line {line}: ' if line else ''}{section}.{key} = {given[key]!r} "
                        f"is not a valid {getattr(convert, '__name__', 'value')}"
                    )
                    values[section][key] = default
            else:
                values[section][key] = default
    if not problems:
        _validate(values, problems, where)
    if problems:
        raise ConfigError(problems)
    return ExperimentConfig(values, text)


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    return parse_config(Path(path).read_text(), overrides)
