"""Synthetic regression problems with certified smoothness and noise moments."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .estimator import Dataset
from .kernel import KernelSpec, cross_matrix, gram_matrix
from .spectral import SpectralModel, evaluate_coefficients, gamma_norm

__all__ = [
    "TargetSpec",
    "KernelExpansionTarget",
    "NoiseSpec",
    "MomCertificate",
    "make_target",
    "make_kernel_target",
    "eval_target",
    "sample_noise",
    "sample_dataset",
    "certify_mom",
    "write_dataset_csv",
    "read_dataset_csv",
]

TARGET_KINDS = ("generic", "boundary", "single-channel")
NOISE_KINDS = ("gaussian-iso", "bounded-sphere", "rank-one-gaussian")

# Coefficient profile i**-0.55: square summable, yet close to the smoothness boundary.
COEFF_DECAY = 0.55
BOUNDARY_SLACK = 0.2


@dataclass(frozen=True)
class TargetSpec:
    """Regression function given by L2 coefficients ``c`` over a spectral model.

    ``beta`` and ``B_bound`` are certified: ``gamma_norm(model, c, beta) <=
    B_bound``. For boundary targets ``boundary_ratio`` records
    ``gamma_norm(c, beta + 0.2) / B_bound``.
    """

    model: SpectralModel
    c: np.ndarray
    beta: float
    B_bound: float
    kind: str = "generic"
    boundary_ratio: float | None = None

    def __post_init__(self):
        c = np.array(self.c, dtype=float, copy=True)
        if c.ndim == 1:
            c = c[:, None]
        if c.shape[0] != self.model.I_max:
            raise ValueError("coefficient rows must match the model's I_max")
        if not np.all(np.isfinite(c)):
            raise ValueError("target coefficients must be finite")
        norm = gamma_norm(self.model, c, self.beta)
        if norm > self.B_bound * (1 + 1e-12):
            raise ValueError(f"source condition violated: ||F||_beta = {norm} > {self.B_bound}")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @property
    def d_Y(self) -> int:
        return self.c.shape[1]

    def evaluate(self, x) -> np.ndarray:
        return evaluate_coefficients(self.c, x)


@dataclass(frozen=True)
class KernelExpansionTarget:
    """``F(x) = sum_k w_k k(z_k, x)`` for a black-box kernel.

    Such an ``F`` lies in the vector-valued RKHS with norm
    ``sqrt(tr(W^T K_zz W))``, so the source condition holds with ``beta = 1``.
    """

    kernel: KernelSpec
    nodes: np.ndarray
    weights: np.ndarray
    B_bound: float
    beta: float = 1.0

    @property
    def d_Y(self) -> int:
        return self.weights.shape[1]

    def evaluate(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return cross_matrix(self.kernel, x, self.nodes) @ self.weights

    def rkhs_norm(self) -> float:
        K = gram_matrix(self.kernel, self.nodes)
        return float(np.sqrt(max(np.sum(self.weights * (K @ self.weights)), 0.0)))


@dataclass(frozen=True)
class NoiseSpec:
    """Additive noise. ``sigma`` is the total scale: ``E||eps||^2 = sigma^2``."""

    kind: str
    sigma: float
    d_Y: int
    direction: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}; expected one of {NOISE_KINDS}")
        if self.sigma < 0:
            raise ValueError("noise scale must be nonnegative")
        if self.d_Y < 1:
            raise ValueError("d_Y must be positive")
        if self.kind == "rank-one-gaussian":
            if self.direction is None:
                direction = np.zeros(self.d_Y)
                direction[0] = 1.0
            else:
                direction = np.array(self.direction, dtype=float).reshape(-1)
                if direction.shape != (self.d_Y,):
                    raise ValueError("direction must have length d_Y")
                if abs(np.linalg.norm(direction) - 1.0) > 1e-12:
                    raise ValueError("direction must be a unit vector")
            direction.setflags(write=False)
            object.__setattr__(self, "direction", direction)


def _coefficient_profile(I_max: int, d_Y: int, kind: str, rng) -> np.ndarray:
    i = np.arange(1, I_max + 1, dtype=float)
    signs_i = rng.choice([-1.0, 1.0], size=(I_max, d_Y))
    a = np.zeros((I_max, d_Y))
    if kind == "generic":
        j = np.arange(1, d_Y + 1, dtype=float)
        a = signs_i * np.outer(i**-COEFF_DECAY, j**-COEFF_DECAY)
    else:
        a[:, 0] = signs_i[:, 0] * i**-COEFF_DECAY
    return a


def make_target(
    model: SpectralModel,
    beta: float,
    B: float,
    d_Y: int,
    kind: str = "generic",
    seed: int = 0,
) -> TargetSpec:
    """Build ``F = sum_ij a_ij mu_i**(beta/2) d_j e_i`` with ``||a||_2 = B``.

    ``generic`` spreads mass over all channels with profile ``i**-0.55 j**-0.55``
    and random signs. ``single-channel`` and ``boundary`` put the profile
    ``+-i**-0.55`` on channel 1 only; ``boundary`` additionally certifies that
    the target is no smoother than ``beta``: the series for
    ``||F||_{beta+0.2}^2`` has terms of order ``i**(-1.1 + 0.2/p) >= 1/i`` and
    therefore diverges with ``I_max``, and the finite-truncation ratio
    ``||F||_{beta+0.2} / B`` must exceed 1.
    """
    if not 0 < beta <= 2:
        raise ValueError(f"beta must lie in (0, 2], got {beta}")
    if not B > 0:
        raise ValueError("B must be positive")
    if d_Y < 1:
        raise ValueError("d_Y must be positive")
    if kind not in TARGET_KINDS:
        raise ValueError(f"unknown target kind {kind!r}; expected one of {TARGET_KINDS}")
    rng = np.random.default_rng(seed)
    a = _coefficient_profile(model.I_max, d_Y, kind, rng)
    a *= B / np.linalg.norm(a)
    c = a * model.mu[:, None] ** (beta / 2)
    ratio = None
    if kind == "boundary":
        ratio = gamma_norm(model, c, beta + BOUNDARY_SLACK) / B
        if model.decay_p is not None:
            term_exponent = -2 * COEFF_DECAY + BOUNDARY_SLACK / model.decay_p
            if term_exponent < -1:
                raise ValueError("boundary target would be smoother than beta + 0.2")
        if not ratio > 1:
            raise ValueError(f"boundary certificate failed: ratio {ratio:.3f} <= 1")
    # TargetSpec re-checks the source condition on construction.
    return TargetSpec(model, c, float(beta), float(B), kind, ratio)


def make_kernel_target(
    kernel: KernelSpec, B: float, d_Y: int, n_nodes: int = 64, seed: int = 0
) -> KernelExpansionTarget:
    """Random kernel expansion over ``n_nodes`` equispaced nodes, RKHS norm ``B``."""
    rng = np.random.default_rng(seed)
    nodes = np.linspace(0.0, 1.0, n_nodes)
    W = rng.standard_normal((n_nodes, d_Y))
    K = gram_matrix(kernel, nodes)
    W *= B / np.sqrt(np.sum(W * (K @ W)))
    nodes.setflags(write=False)
    W.setflags(write=False)
    return KernelExpansionTarget(kernel, nodes, W, float(B))


def eval_target(spec, x) -> np.ndarray:
    """``F(x)``: shape ``(d_Y,)`` for a scalar ``x``, ``(m, d_Y)`` otherwise."""
    scalar = np.ndim(x) == 0
    pts = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any((pts < 0) | (pts > 1)):
        raise ValueError("targets are defined on [0, 1]")
    out = spec.evaluate(pts)
    return out[0] if scalar else out


def sample_noise(noise: NoiseSpec, n: int, rng) -> np.ndarray:
    d = noise.d_Y
    if noise.kind == "gaussian-iso":
        return rng.standard_normal((n, d)) * (noise.sigma / np.sqrt(d))
    if noise.kind == "bounded-sphere":
        g = rng.standard_normal((n, d))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
        # Zero rows have probability zero; the guard keeps the sphere radius exact.
        g[norms[:, 0] == 0, 0] = 1.0
        norms = np.linalg.norm(g, axis=1, keepdims=True)
        return noise.sigma * g / norms
    z = rng.standard_normal(n)
    return noise.sigma * z[:, None] * noise.direction[None, :]


def sample_dataset(spec, noise: NoiseSpec, n: int, seed) -> Dataset:
    """Draw ``x`` uniform on [0, 1] and ``y = F(x) + eps``.

    ``seed`` may be an integer, a ``SeedSequence`` or a ``Generator``. The
    covariates are drawn before the noise, so equal seeds give equal ``x``
    whatever the output dimension.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if noise.d_Y != spec.d_Y:
        raise ValueError("noise and target output dimensions differ")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    x = rng.uniform(0.0, 1.0, n)
    y = spec.evaluate(x)
    if noise.sigma > 0:
        y = y + sample_noise(noise, n, rng)
    return Dataset(x, y)


class MomCertificate(NamedTuple):
    sigma: float
    R: float
    passed: bool


def certify_mom(noise: NoiseSpec, q_max: int = 8, n_mc: int = 1_000_000, seed: int = 0):
    """Certify the Bernstein moment condition ``E||eps||^q <= q!/2 sigma^2 R^(q-2)``.

    Bounded noise with ``||eps|| <= sigma_bar`` gets ``sigma = R = 2 sigma_bar``.
    Gaussian noise gets ``sigma = R = sigma_bar``: with ``||eps|| <= sigma_bar |Z|``
    in moments, ``E|Z|^q = 2^(q/2) Gamma((q+1)/2) / sqrt(pi) <= q!/2`` for
    every ``q >= 2``. The certificate is then checked by Monte Carlo for
    ``q = 2..q_max`` with a slack factor of 1.1.
    """
    if q_max < 2:
        raise ValueError("q_max must be at least 2")
    if noise.kind == "bounded-sphere":
        sigma = R = 2.0 * noise.sigma
    else:
        sigma = R = noise.sigma
    rng = np.random.default_rng(seed)
    norms = np.linalg.norm(sample_noise(noise, n_mc, rng), axis=1)
    passed = True
    for q in range(2, q_max + 1):
        moment = float(np.mean(norms**q))
        bound = 0.5 * math.factorial(q) * sigma**2 * R ** (q - 2)
        passed &= moment <= 1.1 * bound
    return MomCertificate(float(sigma), float(R), bool(passed))


def write_dataset_csv(data: Dataset, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x"] + [f"y{j + 1}" for j in range(data.d_Y)])
        for x, row in zip(data.x, data.y):
            writer.writerow([repr(float(x))] + [repr(float(v)) for v in row])


def read_dataset_csv(path) -> Dataset:
    arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return Dataset(arr[:, 0], arr[:, 1:])
