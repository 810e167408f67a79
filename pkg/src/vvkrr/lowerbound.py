"""Building blocks of the minimax lower bound.

A vector-valued problem is projected onto a direction ``a`` to give a scalar
problem; Gaussian conditionals with rank-one covariance along ``d_1`` realize
the scalar family in the output space, and the KL divergence between two such
joints is a scaled L2 distance of their regression functions.

The packing family of functions used to finish the argument is not built
here; only the verified pieces are.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import SpectralModel, evaluate_coefficients, gamma_norm

__all__ = [
    "ScalarFunctionCoeffs",
    "project_function",
    "reduction_sides",
    "check_reduction_inequality",
    "gaussian_conditional_sample",
    "sample_scalar_joint",
    "kl_scalar_joints",
    "monte_carlo_kl",
    "random_function_pair",
]


@dataclass(frozen=True)
class ScalarFunctionCoeffs:
    """A scalar function ``f = sum_i c_i e_i`` over a spectral model."""

    model: SpectralModel | None
    c: np.ndarray

    def __post_init__(self):
        c = np.array(self.c, dtype=float, copy=True).reshape(-1)
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        if self.model is not None and c.shape[0] != self.model.I_max:
            raise ValueError("coefficient length must match the model's I_max")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    def __call__(self, x) -> np.ndarray:
        return evaluate_coefficients(self.c, x)


def project_function(F, a, model: SpectralModel | None = None) -> ScalarFunctionCoeffs:
    """Coefficients of ``x -> <F(x), a>``, i.e. ``c_i = sum_j F[i, j] a_j``."""
    F = np.asarray(F, dtype=float)
    a = np.asarray(a, dtype=float).reshape(-1)
    if F.ndim != 2 or F.shape[1] != a.shape[0]:
        raise ValueError(f"direction of length {a.shape[0]} does not match F of shape {F.shape}")
    return ScalarFunctionCoeffs(model, F @ a)


def reduction_sides(F, a, gamma: float, model: SpectralModel) -> tuple[float, float]:
    """``(||<F, a>||_gamma, ||a|| ||F||_gamma)``."""
    f = project_function(F, a, model)
    lhs = gamma_norm(model, f.c, gamma)
    rhs = float(np.linalg.norm(a)) * gamma_norm(model, F, gamma)
    return lhs, rhs


def check_reduction_inequality(F, a, gamma: float, model: SpectralModel) -> bool:
    lhs, rhs = reduction_sides(F, a, gamma, model)
    return lhs <= rhs * (1 + 1e-10)


def gaussian_conditional_sample(f: ScalarFunctionCoeffs, x: float, sigma: float, d_Y: int,
                                seed) -> np.ndarray:
    """One draw from ``N(f(x) d_1, sigma^2 d_1 (x) d_1)`` in ``R^d_Y``."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    out = np.zeros(d_Y)
    out[0] = float(f(x)[0]) + sigma * rng.standard_normal()
    return out


def sample_scalar_joint(f: ScalarFunctionCoeffs, sigma: float, n: int, rng):
    """``n`` pairs ``(x, y)`` with ``x`` uniform and ``y | x ~ N(f(x), sigma^2)``."""
    x = rng.uniform(0.0, 1.0, n)
    return x, f(x) + sigma * rng.standard_normal(n)


def kl_scalar_joints(f: ScalarFunctionCoeffs, g: ScalarFunctionCoeffs, sigma: float) -> float:
    """``KL(P_f, P_g) = ||f - g||^2_{L2} / (2 sigma^2)`` by Parseval."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if f.model != g.model or f.c.shape != g.c.shape:
        raise ValueError("functions live over different spectral models")
    return float(np.sum((f.c - g.c) ** 2) / (2.0 * sigma**2))


def monte_carlo_kl(f: ScalarFunctionCoeffs, g: ScalarFunctionCoeffs, sigma: float,
                   n: int = 100_000, seed=0) -> float:
    """Estimate ``E_{P_f} log(p_f / p_g)`` from the Gaussian log-density ratio."""
    rng = np.random.default_rng(seed)
    x, y = sample_scalar_joint(f, sigma, n, rng)
    log_ratio = ((y - g(x)) ** 2 - (y - f(x)) ** 2) / (2.0 * sigma**2)
    return float(np.mean(log_ratio))


def random_function_pair(model: SpectralModel, rng) -> tuple[ScalarFunctionCoeffs, ScalarFunctionCoeffs]:
    """Two random functions with coefficients ``z_i sqrt(mu_i)``, each of unit L2 norm."""
    pair = []
    for _ in range(2):
        c = rng.standard_normal(model.I_max) * np.sqrt(model.mu)
        pair.append(ScalarFunctionCoeffs(model, c / np.linalg.norm(c)))
    return pair[0], pair[1]
