"""Regularized least squares with the operator-valued kernel ``k(x, x') Id``.

The estimate is ``F(x) = W^T k_X(x)`` where the dual weights solve

    (K + n lam I) W = Y.

Note the ``n lam`` scaling: ``lam`` is the regularization of the averaged
empirical risk, not of the summed one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .kernel import (
    KernelSpec,
    OutputFactorSpec,
    apply_output_factor_sqrt,
    cross_matrix,
    gram_matrix,
)
from .spectral import SpectralModel, cosine_basis

__all__ = [
    "Dataset",
    "FittedModel",
    "fit",
    "predict",
    "fit_with_output_factor",
    "feature_ridge_oracle",
    "save_model",
    "load_model",
]

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Dataset:
    """Covariates ``x`` of shape ``(n,)`` and responses ``y`` of shape ``(n, d_Y)``."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float, copy=True).reshape(-1)
        y = np.array(self.y, dtype=float, copy=True)
        if y.ndim == 1:
            y = y[:, None]
        if x.size < 1:
            raise ValueError("a dataset needs at least one sample")
        if y.ndim != 2 or y.shape[0] != x.shape[0]:
            raise ValueError(f"y must have shape (n, d_Y) with n={x.shape[0]}, got {y.shape}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("dataset contains non-finite entries")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d_Y(self) -> int:
        return self.y.shape[1]


@dataclass(frozen=True)
class FittedModel:
    kernel: KernelSpec
    train_x: np.ndarray
    weights: np.ndarray
    lam: float
    output_factor: OutputFactorSpec | None = None
    residual: float = field(default=0.0, compare=False)

    @property
    def d_Y(self) -> int:
        return self.weights.shape[1]


def _check_domain(kernel: KernelSpec, x: np.ndarray):
    if kernel.family == "designed-mercer" and np.any((x < 0) | (x > 1)):
        raise ValueError("designed-mercer inputs must lie in [0, 1]")


def fit(kernel: KernelSpec, data: Dataset, lam: float) -> FittedModel:
    """Solve ``(K + n lam I) W = Y`` by a Cholesky factorization.

    All output channels share one factorization. One step of iterative
    refinement is taken if the residual exceeds
    ``1e-8 (kappa^2 + n lam) max|Y|``.
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    _check_domain(kernel, data.x)
    n = data.n
    K = gram_matrix(kernel, data.x)
    A = K + n * lam * np.eye(n)
    try:
        factor = cho_factor(A, lower=True, check_finite=True)
    except LinAlgError as exc:
        raise RuntimeError("Cholesky factorization of K + n*lam*I failed") from exc
    Y = data.y
    W = cho_solve(factor, Y)
    tol = 1e-8 * (kernel.kappa2 + n * lam) * max(np.max(np.abs(Y)), np.finfo(float).tiny)
    resid = A @ W - Y
    if np.max(np.abs(resid)) > tol:
        W = W - cho_solve(factor, resid)
        resid = A @ W - Y
    residual = float(np.max(np.abs(resid)))
    if not np.isfinite(residual) or residual > tol:
        raise RuntimeError(f"linear solve residual {residual:.3e} exceeds {tol:.3e}")
    # A fixed memory layout keeps predictions bitwise reproducible after reloading.
    W = np.ascontiguousarray(W)
    W.setflags(write=False)
    return FittedModel(kernel, data.x, W, float(lam), residual=residual)


def predict(model: FittedModel, x) -> np.ndarray:
    """Evaluate the estimate. A scalar ``x`` gives ``(d_Y,)``, an array ``(m, d_Y)``."""
    scalar = np.ndim(x) == 0
    pts = np.atleast_1d(np.asarray(x, dtype=float))
    _check_domain(model.kernel, pts)
    out = cross_matrix(model.kernel, pts, model.train_x) @ model.weights
    return out[0] if scalar else out


def fit_with_output_factor(
    kernel: KernelSpec, B: OutputFactorSpec, data: Dataset, lam: float
) -> FittedModel:
    """Fit with the kernel ``k(x, x') B`` by transforming responses to ``B**(1/2) y``.

    The returned model predicts ``B**(1/2) F``; ``model.output_factor`` records
    the transformation.
    """
    if B.kind == "identity":
        transformed = data
    else:
        transformed = Dataset(data.x, apply_output_factor_sqrt(B, data.y))
    model = fit(kernel, transformed, lam)
    return FittedModel(
        model.kernel, model.train_x, model.weights, model.lam, B, residual=model.residual
    )


def feature_ridge_oracle(model_spec: SpectralModel, data: Dataset, lam: float) -> np.ndarray:
    """Ridge regression solved directly in the finite feature space.

    Features are ``phi_i(x) = sqrt(mu_i) e_i(x)``. The operator ``C`` minimizing
    ``(1/n) sum ||y_t - C phi(x_t)||^2 + lam ||C||^2`` comes from the
    ``I_max x I_max`` normal equations; the returned array holds the L2
    coefficients ``sqrt(mu_i) C^T[i, j]`` of ``C phi(.)``.
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    sqrt_mu = np.sqrt(model_spec.mu)
    Phi = cosine_basis(data.x, model_spec.I_max) * sqrt_mu
    n = data.n
    G = Phi.T @ Phi / n + lam * np.eye(model_spec.I_max)
    rhs = Phi.T @ data.y / n
    Ct = cho_solve(cho_factor(G, lower=True), rhs)
    return sqrt_mu[:, None] * Ct


def save_model(model: FittedModel, path) -> Path:
    """Write a fitted model to a versioned ``.npz`` archive."""
    path = Path(path)
    meta = {
        "format_version": MODEL_FORMAT_VERSION,
        "lam": model.lam,
        "kernel": model.kernel.to_dict(),
        "output_factor": None,
    }
    arrays = {"train_x": model.train_x, "weights": model.weights}
    if model.output_factor is not None:
        meta["output_factor"] = model.output_factor.kind
        if model.output_factor.entries is not None:
            arrays["output_factor_entries"] = model.output_factor.entries
    with open(path, "wb") as fh:
        np.savez(fh, meta=np.array(json.dumps(meta, sort_keys=True)), **arrays)
    return path


def load_model(path) -> FittedModel:
    with np.load(path, allow_pickle=False) as archive:
        meta = json.loads(str(archive["meta"]))
        if meta.get("format_version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {meta.get('format_version')}")
        factor = None
        if meta["output_factor"] is not None:
            entries = archive["output_factor_entries"] if "output_factor_entries" in archive else None
            factor = OutputFactorSpec(meta["output_factor"], entries)
        weights = np.ascontiguousarray(archive["weights"])
        weights.setflags(write=False)
        return FittedModel(
            KernelSpec.from_dict(meta["kernel"]),
            np.ascontiguousarray(archive["train_x"]),
            weights,
            float(meta["lam"]),
            factor,
        )
