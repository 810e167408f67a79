"""Scalar kernels on the real line and the output factor of ``k(x, x') B``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import SpectralModel

__all__ = [
    "KernelSpec",
    "OutputFactorSpec",
    "eval_scalar",
    "matern_half_integer",
    "gram_matrix",
    "cross_matrix",
    "cross_vector",
    "apply_output_factor_sqrt",
]

FAMILIES = ("designed-mercer", "gaussian", "laplacian", "matern")
MATERN_ORDERS = (0.5, 1.5, 2.5)


@dataclass(frozen=True)
class KernelSpec:
    """An immutable description of a scalar kernel.

    ``lengthscale`` applies to the gaussian, laplacian and matern families,
    ``order`` to matern only and ``model`` to designed-mercer only.
    """

    family: str
    lengthscale: float = 1.0
    order: float = 0.5
    model: SpectralModel | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        if self.family == "designed-mercer":
            if self.model is None:
                raise ValueError("designed-mercer kernel needs a SpectralModel")
        elif not self.lengthscale > 0:
            raise ValueError(f"lengthscale must be positive, got {self.lengthscale}")
        if self.family == "matern" and float(self.order) not in MATERN_ORDERS:
            raise ValueError(f"unsupported Matern order {self.order}; use one of {MATERN_ORDERS}")

    @classmethod
    def designed(cls, model: SpectralModel) -> "KernelSpec":
        return cls("designed-mercer", model=model)

    @property
    def kappa2(self) -> float:
        if self.family == "designed-mercer":
            return self.model.kappa2
        return 1.0

    def to_dict(self) -> dict:
        out = {"family": self.family}
        if self.family == "designed-mercer":
            out["model"] = self.model.to_text()
        else:
            out["lengthscale"] = self.lengthscale
            if self.family == "matern":
                out["order"] = float(self.order)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSpec":
        if d["family"] == "designed-mercer":
            return cls.designed(SpectralModel.from_text(d["model"]))
        return cls(d["family"], lengthscale=float(d.get("lengthscale", 1.0)),
                   order=float(d.get("order", 0.5)))


def matern_half_integer(nu: float, r):
    """Matern correlation at distance ``r`` for half-integer ``nu``.

    The distance is scaled by ``sqrt(2 nu)`` so that, for ``nu = m - 1/2``,
    this is the order-``m`` Matern kernel on the real line with ``k(0) = 1``.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("distance must be nonnegative")
    nu = float(nu)
    if nu == 0.5:
        return np.exp(-r)
    if nu == 1.5:
        s = np.sqrt(3.0) * r
        return (1.0 + s) * np.exp(-s)
    if nu == 2.5:
        s = np.sqrt(5.0) * r
        return (1.0 + s + s**2 / 3.0) * np.exp(-s)
    raise ValueError(f"unsupported Matern order {nu}; use one of {MATERN_ORDERS}")


def _as_points(x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1:
        raise ValueError("points must be a 1-d array of reals")
    if not np.all(np.isfinite(x)):
        raise ValueError("points must be finite")
    return x


def cross_matrix(spec: KernelSpec, x, y) -> np.ndarray:
    """Kernel values ``k(x_i, y_j)`` for all pairs, shape ``(len(x), len(y))``."""
    x = _as_points(x)
    y = _as_points(y)
    if spec.family == "designed-mercer":
        return spec.model.kernel_matrix(x, y)
    r = np.abs(x[:, None] - y[None, :]) / spec.lengthscale
    if spec.family == "gaussian":
        return np.exp(-0.5 * r**2)
    if spec.family == "laplacian":
        return np.exp(-r)
    return matern_half_integer(spec.order, r)


def eval_scalar(spec: KernelSpec, x: float, x_prime: float) -> float:
    return float(cross_matrix(spec, [x], [x_prime])[0, 0])


def gram_matrix(spec: KernelSpec, points) -> np.ndarray:
    """Gram matrix of ``points``, exactly symmetric.

    The upper triangle is kept and mirrored so that ``K == K.T`` bitwise.
    """
    points = _as_points(points)
    if points.size == 0:
        raise ValueError("gram_matrix needs at least one point")
    K = cross_matrix(spec, points, points)
    upper = np.triu(K)
    return upper + np.triu(K, 1).T


def cross_vector(spec: KernelSpec, points, x: float) -> np.ndarray:
    return cross_matrix(spec, points, [x])[:, 0]


@dataclass(frozen=True)
class OutputFactorSpec:
    """The positive-semidefinite output operator ``B`` of ``k(x, x') B``.

    ``kind`` is ``"identity"``, ``"diagonal"`` (``entries`` is a vector) or
    ``"dense"`` (``entries`` is a symmetric matrix).
    """

    kind: str = "identity"
    entries: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "identity":
            return
        if self.entries is None:
            raise ValueError(f"{self.kind} output factor needs entries")
        entries = np.array(self.entries, dtype=float, copy=True)
        if self.kind == "diagonal":
            if entries.ndim != 1 or np.any(entries < 0):
                raise ValueError("diagonal output factor needs a nonnegative vector")
        elif self.kind == "dense":
            if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
                raise ValueError("dense output factor must be a square matrix")
            entries = 0.5 * (entries + entries.T)
            if np.linalg.eigvalsh(entries).min() < -1e-10:
                raise ValueError("dense output factor is not positive semidefinite")
        else:
            raise ValueError(f"unknown output factor kind {self.kind!r}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int | None:
        return None if self.kind == "identity" else self.entries.shape[0]

    def matrix(self, d: int | None = None) -> np.ndarray:
        if self.kind == "identity":
            if d is None:
                raise ValueError("identity factor needs an explicit dimension")
            return np.eye(d)
        if self.kind == "diagonal":
            return np.diag(self.entries)
        return self.entries.copy()

    def sqrt_matrix(self, d: int | None = None) -> np.ndarray:
        """The unique PSD square root of ``B``."""
        if self.kind == "identity":
            return self.matrix(d)
        if self.kind == "diagonal":
            return np.diag(np.sqrt(self.entries))
        w, v = np.linalg.eigh(self.entries)
        # Eigenvalues at roundoff level are zeros of B; their square roots
        # (about 1e-8) would otherwise leak into the null space.
        w[w <= w.size * np.finfo(float).eps * max(w.max(), 0.0)] = 0.0
        return (v * np.sqrt(w)) @ v.T


def apply_output_factor_sqrt(spec: OutputFactorSpec, y) -> np.ndarray:
    """Return ``B**(1/2) y``; rows of a 2-d ``y`` are transformed independently."""
    y = np.asarray(y, dtype=float)
    d = y.shape[-1]
    if spec.kind == "identity":
        return y.copy()
    if spec.dim != d:
        raise ValueError(f"output dimension {d} does not match factor dimension {spec.dim}")
    if spec.kind == "diagonal":
        return y * np.sqrt(spec.entries)
    return y @ spec.sqrt_matrix().T
