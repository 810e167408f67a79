"""Designed Mercer spectra on [0, 1] and the quantities derived from them.

A :class:`SpectralModel` fixes the eigenpairs of the integral operator of a
kernel with respect to the uniform distribution on [0, 1]. The eigenfunctions
are the cosine system

    e_1(x) = 1,    e_i(x) = sqrt(2) cos((i - 1) pi x),  i >= 2,

which is orthonormal in L2[0, 1] and uniformly bounded by sqrt(2). Functions
are represented by their coefficients in this basis, an array of shape
``(I_max, d_Y)`` (or ``(I_max,)`` for scalar functions).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.chebyshev import chebval

__all__ = [
    "SpectralModel",
    "cosine_basis",
    "gamma_norm",
    "effective_dimension",
    "certify_effective_dimension_bound",
    "embedding_constant",
    "nystrom_spectrum",
    "estimate_decay",
    "DEFAULT_I_MAX",
]

DEFAULT_I_MAX = 512

# Rows of the basis matrix evaluated per block; keeps memory bounded for 1e6 points.
_CHUNK = 8192


def cosine_basis(x, n_basis: int) -> np.ndarray:
    """Evaluate the first ``n_basis`` cosine eigenfunctions at ``x``.

    Returns an array of shape ``(len(x), n_basis)``. Raises ``ValueError`` if
    any point lies outside [0, 1].
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1:
        raise ValueError("points must be a 1-d array")
    if np.any(~np.isfinite(x)) or np.any((x < 0.0) | (x > 1.0)):
        raise ValueError("designed-mercer inputs must lie in [0, 1]")
    k = np.arange(n_basis)
    phi = np.sqrt(2.0) * np.cos(np.pi * np.outer(x, k))
    phi[:, 0] = 1.0
    return phi


def evaluate_coefficients(c: np.ndarray, x) -> np.ndarray:
    """Evaluate ``sum_i c[i] e_i(x)`` at every point of ``x``.

    ``c`` has shape ``(I_max,)`` or ``(I_max, d_Y)``; the result has shape
    ``(len(x),)`` or ``(len(x), d_Y)``. Since ``cos(k pi x) = T_k(cos(pi x))``
    the series is summed as a Chebyshev series by Clenshaw's recurrence.
    """
    c = np.asarray(c, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any((x < 0) | (x > 1)):
        raise ValueError("cosine basis is defined on [0, 1]")
    a = c * np.sqrt(2.0)
    a[0] = c[0]
    out = chebval(np.cos(np.pi * x), a)
    return out if c.ndim == 1 else np.moveaxis(out, -1, 0)


@dataclass(frozen=True)
class SpectralModel:
    """Eigenvalues of a designed Mercer kernel over the cosine basis.

    Parameters
    ----------
    mu : array_like
        Strictly positive, nonincreasing eigenvalues. ``mu[0]`` pairs with the
        constant eigenfunction.
    decay_p : float, optional
        Declared polynomial decay exponent: ``mu_i`` behaves like ``i**(-1/p)``.
    decay_scale : float, optional
        Constant in front of the decay law when built by :meth:`from_decay`.
    """

    mu: np.ndarray
    decay_p: float | None = None
    decay_scale: float | None = None
    basis_id: str = field(default="cosine")

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float, copy=True).reshape(-1)
        if mu.size == 0:
            raise ValueError("a spectral model needs at least one eigenvalue")
        if not np.all(np.isfinite(mu)) or np.any(mu <= 0):
            raise ValueError("eigenvalues must be finite and strictly positive")
        if np.any(np.diff(mu) > 0):
            raise ValueError("eigenvalues must be nonincreasing")
        if self.decay_p is not None and not 0 < self.decay_p <= 1:
            raise ValueError(f"decay_p must lie in (0, 1], got {self.decay_p}")
        if self.basis_id != "cosine":
            raise ValueError(f"unsupported basis {self.basis_id!r}")
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)

    @classmethod
    def from_decay(cls, p: float, I_max: int = DEFAULT_I_MAX, scale: float = 1.0):
        """Build ``mu_i = scale * i**(-1/p)`` for ``i = 1..I_max``."""
        if not 0 < p <= 1:
            raise ValueError(f"p must lie in (0, 1], got {p}")
        if I_max < 1:
            raise ValueError("I_max must be positive")
        i = np.arange(1, I_max + 1, dtype=float)
        return cls(scale * i ** (-1.0 / p), decay_p=p, decay_scale=scale)

    @property
    def I_max(self) -> int:
        return self.mu.shape[0]

    @property
    def kappa2(self) -> float:
        """Certified bound on ``k(x, x)``: ``sum_i mu_i sup|e_i|**2``."""
        return float(self.mu[0] + 2.0 * self.mu[1:].sum())

    def basis(self, x) -> np.ndarray:
        return cosine_basis(x, self.I_max)

    def kernel_matrix(self, x, y) -> np.ndarray:
        """``sum_i mu_i e_i(x) e_i(y)`` for all pairs of ``x`` and ``y``."""
        phi_x = self.basis(x)
        phi_y = self.basis(y)
        return (phi_x * self.mu) @ phi_y.T

    def to_text(self) -> str:
        """Serialize to a one-line ``key=value; ...`` record."""
        parts = [f"basis={self.basis_id}", f"I_max={self.I_max}"]
        if self.decay_p is not None and self.decay_scale is not None:
            parts += [f"p={self.decay_p!r}", f"scale={self.decay_scale!r}"]
        else:
            parts.append("eigenvalues=" + ",".join(repr(float(m)) for m in self.mu))
            if self.decay_p is not None:
                parts.append(f"p={self.decay_p!r}")
        return "; ".join(parts)

    @classmethod
    def from_text(cls, text: str) -> "SpectralModel":
        fields = {}
        for item in re.split(r"[;\n]", text):
            item = item.strip()
            if not item:
                continue
            key, sep, value = item.partition("=")
            if not sep:
                raise ValueError(f"malformed spectral record item {item!r}")
            fields[key.strip()] = value.strip()
        if fields.pop("basis", "cosine") != "cosine":
            raise ValueError("only the cosine basis is supported")
        p = float(fields["p"]) if "p" in fields else None
        if "eigenvalues" in fields:
            mu = [float(v) for v in fields["eigenvalues"].split(",")]
            return cls(mu, decay_p=p)
        if p is None:
            raise ValueError("spectral record needs either eigenvalues or p")
        return cls.from_decay(
            p,
            I_max=int(fields.get("I_max", DEFAULT_I_MAX)),
            scale=float(fields.get("scale", 1.0)),
        )

    def __eq__(self, other):
        if not isinstance(other, SpectralModel):
            return NotImplemented
        return (
            self.decay_p == other.decay_p
            and self.mu.shape == other.mu.shape
            and bool(np.all(self.mu == other.mu))
        )

    def __hash__(self):
        return hash((self.decay_p, self.mu.tobytes()))


def gamma_norm(model: SpectralModel, c, gamma: float) -> float:
    """Interpolation-space norm ``sqrt(sum_ij c_ij**2 mu_i**(-gamma))``.

    At ``gamma = 0`` this is the L2(pi; Y) norm of the represented function.
    """
    if gamma < 0:
        raise ValueError(f"gamma must be nonnegative, got {gamma}")
    c = np.asarray(c, dtype=float)
    if c.shape[0] != model.I_max:
        raise ValueError(
            f"coefficient rows ({c.shape[0]}) do not match I_max ({model.I_max})"
        )
    weights = model.mu ** (-gamma)
    sq = c**2 if c.ndim == 1 else np.sum(c**2, axis=1)
    return float(np.sqrt(np.dot(sq, weights)))


def effective_dimension(model: SpectralModel, lam: float) -> float:
    """``N(lam) = sum_i mu_i / (mu_i + lam)``."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return float(np.sum(model.mu / (model.mu + lam)))


def certify_effective_dimension_bound(model: SpectralModel, lam_grid, max_growth=-0.05):
    """Check that ``N(lam) * lam**p`` stays bounded as ``lam`` shrinks.

    Returns ``(D_hat, passed)`` where ``D_hat`` is the largest value of
    ``N(lam) lam**p`` over the grid and ``passed`` requires the log-log slope of
    that sequence against ``lam`` to be at least ``max_growth``. A negative
    slope means growth as ``lam -> 0``.
    """
    if model.decay_p is None:
        raise ValueError("model has no declared decay exponent")
    lam_grid = np.asarray(lam_grid, dtype=float)
    if np.any(lam_grid <= 0) or np.any(lam_grid > 1):
        raise ValueError("lambda grid must lie in (0, 1]")
    values = np.array([effective_dimension(model, lam) for lam in lam_grid])
    scaled = values * lam_grid**model.decay_p
    d_hat = float(np.max(scaled))
    if lam_grid.size < 2:
        return d_hat, bool(np.isfinite(d_hat))
    slope = np.polyfit(np.log(lam_grid), np.log(scaled), 1)[0]
    return d_hat, bool(np.isfinite(d_hat) and slope >= max_growth)


def embedding_constant(model: SpectralModel, alpha: float, n_grid: int = 10_000) -> float:
    """Smallest certified ``A`` with ``sup_x sum_i mu_i**alpha e_i(x)**2 <= A**2``.

    Two bounds are compared: the grid maximum over ``n_grid`` points of
    [0, 1] (the grid contains x = 0, where every cosine attains its maximum)
    and the envelope ``mu_1**alpha + 2 sum_{i>=2} mu_i**alpha`` that follows
    from ``|e_1| = 1`` and ``|e_i| <= sqrt(2)``.
    """
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    weights = model.mu**alpha
    envelope = weights[0] + 2.0 * weights[1:].sum()
    grid = np.linspace(0.0, 1.0, n_grid)
    grid_max = -np.inf
    for start in range(0, n_grid, _CHUNK):
        phi = model.basis(grid[start : start + _CHUNK])
        grid_max = max(grid_max, float(np.max((phi**2) @ weights)))
    return float(np.sqrt(min(grid_max, envelope)))


def nystrom_spectrum(spec, sample) -> np.ndarray:
    """Eigenvalues of the empirical integral operator ``Gram(sample) / m``.

    Clipped at zero and sorted nonincreasing. These estimate the Mercer
    eigenvalues of ``spec`` with respect to the distribution of ``sample``.
    """
    from .kernel import gram_matrix  # kernel imports this module

    sample = np.asarray(sample, dtype=float).reshape(-1)
    m = sample.shape[0]
    if m < 2:
        raise ValueError("Nystrom estimate needs at least two sample points")
    gram = gram_matrix(spec, sample) / m
    try:
        eigvals = np.linalg.eigvalsh(gram)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigendecomposition of the {m}x{m} Gram matrix failed") from exc
    if not np.all(np.isfinite(eigvals)):
        raise RuntimeError("eigendecomposition returned non-finite eigenvalues")
    return np.sort(np.clip(eigvals, 0.0, None))[::-1]


def estimate_decay(mu_hat, fit_range: tuple[int, int] | None = None) -> float:
    """Fit ``mu_i ~ i**(-1/p)`` by least squares in log-log coordinates.

    ``fit_range`` is an inclusive 1-based index interval, by default
    ``(5, min(50, len(mu_hat) // 4))``. Nonpositive values inside the range
    are dropped; at least five must remain.
    """
    mu_hat = np.asarray(mu_hat, dtype=float).reshape(-1)
    if fit_range is None:
        fit_range = (5, min(50, mu_hat.size // 4))
    lo, hi = fit_range
    idx = np.arange(lo, hi + 1)
    idx = idx[(idx >= 1) & (idx <= mu_hat.size)]
    vals = mu_hat[idx - 1]
    keep = vals > 0
    if keep.sum() < 5:
        raise ValueError("need at least 5 positive eigenvalues in the fit range")
    slope = np.polyfit(np.log(idx[keep]), np.log(vals[keep]), 1)[0]
    return float(-1.0 / slope)
