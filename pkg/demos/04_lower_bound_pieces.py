"""Ingredients of the lower bound.

A vector-valued problem is no easier than its scalar projections: the norm
of <F, a> is at most |a| times the norm of F, with equality when F is rank
one along a. Gaussian noise along one direction turns two regression
functions into two distributions whose KL divergence is their squared L2
distance over 2 sigma**2.
"""

import numpy as np

from vvkrr.lowerbound import (
    kl_scalar_joints,
    monte_carlo_kl,
    random_function_pair,
    reduction_sides,
)
from vvkrr.spectral import SpectralModel

model = SpectralModel.from_decay(0.5)
rng = np.random.default_rng(3)

F = rng.standard_normal((model.I_max, 4)) * np.sqrt(model.mu)[:, None]
a = rng.standard_normal(4)
lhs, rhs = reduction_sides(F, a, 0.5, model)
print(f"random F:   |<F, a>| = {lhs:.4f} <= |a| |F| = {rhs:.4f}")
f = F[:, 0]
lhs, rhs = reduction_sides(np.outer(f, a / np.linalg.norm(a)), a, 0.5, model)
print(f"rank-one F: |<F, a>| = {lhs:.6f}  = |a| |F| = {rhs:.6f}")

f, g = random_function_pair(model, rng)
print(f"\n{'sigma':>6} {'exact KL':>10} {'Monte Carlo':>12}")
for sigma in (0.5, 1.0, 2.0):
    print(f"{sigma:>6} {kl_scalar_joints(f, g, sigma):>10.4f} {monte_carlo_kl(f, g, sigma, 100_000, seed=1):>12.4f}")
