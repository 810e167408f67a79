"""Matern kernels and Sobolev rates.

The Matern kernel of order nu = 1/2 (the exponential kernel) has RKHS equal to
the Sobolev space H^1 on the line, whose eigenvalues decay like i**-2, that is
p = 1/2. We estimate p from the spectrum of a Gram matrix and then repeat the
learning curve with a black-box kernel, where the error must be estimated by
Monte Carlo on fresh points.
"""

import numpy as np

from vvkrr import KernelSpec, NoiseSpec, Schedule, estimate_decay, make_kernel_target, nystrom_spectrum
from vvkrr import run_rate_experiment

kernel = KernelSpec("matern", order=0.5)
rng = np.random.default_rng(0)
mu_hat = nystrom_spectrum(kernel, rng.uniform(size=2000))
print("leading Gram eigenvalues:", np.round(mu_hat[:6], 4))
print(f"estimated decay exponent p = {estimate_decay(mu_hat):.3f} (Sobolev value 0.5)")

for order in (1.5, 2.5):
    other = nystrom_spectrum(KernelSpec("matern", order=order), rng.uniform(size=2000))
    print(f"order {order}: p = {estimate_decay(other):.3f} (Sobolev value {1 / (2 * order + 1):.3f})")

# The target is a kernel expansion over 64 nodes, so it lies in the RKHS.
target = make_kernel_target(kernel, B=1.0, d_Y=4, n_nodes=64, seed=0)
report = run_rate_experiment(target, NoiseSpec("gaussian-iso", 1.0, 4), kernel,
                             [64, 128, 256, 512, 1024], n_seeds=10, gamma=0.0, schedule=Schedule(0.5))
print(f"Monte Carlo L2 slope {report.fitted_slope:+.3f}, theory {-report.theory_exponent:+.3f}")
