"""
Estimating a projected wavefunction with random jump paths
===========================================================

A four-state ring with costs (0, 1, 2, 1). We compare the Monte Carlo
estimate of exp(t (Q - V)) 1 against the dense matrix exponential and watch
the standard error shrink as the number of paths grows.
"""

import numpy as np
from scipy import linalg

from qanneal import FkParams, StateGraphProblem, estimate_psi

ring = StateGraphProblem.ring([0.0, 1.0, 2.0, 1.0])

# Reference: generator with rate nu/deg on each edge, minus the diagonal costs.
nu, t = 1.0, 1.0
exact = linalg.expm(t * (ring.generator(nu) - np.diag(ring.costs))) @ np.ones(4)

for n_paths in (100, 1_000, 10_000, 100_000):
    params = FkParams(nu=nu, duration=t, n_paths=n_paths)
    est = estimate_psi(2, ring, params, stream=(0, 1))
    z = (est.psi - exact[2]) / est.std_error
    print(f"{n_paths:>7} paths  psi(2) = {est.psi:.5f} +- {est.std_error:.5f}   "
          f"exact {exact[2]:.5f}   z = {z:+.2f}")

# The state with the largest amplitude is the one QSO would favour.
params = FkParams(nu=nu, duration=t, n_paths=20_000)
ests = [estimate_psi(y, ring, params, stream=(0, y + 1)).psi for y in range(4)]
print("estimates:", np.round(ests, 4))
print("exact:    ", np.round(exact, 4))
