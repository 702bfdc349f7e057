"""
Minimum gap along the interpolation path
=========================================

For a small planted 3-SAT formula we build the clause-counting diagonal
Hamiltonian, interpolate from the transverse field, and locate the smallest
gap above the ground band. The printed time bound scales as xi / g_min^2.
"""

import numpy as np

from qanneal import (
    Hamiltonian,
    build_sat_hamiltonian,
    build_transverse_field,
    gap_scan,
    gen_random_3sat,
    imaginary_time_evolve,
    interpolate,
)

# One qubit first: gap^2 = s^2 + 4 (1 - s)^2 has its minimum sqrt(0.8) at s = 0.8.
one = gap_scan(build_transverse_field(1), Hamiltonian(np.array([0.0, 1.0])))
print(f"1 qubit: g_min = {one.g_min:.6f} (sqrt 0.8 = {np.sqrt(0.8):.6f}), s* = {one.s_star:.5f}")

# Clause density near the hard region.
for n in (4, 6, 8, 10):
    formula = gen_random_3sat(n, int(round(4.3 * n)), seed=n, planted=True)
    res = gap_scan(build_transverse_field(n), build_sat_hamiltonian(formula), grid_points=81)
    print(f"N={n:2d} M={len(formula.clauses):2d}  g_min={res.g_min:.4f}  s*={res.s_star:.3f}  "
          f"xi={res.xi:.3f}  T~{res.time_bound:.1f}")

# Imaginary time at s* filters everything but the instantaneous ground state.
formula = gen_random_3sat(6, 26, seed=6, planted=True)
hi, ht = build_transverse_field(6), build_sat_hamiltonian(formula)
res = gap_scan(hi, ht, grid_points=81)
h = interpolate(hi, ht, res.s_star)
psi0 = np.random.default_rng(0).normal(size=64)
for tau in (0.0, 1.0, 5.0, 25.0):
    out = imaginary_time_evolve(h, psi0, tau)
    print(f"tau={tau:5.1f}  ground overlap {out.ground_overlap:.8f}")
