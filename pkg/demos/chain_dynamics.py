"""
A wave packet on a chain: free flight, Bloch confinement, disorder
===================================================================

Five runs on a 100-site chain. A constant tilt traps the packet in Bloch
oscillations and disorder localizes it; in both cases the friction term
lets it relax downhill toward the far end.
"""

import numpy as np

from qanneal import preset, run_sim


def profile(result, bins=10):
    """Coarse text histogram of the final probability distribution."""
    p = result.probability[-1]
    blocks = p.reshape(bins, -1).sum(axis=1)
    return " ".join(f"{b:4.2f}" for b in blocks)


for name in ("ballistic", "bloch", "bloch_friction"):
    r = run_sim(preset(name), record_every=400)
    print(f"{name:16s} <x> {r.positions[0]:5.1f} -> {r.positions[-1]:5.1f}   "
          f"E {r.energy[0]:+.3f} -> {r.energy[-1]:+.3f}")
    print(f"{'':16s} final profile  {profile(r)}")

# Bloch period 2 pi / g: the frictionless packet returns close to its start.
free = run_sim(preset("bloch"), record_every=20)
print("bloch <x> range:", round(free.positions.min(), 1), "to", round(free.positions.max(), 1))

print()
for seed in range(3):
    a = run_sim(preset("disorder", disorder_seed=seed), record_every=4000)
    b = run_sim(preset("disorder_friction", disorder_seed=seed), record_every=4000)
    print(f"seed {seed}: first half {a.mass(1, 50)[-1]:.3f}, "
          f"last quarter {a.mass(76, 100)[-1]:.2e} -> {b.mass(76, 100)[-1]:.2e} with friction")
