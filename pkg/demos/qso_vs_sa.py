"""
Quantum-inspired search against simulated annealing
====================================================

A desk-sized version of the graph-partitioning campaign: both solvers get
the same evaluation budget on each G(n, p) instance, and we tabulate the
best cut sizes against brute-force optima.
"""

import json
import sys

from qanneal import ExperimentConfig, run_campaign

n = int(sys.argv[1]) if len(sys.argv) > 1 else 16
config = ExperimentConfig(
    problem="gp",
    generator={"n": n, "p": 0.3},
    n_instances=10,
    max_evaluations=50_000,
    snapshots=6,
    master_seed=1,
)
report = run_campaign(config)

# One line per instance: optimum, then each solver's best.
print("inst  opt   qso   sa")
by = {(r["instance"], r["solver"]): r["best_cost"] for r in report.runs}
for i, opt in enumerate(report.optima):
    print(f"{i:4d} {opt:4d} {by[i, 'qso']:5d} {by[i, 'sa']:4d}")

summary = report.summary()["solvers"]
for solver, info in summary.items():
    print(f"{solver}: mean {info['mean_best']:.2f}  var {info['var_best']:.2f}  "
          f"hit rate {info['success_rate']:.2f}")

# Best cost so far at each budget slice, averaged over instances.
for solver in config.solvers:
    table = report.snapshot_table(solver)
    cols = list(zip(*[row[2:] for row in table]))
    print(solver, "v_min by slice:", [round(sum(c) / len(c), 2) for c in cols])

print(json.dumps(report.histogram("qso")), json.dumps(report.histogram("sa")))
