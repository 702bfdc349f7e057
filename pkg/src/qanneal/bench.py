"""Head-to-head QSO / SA campaigns and plot-ready output files."""
from __future__ import annotations

import csv
import io
import json
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from math import comb

import numpy as np

from .chain import SimResult
from .fk import FkParams
from .problems import (
    GraphInstance,
    as_problem,
    brute_force_min,
    gen_gnp,
    gen_random_3sat,
    read_dimacs,
    read_edgelist,
)
from .qso import QsoParams, qso_run
from .sa import SaParams, sa_run

__all__ = [
    "ExperimentConfig",
    "CampaignReport",
    "run_campaign",
    "emit_plotdata",
    "histogram",
    "load_instance",
    "qso_params_from",
    "sa_params_from",
]

SOLVERS = ("qso", "sa")
EXECUTION_KEYS = ("workers", "output_dir")


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce a campaign.  Round-trips through JSON."""

    command: str = "compare"
    problem: str = "gp"  # "gp" or "sat"
    generator: dict = field(default_factory=lambda: {"n": 12, "p": 0.3})
    instance_files: list = field(default_factory=list)
    n_instances: int = 20
    runs_per_instance: int = 1
    solvers: list = field(default_factory=lambda: list(SOLVERS))
    qso: dict = field(default_factory=dict)
    sa: dict = field(default_factory=dict)
    budget_mode: str = "evaluations"  # or "wall_clock"
    max_evaluations: int = 1_000_000
    max_seconds: float = 600.0
    master_seed: int = 0
    snapshots: int = 12
    brute_force: bool = True
    stop_at_optimum: bool = False  # end a run once it hits the brute-force optimum
    workers: int = 1
    output_dir: str | None = None
    write_traces: bool = True

    def __post_init__(self):
        if self.problem not in ("gp", "sat"):
            raise ValueError(f"unknown problem kind {self.problem!r}")
        if self.budget_mode not in ("evaluations", "wall_clock"):
            raise ValueError(f"unknown budget mode {self.budget_mode!r}")
        for s in self.solvers:
            if s not in SOLVERS:
                raise ValueError(f"unknown solver {s!r}")
        if self.snapshots < 1:
            raise ValueError("snapshots must be at least 1")
        if self.n_instances < 0 or self.runs_per_instance < 1:
            raise ValueError("need n_instances >= 0 and runs_per_instance >= 1")
        if not self.instance_files:
            need = {"gp": ("n", "p"), "sat": ("N", "M")}[self.problem]
            missing = [k for k in need if k not in self.generator]
            if missing:
                raise ValueError(f"generator spec for {self.problem!r} lacks {missing}")

    def to_dict(self) -> dict:
        return asdict(self)

    def experiment_dict(self) -> dict:
        """The config minus execution-only settings (worker count, output dir).

        This is what gets embedded in emitted files, so output does not
        depend on how many workers ran the campaign.
        """
        d = self.to_dict()
        for k in EXECUTION_KEYS:
            d.pop(k)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    def instance_seed(self, i: int) -> int:
        return int(np.random.SeedSequence([self.master_seed, 1, i + 1]).generate_state(1)[0])

    def run_seed(self, i: int, r: int) -> int:
        return int(np.random.SeedSequence([self.master_seed, 2, i + 1, r + 1]).generate_state(1)[0])


def load_instance(path):
    """DIMACS for ``.cnf`` / ``.dimacs`` files, edge list otherwise."""
    if str(path).endswith((".cnf", ".dimacs")):
        return read_dimacs(path)
    return read_edgelist(path)


def _generate(config: ExperimentConfig, i: int):
    g, seed = dict(config.generator), config.instance_seed(i)
    if config.problem == "gp":
        return gen_gnp(int(g["n"]), float(g["p"]), seed)
    return gen_random_3sat(int(g["N"]), int(g["M"]), seed, bool(g.get("planted", True)))


def qso_params_from(d: dict, **budget) -> QsoParams:
    d = dict(d)
    fk = FkParams(
        nu=float(d.pop("nu", 1.0)),
        duration=float(d.pop("duration", 20.0)),
        n_paths=int(d.pop("n_paths", 4)),
    )
    return QsoParams(fk=fk, **d, **budget)


def sa_params_from(d: dict, **budget) -> SaParams:
    return SaParams(**d, **budget)


def _budget_kwargs(config: ExperimentConfig) -> dict:
    if config.budget_mode == "evaluations":
        return {"max_evaluations": config.max_evaluations, "max_seconds": None}
    return {"max_evaluations": None, "max_seconds": config.max_seconds}


def _snapshot_points(config: ExperimentConfig) -> list:
    total = config.max_evaluations if config.budget_mode == "evaluations" else config.max_seconds
    return [total * (k + 1) / config.snapshots for k in range(config.snapshots)]


def _best_at_time(trace, t):
    i = int(np.searchsorted(trace.elapsed, t, side="right"))
    return trace.best_cost[i - 1] if i else None


def _run_job(job):
    config, instance, i, solver, r, seed, optimum = job
    budget = _budget_kwargs(config)
    if config.stop_at_optimum and optimum is not None:
        budget["target_cost"] = optimum
    if solver == "qso":
        best, trace = qso_run(instance, qso_params_from(config.qso, **budget), seed)
    else:
        best, trace = sa_run(instance, sa_params_from(config.sa, **budget), seed)
    if config.budget_mode == "evaluations":
        snaps = [trace.best_at(int(x)) for x in _snapshot_points(config)]
    else:
        snaps = [_best_at_time(trace, x) for x in _snapshot_points(config)]
    return {
        "instance": i,
        "solver": solver,
        "run": r,
        "seed": seed,
        "best_cost": trace.final_best,
        "evaluations": trace.total_evaluations,
        "snapshots": snaps,
        "best_configuration": np.asarray(best).astype(int).tolist(),
        "trace_csv": trace.to_csv(with_time=config.budget_mode != "evaluations"),
    }


def histogram(costs) -> dict:
    """Counts per distinct cost value, in increasing order."""
    return dict(sorted(Counter(costs).items()))


def _enumerable(problem) -> bool:
    n = problem.n
    if hasattr(problem, "half"):
        return comb(n, problem.half) <= 1_000_000
    return n <= 20


@dataclass
class CampaignReport:
    config: ExperimentConfig
    runs: list  # one dict per (instance, solver, run), ordered
    optima: list  # brute-force optimum per instance or None

    def costs(self, solver: str) -> list:
        return [r["best_cost"] for r in self.runs if r["solver"] == solver]

    def histogram(self, solver: str) -> dict:
        return histogram(self.costs(solver))

    def success_rate(self, solver: str) -> float | None:
        hits = [
            r["best_cost"] <= self.optima[r["instance"]]
            for r in self.runs
            if r["solver"] == solver and self.optima[r["instance"]] is not None
        ]
        return sum(hits) / len(hits) if hits else None

    def snapshot_table(self, solver: str) -> list:
        """Rows ``[instance, run, best after slice 1, ..., best after slice S]``."""
        return [
            [r["instance"], r["run"], *r["snapshots"]]
            for r in self.runs
            if r["solver"] == solver
        ]

    def summary(self) -> dict:
        out = {"config": self.config.experiment_dict(), "solvers": {}}
        for s in self.config.solvers:
            costs = self.costs(s)
            evals = [r["evaluations"] for r in self.runs if r["solver"] == s]
            out["solvers"][s] = {
                "runs": len(costs),
                "mean_best": float(np.mean(costs)),
                "var_best": float(np.var(costs)),
                "min_best": min(costs),
                "success_rate": self.success_rate(s),
                "histogram": {str(k): v for k, v in self.histogram(s).items()},
                "mean_evaluations": float(np.mean(evals)),
                "max_evaluations_used": max(evals),
            }
        out["optima"] = self.optima
        out["seeds"] = {
            "instances": [self.config.instance_seed(i) for i in range(len(self.optima))],
            "runs": sorted({(r["instance"], r["run"], r["seed"]) for r in self.runs}),
        }
        return out

    def results_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["instance", "solver", "run", "seed", "best_cost", "optimum", "evaluations"])
        for r in self.runs:
            opt = self.optima[r["instance"]]
            w.writerow([r["instance"], r["solver"], r["run"], r["seed"], r["best_cost"],
                        "" if opt is None else opt, r["evaluations"]])
        return buf.getvalue()

    def write(self, out_dir) -> list:
        return emit_plotdata(self, out_dir)


def run_campaign(config: ExperimentConfig) -> CampaignReport:
    """Run every solver on every instance with matched budgets and recorded seeds.

    Jobs may run in parallel (``config.workers``); results are merged in
    (instance, solver, run) order, so the report does not depend on the
    worker count.
    """
    if config.instance_files:
        instances = [load_instance(p) for p in config.instance_files]
        kinds = {"gp" if isinstance(x, GraphInstance) else "sat" for x in instances}
        if kinds != {config.problem}:
            raise ValueError(f"instance files are {sorted(kinds)}, config says {config.problem!r}")
    else:
        instances = [_generate(config, i) for i in range(config.n_instances)]

    optima = []
    for inst in instances:
        p = as_problem(inst)
        optima.append(brute_force_min(p)[0] if config.brute_force and _enumerable(p) else None)

    jobs = [
        (config, inst, i, solver, r, config.run_seed(i, r), optima[i])
        for i, inst in enumerate(instances)
        for solver in config.solvers
        for r in range(config.runs_per_instance)
    ]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as ex:
            runs = list(ex.map(_run_job, jobs))
    else:
        runs = [_run_job(j) for j in jobs]
    report = CampaignReport(config, runs, optima)
    if config.output_dir:
        report.write(config.output_dir)
    return report


def _write(path, text, manifest=None):
    with open(path, "w") as fh:
        if manifest is not None:
            fh.write("# " + json.dumps(manifest, sort_keys=True) + "\n")
        fh.write(text)
    return path


def emit_plotdata(artifact, out_dir) -> list:
    """Write plot-ready files for a ``CampaignReport`` or a chain ``SimResult``.

    Campaign: ``results.csv``, ``histogram_<solver>.csv`` (cost,count),
    ``snapshots_<solver>.csv`` (instance, run, one column per budget slice),
    ``summary.json`` and ``traces/<solver>_i<instance>_r<run>.csv``.
    Chain: ``chain_grid.csv``, ``chain_traces.csv``, ``chain_manifest.json``.

    Every campaign CSV starts with one ``# {json}`` line holding the config
    and seeds; read them with ``comment="#"`` in pandas or skip line one.
    """
    os.makedirs(out_dir, exist_ok=True)
    if isinstance(artifact, SimResult):
        return artifact.write(os.path.join(out_dir, "chain"))
    if not isinstance(artifact, CampaignReport):
        raise TypeError(f"cannot emit plot data for {type(artifact).__name__}")
    rep = artifact
    man = {"config": rep.config.experiment_dict(), "seeds": rep.summary()["seeds"]}
    written = [_write(os.path.join(out_dir, "results.csv"), rep.results_csv(), man)]
    slices = [f"slice{k + 1}" for k in range(rep.config.snapshots)]
    for s in rep.config.solvers:
        lines = ["cost,count"] + [f"{k},{v}" for k, v in rep.histogram(s).items()]
        written.append(_write(os.path.join(out_dir, f"histogram_{s}.csv"), "\n".join(lines) + "\n", man))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["instance", "run", *slices])
        w.writerows([["" if x is None else x for x in row] for row in rep.snapshot_table(s)])
        written.append(_write(os.path.join(out_dir, f"snapshots_{s}.csv"), buf.getvalue(), man))
    written.append(_write(os.path.join(out_dir, "summary.json"),
                          json.dumps(rep.summary(), indent=2, sort_keys=True) + "\n"))
    if rep.config.write_traces:
        tdir = os.path.join(out_dir, "traces")
        os.makedirs(tdir, exist_ok=True)
        for r in rep.runs:
            name = f"{r['solver']}_i{r['instance']}_r{r['run']}.csv"
            run_man = {"config": rep.config.experiment_dict(), "instance": r["instance"],
                       "solver": r["solver"], "run": r["run"], "seed": r["seed"]}
            written.append(_write(os.path.join(tdir, name), r["trace_csv"], run_man))
    return written
