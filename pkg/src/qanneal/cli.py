"""``qanneal`` command line: gen, qso, sa, compare, gapscan, chain.

Every option can also come from ``--config file.json``.  When a flag and
the config file disagree the config file wins and a warning goes to stderr.
Failures exit nonzero with a one-line JSON object on stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict

import numpy as np

from . import bench
from .chain import PRESET_NAMES, preset, run_sim
from .problems import (
    CnfFormula,
    gen_gnp,
    gen_random_3sat,
    write_dimacs,
    write_edgelist,
)
from .qso import qso_run
from .sa import sa_run
from .spectral import build_sat_hamiltonian, build_transverse_field, gap_scan

log = logging.getLogger("qanneal")


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _opt(p, *names, **kw):
    # SUPPRESS keeps unset flags out of the namespace so we know what the user typed
    p.add_argument(*names, default=argparse.SUPPRESS, **kw)


def _budget_flags(p):
    _opt(p, "--max-evaluations", type=int)
    _opt(p, "--max-seconds", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qanneal", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a random instance")
    _opt(g, "--config")
    _opt(g, "--problem", choices=["gp", "sat"])
    _opt(g, "--n", type=int, help="graph nodes (gp)")
    _opt(g, "--p", type=float, help="edge probability (gp)")
    _opt(g, "--N", type=int, dest="N", help="variables (sat)")
    _opt(g, "--M", type=int, dest="M", help="clauses (sat)")
    _opt(g, "--planted", action="store_true")
    _opt(g, "--seed", type=int)
    _opt(g, "--out", help="output file (default stdout)")

    q = sub.add_parser("qso", help="run QSO on one instance")
    _opt(q, "--config")
    _opt(q, "--instance")
    _opt(q, "--seed", type=int)
    _opt(q, "--nu", type=float)
    _opt(q, "--duration", type=float)
    _opt(q, "--n-paths", type=int)
    _opt(q, "--neigh-size", type=int)
    _opt(q, "--t-loc", type=int)
    _opt(q, "--t-drill", type=int)
    _opt(q, "--drill-duration", type=float)
    _opt(q, "--target-cost", type=float)
    _budget_flags(q)
    _opt(q, "--trace", help="write the search trace CSV here")
    _opt(q, "--out", help="write the JSON summary here (default stdout)")

    s = sub.add_parser("sa", help="run simulated annealing on one instance")
    _opt(s, "--config")
    _opt(s, "--instance")
    _opt(s, "--seed", type=int)
    _opt(s, "--t0", type=float)
    _opt(s, "--ratio", type=float)
    _opt(s, "--moves-per-step", type=int)
    _opt(s, "--target-cost", type=float)
    _budget_flags(s)
    _opt(s, "--trace")
    _opt(s, "--out")

    c = sub.add_parser("compare", help="QSO vs SA campaign")
    _opt(c, "--config")
    _opt(c, "--problem", choices=["gp", "sat"])
    _opt(c, "--n", type=int)
    _opt(c, "--p", type=float)
    _opt(c, "--N", type=int, dest="N")
    _opt(c, "--M", type=int, dest="M")
    _opt(c, "--planted", action="store_true")
    _opt(c, "--instance", action="append", dest="instance_files")
    _opt(c, "--n-instances", type=int)
    _opt(c, "--runs-per-instance", type=int)
    _opt(c, "--solvers", nargs="+", choices=list(bench.SOLVERS))
    _opt(c, "--budget-mode", choices=["evaluations", "wall_clock"])
    _budget_flags(c)
    _opt(c, "--master-seed", type=int)
    _opt(c, "--snapshots", type=int)
    _opt(c, "--no-brute-force", action="store_false", dest="brute_force")
    _opt(c, "--stop-at-optimum", action="store_true")
    _opt(c, "--workers", type=int)
    _opt(c, "--no-traces", action="store_false", dest="write_traces")
    _opt(c, "--out", dest="output_dir")
    for name in ("nu", "duration"):
        _opt(c, f"--qso-{name}", type=float)
    for name in ("n-paths", "neigh-size", "t-loc", "t-drill"):
        _opt(c, f"--qso-{name}", type=int)
    _opt(c, "--sa-t0", type=float)
    _opt(c, "--sa-ratio", type=float)
    _opt(c, "--sa-moves-per-step", type=int)

    gs = sub.add_parser("gapscan", help="minimum gap of the SAT annealing path")
    _opt(gs, "--config")
    _opt(gs, "--instance", help="DIMACS CNF file")
    _opt(gs, "--N", type=int, dest="N", help="random formula: variables")
    _opt(gs, "--M", type=int, dest="M", help="random formula: clauses")
    _opt(gs, "--seed", type=int)
    _opt(gs, "--planted", action="store_true")
    _opt(gs, "--grid-points", type=int)
    _opt(gs, "--no-refine", action="store_false", dest="refine")
    _opt(gs, "--max-qubits", type=int)
    _opt(gs, "--out", help="prefix for <out>_gap.csv and <out>_summary.json")

    ch = sub.add_parser("chain", help="damped Schroedinger chain simulation")
    _opt(ch, "--config")
    _opt(ch, "--preset", choices=list(PRESET_NAMES))
    _opt(ch, "--s", type=int)
    _opt(ch, "--lam", type=float)
    _opt(ch, "--g", type=float)
    _opt(ch, "--beta", type=float)
    _opt(ch, "--disorder-sigma", type=float)
    _opt(ch, "--disorder-seed", type=int)
    _opt(ch, "--dt", type=float)
    _opt(ch, "--t-final", type=float)
    _opt(ch, "--packet-center", type=float)
    _opt(ch, "--packet-width", type=float)
    _opt(ch, "--packet-k0", type=float)
    _opt(ch, "--record-every", type=int)
    _opt(ch, "--out", help="prefix for <out>_grid.csv, <out>_traces.csv, <out>_manifest.json")
    return parser


def merge_config(flags: dict, config: dict, path: str = "") -> dict:
    """Overlay ``config`` on ``flags``; config wins and each conflict is logged."""
    out = dict(flags)
    for k, v in config.items():
        key = f"{path}{k}"
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = merge_config(out[k], v, key + ".")
            continue
        if k in out and out[k] != v:
            log.warning("config file overrides flag %s: %r -> %r", key, out[k], v)
        out[k] = v
    return out


def _load_config(flags: dict) -> dict:
    path = flags.pop("config", None)
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as e:
        raise CliError(f"cannot read config {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise CliError(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(cfg, dict):
        raise CliError("config file must hold a JSON object")
    cfg.pop("command", None)
    return cfg


def _emit(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=True, default=_jsonable)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def _require(opts, *keys):
    missing = [k for k in keys if opts.get(k) is None]
    if missing:
        raise CliError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def cmd_gen(opts):
    opts = {"problem": "gp", "seed": 0, "planted": False, **opts}
    if opts["problem"] == "gp":
        _require(opts, "n", "p")
        text = write_edgelist(gen_gnp(opts["n"], opts["p"], opts["seed"]))
    else:
        _require(opts, "N", "M")
        text = write_dimacs(gen_random_3sat(opts["N"], opts["M"], opts["seed"], opts["planted"]))
    if opts.get("out"):
        with open(opts["out"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _solver_summary(name, opts, best, trace, params):
    return {
        "solver": name,
        "instance": opts["instance"],
        "seed": opts["seed"],
        "params": params,
        "best_cost": trace.final_best,
        "evaluations": trace.total_evaluations,
        "best_configuration": np.asarray(best).astype(int).tolist(),
    }


def _budget_opts(opts):
    b = {k: opts.pop(k) for k in ("max_evaluations", "max_seconds", "target_cost") if k in opts}
    if "max_seconds" in b and "max_evaluations" not in b:
        b["max_evaluations"] = None
    return b


def _run_solver(name, opts):
    _require(opts, "instance")
    opts = {"seed": 0, **opts}
    instance = bench.load_instance(opts["instance"])
    io_keys = {k: opts.pop(k, None) for k in ("instance", "seed", "trace", "out")}
    budget = _budget_opts(opts)
    if name == "qso":
        params = bench.qso_params_from(opts, **budget)
        best, trace = qso_run(instance, params, io_keys["seed"])
    else:
        params = bench.sa_params_from(opts, **budget)
        best, trace = sa_run(instance, params, io_keys["seed"])
    if io_keys["trace"]:
        trace.to_csv(io_keys["trace"], with_time=params.max_seconds is not None)
    _emit(_solver_summary(name, io_keys, best, trace, asdict(params)), io_keys["out"])


def cmd_qso(opts):
    _run_solver("qso", opts)


def cmd_sa(opts):
    _run_solver("sa", opts)


_GEN_KEYS = ("n", "p", "N", "M", "planted")


def _compare_dict(opts: dict) -> dict:
    """Reshape flat compare flags into the nested ExperimentConfig layout."""
    d, gen, qso, sa = {}, {}, {}, {}
    for k, v in opts.items():
        if k in _GEN_KEYS:
            gen[k] = v
        elif k.startswith("qso_"):
            qso[k[4:]] = v
        elif k.startswith("sa_"):
            sa[k[3:]] = v
        else:
            d[k] = v
    for key, val in (("generator", gen), ("qso", qso), ("sa", sa)):
        if val:
            d[key] = val
    return d


def cmd_compare(opts, config):
    merged = merge_config(_compare_dict(opts), config)
    if "generator" in merged and "generator" not in config:
        gen = merged["generator"]
        if merged.get("problem", "gp") == "sat":
            merged["generator"] = {"N": gen.get("N", 10), "M": gen.get("M", 30),
                                   "planted": gen.get("planted", True)}
        else:
            merged["generator"] = {"n": gen.get("n", 12), "p": gen.get("p", 0.3)}
    elif "generator" not in merged and merged.get("problem") == "sat":
        merged["generator"] = {"N": 10, "M": 30, "planted": True}
    cfg = bench.ExperimentConfig.from_dict(merged)
    report = bench.run_campaign(cfg)
    _emit(report.summary())


def cmd_gapscan(opts):
    opts = {"seed": 0, "planted": False, "grid_points": 101, "refine": True, "max_qubits": 12, **opts}
    if opts.get("instance"):
        formula = bench.load_instance(opts["instance"])
        if not isinstance(formula, CnfFormula):
            raise CliError("gapscan needs a DIMACS CNF instance")
    else:
        _require(opts, "N", "M")
        formula = gen_random_3sat(opts["N"], opts["M"], opts["seed"], opts["planted"])
    n = formula.num_vars
    if n > opts["max_qubits"]:
        raise CliError(f"{n} qubits exceeds --max-qubits {opts['max_qubits']}")
    res = gap_scan(build_transverse_field(n, opts["max_qubits"]), build_sat_hamiltonian(formula),
                   grid_points=opts["grid_points"], refine=opts["refine"],
                   max_qubits=opts["max_qubits"])
    summary = {**res.summary(), "options": {k: v for k, v in opts.items() if k != "out"}}
    if opts.get("out"):
        res.to_csv(f"{opts['out']}_gap.csv")
        _emit(summary, f"{opts['out']}_summary.json")
    _emit(summary)


def cmd_chain(opts):
    record_every = opts.pop("record_every", 100)
    out = opts.pop("out", None)
    name = opts.pop("preset", "ballistic")
    params = preset(name, **opts)
    res = run_sim(params, record_every=record_every)
    if out:
        res.write(out)
    man = res.manifest()
    man["final_position"] = float(res.positions[-1])
    man["final_energy"] = float(res.energy[-1])
    _emit(man)


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def main(argv=None) -> int:
    logging.basicConfig(format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        ns = build_parser().parse_args(argv)
    except CliError as e:
        return _fail("usage", str(e), 2)
    log.setLevel(logging.INFO if ns.verbose else logging.WARNING)
    flags = {k: v for k, v in vars(ns).items() if k not in ("command", "verbose")}
    try:
        config = _load_config(flags)
        if ns.command == "compare":
            cmd_compare(flags, config)
        else:
            opts = merge_config(flags, config)
            {"gen": cmd_gen, "qso": cmd_qso, "sa": cmd_sa,
             "gapscan": cmd_gapscan, "chain": cmd_chain}[ns.command](opts)
    except CliError as e:
        return _fail("usage", str(e), 2)
    except (OSError, ValueError, TypeError, MemoryError, KeyError) as e:
        return _fail(type(e).__name__, str(e) or repr(e), 1)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
