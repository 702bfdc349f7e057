"""Quantum-inspired stochastic optimization and the numerics around it.

Problem families (3-SAT, balanced graph partitioning), a Feynman-Kac
estimator for imaginary-time evolved wavefunctions, the QSO search and a
simulated-annealing baseline, exact spectral tools for the adiabatic path,
and a damped tight-binding chain simulator.
"""
from .bench import CampaignReport, ExperimentConfig, emit_plotdata, histogram, run_campaign
from .chain import (
    ChainParams,
    ChainState,
    IntegrationError,
    SimResult,
    build_hopping,
    chain_hamiltonian,
    evolve_step,
    initial_packet,
    preset,
    kostin_term,
    run_sim,
    site_potential,
)
from .fk import FkEstimate, FkParams, PathSample, estimate_psi, path_rng, sample_path
from .problems import (
    CnfFormula,
    GraphInstance,
    PartitionProblem,
    Problem,
    SatProblem,
    StateGraphProblem,
    as_problem,
    brute_force_min,
    gen_gnp,
    gen_random_3sat,
    gp_cost,
    neighbors,
    parse_dimacs,
    parse_edgelist,
    read_dimacs,
    read_edgelist,
    sat_cost,
    write_dimacs,
    write_edgelist,
)
from .qso import QsoParams, drill_jump, local_optimization, qso_run, quantum_transition
from .sa import SaParams, metropolis_step, sa_run
from .spectral import (
    Hamiltonian,
    SpectralResult,
    build_sat_hamiltonian,
    build_transverse_field,
    gap_scan,
    imaginary_time_evolve,
    interpolate,
    lowest_levels,
)
from .trace import Budget, SearchTrace

__version__ = "0.1.0"
