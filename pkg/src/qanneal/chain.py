"""Single-excitation XY chain with Kostin friction.

Sites are numbered ``1..s``.  The state obeys

    i dpsi/dt = (H_hop + V) psi + beta * K(psi) psi

where ``H_hop`` has hopping ``2 * lam`` between neighbors, ``V`` is the
site potential ``-g * x`` plus optional Gaussian disorder, and ``K`` is
the discrete phase potential ``K(x) = sum_{y=2..x} sin(S(y) - S(y-1))``.

On this lattice the velocity of a plane wave ``exp(i k x)`` is
``-4 lam sin(k)``, so the phase increments point against the current when
``lam > 0``.  The friction potential is therefore applied as
``-sign(lam) * beta * K``; with that orientation the energy
``<psi|H_hop + V|psi>`` is non-increasing.

While stepping, ``K`` is replaced by ``K - <K>`` and the potential by
``V - c`` for a constant ``c``.  Both are uniform shifts that only move the
global phase (the first one is Kostin's own normalization, the second is
undone exactly), and they keep the RK4 norm error small.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numba
import numpy as np

from .spectral import Hamiltonian

__all__ = [
    "ChainParams",
    "preset",
    "PRESET_NAMES",
    "DISORDER_LAMBDA",
    "ChainState",
    "SimResult",
    "IntegrationError",
    "build_hopping",
    "site_potential",
    "initial_packet",
    "kostin_term",
    "evolve_step",
    "run_sim",
]

AMPLITUDE_CUTOFF = 1e-12
RENORM_THRESHOLD = 1e-9


class IntegrationError(RuntimeError):
    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


@dataclass(frozen=True)
class ChainParams:
    s: int = 100
    lam: float = 1.0
    g: float = 0.0
    beta: float = 0.0
    disorder_sigma: float = 0.0
    disorder_seed: int = 0
    dt: float = 0.005
    t_final: float | None = None  # None -> 20 * s
    packet_center: float = 10.0
    packet_width: float = 3.0
    packet_k0: float = -math.pi / 4

    def __post_init__(self):
        if self.s < 2:
            raise ValueError("need at least two sites")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.beta < 0 or self.disorder_sigma < 0:
            raise ValueError("beta and disorder_sigma must be nonnegative")

    @property
    def duration(self) -> float:
        return 20.0 * self.s if self.t_final is None else self.t_final

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))


@dataclass
class ChainState:
    amplitudes: np.ndarray
    time: float = 0.0

    @property
    def probability(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def position(self) -> float:
        p = self.probability
        return float(np.dot(np.arange(1, len(p) + 1), p) / p.sum())


DISORDER_LAMBDA = 0.03


def preset(name: str, s: int = 100, **overrides) -> ChainParams:
    """Named chain experiments on ``s`` sites.

    ``ballistic``: free packet.  ``bloch`` / ``bloch_friction``: slope
    ``g = 6/s`` without and with ``beta = 8/s``.  ``disorder`` /
    ``disorder_friction``: ``sigma = 0.06`` site disorder at hopping
    ``lam = DISORDER_LAMBDA``, the second adding the same slope and friction.
    At ``lam = 1`` this disorder strength localizes on a scale much longer
    than 100 sites, so the weaker coupling is what makes localization visible.
    """
    table = {
        "ballistic": {},
        "bloch": {"g": 6.0 / s},
        "bloch_friction": {"g": 6.0 / s, "beta": 8.0 / s},
        "disorder": {"lam": DISORDER_LAMBDA, "disorder_sigma": 0.06},
        "disorder_friction": {"lam": DISORDER_LAMBDA, "disorder_sigma": 0.06,
                              "g": 6.0 / s, "beta": 8.0 / s},
    }
    if name not in table:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(table)}")
    return ChainParams(s=s, **{**table[name], **overrides})


PRESET_NAMES = ("ballistic", "bloch", "bloch_friction", "disorder", "disorder_friction")


def build_hopping(s: int, lam: float) -> Hamiltonian:
    """XY chain restricted to one excitation: tridiagonal, off-diagonal ``2 lam``."""
    if s < 2:
        raise ValueError("need at least two sites")
    h = np.zeros((s, s))
    i = np.arange(s - 1)
    h[i, i + 1] = h[i + 1, i] = 2.0 * lam
    return Hamiltonian(h)


def site_potential(params: ChainParams) -> np.ndarray:
    x = np.arange(1, params.s + 1, dtype=float)
    v = -params.g * x
    if params.disorder_sigma > 0:
        rng = np.random.default_rng(params.disorder_seed)
        v = v + rng.normal(0.0, params.disorder_sigma, params.s)
    return v


def chain_hamiltonian(params: ChainParams) -> Hamiltonian:
    h = build_hopping(params.s, params.lam).data.copy()
    h[np.diag_indices(params.s)] += site_potential(params)
    return Hamiltonian(h)


def initial_packet(s: int, center: float, width: float, k0: float = -math.pi / 2) -> ChainState:
    """Normalized ``exp(-(x - center)**2 / (4 width**2)) * exp(i k0 x)`` on sites 1..s.

    The default ``k0 = -pi/2`` sits at the inflection point of the band, where
    the packet is fastest and least dispersive, moving towards larger x.
    ``ChainParams`` uses ``-pi/4`` instead: a slower packet (speed
    ``2*sqrt(2)*lam``) that a slope of ``6/s`` turns around before mid-chain.
    """
    if not 1 <= center <= s:
        raise ValueError("center must lie on the chain")
    if not width > 0:
        raise ValueError("width must be positive")
    x = np.arange(1, s + 1, dtype=float)
    log_env = -((x - center) ** 2) / (4.0 * width**2)
    env = np.exp(log_env - log_env.max())  # relative to the peak, so it never underflows to zero
    psi = env * np.exp(1j * k0 * x)
    return ChainState(psi / np.linalg.norm(psi), 0.0)


@numba.njit(cache=True)
def _kostin(psi, out):
    out[0] = 0.0
    acc = 0.0
    for y in range(1, psi.shape[0]):
        a = psi[y]
        b = psi[y - 1]
        ma = abs(a)
        mb = abs(b)
        if ma >= AMPLITUDE_CUTOFF and mb >= AMPLITUDE_CUTOFF:
            # sin(arg(a * conj(b)))
            acc += (a.imag * b.real - a.real * b.imag) / (ma * mb)
        out[y] = acc


def kostin_term(state) -> np.ndarray:
    """``K(x) = sum_{y=2..x} sin(S(y) - S(y-1))`` with ``K(1) = 0``.

    Phase differences come from ``psi(y) * conj(psi(y-1))`` so no phase
    unwrapping is needed; they are taken as zero wherever either amplitude
    is below 1e-12.
    """
    psi = np.ascontiguousarray(getattr(state, "amplitudes", state), dtype=np.complex128)
    out = np.empty(psi.shape[0])
    _kostin(psi, out)
    return out


@numba.njit(cache=True)
def _rhs(psi, hop, v, beta_eff, kbuf, out):
    n = psi.shape[0]
    _kostin(psi, kbuf)
    # K - <K>: a uniform shift (global phase only) that keeps the diagonal small
    kmean = 0.0
    norm2 = 0.0
    for x in range(n):
        p = psi[x].real ** 2 + psi[x].imag ** 2
        kmean += kbuf[x] * p
        norm2 += p
    kmean /= norm2
    for x in range(n):
        acc = (v[x] + beta_eff * (kbuf[x] - kmean)) * psi[x]
        if x > 0:
            acc += hop[x - 1] * psi[x - 1]
        if x < n - 1:
            acc += hop[x] * psi[x + 1]
        out[x] = -1j * acc


@numba.njit(cache=True)
def _energy(psi, hop, v):
    # Rayleigh quotient, so renormalization leaves it unchanged
    e = 0.0
    norm2 = 0.0
    n = psi.shape[0]
    for x in range(n):
        p = psi[x].real ** 2 + psi[x].imag ** 2
        e += v[x] * p
        norm2 += p
    for x in range(n - 1):
        z = psi[x].conjugate() * psi[x + 1]
        e += 2.0 * hop[x] * z.real
    return e / norm2


@numba.njit(cache=True)
def _integrate(psi, hop, v, v_shift, beta_eff, dt, n_steps, record_every,
               prob_out, energy_out, drift_out):
    """RK4 with the friction potential recomputed at every stage.

    The stepping uses ``v - v_shift``; energies use ``v``.  The caller
    restores the global phase ``exp(-i v_shift t)``.

    Returns (final state, cumulative renormalization drift, largest per-step
    norm change, largest per-step energy increase, index of a failed step or -1).
    """
    n = psi.shape[0]
    k1 = np.empty(n, np.complex128)
    k2 = np.empty(n, np.complex128)
    k3 = np.empty(n, np.complex128)
    k4 = np.empty(n, np.complex128)
    tmp = np.empty(n, np.complex128)
    kbuf = np.empty(n)
    vd = v - v_shift
    drift = 0.0
    max_norm_change = 0.0
    max_energy_rise = -np.inf
    energy = _energy(psi, hop, v)
    rec = 0
    if record_every > 0:
        for x in range(n):
            prob_out[0, x] = psi[x].real ** 2 + psi[x].imag ** 2
        energy_out[0] = energy
        drift_out[0] = 0.0
        rec = 1
    for step in range(1, n_steps + 1):
        norm_before = 0.0
        for x in range(n):
            norm_before += psi[x].real ** 2 + psi[x].imag ** 2
        _rhs(psi, hop, vd, beta_eff, kbuf, k1)
        for x in range(n):
            tmp[x] = psi[x] + 0.5 * dt * k1[x]
        _rhs(tmp, hop, vd, beta_eff, kbuf, k2)
        for x in range(n):
            tmp[x] = psi[x] + 0.5 * dt * k2[x]
        _rhs(tmp, hop, vd, beta_eff, kbuf, k3)
        for x in range(n):
            tmp[x] = psi[x] + dt * k3[x]
        _rhs(tmp, hop, vd, beta_eff, kbuf, k4)
        norm2 = 0.0
        for x in range(n):
            psi[x] = psi[x] + dt / 6.0 * (k1[x] + 2.0 * k2[x] + 2.0 * k3[x] + k4[x])
            norm2 += psi[x].real ** 2 + psi[x].imag ** 2
        if not np.isfinite(norm2):
            return psi, drift, max_norm_change, max_energy_rise, step
        nrm = math.sqrt(norm2)
        change = abs(nrm - math.sqrt(norm_before))
        if change > max_norm_change:
            max_norm_change = change
        if abs(nrm - 1.0) > RENORM_THRESHOLD:
            drift += abs(nrm - 1.0)
            for x in range(n):
                psi[x] = psi[x] / nrm
        e_new = _energy(psi, hop, v)
        if e_new - energy > max_energy_rise:
            max_energy_rise = e_new - energy
        energy = e_new
        if record_every > 0 and step % record_every == 0:
            for x in range(n):
                prob_out[rec, x] = psi[x].real ** 2 + psi[x].imag ** 2
            energy_out[rec] = energy
            drift_out[rec] = drift
            rec += 1
    return psi, drift, max_norm_change, max_energy_rise, -1


def _tridiagonal(h: Hamiltonian):
    m = h.to_dense()
    hop = np.ascontiguousarray(np.diag(m, 1).real, dtype=float)
    v = np.ascontiguousarray(np.diag(m).real, dtype=float)
    off = m - np.diag(np.diag(m)) - np.diag(hop, 1) - np.diag(hop, -1)
    if np.any(off):
        raise ValueError("chain Hamiltonian must be real symmetric tridiagonal")
    return hop, v


def friction_orientation(hop: np.ndarray) -> float:
    """Sign that turns the raw phase potential into friction for this hopping."""
    return -float(np.sign(hop[0])) if len(hop) else 0.0


def _midpoint(v: np.ndarray) -> float:
    # constant offset removed from the potential while stepping
    return 0.5 * (float(v.max()) + float(v.min()))


def _check_stability(hop, v, beta, dt):
    s = len(v)
    radius = np.max(np.abs(v - _midpoint(v))) + 2.0 * np.max(np.abs(hop)) + beta * (s - 1)
    if dt * radius >= 0.5:
        raise ValueError(f"dt={dt} too large: dt * spectral radius bound = {dt * radius:.3f} >= 0.5")


def evolve_step(state: ChainState, h: Hamiltonian, params: ChainParams) -> ChainState:
    """Advance one RK4 step of size ``params.dt``."""
    hop, v = _tridiagonal(h)
    _check_stability(hop, v, params.beta, params.dt)
    psi = np.array(state.amplitudes, dtype=np.complex128)
    beta_eff = params.beta * friction_orientation(hop)
    shift = _midpoint(v)
    empty2, empty1 = np.empty((0, 0)), np.empty(0)
    psi, _, _, _, failed = _integrate(psi, hop, v, shift, beta_eff, params.dt, 1, 0,
                                      empty2, empty1, empty1)
    if failed >= 0:
        raise IntegrationError("non-finite amplitude", state)
    return ChainState(psi * np.exp(-1j * shift * params.dt), state.time + params.dt)


@dataclass
class SimResult:
    params: ChainParams
    times: np.ndarray
    probability: np.ndarray  # rows: recorded times, columns: sites
    energy: np.ndarray
    norm_drift: np.ndarray  # cumulative renormalization drift at each record
    final_state: ChainState
    max_step_norm_change: float
    max_step_energy_rise: float
    record_every: int = 1

    @property
    def positions(self) -> np.ndarray:
        x = np.arange(1, self.params.s + 1)
        return self.probability @ x / self.probability.sum(axis=1)

    def mass(self, lo: int, hi: int) -> np.ndarray:
        """Probability on sites ``lo..hi`` (inclusive, 1-based) at each record."""
        return self.probability[:, lo - 1:hi].sum(axis=1)

    def manifest(self) -> dict:
        return {
            "params": asdict(self.params),
            "t_final": self.params.duration,
            "n_steps": self.params.n_steps,
            "record_every": self.record_every,
            "records": int(len(self.times)),
            "max_step_norm_change": self.max_step_norm_change,
            "max_step_energy_rise": self.max_step_energy_rise,
            "final_norm_drift": float(self.norm_drift[-1]),
        }

    def write(self, prefix) -> list[str]:
        """Write ``<prefix>_grid.csv``, ``<prefix>_traces.csv`` and ``<prefix>_manifest.json``."""
        grid = f"{prefix}_grid.csv"
        header = "t," + ",".join(f"site{x}" for x in range(1, self.params.s + 1))
        np.savetxt(grid, np.column_stack([self.times, self.probability]), delimiter=",",
                   header=header, comments="", fmt="%.12g")
        traces = f"{prefix}_traces.csv"
        np.savetxt(traces, np.column_stack([self.times, self.energy, self.norm_drift, self.positions]),
                   delimiter=",", header="t,energy,norm_drift,position", comments="", fmt="%.15g")
        man = f"{prefix}_manifest.json"
        with open(man, "w") as fh:
            json.dump(self.manifest(), fh, indent=2)
            fh.write("\n")
        return [grid, traces, man]


def run_sim(params: ChainParams, record_every: int = 100, state: ChainState | None = None) -> SimResult:
    """Integrate from the Gaussian packet in ``params`` (or ``state``) to ``t_final``."""
    if record_every < 1:
        raise ValueError("record_every must be at least 1")
    h = chain_hamiltonian(params)
    hop, v = _tridiagonal(h)
    _check_stability(hop, v, params.beta, params.dt)
    if state is None:
        state = initial_packet(params.s, params.packet_center, params.packet_width, params.packet_k0)
    n_steps = params.n_steps
    n_rec = n_steps // record_every + 1
    prob = np.empty((n_rec, params.s))
    energy = np.empty(n_rec)
    drift = np.empty(n_rec)
    psi = np.array(state.amplitudes, dtype=np.complex128)
    beta_eff = params.beta * friction_orientation(hop)
    shift = _midpoint(v)
    psi, _, max_dn, max_de, failed = _integrate(
        psi, hop, v, shift, beta_eff, params.dt, n_steps, record_every, prob, energy, drift
    )
    if failed >= 0:
        raise IntegrationError(f"non-finite amplitude at step {failed}", ChainState(psi, failed * params.dt))
    times = state.time + np.arange(n_rec) * record_every * params.dt
    psi = psi * np.exp(-1j * shift * n_steps * params.dt)
    final = ChainState(psi, state.time + n_steps * params.dt)
    return SimResult(params, times, prob, energy, drift, final, float(max_dn), float(max_de),
                     record_every)
