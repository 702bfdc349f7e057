"""Exact small-N spectra for adiabatic 3-SAT Hamiltonians.

Basis convention: index ``z`` of a ``2**N`` vector is read most-significant
bit first, bit ``i`` (from the left, 0-based) belongs to qubit ``i + 1``.
Bit value 0 is spin up (sigma_z = +1), which encodes ``x_i = True``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .problems import CnfFormula

__all__ = [
    "Hamiltonian",
    "SpectralResult",
    "ImaginaryTimeResult",
    "basis_assignment",
    "build_sat_hamiltonian",
    "build_transverse_field",
    "interpolate",
    "lowest_levels",
    "gap_scan",
    "imaginary_time_evolve",
]

MAX_DIAGONAL_QUBITS = 20
MAX_DENSE_QUBITS = 12
_GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class Hamiltonian:
    """Hermitian operator stored either as its diagonal (1-D) or dense (2-D)."""

    data: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.data)
        if d.ndim == 2 and d.shape[0] != d.shape[1]:
            raise ValueError("dense Hamiltonian must be square")
        if d.ndim not in (1, 2):
            raise ValueError("Hamiltonian data must be 1-D or 2-D")
        object.__setattr__(self, "data", d)

    @property
    def is_diagonal(self) -> bool:
        return self.data.ndim == 1

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def num_qubits(self) -> int:
        return int(round(math.log2(self.dim)))

    def to_dense(self) -> np.ndarray:
        return np.diag(self.data) if self.is_diagonal else self.data

    def expectation(self, psi: np.ndarray) -> float:
        if self.is_diagonal:
            return float(np.real(np.vdot(psi, self.data * psi)))
        return float(np.real(np.vdot(psi, self.data @ psi)))


def basis_assignment(z: int, num_qubits: int) -> np.ndarray:
    """Truth assignment encoded by basis state ``z``."""
    bits = (z >> np.arange(num_qubits - 1, -1, -1)) & 1
    return bits == 0


def build_sat_hamiltonian(formula: CnfFormula, max_qubits: int = MAX_DIAGONAL_QUBITS) -> Hamiltonian:
    """Diagonal Hamiltonian whose entry at ``z`` counts clauses violated by ``z``.

    Each clause contributes the projector onto its unique violating pattern
    of the three qubits it touches.
    """
    n = formula.num_vars
    if n > max_qubits:
        raise MemoryError(f"{n} qubits exceeds the cap of {max_qubits}")
    z = np.arange(2**n)
    # up[i] is True where qubit i+1 is spin up
    up = ((z[None, :] >> np.arange(n - 1, -1, -1)[:, None]) & 1) == 0
    diag = np.zeros(2**n, dtype=np.int64)
    for clause in formula.clauses:
        violated = np.ones(2**n, dtype=bool)
        for lit in clause:
            q = up[abs(lit) - 1]
            # a positive literal is violated on spin down, a negated one on spin up
            violated &= ~q if lit > 0 else q
        diag += violated
    return Hamiltonian(diag.astype(float))


def build_transverse_field(n: int, max_qubits: int = MAX_DENSE_QUBITS) -> Hamiltonian:
    """Dense matrix of ``-sum_i sigma_x(i)``."""
    if n < 1:
        raise ValueError("need at least one qubit")
    if n > max_qubits:
        raise MemoryError(f"{n} qubits exceeds the dense cap of {max_qubits}")
    dim = 2**n
    h = np.zeros((dim, dim))
    z = np.arange(dim)
    for i in range(n):
        h[z, z ^ (1 << i)] = -1.0
    return Hamiltonian(h)


def interpolate(h_i: Hamiltonian, h_t: Hamiltonian, s: float) -> Hamiltonian:
    """``s * h_t + (1 - s) * h_i``."""
    if h_i.dim != h_t.dim:
        raise ValueError(f"dimension mismatch: {h_i.dim} vs {h_t.dim}")
    if h_i.is_diagonal and h_t.is_diagonal:
        return Hamiltonian(s * h_t.data + (1 - s) * h_i.data)
    return Hamiltonian(s * h_t.to_dense() + (1 - s) * h_i.to_dense())


def _eigh(h: Hamiltonian, count: int | None = None):
    if h.is_diagonal:
        order = np.argsort(h.data, kind="stable")
        if count is not None:
            order = order[:count]
        vecs = np.zeros((h.dim, len(order)), dtype=h.data.dtype)
        vecs[order, np.arange(len(order))] = 1.0
        return h.data[order], vecs
    if count is None or count >= h.dim:
        return linalg.eigh(h.data)
    return linalg.eigh(h.data, subset_by_index=[0, count - 1])


@dataclass
class Levels:
    """Lowest band of levels and the first level above it."""

    e0: float
    e1: float
    multiplicity: int  # degeneracy of e0
    ground: np.ndarray  # columns span the low band
    excited: np.ndarray  # eigenvectors at e1 outside the band


def lowest_levels(h: Hamiltonian, band: int = 1, tol: float = 1e-9) -> Levels:
    """Ground energy ``e0`` and the first level ``e1`` above the low band.

    The band is the ``max(band, multiplicity of e0)`` lowest eigenvectors;
    degeneracy is judged within ``tol * max(1, |e0|)``.
    """
    count = min(h.dim, band + 8)
    while True:
        w, v = _eigh(h, count)
        scale = tol * max(1.0, abs(w[0]))
        mult = int(np.count_nonzero(w - w[0] <= scale))
        m0 = max(band, mult)
        if m0 >= len(w) and count < h.dim:
            count = min(h.dim, 2 * count)
            continue
        if m0 >= len(w):  # nothing above the band
            return Levels(w[0], w[0], mult, v, v[:, :0])
        m1 = int(np.count_nonzero(np.abs(w[m0:] - w[m0]) <= scale))
        if m0 + m1 == len(w) and count < h.dim:
            count = min(h.dim, 2 * count)
            continue
        return Levels(w[0], w[m0], mult, v[:, :m0], v[:, m0:m0 + m1])


def _coupling(levels: Levels, dh: np.ndarray) -> float:
    """Largest singular value of the block <e1| dH/ds |e0>; for nondegenerate
    levels this is |<e1|dH/ds|e0>|."""
    if not levels.excited.shape[1]:
        return float("nan")
    block = levels.excited.conj().T @ dh @ levels.ground
    return float(np.linalg.norm(block, 2))


@dataclass
class SpectralResult:
    s: np.ndarray
    e0: np.ndarray
    e1: np.ndarray
    multiplicity: np.ndarray
    g_min: float
    s_star: float
    xi: float
    time_bound: float
    degenerate: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def gap(self) -> np.ndarray:
        return self.e1 - self.e0

    def summary(self) -> dict:
        return {
            "g_min": self.g_min,
            "s_star": self.s_star,
            "xi": self.xi,
            "time_bound": self.time_bound,
            "degenerate": self.degenerate,
            "grid_points": int(len(self.s)),
            "max_ground_multiplicity": int(self.multiplicity.max()),
            **self.extra,
        }

    def to_csv(self, path=None) -> str:
        lines = ["s,e0,e1,gap,multiplicity"]
        for row in zip(self.s, self.e0, self.e1, self.gap, self.multiplicity):
            lines.append("{!r},{!r},{!r},{!r},{}".format(*map(float, row[:4]), int(row[4])))
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def to_json(self, path=None) -> str:
        text = json.dumps(self.summary(), indent=2, default=float)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text


def _golden_section(f, a: float, b: float, tol: float) -> tuple[float, float]:
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def gap_scan(h_i: Hamiltonian, h_t: Hamiltonian, grid_points: int = 101,
             refine: bool = True, tol: float = 1e-6,
             max_qubits: int = MAX_DENSE_QUBITS) -> SpectralResult:
    """Minimum spectral gap along ``s * h_t + (1 - s) * h_i`` for s in [0, 1].

    When ``h_t`` has a d-fold degenerate ground level (several satisfying
    assignments) the d lowest levels are treated as one band, since they all
    merge into the target ground space at s = 1; the gap runs from the
    ground energy to the first distinct level above that band.  The grid
    minimum is refined by golden-section search to ``tol`` in ``s``.  ``xi`` is the largest coupling between the two
    levels through ``h_t - h_i`` over the grid, and ``time_bound`` is
    ``xi / g_min**2``.
    """
    if h_i.dim != h_t.dim:
        raise ValueError(f"dimension mismatch: {h_i.dim} vs {h_t.dim}")
    if h_i.dim > 2**max_qubits:
        raise MemoryError(f"dimension {h_i.dim} exceeds 2**{max_qubits}")
    if grid_points < 2:
        raise ValueError("need at least two grid points")
    s = np.linspace(0.0, 1.0, grid_points)
    dh = h_t.to_dense() - h_i.to_dense()
    band = lowest_levels(h_t).multiplicity
    e0, e1, mult, xi = np.empty_like(s), np.empty_like(s), np.empty(len(s), dtype=int), 0.0
    for k, sk in enumerate(s):
        lv = lowest_levels(interpolate(h_i, h_t, sk), band)
        e0[k], e1[k], mult[k] = lv.e0, lv.e1, lv.multiplicity
        x = _coupling(lv, dh)
        if not math.isnan(x):
            xi = max(xi, x)

    gap = e1 - e0
    k = int(np.argmin(gap))
    g_min, s_star = float(gap[k]), float(s[k])
    if refine and g_min > 0:
        def f(x):
            lv = lowest_levels(interpolate(h_i, h_t, x), band)
            return lv.e1 - lv.e0

        lo, hi = s[max(k - 1, 0)], s[min(k + 1, len(s) - 1)]
        x, fx = _golden_section(f, lo, hi, tol)
        if fx < g_min:
            g_min, s_star = float(fx), float(x)

    scale = max(1.0, float(np.max(np.abs(e0))))
    degenerate = g_min <= 1e-9 * scale
    if degenerate:
        return SpectralResult(s, e0, e1, mult, 0.0, s_star, float("nan"), float("inf"), True,
                              extra={"target_ground_multiplicity": band})
    return SpectralResult(s, e0, e1, mult, g_min, s_star, xi, xi / g_min**2,
                          extra={"target_ground_multiplicity": band})


@dataclass
class ImaginaryTimeResult:
    state: np.ndarray
    ground_overlap: float  # norm of the projection onto the ground space
    e0: float
    gap: float


def imaginary_time_evolve(h: Hamiltonian, psi0: np.ndarray, t: float) -> ImaginaryTimeResult:
    """Normalized ``exp(-t h) psi0`` computed through the eigendecomposition."""
    psi0 = np.asarray(psi0, dtype=complex)
    if not np.any(psi0):
        raise ValueError("initial state is the zero vector")
    if h.is_diagonal:
        w = h.data
        amp = np.exp(-t * (w - w.min())) * psi0
        out = amp / np.linalg.norm(amp)
        ground = np.abs(w - w.min()) <= 1e-9 * max(1.0, abs(w.min()))
        overlap = float(np.linalg.norm(out[ground]))
        above = w[~ground]
        gap = float(above.min() - w.min()) if above.size else float("inf")
        return ImaginaryTimeResult(out, overlap, float(w.min()), gap)
    w, v = linalg.eigh(h.data)
    coeff = v.conj().T @ psi0
    coeff = coeff * np.exp(-t * (w - w[0]))
    if not np.any(coeff):
        raise ValueError("initial state is orthogonal to the spectrum within float range")
    coeff /= np.linalg.norm(coeff)
    ground = w - w[0] <= 1e-9 * max(1.0, abs(w[0]))
    overlap = float(np.linalg.norm(coeff[ground]))
    above = w[~ground]
    gap = float(above[0] - w[0]) if above.size else float("inf")
    return ImaginaryTimeResult(v @ coeff, overlap, float(w[0]), gap)
