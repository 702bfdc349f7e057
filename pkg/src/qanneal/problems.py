"""Combinatorial problems: 3-SAT and balanced graph partitioning.

A problem object couples a cost function with a neighborhood structure.
Neighbors of a configuration are addressed by an integer move index
``k in range(problem.degree(c))`` so samplers can draw a uniform neighbor
without materializing the whole neighborhood.

Configurations are numpy boolean vectors.  For SAT, ``c[i]`` is the truth
value of variable ``i + 1``; for partitioning, ``c[u]`` tells which side
node ``u`` sits on.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "CnfFormula",
    "GraphInstance",
    "Problem",
    "SatProblem",
    "PartitionProblem",
    "StateGraphProblem",
    "as_problem",
    "sat_cost",
    "gp_cost",
    "neighbors",
    "gen_gnp",
    "gen_random_3sat",
    "brute_force_min",
    "read_dimacs",
    "parse_dimacs",
    "write_dimacs",
    "read_edgelist",
    "parse_edgelist",
    "write_edgelist",
]


@dataclass(frozen=True)
class CnfFormula:
    """3-CNF formula.  Literals use the DIMACS convention: ``+v`` / ``-v``
    for variable ``v`` in ``1..num_vars``."""

    num_vars: int
    clauses: tuple[tuple[int, int, int], ...]
    planted: tuple[bool, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.num_vars < 1:
            raise ValueError(f"num_vars must be positive, got {self.num_vars}")
        clauses = tuple(tuple(int(l) for l in cl) for cl in self.clauses)
        for cl in clauses:
            if len(cl) != 3:
                raise ValueError(f"clause {cl} does not have 3 literals")
            vs = [abs(l) for l in cl]
            if min(vs) < 1 or max(vs) > self.num_vars:
                raise ValueError(f"clause {cl} has a variable outside 1..{self.num_vars}")
            if len(set(vs)) != 3:
                raise ValueError(f"clause {cl} repeats a variable")
        object.__setattr__(self, "clauses", clauses)
        if self.planted is not None:
            object.__setattr__(self, "planted", tuple(bool(b) for b in self.planted))
            if len(self.planted) != self.num_vars:
                raise ValueError("planted assignment has the wrong length")

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)


@dataclass(frozen=True)
class GraphInstance:
    """Undirected simple graph on nodes ``0..num_nodes-1`` (``num_nodes`` even)."""

    num_nodes: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        n = self.num_nodes
        if n < 2 or n % 2:
            raise ValueError(f"num_nodes must be even and positive, got {n}")
        normalized = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range")
            e = (min(u, v), max(u, v))
            if e in normalized:
                raise ValueError(f"duplicate edge {e}")
            normalized.add(e)
        object.__setattr__(self, "edges", tuple(sorted(normalized)))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.num_nodes, self.num_nodes), dtype=np.int64)
        if self.edges:
            e = np.asarray(self.edges)
            a[e[:, 0], e[:, 1]] = 1
            a[e[:, 1], e[:, 0]] = 1
        return a


# --------------------------------------------------------------------------
# cost functions


def sat_cost(formula: CnfFormula, assignment) -> int:
    """Number of clauses violated by ``assignment``."""
    x = np.asarray(assignment, dtype=bool)
    if x.shape != (formula.num_vars,):
        raise ValueError(
            f"assignment has shape {x.shape}, expected ({formula.num_vars},)"
        )
    if not formula.clauses:
        return 0
    lits = np.asarray(formula.clauses)
    satisfied = x[np.abs(lits) - 1] == (lits > 0)
    return int(np.count_nonzero(~satisfied.any(axis=1)))


def gp_cost(graph: GraphInstance, partition) -> int:
    """Number of edges cut by a balanced bipartition."""
    c = np.asarray(partition, dtype=bool)
    if c.shape != (graph.num_nodes,):
        raise ValueError(
            f"partition has shape {c.shape}, expected ({graph.num_nodes},)"
        )
    if 2 * np.count_nonzero(c) != graph.num_nodes:
        raise ValueError("partition is not balanced")
    if not graph.edges:
        return 0
    e = np.asarray(graph.edges)
    return int(np.count_nonzero(c[e[:, 0]] != c[e[:, 1]]))


# --------------------------------------------------------------------------
# problem objects


class Problem:
    """Cost function plus a symmetric neighborhood.

    Subclasses implement ``cost``, ``degree``, ``neighbor`` and
    ``random_configuration``; ``neighbor_deltas`` may be overridden with a
    vectorized version.
    """

    def cost(self, c) -> float:
        raise NotImplementedError

    def degree(self, c) -> int:
        raise NotImplementedError

    def neighbor(self, c, k: int):
        raise NotImplementedError

    def random_configuration(self, rng: np.random.Generator):
        raise NotImplementedError

    def validate(self, c) -> None:
        pass

    def neighbors(self, c) -> list:
        return [self.neighbor(c, k) for k in range(self.degree(c))]

    def neighbor_deltas(self, c) -> np.ndarray:
        """Cost change of every move, in move-index order."""
        base = self.cost(c)
        return np.array([self.cost(y) - base for y in self.neighbors(c)])

    def same(self, a, b) -> bool:
        return bool(np.array_equal(a, b))


class SatProblem(Problem):
    """3-SAT with the single-bit-flip neighborhood."""

    def __init__(self, formula: CnfFormula):
        self.formula = formula
        self.n = formula.num_vars
        lits = np.asarray(formula.clauses, dtype=np.int64).reshape(-1, 3)
        self._var = np.abs(lits) - 1
        self._want = lits > 0
        # incidence[v, m] = +1 if v occurs positively in clause m, -1 if negated
        self._inc = np.zeros((self.n, len(lits)), dtype=np.int64)
        for m, row in enumerate(lits):
            for l in row:
                self._inc[abs(l) - 1, m] = 1 if l > 0 else -1

    def __repr__(self):
        return f"SatProblem(N={self.n}, M={self.formula.num_clauses})"

    def validate(self, c):
        if np.shape(c) != (self.n,):
            raise ValueError(f"assignment has shape {np.shape(c)}, expected ({self.n},)")

    def cost(self, c) -> int:
        if not len(self._var):
            return 0
        return int(np.count_nonzero(~(c[self._var] == self._want).any(axis=1)))

    def degree(self, c) -> int:
        return self.n

    def neighbor(self, c, k):
        y = c.copy()
        y[k] = not y[k]
        return y

    def neighbor_deltas(self, c) -> np.ndarray:
        if not len(self._var):
            return np.zeros(self.n, dtype=np.int64)
        lit_true = c[self._var] == self._want
        n_true = lit_true.sum(axis=1)
        # literal of v in clause m is currently true
        holds = np.where(c[:, None], self._inc > 0, self._inc < 0) & (self._inc != 0)
        occurs = self._inc != 0
        breaks = (holds & (n_true == 1)[None, :]).sum(axis=1)
        makes = (occurs & ~holds & (n_true == 0)[None, :]).sum(axis=1)
        return breaks - makes

    def random_configuration(self, rng):
        return rng.random(self.n) < 0.5


class PartitionProblem(Problem):
    """Balanced graph bipartition with the pair-swap neighborhood.

    Move ``k`` swaps the ``k // (n/2)``-th true node with the ``k % (n/2)``-th
    false node (both in increasing node order), so balance is preserved.
    """

    def __init__(self, graph: GraphInstance):
        self.graph = graph
        self.n = graph.num_nodes
        self.half = self.n // 2
        e = np.asarray(graph.edges, dtype=np.int64).reshape(-1, 2)
        self._eu, self._ev = e[:, 0], e[:, 1]
        self._adj = graph.adjacency()

    def __repr__(self):
        return f"PartitionProblem(n={self.n}, edges={self.graph.num_edges})"

    def validate(self, c):
        if np.shape(c) != (self.n,):
            raise ValueError(f"partition has shape {np.shape(c)}, expected ({self.n},)")
        if 2 * np.count_nonzero(c) != self.n:
            raise ValueError("partition is not balanced")

    def cost(self, c) -> int:
        return int(np.count_nonzero(c[self._eu] != c[self._ev]))

    def degree(self, c) -> int:
        return self.half * self.half

    def neighbor(self, c, k):
        a, b = divmod(int(k), self.half)
        u = np.flatnonzero(c)[a]
        v = np.flatnonzero(~c)[b]
        y = c.copy()
        y[u] = False
        y[v] = True
        return y

    def neighbor_deltas(self, c) -> np.ndarray:
        adj = self._adj
        same = np.where(c[None, :] == c[:, None], adj, 0).sum(axis=1)
        other = adj.sum(axis=1) - same
        d = same - other  # cut change when one node changes side alone
        A, B = np.flatnonzero(c), np.flatnonzero(~c)
        return (d[A][:, None] + d[B][None, :] + 2 * adj[np.ix_(A, B)]).ravel()

    def random_configuration(self, rng):
        c = np.zeros(self.n, dtype=bool)
        c[rng.permutation(self.n)[: self.half]] = True
        return c


class StateGraphProblem(Problem):
    """Explicit small state space: states ``0..len(costs)-1`` with given
    adjacency lists.  Used for toy models and exact cross-checks."""

    def __init__(self, costs: Sequence[float], adjacency: Sequence[Sequence[int]]):
        self.costs = np.asarray(costs, dtype=float)
        self.adjacency = [tuple(int(j) for j in nb) for nb in adjacency]
        if len(self.adjacency) != len(self.costs):
            raise ValueError("costs and adjacency differ in length")
        for i, nb in enumerate(self.adjacency):
            for j in nb:
                if i not in self.adjacency[j]:
                    raise ValueError(f"adjacency is not symmetric at ({i}, {j})")

    @classmethod
    def ring(cls, costs: Sequence[float]) -> "StateGraphProblem":
        m = len(costs)
        return cls(costs, [((i - 1) % m, (i + 1) % m) for i in range(m)])

    def cost(self, c) -> float:
        return float(self.costs[c])

    def degree(self, c) -> int:
        return len(self.adjacency[c])

    def neighbor(self, c, k):
        return self.adjacency[c][k]

    def random_configuration(self, rng):
        return int(rng.integers(len(self.costs)))

    def same(self, a, b) -> bool:
        return a == b

    def generator(self, nu: float) -> np.ndarray:
        """Jump-process generator: rate ``nu / deg(x)`` to each neighbor."""
        m = len(self.costs)
        q = np.zeros((m, m))
        for i, nb in enumerate(self.adjacency):
            for j in nb:
                q[i, j] += nu / len(nb)
            q[i, i] = -nu
        return q


def as_problem(instance) -> Problem:
    if isinstance(instance, Problem):
        return instance
    if isinstance(instance, CnfFormula):
        return SatProblem(instance)
    if isinstance(instance, GraphInstance):
        return PartitionProblem(instance)
    raise TypeError(f"cannot build a problem from {type(instance).__name__}")


def neighbors(instance, c) -> list:
    """All neighbors of ``c``: bit flips for SAT, balanced swaps for partitioning."""
    p = as_problem(instance)
    p.validate(c)
    return p.neighbors(c)


# --------------------------------------------------------------------------
# generators


def gen_gnp(n: int, p: float, seed: int) -> GraphInstance:
    """Erdos-Renyi G(n, p) graph on an even number of nodes."""
    if n < 2 or n % 2:
        raise ValueError(f"n must be even and positive, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    return GraphInstance(n, tuple(zip(iu[keep].tolist(), ju[keep].tolist())))


def gen_random_3sat(N: int, M: int, seed: int, planted: bool = False) -> CnfFormula:
    """Random 3-CNF formula.

    Each clause picks 3 distinct variables uniformly and uniform signs.  With
    ``planted=True`` a hidden assignment is drawn first and clauses it
    violates are rejected and redrawn; the hidden assignment is kept in
    ``formula.planted``.
    """
    if N < 3:
        raise ValueError(f"need at least 3 variables, got {N}")
    if M < 0:
        raise ValueError(f"M must be nonnegative, got {M}")
    rng = np.random.default_rng(seed)
    hidden = rng.random(N) < 0.5 if planted else None
    clauses = []
    while len(clauses) < M:
        vs = rng.choice(N, size=3, replace=False)
        pos = rng.random(3) < 0.5
        if hidden is not None and not np.any(hidden[vs] == pos):
            continue
        clauses.append(tuple(int(v + 1) if s else -int(v + 1) for v, s in zip(vs, pos)))
    return CnfFormula(N, tuple(clauses), None if hidden is None else tuple(hidden.tolist()))


# --------------------------------------------------------------------------
# file formats


def read_dimacs(path) -> CnfFormula:
    with open(path) as fh:
        return parse_dimacs(fh.read())


def parse_dimacs(text: str) -> CnfFormula:
    """Parse DIMACS CNF text.  A ``c planted ...`` comment is restored."""
    num_vars = num_clauses = None
    planted = None
    tokens: list[int] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line[0] in "c%":
            if line.startswith("c planted"):
                planted = tuple(int(t) > 0 for t in line.split()[2:])
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"bad problem line: {line!r}")
            num_vars, num_clauses = int(parts[2]), int(parts[3])
            continue
        tokens.extend(int(t) for t in line.split())
    if num_vars is None:
        raise ValueError("missing 'p cnf' header")
    clauses, cur = [], []
    for t in tokens:
        if t == 0:
            clauses.append(tuple(cur))
            cur = []
        else:
            cur.append(t)
    if cur:
        clauses.append(tuple(cur))
    if len(clauses) != num_clauses:
        raise ValueError(f"header announces {num_clauses} clauses, found {len(clauses)}")
    return CnfFormula(num_vars, tuple(clauses), planted)


def write_dimacs(formula: CnfFormula, path=None) -> str:
    lines = []
    if formula.planted is not None:
        planted = " ".join(str(i + 1 if b else -(i + 1)) for i, b in enumerate(formula.planted))
        lines.append(f"c planted {planted}")
    lines.append(f"p cnf {formula.num_vars} {formula.num_clauses}")
    lines += [" ".join(str(l) for l in cl) + " 0" for cl in formula.clauses]
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def read_edgelist(path) -> GraphInstance:
    with open(path) as fh:
        return parse_edgelist(fh.read())


def parse_edgelist(text: str) -> GraphInstance:
    """Edge list: ``n m`` header then ``m`` lines ``u v`` (0-indexed)."""
    rows = [
        line.split()
        for line in text.splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not rows or len(rows[0]) != 2:
        raise ValueError("missing 'n m' header")
    n, m = int(rows[0][0]), int(rows[0][1])
    edges = [(int(u), int(v)) for u, v in rows[1:]]
    if len(edges) != m:
        raise ValueError(f"header announces {m} edges, found {len(edges)}")
    return GraphInstance(n, tuple(edges))


def write_edgelist(graph: GraphInstance, path=None) -> str:
    lines = [f"{graph.num_nodes} {graph.num_edges}"] + [f"{u} {v}" for u, v in graph.edges]
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def _iter_assignments(n: int) -> Iterable[np.ndarray]:
    for z in range(2**n):
        yield np.array([(z >> i) & 1 for i in range(n)], dtype=bool)


def brute_force_min(problem: Problem) -> tuple[float, object]:
    """Exhaustive optimum for small SAT / partition instances."""
    best, arg = None, None
    if isinstance(problem, SatProblem):
        candidates = _iter_assignments(problem.n)
    elif isinstance(problem, PartitionProblem):
        if comb(problem.n, problem.half) > 2_000_000:
            raise ValueError("instance too large for enumeration")
        from itertools import combinations

        def gen():
            for S in combinations(range(problem.n), problem.half):
                c = np.zeros(problem.n, dtype=bool)
                c[list(S)] = True
                yield c

        candidates = gen()
    else:
        candidates = range(len(problem.costs))
    for c in candidates:
        v = problem.cost(c)
        if best is None or v < best:
            best, arg = v, c
    return best, arg
