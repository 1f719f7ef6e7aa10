"""Degree, eigenvector and random-walk centralities of a trade network.

All six vectors (three measures, in and out) are scaled to sum to one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse.csgraph import connected_components

from tradenet.errors import (
    DanglingNode,
    DataError,
    NoConvergence,
    ReducibleNetwork,
    ZeroLimit,
)
from tradenet.netcore import AdjacencyMatrix, CountryIndex

MEASURES = ("degree", "eigenvector", "randomwalk")
DIRECTIONS = ("in", "out")
DANGLING_POLICIES = ("error", "uniform")
WALK_KINDS = ("in_walk", "out_walk")


@dataclass(frozen=True)
class SolverOptions:
    """Knobs for the iterative eigenvector solver and dangling-node handling.

    ``tolerance`` bounds the L1 change between successive sweeps.
    """

    tolerance: float = 1e-12
    max_iterations: int = 100_000
    initial_vector: str = "uniform"
    dangling_policy: str = "error"

    def __post_init__(self):
        if not self.tolerance > 0:
            raise DataError(f"tolerance must be positive, got {self.tolerance!r}")
        if int(self.max_iterations) < 1:
            raise DataError(f"max_iterations must be >= 1, got {self.max_iterations!r}")
        if self.initial_vector != "uniform":
            raise DataError(f"unsupported initial vector {self.initial_vector!r}")
        if self.dangling_policy not in DANGLING_POLICIES:
            raise DataError(f"unknown dangling policy {self.dangling_policy!r}")


@dataclass(frozen=True, eq=False)
class CentralityVector:
    measure: str
    direction: str
    year: int
    countries: CountryIndex
    values: np.ndarray
    leading_eigenvalue: Optional[float] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __getitem__(self, country: str) -> float:
        return float(self.values[self.countries.position(country)])

    def as_dict(self) -> dict[str, float]:
        return {name: float(v) for name, v in zip(self.countries.names, self.values)}


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Column-stochastic matrix of a value-flow random walk."""

    kind: str
    countries: CountryIndex
    entries: np.ndarray


def _row_sums(w: np.ndarray) -> np.ndarray:
    # fsum is exactly rounded, so sums do not depend on column order
    return np.array([math.fsum(row) for row in w])


def degree_out(a: AdjacencyMatrix) -> CentralityVector:
    """Share of world exports: row sums of the adjacency matrix."""
    return CentralityVector("degree", "out", a.year, a.countries, _row_sums(a.weights))


def degree_in(a: AdjacencyMatrix) -> CentralityVector:
    """Share of world imports: column sums of the adjacency matrix."""
    return CentralityVector("degree", "in", a.year, a.countries, _row_sums(a.weights.T))


def _components(pattern: np.ndarray) -> tuple[int, np.ndarray]:
    return connected_components(pattern.astype(np.int8), directed=True, connection="strong")


def _power_iteration(w: np.ndarray, opts: SolverOptions, countries: CountryIndex, year: int):
    n = w.shape[0]
    ncomp, _ = _components(w > 0)
    if ncomp == n and not np.any(np.diagonal(w) > 0):
        # no cycles: the matrix is nilpotent and every iterate eventually vanishes
        raise ZeroLimit(f"network for {year} has no cycles; leading eigenvalue is 0")

    # A shift by a positive multiple of I keeps the eigenvectors but makes the
    # leading eigenvalue strictly dominant, so periodic networks converge too.
    shift = math.fsum(w.ravel()) / n
    x = np.full(n, 1.0 / n)
    change = math.inf
    for _ in range(int(opts.max_iterations)):
        y = w @ x
        if not y.sum() > 0:
            raise ZeroLimit(f"power iteration for {year} collapsed to the zero vector")
        y += shift * x
        y /= y.sum()
        change = float(np.abs(y - x).sum())
        x = y
        if change <= opts.tolerance:
            break
    else:
        raise NoConvergence(
            f"eigenvector iteration for {year} did not converge after "
            f"{opts.max_iterations} sweeps (last L1 change {change:.3e})",
            last_iterate=x,
            last_change=change,
        )
    x = np.clip(x, 0.0, None)
    x /= math.fsum(x)
    leading = float((w @ x).sum() / x.sum())
    return x, leading


def eigenvector_out(a: AdjacencyMatrix, opts: SolverOptions = SolverOptions()) -> CentralityVector:
    """Dominant eigenvector of ``A``: export weight scaled by partner importance."""
    x, lam = _power_iteration(a.weights, opts, a.countries, a.year)
    return CentralityVector("eigenvector", "out", a.year, a.countries, x, lam)


def eigenvector_in(a: AdjacencyMatrix, opts: SolverOptions = SolverOptions()) -> CentralityVector:
    """Dominant eigenvector of ``A.T``."""
    x, lam = _power_iteration(a.weights.T, opts, a.countries, a.year)
    return CentralityVector("eigenvector", "in", a.year, a.countries, x, lam)


def build_transition(
    a: AdjacencyMatrix,
    kind: str,
    policy: str = "error",
) -> TransitionMatrix:
    """Column-stochastic walk matrix.

    ``in_walk`` is ``A.T @ diag(1 / out_degree)`` and ``out_walk`` is
    ``A @ diag(1 / in_degree)``. With ``policy="uniform"`` a column whose
    degree is zero becomes the uniform column ``1/n``.
    """
    if kind not in WALK_KINDS:
        raise DataError(f"unknown walk kind {kind!r}")
    if policy not in DANGLING_POLICIES:
        raise DataError(f"unknown dangling policy {policy!r}")
    w = a.weights
    n = a.size
    if kind == "in_walk":
        base = w.T
        degrees = _row_sums(w)
    else:
        base = w
        degrees = _row_sums(w.T)

    dangling = np.flatnonzero(degrees == 0)
    if dangling.size and policy == "error":
        names = tuple(a.countries.names[i] for i in dangling)
        side = "out" if kind == "in_walk" else "in"
        raise DanglingNode(
            f"zero {side}-degree in {a.year} for: {', '.join(names)}", countries=names
        )
    safe = np.where(degrees == 0, 1.0, degrees)
    entries = base / safe[None, :]
    if dangling.size:
        entries[:, dangling] = 1.0 / n
    entries.flags.writeable = False
    return TransitionMatrix(kind, a.countries, entries)


def _stationary(m: TransitionMatrix, year: int) -> np.ndarray:
    entries = m.entries
    n = entries.shape[0]
    ncomp, labels = _components(entries > 0)
    if ncomp > 1:
        groups = tuple(
            tuple(m.countries.names[i] for i in np.flatnonzero(labels == c)) for c in range(ncomp)
        )
        shown = "; ".join("{" + ", ".join(g) + "}" for g in groups)
        raise ReducibleNetwork(
            f"network for {year} is not strongly connected ({ncomp} components: {shown})",
            components=groups,
        )
    system = entries - np.eye(n)
    system[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    p = np.linalg.solve(system, rhs)
    p = np.clip(p, 0.0, None)
    return p / math.fsum(p)


def randomwalk_in(a: AdjacencyMatrix, opts: SolverOptions = SolverOptions()) -> CentralityVector:
    """Stationary share of value arriving at each country (import side)."""
    m = build_transition(a, "in_walk", opts.dangling_policy)
    return CentralityVector("randomwalk", "in", a.year, a.countries, _stationary(m, a.year))


def randomwalk_out(a: AdjacencyMatrix, opts: SolverOptions = SolverOptions()) -> CentralityVector:
    """Stationary vector of the export-side walk ``A @ diag(1 / in_degree)``."""
    m = build_transition(a, "out_walk", opts.dangling_policy)
    return CentralityVector("randomwalk", "out", a.year, a.countries, _stationary(m, a.year))


_DISPATCH = {
    ("degree", "in"): lambda a, opts: degree_in(a),
    ("degree", "out"): lambda a, opts: degree_out(a),
    ("eigenvector", "in"): eigenvector_in,
    ("eigenvector", "out"): eigenvector_out,
    ("randomwalk", "in"): randomwalk_in,
    ("randomwalk", "out"): randomwalk_out,
}


def compute(
    a: AdjacencyMatrix,
    measure: str,
    direction: str,
    opts: SolverOptions = SolverOptions(),
) -> CentralityVector:
    try:
        fn = _DISPATCH[(measure, direction)]
    except KeyError:
        raise DataError(f"unknown centrality {measure!r}/{direction!r}") from None
    return fn(a, opts)
