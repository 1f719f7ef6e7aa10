"""Trade matrices and their globally normalized adjacency form."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from tradenet.errors import (
    AllZeroMatrix,
    DataError,
    DuplicateFlow,
    IndexMismatch,
    NegativeValue,
    SelfLoop,
    UnknownCountry,
)


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class CountryIndex:
    """Ordered, unique country labels; the order fixes row/column indexing."""

    names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        for name in names:
            if not isinstance(name, str) or not name:
                raise DataError(f"country labels must be non-empty strings, got {name!r}")
        if len(set(names)) != len(names):
            seen, dupes = set(), []
            for name in names:
                if name in seen:
                    dupes.append(name)
                seen.add(name)
            raise DataError(f"duplicate country labels: {', '.join(dupes)}")
        object.__setattr__(self, "_positions", {name: i for i, name in enumerate(names)})

    @property
    def size(self) -> int:
        return len(self.names)

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __contains__(self, name) -> bool:
        return name in self._positions

    def position(self, name: str) -> int:
        try:
            return self._positions[name]
        except KeyError:
            raise UnknownCountry(f"unknown country {name!r}") from None

    def permuted(self, order: Sequence[int]) -> "CountryIndex":
        """Index whose k-th label is ``names[order[k]]``."""
        return CountryIndex(tuple(self.names[i] for i in order))


def _check_square(values: np.ndarray, countries: CountryIndex, what: str) -> None:
    n = countries.size
    if values.shape != (n, n):
        raise IndexMismatch(f"{what} has shape {values.shape}, expected ({n}, {n})")
    if not np.all(np.isfinite(values)):
        raise DataError(f"{what} contains non-finite entries")
    if np.any(values < 0):
        i, j = map(int, np.argwhere(values < 0)[0])
        raise NegativeValue(
            f"{what} entry ({countries.names[i]!r}, {countries.names[j]!r}) is negative"
        )
    diag = np.diagonal(values)
    if np.any(diag != 0):
        i = int(np.flatnonzero(diag)[0])
        raise SelfLoop(f"{what} has nonzero diagonal entry for {countries.names[i]!r}")


@dataclass(frozen=True, eq=False)
class TradeMatrix:
    """Raw bilateral export values for one year.

    ``flows[i, j]`` is the value exported from country ``i`` to country ``j``.
    """

    year: int
    countries: CountryIndex
    flows: np.ndarray

    def __post_init__(self):
        flows = _frozen(self.flows)
        _check_square(flows, self.countries, "trade matrix")
        object.__setattr__(self, "flows", flows)

    def flow(self, exporter: str, importer: str) -> float:
        return float(self.flows[self.countries.position(exporter), self.countries.position(importer)])

    def scaled(self, factor: float) -> "TradeMatrix":
        return TradeMatrix(self.year, self.countries, self.flows * factor)

    def permuted(self, order: Sequence[int]) -> "TradeMatrix":
        order = list(order)
        return TradeMatrix(self.year, self.countries.permuted(order), self.flows[np.ix_(order, order)])


@dataclass(frozen=True, eq=False)
class AdjacencyMatrix:
    """Trade network normalized so that all weights sum to one."""

    year: int
    countries: CountryIndex
    weights: np.ndarray

    def __post_init__(self):
        weights = _frozen(self.weights)
        _check_square(weights, self.countries, "adjacency matrix")
        total = math.fsum(weights.ravel())
        if abs(total - 1.0) > 1e-12:
            raise DataError(f"adjacency weights sum to {total!r}, expected 1")
        object.__setattr__(self, "weights", weights)

    @property
    def size(self) -> int:
        return self.countries.size

    def weight(self, exporter: str, importer: str) -> float:
        return float(self.weights[self.countries.position(exporter), self.countries.position(importer)])

    def transpose(self) -> "AdjacencyMatrix":
        return AdjacencyMatrix(self.year, self.countries, self.weights.T)

    def permuted(self, order: Sequence[int]) -> "AdjacencyMatrix":
        order = list(order)
        return AdjacencyMatrix(self.year, self.countries.permuted(order), self.weights[np.ix_(order, order)])


def build_trade_matrix(
    records: Iterable[tuple[str, str, float]],
    countries: CountryIndex,
    year: int,
) -> TradeMatrix:
    """Place ``(exporter, importer, value)`` records into a dense matrix.

    Pairs that never appear are zero. A record with exporter == importer is
    accepted only with a zero value.
    """
    n = countries.size
    flows = np.zeros((n, n))
    seen: set[tuple[int, int]] = set()
    for exporter, importer, value in records:
        i = countries.position(exporter)
        j = countries.position(importer)
        value = float(value)
        if not math.isfinite(value):
            raise DataError(f"non-finite flow {exporter!r} -> {importer!r}")
        if value < 0:
            raise NegativeValue(f"negative flow {exporter!r} -> {importer!r}: {value!r}")
        if (i, j) in seen:
            raise DuplicateFlow(f"duplicate flow {exporter!r} -> {importer!r} in {year}")
        seen.add((i, j))
        if i == j:
            if value > 0:
                raise SelfLoop(f"self-flow for {exporter!r} in {year}: {value!r}")
            continue
        flows[i, j] = value
    return TradeMatrix(year, countries, flows)


def normalize(t: TradeMatrix) -> AdjacencyMatrix:
    """Divide every flow by the grand total.

    The total is an exactly rounded sum so the result does not depend on the
    order of countries.
    """
    total = math.fsum(t.flows.ravel())
    if total <= 0:
        raise AllZeroMatrix(f"trade matrix for {t.year} has no positive entry")
    return AdjacencyMatrix(t.year, t.countries, t.flows / total)
