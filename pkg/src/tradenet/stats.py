"""Pearson tests, group significant rates and in/out correlation classes."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from tradenet.errors import (
    DataError,
    DomainError,
    EmptyInput,
    LengthMismatch,
    MissingGroup,
    TooFewSamples,
    ZeroVariance,
)
from tradenet.special import betainc

GROUPS = (1, 2)
COMPARE_RULES = ("abs", "signed")
DEFAULT_ALPHA = 0.05
# relative spread below which a series is treated as constant
_FLAT_SPREAD = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    n: int
    t_stat: float
    p: float
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        if not abs(self.r) <= 1.0:
            raise DomainError(f"correlation {self.r!r} outside [-1, 1]")
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"p-value {self.p!r} outside [0, 1]")
        if self.n < 3:
            raise DomainError(f"sample size {self.n} < 3")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"significance level {self.alpha!r} outside (0, 1)")

    @property
    def significant(self) -> bool:
        return self.p < self.alpha

    @classmethod
    def from_printed(cls, r: float, p: float, n: int = 31, alpha: float = DEFAULT_ALPHA) -> "CorrelationResult":
        """Wrap a tabulated (r, p) pair without recomputing p."""
        t, _ = p_value(r, n)
        return cls(float(r), int(n), t, float(p), alpha)


def p_value(r: float, n: int) -> tuple[float, float]:
    """Two-sided Student-t test of a Pearson correlation with ``n - 2`` dof.

    Returns ``(t_stat, p)``.
    """
    if not abs(r) <= 1.0:
        raise DomainError(f"correlation {r!r} outside [-1, 1]")
    if n < 3:
        raise DomainError(f"sample size {n} < 3")
    df = n - 2
    if abs(r) == 1.0:
        return math.copysign(math.inf, r), 0.0
    one_minus_r2 = (1.0 - r) * (1.0 + r)
    t = r * math.sqrt(df / one_minus_r2)
    # df / (df + t^2) simplifies to 1 - r^2
    p = betainc(df / 2.0, 0.5, one_minus_r2, r * r)
    return t, min(max(p, 0.0), 1.0)


def _is_flat(v: np.ndarray) -> bool:
    spread = float(v.max() - v.min())
    return spread <= _FLAT_SPREAD * float(np.abs(v).max())


def pearson(x: Sequence[float], y: Sequence[float], alpha: float = DEFAULT_ALPHA) -> CorrelationResult:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"series lengths differ ({x.size} vs {y.size})")
    n = x.size
    if n < 3:
        raise TooFewSamples(f"need at least 3 paired samples, got {n}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DataError("series contain non-finite values")
    if _is_flat(x) or _is_flat(y):
        raise ZeroVariance("series has zero variance; correlation undefined")
    dx = x - math.fsum(x) / n
    dy = y - math.fsum(y) / n
    sxy = math.fsum(dx * dy)
    sxx = math.fsum(dx * dx)
    syy = math.fsum(dy * dy)
    r = sxy / math.sqrt(sxx * syy)
    r = min(max(r, -1.0), 1.0)
    t, p = p_value(r, n)
    return CorrelationResult(r, n, t, p, alpha)


@dataclass(frozen=True)
class GroupAssignment:
    """Country -> economic group (1 = higher GDP per capita, 2 = lower)."""

    mapping: Mapping[str, int]

    def __post_init__(self):
        mapping = dict(self.mapping)
        for country, group in mapping.items():
            if group not in GROUPS:
                raise DataError(f"group for {country!r} must be 1 or 2, got {group!r}")
        object.__setattr__(self, "mapping", MappingProxyType(mapping))

    def __eq__(self, other):
        if not isinstance(other, GroupAssignment):
            return NotImplemented
        return dict(self.mapping) == dict(other.mapping)

    def __hash__(self):
        return hash(frozenset(self.mapping.items()))

    def __contains__(self, country) -> bool:
        return country in self.mapping

    def group_of(self, country: str) -> int:
        try:
            return self.mapping[country]
        except KeyError:
            raise MissingGroup(f"no group assigned to {country!r}") from None

    def members(self, group: int) -> tuple[str, ...]:
        return tuple(c for c, g in self.mapping.items() if g == group)

    @property
    def sizes(self) -> dict[int, int]:
        return {g: sum(1 for v in self.mapping.values() if v == g) for g in GROUPS}

    def check_covers(self, countries: Iterable[str]) -> None:
        missing = [c for c in countries if c not in self.mapping]
        if missing:
            raise MissingGroup(f"no group assigned to: {', '.join(missing)}")


class CorrelationClass(enum.Enum):
    ONLY_IN = "OnlyInSignificant"
    ONLY_OUT = "OnlyOutSignificant"
    BOTH_IN_GREATER = "BothInGreater"
    BOTH_OUT_GREATER = "BothOutGreater"
    NEITHER = "NeitherSignificant"

    def __str__(self) -> str:
        return self.value


def classify(
    in_result: CorrelationResult,
    out_result: CorrelationResult,
    compare: str = "abs",
    tie_tolerance: float = 1e-12,
) -> CorrelationClass:
    """Place a country's (GDP~in, GDP~out) pair into one of five classes.

    When both are significant, ``compare="abs"`` ranks by ``|r|`` and
    ``compare="signed"`` by ``r``; near-ties go to the in side.
    """
    if compare not in COMPARE_RULES:
        raise DataError(f"unknown comparison rule {compare!r}")
    if in_result.alpha != out_result.alpha:
        raise DataError("in and out results use different significance levels")
    sig_in, sig_out = in_result.significant, out_result.significant
    if sig_in and not sig_out:
        return CorrelationClass.ONLY_IN
    if sig_out and not sig_in:
        return CorrelationClass.ONLY_OUT
    if not sig_in:
        return CorrelationClass.NEITHER
    r_in, r_out = in_result.r, out_result.r
    if compare == "abs":
        r_in, r_out = abs(r_in), abs(r_out)
    if r_in >= r_out - tie_tolerance:
        return CorrelationClass.BOTH_IN_GREATER
    return CorrelationClass.BOTH_OUT_GREATER


@dataclass(frozen=True)
class RateCell:
    significant: int
    total: int

    @property
    def rate(self) -> float:
        return self.significant / self.total if self.total else math.nan


@dataclass(frozen=True)
class SignificantRate:
    per_group: Mapping[int, RateCell]
    total: RateCell

    def rate(self, group: int | None = None) -> float:
        return (self.total if group is None else self.per_group[group]).rate


def significant_rate(
    results: Iterable[tuple[str, CorrelationResult]],
    groups: GroupAssignment,
) -> SignificantRate:
    """Fraction of countries per group whose test is significant.

    Significant negative correlations count as significant.
    """
    sig = {g: 0 for g in GROUPS}
    tot = {g: 0 for g in GROUPS}
    for country, result in results:
        g = groups.group_of(country)
        tot[g] += 1
        sig[g] += bool(result.significant)
    if not sum(tot.values()):
        raise EmptyInput("no correlation results to aggregate")
    per_group = {g: RateCell(sig[g], tot[g]) for g in GROUPS if tot[g]}
    total = RateCell(sum(sig.values()), sum(tot.values()))
    return SignificantRate(per_group, total)


@dataclass(frozen=True)
class TendencyTable:
    counts: Mapping[int, Mapping[CorrelationClass, int]] = field(default_factory=dict)

    def count(self, group: int, cls: CorrelationClass) -> int:
        return self.counts.get(group, {}).get(cls, 0)

    def in_tendency(self, group: int) -> int:
        return self.count(group, CorrelationClass.ONLY_IN) + self.count(group, CorrelationClass.BOTH_IN_GREATER)

    def out_tendency(self, group: int) -> int:
        return self.count(group, CorrelationClass.ONLY_OUT) + self.count(group, CorrelationClass.BOTH_OUT_GREATER)


def tendency_counts(
    classes: Iterable[tuple[str, CorrelationClass]],
    groups: GroupAssignment,
) -> TendencyTable:
    counts = {g: {c: 0 for c in CorrelationClass} for g in GROUPS}
    for country, cls in classes:
        counts[groups.group_of(country)][cls] += 1
    return TendencyTable(counts)
