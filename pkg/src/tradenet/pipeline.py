"""Yearly centralities -> per-country time series -> correlation studies."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Optional, Sequence

from tradenet import centrality
from tradenet.centrality import SolverOptions
from tradenet.errors import (
    DataError,
    DuplicateYear,
    IndexMismatch,
    MissingValue,
    MissingYearValue,
    NonPositiveGDP,
    TooFewSamples,
    TradenetError,
    UnknownCountry,
    ZeroVariance,
)
from tradenet.netcore import AdjacencyMatrix, CountryIndex
from tradenet.stats import (
    DEFAULT_ALPHA,
    CorrelationClass,
    CorrelationResult,
    GroupAssignment,
    SignificantRate,
    TendencyTable,
    classify,
    pearson,
    significant_rate,
    tendency_counts,
)

STUDY_KINDS = ("inout", "gdp_vs_centrality")


@dataclass(frozen=True)
class CountrySeries:
    """One quantity for one country, as (year, value) points sorted by year."""

    country: str
    quantity: str
    points: tuple[tuple[int, float], ...]

    def __post_init__(self):
        points = tuple((int(y), float(v)) for y, v in self.points)
        for (y0, _), (y1, _) in zip(points, points[1:]):
            if y1 == y0:
                raise DuplicateYear(f"{self.country!r} has two {self.quantity} values for {y0}")
            if y1 < y0:
                raise DataError(f"{self.country!r} {self.quantity} points are not sorted by year")
        for y, v in points:
            if not math.isfinite(v):
                raise DataError(f"{self.country!r} {self.quantity} value for {y} is not finite")
            if self.quantity == "weighted_gdp" and not 0.0 <= v <= 1.0:
                raise DataError(f"weighted GDP for {self.country!r} in {y} outside [0, 1]")
        object.__setattr__(self, "points", points)

    @classmethod
    def from_pairs(cls, country: str, quantity: str, pairs: Iterable[tuple[int, float]]) -> "CountrySeries":
        return cls(country, quantity, tuple(sorted(pairs, key=lambda p: p[0])))

    @property
    def years(self) -> tuple[int, ...]:
        return tuple(y for y, _ in self.points)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(v for _, v in self.points)

    def as_dict(self) -> dict[int, float]:
        return dict(self.points)


Panel = Mapping[str, CountrySeries]


def weighted_gdp(gdp_panel: Panel, countries: Optional[Iterable[str]] = None) -> dict[str, CountrySeries]:
    """Each country's GDP as a share of the indexed countries' total, per year.

    Only the listed countries (default: every country in the panel) enter
    the denominator.
    """
    names = list(gdp_panel) if countries is None else list(countries)
    for name in names:
        if name not in gdp_panel:
            raise MissingValue(f"no GDP series for {name!r}")
    tables = {name: gdp_panel[name].as_dict() for name in names}
    years = sorted(set().union(*(t.keys() for t in tables.values()))) if tables else []
    shares: dict[str, list[tuple[int, float]]] = {name: [] for name in names}
    for year in years:
        row = []
        for name in names:
            if year not in tables[name]:
                raise MissingYearValue(f"{name!r} has no GDP value for {year}")
            value = tables[name][year]
            if not value > 0:
                raise NonPositiveGDP(f"GDP for {name!r} in {year} is {value!r}")
            row.append(value)
        total = math.fsum(row)
        for name, value in zip(names, row):
            shares[name].append((year, value / total))
    return {name: CountrySeries(name, "weighted_gdp", tuple(pts)) for name, pts in shares.items()}


def assign_groups(per_capita: Mapping[str, float], countries: Iterable[str]) -> GroupAssignment:
    """Top half by GDP per capita (rounded up) -> group 1, the rest -> group 2.

    Ties order by ascending label.
    """
    names = list(countries)
    missing = [c for c in names if c not in per_capita]
    if missing:
        raise MissingValue(f"no GDP per capita for: {', '.join(missing)}")
    ranked = sorted(names, key=lambda c: (-float(per_capita[c]), c))
    cut = math.ceil(len(ranked) / 2)
    return GroupAssignment({c: (1 if k < cut else 2) for k, c in enumerate(ranked)})


def _check_yearly(yearly: Sequence[AdjacencyMatrix]) -> CountryIndex:
    if not yearly:
        raise TooFewSamples("no yearly networks supplied")
    index = yearly[0].countries
    seen = set()
    for a in yearly:
        if a.countries != index:
            raise IndexMismatch(f"network for {a.year} uses a different country index")
        if a.year in seen:
            raise DuplicateYear(f"two networks supplied for {a.year}")
        seen.add(a.year)
    return index


def parallel_map(fn: Callable, items: Sequence, workers: Optional[int]) -> list:
    if workers and workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def centrality_series(
    yearly: Sequence[AdjacencyMatrix],
    measure: str,
    direction: str,
    opts: SolverOptions = SolverOptions(),
    workers: Optional[int] = None,
) -> dict[str, CountrySeries]:
    """Per-country time series of one centrality measure.

    Solver errors are re-raised with the offending year prepended.
    """
    index = _check_yearly(yearly)

    def one(a: AdjacencyMatrix):
        try:
            return a.year, centrality.compute(a, measure, direction, opts)
        except TradenetError as exc:
            raise exc.add_context(f"year {a.year}")

    computed = sorted(parallel_map(one, list(yearly), workers), key=lambda item: item[0])
    quantity = f"{measure}_{direction}"
    return {
        name: CountrySeries(name, quantity, tuple((year, float(vec.values[i])) for year, vec in computed))
        for i, name in enumerate(index.names)
    }


@dataclass(frozen=True)
class CountryRow:
    """Per-country outcome. In/out studies fill ``result``; GDP studies the rest."""

    country: str
    group: Optional[int]
    result: Optional[CorrelationResult] = None
    in_result: Optional[CorrelationResult] = None
    out_result: Optional[CorrelationResult] = None
    cls: Optional[CorrelationClass] = None


@dataclass(frozen=True)
class Skip:
    country: str
    reason: str


@dataclass(frozen=True)
class StudyReport:
    kind: str
    measure: str
    alpha: float
    years: Optional[tuple[int, int]]
    rows: tuple[CountryRow, ...]
    skipped: tuple[Skip, ...] = ()
    rates: Mapping[str, SignificantRate] = field(default_factory=dict)
    tendency: Optional[TendencyTable] = None
    compare: str = "abs"

    def countries(self) -> tuple[str, ...]:
        return tuple(r.country for r in self.rows) + tuple(s.country for s in self.skipped)

    def row(self, country: str) -> CountryRow:
        for r in self.rows:
            if r.country == country:
                return r
        raise UnknownCountry(f"{country!r} has no result in this report")


def inout_report(
    results: Sequence[tuple[str, CorrelationResult]],
    groups: GroupAssignment,
    measure: str,
    alpha: float = DEFAULT_ALPHA,
    years: Optional[tuple[int, int]] = None,
    skipped: Sequence[Skip] = (),
) -> StudyReport:
    """Aggregate per-country in-vs-out results into a report."""
    rows = tuple(CountryRow(c, groups.group_of(c), result=r) for c, r in results)
    rates = {"inout": significant_rate(results, groups)} if rows else {}
    return StudyReport("inout", measure, alpha, years, rows, tuple(skipped), rates)


def gdp_report(
    results: Sequence[tuple[str, CorrelationResult, CorrelationResult]],
    groups: GroupAssignment,
    measure: str,
    alpha: float = DEFAULT_ALPHA,
    compare: str = "abs",
    years: Optional[tuple[int, int]] = None,
    skipped: Sequence[Skip] = (),
) -> StudyReport:
    """Aggregate per-country (GDP~in, GDP~out) results, classes and rates."""
    rows = tuple(
        CountryRow(c, groups.group_of(c), in_result=r_in, out_result=r_out, cls=classify(r_in, r_out, compare))
        for c, r_in, r_out in results
    )
    rates: dict[str, SignificantRate] = {}
    tendency = None
    if rows:
        rates["in"] = significant_rate([(r.country, r.in_result) for r in rows], groups)
        rates["out"] = significant_rate([(r.country, r.out_result) for r in rows], groups)
        tendency = tendency_counts([(r.country, r.cls) for r in rows], groups)
    return StudyReport("gdp_vs_centrality", measure, alpha, years, rows, tuple(skipped), rates, tendency, compare)


def _year_span(years: Iterable[int]) -> tuple[int, int]:
    years = sorted(years)
    return years[0], years[-1]


def _paired(a: CountrySeries, b: CountrySeries) -> tuple[list[float], list[float]]:
    da, db = a.as_dict(), b.as_dict()
    common = sorted(set(da) & set(db))
    return [da[y] for y in common], [db[y] for y in common]


def _skip_reason(exc: TradenetError) -> str:
    return f"{exc.code}: {exc}"


def inout_study(
    yearly: Sequence[AdjacencyMatrix],
    measure: str,
    opts: SolverOptions,
    groups: GroupAssignment,
    alpha: float = DEFAULT_ALPHA,
    min_years: int = 3,
    workers: Optional[int] = None,
) -> StudyReport:
    """Correlate each country's in-centrality series with its out-centrality series."""
    index = _check_yearly(yearly)
    if len(yearly) < min_years:
        raise TooFewSamples(f"need at least {min_years} years, got {len(yearly)}")
    groups.check_covers(index)
    ins = centrality_series(yearly, measure, "in", opts, workers)
    outs = centrality_series(yearly, measure, "out", opts, workers)
    results, skipped = [], []
    for name in index:
        try:
            results.append((name, pearson(*_paired(ins[name], outs[name]), alpha=alpha)))
        except (ZeroVariance, TooFewSamples) as exc:
            skipped.append(Skip(name, _skip_reason(exc)))
    span = _year_span(a.year for a in yearly)
    return inout_report(results, groups, measure, alpha, span, skipped)


def gdp_study(
    yearly: Sequence[AdjacencyMatrix],
    gdp_panel: Panel,
    measure: str,
    opts: SolverOptions,
    groups: GroupAssignment,
    alpha: float = DEFAULT_ALPHA,
    compare: str = "abs",
    min_years: int = 3,
    workers: Optional[int] = None,
) -> StudyReport:
    """Correlate weighted GDP with in- and out-centrality for every country.

    ``gdp_panel`` holds nominal GDP; shares are taken over the network's
    countries only. Correlations use the years both series cover.
    """
    index = _check_yearly(yearly)
    groups.check_covers(index)
    shares = weighted_gdp(gdp_panel, index.names)
    trade_years = {a.year for a in yearly}
    common = sorted(trade_years & set(next(iter(shares.values())).years)) if shares else []
    if len(common) < min_years:
        raise TooFewSamples(
            f"trade and GDP data share {len(common)} years; at least {min_years} required"
        )
    ins = centrality_series(yearly, measure, "in", opts, workers)
    outs = centrality_series(yearly, measure, "out", opts, workers)
    results, skipped = [], []
    for name in index:
        try:
            r_in = pearson(*_paired(shares[name], ins[name]), alpha=alpha)
            r_out = pearson(*_paired(shares[name], outs[name]), alpha=alpha)
        except (ZeroVariance, TooFewSamples) as exc:
            skipped.append(Skip(name, _skip_reason(exc)))
            continue
        results.append((name, r_in, r_out))
    return gdp_report(results, groups, measure, alpha, compare, _year_span(common), skipped)


def subset_report(report: StudyReport, countries: Iterable[str]) -> StudyReport:
    """Restrict a report to the given countries; group tables are dropped."""
    wanted = list(countries)
    known = set(report.countries())
    unknown = [c for c in wanted if c not in known]
    if unknown:
        raise UnknownCountry(f"not in report: {', '.join(unknown)}")
    keep = set(wanted)
    return replace(
        report,
        rows=tuple(r for r in report.rows if r.country in keep),
        skipped=tuple(s for s in report.skipped if s.country in keep),
        rates={},
        tendency=None,
    )
