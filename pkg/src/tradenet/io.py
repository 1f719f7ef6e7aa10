"""CSV readers for trade, GDP, grouping and fixture files; report writers.

All inputs are UTF-8, comma-delimited, with a header on the first line.
Parsers reject malformed input and report the offending line number.
"""

from __future__ import annotations

import csv
import json
import math
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Iterator, Optional, Sequence, Union

from tradenet import __version__
from tradenet.centrality import CentralityVector
from tradenet.errors import (
    DataError,
    DomainError,
    DuplicateCountry,
    DuplicateFlow,
    DuplicateYear,
    InvalidGroup,
    IoFailure,
    LabelMismatch,
    MalformedRow,
    NegativeValue,
    NonPositiveValue,
    SelfLoop,
    TradenetError,
)
from tradenet.netcore import CountryIndex, TradeMatrix, build_trade_matrix
from tradenet.pipeline import (
    CountryRow,
    CountrySeries,
    Skip,
    StudyReport,
    gdp_report,
    inout_report,
)
from tradenet.stats import (
    DEFAULT_ALPHA,
    GROUPS,
    CorrelationClass,
    CorrelationResult,
    GroupAssignment,
    RateCell,
    SignificantRate,
    TendencyTable,
)

PathLike = Union[str, os.PathLike]

_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_INTEGER = re.compile(r"^[+-]?\d+$")


def _rows(path: PathLike, expected: Sequence[str] | None = None) -> Iterator[tuple[int, list[str]]]:
    """Yield ``(line_number, cells)`` for data rows, after checking the header."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"{path}: {exc.strerror or exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRow(f"{path}: empty file, expected a header line") from None
        header = [h.strip() for h in header]
        if expected is not None and header != list(expected):
            raise MalformedRow(f"{path}: line 1: expected header {','.join(expected)!r}, got {','.join(header)!r}")
        yield 1, header
        for cells in reader:
            if not cells or all(not c.strip() for c in cells):
                continue
            yield reader.line_num, [c.strip() for c in cells]


def _number(text: str, where: str) -> float:
    if not _NUMBER.match(text):
        raise MalformedRow(f"{where}: cannot parse number {text!r}")
    return float(text)


def _integer(text: str, where: str) -> int:
    if not _INTEGER.match(text):
        raise MalformedRow(f"{where}: cannot parse integer {text!r}")
    return int(text)


def _label(text: str, where: str) -> str:
    if not text:
        raise MalformedRow(f"{where}: empty country label")
    return text


def _arity(cells: list[str], n: int, where: str) -> None:
    if len(cells) != n:
        raise MalformedRow(f"{where}: expected {n} fields, got {len(cells)}")


# --- trade tables -----------------------------------------------------------

TRADE_LONG_HEADER = ("year", "exporter", "importer", "value")


def parse_trade_long(path: PathLike) -> list[TradeMatrix]:
    """One matrix per year from ``year,exporter,importer,value`` rows.

    Every matrix shares the index formed by the sorted union of all labels.
    """
    by_year: dict[int, list[tuple[str, str, float]]] = {}
    seen: set[tuple[int, str, str]] = set()
    labels: set[str] = set()
    rows = _rows(path, TRADE_LONG_HEADER)
    next(rows)
    for line, cells in rows:
        where = f"{path}: line {line}"
        _arity(cells, 4, where)
        year = _integer(cells[0], where)
        exporter = _label(cells[1], where)
        importer = _label(cells[2], where)
        value = _number(cells[3], where)
        if value < 0:
            raise NegativeValue(f"{where}: negative flow {value!r}")
        if exporter == importer and value > 0:
            raise SelfLoop(f"{where}: self-flow for {exporter!r}")
        key = (year, exporter, importer)
        if key in seen:
            raise DuplicateFlow(f"{where}: duplicate flow {exporter!r} -> {importer!r} in {year}")
        seen.add(key)
        labels.update((exporter, importer))
        by_year.setdefault(year, []).append((exporter, importer, value))
    index = CountryIndex(tuple(sorted(labels)))
    return [build_trade_matrix(by_year[y], index, y) for y in sorted(by_year)]


def parse_trade_wide(path: PathLike, year: int) -> TradeMatrix:
    """Square grid: importers across the header, one exporter per row.

    The header's column order defines the country index.
    """
    rows = _rows(path)
    _, header = next(rows)
    if header[0] not in ("", "exporter"):
        raise MalformedRow(f"{path}: line 1: first header cell must be empty or 'exporter'")
    columns = [_label(c, f"{path}: line 1") for c in header[1:]]
    if len(set(columns)) != len(columns):
        raise DuplicateCountry(f"{path}: line 1: repeated importer label")
    body: dict[str, tuple[int, list[float]]] = {}
    for line, cells in rows:
        where = f"{path}: line {line}"
        _arity(cells, len(columns) + 1, where)
        exporter = _label(cells[0], where)
        if exporter in body:
            raise DuplicateCountry(f"{where}: repeated exporter row {exporter!r}")
        body[exporter] = (line, [_number(c, where) for c in cells[1:]])
    if set(body) != set(columns):
        only_rows = sorted(set(body) - set(columns))
        only_cols = sorted(set(columns) - set(body))
        raise LabelMismatch(
            f"{path}: row labels and column labels differ "
            f"(rows only: {only_rows}, columns only: {only_cols})"
        )
    index = CountryIndex(tuple(columns))
    records = []
    for exporter, (line, values) in body.items():
        for importer, value in zip(columns, values):
            where = f"{path}: line {line}"
            if value < 0:
                raise NegativeValue(f"{where}: negative flow {exporter!r} -> {importer!r}")
            if exporter == importer and value > 0:
                raise SelfLoop(f"{where}: self-flow for {exporter!r}")
            records.append((exporter, importer, value))
    return build_trade_matrix(records, index, year)


def parse_trade_dir(path: PathLike) -> list[TradeMatrix]:
    """Directory of wide tables named ``<year>.csv``."""
    files = sorted(p for p in Path(path).iterdir() if p.suffix == ".csv" and _INTEGER.match(p.stem))
    if not files:
        raise DataError(f"{path}: no <year>.csv files found")
    matrices = [parse_trade_wide(p, int(p.stem)) for p in files]
    index = matrices[0].countries
    for m in matrices[1:]:
        if set(m.countries.names) != set(index.names):
            raise LabelMismatch(f"{path}: {m.year}.csv covers different countries than {matrices[0].year}.csv")
    # re-align every year to the first file's column order
    return [m if m.countries == index else m.permuted([m.countries.position(c) for c in index]) for m in matrices]


def load_trade(path: PathLike) -> list[TradeMatrix]:
    return parse_trade_dir(path) if Path(path).is_dir() else parse_trade_long(path)


def open_for_write(path: PathLike):
    try:
        return open(path, "w", newline="", encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"{path}: {exc.strerror or exc}") from exc


def emit_trade_long(matrices: Iterable[TradeMatrix], path: PathLike) -> None:
    """Write every cell, zeros and the diagonal included, so index and year survive."""
    with open_for_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRADE_LONG_HEADER)
        for m in matrices:
            names = m.countries.names
            for i, exporter in enumerate(names):
                for j, importer in enumerate(names):
                    w.writerow([m.year, exporter, importer, repr(float(m.flows[i, j]))])


def emit_trade_wide(t: TradeMatrix, path: PathLike) -> None:
    with open_for_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["exporter", *t.countries.names])
        for i, exporter in enumerate(t.countries.names):
            w.writerow([exporter, *(repr(float(v)) for v in t.flows[i])])


# --- panels, groups, fixtures -----------------------------------------------

SERIES_HEADER = ("country", "year", "value")
SERIES_KINDS = ("gdp", "per_capita")


def parse_series(
    path: PathLike,
    kind: str,
    year: Optional[int] = None,
) -> Union[dict[str, CountrySeries], dict[str, float]]:
    """Read a ``country,year,value`` panel.

    With ``year`` given, return ``{country: value}`` for that year only
    (countries without that year are absent). Otherwise return one sorted
    series per country. GDP values must be positive.
    """
    if kind not in SERIES_KINDS:
        raise DataError(f"unknown series kind {kind!r}")
    points: dict[str, dict[int, float]] = {}
    rows = _rows(path, SERIES_HEADER)
    next(rows)
    for line, cells in rows:
        where = f"{path}: line {line}"
        _arity(cells, 3, where)
        country = _label(cells[0], where)
        y = _integer(cells[1], where)
        value = _number(cells[2], where)
        if kind == "gdp" and not value > 0:
            raise NonPositiveValue(f"{where}: GDP for {country!r} must be positive, got {value!r}")
        bucket = points.setdefault(country, {})
        if y in bucket:
            raise DuplicateYear(f"{where}: second value for {country!r} in {y}")
        bucket[y] = value
    if year is not None:
        return {c: pts[year] for c, pts in points.items() if year in pts}
    return {c: CountrySeries.from_pairs(c, kind, pts.items()) for c, pts in points.items()}


def parse_groups(path: PathLike) -> GroupAssignment:
    mapping: dict[str, int] = {}
    rows = _rows(path, ("country", "group"))
    next(rows)
    for line, cells in rows:
        where = f"{path}: line {line}"
        _arity(cells, 2, where)
        country = _label(cells[0], where)
        if cells[1] not in ("1", "2"):
            raise InvalidGroup(f"{where}: group must be 1 or 2, got {cells[1]!r}")
        if country in mapping:
            raise DuplicateCountry(f"{where}: {country!r} listed twice")
        mapping[country] = int(cells[1])
    return GroupAssignment(mapping)


@dataclass(frozen=True)
class FixtureRow:
    """A tabulated row: either one in-vs-out result or a GDP (in, out) pair."""

    country: str
    group: int
    result: Optional[CorrelationResult] = None
    in_result: Optional[CorrelationResult] = None
    out_result: Optional[CorrelationResult] = None


INOUT_FIXTURE_HEADER = ("country", "correlation", "p", "group")
GDP_FIXTURE_HEADER = ("country", "in_r", "in_p", "out_r", "out_p", "group")


def _printed(r: float, p: float, where: str, n: int, alpha: float) -> CorrelationResult:
    if not abs(r) <= 1 or not 0 <= p <= 1:
        raise DomainError(f"{where}: r={r!r}, p={p!r} outside their domains")
    return CorrelationResult.from_printed(r, p, n, alpha)


def parse_fixture(path: PathLike, alpha: float = DEFAULT_ALPHA, n: int = 31) -> list[FixtureRow]:
    """Load a transcribed correlation table.

    p-values are taken as printed. ``n`` (the number of yearly observations
    behind each test) is not part of the file and defaults to 31.
    """
    rows = _rows(path)
    _, header = next(rows)
    if tuple(header) == INOUT_FIXTURE_HEADER:
        width = 4
    elif tuple(header) == GDP_FIXTURE_HEADER:
        width = 6
    else:
        raise MalformedRow(f"{path}: line 1: unrecognised fixture header {','.join(header)!r}")
    out: list[FixtureRow] = []
    seen: set[str] = set()
    for line, cells in rows:
        where = f"{path}: line {line}"
        _arity(cells, width, where)
        country = _label(cells[0], where)
        if country in seen:
            raise DuplicateCountry(f"{where}: {country!r} listed twice")
        seen.add(country)
        if cells[-1] not in ("1", "2"):
            raise InvalidGroup(f"{where}: group must be 1 or 2, got {cells[-1]!r}")
        group = int(cells[-1])
        nums = [_number(c, where) for c in cells[1:-1]]
        if width == 4:
            out.append(FixtureRow(country, group, result=_printed(nums[0], nums[1], where, n, alpha)))
        else:
            out.append(
                FixtureRow(
                    country,
                    group,
                    in_result=_printed(nums[0], nums[1], where, n, alpha),
                    out_result=_printed(nums[2], nums[3], where, n, alpha),
                )
            )
    return out


def fixture_groups(rows: Iterable[FixtureRow]) -> GroupAssignment:
    return GroupAssignment({r.country: r.group for r in rows})


def fixture_report(
    path: PathLike,
    measure: str,
    alpha: float = DEFAULT_ALPHA,
    compare: str = "abs",
) -> StudyReport:
    """Run a transcribed table through the same aggregation as a live study."""
    rows = parse_fixture(path, alpha)
    groups = fixture_groups(rows)
    if rows and rows[0].result is not None:
        return inout_report([(r.country, r.result) for r in rows], groups, measure, alpha)
    return gdp_report([(r.country, r.in_result, r.out_result) for r in rows], groups, measure, alpha, compare)


# --- reports ----------------------------------------------------------------


def _enc(x: float):
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def _dec(x) -> float:
    return float(x)


def _result_to_dict(r: CorrelationResult) -> dict:
    return {"r": r.r, "n": r.n, "t": _enc(r.t_stat), "p": r.p, "significant": r.significant}


def _result_from_dict(d: dict, alpha: float) -> CorrelationResult:
    return CorrelationResult(_dec(d["r"]), int(d["n"]), _dec(d["t"]), _dec(d["p"]), alpha)


def _rate_to_dict(rate: SignificantRate) -> dict:
    def cell(c: RateCell) -> dict:
        return {"significant": c.significant, "total": c.total, "rate": c.rate}

    return {
        "groups": {str(g): cell(c) for g, c in sorted(rate.per_group.items())},
        "total": cell(rate.total),
    }


def _rate_from_dict(d: dict) -> SignificantRate:
    return SignificantRate(
        {int(g): RateCell(c["significant"], c["total"]) for g, c in d["groups"].items()},
        RateCell(d["total"]["significant"], d["total"]["total"]),
    )


def report_to_dict(report: StudyReport, stamp: Optional[str] = None) -> dict:
    rows = []
    for row in report.rows:
        item: dict = {"country": row.country, "group": row.group}
        if row.result is not None:
            item.update(_result_to_dict(row.result))
        else:
            item["in"] = _result_to_dict(row.in_result)
            item["out"] = _result_to_dict(row.out_result)
            item["class"] = row.cls.value
        rows.append(item)
    tendency = None
    if report.tendency is not None:
        tendency = {}
        for g in GROUPS:
            counts = {c.value: report.tendency.count(g, c) for c in CorrelationClass}
            counts["in_tendency"] = report.tendency.in_tendency(g)
            counts["out_tendency"] = report.tendency.out_tendency(g)
            tendency[str(g)] = counts
    doc = {
        "tool": "tradenet",
        "version": __version__,
        "kind": report.kind,
        "measure": report.measure,
        "alpha": report.alpha,
        "compare": report.compare,
        "years": list(report.years) if report.years else None,
        "rows": rows,
        "skipped": [{"country": s.country, "reason": s.reason} for s in report.skipped],
        "rates": {k: _rate_to_dict(v) for k, v in report.rates.items()},
        "tendency": tendency,
    }
    if stamp is not None:
        doc["stamp"] = stamp
    return doc


def report_from_dict(doc: dict) -> StudyReport:
    try:
        alpha = float(doc["alpha"])
        rows = []
        for item in doc["rows"]:
            if "in" in item:
                rows.append(
                    CountryRow(
                        item["country"],
                        item["group"],
                        in_result=_result_from_dict(item["in"], alpha),
                        out_result=_result_from_dict(item["out"], alpha),
                        cls=CorrelationClass(item["class"]),
                    )
                )
            else:
                rows.append(CountryRow(item["country"], item["group"], result=_result_from_dict(item, alpha)))
        tendency = None
        if doc.get("tendency") is not None:
            tendency = TendencyTable(
                {int(g): {c: counts[c.value] for c in CorrelationClass} for g, counts in doc["tendency"].items()}
            )
        return StudyReport(
            kind=doc["kind"],
            measure=doc["measure"],
            alpha=alpha,
            years=tuple(doc["years"]) if doc.get("years") else None,
            rows=tuple(rows),
            skipped=tuple(Skip(s["country"], s["reason"]) for s in doc["skipped"]),
            rates={k: _rate_from_dict(v) for k, v in doc["rates"].items()},
            tendency=tendency,
            compare=doc.get("compare", "abs"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, TradenetError):
            raise
        raise MalformedRow(f"report document is malformed: {exc!r}") from exc


def load_report(path: PathLike) -> StudyReport:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise IoFailure(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise MalformedRow(f"{path}: line {exc.lineno}: invalid JSON ({exc.msg})") from exc
    return report_from_dict(doc)


def _g17(x: float) -> str:
    return format(x, ".17g")


def _sibling(path: Path, tag: str) -> Path:
    return path.with_name(f"{path.stem}.{tag}{path.suffix or '.csv'}")


def emit_report(report: StudyReport, fmt: str, path: PathLike, stamp: Optional[str] = None) -> list[Path]:
    """Write a report as one JSON document or a family of CSV tables.

    CSV output puts the per-country table at ``path`` and the rate, skip and
    class-count tables next to it (``<stem>.rates.csv`` and so on). Returns
    the files written.
    """
    path = Path(path)
    if fmt == "json":
        text = json.dumps(report_to_dict(report, stamp), indent=2, ensure_ascii=False) + "\n"
        with open_for_write(path) as fh:
            fh.write(text)
        return [path]
    if fmt != "csv":
        raise DataError(f"unknown report format {fmt!r}")

    written = [path]
    with open_for_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        if report.kind == "inout":
            w.writerow(["country", "correlation", "p", "group"])
            for row in report.rows:
                w.writerow([row.country, _g17(row.result.r), _g17(row.result.p), row.group])
        else:
            w.writerow(["country", "in_r", "in_p", "out_r", "out_p", "class", "group"])
            for row in report.rows:
                w.writerow(
                    [
                        row.country,
                        _g17(row.in_result.r),
                        _g17(row.in_result.p),
                        _g17(row.out_result.r),
                        _g17(row.out_result.p),
                        row.cls.value,
                        row.group,
                    ]
                )
    rates_path = _sibling(path, "rates")
    with open_for_write(rates_path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["table", "group", "significant", "total", "rate"])
        for name, rate in report.rates.items():
            for g, cell in sorted(rate.per_group.items()):
                w.writerow([name, g, cell.significant, cell.total, _g17(cell.rate)])
            w.writerow([name, "total", rate.total.significant, rate.total.total, _g17(rate.total.rate)])
    written.append(rates_path)
    skipped_path = _sibling(path, "skipped")
    with open_for_write(skipped_path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["country", "reason"])
        for s in report.skipped:
            w.writerow([s.country, s.reason])
    written.append(skipped_path)
    if report.tendency is not None:
        tendency_path = _sibling(path, "tendency")
        with open_for_write(tendency_path) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["group", "class", "count"])
            for g in GROUPS:
                for c in CorrelationClass:
                    w.writerow([g, c.value, report.tendency.count(g, c)])
                w.writerow([g, "in_tendency", report.tendency.in_tendency(g)])
                w.writerow([g, "out_tendency", report.tendency.out_tendency(g)])
        written.append(tendency_path)
    return written


def write_centrality(vectors: Sequence[CentralityVector], fmt: str, fh: IO[str], with_year: bool) -> None:
    """Per-country centrality values as CSV rows or a JSON document."""
    if fmt == "json":
        doc = {
            "tool": "tradenet",
            "version": __version__,
            "results": [
                {
                    "year": v.year,
                    "measure": v.measure,
                    "direction": v.direction,
                    "leading_eigenvalue": v.leading_eigenvalue,
                    "values": v.as_dict(),
                }
                for v in vectors
            ],
        }
        fh.write(json.dumps(doc, indent=2, ensure_ascii=False) + "\n")
        return
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["year", "country", "value"] if with_year else ["country", "value"])
    for v in vectors:
        for name, value in v.as_dict().items():
            w.writerow([v.year, name, repr(value)] if with_year else [name, repr(value)])
