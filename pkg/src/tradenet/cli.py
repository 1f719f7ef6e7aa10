"""``tradenet`` command line.

Exit status: 0 success, 1 usage error, 2 data error, 3 solver did not converge.
Failures print one line ``error[<CODE>]: <message>`` to stderr.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io as _stdio
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, TextIO

from tradenet import centrality, io, pipeline
from tradenet.centrality import DANGLING_POLICIES, DIRECTIONS, MEASURES, SolverOptions
from tradenet.errors import DataError, TradenetError, UsageError
from tradenet.netcore import AdjacencyMatrix, normalize
from tradenet.stats import COMPARE_RULES, GROUPS, CorrelationClass, GroupAssignment

THREADS_ENV = "TRADENET_THREADS"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    trade: Optional[Path] = None
    gdp: Optional[Path] = None
    groups: Optional[Path] = None
    per_capita: Optional[Path] = None
    reference_year: Optional[int] = None
    report: Optional[Path] = None
    countries: tuple[str, ...] = ()
    study: Optional[str] = None
    measure: Optional[str] = None
    direction: Optional[str] = None
    year: Optional[int] = None
    all_years: bool = False
    alpha: float = 0.05
    compare: str = "abs"
    solver: SolverOptions = SolverOptions()
    fmt: str = "csv"
    out: Optional[Path] = None
    stamp: bool = False
    threads: Optional[int] = None


def _solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=1e-12, help="L1 change tolerance for power iteration")
    p.add_argument("--max-iter", type=int, default=100_000, help="power iteration sweep cap")
    p.add_argument("--dangling", choices=DANGLING_POLICIES, default="error")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tradenet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    c = sub.add_parser("centrality", help="per-country centrality values")
    c.add_argument("--trade", type=Path, required=True, help="long CSV file or directory of <year>.csv wide tables")
    when = c.add_mutually_exclusive_group()
    when.add_argument("--year", type=int)
    when.add_argument("--all-years", action="store_true")
    c.add_argument("--measure", choices=MEASURES, required=True)
    c.add_argument("--direction", choices=DIRECTIONS, required=True)
    _solver_flags(c)
    c.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    c.add_argument("--out", type=Path)

    s = sub.add_parser("study", help="in-vs-out or GDP-vs-centrality correlation study")
    s.add_argument("study", choices=("inout", "gdp"))
    s.add_argument("--trade", type=Path, required=True)
    s.add_argument("--gdp", type=Path, help="country,year,value nominal GDP panel (required for gdp)")
    s.add_argument("--measure", choices=MEASURES, required=True)
    s.add_argument("--groups", type=Path, help="country,group file")
    s.add_argument("--per-capita", type=Path, help="country,year,value GDP per capita panel")
    s.add_argument("--reference-year", type=int, help="year of --per-capita used for grouping")
    s.add_argument("--alpha", type=float, default=0.05)
    s.add_argument("--compare", choices=COMPARE_RULES, default="abs")
    _solver_flags(s)
    s.add_argument("--format", dest="fmt", choices=("json", "csv"), default=None)
    s.add_argument("--out", type=Path, required=True)
    s.add_argument("--stamp", action="store_true", help="record the run time in the report metadata")

    b = sub.add_parser("subset", help="restrict a report to chosen countries")
    b.add_argument("--report", type=Path, required=True)
    b.add_argument("--countries", required=True, help='comma list; quote labels containing commas, e.g. \'Brazil,"China, P.R.: Mainland"\'')
    b.add_argument("--out", type=Path, required=True)
    b.add_argument("--stamp", action="store_true")
    return parser


def _split_countries(text: str) -> tuple[str, ...]:
    cells = next(csv.reader([text], skipinitialspace=True), [])
    names = tuple(c.strip() for c in cells if c.strip())
    if not names:
        raise UsageError("--countries lists no country")
    return names


def _threads() -> Optional[int]:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return None
    try:
        value = int(raw)
    except ValueError:
        value = 0
    if value < 1:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Validate flag combinations before any data is touched."""
    threads = _threads()
    if args.subcommand == "subset":
        return RunConfig("subset", report=args.report, countries=_split_countries(args.countries),
                         out=args.out, fmt="json", stamp=args.stamp, threads=threads)

    try:
        solver = SolverOptions(args.tol, args.max_iter, "uniform", args.dangling)
    except DataError as exc:
        raise UsageError(str(exc)) from None

    if args.subcommand == "centrality":
        return RunConfig("centrality", trade=args.trade, measure=args.measure, direction=args.direction,
                         year=args.year, all_years=args.all_years, solver=solver, fmt=args.fmt,
                         out=args.out, threads=threads)

    if args.study == "gdp" and args.gdp is None:
        raise UsageError("study gdp requires --gdp")
    if args.groups is not None and (args.per_capita is not None or args.reference_year is not None):
        raise UsageError("--groups cannot be combined with --per-capita/--reference-year")
    if args.groups is None and (args.per_capita is None or args.reference_year is None):
        raise UsageError("grouping needs --groups, or --per-capita together with --reference-year")
    if not 0 < args.alpha < 1:
        raise UsageError(f"--alpha must lie in (0, 1), got {args.alpha}")
    fmt = args.fmt or ("csv" if args.out.suffix.lower() == ".csv" else "json")
    return RunConfig("study", trade=args.trade, gdp=args.gdp, groups=args.groups, per_capita=args.per_capita,
                     reference_year=args.reference_year, study=args.study, measure=args.measure,
                     alpha=args.alpha, compare=args.compare, solver=solver, fmt=fmt, out=args.out,
                     stamp=args.stamp, threads=threads)


def _networks(cfg: RunConfig) -> list[AdjacencyMatrix]:
    out = []
    for t in io.load_trade(cfg.trade):
        try:
            out.append(normalize(t))
        except TradenetError as exc:
            raise exc.add_context(f"year {t.year}")
    return out


def _stamp(cfg: RunConfig) -> Optional[str]:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds") if cfg.stamp else None


def _pct(x: float) -> str:
    return f"{100 * x:.2f}%"


def cmd_centrality(cfg: RunConfig, stdout: TextIO) -> int:
    networks = _networks(cfg)
    if cfg.year is not None:
        networks = [a for a in networks if a.year == cfg.year]
        if not networks:
            raise DataError(f"no trade data for year {cfg.year}")
    elif not cfg.all_years and len(networks) != 1:
        raise UsageError(f"trade data covers {len(networks)} years; pass --year or --all-years")

    def one(a: AdjacencyMatrix):
        try:
            return centrality.compute(a, cfg.measure, cfg.direction, cfg.solver)
        except TradenetError as exc:
            raise exc.add_context(f"year {a.year}")

    vectors = pipeline.parallel_map(one, networks, cfg.threads)
    with_year = cfg.all_years or len(vectors) > 1
    if cfg.out is None:
        io.write_centrality(vectors, cfg.fmt, stdout, with_year)
    else:
        buf = _stdio.StringIO()
        io.write_centrality(vectors, cfg.fmt, buf, with_year)
        with io.open_for_write(cfg.out) as fh:
            fh.write(buf.getvalue())
    return 0


def _resolve_groups(cfg: RunConfig, countries: Sequence[str]) -> GroupAssignment:
    if cfg.groups is not None:
        return io.parse_groups(cfg.groups)
    per_capita = io.parse_series(cfg.per_capita, "per_capita", cfg.reference_year)
    return pipeline.assign_groups(per_capita, countries)


def print_rates(report: pipeline.StudyReport, out: TextIO) -> None:
    """Group significant-rate table, tab separated."""
    if report.kind == "inout":
        out.write(f"{report.measure} centrality\tGroup 1\tGroup 2\tTotal\n")
        lines = [("Significant Rate", report.rates.get("inout"))]
    else:
        out.write("Regression Model\tGroup 1\tGroup 2\tTotal\n")
        lines = [("In versus GDP", report.rates.get("in")), ("Out versus GDP", report.rates.get("out"))]
    for label, rate in lines:
        if rate is None:
            out.write(f"{label}\t-\t-\t-\n")
            continue
        cells = [_pct(rate.per_group[g].rate) if g in rate.per_group else "-" for g in GROUPS]
        out.write("\t".join([label, *cells, _pct(rate.total.rate)]) + "\n")


def print_study(report: pipeline.StudyReport, out: TextIO) -> None:
    print_rates(report, out)
    if report.tendency is not None:
        out.write("\nClass\tGroup 1\tGroup 2\n")
        for c in CorrelationClass:
            out.write(f"{c.value}\t" + "\t".join(str(report.tendency.count(g, c)) for g in GROUPS) + "\n")
        out.write("InTendency\t" + "\t".join(str(report.tendency.in_tendency(g)) for g in GROUPS) + "\n")
        out.write("OutTendency\t" + "\t".join(str(report.tendency.out_tendency(g)) for g in GROUPS) + "\n")
    out.write("\n")
    if report.kind == "inout":
        out.write("country\tgroup\tr\tp\n")
        for row in report.rows:
            out.write(f"{row.country}\t{row.group}\t{row.result.r:.9g}\t{row.result.p:.6g}\n")
    else:
        out.write("country\tgroup\tin_r\tin_p\tout_r\tout_p\tclass\n")
        for row in report.rows:
            out.write(
                f"{row.country}\t{row.group}\t{row.in_result.r:.9g}\t{row.in_result.p:.6g}\t"
                f"{row.out_result.r:.9g}\t{row.out_result.p:.6g}\t{row.cls.value}\n"
            )
    for s in report.skipped:
        out.write(f"skipped\t{s.country}\t{s.reason}\n")


def cmd_study(cfg: RunConfig, stdout: TextIO) -> int:
    networks = _networks(cfg)
    if not networks:
        raise DataError(f"{cfg.trade}: no trade data")
    countries = networks[0].countries.names
    groups = _resolve_groups(cfg, countries)
    if cfg.study == "inout":
        report = pipeline.inout_study(networks, cfg.measure, cfg.solver, groups, cfg.alpha, workers=cfg.threads)
    else:
        panel = io.parse_series(cfg.gdp, "gdp")
        report = pipeline.gdp_study(networks, panel, cfg.measure, cfg.solver, groups, cfg.alpha,
                                    cfg.compare, workers=cfg.threads)
    io.emit_report(report, cfg.fmt, cfg.out, _stamp(cfg))
    print_study(report, stdout)
    return 0


def cmd_subset(cfg: RunConfig, stdout: TextIO) -> int:
    report = io.load_report(cfg.report)
    sub = pipeline.subset_report(report, cfg.countries)
    io.emit_report(sub, "json", cfg.out, _stamp(cfg))
    return 0


_COMMANDS = {"centrality": cmd_centrality, "study": cmd_study, "subset": cmd_subset}


def _one_line(text: str) -> str:
    return " ".join(str(text).split())


def main(argv: Optional[Sequence[str]] = None, stdout: TextIO = None, stderr: TextIO = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        cfg = config_from_args(args)
        return _COMMANDS[cfg.subcommand](cfg, stdout)
    except TradenetError as exc:
        stderr.write(f"error[{exc.code}]: {_one_line(exc)}\n")
        return exc.exit_status
    except SystemExit as exc:
        # argparse --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
