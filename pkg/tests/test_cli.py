import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import DATA
from oracles import random_strongly_connected
from tradenet import cli
from tradenet import io as tio
from tradenet.centrality import eigenvector_out
from tradenet.netcore import normalize


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def two_country(tmp_path):
    path = tmp_path / "trade.csv"
    path.write_text("year,exporter,importer,value\n2000,A,B,60\n2000,B,A,40\n")
    return path


def _panel(tmp_path, n=4, years=range(2000, 2012), symmetric=False, seed=3):
    rng = np.random.default_rng(seed)
    names = [f"N{i}" for i in range(n)]
    with open(tmp_path / "trade.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["year", "exporter", "importer", "value"])
        for y in years:
            f = random_strongly_connected(rng, n) * 1e6
            if symmetric:
                f = f + f.T
            for i in range(n):
                for j in range(n):
                    if i != j:
                        w.writerow([y, names[i], names[j], repr(float(f[i, j]))])
    with open(tmp_path / "gdp.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["country", "year", "value"])
        for c in names:
            for y in years:
                w.writerow([c, y, repr(float(rng.uniform(1e3, 1e4)))])
    with open(tmp_path / "groups.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["country", "group"])
        for k, c in enumerate(names):
            w.writerow([c, 1 if k < n // 2 else 2])
    with open(tmp_path / "pc.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["country", "year", "value"])
        for k, c in enumerate(names):
            w.writerow([c, 2014, 100.0 * (n - k)])
    return names


# --- centrality -----------------------------------------------------------------


def test_centrality_degree_out_csv(two_country):
    code, out, _ = run(["centrality", "--trade", two_country, "--measure", "degree", "--direction", "out"])
    assert code == 0
    assert out.splitlines() == ["country,value", "A,0.6", "B,0.4"]


def test_centrality_json_and_out_file(two_country, tmp_path):
    dest = tmp_path / "c.json"
    code, out, _ = run(["centrality", "--trade", two_country, "--measure", "eigenvector", "--direction", "in",
                        "--format", "json", "--out", dest])
    assert code == 0 and out == ""
    doc = json.loads(dest.read_text())
    (res,) = doc["results"]
    assert res["year"] == 2000 and res["leading_eigenvalue"] == pytest.approx(0.24**0.5)


def test_centrality_sample_matches_library(tmp_path):
    d = tmp_path / "wide"
    d.mkdir()
    (d / "2010.csv").write_text((DATA / "sample_wide.csv").read_text())
    # Afghanistan exports nothing, so its in-eigenvector share is 0
    code, out, err = run(["centrality", "--trade", d, "--measure", "eigenvector", "--direction", "out"])
    assert code == 0, err
    lib = eigenvector_out(normalize(tio.parse_trade_wide(DATA / "sample_wide.csv", 2010)))
    rows = list(csv.reader(out.splitlines()))[1:]
    assert {c: float(v) for c, v in rows} == lib.as_dict()


def test_centrality_year_selection(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("year,exporter,importer,value\n2000,A,B,1\n2000,B,A,1\n2001,A,B,3\n2001,B,A,1\n")
    code, _, err = run(["centrality", "--trade", path, "--measure", "degree", "--direction", "out"])
    assert code == 1 and err.startswith("error[UsageError]:")
    code, out, _ = run(["centrality", "--trade", path, "--measure", "degree", "--direction", "out", "--year", "2001"])
    assert out.splitlines()[1:] == ["A,0.75", "B,0.25"]
    code, out, _ = run(["centrality", "--trade", path, "--measure", "degree", "--direction", "out", "--all-years"])
    assert out.splitlines() == ["year,country,value", "2000,A,0.5", "2000,B,0.5", "2001,A,0.75", "2001,B,0.25"]
    code, _, err = run(["centrality", "--trade", path, "--measure", "degree", "--direction", "out", "--year", "1999"])
    assert code == 2


def test_centrality_reducible_exit_2(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("year,exporter,importer,value\n2000,A,B,1\n2000,B,A,1\n2000,B,C,1\n2000,C,D,1\n2000,D,C,1\n")
    code, _, err = run(["centrality", "--trade", path, "--measure", "randomwalk", "--direction", "in"])
    assert code == 2
    assert err.startswith("error[ReducibleNetwork]:")
    assert "{A, B}" in err and "year 2000" in err
    assert err.count("\n") == 1


def test_centrality_dangling_flag(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("year,exporter,importer,value\n2000,A,B,1\n2000,B,C,1\n2000,C,B,1\n")
    code, _, err = run(["centrality", "--trade", path, "--measure", "randomwalk", "--direction", "out"])
    assert code == 2 and "DanglingNode" in err and "A" in err
    code, _, _ = run(["centrality", "--trade", path, "--measure", "randomwalk", "--direction", "out", "--dangling", "uniform"])
    assert code == 0


def test_centrality_no_convergence_exit_3(tmp_path):
    _panel(tmp_path, years=[2000])
    code, _, err = run(["centrality", "--trade", tmp_path / "trade.csv", "--measure", "eigenvector", "--direction", "out",
                        "--tol", "1e-300", "--max-iter", "2"])
    assert code == 3 and err.startswith("error[NoConvergence]:")


@pytest.mark.parametrize(
    "argv",
    [
        ["centrality", "--measure", "degree", "--direction", "out"],
        ["centrality", "--trade", "x.csv", "--measure", "pagerank", "--direction", "out"],
        ["centrality", "--trade", "x.csv", "--measure", "degree", "--direction", "out", "--tol", "0"],
        ["bogus"],
    ],
)
def test_usage_errors_exit_1(argv):
    code, _, err = run(argv)
    assert code == 1
    assert err.startswith("error[UsageError]:")


def test_missing_file_is_io_failure(tmp_path):
    code, _, err = run(["centrality", "--trade", tmp_path / "none.csv", "--measure", "degree", "--direction", "in"])
    assert code == 2 and err.startswith("error[IoFailure]:")


# --- study ----------------------------------------------------------------------


def test_study_inout_symmetric_gives_full_rates(tmp_path):
    _panel(tmp_path, symmetric=True)
    code, out, err = run(["study", "inout", "--trade", tmp_path / "trade.csv", "--measure", "degree",
                          "--groups", tmp_path / "groups.csv", "--out", tmp_path / "r.json"])
    assert code == 0, err
    lines = out.splitlines()
    assert lines[0] == "degree centrality\tGroup 1\tGroup 2\tTotal"
    assert lines[1] == "Significant Rate\t100.00%\t100.00%\t100.00%"


def test_study_gdp_prints_rate_and_class_tables(tmp_path):
    names = _panel(tmp_path)
    code, out, err = run(["study", "gdp", "--trade", tmp_path / "trade.csv", "--gdp", tmp_path / "gdp.csv",
                          "--measure", "randomwalk", "--per-capita", tmp_path / "pc.csv", "--reference-year", "2014",
                          "--compare", "signed", "--out", tmp_path / "r.csv"])
    assert code == 0, err
    lines = out.splitlines()
    assert lines[0] == "Regression Model\tGroup 1\tGroup 2\tTotal"
    assert lines[1].startswith("In versus GDP\t") and lines[2].startswith("Out versus GDP\t")
    assert "Class\tGroup 1\tGroup 2" in lines
    assert (tmp_path / "r.rates.csv").exists()
    rows = list(csv.DictReader(open(tmp_path / "r.csv")))
    assert {r["country"] for r in rows} <= set(names)


def test_study_income_groups_sizes(tmp_path):
    # the income grouping file applied to a synthetic 71-country panel
    groups = tio.parse_groups(DATA / "income_groups.csv")
    names = sorted(groups.members(1) + groups.members(2))
    rng = np.random.default_rng(9)
    with open(tmp_path / "trade.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["year", "exporter", "importer", "value"])
        for y in range(2000, 2004):
            f = rng.uniform(1, 2, (71, 71))
            for i, a in enumerate(names):
                for j, b in enumerate(names):
                    if i != j:
                        w.writerow([y, a, b, repr(float(f[i, j]))])
    code, _, err = run(["study", "inout", "--trade", tmp_path / "trade.csv", "--measure", "degree",
                        "--groups", DATA / "income_groups.csv", "--out", tmp_path / "r.json"])
    assert code == 0, err
    rate = tio.load_report(tmp_path / "r.json").rates["inout"]
    assert (rate.per_group[1].total, rate.per_group[2].total) == (36, 35)


@pytest.mark.parametrize(
    "extra",
    [
        ["--groups", "g.csv", "--per-capita", "p.csv"],
        [],
        ["--per-capita", "p.csv"],
        ["--groups", "g.csv", "--alpha", "1.5"],
    ],
)
def test_study_flag_validation(tmp_path, extra):
    code, _, err = run(["study", "inout", "--trade", "t.csv", "--measure", "degree", "--out", tmp_path / "r.json", *extra])
    assert code == 1 and err.startswith("error[UsageError]:")


def test_study_gdp_requires_gdp(tmp_path):
    code, _, err = run(["study", "gdp", "--trade", "t.csv", "--measure", "degree", "--groups", "g.csv", "--out", tmp_path / "r.json"])
    assert code == 1 and "--gdp" in err


def test_study_byte_identical_and_stamp(tmp_path):
    _panel(tmp_path)
    base = ["study", "gdp", "--trade", tmp_path / "trade.csv", "--gdp", tmp_path / "gdp.csv", "--measure", "eigenvector",
            "--groups", tmp_path / "groups.csv"]
    run([*base, "--out", tmp_path / "a.json"])
    run([*base, "--out", tmp_path / "b.json"])
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    run([*base, "--out", tmp_path / "c.json", "--stamp"])
    assert "stamp" in json.loads((tmp_path / "c.json").read_text())


def test_threads_env(tmp_path, monkeypatch):
    _panel(tmp_path)
    base = ["study", "inout", "--trade", tmp_path / "trade.csv", "--measure", "randomwalk", "--groups", tmp_path / "groups.csv"]
    run([*base, "--out", tmp_path / "serial.json"])
    monkeypatch.setenv("TRADENET_THREADS", "4")
    code, _, _ = run([*base, "--out", tmp_path / "threaded.json"])
    assert code == 0
    assert (tmp_path / "serial.json").read_bytes() == (tmp_path / "threaded.json").read_bytes()
    monkeypatch.setenv("TRADENET_THREADS", "zero")
    code, _, err = run([*base, "--out", tmp_path / "x.json"])
    assert code == 1 and "TRADENET_THREADS" in err


# --- subset ---------------------------------------------------------------------


BRICS = 'Brazil,"Russian Federation",India,"China, P.R.: Mainland","South Africa"'


def test_subset_brics_over_fixture(tmp_path):
    report = tio.fixture_report(DATA / "gdp_randomwalk.csv", "randomwalk")
    tio.emit_report(report, "json", tmp_path / "full.json")
    code, _, err = run(["subset", "--report", tmp_path / "full.json", "--countries", BRICS, "--out", tmp_path / "b.json"])
    assert code == 0, err
    sub = tio.load_report(tmp_path / "b.json")
    assert len(sub.rows) == 5
    sa = sub.row("South Africa")
    assert (sa.in_result.r, sa.out_result.r) == (0.842727285, -0.521741471)
    assert sub.rates == {}


def test_subset_all_countries_is_content_identical(tmp_path):
    report = tio.fixture_report(DATA / "inout_degree.csv", "degree")
    tio.emit_report(report, "json", tmp_path / "full.json")
    listing = ",".join(f'"{c}"' for c in report.countries())
    code, _, _ = run(["subset", "--report", tmp_path / "full.json", "--countries", listing, "--out", tmp_path / "s.json"])
    assert code == 0
    assert tio.load_report(tmp_path / "s.json").rows == report.rows


def test_subset_unknown_label_exit_2(tmp_path):
    report = tio.fixture_report(DATA / "inout_degree.csv", "degree")
    tio.emit_report(report, "json", tmp_path / "full.json")
    code, _, err = run(["subset", "--report", tmp_path / "full.json", "--countries", "Atlantis", "--out", tmp_path / "s.json"])
    assert code == 2 and err.startswith("error[UnknownCountry]:")


def test_console_entry_point(two_country):
    proc = subprocess.run(
        [sys.executable, "-m", "tradenet.cli", "centrality", "--trade", str(two_country), "--measure", "degree", "--direction", "in"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines() == ["country,value", "A,0.4", "B,0.6"]
