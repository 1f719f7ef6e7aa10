import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tradenet.netcore import AdjacencyMatrix, CountryIndex, TradeMatrix  # noqa: E402

DATA = Path(__file__).parent / "data"


def labels(n: int) -> CountryIndex:
    return CountryIndex(tuple(f"C{i}" for i in range(n)))


def adjacency(weights, year: int = 2000) -> AdjacencyMatrix:
    w = np.asarray(weights, dtype=float)
    return AdjacencyMatrix(year, labels(w.shape[0]), w / w.sum())


def trade(flows, year: int = 2000) -> TradeMatrix:
    f = np.asarray(flows, dtype=float)
    return TradeMatrix(year, labels(f.shape[0]), f)


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    """Remember a criterion outcome and echo it (visible with -s)."""
    ACCEPTANCE[criterion] = (ok, detail)
    print(f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}")
