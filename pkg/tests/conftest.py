from __future__ import annotations

from pathlib import Path

import pytest

from ringstore.algebra import FieldSpec, Matrix
from ringstore.cli import load_scheme
from ringstore.construct import build_ed_matrix
from ringstore.scheme import make_scheme

FIXTURES = Path(__file__).parent / "fixtures"

GF2 = FieldSpec(2)
GF5 = FieldSpec(5)
GF7 = FieldSpec(7)
GF11 = FieldSpec(11)

# systematic [8,5] MDS generator over GF(11)
MDS_GF11_ROWS = [
    [1, 0, 0, 0, 0, 1, 5, 4],
    [0, 1, 0, 0, 0, 6, 9, 7],
    [0, 0, 1, 0, 0, 10, 1, 5],
    [0, 0, 0, 1, 0, 5, 4, 2],
    [0, 0, 0, 0, 1, 1, 4, 5],
]

# 5x8 ED-matrix over GF(2) for n=4, alpha=2, M=5
ED_ROWS = [
    [1, 0, 0, 0, 0, 1, 0, 0],
    [0, 1, 0, 0, 0, 0, 1, 0],
    [0, 0, 1, 0, 0, 0, 0, 1],
    [0, 0, 0, 1, 0, 1, 0, 1],
    [0, 0, 0, 0, 1, 0, 1, 1],
]

# interleaved layout: N1={x1,g6} N2={x2,g7} N3={x3,g8} N4={x4,x5}
INTERLEAVED_ORDER = [0, 5, 1, 6, 2, 7, 3, 4]


@pytest.fixture
def mds_matrix() -> Matrix:
    return Matrix(MDS_GF11_ROWS, GF11)


@pytest.fixture
def mds_scheme(mds_matrix):
    return make_scheme(mds_matrix, 4, 2)


@pytest.fixture
def interleaved_scheme(mds_matrix):
    return make_scheme(mds_matrix.columns(INTERLEAVED_ORDER), 4, 2)


@pytest.fixture
def ed_scheme():
    return make_scheme(Matrix(ED_ROWS, GF2), 4, 2)


@pytest.fixture
def single_hop_scheme():
    # alpha >= M, so k = 1
    return make_scheme(build_ed_matrix(2, 9), 3, 3)


def fixture_path(name: str) -> Path:
    return FIXTURES / name


def load_fixture(name: str):
    return load_scheme(str(FIXTURES / name))


# ------------------------------------------------- acceptance reporting

_acceptance_results: list[tuple[str, str]] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if item.get_closest_marker("acceptance") is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        label = item.get_closest_marker("acceptance").args[0]
        _acceptance_results.append((label, "PASS" if report.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for label, status in _acceptance_results:
        terminalreporter.write_line(f"[{status}] {label}")
