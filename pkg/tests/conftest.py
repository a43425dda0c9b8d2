import warnings

import numpy as np
import pytest

from torelli import bundled
from torelli.dubrovin import DimensionMismatchWarning, recover_quartics

ACCEPTANCE_LINES: dict[int, str] = {}


def record(criterion: int, ok: bool, detail: str):
    ACCEPTANCE_LINES[criterion] = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(ACCEPTANCE_LINES[criterion])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture(scope="session")
def fixture_files():
    return {name: bundled(name) for name in ("trott", "genus4", "genus5")}


@pytest.fixture(scope="session")
def recovered(fixture_files):
    out = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DimensionMismatchWarning)
        for name, tf in fixture_files.items():
            out[name] = recover_quartics(tf.riemann_matrix())
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
