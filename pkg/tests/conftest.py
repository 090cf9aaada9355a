import numpy as np
import pytest

from pqca.universal import build_universal_rule


@pytest.fixture(scope="session")
def rule():
    return build_universal_rule()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"C{n:<2d} {'PASS' if ok else 'FAIL'}  {detail}")
