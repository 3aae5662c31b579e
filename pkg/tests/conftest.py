import numpy as np
import pytest

from dirac_reduce import build_module


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def quaternions():
    return build_module(3)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(mod.RESULTS, key=lambda k: (int(k[0]), k)):
        ok, detail = mod.RESULTS[key]
        terminalreporter.write_line(f"criterion {key:<3s} {'PASS' if ok else 'FAIL'}  {detail}")
