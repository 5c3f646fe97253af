"""Shared fixtures.

The closed-form instance (n=3, p=2, f=z^4, eps=delta=1) has everything
in elementary terms:

    envelope(r) = 1/(1+r)
    I(z)        = z^3 / (3 (1+z)^3)          I(inf) = 1/3
    w(r)        = (1+2r) / (6 (1+r)^2)       w(0) = 1/6, w(1) = 1/8
    |w'(r)|     = r / (3 (1+r)^3)

Most verification tests run against this instance, so the profile is
built once per session.
"""

import contextlib
import time

import pytest

from liouville import Power, RadialProfile, StructureParams

_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Recorder for the acceptance suite: one PASS/FAIL line per criterion.

    Lines are replayed in a dedicated section at the end of the pytest
    run (they would otherwise be swallowed by output capture).
    """

    @contextlib.contextmanager
    def criterion(num, label, budget=None):
        t0 = time.perf_counter()
        try:
            yield
            dt = time.perf_counter() - t0
            if budget is not None and dt >= budget:
                raise AssertionError(
                    f"runtime {dt:.2f}s exceeds the {budget:.0f}s budget"
                )
        except BaseException:
            dt = time.perf_counter() - t0
            _ACCEPTANCE_LINES.append(f"[acceptance {num}] {label}: FAIL ({dt:.2f}s)")
            raise
        else:
            _ACCEPTANCE_LINES.append(f"[acceptance {num}] {label}: PASS ({dt:.2f}s)")

    return criterion


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.line(line)


@pytest.fixture(scope="session")
def params32():
    return StructureParams(3, 2.0)


@pytest.fixture(scope="session")
def params42():
    return StructureParams(4, 2.0)


@pytest.fixture(scope="session")
def instance_profile(params32):
    return RadialProfile(Power(4.0), params32, 1.0)


def w_exact(r: float) -> float:
    return (1.0 + 2.0 * r) / (6.0 * (1.0 + r) ** 2)


def inner_exact(z: float) -> float:
    return z**3 / (3.0 * (1.0 + z) ** 3)


def grad_exact(r: float) -> float:
    return r / (3.0 * (1.0 + r) ** 3)
