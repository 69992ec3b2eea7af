from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from landscape_lab.core import compute_nweights
from landscape_lab.models import benchmark_space, sat2_distribution, sat2_kernel, toy_space

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture(scope="session")
def sat2():
    d, k = sat2_distribution(), sat2_kernel()
    return d, k, compute_nweights(d, k)


@pytest.fixture(scope="session")
def toy():
    cache = {}

    def get(b, window="clipped"):
        if (b, window) not in cache:
            cache[b, window] = toy_space(b, window=window)
        return cache[b, window]

    return get


@pytest.fixture(scope="session")
def bench():
    cache = {}

    def get(b, n=50):
        if (b, n) not in cache:
            cache[b, n] = benchmark_space(b, n)
        return cache[b, n]

    return get


@pytest.fixture
def record():
    """Collect one acceptance verdict line per criterion."""

    def rec(name: str, ok: bool, detail: str = "") -> bool:
        ACCEPTANCE.append((name, bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
        return ok

    return rec


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
