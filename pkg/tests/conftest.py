"""Shared fixtures: the exhaustive exact-mode grid reused by several suites."""

from __future__ import annotations

import sys

import pytest

from coreprobe import miss_probability

GRID_N = 60


@pytest.fixture(scope="session")
def exact_grid():
    """epsilon[(n, alpha, q)] as exact rationals, for every n <= GRID_N."""
    grid = {}
    for n in range(1, GRID_N + 1):
        for alpha in range(n + 1):
            for q in range(n + 1):
                grid[n, alpha, q] = miss_probability(n, alpha, q, mode="exact").epsilon
    return grid


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the acceptance criterion lines after the test report."""
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None) if module else None
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
