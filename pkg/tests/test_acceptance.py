"""Acceptance gate: every graded row must pass.

The suite runs once per session (the determinism row alone replays the other
eleven), then each row gets its own pass/fail test line. A failing row prints
its failing checks with measured values and tolerances.
"""
from __future__ import annotations

import pytest

from ppotential.acceptance import ROW_NAMES, run_acceptance


@pytest.fixture(scope="session")
def acceptance_results():
    results = run_acceptance(seed=0)
    return {r.row: r for r in results}


@pytest.mark.parametrize("row", ROW_NAMES)
def test_acceptance_row(acceptance_results, row):
    result = acceptance_results[row]
    failing = [c for c in result.checks if not c.passed]
    lines = "\n".join(
        "  %s: measured=%r expected=%r tol=%r %s"
        % (c.name, c.measured, c.expected, c.tolerance, c.detail)
        for c in failing)
    assert result.passed, "row %r failed %d check(s):\n%s" % (row, len(failing), lines)


def test_every_row_is_covered(acceptance_results):
    assert set(acceptance_results) == set(ROW_NAMES)
    assert len(ROW_NAMES) == 12
