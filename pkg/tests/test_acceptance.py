"""Acceptance criteria 1-12 at their full sizes and stated tolerances.

Each test prints one PASS/FAIL line; the lines are repeated in the pytest
terminal summary so they are visible without ``-s``.
"""

import pytest

from uhermite.acceptance import CRITERIA, format_result, run_criterion

LINES = []


@pytest.mark.parametrize("k", sorted(CRITERIA), ids=lambda k: f"criterion{k:02d}")
def test_criterion(k):
    r = run_criterion(k, fast=False)
    line = format_result(r)
    LINES.append(line)
    print(line)
    assert r.passed, line
