"""Acceptance criteria 1-12 at the sample sizes their tolerances were designed for.

Each test prints one PASS/FAIL line; the lines are repeated in the terminal
summary so they are visible without ``-s``.  Set HYPWALK_ACCEPTANCE_SCALE=quick
for a smoke run with smaller samples.
"""

import os

import pytest

from hypwalk import acceptance

SCALE = os.environ.get("HYPWALK_ACCEPTANCE_SCALE", "full")
SEED = 2024
RESULTS = {}


@pytest.mark.slow
@pytest.mark.parametrize("number", range(1, 13), ids=lambda n: f"criterion_{n:02d}")
def test_criterion(number):
    res = acceptance.CRITERIA[number - 1](SCALE, SEED)
    RESULTS[number] = res
    print(res.line())
    assert res.passed, res.report()
