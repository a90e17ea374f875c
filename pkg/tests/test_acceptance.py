"""Acceptance criteria at their stated tolerances.

Each test prints one PASS/FAIL line; the lines are also repeated in the
terminal summary.  Failing criteria are genuine shortfalls and are left red.
"""
import pytest

from conftest import ACCEPTANCE_LINES
from feynwalk.acceptance import CRITERIA
from feynwalk.config import RunConfig


@pytest.mark.slow
@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"{c.number:02d}" for c in CRITERIA])
def test_criterion(criterion):
    res = criterion(RunConfig())
    line = res.line()
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert res.passed, res.summary
