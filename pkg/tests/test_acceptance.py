"""Acceptance suite at the stated trial counts and tolerances.

Each criterion prints one PASS/FAIL line (also visible without ``-s``).
"""

import pytest

from normdens.verify import CRITERIA, DEFAULT_SEED, run_criterion


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    res = run_criterion(number, "full", DEFAULT_SEED)
    with capsys.disabled():
        print(f"\n{res.line()}")
    assert res.passed, res.detail
