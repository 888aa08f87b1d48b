"""Acceptance suite: one pass/fail line per criterion.

The lines are printed as each criterion runs and repeated in the terminal
summary, so they appear in a plain ``pytest -v`` log as well.
"""

import pytest

from ordern import verify

@pytest.mark.parametrize("criterion", verify.CRITERIA, ids=lambda c: f"criterion_{c.number}")
def test_criterion(criterion, acceptance_log):
    outcome = verify.run_criterion(criterion)
    line = outcome.line()
    acceptance_log.append(line)
    print(line)
    failed = [text for ok, text in outcome.checks if not ok]
    assert outcome.passed, "\n".join([line] + failed)


def test_all_criteria_registered():
    assert [c.number for c in verify.CRITERIA] == list(range(1, 12))
