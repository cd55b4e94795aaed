"""Acceptance gate: every criterion at its stated tolerance and budget.

Each test prints one pass/fail line with the measured numbers (run pytest
with -s to see them) and then asserts both the check itself and its
runtime budget.
"""

import pytest

from hypervekua import verification


@pytest.mark.parametrize("criterion", verification.ALL_CRITERIA,
                         ids=lambda fn: fn.__name__)
def test_acceptance_criterion(criterion):
    result = criterion()
    print(result.line())
    assert result.passed, result.line()
    assert result.seconds < result.limit_seconds, (
        f"criterion {result.number} took {result.seconds:.2f}s, "
        f"budget {result.limit_seconds:.0f}s")
