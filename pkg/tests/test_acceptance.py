"""Acceptance gate: every criterion runs at its pinned tolerance and prints
one pass/fail line.  Run with `pytest tests/test_acceptance.py -s` to see the
lines, or `python -m spinlab selftest`."""

import pytest

from spinlab import acceptance


@pytest.mark.parametrize("criterion", acceptance.CRITERIA, ids=lambda f: f.__name__)
def test_criterion(criterion):
    result = criterion()
    status = "PASS" if result.passed else "FAIL"
    print(f"[{status}] {result.name} ({result.seconds:.1f}s): {result.detail}", flush=True)
    assert result.passed, f"{result.name}: {result.detail}"
