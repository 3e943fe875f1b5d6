"""Tests for the oracle-equivalence suites."""

import pytest

from treemax.selftest import SUITES, run_suites


def test_suite_names():
    assert list(SUITES) == ["geometry", "operators", "conditions", "experiments"]


@pytest.mark.parametrize("name", list(SUITES))
def test_suite_passes(name):
    results = run_suites([name])
    assert results
    failed = [r for r in results if not r.passed]
    assert failed == []
