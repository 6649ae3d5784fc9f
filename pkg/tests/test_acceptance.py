"""Acceptance criteria, one test per criterion.

Each test prints a single ``[PASS]`` or ``[FAIL]`` line (visible with
``pytest -s`` or in the captured-output section of a failure) and then
asserts the criterion. ``mtaar verify --suite acceptance`` runs the same checks.
"""
import pytest

from mtaar.acceptance import CRITERIA, _timed


@pytest.mark.parametrize("name,check", CRITERIA, ids=[c[0].split()[0] for c in CRITERIA])
def test_criterion(name, check, capsys):
    result = _timed(name, check)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()
