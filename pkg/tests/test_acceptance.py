"""Acceptance suite: one pass/fail line per criterion, at the stated tolerances."""
import pytest

from jetgroupoid.verify import CRITERIA

TIME_LIMITS = {1: 30.0, 2: 10.0, 3: 60.0}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    res = CRITERIA[number](seed=0)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.line()
    if number in TIME_LIMITS:
        assert res.elapsed < TIME_LIMITS[number], f"took {res.elapsed:.1f} s"
