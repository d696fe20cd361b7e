"""All acceptance criteria at their stated tolerances, one pass/fail line each."""

import pytest

from bifree.acceptance import CHECKS, run_check


@pytest.mark.parametrize("number", [num for num, _, _ in CHECKS], ids=[name for _, name, _ in CHECKS])
def test_acceptance(number, capsys):
    result = run_check(number)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()
