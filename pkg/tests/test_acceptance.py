"""The ten acceptance criteria at their stated tolerances, one pass/fail line each.

Run directly (``python3 tests/test_acceptance.py``) or through pytest; under
pytest the lines are printed to the terminal even when output is captured.
"""

import pytest

from causal_strain.acceptance import RUNNERS, Context, run_criterion
from causal_strain.scenario import Scenario


@pytest.mark.parametrize("number", sorted(RUNNERS))
def test_criterion(number, ctx, capsys):
    res = run_criterion(number, ctx)
    with capsys.disabled():
        print(f"\n{res.line()}  [{res.seconds:.1f}s]", end="")
    assert res.passed, res.detail


if __name__ == "__main__":
    import sys
    ctx = Context(Scenario.from_dict())
    results = [run_criterion(n, ctx) for n in sorted(RUNNERS)]
    for r in results:
        print(r.line())
    sys.exit(0 if all(r.passed for r in results) else 1)
