"""Acceptance suite: criteria 1-11 run once in order, criterion 12 reruns them."""
import pytest

from kobalab.acceptance import CRITERIA, Context, determinism, run_criterion

LINES = []
_RESULTS = {}


@pytest.fixture(scope="module")
def ctx():
    return Context(seed=0)


def _record(result):
    LINES.append(result.line())
    print(result.line())
    return result


@pytest.mark.slow
@pytest.mark.parametrize("cid", [c[0] for c in CRITERIA], ids=[f"c{c[0]:02d}_{c[1]}" for c in CRITERIA])
def test_criterion(ctx, cid):
    result = _record(run_criterion(cid, ctx))
    _RESULTS[cid] = result
    assert result.passed, result.metrics


@pytest.mark.slow
def test_c12_determinism():
    first = [_RESULTS[c[0]] for c in CRITERIA if c[0] in _RESULTS]
    if len(first) != len(CRITERIA):
        pytest.fail("criteria 1-11 must run before the determinism rerun")
    result = _record(determinism(first, seed=0))
    assert result.passed, result.metrics
