import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kobalab.errors import DivergentIntegralError, DomainError, MonotonicityError, OutOfRangeError
from kobalab.rates import (G_of, RateFunction, RateTransforms, claim_residuals, f_tilde, g_of,
                           g_star, hl_rate, holder_rate_h)

SQRT = RateFunction.power(0.5)
LOG2 = RateFunction.logpower(2.0)


# -- closed-form oracles -------------------------------------------------------

def test_g_sqrt_at_4():
    assert g_of(SQRT, 4.0) == pytest.approx(1.0, rel=1e-8)


def test_g_logsquare_at_e3():
    assert g_of(LOG2, math.e ** 3) == pytest.approx(3.0, rel=1e-8)


@pytest.mark.parametrize("eps", [0.1, 0.25, 0.5, 0.9])
def test_g_power_is_eps_t_eps(eps):
    f = RateFunction.power(eps)
    for t in np.geomspace(2, 1e6, 9):
        assert g_of(f, t) == pytest.approx(eps * t ** eps, rel=1e-8)


def test_g_star_examples():
    assert g_star(lambda t: math.sqrt(t) / 2, 1.0) == pytest.approx(4.0, rel=1e-10)
    assert g_star(lambda t: t, 7.0) == pytest.approx(7.0, rel=1e-10)
    assert g_star(math.log, 3.0, t0=1.0) == pytest.approx(math.e ** 3, rel=1e-10)


def test_g_star_out_of_range():
    with pytest.raises(OutOfRangeError):
        g_star(lambda t: t, 0.5, t0=1.0)
    with pytest.raises(OutOfRangeError):
        g_star(lambda t: min(t, 10.0), 20.0, t0=1.0, cap=1e6)


def test_G_of_examples():
    assert G_of(lambda t: math.sqrt(t) / 2, 0.1, 0.2) == pytest.approx(1e-4, rel=1e-9)
    assert G_of(lambda t: t, 1.0, 0.5) == pytest.approx(0.5, rel=1e-9)
    tr = RateTransforms(SQRT, 1.0, "quad")
    for d in (1e-3, 0.1, 0.5):
        assert tr.G(d) == pytest.approx(d * d / 4, rel=1e-9)


def test_claim_residual_examples():
    assert claim_residuals(SQRT, 0.1, 0.2)[0] <= 1e-4
    for d in (1e-3, 0.1, 0.5):
        assert max(claim_residuals(RateFunction.power(1.0), 1.0, d)) <= 1e-10
    assert max(claim_residuals(LOG2, 0.05, 0.1)) <= 1e-3


def test_f_tilde_examples():
    assert f_tilde(SQRT, 16.0) == pytest.approx(1.0, rel=1e-8)
    for eps in (0.25, 0.5):
        f = RateFunction.power(eps)
        assert f_tilde(f, 100.0) == pytest.approx(eps * eps * 100 ** eps, rel=1e-8)
    with pytest.raises(DivergentIntegralError):
        f_tilde(LOG2, math.e ** 4)


def test_holder_rate_examples():
    assert holder_rate_h(SQRT, 0.5, 16.0) == pytest.approx(0.25, rel=1e-8)
    assert holder_rate_h(SQRT, 1.0, 16.0) == pytest.approx(1.0, rel=1e-8)
    f = RateFunction.power(0.3)
    assert holder_rate_h(f, 1.0, 50.0) == pytest.approx(0.09 * 50 ** 0.3, rel=1e-8)
    with pytest.raises(DivergentIntegralError):
        holder_rate_h(LOG2, 0.5, 100.0)


def test_hl_rate_examples():
    assert hl_rate(math.sqrt, 0.25) == pytest.approx(1.0, rel=1e-8)
    assert hl_rate(lambda d: d, 1.0) == pytest.approx(1.0, rel=1e-8)
    with pytest.raises(MonotonicityError):
        hl_rate(lambda d: 1 / math.log(math.e / d), 2.0)
    with pytest.raises(DivergentIntegralError):
        hl_rate(lambda d: 1 / math.log(math.e / d), 0.1)


def test_floor_and_family_errors():
    with pytest.raises(DomainError):
        g_of(SQRT, 1.0)
    with pytest.raises(DomainError):
        RateFunction.power(-1.0)
    with pytest.raises(DomainError):
        RateFunction.from_spec("cubic:3")
    with pytest.raises(MonotonicityError):
        RateFunction.tabulated([2, 3, 4], [2, 1.5, 3], 0.5)


def test_spec_roundtrip():
    for f in (SQRT, LOG2, RateFunction.tabulated([2, 10, 100], [1.5, 3, 10], 0.5)):
        assert RateFunction.from_spec(f.to_spec()) == f
    assert RateFunction.from_spec("power:1/4").exponent == 0.25


def test_caps_recorded():
    assert SQRT.caps() == {"sqrt": True, "linear": True}
    assert RateFunction.power(0.75).caps() == {"sqrt": False, "linear": True}


def test_tabulated_matches_power_on_knots():
    ts = np.geomspace(2, 1e4, 40)
    tab = RateFunction.tabulated(ts, np.sqrt(ts), 0.5)
    tr = RateTransforms(tab)
    assert tr.g(100.0) == pytest.approx(10.0 / 2, rel=1e-3)


def test_closed_and_quad_agree():
    for f in (SQRT, LOG2, RateFunction.logpower(3.0)):
        q, c = RateTransforms(f, 0.3, "quad"), RateTransforms(f, 0.3, "closed")
        for t in (20.0, 1e3, 1e5):
            assert q.g(t) == pytest.approx(c.g(t), rel=1e-9)
        for d in (1e-4, 1e-2):
            assert q.G(d) == pytest.approx(c.G(d), rel=1e-8)


# -- properties ----------------------------------------------------------------

exponents = st.floats(0.05, 1.0)
log_t = st.floats(math.log(2.0), math.log(1e6))


@given(exponents, log_t, log_t)
def test_g_monotone_and_dominated(eps, a, b):
    f = RateFunction.power(eps)
    t1, t2 = sorted((math.exp(a), math.exp(b)))
    tr = RateTransforms(f)
    assert tr.g(t1) <= tr.g(t2) * (1 + 1e-12)
    assert tr.g(t1) <= f(t1) * (1 + 1e-12)


@given(st.sampled_from([SQRT, LOG2, RateFunction.power(0.2)]), log_t)
def test_g_star_roundtrip(f, lt):
    t = max(math.exp(lt), f.t0 * 1.01)
    tr = RateTransforms(f, 1.0, "quad")
    assert abs(tr.g_star(tr.g(t)) - t) / t <= 1e-8


@given(st.sampled_from([SQRT, LOG2]), st.floats(-9, -1), st.floats(-9, -1))
def test_G_increasing(f, a, b):
    tr = RateTransforms(f, 0.1)
    d1, d2 = sorted((10 ** a, 10 ** b))
    assert tr.G(d1) <= tr.G(d2)


@given(st.sampled_from([RateFunction.power(0.25), SQRT, LOG2]), st.floats(-4, -1),
       st.sampled_from([1.0, 0.1, 0.01]))
def test_claim_residuals_small(f, ld, gamma):
    assert max(claim_residuals(f, gamma, 10 ** ld)) <= 1e-3


@given(st.sampled_from([0.25, 0.5]), st.sampled_from([0.25, 0.5, 1.0]), st.floats(1, 4))
def test_fubini_paths_agree(eps, eta, lt):
    tr = RateTransforms(RateFunction.power(eps))
    t = 10 ** lt
    closed = tr.h(t, eta)
    assert tr.h_direct(t, eta) == pytest.approx(closed, rel=1e-5)
    assert tr.h_double(t, eta) == pytest.approx(closed, rel=1e-5)


@given(exponents, st.floats(0.1, 1.0), log_t, log_t)
def test_h_and_f_tilde_monotone(eps, eta, a, b):
    tr = RateTransforms(RateFunction.power(eps))
    t1, t2 = sorted((math.exp(a), math.exp(b)))
    assert tr.f_tilde(t1) <= tr.f_tilde(t2) * (1 + 1e-12)
    if t1 ** eta > tr.f.t0:
        assert tr.h(t1, eta) <= tr.h(t2, eta) * (1 + 1e-12)
