import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kobalab.errors import DivergentIntegralError
from kobalab.holomaps import (MAP_NAMES, chain_bound, get_map, measure_modulus, modulus_constant,
                              modulus_pairs, predicted_rate, schwarz_pick_check,
                              verify_hardy_littlewood)
from kobalab.rates import RateFunction


@pytest.mark.parametrize("t", [10.0, 1e2, 1e4])
def test_predicted_rate_sqrt(t):
    spec = predicted_rate(RateFunction.power(0.5), 0.5)
    assert spec.h(t) == pytest.approx(t ** 0.25 / 8, rel=1e-5)


@pytest.mark.parametrize("eps", [0.25, 0.5])
def test_predicted_rate_eta_one(eps):
    spec = predicted_rate(RateFunction.power(eps), 1.0)
    for t in (10.0, 1e3):
        assert spec.h(t) == pytest.approx(eps ** 2 * t ** eps, rel=1e-5)


def test_predicted_rate_divergent_log():
    for eta in (0.5, 1.0):
        with pytest.raises(DivergentIntegralError):
            predicted_rate(RateFunction.logpower(2.0), eta)


def test_predicted_rate_bad_eta():
    with pytest.raises(ValueError):
        predicted_rate(RateFunction.power(0.5), 1.5)


def test_h_increasing():
    spec = predicted_rate(RateFunction.power(0.5), 0.5)
    vals = [spec.h(t) for t in np.geomspace(2, 1e6, 15)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    rows = spec.table([4.0, 16.0])
    assert rows[1]["h"] > rows[0]["h"]


def test_hl_sqrt():
    rep = verify_hardy_littlewood(lambda d: math.sqrt(d))
    assert rep.C_fit <= 1 + 1e-6
    assert rep.saturation_error <= 1e-8


def test_hl_linear():
    rep = verify_hardy_littlewood(lambda d: d)
    assert rep.C_fit <= 1 + 1e-6


def test_hl_log_type():
    rep = verify_hardy_littlewood(lambda d: math.log(math.e ** 2 / d) ** -2)
    assert math.isfinite(rep.C_fit) and rep.C_fit > 0


def test_hl_non_integrable():
    with pytest.raises(DivergentIntegralError):
        verify_hardy_littlewood(lambda d: 1.0 / math.log(math.e / d))


def test_hl_interval():
    rep = verify_hardy_littlewood(lambda d: math.sqrt(d), interval=(2.0, 4.0), n_samples=100)
    assert rep.C_fit <= 1 + 1e-6


def test_modulus_identity():
    spec = predicted_rate(RateFunction.power(0.5), 1.0)
    rep = measure_modulus(get_map("identity"), spec, budget=500)
    assert math.isfinite(rep.predicted_constant)
    assert rep.lipschitz_constant == pytest.approx(1.0, abs=1e-9)
    assert rep.classical_sharper


def test_modulus_blaschke_lipschitz():
    hmap = get_map("blaschke")
    spec = predicted_rate(RateFunction.power(0.5), 1.0)
    rep = measure_modulus(hmap, spec, budget=500)
    zeta = np.exp(2j * np.pi * np.arange(4096) / 4096)
    grid_max = float(np.max(np.abs(hmap.jac(zeta))))
    assert rep.lipschitz_constant <= grid_max * (1 + 1e-3)
    assert math.isfinite(rep.predicted_constant)


def test_square_map():
    rep = measure_modulus(get_map("square"), predicted_rate(RateFunction.power(0.5), 1.0), budget=300)
    assert rep.lipschitz_constant <= 2.0 + 1e-9


def test_unknown_map():
    with pytest.raises(ValueError):
        get_map("cube")
    assert set(MAP_NAMES) == {"identity", "blaschke", "square"}


@pytest.mark.parametrize("name", MAP_NAMES)
def test_schwarz_pick(name):
    assert schwarz_pick_check(get_map(name), count=200) <= 1 + 1e-9


def test_chain_bound_identity():
    C = chain_bound(get_map("identity"), RateFunction.power(0.5), 1.0)
    assert math.isfinite(C) and C <= 1.0


@given(st.integers(1, 50))
def test_modulus_sup_monotone_under_inclusion(extra):
    hmap = get_map("identity")
    spec = predicted_rate(RateFunction.power(0.5), 1.0)
    z, w = modulus_pairs(hmap, 200, seed=1)
    base, _, _ = modulus_constant(hmap, spec, z[:100], w[:100])
    more, _, _ = modulus_constant(hmap, spec, z[: 100 + extra], w[: 100 + extra])
    assert more >= base
