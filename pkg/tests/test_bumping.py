import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kobalab.bumping import (EPS_GRID, BumpingAssembly, BumpingParams, calibrate, chi_bounds,
                             chi_eval, interior_samples, peak_value, sw_samples, verify_bumping,
                             verify_peak, verify_peak_recalibrating, verify_phi)
from kobalab.domains import get_domain
from kobalab.errors import CalibrationExhaustedError, NonNegativeRhoError, StripError

BALL = get_domain("ball")
W = np.array([1 + 0j, 0j])


def quintic(u):
    return 10 * u ** 3 - 15 * u ** 4 + 6 * u ** 5


def test_chi_examples():
    assert chi_eval(0.75) == (1.0, 0.0, 0.0)
    assert chi_eval(0.2) == (0.0, 0.0, 0.0)
    assert chi_eval(2.5) == (0.0, 0.0, 0.0)
    v = chi_eval(0.375)[0]
    assert v == pytest.approx(quintic(0.5), abs=1e-15)
    assert 0 < v < 1


@pytest.mark.parametrize("knot", [0.25, 0.5, 1.0, 2.0])
def test_chi_knot_continuity(knot):
    lo = np.array(chi_eval(knot - 1e-13))
    hi = np.array(chi_eval(knot + 1e-13))
    assert np.all(np.abs(lo - hi) <= 1e-9)


def test_chi_bounds_finite():
    b = chi_bounds()
    assert all(math.isfinite(v) for v in b.values())
    assert b["M0"] == pytest.approx(7.5, rel=1e-6)


@given(st.floats(-1, 3))
def test_chi_range_and_derivatives(t):
    v, d1, d2 = chi_eval(t)
    assert 0 <= v <= 1
    h = 1e-5
    fd1 = (chi_eval(t + h)[0] - chi_eval(t - h)[0]) / (2 * h)
    fd2 = (chi_eval(t + h)[1] - chi_eval(t - h)[1]) / (2 * h)
    if all(abs(t - k) > 2 * h for k in (0.25, 0.5, 1.0, 2.0)):
        assert fd1 == pytest.approx(d1, abs=1e-8 * max(1, abs(d2)) + 1e-7)
        assert fd2 == pytest.approx(d2, abs=1e-5 * max(1, abs(d2)))


def test_indices_example():
    asm = BumpingAssembly(BALL)
    assert asm.indices(0.15) == [1, 2, 3]
    assert asm.indices(-0.1) == []


def test_phi_zero_family():
    asm = BumpingAssembly(BALL, family=lambda d, rj, z: rj * 0.0)
    for r in (0.05, 0.15, 0.6):
        z = np.array([math.sqrt(1 + r), 0j])
        assert asm.phi_global(z) == 0.0


def test_phi_translated_oracle():
    # with family (r + D/2)/(D/2) the translate at level j is (r - 2^-j) 2^j
    asm = BumpingAssembly(BALL, family=lambda D, rj, z: (rj + D / 2) / (D / 2))
    z = np.array([math.sqrt(1.15), 0j])
    oracle = sum((math.exp((0.15 - 2.0 ** -j) * 2 ** j) - 1) * chi_eval(2 ** j * 0.15)[0] for j in (1, 2, 3))
    val = asm.phi_global(z)
    assert val == pytest.approx(oracle, abs=1e-14)
    assert -3 < val < 0


def test_phi_strip_error():
    with pytest.raises(StripError):
        BumpingAssembly(BALL).phi_global(np.array([1.5 + 0j, 0j]))


@given(st.floats(1e-9, 0.99))
def test_phi_locality(r):
    asm = BumpingAssembly(BALL)
    z = np.array([math.sqrt(1 + r), 0j])
    assert asm.phi_global(z, j_max=40) == asm.phi_global(z)


def test_phi_jet_matches_finite_differences():
    from kobalab.levi import complex_hessian

    asm = BumpingAssembly(get_domain("graph2"))
    z = np.array([0.05 + 0.01j, 0.02 + 0.03j])
    jet = asm.phi_jet(z)
    fd = complex_hessian(lambda p: asm.phi_global(p), z, step=1e-5)
    assert np.max(np.abs(fd.matrix - jet.hess)) <= 1e-4 * np.max(np.abs(jet.hess))


def test_rho_examples():
    asm = BumpingAssembly(BALL, BumpingParams(gamma=0.5))
    assert asm.rho(W, W) == 0.0
    assert asm.rho([0.9, 0], W) == pytest.approx(-0.19 - 0.0025 * 0.25, abs=1e-15)
    rng = np.random.default_rng(0)
    for z in interior_samples(BALL, W, 0.5, rng, 50):
        assert asm.rho(z, W) <= -asm.G(float(np.linalg.norm(z - W)))


def test_peak_value_examples():
    assert peak_value(-1.0, 0.0, 3.0, 0.5) == -1.0
    assert peak_value(-0.04, 0.0, 1.0, 0.5) == pytest.approx(-0.2, abs=1e-15)
    with pytest.raises(NonNegativeRhoError):
        peak_value(0.0, 0.1, 1.0, 0.5)


def test_psi_ball_recomputation():
    asm = BumpingAssembly(BALL, BumpingParams(gamma=0.5, L=2.0))
    z = np.array([0.9 + 0j, 0j])
    direct = -((0.19 + 0.000625) * math.exp(-2.0 * 0.01)) ** 0.5
    assert asm.psi(z, W) == pytest.approx(direct, rel=1e-14)
    assert asm.psi(z, W) <= -asm.c2 * asm.G(0.1) ** 0.5
    with pytest.raises(NonNegativeRhoError):
        asm.psi(np.array([1.1 + 0j, 0j]), W)


def test_params_validation():
    assert BumpingParams(epsilon=1 / 96).epsilon_admissible()
    assert not BumpingParams(epsilon=0.5).epsilon_admissible()
    with pytest.raises(ValueError):
        BumpingParams(eta=1.5)
    assert EPS_GRID[0] == 1 / 96


def test_ball_bumping_and_peak():
    asm = calibrate(BALL, budget=1000)
    assert asm.params.epsilon == 1 / 96 and asm.params.gamma >= 2 ** -10
    rb = verify_bumping(asm, W, budget=1000)
    assert rb.passed, rb.first_failure
    assert rb.checks[0].value <= 1e-12
    rp = verify_peak(asm, W, budget=1000)
    assert rp.passed, rp.first_failure


def test_ball_sandwich_and_separation():
    asm = BumpingAssembly(BALL, BumpingParams(gamma=1.0, v_radius=1.0))
    sw = sw_samples(asm, W, np.random.default_rng(1), 80)
    assert len(sw) >= 40
    for z in sw:
        r = BALL.eval_r(z)
        G = asm.G(float(np.linalg.norm(z - W)))
        assert r > 0
        assert G * (1 - 1e-9) <= r <= 2 * G * (1 + 1e-9)


def test_graph_calibrates():
    asm = calibrate(get_domain("graph2"), budget=1000)
    assert asm.report is not None and asm.report.to_dict()["passed"]


def test_phi_bounds_reported():
    asm = BumpingAssembly(get_domain("graph2"))
    out = verify_phi(asm, np.zeros(2, complex), count=100)
    assert out["samples"] > 50
    assert math.isfinite(out["grad_C"]) and math.isfinite(out["levi_C"])


def test_large_epsilon_fails_levi():
    asm = BumpingAssembly(BALL, BumpingParams(gamma=1.0, epsilon=0.5, v_radius=1.0))
    rep = verify_bumping(asm, W, budget=1000)
    assert not rep.passed
    assert not next(c for c in rep.checks if c.name == "tangential_levi").passed


def test_eta_one_no_weight_recalibrates():
    asm = BumpingAssembly(BALL, BumpingParams(gamma=1.0, eta=1.0, L=0.0, v_radius=1.0))
    first = verify_peak(asm, W, budget=300)
    trial, rep = verify_peak_recalibrating(asm, W, budget=300)
    psh = next(c for c in first.checks if c.name == "plurisubharmonic")
    assert not psh.passed
    assert rep.passed and trial.params != asm.params


def test_wrong_family_exhausts():
    flipped = lambda d, rj, z: BALL.phi_from_r(d, rj, z) * -1.0  # noqa: E731
    with pytest.raises(CalibrationExhaustedError):
        calibrate(BALL, budget=300, family=flipped, gamma_grid=(1.0, 0.25), eps_grid=EPS_GRID[:1])
