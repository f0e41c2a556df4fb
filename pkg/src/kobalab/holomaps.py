"""Hölder-type extension rates for holomorphic maps.

``predicted_rate`` turns a target rate ``f`` and a Diederich-Fornaess
exponent ``eta`` into ``h(t) = eta f~(t^eta)``. ``verify_hardy_littlewood``
builds the one-dimensional extremal function whose gradient saturates
``|u'| = G(delta)/delta`` and measures its modulus against the rate
produced by ``hl_rate``. ``measure_modulus`` samples shipped maps near the
boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .domains import get_domain
from .metric import exact_metric
from .rates import RateTransforms, hl_integral, hl_rate, holder_rate_h


@dataclass
class HolderRateSpec:
    f: object
    eta: float

    def h(self, t):
        """``eta f~(t^eta)``, cross-checked against the defining integral."""
        return holder_rate_h(self.f, self.eta, t)

    def h_inverse_modulus(self, dist):
        """Predicted modulus ``1 / f~(dist^-eta)``."""
        return 1.0 / RateTransforms(self.f).f_tilde(dist ** -self.eta)

    def table(self, ts):
        tr = RateTransforms(self.f)
        return [{"t": float(t), "f": float(self.f(t)), "f_tilde": tr.f_tilde(t), "h": self.h(t)} for t in ts]


def predicted_rate(f, eta_DF):
    """Validate ``f~`` at the floor and return the rate spec (divergence propagates)."""
    if not 0 < eta_DF <= 1:
        raise ValueError("eta must lie in (0, 1]")
    spec = HolderRateSpec(f, eta_DF)
    spec.h(max(2.0, f.t0 * 2) ** (1.0 / eta_DF))
    return spec


# -- Hardy-Littlewood ---------------------------------------------------------


@dataclass
class HLReport:
    C_fit: float
    pairs: int
    saturation_error: float
    rate_at_1: float

    def to_dict(self):
        return dict(self.__dict__)


def verify_hardy_littlewood(G_fun, interval=(0.0, 1.0), n_samples=400, seed=0):
    """Modulus of ``u(x) = int_0^{delta(x)} G(s)/s ds`` against ``f(t) = 1/int_0^{1/t} G(s)/s ds``.

    ``C_fit = sup |u(x) - u(y)| f(1/|x - y|)`` over sampled pairs.
    """
    a, b = map(float, interval)
    width = b - a
    hl_rate(G_fun, 0.5 * width)  # preconditions: integrability and monotone G/s
    cache = {}

    def U(d):
        if d <= 0:
            return 0.0
        if d not in cache:
            cache[d] = hl_integral(G_fun, d)
        return cache[d]

    def dist(x):
        return min(x - a, b - x)

    rng = np.random.default_rng(seed)
    C = 0.0
    n = 0
    for _ in range(n_samples):
        x = a + width * (10 ** rng.uniform(-8, 0) if rng.uniform() < 0.5 else 1 - 10 ** rng.uniform(-8, 0))
        x = min(max(x, a), b)
        h = width * 10 ** rng.uniform(-8, 0) * (1 if rng.uniform() < 0.5 else -1)
        y = min(max(x + h, a), b)
        if y == x:
            continue
        du = abs(U(dist(x)) - U(dist(y)))
        C = max(C, du / U(abs(x - y)))
        n += 1
    sat = 0.0
    for x in a + width * rng.uniform(0.01, 0.49, 20):
        d = dist(x)
        step = 1e-4 * d
        # local increment integrated directly; differencing U would cancel
        fd = integrate.quad(lambda x: G_fun(x) / x, d - step, d + step, epsrel=1e-13)[0] / (2 * step)
        sat = max(sat, abs(fd - G_fun(d) / d) / (G_fun(d) / d))
    return HLReport(float(C), n, float(sat), 1.0 / U(min(1.0, 0.5 * width)))


# -- shipped maps ---------------------------------------------------------------


@dataclass(frozen=True)
class HoloMap:
    name: str
    domain: str
    fn: object
    jac: object

    def __call__(self, z):
        return self.fn(np.asarray(z, complex))


def _blaschke(a):
    ac = np.conj(a)
    return (lambda z: z * (z - a) / (1 - ac * z),
            lambda z: ((2 * z - a) * (1 - ac * z) + ac * z * (z - a)) / (1 - ac * z) ** 2)


def get_map(name, a=0.5):
    if name == "identity":
        return HoloMap("identity", "ball", lambda z: z, lambda z: np.ones_like(z))
    if name == "blaschke":
        f, df = _blaschke(a)
        return HoloMap("blaschke", "disc", f, df)
    if name == "square":
        return HoloMap("square", "disc", lambda z: z * z, lambda z: 2 * z)
    raise ValueError(f"unknown map {name!r}")


MAP_NAMES = ("identity", "blaschke", "square")


def _closed_samples(dim, rng, count):
    z = rng.normal(size=(count, dim)) + 1j * rng.normal(size=(count, dim))
    z /= np.linalg.norm(z, axis=1)[:, None]
    depth = 10 ** rng.uniform(-6, 0, count)
    return z * (1 - depth)[:, None]


@dataclass
class ModulusReport:
    map: str
    pairs: int
    predicted_constant: float
    lipschitz_constant: float
    fitted_exponent: float
    predicted_exponent: float
    classical_sharper: bool

    def to_dict(self):
        return dict(self.__dict__)


def modulus_pairs(hmap, budget, seed=0):
    """Pairs ``(z, w)`` in the closed domain with ``|z - w|`` log-spaced down to 1e-5."""
    dom = get_domain(hmap.domain)
    rng = np.random.default_rng(seed)
    z = _closed_samples(dom.dimension, rng, budget)
    d = rng.normal(size=z.shape) + 1j * rng.normal(size=z.shape)
    d /= np.linalg.norm(d, axis=1)[:, None]
    h = 10 ** rng.uniform(-5, -0.5, budget)
    w = z + h[:, None] * d
    nw = np.linalg.norm(w, axis=1)
    w[nw > 1] /= nw[nw > 1, None]
    return z, w


def modulus_constant(hmap, spec, z, w):
    """``sup f~(|z-w|^-eta) |map(z) - map(w)|`` over the given pairs."""
    dz = np.linalg.norm(z - w, axis=1)
    dm = np.linalg.norm(hmap(z) - hmap(w), axis=1) if z.ndim == 2 else np.abs(hmap(z) - hmap(w))
    keep = (dz > 0) & (dz ** -spec.eta >= spec.f.t0)
    tr = RateTransforms(spec.f)
    vals = [tr.f_tilde(d ** -spec.eta) * m for d, m in zip(dz[keep], dm[keep])]
    return (max(vals) if vals else 0.0), dz, dm


def measure_modulus(hmap, spec, budget=2000, seed=0):
    z, w = modulus_pairs(hmap, budget, seed)
    if get_domain(hmap.domain).dimension == 1:
        z1, w1 = z[:, 0], w[:, 0]
        C, dz, dm = modulus_constant(hmap, spec, z1[:, None], w1[:, None])
    else:
        C, dz, dm = modulus_constant(hmap, spec, z, w)
    lip = float(np.max(dm / dz))
    # lower envelope exponent: slope of max |dm| per decade of |dz|
    bins = np.floor(np.log10(dz))
    xs, ys = [], []
    for bval in np.unique(bins):
        sel = bins == bval
        if sel.sum() >= 3:
            xs.append(float(np.log10(np.median(dz[sel]))))
            ys.append(float(np.log10(np.max(dm[sel]))))
    fitted = float(np.polyfit(xs, ys, 1)[0]) if len(xs) >= 2 else math.nan
    lo, hi = 1e-5, 1e-4
    pred = math.log(spec.h_inverse_modulus(hi) / spec.h_inverse_modulus(lo)) / math.log(hi / lo)
    return ModulusReport(hmap.name, int(len(dz)), float(C), lip, fitted, pred, fitted > pred)


def schwarz_pick_check(hmap, count=200, seed=0):
    """``K(map(z), map'(z) X) <= K(z, X)`` with the closed-form metric; returns the worst ratio."""
    dom = get_domain(hmap.domain)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for z in _closed_samples(dom.dimension, rng, count) * 0.999:
        X = rng.normal(size=dom.dimension) + 1j * rng.normal(size=dom.dimension)
        Y = hmap.jac(z) * X
        if np.linalg.norm(Y) == 0:
            continue
        worst = max(worst, exact_metric(dom, hmap(z), Y) / exact_metric(dom, z, X))
    return worst


def chain_bound(hmap, f, eta, count=200, seed=0):
    """``sup |map'(z) X| delta g(delta^-eta) / |X|``: the constant in the
    boundary blow-up bound for the derivative."""
    dom = get_domain(hmap.domain)
    tr = RateTransforms(f)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for z in _closed_samples(dom.dimension, rng, count):
        delta = 1 - float(np.linalg.norm(z))
        if delta <= 0 or delta ** -eta <= f.t0:
            continue
        X = rng.normal(size=dom.dimension) + 1j * rng.normal(size=dom.dimension)
        lhs = float(np.linalg.norm(hmap.jac(z) * X) / np.linalg.norm(X))
        worst = max(worst, lhs * delta * tr.g(delta ** -eta))
    return worst
