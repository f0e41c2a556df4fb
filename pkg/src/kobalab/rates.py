"""Scalar calculus of growth functions.

A rate function ``f`` is handled through ``F(L) = f(e^L)`` so that every
transform works in the logarithmic variable and never overflows:

* ``g(t)   = 1 / int_t^inf da / (a f(a))         = 1 / I(ln t)``
* ``G(d)   = 1 / g*(1 / (gamma d))``,  ``ln G(d) = -L`` with ``I(L) = gamma d``
* ``f~(t)  = 1 / int_t^inf ln(a/t) da / (a f(a)) = 1 / J(ln t)``
* ``h(t)   = eta f~(t^eta)``

where ``I(L) = int_0^inf du / F(L + u)`` and ``J(L) = int_0^inf u du / F(L + u)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import PchipInterpolator

from .errors import (
    ConsistencyError,
    DivergentIntegralError,
    DomainError,
    FiniteDifferenceError,
    MonotonicityError,
    OutOfRangeError,
)

QUAD_RTOL = 1e-8
INVERSE_RTOL = 1e-10
CLAIM_TOL = 1e-3
FUBINI_RTOL = 1e-5

_QUAD_OPTS = dict(epsabs=0.0, epsrel=1e-12, limit=400)


@dataclass(frozen=True)
class RateFunction:
    """Monotone growth function ``f`` on ``[t0, inf)``.

    ``exponent`` is the power ``eps`` (family ``power``), the log power
    ``beta`` (family ``logpower``) or the declared power-law tail exponent
    beyond the last sample (family ``tabulated``).
    """

    family: str
    exponent: float
    t0: float
    knots: tuple = ()

    def __post_init__(self):
        if self.family not in ("power", "logpower", "tabulated"):
            raise DomainError(f"unknown rate family {self.family!r}")
        if not self.t0 > 1.0:
            raise DomainError("domain floor t0 must exceed 1", t0=self.t0)
        if self.family == "power" and not self.exponent > 0:
            raise DomainError("power exponent must be positive")
        if self.family == "logpower" and self.t0 < math.e:
            raise DomainError("logpower needs t0 >= e so that f >= 1")
        if self.family == "tabulated":
            ts = np.array([k[0] for k in self.knots], dtype=float)
            fs = np.array([k[1] for k in self.knots], dtype=float)
            if len(ts) < 2 or np.any(np.diff(ts) <= 0):
                raise DomainError("tabulated knots need >= 2 strictly increasing t")
            if np.any(np.diff(fs) < 0):
                raise MonotonicityError("tabulated f is not monotone increasing")
            if np.any(fs < 1.0):
                raise DomainError("tabulated f must be >= 1")
            if self.t0 < ts[0]:
                raise DomainError("t0 lies below the first tabulated sample")

    # -- constructors -------------------------------------------------------

    @classmethod
    def power(cls, eps, t0=1.001):
        return cls("power", float(eps), float(t0))

    @classmethod
    def logpower(cls, beta, t0=math.e):
        return cls("logpower", float(beta), float(t0))

    @classmethod
    def tabulated(cls, ts, fs, tail_exponent, t0=None):
        knots = tuple((float(t), float(f)) for t, f in zip(ts, fs))
        return cls("tabulated", float(tail_exponent), float(t0 or knots[0][0]), knots)

    @classmethod
    def from_spec(cls, spec):
        """Build from a config record ``{family, params, t0}`` or a string
        such as ``"power:0.5"`` / ``"logpower:2"``."""
        if isinstance(spec, str):
            family, _, arg = spec.partition(":")
            family = family.strip().lower()
            if family == "power":
                return cls.power(_parse_number(arg))
            if family == "logpower":
                return cls.logpower(float(arg))
            raise DomainError(f"cannot parse rate function {spec!r}")
        family = spec["family"]
        params = spec.get("params", {})
        t0 = spec.get("t0")
        if family == "power":
            return cls.power(params["eps"], **({"t0": t0} if t0 else {}))
        if family == "logpower":
            return cls.logpower(params["beta"], **({"t0": t0} if t0 else {}))
        if family == "tabulated":
            return cls.tabulated(params["t"], params["f"], params["tail_exponent"], t0)
        raise DomainError(f"unknown rate family {family!r}")

    def to_spec(self):
        if self.family == "power":
            params = {"eps": self.exponent}
        elif self.family == "logpower":
            params = {"beta": self.exponent}
        else:
            params = {
                "t": [k[0] for k in self.knots],
                "f": [k[1] for k in self.knots],
                "tail_exponent": self.exponent,
            }
        return {"family": self.family, "params": params, "t0": self.t0}

    # -- evaluation -----------------------------------------------------------

    @cached_property
    def _interp(self):
        lt = np.log([k[0] for k in self.knots])
        lf = np.log([k[1] for k in self.knots])
        return PchipInterpolator(lt, lf, extrapolate=False), lt[-1], lf[-1]

    def log_at(self, L):
        """``ln f(e^L)``."""
        if self.family == "power":
            return self.exponent * L
        if self.family == "logpower":
            return self.exponent * math.log(L)
        interp, lt_last, lf_last = self._interp
        if L >= lt_last:
            return lf_last + self.exponent * (L - lt_last)
        return float(interp(L))

    def dlog_at(self, L):
        """``d/dL ln f(e^L)``."""
        if self.family == "power":
            return self.exponent
        if self.family == "logpower":
            return self.exponent / L
        interp, lt_last, _ = self._interp
        if L >= lt_last:
            return self.exponent
        return float(interp.derivative()(L))

    def at_log(self, L):
        """``F(L) = f(e^L)``."""
        return math.exp(self.log_at(L))

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        if np.any(arr < self.t0 * (1 - 1e-12)):
            raise DomainError("rate function evaluated below its floor", t0=self.t0)
        out = np.vectorize(lambda x: self.at_log(math.log(x)), otypes=[float])(arr)
        return float(out) if out.ndim == 0 else out

    def derivative(self, t):
        L = math.log(t)
        return self.at_log(L) * self.dlog_at(L) / t

    # -- integrability ------------------------------------------------------

    @property
    def g_converges(self):
        if self.family == "logpower":
            return self.exponent > 1
        return self.exponent > 0

    @property
    def f_tilde_converges(self):
        if self.family == "logpower":
            return self.exponent > 2
        return self.exponent > 0

    @property
    def has_closed_form(self):
        return self.family in ("power", "logpower")

    def caps(self, t_max=1e12, n=200):
        """Which standing caps ``f(t) <= t^(1/2)`` and ``f(t) <= t`` hold on a grid."""
        ts = np.geomspace(self.t0, t_max, n)
        fs = self(ts)
        return {"sqrt": bool(np.all(fs <= np.sqrt(ts) * (1 + 1e-12))),
                "linear": bool(np.all(fs <= ts * (1 + 1e-12)))}

    def label(self):
        if self.family == "power":
            return f"t^{self.exponent:g}"
        if self.family == "logpower":
            return f"log^{self.exponent:g} t"
        return f"tabulated(tail t^{self.exponent:g})"


def _parse_number(text):
    text = text.strip()
    if "/" in text:
        num, den = text.split("/")
        return float(num) / float(den)
    return float(text)


# -- transforms --------------------------------------------------------------


@dataclass(frozen=True)
class RateTransforms:
    """The derived functions g, g*, G, f~, h for one ``f`` and ``gamma``.

    ``method="quad"`` evaluates the tail integrals by adaptive quadrature;
    ``method="closed"`` uses the exact antiderivatives available for the
    power and log-power families (tabulated always falls back to quadrature).
    """

    f: RateFunction
    gamma: float = 1.0
    method: str = "quad"

    def _closed(self):
        return self.method == "closed" and self.f.has_closed_form

    # tail integrals, in log form
    def log_tail(self, L):
        """``ln I(L)``."""
        if not self.f.g_converges:
            raise DivergentIntegralError(
                "int da/(a f(a)) diverges", family=self.f.family, exponent=self.f.exponent)
        f = self.f
        if self._closed():
            if f.family == "power":
                return -f.exponent * L - math.log(f.exponent)
            return (1 - f.exponent) * math.log(L) - math.log(f.exponent - 1)
        return self._log_quad(L, weight=False)[0]

    def log_weighted_tail(self, L):
        """``ln J(L)``."""
        f = self.f
        if not f.f_tilde_converges:
            raise DivergentIntegralError(
                "int ln(a/t) da/(a f(a)) diverges", family=f.family, exponent=f.exponent)
        if self._closed():
            if f.family == "power":
                return -f.exponent * L - 2 * math.log(f.exponent)
            b = f.exponent
            return (2 - b) * math.log(L) - math.log((b - 1) * (b - 2))
        return self._log_quad(L, weight=True)[0]

    def _log_quad(self, L, weight):
        f = self.f
        base = f.log_at(L)
        kappa = f.dlog_at(L)
        scale = 1.0 / kappa if kappa > 0 else 1.0

        if weight:
            def integrand(v):
                return v * math.exp(base - f.log_at(L + scale * v))
        else:
            def integrand(v):
                return math.exp(base - f.log_at(L + scale * v))

        val, err = integrate.quad(integrand, 0.0, math.inf, **_QUAD_OPTS)
        if not np.isfinite(val) or val <= 0:
            raise DivergentIntegralError("tail quadrature failed", L=L)
        power = 2 if weight else 1
        return -base + power * math.log(scale) + math.log(val), err / val

    def quad_error(self, t, weight=False):
        """Relative error estimate reported by quadrature at ``t``."""
        return self._log_quad(math.log(t), weight)[1]

    # g, g*
    def g(self, t):
        self._check_floor(t)
        return math.exp(-self.log_tail(math.log(t)))

    def g_star(self, y):
        if y <= 0:
            raise OutOfRangeError("g* needs a positive argument", y=y)
        L = self._solve_tail(-math.log(y))
        return math.exp(L)

    # G and its derivatives
    def log_G(self, delta):
        if delta <= 0:
            raise DomainError("G needs delta > 0", delta=delta)
        return -self._solve_tail(math.log(self.gamma * delta))

    def G(self, delta):
        return math.exp(self.log_G(delta))

    def G_derivs(self, delta):
        """``(G, G', G'')`` from ``(ln G)' = gamma f(1/G)`` and its derivative."""
        ell = self.log_G(delta)
        L = -ell
        d1 = self.gamma * self.f.at_log(L)
        d2 = -self.f.dlog_at(L) * d1 * d1
        G = math.exp(ell)
        return G, G * d1, G * (d2 + d1 * d1)

    def G_max_delta(self):
        """Largest delta at which G is defined (``g*`` floor)."""
        return math.exp(self.log_tail(math.log(self.f.t0))) / self.gamma

    def G_inverse(self, y):
        """``G*(y) = 1 / (gamma g(1/y))``."""
        return 1.0 / (self.gamma * self.g(1.0 / y))

    # f~, h
    def f_tilde(self, t):
        self._check_floor(t)
        return math.exp(-self.log_weighted_tail(math.log(t)))

    def h(self, t, eta):
        return eta * self.f_tilde(t ** eta)

    def h_direct(self, t, eta):
        """``1 / int_0^{1/t} ds / (s g(s^-eta))`` by nested quadrature."""
        if not self.f.f_tilde_converges:
            raise DivergentIntegralError(
                "Hoelder rate integral diverges", family=self.f.family, exponent=self.f.exponent)
        lo = math.log(t)
        self._check_floor(t ** eta)
        kappa = eta * self.f.dlog_at(eta * lo)
        scale = 1.0 / kappa
        top = self.log_tail(eta * lo)

        def integrand(v):
            return math.exp(self.log_tail(eta * (lo + scale * v)) - top)

        val, _ = integrate.quad(integrand, 0.0, math.inf, epsabs=0.0, epsrel=1e-10, limit=200)
        return math.exp(-top) / (scale * val)

    def h_double(self, t, eta):
        """Hoelder rate through the unswapped double integral
        ``int_{t^eta}^inf (1/b) int_b^inf da/(a f(a)) db`` with an inner quadrature
        that never uses the closed forms."""
        quad_tr = RateTransforms(self.f, self.gamma, "quad")
        lo = eta * math.log(t)
        self._check_floor(math.exp(lo))
        scale = 1.0 / self.f.dlog_at(lo)
        top = quad_tr.log_tail(lo)

        def integrand(v):
            return math.exp(quad_tr.log_tail(lo + scale * v) - top)

        val, _ = integrate.quad(integrand, 0.0, math.inf, epsabs=0.0, epsrel=1e-10, limit=200)
        return eta / (scale * val * math.exp(top))

    # internals
    def _check_floor(self, t):
        if t <= self.f.t0 * (1 - 1e-12):
            raise DomainError("argument at or below the domain floor", t=t, t0=self.f.t0)

    def _solve_tail(self, target):
        """Solve ``ln I(L) = target`` for ``L >= ln t0``."""
        L0 = math.log(self.f.t0)
        top = self.log_tail(L0)
        if target > top:
            raise OutOfRangeError(
                "value outside the range of g on [t0, inf)", target=target, limit=top)
        if self._closed():
            f = self.f
            if f.family == "power":
                return max(L0, -(target + math.log(f.exponent)) / f.exponent)
            return max(L0, math.exp((target + math.log(f.exponent - 1)) / (1 - f.exponent)))
        lo, step = L0, 1.0
        hi = lo + step
        while self.log_tail(hi) > target:
            lo, step = hi, 2 * step
            hi = lo + step
            if hi > 1e12:
                raise OutOfRangeError("bracketing failed at the upper cap", target=target)
        root = optimize.brentq(lambda L: self.log_tail(L) - target, lo, hi,
                               xtol=1e-300, rtol=1e-15, maxiter=200)
        return root


# -- operation-level functions ----------------------------------------------


def g_of(f, t):
    """``(int_t^inf da / (a f(a)))^-1`` by quadrature."""
    if t <= f.t0:
        raise DomainError("t must exceed the domain floor", t=t, t0=f.t0)
    return RateTransforms(f).g(t)


def g_star(g, y, t0=1.0, cap=1e300):
    """Inverse of an increasing function ``g`` on ``[t0, cap]``."""
    if not y > 0:
        raise OutOfRangeError("g* needs a positive argument", y=y)
    lo = math.log(t0)
    g_lo = g(t0)
    if y < g_lo * (1 - 1e-12):
        raise OutOfRangeError("y below g(t0)", y=y, g_t0=g_lo)
    if y <= g_lo:
        return t0
    x_cap = math.log(cap)
    step = 1.0
    hi = lo + step
    while g(math.exp(hi)) < y:
        lo, step = hi, 2 * step
        hi = lo + step
        if hi >= x_cap:
            hi = x_cap
            if g(cap) < y:
                raise OutOfRangeError("bracketing failed at the upper cap", y=y, cap=cap)
            break
    x = optimize.brentq(lambda s: g(math.exp(s)) - y, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=300)
    return math.exp(x)


def G_of(g, gamma, delta, t0=1.0):
    """``G(delta) = 1 / g*((gamma delta)^-1)``."""
    if delta <= 0 or gamma <= 0:
        raise DomainError("gamma and delta must be positive")
    return 1.0 / g_star(g, 1.0 / (gamma * delta), t0=t0)


def claim_residuals(f, gamma, delta, fd_step=None, method="quad"):
    """Normalized residuals of the three G identities at ``delta``.

    ``r1 = |G'/G - gamma f(1/G)| / (gamma f(1/G))``,
    ``r2 = max(0, G G'' - G'^2) / G'^2``, ``r3 = max(0, G/delta - G') / G'``.
    Derivatives are central differences of ``ln G`` with one Richardson level.
    """
    tr = RateTransforms(f, gamma, method)
    h = delta * 1e-4 if fd_step is None else fd_step
    if not 0 < h < delta / 2:
        raise FiniteDifferenceError("fd_step must be positive and small relative to delta")
    pts = [delta - h, delta - h / 2, delta, delta + h / 2, delta + h]
    ell = [tr.log_G(x) for x in pts]
    if any(b <= a for a, b in zip(ell, ell[1:])):
        raise FiniteDifferenceError("ln G is not monotone on the stencil", delta=delta, step=h)
    m2, m1, c, p1, p2 = ell
    d1 = (4 * (p1 - m1) / h - (p2 - m2) / (2 * h)) / 3
    d2 = (4 * (p1 - 2 * c + m1) / (h / 2) ** 2 - (p2 - 2 * c + m2) / h ** 2) / 3
    target = gamma * f.at_log(-c)
    r1 = abs(d1 - target) / target
    r2 = max(0.0, d2 / (d1 * d1))
    r3 = max(0.0, 1.0 / (delta * d1) - 1.0)
    return r1, r2, r3


def f_tilde(f, t):
    """``(int_t^inf ln(a/t) da / (a f(a)))^-1`` by quadrature."""
    if t <= f.t0:
        raise DomainError("t must exceed the domain floor", t=t, t0=f.t0)
    return RateTransforms(f).f_tilde(t)


def holder_rate_h(f, eta, t, rtol=FUBINI_RTOL):
    """``h(t) = eta f~(t^eta)``, cross-checked against the defining integral."""
    if not 0 < eta <= 1:
        raise DomainError("eta must lie in (0, 1]", eta=eta)
    tr = RateTransforms(f)
    closed = tr.h(t, eta)
    direct = tr.h_direct(t, eta)
    if abs(closed - direct) > rtol * abs(closed):
        raise ConsistencyError("Hoelder rate paths disagree", closed=closed, direct=direct)
    return closed


def hl_rate(G_fun, d, n_check=400):
    """``(int_0^d G(s)/s ds)^-1`` for increasing ``G`` with ``G(s)/s`` decreasing."""
    if d <= 0:
        raise DomainError("d must be positive")
    s = np.concatenate([np.geomspace(d * 1e-12, d, n_check), np.linspace(d / 2, d, 50)])
    s = np.unique(s)
    ratio = np.array([G_fun(x) / x for x in s])
    if np.any(np.diff(ratio) > 1e-12 * np.abs(ratio[1:])):
        bad = int(np.argmax(np.diff(ratio) > 1e-12 * np.abs(ratio[1:])))
        raise MonotonicityError("G(s)/s is not decreasing", at=float(s[bad + 1]))
    return 1.0 / hl_integral(G_fun, d)


def hl_integral(G_fun, d, depth=600.0):
    """``int_0^d G(s)/s ds = int_0^inf G(d e^-v) dv`` with a divergence test.

    The range ``v > depth`` is closed with the power-law tail fitted from
    ``v = depth/2`` and ``v = depth``; log-type ``G`` decays only polynomially
    in ``v`` and ``d e^-v`` underflows long before the tail is negligible.
    """
    far, farther = G_fun(d * math.exp(-depth / 2)), G_fun(d * math.exp(-depth))
    decay = math.inf
    if farther > 0:
        decay = math.log2(far / farther) if far > 0 else math.inf
        if decay < 1.05:
            raise DivergentIntegralError(
                "int_0 G(s)/s ds diverges (logarithmic tail)", tail_exponent=decay)
    val, _ = integrate.quad(lambda v: G_fun(d * math.exp(-v)), 0.0, depth,
                            epsabs=0.0, epsrel=1e-12, limit=400)
    if farther > 0 and math.isfinite(decay):
        val += farther * depth / (decay - 1.0)
    if not np.isfinite(val) or val <= 0:
        raise DivergentIntegralError("int_0 G(s)/s ds failed to converge")
    return val
