"""Bumping and peak functions built from an f-Property family.

Pipeline: the translated family ``phi~_delta`` feeds the dyadic sum ``Phi``,
``Phi`` bends the defining function into ``rho(z, w)``, and ``rho`` gives the
peak function ``psi_w``. Every object is evaluated as a second-order jet, so
gradients and Levi forms come from the chain rule rather than from finite
differences on a C^2 object.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from .errors import (
    CalibrationError,
    CalibrationExhaustedError,
    KobalabError,
    NonNegativeRhoError,
    StripError,
)
from .levi import Jet, tangential_basis
from .rates import RateTransforms

# -- cutoff ------------------------------------------------------------------

_KNOTS = (0.25, 0.5, 1.0, 2.0)


def _smoothstep(u):
    """Quintic ``10u^3 - 15u^4 + 6u^5`` with its first two derivatives in ``u``."""
    return (u ** 3 * (10 - 15 * u + 6 * u * u),
            30 * u * u * (1 - u) ** 2,
            60 * u * (1 - u) * (1 - 2 * u))


def chi_eval(t):
    """C^2 cutoff: 0 outside (1/4, 2), 1 on [1/2, 1], quintic ramps between."""
    a, b, c, d = _KNOTS
    if t <= a or t >= d:
        return 0.0, 0.0, 0.0
    if b <= t <= c:
        return 1.0, 0.0, 0.0
    if t < b:
        s, s1, s2 = _smoothstep((t - a) / (b - a))
        return s, s1 / (b - a), s2 / (b - a) ** 2
    s, s1, s2 = _smoothstep((t - c) / (d - c))
    return 1.0 - s, -s1 / (d - c), -s2 / (d - c) ** 2


def chi_bounds(n=200001):
    """Dense-sample estimates of ``sup|chi'|``, ``sup|chi''|`` and ``sup chi'^2/chi``."""
    ts = np.linspace(0.0, 2.5, n)
    v = np.array([chi_eval(t) for t in ts])
    pos = v[:, 0] > 0
    return {"M0": float(np.max(np.abs(v[:, 1]))),
            "M1": float(np.max(np.abs(v[:, 2]))),
            "M2": float(np.max(v[pos, 1] ** 2 / v[pos, 0]))}


def peak_value(rho, dist2, L, eta):
    """Scalar ``psi = -(-rho exp(-L |z-w|^2))^eta`` for ``rho < 0``."""
    if rho >= 0:
        raise NonNegativeRhoError("psi_w needs rho(z, w) < 0", rho=rho)
    return -(-rho * math.exp(-L * dist2)) ** eta


# -- parameters and assembly -------------------------------------------------

EPS_GRID = tuple(1.0 / (96 * 2 ** k) for k in range(4))
GAMMA_GRID = tuple(2.0 ** -k for k in range(13))
L_GRID = (1.0, 2.0, 4.0)
LEVI_TOL = 1e-6
G_FLOOR = 1e-10


@dataclass(frozen=True)
class BumpingParams:
    gamma: float = 0.125
    epsilon: float = 1.0 / 96
    L: float = 1.0
    eta: float = 0.5
    j_min: int = 1
    v_radius: float = 0.25

    def __post_init__(self):
        if self.gamma <= 0 or self.epsilon <= 0 or self.L < 0:
            raise ValueError("gamma and epsilon must be positive and L nonnegative")
        if not 0 < self.eta <= 1:
            raise ValueError("eta must lie in (0, 1]")

    def epsilon_admissible(self):
        """``eps/16 - 6 eps^2 >= 0`` together with ``-2 <= -1 + eps*Phi`` for ``Phi >= -3``."""
        e = self.epsilon
        return e / 16 - 6 * e * e >= 0 and 3 * e <= 1

    def to_dict(self):
        return dict(self.__dict__)


class BumpingAssembly:
    """``Phi``, ``rho`` and ``psi_w`` for one domain and parameter set.

    ``family(delta, r_jet, z)`` overrides the domain's candidate family; its
    translate ``phi~_delta = family(2 delta, r - 2 delta, z)`` covers the whole
    support ``0 < r < 2 delta`` of ``chi(r / delta)``.
    """

    def __init__(self, domain, params=None, family=None, rate=None):
        self.domain = domain
        self.params = params or BumpingParams()
        self.family = family or domain.phi_from_r
        self.rate = rate or domain.rate
        method = "closed" if self.rate.has_closed_form else "quad"
        self.transforms = RateTransforms(self.rate, self.params.gamma, method)
        self.report = None

    def with_params(self, **changes):
        return BumpingAssembly(self.domain, replace(self.params, **changes), self.family, self.rate)

    # -- Phi ------------------------------------------------------------------

    def indices(self, r):
        """Dyadic indices with ``2^j r`` in ``(1/4, 2)``."""
        if r <= 0:
            return []
        k = math.floor(-math.log2(r))
        return [j for j in range(max(self.params.j_min, k - 2), k + 3)
                if 0.25 < math.ldexp(r, j) < 2.0]

    def _term(self, j, rj, z):
        delta = math.ldexp(1.0, -j)
        phi = self.family(2 * delta, rj - 2 * delta, z)
        chi = (rj * math.ldexp(1.0, j)).apply(*chi_eval(math.ldexp(rj.val, j)))
        return (phi.exp() - 1.0) * chi

    def phi_jet(self, z, rj=None):
        z = np.asarray(z, complex)
        rj = self.domain.r_jet(z) if rj is None else rj
        if rj.val >= math.ldexp(2.0, -self.params.j_min):
            raise StripError("Phi is only defined below the coarsest dyadic level", r=rj.val)
        out = Jet.const(0.0, len(z))
        for j in self.indices(rj.val):
            out = out + self._term(j, rj, z)
        return out

    def phi_global(self, z, j_max=None):
        """Plain value of ``Phi``; with ``j_max`` every index up to it is summed."""
        z = np.asarray(z, complex)
        rj = self.domain.r_jet(z)
        if j_max is None:
            return self.phi_jet(z, rj).val
        if rj.val >= math.ldexp(2.0, -self.params.j_min):
            raise StripError("Phi is only defined below the coarsest dyadic level", r=rj.val)
        total = 0.0
        for j in range(self.params.j_min, j_max + 1):
            chi = chi_eval(math.ldexp(rj.val, j))[0]
            if chi == 0.0:
                continue
            total += self._term(j, rj, z).val
        return total

    # -- rho, psi -------------------------------------------------------------

    def G(self, s):
        return self.transforms.G(s) if s > 0 else 0.0

    def G_jet(self, z, w):
        q = Jet.norm2(z, w)
        s = math.sqrt(q.val)
        if s == 0.0:
            return Jet.const(0.0, len(z))
        G, G1, G2 = self.transforms.G_derivs(s)
        return q.apply(G, G1 / (2 * s), (G2 - G1 / s) / (4 * s * s))

    def rho_jet(self, z, w):
        z = np.asarray(z, complex)
        rj = self.domain.r_jet(z)
        bend = self.params.epsilon * self.phi_jet(z, rj) - 1.0
        return rj + self.G_jet(z, np.asarray(w, complex)) * bend

    def rho(self, z, w):
        return self.rho_jet(z, w).val

    def psi_jet(self, z, w):
        z = np.asarray(z, complex)
        w = np.asarray(w, complex)
        rho = self.rho_jet(z, w)
        if rho.val >= 0:
            raise NonNegativeRhoError("psi_w needs rho(z, w) < 0", rho=rho.val, z=z)
        weight = (Jet.norm2(z, w) * -self.params.L).exp()
        return -((-rho) * weight).power(self.params.eta)

    def psi(self, z, w):
        return self.psi_jet(z, w).val

    # -- peak-function data ---------------------------------------------------

    @property
    def s_max(self):
        """Largest ``|z - w|`` over the neighbourhood ``V``."""
        s = min(2.0 * self.params.v_radius, 2.0) if self.domain.global_r else 2.0 * self.params.v_radius
        return min(s, self.transforms.G_max_delta() * (1 - 1e-9))

    @property
    def c2(self):
        """``exp(-eta L s_max^2)``: the weight's worst loss on ``V``."""
        return math.exp(-self.params.eta * self.params.L * self.s_max ** 2)

    def F1(self, s):
        """``c2 G(s)^eta``, the decay profile of ``psi_w`` on ``V``."""
        return self.c2 * self.G(s) ** self.params.eta

    def F1_inverse(self, y):
        return self.transforms.G_inverse((y / self.c2) ** (1.0 / self.params.eta))


# -- sampling ----------------------------------------------------------------


def _tangent_direction(domain, w, rng):
    nrm = domain.normal(w)
    d = rng.normal(size=domain.dimension) + 1j * rng.normal(size=domain.dimension)
    d = d - nrm * np.vdot(nrm, d).real
    return d / np.linalg.norm(d)


def _room(domain, w):
    """Half-width of the largest patch box centred at ``w``."""
    if domain.global_r:
        return 1.0
    c = np.asarray(domain.patch.center, complex)
    d = np.asarray(w, complex) - c
    room = min(min(np.asarray(domain.patch.half_re) - np.abs(d.real)),
               min(np.asarray(domain.patch.half_im) - np.abs(d.imag)))
    return max(float(room), 0.0)


def boundary_near(domain, w, radius, rng, count):
    out = []
    tries = 0
    while len(out) < count and tries < 20 * count:
        tries += 1
        s = radius * rng.uniform()
        b = domain.snap(w + s * _tangent_direction(domain, w, rng))
        if domain.global_r or domain.patch.contains(b):
            out.append(b)
    return out


def interior_samples(domain, w, radius, rng, count, depth_min=1e-6):
    """Interior points within roughly ``radius`` of ``w``."""
    out = []
    tries = 0
    while len(out) < count and tries < 20 * count:
        tries += 1
        for b in boundary_near(domain, w, radius, rng, 1):
            d = math.exp(rng.uniform(math.log(depth_min), math.log(radius)))
            z = b - d * domain.normal(b)
            if (domain.global_r or domain.patch.contains(z)) and domain.r_jet(z).val < 0:
                out.append(z)
    return out


def sw_samples(assembly, w, rng, count, radius=None):
    """Points of ``S_w = {rho(., w) = 0}``: move along the outward normal of a
    boundary point ``b`` near ``w`` until ``rho`` changes sign.

    Only distances with ``G(|b - w|) >= G_FLOOR`` are used; below that the
    hypersurface is indistinguishable from the boundary in double precision.
    """
    dom = assembly.domain
    w = np.asarray(w, complex)
    room = _room(dom, w)
    s_hi = min(radius or assembly.params.v_radius, 0.8 * room)
    try:
        s_lo = max(assembly.transforms.G_inverse(G_FLOOR), 1e-4)
    except KobalabError:
        s_lo = math.inf
    out = []
    if not s_lo < s_hi:
        return out
    tries = 0
    while len(out) < count and tries < 10 * count:
        tries += 1
        s = math.exp(rng.uniform(math.log(s_lo), math.log(s_hi)))
        b = dom.snap(w + s * _tangent_direction(dom, w, rng))
        if not (dom.global_r or dom.patch.contains(b)):
            continue
        nu = dom.normal(b)
        G = assembly.G(float(np.linalg.norm(b - w)))
        if G < G_FLOOR:
            continue

        def f(tau):
            return assembly.rho(b + tau * nu, w)

        hi = 4 * G / dom.r_jet(b).real_gradient_norm()
        while f(hi) <= 0:
            hi *= 2
        tau = optimize.brentq(f, 0.0, hi, xtol=1e-14 * hi, rtol=1e-15, maxiter=400)
        z = b + tau * nu
        if dom.global_r or dom.patch.contains(z):
            out.append(z)
    return out


def approach_rays(domain, w, radius, rng, count, depths):
    """Pairs ``(b, z = b - d nu_b, d)`` along inward normals of boundary points near ``w``."""
    out = []
    for b in [np.asarray(w, complex)] + boundary_near(domain, w, radius, rng, count - 1):
        nu = domain.normal(b)
        for d in depths:
            z = b - d * nu
            if (domain.global_r or domain.patch.contains(z)) and domain.r_jet(z).val < 0:
                out.append((b, z, d))
    return out


def _ray_depths(domain, w, radius):
    top = radius if domain.global_r else min(domain.reach, 0.5 * _room(domain, w))
    return np.geomspace(1e-6, top, 12)


# -- reports -----------------------------------------------------------------


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    bound: str
    count: int
    witness: list | None = None

    def to_dict(self):
        d = dict(self.__dict__)
        if self.witness is not None:
            d["witness"] = [[c.real, c.imag] for c in np.asarray(self.witness, complex)]
        return d


@dataclass
class PropertyReport:
    kind: str
    domain: str
    w: list
    params: BumpingParams
    checks: list = field(default_factory=list)
    constants: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def first_failure(self):
        return next((c for c in self.checks if not c.passed), None)

    def add(self, name, passed, value, bound, count, witness=None):
        self.checks.append(Check(name, bool(passed), float(value), bound, int(count),
                                 None if witness is None else list(witness)))

    def to_dict(self):
        return {"kind": self.kind, "domain": self.domain,
                "w": [[c.real, c.imag] for c in np.asarray(self.w, complex)],
                "params": self.params.to_dict(), "passed": self.passed,
                "checks": [c.to_dict() for c in self.checks], "constants": self.constants}


def _worst(values, points, key=max):
    if not values:
        return math.nan, None
    i = (np.argmax if key is max else np.argmin)(values)
    return float(values[i]), points[i]


# -- verification ------------------------------------------------------------


def verify_bumping(assembly, w, budget=1000, seed=0, levi_tol=LEVI_TOL):
    """Sampled check of the bumping-function properties at ``w``.

    Checks: ``rho(w,w) = 0``; ``rho + G(|z-w|) <= 0`` inside; the constant in
    ``rho(z, pi(z)) >= -c delta(z)``; ``|D rho|`` in [1/4, 4], tangential Levi
    form, separation, strip sandwich ``G <= |r| <= 2G`` and ``Phi`` range on
    ``S_w``.
    """
    rng = np.random.default_rng(seed)
    dom = assembly.domain
    w = np.asarray(w, complex)
    p = assembly.params
    rep = PropertyReport("bumping", dom.name, list(w), p)
    radius = min(p.v_radius, 0.8 * _room(dom, w))

    v = abs(assembly.rho(w, w))
    rep.add("rho_at_w", v <= 1e-12, v, "<= 1e-12", 1, w)

    pts = interior_samples(dom, w, radius, rng, budget)
    excess = [assembly.rho(z, w) + assembly.G(float(np.linalg.norm(z - w))) for z in pts]
    val, wit = _worst(excess, pts)
    rep.add("upper_by_G", val <= 0, val, "<= 0", len(pts), wit)

    rays = approach_rays(dom, w, radius, rng, 8, _ray_depths(dom, w, radius))
    ratios = [-assembly.rho(z, b) / d for b, z, d in rays]
    c3, wit = _worst(ratios, [z for _, z, _ in rays])
    rep.add("lower_by_distance", math.isfinite(c3), c3, "finite constant", len(rays), wit)
    rep.constants["c_rho"] = c3

    sw = sw_samples(assembly, w, rng, max(budget // 10, 1), radius)
    grads, levis, seps, sand, phis = [], [], [], [], []
    for z in sw:
        rj = dom.r_jet(z)
        phi = assembly.phi_jet(z, rj)
        rho = rj + assembly.G_jet(z, w) * (p.epsilon * phi - 1.0)
        grads.append(rho.real_gradient_norm())
        basis = tangential_basis(None, z, grad=rho.grad)
        # in one variable the complex tangent space is trivial
        levis.append(min((rho.levi(X) for X in basis), default=0.0))
        seps.append(rj.val)
        G = assembly.G(float(np.linalg.norm(z - w)))
        sand.append(max(G - rj.val, rj.val - 2 * G) / G)
        phis.append(phi.val)
    n = len(sw)
    rep.constants["sw_samples"] = n
    lo, wlo = _worst(grads, sw, min)
    hi, whi = _worst(grads, sw, max)
    ok = n == 0 or (lo >= 0.25 and hi <= 4.0)
    rep.add("gradient_range", ok, lo if n and lo < 0.25 else hi, "in [1/4, 4]", n,
            wlo if n and lo < 0.25 else whi)
    rep.constants["grad_min"], rep.constants["grad_max"] = lo, hi
    val, wit = _worst(levis, sw, min)
    rep.add("tangential_levi", n == 0 or val >= -levi_tol, val, f">= -{levi_tol:g}", n, wit)
    val, wit = _worst(seps, sw, min)
    rep.add("separation", n == 0 or val > 0, val, "r > 0", n, wit)
    val, wit = _worst(sand, sw)
    rep.add("strip_sandwich", n == 0 or val <= 1e-9, val, "G <= |r| <= 2G", n, wit)
    lo, wlo = _worst(phis, sw, min)
    hi, whi = _worst(phis, sw, max)
    ok = n == 0 or (lo >= -3 and hi <= 0)
    rep.add("phi_range", ok, hi if n and hi > 0 else lo, "in [-3, 0]", n, whi if n and hi > 0 else wlo)
    return rep


def verify_peak(assembly, w, budget=1000, seed=0, levi_tol=LEVI_TOL, holder_cap=1e3):
    """Sampled check of the peak-function properties of ``psi_w`` with fixed parameters."""
    rng = np.random.default_rng(seed)
    dom = assembly.domain
    w = np.asarray(w, complex)
    p = assembly.params
    rep = PropertyReport("peak", dom.name, list(w), p)
    radius = min(p.v_radius, 0.8 * _room(dom, w))
    pts = interior_samples(dom, w, radius, rng, budget)

    vals = np.array([assembly.psi(z, w) for z in pts])
    m = min(len(pts), budget)
    i = rng.integers(0, len(pts), m)
    j = rng.integers(0, len(pts), m)
    dz = np.array([np.linalg.norm(pts[a] - pts[b]) for a, b in zip(i, j)])
    keep = dz > 0
    ratio = np.abs(vals[i] - vals[j])[keep] / dz[keep] ** p.eta
    C = float(ratio.max()) if ratio.size else 0.0
    rep.add("holder", C <= holder_cap, C, f"<= cap {holder_cap:g}", int(keep.sum()))
    rep.constants["holder"] = C

    excess = [v + assembly.F1(float(np.linalg.norm(z - w))) for v, z in zip(vals, pts)]
    val, wit = _worst(excess, pts)
    rep.add("upper_by_G_eta", val <= 0, val, "psi + c2 G^eta <= 0", len(pts), wit)
    rep.constants["c2"] = assembly.c2
    Gs = [assembly.G(float(np.linalg.norm(z - w))) for z in pts]
    ratio2 = [-v / g ** p.eta for v, g in zip(vals, Gs) if g > 0]
    rep.constants["c2_fitted"] = float(min(ratio2)) if ratio2 else math.nan

    rays = approach_rays(dom, w, radius, rng, 8, _ray_depths(dom, w, radius))
    ratios = [-assembly.psi(z, b) / d ** p.eta for b, z, d in rays]
    c3, wit = _worst(ratios, [z for _, z, _ in rays])
    rep.add("lower_by_distance", math.isfinite(c3), c3, "finite constant", len(rays), wit)
    rep.constants["c3"] = c3

    region = pts[: max(budget // 2, 1)]
    shell = sw_samples(assembly, w, rng, max(budget // 20, 1), radius)
    for z in shell:
        b = dom.snap(z)
        region.append(b + 0.5 * (z - b))
    eigs = []
    used = []
    for z in region:
        try:
            eigs.append(assembly.psi_jet(z, w).min_eigenvalue())
            used.append(z)
        except NonNegativeRhoError:
            continue
    val, wit = _worst(eigs, used, min)
    rep.add("plurisubharmonic", val >= -levi_tol, val, f">= -{levi_tol:g}", len(used), wit)
    return rep


def verify_peak_recalibrating(assembly, w, budget=1000, seed=0, levi_tol=LEVI_TOL, max_rounds=3):
    """``verify_peak`` that shrinks ``V`` and ``eta`` and raises ``L`` until the
    plurisubharmonicity check holds. Returns ``(assembly, report)``."""
    p = assembly.params
    # an unweighted start (L = 0) still has to reach positive weights
    Ls = sorted({p.L} | {f * max(p.L, 1.0) for f in (1, 2, 4)})
    best = None
    for k in range(max_rounds):
        for eta in (p.eta, p.eta / 2):
            for L in Ls:
                trial = assembly.with_params(v_radius=p.v_radius / 2 ** k, eta=eta, L=L)
                rep = verify_peak(trial, w, budget, seed, levi_tol)
                if rep.passed:
                    return trial, rep
                score = min((c.value for c in rep.checks if c.name == "plurisubharmonic"), default=-math.inf)
                if best is None or score > best[0]:
                    best = (score, trial.params)
    raise CalibrationExhaustedError("peak function not plurisubharmonic within budget",
                                    best_params=best[1].to_dict(), best_min_eigenvalue=best[0])


def verify_phi(assembly, w, count=200, seed=0, c=None):
    """Gradient and Levi bounds of ``Phi`` outside the domain near ``w``.

    Returns the fitted ``C`` in ``|D Phi| <= C / r`` and, for the Levi bound
    ``Phi(X) >= -C'(|ddbar r(X)|/r + |Xr|^2/r^2) + |X Phi|^2/8 + c f(1/r)^2``,
    the fitted ``C'`` for the given ``c`` over random unit ``X``.
    """
    rng = np.random.default_rng(seed)
    dom = assembly.domain
    c = 0.01 if c is None else c
    radius = min(assembly.params.v_radius, 0.8 * _room(dom, w))
    grad_C, levi_C = 0.0, 0.0
    n = 0
    for b in boundary_near(dom, np.asarray(w, complex), radius, rng, count):
        r_target = math.exp(rng.uniform(math.log(1e-8), math.log(0.25)))
        z = b + r_target / dom.r_jet(b).real_gradient_norm() * dom.normal(b)
        rj = dom.r_jet(z)
        if not 0 < rj.val < math.ldexp(2.0, -assembly.params.j_min) or not (dom.global_r or dom.patch.contains(z)):
            continue
        phi = assembly.phi_jet(z, rj)
        grad_C = max(grad_C, phi.real_gradient_norm() * rj.val)
        X = rng.normal(size=dom.dimension) + 1j * rng.normal(size=dom.dimension)
        X /= np.linalg.norm(X)
        need = c * float(assembly.rate(max(1.0 / rj.val, assembly.rate.t0))) ** 2 \
            + abs(phi.deriv(X)) ** 2 / 8 - phi.levi(X)
        slack = abs(rj.levi(X)) / rj.val + abs(rj.deriv(X)) ** 2 / rj.val ** 2
        if need > 0:
            levi_C = max(levi_C, need / slack if slack > 0 else math.inf)
        n += 1
    return {"samples": n, "grad_C": grad_C, "levi_c": c, "levi_C": levi_C}


# -- calibration -------------------------------------------------------------


@dataclass
class CalibrationResult:
    params: BumpingParams
    bumping: list
    peak: list
    tried: int

    def to_dict(self):
        return {"params": self.params.to_dict(), "tried": self.tried,
                "bumping": [r.to_dict() for r in self.bumping],
                "peak": [r.to_dict() for r in self.peak],
                "passed": all(r.passed for r in self.bumping + self.peak)}


def default_w(domain, count=1, seed=0):
    ws = [domain.z_o]
    if count > 1:
        spread = 0.2 if domain.global_r else 0.3 * min(domain.patch.half_re)
        ws += domain.sample_boundary(np.random.default_rng(seed), count - 1, spread)
    return ws


def calibrate(domain, rate=None, ws=None, budget=200, seed=0, family=None, eta=0.5,
              eps_grid=EPS_GRID, gamma_grid=GAMMA_GRID, L_grid=L_GRID, v_radius=None):
    """Grid search: largest epsilon, then largest gamma, then smallest L passing
    every bumping and peak check at every ``w``."""
    ws = default_w(domain) if ws is None else [np.asarray(w, complex) for w in ws]
    v_radius = v_radius or (1.0 if domain.global_r else 0.8 * min(domain.patch.half_re))
    tried = 0
    last = None
    for eps in eps_grid:
        for gamma in gamma_grid:
            base = BumpingAssembly(domain, BumpingParams(gamma, eps, L_grid[0], eta, 1, v_radius), family, rate)
            tried += 1
            breps = [verify_bumping(base, w, budget, seed) for w in ws]
            if not all(r.passed for r in breps):
                last = next(r for r in breps if not r.passed)
                continue
            for L in L_grid:
                asm = base.with_params(L=L)
                preps = [verify_peak(asm, w, budget, seed) for w in ws]
                if all(r.passed for r in preps):
                    asm.report = CalibrationResult(asm.params, breps, preps, tried)
                    return asm
                last = next(r for r in preps if not r.passed)
    fail = last.first_failure if last is not None else None
    raise CalibrationExhaustedError(
        "no parameter combination passed",
        tried=tried, property=fail.name if fail else None,
        value=fail.value if fail else None,
        witness=np.asarray(fail.witness, complex) if fail and fail.witness is not None else None)


def require(report):
    """Raise ``CalibrationError`` naming the first violated property."""
    fail = report.first_failure
    if fail is not None:
        raise CalibrationError(f"{report.kind} check failed: {fail.name}", property=fail.name,
                               value=fail.value,
                               witness=None if fail.witness is None else np.asarray(fail.witness, complex))
    return report
