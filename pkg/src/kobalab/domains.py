"""Model pseudoconvex domains and candidate f-Property families.

Each domain supplies its defining function as a jet, a family
``phi(delta, z)`` of plurisubharmonic candidates valid on the strip
``{-delta < r < 0}``, Euclidean distance and projection to the boundary,
and a box-shaped patch ``U`` around a distinguished boundary point.

Families (N = 2 - 1/e normalizes the range to [-1, 0]):

* disc, ball: ``phi = r / delta``.
* finite-type graph, ellipsoid: ``phi = (exp(r/delta) - 1 - exp(-|z1|^2 / delta^(1/m))) / N``.
* infinite-type graph: same shape with the bump ``exp(-x^2 / sigma)``,
  ``x = Re z1`` and ``sigma = kappa * log(1/delta)^(-2/alpha)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import (
    NonUniqueProjectionError,
    NotInteriorError,
    OutOfPatchError,
    StripError,
    UnsupportedDomainError,
)
from .levi import Jet, complex_hessian
from .rates import RateFunction

_NORM = 2.0 - math.exp(-1.0)


@dataclass(frozen=True)
class Patch:
    """Box ``|Re(z_j - c_j)| <= hx_j``, ``|Im(z_j - c_j)| <= hy_j``."""

    center: tuple
    half_re: tuple
    half_im: tuple

    def contains(self, z):
        d = np.asarray(z, complex) - np.asarray(self.center, complex)
        return bool(np.all(np.abs(d.real) <= np.asarray(self.half_re) + 1e-15)
                    and np.all(np.abs(d.imag) <= np.asarray(self.half_im) + 1e-15))

    def to_dict(self):
        return {"center": [[c.real, c.imag] for c in map(complex, self.center)],
                "half_re": list(self.half_re), "half_im": list(self.half_im)}


class ModelDomain:
    """Base class. Subclasses implement ``r_jet`` and ``phi_from_r``."""

    name = "domain"
    smoothness = "Cinf"
    global_r = True
    r_is_psh = True

    def __init__(self, dimension, z_o, patch, reach, rate, known_exponents=None):
        self.dimension = dimension
        self.z_o = np.asarray(z_o, complex)
        self.patch = patch
        self.reach = reach
        self.rate = rate
        self.known_exponents = known_exponents or {}

    # -- defining function ------------------------------------------------

    def r_jet(self, z):
        raise NotImplementedError

    def eval_r(self, z):
        z = self._point(z)
        if not self.global_r and not self.patch.contains(z):
            raise OutOfPatchError(f"{self.name}: point outside the patch", z=z)
        return self.r_jet(z).val

    def __call__(self, z):
        return self.eval_r(z)

    def r_values(self, points):
        """Vectorized ``r`` on rows of ``points``; ``+inf`` outside the patch."""
        P = np.atleast_2d(np.asarray(points, complex))
        vals = self._r_vec(P)
        if not self.global_r:
            d = P - np.asarray(self.patch.center, complex)
            ok = np.all((np.abs(d.real) <= np.asarray(self.patch.half_re) + 1e-15)
                        & (np.abs(d.imag) <= np.asarray(self.patch.half_im) + 1e-15), axis=1)
            vals = np.where(ok, vals, np.inf)
        return vals

    def _r_vec(self, P):
        return np.array([self.r_jet(p).val for p in P])

    def normal(self, z):
        """Outward unit normal of the level set through ``z`` (complex vector)."""
        g = self.r_jet(self._point(z)).real_gradient()
        return g / np.linalg.norm(g)

    def _point(self, z):
        z = np.atleast_1d(np.asarray(z, complex))
        if z.shape != (self.dimension,):
            raise ValueError(f"{self.name} expects {self.dimension} coordinates")
        return z

    # -- f-Property family --------------------------------------------------

    def phi_from_r(self, delta, rj, z):
        raise NotImplementedError

    def phi_jet(self, delta, z, shift=0.0):
        """Candidate ``phi_delta`` at ``z`` with ``r`` replaced by ``r - shift``."""
        z = self._point(z)
        return self.phi_from_r(delta, self.r_jet(z) - shift, z)

    def phi(self, delta, z):
        return self.phi_jet(delta, z).val

    # -- boundary geometry --------------------------------------------------

    def snap(self, p, tol=1e-15, maxiter=60):
        """Newton steps along the gradient onto ``{r = 0}``."""
        p = self._point(p).copy()
        for _ in range(maxiter):
            j = self.r_jet(p)
            if abs(j.val) <= tol:
                break
            g = j.real_gradient()
            p = p - j.val * g / np.vdot(g, g).real
        return p

    def boundary_distance(self, z):
        return self._nearest(z)[1]

    def boundary_project(self, z):
        return self._nearest(z)[0]

    def _nearest(self, z):
        z = self._point(z)
        r = self.eval_r(z)
        if r >= 0:
            raise NotInteriorError(f"{self.name}: point is not interior", r=r)
        sols = []
        for start in self._projection_starts(z):
            w = self._lagrange_solve(z, start)
            if w is not None:
                sols.append((float(np.linalg.norm(z - w)), w))
        if not sols:
            raise NonUniqueProjectionError("projection solver failed to converge")
        sols.sort(key=lambda s: s[0])
        best_d, best_w = sols[0]
        for d, w in sols[1:]:
            if abs(d - best_d) <= 1e-6 * max(best_d, 1e-300) and np.linalg.norm(w - best_w) > 1e-6:
                raise NonUniqueProjectionError(
                    "two nearest boundary points at equal distance", first=best_w, second=w)
        return best_w, best_d

    def _projection_starts(self, z):
        starts = [self.snap(z)]
        nrm = self.normal(z)
        for k in range(self.dimension):
            for v in (1.0, 1.0j):
                t = np.zeros(self.dimension, complex)
                t[k] = v
                t = t - nrm * np.vdot(nrm, t).real
                if np.linalg.norm(t) > 1e-8:
                    t = t / np.linalg.norm(t)
                    starts.append(self.snap(starts[0] + 0.01 * self.reach * t))
        return starts

    def _lagrange_solve(self, z, start):
        n = self.dimension
        zr = _to_real(z)

        def system(x):
            w = _from_real(x[:-1])
            j = self.r_jet(w)
            g = _to_real(j.real_gradient())
            return np.concatenate([x[:-1] - zr - x[-1] * g, [j.val]])

        g0 = _to_real(self.r_jet(start).real_gradient())
        lam0 = float(np.dot(_to_real(start) - zr, g0) / np.dot(g0, g0))
        sol = optimize.root(system, np.concatenate([_to_real(start), [lam0]]),
                            method="hybr", options={"xtol": 1e-15})
        w = _from_real(sol.x[:2 * n])
        if abs(self.r_jet(w).val) > 1e-10:
            w = self.snap(w)
            if abs(self.r_jet(w).val) > 1e-10:
                return None
        return w

    # -- sampling -----------------------------------------------------------

    def sample_boundary(self, rng, count, spread=None):
        """Boundary points near ``z_o`` inside the patch."""
        spread = 0.5 * min(min(self.patch.half_re), min(self.patch.half_im)) if spread is None else spread
        out = []
        nrm = self.normal(self.z_o)
        while len(out) < count:
            d = rng.normal(size=self.dimension) + 1j * rng.normal(size=self.dimension)
            d = d - nrm * np.vdot(nrm, d).real
            d = d / np.linalg.norm(d) * spread * rng.uniform() ** 0.5
            w = self.snap(self.z_o + d)
            if self.patch.contains(w):
                out.append(w)
        return out

    def strip_grid(self, delta, count, rng, spread=None):
        """Points of ``U`` with ``-delta < r < 0``."""
        out = []
        for w in self.sample_boundary(rng, count, spread):
            depth = rng.uniform(0.02, 0.98)
            z = w - self.normal(w) * depth * delta / self.r_jet(w).real_gradient_norm()
            for _ in range(4):
                rz = self.r_jet(z).val
                if -delta < rz < 0:
                    break
                z = w - (w - z) * 0.5
            if -delta < self.r_jet(z).val < 0 and self.patch.contains(z):
                out.append(z)
        return out

    # -- metadata -----------------------------------------------------------

    def descriptor(self):
        return {
            "name": self.name,
            "dimension": self.dimension,
            "smoothness": self.smoothness,
            "z_o": [[c.real, c.imag] for c in self.z_o],
            "patch": self.patch.to_dict(),
            "reach": self.reach,
            "rate": self.rate.to_spec(),
            "known_exponents": self.known_exponents,
            "r_is_psh": self.r_is_psh,
        }

    def cvx_constraints(self, points):
        """Convex constraints keeping sampled points of a disc inside. ``None``
        when the domain has no disciplined convex description."""
        return None


def _to_real(z):
    z = np.asarray(z, complex)
    out = np.empty(2 * len(z))
    out[0::2] = z.real
    out[1::2] = z.imag
    return out


def _from_real(x):
    return x[0::2] + 1j * x[1::2]


# -- concrete domains --------------------------------------------------------


class UnitBall(ModelDomain):
    """``{|z|^2 < 1}`` in C^n (n = 1 is the unit disc)."""

    def __init__(self, dimension=2):
        z_o = np.zeros(dimension, complex)
        z_o[0] = 1.0
        patch = Patch(tuple(z_o), (1.0,) * dimension, (1.0,) * dimension)
        super().__init__(dimension, z_o, patch, reach=0.3, rate=RateFunction.power(0.5))
        self.name = "disc" if dimension == 1 else "ball"

    def r_jet(self, z):
        return Jet.norm2(z) - 1.0

    def _r_vec(self, P):
        return np.sum(np.abs(P) ** 2, axis=1) - 1.0

    def phi_from_r(self, delta, rj, z):
        return rj / delta

    def boundary_distance(self, z):
        z = self._point(z)
        nz = float(np.linalg.norm(z))
        if nz >= 1:
            raise NotInteriorError(f"{self.name}: point is not interior", r=nz ** 2 - 1)
        return 1.0 - nz

    def boundary_project(self, z):
        z = self._point(z)
        nz = float(np.linalg.norm(z))
        if nz >= 1:
            raise NotInteriorError(f"{self.name}: point is not interior", r=nz ** 2 - 1)
        if nz < 1e-6:
            raise NonUniqueProjectionError("every boundary point is nearest to the centre")
        return z / nz

    def sample_boundary(self, rng, count, spread=None):
        spread = 0.5 if spread is None else spread
        out = []
        for _ in range(count):
            d = rng.normal(size=self.dimension) + 1j * rng.normal(size=self.dimension)
            w = self.z_o + spread * rng.uniform() ** 0.5 * d / np.linalg.norm(d)
            out.append(w / np.linalg.norm(w))
        return out

    def cvx_constraints(self, points):
        import cvxpy as cp

        return [cp.norm(points, 2, axis=1) <= 1.0]


class GraphDomain(ModelDomain):
    """``{Im z_n + P(z_1) < 0}`` near the origin of C^2."""

    global_r = False
    n_factor = _NORM

    def __init__(self, P, rate, patch_half, known_exponents):
        patch = Patch((0j, 0j), (patch_half, patch_half), (patch_half, patch_half))
        super().__init__(2, [0j, 0j], patch, reach=0.05, rate=rate, known_exponents=known_exponents)
        self._P = P

    def r_jet(self, z):
        return Jet.im(z, 1) + self._P(z)

    def bump(self, delta, z):
        raise NotImplementedError

    def phi_from_r(self, delta, rj, z):
        return ((rj / delta).exp() - 1.0 - (-self.bump(delta, z)).exp()) / _NORM

    def sample_boundary(self, rng, count, spread=None):
        spread = 0.5 * self.patch.half_re[0] if spread is None else spread
        out = []
        while len(out) < count:
            z1 = spread * (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1))
            x2 = spread * rng.uniform(-1, 1)
            z = np.array([z1, x2 + 0j])
            z[1] = x2 - 1j * self._P(z).val
            if self.patch.contains(z):
                out.append(z)
        return out


class FiniteTypeGraph(GraphDomain):
    """``{Im z2 + |z1|^(2m) < 0}``: type ``2m`` at the origin."""

    def __init__(self, m=2, patch_half=0.3):
        self.m = m
        super().__init__(lambda z: Jet.abs2(z, 0).power(m), RateFunction.power(1.0 / (2 * m)),
                         patch_half, {"type": 2 * m, "m": m})
        self.name = f"graph{m}"

    def bump(self, delta, z):
        return Jet.abs2(z, 0) / delta ** (1.0 / self.m)

    def _r_vec(self, P):
        return P[:, 1].imag + np.abs(P[:, 0]) ** (2 * self.m)

    def cvx_constraints(self, points):
        import cvxpy as cp

        cons = [cp.power(cp.abs(points[:, 0]), 2 * self.m) + cp.imag(points[:, 1]) <= 0]
        return cons + _box_constraints(points, self.patch)


def _box_constraints(points, patch):
    import cvxpy as cp

    cons = []
    for j, c in enumerate(patch.center):
        cons.append(cp.abs(cp.real(points[:, j]) - c.real) <= patch.half_re[j])
        cons.append(cp.abs(cp.imag(points[:, j]) - c.imag) <= patch.half_im[j])
    return cons


@dataclass(frozen=True)
class FlatProfile:
    """``P(x) = exp(-|x|^-alpha)`` for ``|x| <= x1``, continued beyond ``x1``
    by its second-order Taylor polynomial so that ``P`` stays convex and C^2."""

    alpha: float
    x1: float = field(default=None)

    def __post_init__(self):
        if self.x1 is None:
            object.__setattr__(self, "x1", 0.9 * (self.alpha / (self.alpha + 1)) ** (1 / self.alpha))

    def core(self, x):
        ax = abs(x)
        if ax == 0.0:
            return 0.0, 0.0, 0.0
        a = self.alpha
        q = ax ** -a
        p = math.exp(-q)
        if p == 0.0:
            return 0.0, 0.0, 0.0
        d1 = p * a * q / ax * math.copysign(1.0, x)
        d2 = p * (a * a * q * q - a * (a + 1) * q) / (ax * ax)
        return p, d1, d2

    def __call__(self, x):
        if abs(x) <= self.x1:
            return self.core(x)
        s = math.copysign(self.x1, x)
        p, d1, d2 = self.core(s)
        dx = x - s
        return p + d1 * dx + 0.5 * d2 * dx * dx, d1 + d2 * dx, d2


class InfiniteTypeGraph(GraphDomain):
    """``{Im z2 + P(Re z1) < 0}`` with ``P(x) = exp(-1/|x|^alpha)``."""

    smoothness = "C2"

    def __init__(self, alpha=0.5, kappa=2.5, patch_half=0.05):
        if not 0 < alpha < 1:
            raise UnsupportedDomainError("alpha must lie in (0, 1)")
        self.alpha = alpha
        self.kappa = kappa
        self.profile = FlatProfile(alpha)

        def P(z):
            return Jet.re(z, 0).apply(*self.profile(z[0].real))

        super().__init__(P, RateFunction.logpower(1.0 / alpha),
                         patch_half, {"alpha": alpha, "convex_until": self.profile.x1})
        self.name = "flat"

    def sigma(self, delta):
        return self.kappa * max(math.log(1.0 / delta), 1.0) ** (-2.0 / self.alpha)

    def bump(self, delta, z):
        x = Jet.re(z, 0)
        return x * x / self.sigma(delta)


class Ellipsoid(ModelDomain):
    """Decoupled ellipsoid ``{|z1|^(2m) + |z2|^2 < 1}``, weakly pseudoconvex at (0, 1)."""

    def __init__(self, m=2):
        self.m = m
        patch = Patch((0j, 1 + 0j), (0.3, 0.3), (0.3, 0.3))
        super().__init__(2, [0j, 1 + 0j], patch, reach=0.05,
                         rate=RateFunction.power(1.0 / (2 * m)), known_exponents={"type": 2 * m, "m": m})
        self.name = f"ellipsoid{m}"

    def r_jet(self, z):
        return Jet.abs2(z, 0).power(self.m) + Jet.abs2(z, 1) - 1.0

    def _r_vec(self, P):
        return np.abs(P[:, 0]) ** (2 * self.m) + np.abs(P[:, 1]) ** 2 - 1.0

    def phi_from_r(self, delta, rj, z):
        bump = Jet.abs2(z, 0) / delta ** (1.0 / self.m)
        return ((rj / delta).exp() - 1.0 - (-bump).exp()) / _NORM

    def cvx_constraints(self, points):
        import cvxpy as cp

        return [cp.power(cp.abs(points[:, 0]), 2 * self.m) + cp.square(cp.abs(points[:, 1])) <= 1.0]


# -- registry ----------------------------------------------------------------

_ALIASES = {
    "d1": "disc", "disc": "disc",
    "d2": "ball", "ball": "ball",
    "d3": "graph2", "graph": "graph2", "graph2": "graph2", "graph3": "graph3",
    "d4": "ellipsoid2", "ellipsoid": "ellipsoid2", "ellipsoid2": "ellipsoid2", "ellipsoid3": "ellipsoid3",
    "d5": "flat", "flat": "flat",
}

DOMAIN_NAMES = ("disc", "ball", "graph2", "graph3", "ellipsoid2", "ellipsoid3", "flat")


def get_domain(name, **kwargs):
    key = _ALIASES.get(name.lower())
    if key is None:
        raise UnsupportedDomainError(f"unknown domain {name!r}", known=list(DOMAIN_NAMES))
    if key == "disc":
        return UnitBall(1)
    if key == "ball":
        return UnitBall(kwargs.get("dimension", 2))
    if key.startswith("graph"):
        return FiniteTypeGraph(int(key[-1]))
    if key.startswith("ellipsoid"):
        return Ellipsoid(int(key[-1]))
    return InfiniteTypeGraph(kwargs.get("alpha", 0.5))


# -- f-Property verification -------------------------------------------------


@dataclass
class FPropertyReport:
    domain: str
    delta: float
    n_points: int
    value_min: float
    value_max: float
    c_fit: float
    C_fit: float
    target: float
    fd_max_rel: float
    passed: bool
    witness: list | None = None

    def to_dict(self):
        d = dict(self.__dict__)
        if self.witness is not None:
            d["witness"] = [[c.real, c.imag] for c in self.witness]
        return d


def fproperty_check(domain, delta, grid, fd_points=3):
    """Check value range, Levi lower bound and gradient bound of ``phi_delta``.

    ``c_fit`` is the best constant in ``min eig(ddbar phi) >= c f(1/delta)^2``
    and ``C_fit`` the best constant in ``|D phi| <= C / delta`` over the grid.
    """
    target = float(domain.rate(1.0 / delta)) ** 2 if 1.0 / delta >= domain.rate.t0 else float("nan")
    vals, eigs, grads = [], [], []
    witness = None
    for z in grid:
        rz = domain.r_jet(z).val
        if not -delta < rz < 0:
            raise StripError("grid point outside the strip", r=rz, delta=delta, z=z)
        j = domain.phi_jet(delta, z)
        vals.append(j.val)
        eigs.append(j.min_eigenvalue())
        grads.append(j.real_gradient_norm())
    vals, eigs, grads = map(np.asarray, (vals, eigs, grads))
    c_fit = float(np.min(eigs) / target)
    C_fit = float(np.max(grads) * delta)
    fd_rel = 0.0
    for z in list(grid)[:fd_points]:
        an = domain.phi_jet(delta, z).hess
        step = min(1e-3, 1e-2 * delta)
        fd = complex_hessian(lambda p: domain.phi_jet(delta, p).val, z, step=step).matrix
        fd_rel = max(fd_rel, float(np.max(np.abs(fd - an)) / max(np.max(np.abs(an)), 1e-300)))
    ok_range = bool(np.all(vals >= -1 - 1e-12) and np.all(vals <= 1e-12))
    passed = ok_range and c_fit > 0 and np.isfinite(C_fit)
    if not passed:
        bad = int(np.argmin(eigs)) if c_fit <= 0 else int(np.argmax(np.abs(vals + 0.5)))
        witness = list(grid[bad])
    return FPropertyReport(domain.name, delta, len(vals), float(vals.min()), float(vals.max()),
                           c_fit, C_fit, target, fd_rel, passed, witness)
