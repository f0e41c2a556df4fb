"""Kobayashi metric bounds.

Upper bounds come from explicit analytic discs: any holomorphic
``h: closed unit disc -> domain`` with ``h(0) = z`` and ``h'(0) = t X/|X|``
certifies ``K(z, X) <= |X| / t``. Lower bounds come from the peak-function
estimate ``K(z, X) >= |X| / F1*(F2(delta(z)))`` and its rate form
``c g(1/delta) |X|``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .bumping import BumpingAssembly
from .errors import (
    ConsistencyError,
    NoFeasibleDiscError,
    OutOfRangeError,
    UnsupportedDomainError,
)

MARGIN_FLOOR = 1e-12
BACKOFF = 1.0 - 1e-6


# -- discs -------------------------------------------------------------------


@dataclass
class AnalyticDisc:
    """``zeta -> sum_k coeffs[k] zeta^k`` restricted to ``|zeta| <= scale``."""

    coeffs: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        self.coeffs = np.atleast_2d(np.asarray(self.coeffs, complex))
        if not 0 < self.scale <= 1:
            raise ValueError("scale must lie in (0, 1]")

    @classmethod
    def linear(cls, z, v, scale=1.0):
        return cls(np.vstack([np.asarray(z, complex), np.asarray(v, complex)]), scale)

    @property
    def degree(self):
        return self.coeffs.shape[0] - 1

    @property
    def center(self):
        return self.coeffs[0]

    @property
    def derivative(self):
        """``d/dzeta`` of ``zeta -> disc(scale * zeta)`` at 0."""
        return self.scale * self.coeffs[1] if self.degree >= 1 else np.zeros_like(self.coeffs[0])

    def __call__(self, zeta):
        zeta = np.atleast_1d(np.asarray(zeta, complex))
        V = np.vander(zeta, self.degree + 1, increasing=True)
        return V @ self.coeffs

    def on_circle(self, n, radius=None):
        radius = self.scale if radius is None else radius
        zeta = radius * np.exp(2j * np.pi * np.arange(n) / n)
        if n <= self.degree:
            return zeta, self(zeta)
        # equispaced circle values are an inverse DFT of the scaled coefficients
        a = np.zeros((n, self.coeffs.shape[1]), complex)
        a[: self.degree + 1] = self.coeffs * (radius ** np.arange(self.degree + 1))[:, None]
        return zeta, n * np.fft.ifft(a, axis=0)


@dataclass
class Feasibility:
    feasible: bool
    margin: float
    witness: complex | None = None


def disc_feasible(domain, disc, samples=256, margin_floor=MARGIN_FLOOR, rings=8):
    """Does ``disc`` map ``|zeta| <= scale`` into the domain with ``r < -margin_floor``?

    When ``r`` is plurisubharmonic, ``r o disc`` is subharmonic and only the
    outer circle needs checking.
    """
    if samples < 64:
        raise ValueError("need at least 64 samples")
    radii = [disc.scale] if domain.r_is_psh else [disc.scale * (1 - 2.0 ** -5) ** k for k in range(rings)]
    worst, where = -math.inf, None
    for rad in radii:
        zeta, pts = disc.on_circle(samples, rad)
        vals = domain.r_values(pts)
        k = int(np.argmax(vals))
        if vals[k] > worst:
            worst, where = float(vals[k]), complex(zeta[k])
        if math.isinf(worst):
            break
    return Feasibility(worst < -margin_floor, -worst, where)


def _canonical_direction(X):
    """Unit vector with the largest component real positive (phase-free)."""
    X = np.asarray(X, complex)
    Xh = X / np.linalg.norm(X)
    k = int(np.argmax(np.abs(Xh) + 1e-12 * np.arange(len(Xh))[::-1]))
    return Xh * np.exp(-1j * np.angle(Xh[k]))


def _largest_scale(domain, disc, samples):
    """Largest ``s`` (bisection) with ``disc`` restricted to radius ``s`` feasible."""
    if disc_feasible(domain, disc, samples).feasible:
        return disc
    lo, hi = 0.0, disc.scale
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if disc_feasible(domain, AnalyticDisc(disc.coeffs, mid), samples).feasible:
            lo = mid
        else:
            hi = mid
    if lo == 0.0:
        return None
    out = AnalyticDisc(disc.coeffs, lo * BACKOFF)
    return out if disc_feasible(domain, out, samples).feasible else None


def _ball_socp(z, Xh, degree, m, margin):
    """Direct conic form for the unit ball: one second-order cone per sample.

    Unknowns ``x = [t, Re C, Im C]`` with ``C`` the ``(degree-1, n)`` higher
    coefficients; the cone row for sample ``i`` is ``(1 - margin, h(zeta_i))``.
    """
    import clarabel
    from scipy import sparse

    n = len(z)
    zeta = np.exp(2j * np.pi * np.arange(m) / m)
    k = degree - 1
    nv = 1 + 2 * k * n
    powers = zeta[:, None] ** np.arange(2, degree + 1)[None, :] if k else np.zeros((m, 0))
    A = np.zeros((m, 2 * n + 1, nv))
    b = np.zeros((m, 2 * n + 1))
    b[:, 0] = 1.0 - margin
    for j in range(n):
        u = Xh[j] * zeta
        re, im = 1 + 2 * j, 2 + 2 * j
        b[:, re], b[:, im] = z[j].real, z[j].imag
        A[:, re, 0], A[:, im, 0] = -u.real, -u.imag
        cr = 1 + np.arange(k) * n + j
        ci = cr + k * n
        A[:, re, cr], A[:, re, ci] = -powers.real, powers.imag
        A[:, im, cr], A[:, im, ci] = -powers.imag, -powers.real
    A = A.reshape(m * (2 * n + 1), nv)
    b = b.reshape(-1)
    q_obj = np.zeros(nv)
    q_obj[0] = -1.0
    settings = clarabel.DefaultSettings()
    settings.verbose = False
    solver = clarabel.DefaultSolver(sparse.csc_matrix((nv, nv)), q_obj, sparse.csc_matrix(A), b,
                                    [clarabel.SecondOrderConeT(2 * n + 1)] * m, settings)
    sol = solver.solve()
    if str(sol.status) not in ("Solved", "AlmostSolved"):
        return None
    x = np.asarray(sol.x)
    C = (x[1:1 + k * n] + 1j * x[1 + k * n:]).reshape(k, n) if k else np.zeros((0, n))
    return x[0], C


def _socp_disc(domain, z, Xh, degree, m, margin):
    if domain.name in ("disc", "ball"):
        out = _ball_socp(z, Xh, degree, m, margin)
        if out is None or not out[0] > 0:
            return None
        t, C = out
        return AnalyticDisc(np.vstack([z, t * Xh, C]))
    import cvxpy as cp

    zeta = np.exp(2j * np.pi * np.arange(m) / m)
    t = cp.Variable()
    expr = np.outer(np.ones(m), z) + t * np.outer(zeta, Xh)
    C = None
    if degree > 1:
        C = cp.Variable((degree - 1, len(z)), complex=True)
        expr = expr + np.vander(zeta, degree + 1, increasing=True)[:, 2:] @ C
    prob = cp.Problem(cp.Maximize(t), _tighten(domain, expr, margin))
    try:
        with warnings.catch_warnings():
            # inaccurate solutions are harmless: every disc is re-verified densely
            warnings.simplefilter("ignore", UserWarning)
            prob.solve(solver="CLARABEL")
    except Exception:  # noqa: BLE001 - any solver failure falls back to Nelder-Mead
        return None
    if t.value is None or not np.isfinite(t.value) or t.value <= 0:
        return None
    coeffs = np.vstack([z, t.value * Xh] + ([C.value] if C is not None else []))
    return AnalyticDisc(coeffs)


def _tighten(domain, expr, margin):
    import cvxpy as cp

    if domain.name in ("disc", "ball"):
        return [cp.norm(expr, 2, axis=1) <= 1.0 - margin]
    return domain.cvx_constraints(expr)


def _nm_disc(domain, z, Xh, degree, budget, seed, samples):
    """Nelder-Mead over ``c_2..c_d``; the objective is the largest feasible ``t``."""
    n = len(z)

    def build(params, t):
        c = params.view(complex).reshape(degree - 1, n) if degree > 1 else np.zeros((0, n), complex)
        return AnalyticDisc(np.vstack([z, t * Xh, c]))

    def t_max(params):
        lo, hi = 0.0, 1.0
        while disc_feasible(domain, build(params, hi), samples).feasible and hi < 1e6:
            lo, hi = hi, 2 * hi
        if lo == 0.0 and not disc_feasible(domain, build(params, 1e-12), samples).feasible:
            return 0.0
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            if disc_feasible(domain, build(params, mid), samples).feasible:
                lo = mid
            else:
                hi = mid
        return lo

    x0 = np.zeros(2 * n * max(degree - 1, 0))
    if x0.size:
        rng = np.random.default_rng(seed)
        simplex = np.vstack([x0] + [x0 + 1e-3 * rng.normal(size=x0.size) for _ in range(x0.size)])
        res = optimize.minimize(lambda p: -t_max(p), x0, method="Nelder-Mead",
                                options={"maxfev": budget, "initial_simplex": simplex,
                                         "xatol": 1e-10, "fatol": 1e-12})
        x = res.x if -res.fun >= t_max(x0) else x0
    else:
        x = x0
    t = t_max(x)
    if t <= 0:
        return None
    return build(x, t)


@dataclass
class UpperBound:
    value: float
    disc: AnalyticDisc
    method: str
    degree: int

    def to_dict(self):
        return {"value": self.value, "method": self.method, "degree": self.degree,
                "scale": self.disc.scale}


def _ladder(degree):
    return list(range(1, degree + 1)) if degree <= 4 else [1, degree]


def kobayashi_upper(domain, z, X, degree=32, budget=2000, seed=0, method="auto", samples=None):
    """Best certified upper bound ``|X| / t`` over polynomial discs of degree
    ``<= degree``. The minimum over a ladder of degrees keeps the bound
    monotone in ``degree``."""
    z = np.asarray(z, complex)
    X = np.asarray(X, complex)
    nX = float(np.linalg.norm(X))
    if nX == 0:
        raise ValueError("direction must be nonzero")
    if domain.eval_r(z) >= 0:
        raise NoFeasibleDiscError("base point is not interior", z=z)
    Xh = _canonical_direction(X)
    use_socp = method == "socp" or (method == "auto" and (domain.name in ("disc", "ball") or _has_cvx(domain)))
    dense = samples or 4096
    best = None
    for d in _ladder(degree):
        disc, how = None, None
        if use_socp:
            raw = _socp_disc(domain, z, Xh, d, max(4 * d, 128), 1e-9)
            disc = _largest_scale(domain, raw, dense) if raw is not None else None
            how = "socp"
        if disc is None:
            disc = _nm_disc(domain, z, Xh, d, budget, seed, min(dense, 512))
            disc = _largest_scale(domain, disc, dense) if disc is not None else None
            how = "nelder-mead"
        if disc is None:
            continue
        t = float(np.linalg.norm(disc.derivative))
        if best is None or t > best[0]:
            best = (t, disc, how, d)
    if best is None:
        raise NoFeasibleDiscError("no feasible disc found", z=z)
    t, disc, how, d = best
    return UpperBound(nX / t, disc, how, d)


def _has_cvx(domain):
    try:
        import cvxpy  # noqa: F401
    except ImportError:  # pragma: no cover
        return False
    probe = np.zeros((1, domain.dimension), complex)
    try:
        return domain.cvx_constraints(probe) is not None
    except Exception:  # noqa: BLE001
        return False


# -- exact oracles ---------------------------------------------------------


def exact_metric(domain, z, X):
    """Closed forms on the unit disc and the unit ball."""
    if domain.name not in ("disc", "ball"):
        raise UnsupportedDomainError(f"no closed form on {domain.name}")
    z = np.atleast_1d(np.asarray(z, complex))
    X = np.atleast_1d(np.asarray(X, complex))
    a = 1.0 - float(np.vdot(z, z).real)
    if a <= 0:
        raise OutOfRangeError("point is not interior")
    if domain.name == "disc":
        return float(abs(X[0])) / a
    nX2 = float(np.vdot(X, X).real)
    return math.sqrt(nX2 / a + abs(np.vdot(z, X)) ** 2 / a ** 2)


# -- lower bounds ------------------------------------------------------------


@dataclass
class LowerPeak:
    value: float
    s_star: float
    repaired: bool = False
    repair_gap: float = 0.0
    saturated: bool = False


def _lower_hull(xs, ys):
    hull = []
    for x, y in zip(xs, ys):
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (x - x1) >= (y - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append((x, y))
    return np.array(hull)


_HULL_SAMPLES = 4001


def _convex_minorant(F1, s_max, n=_HULL_SAMPLES):
    s = np.linspace(0.0, s_max, n)
    v = np.array([F1(x) for x in s])
    d2 = v[2:] - 2 * v[1:-1] + v[:-2]
    if np.all(d2 >= -1e-10 * max(np.max(np.abs(v)), 1e-300)):
        return None, 0.0
    hull = _lower_hull(s, v)
    minor = np.interp(s, hull[:, 0], hull[:, 1])
    return hull, float(np.max(v - minor))


def lower_bound_peak(F1, F2, delta, X_norm, s_max=None, check_convexity=True, F1_inverse=None):
    """``X_norm / F1*(F2(delta))``.

    ``F1`` is inverted by bracketing in ``log s``; a non-convex ``F1`` is
    replaced by its convex minorant on ``[0, s_max]`` (flagged). When
    ``F2(delta) >= F1(s_max)`` the bound saturates at ``X_norm / s_max``.
    """
    y = float(F2(delta))
    if y <= 0:
        raise OutOfRangeError("F2 must be positive")
    hull, gap = (None, 0.0)
    if s_max is not None and check_convexity:
        hull, gap = _convex_minorant(F1, s_max)
    if s_max is not None:
        top = hull[-1, 1] if hull is not None else F1(s_max)
        if y >= top:
            return LowerPeak(X_norm / s_max, s_max, hull is not None, gap, True)
    if hull is not None:
        k = min(int(np.searchsorted(hull[:, 1], y)), len(hull) - 1)
        # a hull edge spanning more than one sample is a chord below F1;
        # elsewhere the minorant is F1 itself and the exact inverse applies
        if k > 0 and hull[k, 0] - hull[k - 1, 0] > 1.5 * s_max / (_HULL_SAMPLES - 1):
            s = float(np.interp(y, hull[:, 1], hull[:, 0]))
            return LowerPeak(X_norm / s, s, True, gap, False)
    if F1_inverse is not None:
        s = float(F1_inverse(y))
    else:
        s = _invert_increasing(F1, y)
    return LowerPeak(X_norm / s, s, hull is not None, gap, False)


def _invert_increasing(F, y):
    lo, hi = -1.0, 0.0
    while F(math.exp(lo)) >= y:
        lo *= 2
        if lo < -1400:
            raise OutOfRangeError("value below the range of F1", y=y)
    while F(math.exp(hi)) < y:
        hi = 2 * hi + 1
        if hi > 700:
            raise OutOfRangeError("value above the range of F1", y=y)
    x = optimize.brentq(lambda v: F(math.exp(v)) - y, lo, hi, xtol=1e-14, rtol=1e-15)
    return math.exp(x)


def peak_constant(assembly):
    """``c3`` in ``psi_{pi(z)}(z) >= -c3 delta^eta`` (worst over the calibration samples)."""
    rep = assembly.report
    if rep is None:
        from .bumping import verify_peak

        rep_peak = [verify_peak(assembly, assembly.domain.z_o, 200)]
    else:
        rep_peak = rep.peak
    return max(r.constants["c3"] for r in rep_peak)


def lower_bound_peak_assembly(assembly: BumpingAssembly, delta, X_norm, c3=None, cross_check=False):
    """Peak bound with ``F1 = c2 G^eta`` and ``F2 = c3 delta^eta`` from a calibrated assembly."""
    c3 = peak_constant(assembly) if c3 is None else c3
    eta = assembly.params.eta
    res = lower_bound_peak(assembly.F1, lambda d: c3 * d ** eta, delta, X_norm,
                           s_max=assembly.s_max, F1_inverse=assembly.F1_inverse)
    if cross_check and not res.saturated and not res.repaired:
        s = _invert_increasing(assembly.F1, c3 * delta ** eta)
        if abs(s - res.s_star) > 1e-6 * s:
            raise ConsistencyError("closed-form and bracketed inverses disagree", s=s, s_star=res.s_star)
    return res


def trivial_lower(domain, X_norm):
    """Cauchy bound ``|X| / diameter`` on bounded domains."""
    diam = {"disc": 2.0, "ball": 2.0}.get(domain.name)
    if diam is None and domain.name.startswith("ellipsoid"):
        diam = 2.0
    return X_norm / diam if diam else 0.0


def lower_scope(domain):
    """What the peak bound certifies: the whole domain when ``psi_w`` is
    globally defined, otherwise only the metric of the patch ``domain & V``
    (localizing to the full domain costs an unquantified constant)."""
    return "domain" if domain.global_r else "patch"


REF_DELTAS = tuple(np.geomspace(1e-9, 1e-1, 33))


def rate_constant(assembly, c3=None, ref_deltas=REF_DELTAS):
    """``c_hat = min_delta lower_peak(delta) / g(1/delta)`` over a reference grid."""
    c3 = peak_constant(assembly) if c3 is None else c3
    tr = assembly.transforms
    ratios = []
    for d in ref_deltas:
        if 1.0 / d <= assembly.rate.t0:
            continue
        lp = lower_bound_peak_assembly(assembly, d, 1.0, c3).value
        ratios.append(lp / tr.g(1.0 / d))
    if not ratios:
        raise OutOfRangeError("reference grid misses the domain of g")
    return min(ratios)


def lower_bound_rate(assembly, delta, X_norm, c_hat=None):
    """``c_hat g(1/delta) |X|``; returns ``(value, c_hat)``."""
    c_hat = rate_constant(assembly) if c_hat is None else c_hat
    return c_hat * assembly.transforms.g(1.0 / delta) * X_norm, c_hat


# -- estimate ----------------------------------------------------------------


@dataclass
class MetricEstimate:
    z: np.ndarray
    X: np.ndarray
    delta: float
    upper: float
    lower_peak: float
    lower_rate: float
    exact: float | None = None
    notes: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "z": [[c.real, c.imag] for c in self.z],
            "X": [[c.real, c.imag] for c in self.X],
            "delta": self.delta, "upper": self.upper, "lower_peak": self.lower_peak,
            "lower_rate": self.lower_rate, "exact": self.exact, "notes": self.notes,
        }


def estimate_metric(domain, z, X, assembly=None, degree=32, budget=2000, seed=0, c_hat=None):
    z = np.asarray(z, complex)
    X = np.asarray(X, complex)
    nX = float(np.linalg.norm(X))
    delta = domain.boundary_distance(z)
    up = kobayashi_upper(domain, z, X, degree, budget, seed)
    notes = {"upper": up.to_dict()}
    lp = lr = math.nan
    if assembly is not None:
        c3 = peak_constant(assembly)
        res = lower_bound_peak_assembly(assembly, delta, nX, c3)
        lp = max(res.value, trivial_lower(domain, nX))
        if 1.0 / delta > assembly.rate.t0:
            lr, c_hat = lower_bound_rate(assembly, delta, nX, c_hat)
        else:
            c_hat = rate_constant(assembly) if c_hat is None else c_hat
        notes.update({"c3": c3, "c2": assembly.c2, "c_hat": c_hat, "saturated": res.saturated,
                      "lower_scope": lower_scope(domain),
                      "repaired": res.repaired, "params": assembly.params.to_dict()})
    exact = exact_metric(domain, z, X) if domain.name in ("disc", "ball") else None
    return MetricEstimate(z, X, delta, up.value, lp, lr, exact, notes)


# -- mean value / Jensen -----------------------------------------------------


@dataclass
class MeanValueReport:
    center_value: float
    circle_mean: float
    sub_mean_gap: float
    jensen_gap: float | None
    laplacian_min: float
    quadrature_error: float

    def to_dict(self):
        return dict(self.__dict__)


def mean_value_check(psi, disc, n=256, F1=None, w=None, laplace_points=16):
    """Sub-mean-value gap ``avg(psi o disc) - psi(disc(0))`` and Jensen gap
    ``avg F1(|disc - w|) - F1(avg |disc - w|)`` on the circle ``|zeta| = scale``."""
    def mean(m):
        _, pts = disc.on_circle(m)
        vals = np.array([psi(p) for p in pts])
        return float(vals.mean()), pts

    avg, pts = mean(n)
    avg2, _ = mean(2 * n)
    qerr = abs(avg2 - avg)
    if qerr > 1e-6 * max(1.0, abs(avg)):
        raise ConsistencyError("circle quadrature not converged", n=n, error=qerr)
    center = float(psi(disc.center))
    jensen = None
    if F1 is not None and w is not None:
        dist = np.linalg.norm(pts - np.asarray(w, complex), axis=1)
        jensen = float(np.mean([F1(s) for s in dist]) - F1(float(dist.mean())))
    lap = math.inf
    h = 1e-3 * disc.scale
    for zeta in disc.scale * 0.5 * np.exp(2j * np.pi * np.arange(laplace_points) / laplace_points):
        vals = [psi(disc(zeta + d)[0]) for d in (h, -h, 1j * h, -1j * h)]
        lap = min(lap, (sum(vals) - 4 * psi(disc(zeta)[0])) / h ** 2)
    return MeanValueReport(center, avg, avg - center, jensen, float(lap), qerr)
