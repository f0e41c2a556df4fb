"""Acceptance suite shared by ``kobalab accept`` and the test-suite.

Each criterion returns a ``CriterionResult`` whose ``metrics`` hold every
number the verdict was based on. Wall-clock time is kept apart so that two
runs with the same seed can be compared for exact equality.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .bumping import calibrate, verify_bumping, verify_peak
from .domains import fproperty_check, get_domain
from .errors import DivergentIntegralError, KobalabError
from .holomaps import verify_hardy_littlewood
from .metric import (AnalyticDisc, exact_metric, kobayashi_upper, lower_bound_peak_assembly,
                     lower_bound_rate, mean_value_check, peak_constant, rate_constant,
                     trivial_lower)
from .rates import RateFunction, RateTransforms, claim_residuals
from .reporting import jsonable


@dataclass
class CriterionResult:
    id: int
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.id:2d} {self.name} ({self.seconds:.1f}s)"

    def to_dict(self, timings=False):
        d = {"id": self.id, "name": self.name, "passed": self.passed, "metrics": jsonable(self.metrics)}
        if timings:
            d["seconds"] = self.seconds
        return d


def _slope(x, y):
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


class Context:
    """Per-run cache of calibrated assemblies (calibration is deterministic)."""

    def __init__(self, seed=0, budget=1000):
        self.seed = seed
        self.budget = budget
        self._cal = {}

    def assembly(self, name):
        if name not in self._cal:
            self._cal[name] = calibrate(get_domain(name), budget=self.budget, seed=self.seed)
        return self._cal[name]


# -- criteria ------------------------------------------------------------------


def c1_rate_transforms(ctx):
    ts = np.geomspace(2.0, 1e6, 25)
    worst_g = worst_ft = 0.0
    for eps in (0.25, 0.5):
        tr = RateTransforms(RateFunction.power(eps), method="quad")
        for t in ts:
            worst_g = max(worst_g, abs(tr.g(t) / (eps * t ** eps) - 1))
            worst_ft = max(worst_ft, abs(tr.f_tilde(t) / (eps * eps * t ** eps) - 1))
    return worst_g <= 1e-6 and worst_ft <= 1e-6, {"max_rel_g": worst_g, "max_rel_f_tilde": worst_ft}


def c2_claim(ctx):
    deltas = np.geomspace(1e-4, 1e-1, 7)
    worst = 0.0
    for f in (RateFunction.power(0.25), RateFunction.power(0.5), RateFunction.logpower(2.0)):
        for gamma in (1.0, 0.1, 0.01):
            for d in deltas:
                worst = max(worst, *claim_residuals(f, gamma, d))
    exact = 0.0
    for gamma in (1.0, 0.1, 0.01):
        for d in deltas:
            exact = max(exact, *claim_residuals(RateFunction.power(1.0), gamma, d))
    return worst <= 1e-3 and exact <= 1e-10, {"max_residual": worst, "max_residual_linear": exact}


def c3_fubini(ctx):
    worst = 0.0
    for eps in (0.25, 0.5):
        tr = RateTransforms(RateFunction.power(eps))
        for eta in (0.25, 0.5, 1.0):
            for t in np.geomspace(10.0, 1e4, 7):
                closed = tr.h(t, eta)
                swapped = tr.h_direct(t, eta)
                double = tr.h_double(t, eta)
                worst = max(worst, abs(swapped / closed - 1), abs(double / closed - 1),
                            abs(double / swapped - 1))
    return worst <= 1e-5, {"max_rel_disagreement": worst}


def c4_fproperty_ball(ctx):
    dom = get_domain("ball")
    rng = np.random.default_rng(ctx.seed)
    out = {}
    ok = True
    for delta in (1e-1, 1e-2, 1e-3):
        grid = dom.strip_grid(delta, 1000, rng)
        rep = fproperty_check(dom, delta, grid)
        eig_err = 0.0
        for z in grid:
            ev = np.linalg.eigvalsh(dom.phi_jet(delta, z).hess)
            eig_err = max(eig_err, float(np.max(np.abs(ev * delta - 1.0))))
        good = rep.passed and eig_err <= 1e-6
        ok &= good
        out[f"{delta:g}"] = {"points": rep.n_points, "max_rel_eig_error": eig_err,
                             "c_fit": rep.c_fit, "C_fit": rep.C_fit, "passed": good}
    return ok, out


def _negative_controls(asm, w, budget, seed):
    res = {}
    trials = {
        "epsilon_0.5": asm.with_params(epsilon=0.5),
        "minus_r_over_delta": type(asm)(asm.domain, asm.params, lambda d, rj, z: (rj / d) * -1.0, asm.rate),
    }
    for key, trial in trials.items():
        rep = verify_bumping(trial, w, budget, seed)
        fail = rep.first_failure
        res[key] = {"failed": fail is not None, "property": fail.name if fail else None,
                    "witness": fail is not None and fail.witness is not None}
    caught = any(r["failed"] and r["witness"] for r in res.values())
    return caught, res


def c5_bumping(ctx):
    ok = True
    out = {}
    for name in ("ball", "graph2"):
        asm = ctx.assembly(name)
        w = asm.domain.z_o
        rep = verify_bumping(asm, w, 1000, ctx.seed)
        checks = {c.name: {"passed": c.passed, "value": c.value, "count": c.count} for c in rep.checks}
        caught, neg = _negative_controls(asm, w, 1000, ctx.seed)
        good = rep.passed and checks["upper_by_G"]["count"] >= 1000 \
            and checks["gradient_range"]["count"] >= 100 and caught
        ok &= good
        out[name] = {"params": asm.params.to_dict(), "checks": checks, "negative_controls": neg,
                     "passed": good}
    return ok, out


def c6_peak(ctx):
    asm = ctx.assembly("ball")
    rep = verify_peak(asm, asm.domain.z_o, 1000, ctx.seed)
    checks = {c.name: {"passed": c.passed, "value": c.value, "count": c.count} for c in rep.checks}
    finite = all(math.isfinite(rep.constants[k]) for k in ("holder", "c2", "c3"))
    ok = rep.passed and finite and checks["plurisubharmonic"]["value"] >= -1e-6
    return ok, {"params": asm.params.to_dict(), "checks": checks,
                "constants": {k: rep.constants[k] for k in ("holder", "c2", "c2_fitted", "c3")}}


def _tangent(z):
    if len(z) == 1:
        return 1j * z / np.linalg.norm(z)
    return np.array([-np.conj(z[1]), np.conj(z[0])]) / np.linalg.norm(z)


def c7_sandwich(ctx, points=100):
    ok = True
    out = {}
    for name in ("disc", "ball"):
        asm = ctx.assembly(name)
        dom = asm.domain
        c3 = peak_constant(asm)
        rng = np.random.default_rng(ctx.seed)
        worst_up = 0.0
        violations = 0
        n = 0
        for _ in range(points):
            z = rng.normal(size=dom.dimension) + 1j * rng.normal(size=dom.dimension)
            z *= 0.99 * rng.uniform(0.0, 1.0) ** (1.0 / (2 * dom.dimension)) / np.linalg.norm(z)
            for X in (z / np.linalg.norm(z), _tangent(z)):
                ex = exact_metric(dom, z, X)
                up = kobayashi_upper(dom, z, X, seed=ctx.seed).value
                delta = dom.boundary_distance(z)
                lo = max(lower_bound_peak_assembly(asm, delta, 1.0, c3).value, trivial_lower(dom, 1.0))
                worst_up = max(worst_up, up / ex - 1)
                violations += int(not (lo <= ex * (1 + 1e-12) and ex <= up * (1 + 1e-12)))
                n += 1
        good = violations == 0 and worst_up <= 0.01
        ok &= good
        out[name] = {"pairs": n, "order_violations": violations, "max_rel_upper_excess": worst_up,
                     "passed": good}
    return ok, out


def c8_slope(ctx):
    deltas = np.geomspace(1e-4, 1e-2, 9)
    ball = ctx.assembly("ball")
    X = np.array([0j, 1 + 0j])
    lr = [lower_bound_rate(ball, d, 1.0, rate_constant(ball))[0] for d in deltas]
    ex = [exact_metric(ball.domain, np.array([1 - d, 0j]), X) for d in deltas]
    s_lr, s_ex = -_slope(deltas, lr), -_slope(deltas, ex)
    g2 = ctx.assembly("graph2")
    c_hat = rate_constant(g2)
    dist = [g2.domain.boundary_distance(np.array([0j, -1j * d])) for d in deltas]
    lr2 = [lower_bound_rate(g2, d, 1.0, c_hat)[0] for d in dist]
    s2 = -_slope(dist, lr2)
    # raw peak-bound slopes: informative only where the bound is not saturated
    lp = [lower_bound_peak_assembly(ball, d, 1.0).value for d in deltas]
    lp2 = [lower_bound_peak_assembly(g2, d, 1.0).value for d in dist]
    ok = abs(s_lr - 0.5) <= 0.02 and abs(s_ex - 0.5) <= 0.02 and abs(s2 - 0.25) <= 0.03
    return ok, {"ball_lower_rate_slope": s_lr, "ball_exact_slope": s_ex, "graph2_lower_rate_slope": s2,
                "ball_lower_peak_slope": -_slope(deltas, lp), "graph2_lower_peak_slope": -_slope(dist, lp2)}


def c9_infinite_type(ctx):
    dom = get_domain("flat")
    rng = np.random.default_rng(ctx.seed)
    fprop = {}
    for delta in (1e-2, 1e-3, 1e-4, 1e-5, 1e-6):
        rep = fproperty_check(dom, delta, dom.strip_grid(delta, 200, rng))
        fprop[f"{delta:g}"] = {"passed": rep.passed, "c_fit": rep.c_fit, "C_fit": rep.C_fit}
    conditional = all(v["passed"] for v in fprop.values())
    asm = ctx.assembly("flat")
    deltas = np.geomspace(1e-6, 1e-2, 9)
    c3 = peak_constant(asm)
    c_hat = rate_constant(asm, c3)
    lr = [lower_bound_rate(asm, d, 1.0, c_hat)[0] for d in deltas]
    lp = [lower_bound_peak_assembly(asm, d, 1.0, c3).value for d in deltas]
    logs = np.log(1.0 / deltas)
    s_rate = float(np.polyfit(np.log(logs), np.log(lr), 1)[0])
    s_peak = float(np.polyfit(np.log(logs), np.log(lp), 1)[0])
    ok = conditional and abs(s_rate - 1.0) <= 0.1
    return ok, {"fproperty_conditional": conditional, "fproperty": fprop,
                "lower_rate_slope_vs_log": s_rate, "lower_peak_slope_vs_log": s_peak, "c_hat": c_hat}


def c10_hardy_littlewood(ctx):
    rep = verify_hardy_littlewood(lambda d: math.sqrt(d), n_samples=400, seed=ctx.seed)
    try:
        verify_hardy_littlewood(lambda d: 1.0 / math.log(math.e / d), seed=ctx.seed)
        negative = False
    except DivergentIntegralError:
        negative = True
    ok = rep.C_fit <= 1 + 1e-6 and negative
    return ok, {"C_fit": rep.C_fit, "pairs": rep.pairs, "saturation_error": rep.saturation_error,
                "non_integrable_rejected": negative}


def c11_mean_value(ctx, discs=100):
    asm = ctx.assembly("ball")
    dom = asm.domain
    rng = np.random.default_rng(ctx.seed)
    worst_sub = worst_jensen = math.inf
    for w in dom.sample_boundary(rng, discs):
        z = w * (1 - 10 ** rng.uniform(-4, -1))
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v /= np.linalg.norm(v)
        a = abs(np.vdot(v, z))
        s = 0.9 * (-a + math.sqrt(a * a + 1 - float(np.vdot(z, z).real)))
        disc = AnalyticDisc.linear(z, v, s)
        rep = mean_value_check(lambda p, w=w: asm.psi(p, w), disc, F1=asm.F1, w=w)
        worst_sub = min(worst_sub, rep.sub_mean_gap)
        worst_jensen = min(worst_jensen, rep.jensen_gap)
    ok = worst_sub >= -1e-9 and worst_jensen >= -1e-9
    return ok, {"discs": discs, "min_sub_mean_gap": worst_sub, "min_jensen_gap": worst_jensen}


CRITERIA = (
    (1, "rate transforms vs closed forms", c1_rate_transforms),
    (2, "G claim residuals", c2_claim),
    (3, "Fubini identity for h", c3_fubini),
    (4, "f-Property verifier on the ball", c4_fproperty_ball),
    (5, "bumping properties on ball and graph2", c5_bumping),
    (6, "peak properties on the ball", c6_peak),
    (7, "metric sandwich on disc and ball", c7_sandwich),
    (8, "tangential rate slope", c8_slope),
    (9, "infinite-type rate", c9_infinite_type),
    (10, "Hardy-Littlewood extremal", c10_hardy_littlewood),
    (11, "mean-value and Jensen gaps", c11_mean_value),
)


def run_criterion(cid, ctx):
    _, name, fn = next(c for c in CRITERIA if c[0] == cid)
    t = time.perf_counter()
    try:
        ok, metrics = fn(ctx)
    except KobalabError as exc:
        ok, metrics = False, {"error": exc.to_dict()}
    return CriterionResult(cid, name, bool(ok), metrics, time.perf_counter() - t)


def run_suite(seed=0, ids=None, echo=None):
    """Run criteria 1-11 in order, then criterion 12 (a second full run compared for equality)."""
    ids = [c[0] for c in CRITERIA] if ids is None else [i for i in ids if i != 12]
    ctx = Context(seed)
    results = []
    for cid in ids:
        r = run_criterion(cid, ctx)
        results.append(r)
        if echo:
            echo(r.line())
    return results


def report_json(results, timings=False):
    return json.dumps({"criteria": [r.to_dict(timings) for r in results],
                       "passed": all(r.passed for r in results)}, indent=2, sort_keys=True)


def determinism(first, seed=0):
    """Criterion 12: rerun the suite and compare the timing-free reports byte for byte."""
    t = time.perf_counter()
    second = run_suite(seed, [r.id for r in first])
    same = report_json(first) == report_json(second)
    return CriterionResult(12, "determinism", same, {"identical_reports": same, "criteria": len(first)},
                           time.perf_counter() - t)


def run_all(seed=0, echo=None):
    results = run_suite(seed, echo=echo)
    r12 = determinism(results, seed)
    if echo:
        echo(r12.line())
    return results + [r12]
