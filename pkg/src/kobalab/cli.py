"""``kobalab`` command-line front end.

Exit codes: 0 success, 1 a property check failed or a numerical error was
raised (the report carries the code and witness), 2 usage error.
Points and directions are flat real lists ``re1,im1,re2,im2,...``.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from dataclasses import replace

import numpy as np

from . import acceptance
from .bumping import BumpingAssembly, BumpingParams, calibrate, default_w, verify_bumping, verify_peak
from .config import ExperimentConfig, Ray, flatten, parse_point
from .domains import get_domain
from .errors import ConfigError, DivergentIntegralError, KobalabError
from .holomaps import (MAP_NAMES, chain_bound, get_map, measure_modulus, predicted_rate,
                       schwarz_pick_check, verify_hardy_littlewood)
from .metric import (estimate_metric, exact_metric, kobayashi_upper, lower_bound_peak_assembly,
                     lower_bound_rate, lower_scope, peak_constant, rate_constant, trivial_lower)
from .rates import RateFunction, RateTransforms, claim_residuals
from .reporting import dumps, envelope, validate

OUTPUT_ENV = "KOBALAB_OUTPUT_DIR"
CSV_COLUMNS = ("delta", "lower_peak", "lower_rate", "upper", "exact_or_blank")


class UsageError(Exception):
    pass


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _point(text):
    try:
        return parse_point(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _rate(text):
    try:
        return RateFunction.from_spec(text)
    except KobalabError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _G_spec(text):
    """``power:a`` gives ``delta^a``; ``log:p`` gives ``log(e^c / delta)^-p`` with ``c = max(p, 1)``."""
    family, _, arg = text.partition(":")
    try:
        a = float(arg)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad G spec {text!r}") from exc
    if family == "power":
        return lambda d: d ** a
    if family == "log":
        c = max(a, 1.0)
        return lambda d: (c - math.log(d)) ** -a
    raise argparse.ArgumentTypeError(f"unknown G family {family!r}")


# -- helpers -------------------------------------------------------------------


def _config(args):
    return ExperimentConfig.load(args.config) if getattr(args, "config", None) else None


def _explicit_params(args):
    keys = ("gamma", "epsilon", "L", "eta", "v_radius")
    given = {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}
    return given or None


def _assembly(args, domain, rate=None):
    params = _explicit_params(args)
    if params is None:
        return calibrate(domain, rate=rate, budget=args.budget, seed=args.seed)
    if "v_radius" not in params:
        params["v_radius"] = 1.0 if domain.global_r else 0.8 * min(domain.patch.half_re)
    return BumpingAssembly(domain, replace(BumpingParams(), **params), rate=rate)


def _check_dim(dom, *points):
    for z in points:
        if z is not None and len(z) != dom.dimension:
            raise UsageError(f"{dom.name} needs {2 * dom.dimension} real coordinates per point")


def _levi_tol(args, cfg):
    if args.tol is not None:
        return args.tol
    return (cfg.tolerances.get("levi") if cfg else None) or 1e-6


# -- commands ------------------------------------------------------------------


def cmd_rates(args):
    f = args.f
    tr = RateTransforms(f, args.gamma, "quad")
    points = []
    for t in args.t:
        row = {"t": t, "f": float(f(t)), "g": tr.g(t), "f_tilde": None}
        try:
            row["f_tilde"] = tr.f_tilde(t)
        except DivergentIntegralError as exc:
            row["f_tilde_error"] = exc.code
        points.append(row)
    G = []
    for d in args.delta:
        G.append({"delta": d, "G": tr.G(d), "claim_residuals": list(claim_residuals(f, args.gamma, d))})
    return True, {"f": f.to_spec(), "gamma": args.gamma, "points": points, "G": G}


def cmd_calibrate(args):
    dom = get_domain(args.domain)
    _check_dim(dom, *(args.w or []))
    ws = args.w or None
    asm = calibrate(dom, rate=args.rate, ws=ws, budget=args.budget, seed=args.seed, eta=args.eta or 0.5)
    return True, asm.report.to_dict()


def _verify(args, kind):
    cfg = _config(args)
    dom = get_domain(args.domain)
    _check_dim(dom, *(args.w or []))
    asm = _assembly(args, dom, args.rate)
    w = args.w[0] if args.w else default_w(dom)[0]
    tol = _levi_tol(args, cfg)
    if kind == "bumping":
        rep = verify_bumping(asm, w, args.budget, args.seed, levi_tol=tol)
    else:
        rep = verify_peak(asm, w, args.budget, args.seed, levi_tol=tol)
    return rep.passed, rep.to_dict()


def cmd_verify_bumping(args):
    return _verify(args, "bumping")


def cmd_verify_peak(args):
    return _verify(args, "peak")


def cmd_estimate_metric(args):
    dom = get_domain(args.domain)
    _check_dim(dom, args.point, args.direction)
    asm = None if args.no_lower else _assembly(args, dom, args.rate)
    est = estimate_metric(dom, args.point, args.direction, asm, degree=args.degree, budget=args.budget,
                          seed=args.seed)
    d = est.to_dict()
    d["z"], d["X"] = flatten(est.z), flatten(est.X)
    ok = True
    if est.exact is not None:
        lo = est.lower_peak if math.isfinite(est.lower_peak) else -math.inf
        ok = lo <= est.exact * (1 + 1e-12) and est.exact <= est.upper * (1 + 1e-12)
    return ok, d


def _sweep_rows(dom, asm, ray, args):
    rows = []
    c3 = peak_constant(asm)
    c_hat = rate_constant(asm, c3)
    X = ray.vector
    nX = float(np.linalg.norm(X))
    for delta in ray.deltas:
        z = ray.point(dom, delta)
        dist = dom.boundary_distance(z)
        lp = max(lower_bound_peak_assembly(asm, dist, nX, c3).value, trivial_lower(dom, nX))
        lr = lower_bound_rate(asm, dist, nX, c_hat)[0] if 1.0 / dist > asm.rate.t0 else math.nan
        up = kobayashi_upper(dom, z, X, degree=args.degree, budget=args.budget, seed=args.seed).value
        ex = exact_metric(dom, z, X) if dom.name in ("disc", "ball") else None
        rows.append({"delta": delta, "distance": dist, "lower_peak": lp, "lower_rate": lr, "upper": up,
                     "exact_or_blank": ex})
    return rows


def cmd_sweep(args):
    cfg = _config(args)
    if cfg is not None:
        dom_name, rays = cfg.domain, cfg.rays
        rate = cfg.rate_function
        csv_path = args.csv or cfg.output.get("csv")
    else:
        if args.base is None or args.deltas is None:
            raise UsageError("sweep needs --config or --base and --deltas")
        dom_name, rate, csv_path = args.domain, args.rate, args.csv
        dom = get_domain(dom_name)
        _check_dim(dom, args.base, args.vector)
        vec = args.vector
        if vec is None:
            n = dom.normal(args.base)
            vec = np.array([-np.conj(n[1]), np.conj(n[0])]) if dom.dimension == 2 else n
        if any(b >= a for a, b in zip(args.deltas, args.deltas[1:])) or min(args.deltas) <= 0:
            raise UsageError("deltas must be positive and strictly decreasing")
        rays = [Ray(args.base, vec, args.deltas)]
    dom = get_domain(dom_name)
    asm = _assembly(args, dom, rate)
    out = []
    for i, ray in enumerate(rays):
        for row in _sweep_rows(dom, asm, ray, args):
            out.append({"ray": i, **row})
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in out:
        writer.writerow([_csv_num(row[c]) for c in CSV_COLUMNS])
    if csv_path:
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write(buf.getvalue())
    ok = all(r["exact_or_blank"] is None or r["lower_peak"] <= r["exact_or_blank"] * (1 + 1e-12)
             <= r["upper"] * (1 + 1e-12) for r in out)
    return ok, {"domain": dom.name, "params": asm.params.to_dict(), "lower_scope": lower_scope(dom),
                "rows": out, "csv": csv_path}


def _csv_num(v):
    return "" if v is None else repr(float(v))


def cmd_holder_rate(args):
    spec = predicted_rate(args.f, args.eta)
    return True, {"f": args.f.to_spec(), "eta": args.eta, "table": spec.table(args.t)}


def cmd_verify_hl(args):
    a, b = args.interval
    rep = verify_hardy_littlewood(args.G, (a, b), args.samples, args.seed)
    ok = math.isfinite(rep.C_fit)
    return ok, {"G": args.G_text, "interval": [a, b], **rep.to_dict()}


def cmd_measure_modulus(args):
    hmap = get_map(args.map)
    spec = predicted_rate(args.f, args.eta)
    rep = measure_modulus(hmap, spec, args.budget, args.seed)
    sp = schwarz_pick_check(hmap, seed=args.seed)
    chain = chain_bound(hmap, args.f, args.eta, seed=args.seed)
    ok = math.isfinite(rep.predicted_constant) and sp <= 1 + 1e-9
    return ok, {**rep.to_dict(), "schwarz_pick_max_ratio": sp, "chain_bound_constant": chain,
                "f": args.f.to_spec(), "eta": args.eta}


def cmd_accept(args):
    echo = (lambda line: print(line, file=sys.stderr, flush=True))
    results = acceptance.run_all(args.seed, echo=echo)
    return all(r.passed for r in results), {"criteria": [r.to_dict(args.timings) for r in results]}


COMMANDS = {
    "rates": cmd_rates, "calibrate": cmd_calibrate, "verify-bumping": cmd_verify_bumping,
    "verify-peak": cmd_verify_peak, "estimate-metric": cmd_estimate_metric, "sweep": cmd_sweep,
    "holder-rate": cmd_holder_rate, "verify-hl": cmd_verify_hl, "measure-modulus": cmd_measure_modulus,
    "accept": cmd_accept,
}


# -- parser --------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--budget", type=int, default=1000, help="sample/optimizer budget")
    common.add_argument("--tol", type=float, default=None, help="Levi-form tolerance override")
    common.add_argument("--out", default=None, help=f"report path (default: ${OUTPUT_ENV}/<command>.json)")
    common.add_argument("--config", default=None, help="JSON experiment config")
    common.add_argument("--timings", action="store_true", help="include wall-clock seconds (breaks byte equality)")

    params = argparse.ArgumentParser(add_help=False)
    params.add_argument("--domain", default="ball")
    params.add_argument("--rate", type=_rate, default=None, help="override f, e.g. power:0.5")
    params.add_argument("--w", type=_point, action="append", help="boundary base point (repeatable)")
    params.add_argument("--gamma", type=float)
    params.add_argument("--epsilon", type=float)
    params.add_argument("--L", type=float)
    params.add_argument("--eta", type=float)
    params.add_argument("--v-radius", dest="v_radius", type=float)

    p = argparse.ArgumentParser(prog="kobalab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("rates", parents=[common], help="g, f~, G and claim residuals")
    s.add_argument("--f", type=_rate, required=True)
    s.add_argument("--t", type=_floats, default=[4.0])
    s.add_argument("--gamma", type=float, default=1.0)
    s.add_argument("--delta", type=_floats, default=[])

    for name in ("calibrate", "verify-bumping", "verify-peak"):
        sub.add_parser(name, parents=[common, params])

    s = sub.add_parser("estimate-metric", parents=[common, params])
    s.add_argument("--point", type=_point, required=True)
    s.add_argument("--direction", type=_point, required=True)
    s.add_argument("--degree", type=int, default=32)
    s.add_argument("--no-lower", action="store_true")

    s = sub.add_parser("sweep", parents=[common, params], help="CSV of bounds along a boundary-approach ray")
    s.add_argument("--base", type=_point)
    s.add_argument("--vector", type=_point)
    s.add_argument("--deltas", type=_floats)
    s.add_argument("--degree", type=int, default=32)
    s.add_argument("--csv", default=None)

    s = sub.add_parser("holder-rate", parents=[common])
    s.add_argument("--f", type=_rate, required=True)
    s.add_argument("--eta", type=float, required=True)
    s.add_argument("--t", type=_floats, default=[10.0, 100.0, 1000.0, 10000.0])

    s = sub.add_parser("verify-hl", parents=[common])
    s.add_argument("--G", dest="G_text", required=True, help="power:a or log:p")
    s.add_argument("--interval", type=_floats, default=[0.0, 1.0])
    s.add_argument("--samples", type=int, default=400)

    s = sub.add_parser("measure-modulus", parents=[common])
    s.add_argument("--map", choices=MAP_NAMES, required=True)
    s.add_argument("--f", type=_rate, default=RateFunction.power(0.5))
    s.add_argument("--eta", type=float, default=1.0)

    sub.add_parser("accept", parents=[common])
    return p


def _emit(args, doc):
    text = dumps(validate(doc))
    path = args.out
    if path is None and os.environ.get(OUTPUT_ENV):
        path = os.path.join(os.environ[OUTPUT_ENV], f"{args.command}.json")
    if path is None and getattr(args, "config", None):
        cfg = ExperimentConfig.load(args.config)
        path = cfg.output.get("report")
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)


def run_command(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify-hl":
            args.G = _G_spec(args.G_text)
            if len(args.interval) != 2 or args.interval[1] <= args.interval[0]:
                raise UsageError("interval needs two increasing numbers")
        cfg = _config(args)
        if cfg is not None:
            given = argv if argv is not None else sys.argv[1:]
            if "--seed" not in given:
                args.seed = cfg.seed
            if "--budget" not in given:
                args.budget = cfg.budget
            if hasattr(args, "domain") and "--domain" not in given:
                args.domain = cfg.domain
            if hasattr(args, "rate") and "--rate" not in given and cfg.rate is not None:
                args.rate = cfg.rate_function
        passed, result = COMMANDS[args.command](args)
    except (UsageError, ConfigError, argparse.ArgumentTypeError) as exc:
        parser.print_usage(sys.stderr)
        print(f"kobalab: error: {exc}", file=sys.stderr)
        return 2
    except KobalabError as exc:
        _emit(args, envelope(args.command, args.seed, False, None, exc.to_dict()))
        return 1
    _emit(args, envelope(args.command, args.seed, passed, result))
    return 0 if passed else 1


def main(argv=None):
    sys.exit(run_command(argv))


if __name__ == "__main__":
    main()
