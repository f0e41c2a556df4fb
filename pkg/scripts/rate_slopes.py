#!/usr/bin/env python3
"""Lower bounds along boundary-approach rays and their fitted growth slopes.

Ball (tangential direction) and graph2 are fitted in log-log coordinates
against 1/delta; the flat domain is fitted against log(1/delta).
"""
import argparse
import csv
import json
import sys

import numpy as np

from kobalab.bumping import calibrate
from kobalab.domains import get_domain
from kobalab.metric import (exact_metric, lower_bound_peak_assembly, lower_bound_rate,
                            lower_scope, peak_constant, rate_constant)

RAYS = {
    "ball": (lambda d: np.array([1 - d, 0j]), np.array([0j, 1 + 0j]), (1e-4, 1e-2)),
    "graph2": (lambda d: np.array([0j, -1j * d]), np.array([1 + 0j, 0j]), (1e-4, 1e-2)),
    "flat": (lambda d: np.array([0j, -1j * d]), np.array([1 + 0j, 0j]), (1e-6, 1e-2)),
}


def ray_rows(name, n, budget, seed):
    point, X, (lo, hi) = RAYS[name]
    asm = calibrate(get_domain(name), budget=budget, seed=seed)
    c3 = peak_constant(asm)
    c_hat = rate_constant(asm, c3)
    rows = []
    for d in np.geomspace(hi, lo, n):
        z = point(d)
        dist = asm.domain.boundary_distance(z)
        rows.append({
            "domain": name, "delta": dist,
            "lower_peak": lower_bound_peak_assembly(asm, dist, 1.0, c3).value,
            "lower_rate": lower_bound_rate(asm, dist, 1.0, c_hat)[0],
            "exact_or_blank": exact_metric(asm.domain, z, X) if name == "ball" else None,
        })
    return asm, c_hat, rows


def slope(name, rows, key):
    d = np.array([r["delta"] for r in rows])
    y = np.array([r[key] for r in rows])
    x = np.log(np.log(1 / d)) if name == "flat" else np.log(1 / d)
    return float(np.polyfit(x, np.log(y), 1)[0])


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--domains", nargs="+", default=list(RAYS), choices=list(RAYS))
    p.add_argument("--n", type=int, default=9)
    p.add_argument("--budget", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", default=None)
    args = p.parse_args(argv)
    all_rows, summary = [], {}
    for name in args.domains:
        asm, c_hat, rows = ray_rows(name, args.n, args.budget, args.seed)
        all_rows += rows
        summary[name] = {"c_hat": c_hat, "lower_scope": lower_scope(asm.domain),
                         "lower_rate_slope": slope(name, rows, "lower_rate"),
                         "lower_peak_slope": slope(name, rows, "lower_peak")}
        if name == "ball":
            summary[name]["exact_slope"] = slope(name, rows, "exact_or_blank")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            w = csv.DictWriter(fh, ["domain", "delta", "lower_peak", "lower_rate", "exact_or_blank"],
                               lineterminator="\n")
            w.writeheader()
            for r in all_rows:
                w.writerow({k: "" if v is None else v for k, v in r.items()})
    json.dump(summary, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
