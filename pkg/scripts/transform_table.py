#!/usr/bin/env python3
"""Write a CSV table of rate transforms: t, f, g, G(1/t), f~, h."""
import argparse
import csv
import sys

import numpy as np

from kobalab.errors import KobalabError
from kobalab.rates import RateFunction, RateTransforms


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--f", default="power:0.5", help="rate spec, e.g. power:0.5 or logpower:2")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--tmin", type=float, default=2.0)
    p.add_argument("--tmax", type=float, default=1e6)
    p.add_argument("--n", type=int, default=25)
    p.add_argument("--out", default="-")
    args = p.parse_args(argv)
    f = RateFunction.from_spec(args.f)
    tr = RateTransforms(f, args.gamma)
    out = sys.stdout if args.out == "-" else open(args.out, "w", encoding="utf-8", newline="")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["t", "f", "g", "G_at_1_over_t", "f_tilde", "h"])

    def safe(fn, *a):
        try:
            return repr(float(fn(*a)))
        except KobalabError:
            return ""

    for t in np.geomspace(args.tmin, args.tmax, args.n):
        t = float(t)
        w.writerow([repr(t), repr(float(f(t))), safe(tr.g, t), safe(tr.G, 1.0 / t),
                    safe(tr.f_tilde, t), safe(tr.h, t, args.eta)])
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
