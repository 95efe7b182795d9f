"""Sweep <A> and p for the built-in models over theta and write one CSV.

Columns: model, theta, mean, mean_std_error, p, p_std_error, cos_theta, cos2_half
"""

import argparse
import csv
import math
import sys

import numpy as np

from teleport_hv.hv_models import BUILTIN_MODELS, ensemble_average, projected_probability
from teleport_hv.quadrature import DEFAULT_SEED, QuadratureSpec
from teleport_hv.spinor_core import Direction, Z_AXIS


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=25)
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)

    spec = QuadratureSpec(samples=args.samples, seed=args.seed)
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="", encoding="utf-8")
    w = csv.writer(fh)
    w.writerow(["model", "theta", "mean", "mean_std_error", "p", "p_std_error", "cos_theta", "cos2_half"])
    for name, model in BUILTIN_MODELS.items():
        for theta in np.linspace(0.0, math.pi, args.points):
            a = Direction.from_angles(theta, 0.0)
            m = ensemble_average(model, Z_AXIS, a, spec)
            p = projected_probability(model, Z_AXIS, a, spec)
            w.writerow([name, theta, m.value, m.std_error, p.value, p.std_error,
                        math.cos(theta), math.cos(theta / 2) ** 2])
    if fh is not sys.stdout:
        fh.close()


if __name__ == "__main__":
    main()
