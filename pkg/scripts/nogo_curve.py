"""Contradiction residual |p - p^2| and conditional-vs-final L1 distance as the
angle between state and setting varies.

Columns: theta, p, p_std_error, residual, residual_error, density_l1, verdict
"""

import argparse
import csv
import math
import sys

import numpy as np

from teleport_hv.hv_models import get_model
from teleport_hv.nogo import one_spin_nogo
from teleport_hv.quadrature import DEFAULT_SEED, QuadratureSpec
from teleport_hv.spinor_core import Direction, Z_AXIS


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--model", default="model2")
    ap.add_argument("--points", type=int, default=19)
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)

    model = get_model(args.model)
    spec = QuadratureSpec(samples=args.samples, seed=args.seed)
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="", encoding="utf-8")
    w = csv.writer(fh)
    w.writerow(["theta", "p", "p_std_error", "residual", "residual_error", "density_l1", "verdict"])
    for theta in np.linspace(0.0, math.pi, args.points):
        rep = one_spin_nogo(model, Z_AXIS, Direction.from_angles(theta, 0.0), spec)
        w.writerow([theta, rep.p, rep.p_std_error, rep.contradiction_residual,
                    rep.residual_error, rep.density_l1, rep.verdict])
    if fh is not sys.stdout:
        fh.close()


if __name__ == "__main__":
    main()
