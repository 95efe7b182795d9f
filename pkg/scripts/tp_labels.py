"""Run the three-particle chain for every (label0, label) pair of a candidate.

Pairs with label != label0 are outside the argument's scope; they are reported
with verdict "n/a".
"""

import argparse
import itertools

from teleport_hv.quadrature import DEFAULT_SEED, QuadratureSpec
from teleport_hv.runner import resolve_candidate
from teleport_hv.nogo import tp_nogo
from teleport_hv.spinor_core import Direction
from teleport_hv.teleport import ALL_LABELS


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--candidate", default="shipped")
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    args = ap.parse_args(argv)

    cand = resolve_candidate(args.candidate)
    spec = QuadratureSpec(samples=args.samples, seed=args.seed)
    n = Direction.from_angles(0.7, 0.2)
    print(f"{'label0':>7} {'label':>7} {'p':>8} {'residual':>9} {'violation':>9}  verdict")
    for label0, label in itertools.product(ALL_LABELS, ALL_LABELS):
        rep = tp_nogo(cand, n, label0, spec, label=label, pointwise_samples=20_000)
        print(f"{str(label0):>7} {str(label):>7} {rep.p:8.4f} {rep.contradiction_residual:9.4f} "
              f"{rep.pointwise_violation_fraction or 0.0:9.3f}  {rep.verdict or 'n/a'}")


if __name__ == "__main__":
    main()
