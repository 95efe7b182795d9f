"""``teleport-hv`` command line entry point.

Exit codes: 0 pass, 2 tolerance breach, 3 verdict mismatch, 64 usage or parse
error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from .errors import TeleportHVError
from .quadrature import DEFAULT_SAMPLES, SCHEMES
from .runner import (
    EXIT_TOLERANCE,
    EXIT_USAGE,
    ConfigError,
    RunConfig,
    default_seed,
    parse_angles,
    parse_sweep,
    payload_digest,
    run_config,
    to_csv,
    to_json,
)
from .teleport import BellLabel


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose errors exit with 64 instead of 2.

    Comma lists of numbers such as ``-1,-1`` are accepted as option values.
    """

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._negative_number_matcher = re.compile(r"^-[\d.][\d.eE+-]*(,[-+]?[\d.][\d.eE+-]*)*$")

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _angles(text):
    try:
        return parse_angles(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _label(text):
    try:
        return str(BellLabel.of(text))
    except TeleportHVError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _sweep(text):
    try:
        parse_sweep(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return text


def _add_quadrature(p, samples=DEFAULT_SAMPLES):
    p.add_argument("--samples", type=int, default=samples)
    p.add_argument("--seed", type=lambda s: int(s, 0), default=None,
                   help="default: $TELEPORT_HV_SEED or the built-in seed")
    p.add_argument("--scheme", choices=SCHEMES, default="monte_carlo")
    p.add_argument("--partitions", type=int, default=1)


def _add_output(p, formats=("json",)):
    p.add_argument("--out", dest="out_path", default=None, help="write report here instead of stdout")
    p.add_argument("--format", dest="output", choices=formats, default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="teleport-hv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)

    tele = sub.add_parser("teleport", help="exact protocol checks")
    tsub = tele.add_subparsers(dest="action", required=True, parser_class=_Parser)
    tv = tsub.add_parser("verify", help="probabilities, fidelities, rotation table, route equality")
    tv.add_argument("--n", type=_angles, default=None, help="fix n (theta,phi); default random grid")
    tv.add_argument("--label0", type=_label, default=None)
    tv.add_argument("--tol", type=float, default=1e-12)
    tv.add_argument("--grid", type=int, default=50, help="number of random (n, c) pairs")
    tv.add_argument("--seed", type=lambda s: int(s, 0), default=None)
    _add_output(tv)

    hv = sub.add_parser("hv", help="hidden-variable expectations")
    hsub = hv.add_subparsers(dest="action", required=True, parser_class=_Parser)
    he = hsub.add_parser("expect", help="<A> over a theta sweep against cos(theta)")
    he.add_argument("--model", default="model1", help="model1, model2 or file:<path>")
    he.add_argument("--n", type=_angles, default=None)
    he.add_argument("--sweep", type=_sweep, default=None, help="theta0:theta1:points (default 0:pi:13)")
    _add_quadrature(he)
    _add_output(he, ("json", "csv"))

    ng = sub.add_parser("nogo", help="projection vs conditioning checks")
    nsub = ng.add_subparsers(dest="action", required=True, parser_class=_Parser)
    one = nsub.add_parser("one-spin")
    one.add_argument("--model", default="model2")
    one.add_argument("--n", type=_angles, default=None)
    one.add_argument("--a", type=_angles, default=None)
    tp = nsub.add_parser("tp")
    tp.add_argument("--candidate", default="shipped", help="'shipped' or a candidate file")
    tp.add_argument("--n", type=_angles, default=None)
    tp.add_argument("--label0", type=_label, default="1,1")
    tp.add_argument("--label", type=_label, default=None, help="outcome other than label0 (experimental)")
    tp.add_argument("--pointwise-samples", type=int, default=100_000)
    for p in (one, tp):
        _add_quadrature(p)
        _add_output(p)
        g = p.add_mutually_exclusive_group()
        g.add_argument("--expect-consistent", dest="expect", action="store_const", const="consistent")
        g.add_argument("--expect-contradiction", dest="expect", action="store_const", const="contradiction")

    sd = sub.add_parser("state-dep", help="fraction of hidden variables whose response depends on the state")
    sd.add_argument("--model", default="model1")
    sd.add_argument("--a", type=_angles, default=None)
    sd.add_argument("--n1", type=_angles, default=None)
    sd.add_argument("--n2", type=_angles, default=None)
    _add_quadrature(sd)
    _add_output(sd)

    rp = sub.add_parser("replay", help="re-run the config echoed in a JSON report")
    rp.add_argument("report")
    rp.add_argument("--check", action="store_true", help="exit 2 unless the payload is reproduced exactly")
    _add_output(rp)
    return parser


_COMMAND = {
    ("teleport", "verify"): "teleport.verify",
    ("hv", "expect"): "hv.expect",
    ("nogo", "one-spin"): "nogo.one-spin",
    ("nogo", "tp"): "nogo.tp",
    ("state-dep", None): "state-dep",
}


def config_from_args(args) -> RunConfig:
    command = _COMMAND[(args.group, getattr(args, "action", None))]
    seed = args.seed if args.seed is not None else default_seed()
    kw = {"command": command, "seed": seed, "output": args.output, "out_path": args.out_path}
    for name in ("n", "a", "n1", "n2", "label0", "label", "model", "candidate",
                 "samples", "scheme", "partitions", "sweep", "tol", "grid", "expect"):
        if hasattr(args, name):
            kw[name] = getattr(args, name)
    if hasattr(args, "pointwise_samples"):
        kw["pointwise_samples"] = args.pointwise_samples
    return RunConfig(**kw)


def _emit(text: str, out_path):
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.buffer.write(text.encode("utf-8"))
        sys.stdout.flush()


def _replay(args) -> int:
    with open(args.report, encoding="utf-8") as fh:
        old = json.load(fh)
    cfg = RunConfig.from_dict(old["config"])
    env, code = run_config(cfg)
    if args.check:
        same = payload_digest(env) == payload_digest(old)
        env["replay"] = {"source": str(args.report), "payload_identical": same}
        if not same:
            code = EXIT_TOLERANCE
    _emit(to_json(env), args.out_path)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.group == "replay":
            return _replay(args)
        cfg = config_from_args(args)
        env, code = run_config(cfg)
    except (ValueError, OSError, KeyError) as exc:
        print(f"teleport-hv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(to_csv(env) if cfg.output == "csv" else to_json(env), cfg.out_path)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
