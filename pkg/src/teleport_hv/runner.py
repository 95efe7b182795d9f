"""Run configurations and report envelopes behind the command-line tool.

A ``RunConfig`` fully determines a payload: re-running the config echoed in
an envelope reproduces the payload bit for bit (same seed, same partition
count).  Only the timestamps in the envelope change.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from typing import Optional

import numpy as np

from . import __version__
from .candidate_file import load_candidate
from .errors import TeleportHVError
from .hv_models import (
    HvModel,
    TpCandidate,
    ensemble_average,
    get_model,
    projected_probability,
    shipped_candidate,
)
from .nogo import one_spin_nogo, response_state_dependence, tp_nogo
from .quadrature import DEFAULT_SEED, QuadratureSpec
from .spinor_core import Direction, expectation, random_direction, sigma_dot, spin_eigenstate
from .teleport import (
    ALL_LABELS,
    BellLabel,
    SINGLET_ROTATION_DIAGONALS,
    correction_rotation,
    correction_unitary,
    expansion_check,
    initial_state,
    protocol_run,
    route_a_expectation,
    route_b_expectation,
)

COMMANDS = ("teleport.verify", "hv.expect", "nogo.one-spin", "nogo.tp", "state-dep")
MIN_MC_SAMPLES = 1000
HV_EXPECT_COLUMNS = ("theta", "hv_value", "std_error", "qm_value", "z_score")

EXIT_OK = 0
EXIT_TOLERANCE = 2
EXIT_VERDICT = 3
EXIT_USAGE = 64


class ConfigError(TeleportHVError):
    """Invalid run configuration (maps to exit code 64)."""


def default_seed() -> int:
    raw = os.environ.get("TELEPORT_HV_SEED")
    if raw is None or raw.strip() == "":
        return DEFAULT_SEED
    try:
        return int(raw, 0)
    except ValueError:
        raise ConfigError(f"TELEPORT_HV_SEED={raw!r} is not an integer") from None


@dataclass
class RunConfig:
    """Everything needed to reproduce one command's payload.

    Directions are (theta, phi) pairs in radians.
    """

    command: str
    n: Optional[list] = None
    a: Optional[list] = None
    c: Optional[list] = None
    n1: Optional[list] = None
    n2: Optional[list] = None
    label0: Optional[str] = None
    label: Optional[str] = None
    model: str = "model2"
    candidate: str = "shipped"
    samples: int = 1_000_000
    seed: int = DEFAULT_SEED
    scheme: str = "monte_carlo"
    partitions: int = 1
    sweep: Optional[str] = None
    tol: float = 1e-12
    grid: int = 50
    pointwise_samples: int = 100_000
    expect: Optional[str] = None
    output: str = "json"
    out_path: Optional[str] = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        for name in ("n", "a", "c", "n1", "n2"):
            v = getattr(self, name)
            if v is None:
                continue
            if len(v) != 2 or not all(math.isfinite(float(x)) for x in v):
                raise ConfigError(f"{name} must be a finite (theta, phi) pair")
        for name in ("label0", "label"):
            v = getattr(self, name)
            if v is not None:
                try:
                    BellLabel.of(v)
                except TeleportHVError as exc:
                    raise ConfigError(str(exc)) from None
        if self.output not in ("json", "csv"):
            raise ConfigError("output must be json or csv")
        if self.output == "csv" and self.command != "hv.expect":
            raise ConfigError("csv output is only available for 'hv expect'")
        if self.expect not in (None, "consistent", "contradiction"):
            raise ConfigError("expect must be 'consistent' or 'contradiction'")
        if self.command != "teleport.verify":
            if self.scheme == "monte_carlo" and self.samples < MIN_MC_SAMPLES:
                raise ConfigError(f"Monte Carlo commands need samples >= {MIN_MC_SAMPLES}")
            try:
                self.quadrature()
            except ValueError as exc:
                raise ConfigError(str(exc)) from None

    def quadrature(self) -> QuadratureSpec:
        return QuadratureSpec(self.scheme, self.samples, self.seed, self.partitions)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        return cls(**d)


def direction(pair, default=(0.0, 0.0)) -> Direction:
    if pair is None:
        pair = default
    return Direction.from_angles(float(pair[0]), float(pair[1]))


def parse_angles(text: str) -> list:
    """'theta,phi' or 'theta' (phi = 0) in radians; 'pi' expressions are not allowed."""
    parts = [p.strip() for p in text.split(",")]
    if not 1 <= len(parts) <= 2:
        raise ConfigError(f"expected 'theta,phi', got {text!r}")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"expected 'theta,phi', got {text!r}") from None
    if len(vals) == 1:
        vals.append(0.0)
    if not all(math.isfinite(v) for v in vals):
        raise ConfigError(f"angles must be finite, got {text!r}")
    return vals


def parse_sweep(text: str) -> np.ndarray:
    """'theta0:theta1:points' -> inclusive linspace."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"sweep must be 'theta0:theta1:points', got {text!r}")
    try:
        t0, t1, k = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"sweep must be 'theta0:theta1:points', got {text!r}") from None
    if k < 1 or not (math.isfinite(t0) and math.isfinite(t1)):
        raise ConfigError("sweep needs finite endpoints and at least one point")
    return np.linspace(t0, t1, k)


def resolve_model(spec: str) -> HvModel:
    if spec.startswith("file:"):
        obj = load_candidate(spec[5:])
        if not isinstance(obj, HvModel):
            raise ConfigError(f"{spec[5:]} defines a tp candidate, not a one-spin model")
        return obj
    try:
        return get_model(spec)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def resolve_candidate(spec: str) -> TpCandidate:
    if spec in ("shipped", "default"):
        return shipped_candidate()
    path = spec[5:] if spec.startswith("file:") else spec
    obj = load_candidate(path)
    if not isinstance(obj, TpCandidate):
        raise ConfigError(f"{path} defines a one-spin model, not a tp candidate")
    return obj


# commands -----------------------------------------------------------------


def run_teleport_verify(cfg: RunConfig) -> tuple[dict, int]:
    labels0 = [BellLabel.of(cfg.label0)] if cfg.label0 else list(ALL_LABELS)
    rng = np.random.Generator(np.random.Philox(cfg.seed))
    if cfg.a is not None or cfg.c is not None:
        raise ConfigError("teleport verify takes --n only")
    fixed_n = direction(cfg.n) if cfg.n is not None else None
    pairs = [(fixed_n or random_direction(rng), random_direction(rng)) for _ in range(cfg.grid)]

    dev = {"prob": 0.0, "fidelity": 0.0, "route": 0.0, "expansion": 0.0, "rotation": 0.0}
    per_label0 = []
    for l0 in labels0:
        table = []
        for lab in ALL_LABELS:
            entry = correction_rotation(l0, lab)
            row = {
                "label": str(lab),
                "rotation": entry.rotation.tolist(),
                "phase_at_z": entry.phase,
            }
            if l0 == BellLabel(-1, -1):
                diag = np.diag(entry.rotation)
                row["matches_tabulated_diagonal"] = bool(
                    np.array_equal(diag, SINGLET_ROTATION_DIAGONALS[lab])
                    and np.count_nonzero(entry.rotation - np.diag(diag)) == 0
                )
            table.append(row)
        outcomes = {}
        for n, c in pairs:
            run = protocol_run(n, l0)
            for lab, rec in run.items():
                dev["prob"] = max(dev["prob"], abs(rec.prob - 0.25))
                dev["fidelity"] = max(dev["fidelity"], abs(rec.fidelity_after_correction - 1.0))
                outcomes.setdefault(str(lab), rec.prob)
            for lab, rec in expansion_check(initial_state(n, l0), l0, n).items():
                dev["expansion"] = max(dev["expansion"], rec.residual, abs(abs(rec.c) - 0.5))
            for lab in ALL_LABELS:
                ra = route_a_expectation(n, l0, lab, c)
                rb = route_b_expectation(n, l0, lab, c)
                dev["route"] = max(dev["route"], abs(ra - rb))
                r = correction_rotation(l0, lab).rotation
                rn = Direction.from_vector(r @ n.vec, normalize=True)
                amp = np.vdot(spin_eigenstate(rn), correction_unitary(l0, lab) @ spin_eigenstate(n))
                dev["rotation"] = max(dev["rotation"], abs(abs(amp) - 1.0))
        per_label0.append({"label0": str(l0), "rotation_table": table, "probabilities": outcomes})

    table_ok = all(
        row.get("matches_tabulated_diagonal", True) for b in per_label0 for row in b["rotation_table"]
    )
    payload = {
        "directions": len(pairs),
        "fixed_n": fixed_n is not None,
        "label0s": per_label0,
        "max_deviation": dev,
        "tol": cfg.tol,
        "singlet_table_matches": table_ok,
        "pass": bool(table_ok and all(v < cfg.tol for v in dev.values())),
    }
    return payload, EXIT_OK if payload["pass"] else EXIT_TOLERANCE


def run_hv_expect(cfg: RunConfig) -> tuple[dict, int]:
    model = resolve_model(cfg.model)
    spec = cfg.quadrature()
    n = direction(cfg.n)
    thetas = parse_sweep(cfg.sweep or f"0:{math.pi}:13")
    plus_n = spin_eigenstate(n)
    rows = []
    for th in thetas:
        a = _tilted(n, float(th))
        res = ensemble_average(model, n, a, spec)
        qm = expectation(sigma_dot(a), plus_n)
        rows.append(
            {
                "theta": float(th),
                "hv_value": res.value,
                "std_error": res.std_error,
                "qm_value": qm,
                "z_score": res.z_score(qm),
            }
        )
    ok = all(abs(r["z_score"]) <= 3.0 for r in rows)
    payload = {"model": model.name, "columns": list(HV_EXPECT_COLUMNS), "rows": rows, "pass": ok}
    return payload, EXIT_OK if ok else EXIT_TOLERANCE


def _tilted(n: Direction, theta: float) -> Direction:
    """The direction at polar angle ``theta`` from ``n`` in the plane of n and a fixed helper."""
    helper = np.array([1.0, 0.0, 0.0]) if abs(n.x) < 0.9 else np.array([0.0, 1.0, 0.0])
    perp = helper - (helper @ n.vec) * n.vec
    perp /= np.linalg.norm(perp)
    return Direction.from_vector(math.cos(theta) * n.vec + math.sin(theta) * perp, normalize=True)


def _verdict_exit(verdict, expect) -> int:
    if expect is None or verdict is None:
        return EXIT_OK
    return EXIT_OK if verdict == expect else EXIT_VERDICT


def run_nogo_one_spin(cfg: RunConfig) -> tuple[dict, int]:
    model = resolve_model(cfg.model)
    a = direction(cfg.a, (math.pi / 2, 0.0))
    report = one_spin_nogo(model, direction(cfg.n), a, cfg.quadrature())
    payload = report.to_dict()
    return payload, _verdict_exit(report.verdict, cfg.expect)


def run_nogo_tp(cfg: RunConfig) -> tuple[dict, int]:
    cand = resolve_candidate(cfg.candidate)
    report = tp_nogo(
        cand,
        direction(cfg.n),
        BellLabel.of(cfg.label0 or "1,1"),
        cfg.quadrature(),
        label=cfg.label,
        pointwise_samples=cfg.pointwise_samples,
    )
    return report.to_dict(), _verdict_exit(report.verdict, cfg.expect)


def run_state_dep(cfg: RunConfig) -> tuple[dict, int]:
    model = resolve_model(cfg.model)
    a = direction(cfg.a, (math.pi / 2, 0.0))
    n1 = direction(cfg.n1, (0.0, 0.0))
    n2 = direction(cfg.n2, (math.pi / 2, 0.0))
    report = response_state_dependence(model, a, n1, n2, cfg.quadrature())
    payload = report.to_dict()
    payload["model"] = model.name
    return payload, EXIT_OK


RUNNERS = {
    "teleport.verify": run_teleport_verify,
    "hv.expect": run_hv_expect,
    "nogo.one-spin": run_nogo_one_spin,
    "nogo.tp": run_nogo_tp,
    "state-dep": run_state_dep,
}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def run_config(cfg: RunConfig) -> tuple[dict, int]:
    """Run ``cfg`` and wrap the payload in a report envelope.

    Returns:
        ``(envelope, exit_code)``.
    """
    started = _now()
    payload, code = RUNNERS[cfg.command](cfg)
    quad = cfg.quadrature().metadata() if cfg.command != "teleport.verify" else {
        "scheme": "exact", "seed": cfg.seed, "rng": "numpy.random.Philox(seed)"
    }
    envelope = {
        "tool": "teleport-hv",
        "tool_version": __version__,
        "command": cfg.command,
        "config": cfg.to_dict(),
        "started_utc": started,
        "finished_utc": _now(),
        "quadrature": quad,
        "exit_code": code,
        "payload": payload,
    }
    return envelope, code


def to_json(envelope: dict) -> str:
    return json.dumps(envelope, indent=2, sort_keys=True, allow_nan=True) + "\n"


def to_csv(envelope: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HV_EXPECT_COLUMNS)
    for row in envelope["payload"]["rows"]:
        writer.writerow([repr(float(row[k])) for k in HV_EXPECT_COLUMNS])
    return buf.getvalue()


def payload_digest(envelope: dict) -> str:
    """Canonical text of the payload, for bit-exact comparisons."""
    return json.dumps(envelope["payload"], sort_keys=True, allow_nan=True)
