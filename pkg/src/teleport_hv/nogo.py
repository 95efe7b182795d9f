"""Executable form of the conditional-versus-final density argument.

Two densities describe the same post-selected ensemble:

* the *conditional* density, obtained by restricting the hidden-variable
  density to the region where the projector response is 1 and renormalizing;
* the *final* density, the model's density for the state obtained by
  projecting in Hilbert space.

If they agreed pointwise, a short chain of substitutions would force
p = p^2 for the outcome probability p.  The checks below evaluate every
link of that chain on sampled hidden-variable points, so a candidate shows
*which* link breaks, and report the resulting p - p^2 residual.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import SymmetryViolationError
from .hv_models import (
    FOUR_PI,
    HvModel,
    TpCandidate,
    projector_response,
    tp_factorized_density,
    tp_pr_hv,
)
from .quadrature import (
    IntegralResult,
    QuadratureSpec,
    integrate_s2,
    integrate_s2_cubed,
    sample_sphere,
    sample_sphere_triples,
)
from .spinor_core import DEGENERATE_PROB, as_direction, overlap_fidelity, spin_eigenstate
from .teleport import BellLabel

# pointwise equalities are exact for closed-form evaluators; this only absorbs rounding
POINTWISE_RTOL = 1e-9
SYMMETRY_RTOL = 1e-12
SIGMA_K = 3.0
DEFAULT_POINTWISE_SAMPLES = 100_000


@dataclass(frozen=True)
class ChainStep:
    """One link of the chain.

    ``kind`` is "pointwise" (an identity between functions, tested on
    sampled points) or "scalar" (a number compared within its error bar).
    """

    name: str
    relation: str
    kind: str
    holds: bool
    violation_fraction: Optional[float] = None
    max_abs_deviation: Optional[float] = None
    lhs: Optional[float] = None
    rhs: Optional[float] = None
    tolerance: Optional[float] = None


@dataclass(frozen=True)
class NogoReport:
    p: float
    p_std_error: float
    p_squared: float
    contradiction_residual: float
    residual_error: float
    density_l1: Optional[float]
    density_l1_std_error: Optional[float]
    pointwise_violation_fraction: Optional[float]
    verdict: Optional[str]
    chain: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def step(self, name: str) -> ChainStep:
        for s in self.chain:
            if s.name == name:
                return s
        raise KeyError(name)


@dataclass(frozen=True)
class StateDependenceReport:
    disagreement_fraction: float
    std_error: float
    sample_count: int

    def to_dict(self) -> dict:
        return asdict(self)


def residual_and_error(p: float, sigma: float) -> tuple[float, float]:
    """|p - p^2| and its propagated error (second order term keeps it > 0 at p = 1/2)."""
    return abs(p - p * p), abs(1.0 - 2.0 * p) * sigma + sigma * sigma


def decide_verdict(p: float, sigma: float) -> str:
    """'contradiction' iff p - p^2 is resolved from 0 and p is away from both 0 and 1."""
    tol = max(SIGMA_K * sigma, 1e-12)
    if abs(p) <= tol or abs(1.0 - p) <= tol:
        return "consistent"
    residual, err = residual_and_error(p, sigma)
    return "contradiction" if residual > SIGMA_K * err else "consistent"


def _pointwise(name, relation, lhs, rhs, tol) -> ChainStep:
    dev = np.abs(np.asarray(lhs, dtype=float) - np.asarray(rhs, dtype=float))
    tol = np.broadcast_to(np.asarray(tol, dtype=float), dev.shape)
    bad = dev > tol
    frac = float(np.mean(bad))
    return ChainStep(
        name,
        relation,
        "pointwise",
        holds=frac == 0.0,
        violation_fraction=frac,
        max_abs_deviation=float(dev.max()) if dev.size else 0.0,
    )


def _scalar(name, relation, lhs, rhs, err) -> ChainStep:
    tol = max(SIGMA_K * err, 1e-12)
    return ChainStep(
        name, relation, "scalar", holds=abs(lhs - rhs) <= tol, lhs=lhs, rhs=rhs, tolerance=tol
    )


# one spin -----------------------------------------------------------------


def one_spin_nogo(model: HvModel, n, a, spec: QuadratureSpec | None = None) -> NogoReport:
    """Compare the conditional density Pi(+, a) rho_n / p with the final density rho_a.

    p below the degenerate threshold is the p = 0 case of the theorem and is
    reported as consistent without building the conditional density.
    """
    spec = spec or QuadratureSpec()
    n, a = as_direction(n), as_direction(a)
    rho_n, rho_a = model.density(n), model.density(a)
    pi_a = projector_response(model.response(a, n), +1)
    pi_n = projector_response(model.response(n, a), +1)
    avoid = tuple(pi_a.boundaries) + tuple(pi_n.boundaries) + (n, a)

    def integ(f, axis=None):
        return integrate_s2(f, spec, axis=axis, avoid=avoid)

    p_res = integ(lambda lam: pi_a.fn(lam) * rho_n.fn(lam), axis=n)
    p_swap = integ(lambda lam: pi_n.fn(lam) * rho_a.fn(lam), axis=a)
    norm_n = integ(rho_n.fn, axis=n)
    p, sp = p_res.value, p_res.std_error
    residual, res_err = residual_and_error(p, sp)
    p_qm = overlap_fidelity(spin_eigenstate(a), spin_eigenstate(n))
    extras = {
        "p_qm": p_qm,
        "p_swapped": p_swap.value,
        "p_swapped_std_error": p_swap.std_error,
        "density_norm": norm_n.value,
        "model": model.name,
        "quadrature": spec.metadata(),
    }

    if p <= DEGENERATE_PROB:
        return NogoReport(p, sp, p * p, residual, res_err, None, None, None, "consistent",
                          [], extras)

    l1 = integ(lambda lam: np.abs(pi_a.fn(lam) * rho_n.fn(lam) / p - rho_a.fn(lam)))

    lam = sample_sphere(spec.seed, spec.samples, spec.partitions, avoid)
    Pa, Pn, Rn, Ra = pi_a.fn(lam), pi_n.fn(lam), rho_n.fn(lam), rho_a.fn(lam)
    floor = POINTWISE_RTOL / FOUR_PI
    dp = SIGMA_K * sp
    dp2 = SIGMA_K * 2.0 * abs(p) * sp
    chain = [
        _pointwise("cond=final", "Pi(+,a) rho_n = p rho_a", Pa * Rn, p * Ra, floor + dp * Ra),
        _pointwise("cond=final(a<->n)", "Pi(+,n) rho_a = p rho_n", Pn * Ra, p * Rn,
                   floor + dp * Rn),
        _pointwise("substituted", "Pi(+,n) Pi(+,a) rho_n = p^2 rho_n", Pn * Pa * Rn, p * p * Rn,
                   floor + dp2 * Rn),
        _pointwise("idempotence", "Pi(+,n) rho_n = rho_n", Pn * Rn, Rn, floor),
        _pointwise("reduced", "Pi(+,a) rho_n = p^2 rho_n", Pa * Rn, p * p * Rn,
                   floor + dp2 * Rn),
        _scalar("integrated", "int Pi(+,a) rho_n = p^2 int rho_n", p, p * p * norm_n.value,
                math.hypot((1.0 - 2.0 * p * norm_n.value) * sp, p * p * norm_n.std_error)),
    ]
    verdict = decide_verdict(p, sp)
    chain.append(ChainStep("p=p^2", "p = p^2", "scalar", holds=verdict == "consistent",
                           lhs=p, rhs=p * p, tolerance=SIGMA_K * res_err))
    return NogoReport(
        p, sp, p * p, residual, res_err, l1.value, l1.std_error,
        chain[0].violation_fraction, verdict, chain, extras,
    )


# three particles ------------------------------------------------------------


def symmetry_check(rho23: Callable, spec: QuadratureSpec | None = None,
                   count: int | None = None) -> float:
    """max |rho23(u, v) - rho23(v, u)| over sampled pairs."""
    spec = spec or QuadratureSpec()
    count = count or min(spec.samples, DEFAULT_POINTWISE_SAMPLES)
    u, v, _ = sample_sphere_triples(spec.seed, count, 1)
    return float(np.max(np.abs(np.asarray(rho23(u, v)) - np.asarray(rho23(v, u)))))


def tp_nogo(
    cand: TpCandidate,
    n,
    label0,
    spec: QuadratureSpec | None = None,
    label=None,
    pointwise_samples: int = DEFAULT_POINTWISE_SAMPLES,
) -> NogoReport:
    """Run the conditional-versus-final chain for the three-particle candidate.

    The argument is made for the outcome equal to the initial 2-3 label.  Any
    other ``label`` is evaluated the same way but flagged experimental and
    given no verdict.

    Raises:
        SymmetryViolationError: if rho23 is not symmetric under interchange.
    """
    spec = spec or QuadratureSpec()
    n = as_direction(n)
    label0 = BellLabel.of(label0)
    label = label0 if label is None else BellLabel.of(label)
    experimental = label != label0

    asym = symmetry_check(cand.rho23, spec, pointwise_samples)
    if asym > SYMMETRY_RTOL * FOUR_PI**-2:
        raise SymmetryViolationError(f"rho23 is not symmetric (max deviation {asym:.3g})")

    p_res = tp_pr_hv(cand, n, label0, label, spec)
    p, sp = p_res.value, p_res.std_error
    residual, res_err = residual_and_error(p, sp)
    rho = tp_factorized_density(cand, n, label0)
    norm = integrate_s2_cubed(rho, spec, avoid=cand.boundaries)
    rn = cand.rho1(n).fn
    r23 = cand.rho23

    def Pi(u, v):
        return np.asarray(cand.Pi(u, v, label), dtype=float)

    extras = {
        "label0": str(label0),
        "label": str(label),
        "experimental": experimental,
        "candidate": cand.name,
        "p_qm": 0.25,
        "density_norm": norm.value,
        "symmetry_max_deviation": asym,
        "pointwise_samples": pointwise_samples,
        "quadrature": spec.metadata(),
    }
    verdict = None if experimental else decide_verdict(p, sp)
    if p <= DEGENERATE_PROB:
        return NogoReport(p, sp, p * p, residual, res_err, None, None, None, verdict, [], extras)

    def l1_integrand(l1, l2, l3):
        return np.abs(Pi(l1, l2) * rn(l1) * r23(l2, l3) / p - r23(l1, l2) * rn(l3))

    l1 = integrate_s2_cubed(l1_integrand, spec, avoid=cand.boundaries)

    l1_, l2_, l3_ = sample_sphere_triples(spec.seed, pointwise_samples, 1, cand.boundaries)
    P12, P23 = Pi(l1_, l2_), Pi(l2_, l3_)
    R1, R3 = rn(l1_), rn(l3_)
    R12, R23 = r23(l1_, l2_), r23(l2_, l3_)
    floor = POINTWISE_RTOL * FOUR_PI**-3
    dp = SIGMA_K * sp
    dp2 = SIGMA_K * 2.0 * abs(p) * sp
    lhs_f1 = P23 * R3 * R12
    chain = [
        _pointwise("C=F", "Pi(l1,l2) rho_n(l1) rho23(l2,l3) = p rho23(l1,l2) rho_n(l3)",
                   P12 * R1 * R23, p * R12 * R3, floor + dp * R12 * R3),
        _pointwise("C=F_1", "Pi(l2,l3) rho_n(l3) rho23(l1,l2) = p rho23(l2,l3) rho_n(l1)",
                   lhs_f1, p * R23 * R1, floor + dp * R23 * R1),
        _pointwise("idempotence", "Pi(l2,l3) * [C=F_1 lhs] = [C=F_1 lhs]",
                   P23 * lhs_f1, lhs_f1, 0.0),
        _pointwise("C=F_2",
                   "Pi(l2,l3) Pi(l1,l2) rho_n(l1) rho23(l2,l3) = p^2 rho_n(l1) rho23(l2,l3)",
                   P23 * P12 * R1 * R23, p * p * R1 * R23, floor + dp2 * R1 * R23),
        _pointwise("support", "Pi(l2,l3) rho23(l2,l3) rho_n(l1) = rho23(l2,l3) rho_n(l1)",
                   P23 * R23 * R1, R23 * R1, floor),
        _pointwise("C=F_3", "Pi(l1,l2) rho_n(l1) rho23(l2,l3) = p^2 rho_n(l1) rho23(l2,l3)",
                   P12 * R1 * R23, p * p * R1 * R23, floor + dp2 * R1 * R23),
        _scalar("C=F_4", "int Pi rho = p^2 int rho", p, p * p * norm.value,
                math.hypot((1.0 - 2.0 * p * norm.value) * sp, p * p * norm.std_error)),
        ChainStep("p=p^2", "p = p^2", "scalar", holds=decide_verdict(p, sp) == "consistent",
                  lhs=p, rhs=p * p, tolerance=SIGMA_K * res_err),
    ]
    extras["pi_binary"] = bool(np.all((P12 == 0.0) | (P12 == 1.0)))
    return NogoReport(
        p, sp, p * p, residual, res_err, l1.value, l1.std_error,
        chain[0].violation_fraction, verdict, chain, extras,
    )


# state dependence of responses -------------------------------------------------


def response_state_dependence(model: HvModel, a, n1, n2,
                              spec: QuadratureSpec | None = None) -> StateDependenceReport:
    """Fraction of uniformly sampled lambda where the setting-``a`` responses
    built for states n1 and n2 disagree."""
    spec = spec or QuadratureSpec()
    a, n1, n2 = as_direction(a), as_direction(n1), as_direction(n2)
    r1, r2 = model.response(a, n1), model.response(a, n2)
    lam = sample_sphere(spec.seed, spec.samples, spec.partitions,
                        tuple(r1.boundaries) + tuple(r2.boundaries))
    differ = np.asarray(r1.fn(lam)) != np.asarray(r2.fn(lam))
    frac = float(np.mean(differ))
    err = math.sqrt(frac * (1.0 - frac) / lam.shape[0])
    return StateDependenceReport(frac, err, int(lam.shape[0]))
