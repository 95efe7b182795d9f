"""Hidden-variable models on the unit sphere.

A one-spin model pairs a density rho_n(lambda) over S^2 with a response
function A(lambda; a) in {-1, +1}.  Two models are shipped:

* ``MODEL1``: uniform density on the hemisphere lambda . n > 0 and response
  sgn(lambda . a~), where a~ is the setting rotated towards n.  The response
  depends on the state n.
* ``MODEL2``: density proportional to lambda . n on the same hemisphere and
  response sgn(lambda . a), which depends on the setting only.

Every evaluator is vectorized over an ``(N, 3)`` array of unit vectors and
also accepts a single 3-vector.  Evaluators are pure; they may be called
from several threads at once.

The three-particle part (``TpCandidate`` and friends) follows the factorized
form rho_n(l1) rho_23(l2, l3) with a 1-2 projector response Pi(l1, l2) and a
particle-3 response C(l3; c).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ZeroProbabilityError
from .quadrature import (
    FOUR_PI,
    IntegralResult,
    QuadratureSpec,
    integrate_s2,
    integrate_s2_cubed,
    sample_values,
)
from .spinor_core import DEGENERATE_PROB, Direction, DirectionLike, Z_AXIS, as_direction
from .teleport import BellLabel


def sgn(x):
    """Sign with sgn(0) = +1; integrators keep samples off the zero set anyway."""
    return np.where(np.asarray(x) >= 0.0, 1.0, -1.0)


def _vectorized(fn):
    """Let ``fn`` accept a single 3-vector as well as an (N, 3) array."""

    def wrapper(lam):
        lam = np.asarray(lam, dtype=float)
        if lam.ndim == 1:
            return float(fn(lam[None, :])[0])
        return fn(lam)

    return wrapper


@dataclass(frozen=True)
class DensityS2:
    """A probability density over S^2 (with respect to solid angle).

    ``support_axis`` is the normal of the hemisphere supporting the density,
    or None for full-sphere support.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    name: str = "density"
    state_params: dict = field(default_factory=dict)
    support_axis: Optional[Direction] = None

    def __call__(self, lam):
        return _vectorized(self.fn)(lam)


@dataclass(frozen=True)
class ResponseFn:
    """lambda -> outcome for a fixed setting.

    ``state_dep`` lists the state parameters the response was built with;
    it is empty for a state-independent response.  ``boundaries`` are the
    normals of the planes where the response jumps.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    setting: Direction
    state_dep: dict = field(default_factory=dict)
    values: tuple = (-1.0, 1.0)
    boundaries: tuple = ()

    def __call__(self, lam):
        return _vectorized(self.fn)(lam)


@dataclass(frozen=True)
class ProjResponse:
    """0/1 image of a projector."""

    fn: Callable[[np.ndarray], np.ndarray]
    boundaries: tuple = ()

    def __call__(self, lam):
        return _vectorized(self.fn)(lam)


@dataclass(frozen=True)
class HvModel:
    """A one-spin hidden-variable model: a density family and a response family.

    ``response(a, n)`` builds the response for setting ``a`` when the state
    is |+>^n; state-independent models ignore ``n``.
    """

    name: str
    density: Callable[[Direction], DensityS2]
    response: Callable[[Direction, Direction], ResponseFn]
    state_dependent: bool


# one-spin models ----------------------------------------------------------


def model1_density(n: DirectionLike) -> DensityS2:
    """Uniform density on the hemisphere lambda . n > 0: (1 + sgn(lambda . n)) / 4 pi."""
    n = as_direction(n)
    nv = n.vec

    def fn(lam):
        return (1.0 + sgn(lam @ nv)) / FOUR_PI

    return DensityS2(fn, "model1", {"n": list(nv)}, support_axis=n)


def warped_axis(a: DirectionLike, n: DirectionLike) -> Direction:
    """Rotate ``a`` towards ``n`` in their common plane until its angle to n is
    (pi/2)(1 - a . n).

    For a = -n the target angle is pi, which pins the result to -n whatever
    the rotation plane.
    """
    a, n = as_direction(a), as_direction(n)
    cos_t = max(-1.0, min(1.0, a.dot(n)))
    t_warp = 0.5 * math.pi * (1.0 - cos_t)
    perp = a.vec - cos_t * n.vec
    norm = float(np.linalg.norm(perp))
    if norm < 1e-15:
        return n if cos_t > 0 else -n
    v = math.cos(t_warp) * n.vec + math.sin(t_warp) * perp / norm
    return Direction.from_vector(v, normalize=True)


def model1_response(a: DirectionLike, n: DirectionLike) -> ResponseFn:
    a, n = as_direction(a), as_direction(n)
    at = warped_axis(a, n)
    av = at.vec

    def fn(lam):
        return sgn(lam @ av)

    return ResponseFn(fn, a, {"n": list(n.vec)}, boundaries=(at,))


def model2_density(n: DirectionLike) -> DensityS2:
    """(1 + sgn(lambda . n)) / (2 pi) * (lambda . n)."""
    n = as_direction(n)
    nv = n.vec

    def fn(lam):
        c = lam @ nv
        return (1.0 + sgn(c)) / (2.0 * math.pi) * c

    return DensityS2(fn, "model2", {"n": list(nv)}, support_axis=n)


def model2_response(a: DirectionLike, n: DirectionLike | None = None) -> ResponseFn:
    """sgn(lambda . a).  ``n`` is accepted for interface symmetry and ignored."""
    a = as_direction(a)
    av = a.vec

    def fn(lam):
        return sgn(lam @ av)

    return ResponseFn(fn, a, {}, boundaries=(a,))


MODEL1 = HvModel("model1", model1_density, model1_response, state_dependent=True)
MODEL2 = HvModel("model2", model2_density, model2_response, state_dependent=False)
BUILTIN_MODELS = {"model1": MODEL1, "model2": MODEL2}


def get_model(name: str) -> HvModel:
    try:
        return BUILTIN_MODELS[name]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; expected one of {sorted(BUILTIN_MODELS)}")


def observable_response(base: ResponseFn, alpha1: float, alpha2: float) -> ResponseFn:
    """Image of alpha1 sigma.a + alpha2: values a_pm = pm alpha1 + alpha2."""

    def fn(lam):
        return alpha1 * base.fn(lam) + alpha2

    return ResponseFn(
        fn,
        base.setting,
        dict(base.state_dep),
        values=(-alpha1 + alpha2, alpha1 + alpha2),
        boundaries=base.boundaries,
    )


def projector_response(base: ResponseFn, s0: int = 1) -> ProjResponse:
    """Image of the projector onto |s0>^a: (1 + s0 base) / 2."""
    if s0 not in (1, -1):
        raise ValueError("s0 must be +1 or -1")

    def fn(lam):
        return 0.5 * (1.0 + s0 * base.fn(lam))

    return ProjResponse(fn, boundaries=base.boundaries)


def _boundaries(*objs) -> tuple:
    out = []
    for o in objs:
        if isinstance(o, DensityS2):
            if o.support_axis is not None:
                out.append(o.support_axis)
        else:
            out.extend(getattr(o, "boundaries", ()))
    return tuple(out)


def integrate_product(*factors, spec: QuadratureSpec | None = None) -> IntegralResult:
    """Integral over S^2 of the pointwise product of densities/responses."""

    def f(lam):
        out = np.ones(lam.shape[0])
        for fac in factors:
            out = out * fac.fn(lam)
        return out

    axis = next((fc.support_axis for fc in factors if isinstance(fc, DensityS2)), None)
    return integrate_s2(f, spec, axis=axis, avoid=_boundaries(*factors))


def projected_probability(model: HvModel, n, a, spec=None, s0: int = 1) -> IntegralResult:
    """p = integral of Pi(lambda; s0, a) rho_n(lambda)."""
    n, a = as_direction(n), as_direction(a)
    return integrate_product(
        projector_response(model.response(a, n), s0), model.density(n), spec=spec
    )


def ensemble_average(model: HvModel, n, a, spec=None) -> IntegralResult:
    """integral of A(lambda; a) rho_n(lambda), the image of <+n| sigma.a |+n>."""
    n, a = as_direction(n), as_direction(a)
    return integrate_product(model.response(a, n), model.density(n), spec=spec)


def conditional_density(
    Pi: ProjResponse, rho: DensityS2, p: float | None = None, spec=None
) -> DensityS2:
    """rho conditioned on Pi = 1: Pi rho / p.

    ``p`` is integrated when not supplied.

    Raises:
        ZeroProbabilityError: if p is below the degenerate threshold.
    """
    if p is None:
        p = integrate_product(Pi, rho, spec=spec).value
    if p <= DEGENERATE_PROB:
        raise ZeroProbabilityError(f"conditioning on an event of probability {p!r}")

    def fn(lam):
        return Pi.fn(lam) * rho.fn(lam) / p

    params = dict(rho.state_params)
    params["conditioned_p"] = p
    return DensityS2(fn, f"{rho.name}|Pi", params, support_axis=rho.support_axis)


def _combine_product(m: IntegralResult, w: IntegralResult | float) -> IntegralResult:
    if isinstance(w, IntegralResult):
        wv, we = w.value, w.std_error
    else:
        wv, we = float(w), 0.0
    err = math.hypot(m.std_error * wv, m.value * we)
    return IntegralResult(m.value * wv, err, m.evaluations, m.scheme, m.seed, m.partitions)


def route_a_hv(model: HvModel, n, a, alpha1=1.0, alpha2=0.0, spec=None) -> IntegralResult:
    """Projector folded into the observable: integral of A Pi rho_n."""
    n, a = as_direction(n), as_direction(a)
    base = model.response(a, n)
    return integrate_product(
        observable_response(base, alpha1, alpha2),
        projector_response(base, +1),
        model.density(n),
        spec=spec,
    )


def route_b_hv(model: HvModel, a, alpha1=1.0, alpha2=0.0, weight_p=1.0, spec=None) -> IntegralResult:
    """Projector applied to the state first: [integral of A rho_a] times p.

    ``weight_p`` is p = integral of Pi rho_n, as a number or an
    IntegralResult (whose error is then propagated).
    """
    a = as_direction(a)
    mean_a = integrate_product(
        observable_response(model.response(a, a), alpha1, alpha2), model.density(a), spec=spec
    )
    return _combine_product(mean_a, weight_p)


# three-particle candidates --------------------------------------------------


@dataclass(frozen=True)
class TpCandidate:
    """A factorized hidden-variable candidate for the three-particle process.

    Attributes:
        rho1: n -> one-particle density over l1.
        rho23: (u, v) -> two-particle density, vectorized over rows.
        Pi: (u, v, label) -> {0, 1}, image of the 1-2 Bell projector.
        C: (u, c) -> {-1, +1}, image of sigma_3 . c.
        boundaries: sgn/indicator boundary normals shared by the components.
    """

    name: str
    rho1: Callable[[Direction], DensityS2]
    rho23: Callable[[np.ndarray, np.ndarray], np.ndarray]
    Pi: Callable[[np.ndarray, np.ndarray, BellLabel], np.ndarray]
    C: Callable[[np.ndarray, Direction], np.ndarray]
    boundaries: tuple = ()

    def scale(self) -> float:
        return FOUR_PI**-3


def shipped_candidate() -> TpCandidate:
    """Uniform densities, Pi = 1{l1_z > 0} 1{l2_z > 0}, C = sgn(l3 . c).

    Exists to exercise the verifier (its p is exactly 1/4); it is not a model
    of teleportation statistics.
    """
    k1 = 1.0 / FOUR_PI
    k2 = 1.0 / FOUR_PI**2

    def rho1(n):
        n = as_direction(n)
        return DensityS2(lambda lam: np.full(lam.shape[0], k1), "uniform", {"n": list(n.vec)})

    def rho23(u, v):
        return np.full(u.shape[0], k2)

    def Pi(u, v, label):
        return ((u[:, 2] > 0) & (v[:, 2] > 0)).astype(float)

    def C(u, c):
        return sgn(u @ as_direction(c).vec)

    return TpCandidate("shipped", rho1, rho23, Pi, C, boundaries=(Z_AXIS,))


def tp_factorized_density(cand: TpCandidate, n, label0) -> Callable:
    """(l1, l2, l3) -> rho_n(l1) rho_23(l2, l3)."""
    r1 = cand.rho1(as_direction(n))

    def rho(l1, l2, l3):
        return r1.fn(l1) * cand.rho23(l2, l3)

    return rho


def tp_pr_hv(cand: TpCandidate, n, label0, label, spec=None) -> IntegralResult:
    """Hidden-variable image of Pr(beta, beta_bar)."""
    label = BellLabel.of(label)
    rho = tp_factorized_density(cand, n, label0)

    def f(l1, l2, l3):
        return cand.Pi(l1, l2, label) * rho(l1, l2, l3)

    return integrate_s2_cubed(f, spec, avoid=cand.boundaries)


def tp_route_a_hv(cand: TpCandidate, n, label0, label, c, spec=None) -> IntegralResult:
    """Integral of C(l3; c) against the conditional density Pi rho / p.

    Numerator and p share the same samples; the error is the ratio-estimator
    (delta method) standard error.

    Raises:
        ZeroProbabilityError: if the estimated p is below the degenerate threshold.
    """
    spec = spec or QuadratureSpec()
    label = BellLabel.of(label)
    c = as_direction(c)
    rho = tp_factorized_density(cand, n, label0)
    avoid = tuple(cand.boundaries) + (c,)
    weights = sample_values(
        lambda l1, l2, l3: cand.Pi(l1, l2, label) * rho(l1, l2, l3), spec, 3, avoid
    )
    numer = sample_values(
        lambda l1, l2, l3: cand.C(l3, c) * cand.Pi(l1, l2, label) * rho(l1, l2, l3),
        spec,
        3,
        avoid,
    )
    wbar = float(np.mean(weights))
    if FOUR_PI**3 * wbar <= DEGENERATE_PROB:
        raise ZeroProbabilityError("post-selected branch has zero hidden-variable weight")
    ratio = float(np.mean(numer)) / wbar
    n_s = weights.size
    resid = numer - ratio * weights
    err = float(np.std(resid, ddof=1)) / (wbar * math.sqrt(n_s)) if n_s > 1 else 0.0
    return IntegralResult(ratio, err, n_s, "monte_carlo", spec.seed, spec.partitions)
