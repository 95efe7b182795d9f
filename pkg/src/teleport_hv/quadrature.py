"""Integration over the unit sphere and over triples of unit spheres.

Integrands are vectorized: an S^2 integrand receives an ``(N, 3)`` array of
unit vectors and returns ``N`` values; an S^2 x S^2 x S^2 integrand receives
three such arrays.

Monte Carlo draws come from numpy's counter-based Philox generator.  A run
is split into ``partitions`` streams spawned from one ``SeedSequence``, so
the result depends only on ``(seed, samples, partitions)`` and not on how
many worker threads evaluated the partitions.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import IntegrationError

FOUR_PI = 4.0 * math.pi
RNG_ALGORITHM = "numpy.random.Philox(SeedSequence(seed).spawn(partitions))"
DEFAULT_SEED = 20080118
DEFAULT_SAMPLES = 1_000_000
# points closer than this to a declared sgn boundary are redrawn
BOUNDARY_EPS = 1e-12

SCHEMES = ("monte_carlo", "product_rule")


@dataclass(frozen=True)
class QuadratureSpec:
    """How to integrate.

    ``samples`` is the Monte Carlo sample count, or the Gauss-Legendre order
    (per polar half-interval) for ``product_rule``.
    """

    scheme: str = "monte_carlo"
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    partitions: int = 1
    workers: int = 1

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.partitions < 1 or self.partitions > self.samples:
            raise ValueError("partitions must be in [1, samples]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def with_seed(self, seed: int) -> "QuadratureSpec":
        return QuadratureSpec(self.scheme, self.samples, seed, self.partitions, self.workers)

    def with_samples(self, samples: int) -> "QuadratureSpec":
        return QuadratureSpec(self.scheme, samples, self.seed, self.partitions, self.workers)

    def metadata(self) -> dict:
        meta = {"scheme": self.scheme, "samples": self.samples}
        if self.scheme == "monte_carlo":
            meta.update(seed=self.seed, partitions=self.partitions, rng=RNG_ALGORITHM)
        return meta


@dataclass(frozen=True)
class IntegralResult:
    value: float
    std_error: float
    evaluations: int
    scheme: str = "monte_carlo"
    seed: int | None = None
    partitions: int = 1

    def to_dict(self) -> dict:
        return asdict(self)

    def z_score(self, target: float) -> float:
        diff = self.value - target
        if self.std_error == 0.0:
            return 0.0 if abs(diff) <= 1e-12 else math.copysign(math.inf, diff)
        return diff / self.std_error

    def within(self, target: float, k: float = 3.0) -> bool:
        return abs(self.z_score(target)) <= k


def _partition_counts(count: int, partitions: int) -> list[int]:
    base, extra = divmod(count, partitions)
    return [base + (1 if k < extra else 0) for k in range(partitions)]


def _generators(seed: int, partitions: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(partitions)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


def _unit_rows(rng: np.random.Generator, count: int, avoid: np.ndarray) -> np.ndarray:
    pts = rng.standard_normal((count, 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    if len(avoid):
        while True:
            bad = np.any(np.abs(pts @ avoid.T) < BOUNDARY_EPS, axis=1)
            nbad = int(bad.sum())
            if nbad == 0:
                break
            fresh = rng.standard_normal((nbad, 3))
            pts[bad] = fresh / np.linalg.norm(fresh, axis=1, keepdims=True)
    return pts


def _avoid_array(avoid: Sequence) -> np.ndarray:
    if not avoid:
        return np.empty((0, 3))
    return np.array([np.asarray(getattr(a, "vec", a), dtype=float) for a in avoid])


def _partition_points(seed, count, partitions, arity, avoid):
    av = _avoid_array(avoid)
    blocks = []
    for rng, m in zip(_generators(seed, partitions), _partition_counts(count, partitions)):
        blocks.append(tuple(_unit_rows(rng, m, av) for _ in range(arity)))
    return blocks


def sample_sphere(seed: int, count: int, partitions: int = 1, avoid: Sequence = ()) -> np.ndarray:
    """``count`` i.i.d. uniform points on S^2 as an ``(count, 3)`` array.

    Points within ``BOUNDARY_EPS`` of the plane orthogonal to any axis in
    ``avoid`` are redrawn, so sgn responses never see an exact zero.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    blocks = _partition_points(seed, count, partitions, 1, avoid)
    return np.concatenate([b[0] for b in blocks])


def _evaluate(f, blocks, workers):
    def run(args):
        vals = np.asarray(f(*args), dtype=float)
        if vals.shape != (args[0].shape[0],):
            vals = np.broadcast_to(vals, (args[0].shape[0],))
        return vals

    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(b) for b in blocks]
    return parts


def _check_finite(vals, blocks_flat):
    bad = ~np.isfinite(vals)
    if bad.any():
        i = int(np.argmax(bad))
        point = tuple(p[i].tolist() for p in blocks_flat)
        point = point[0] if len(point) == 1 else point
        raise IntegrationError(f"integrand is not finite ({vals[i]!r}) at {point}", point)


def _mc(f, spec: QuadratureSpec, arity: int, avoid) -> IntegralResult:
    blocks = _partition_points(spec.seed, spec.samples, spec.partitions, arity, avoid)
    vals = np.concatenate(_evaluate(f, blocks, spec.workers))
    flat = [np.concatenate([b[k] for b in blocks]) for k in range(arity)]
    _check_finite(vals, flat)
    volume = FOUR_PI**arity
    n = vals.size
    value = volume * float(np.mean(vals))
    err = volume * float(np.std(vals, ddof=1)) / math.sqrt(n) if n > 1 else 0.0
    return IntegralResult(value, err, n, "monte_carlo", spec.seed, spec.partitions)


def _frame(axis) -> np.ndarray:
    """Orthonormal matrix whose third column is ``axis``."""
    if axis is None:
        return np.eye(3)
    z = np.asarray(getattr(axis, "vec", axis), dtype=float)
    z = z / np.linalg.norm(z)
    helper = np.array([1.0, 0.0, 0.0]) if abs(z[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    x = helper - (helper @ z) * z
    x /= np.linalg.norm(x)
    return np.column_stack([x, np.cross(z, x), z])


def product_rule_nodes(order: int, axis=None) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the aligned Gauss-Legendre x trapezoid rule.

    The polar variable mu = lambda . axis is split at mu = 0 with ``order``
    Gauss-Legendre nodes on each half, so a hemisphere boundary orthogonal to
    ``axis`` falls on a cell edge.  The azimuth uses ``4 * order`` equispaced
    nodes (twice what a smooth integrand needs) offset by half a step.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    mu = np.concatenate([(x - 1.0) / 2.0, (x + 1.0) / 2.0])
    wmu = np.concatenate([w / 2.0, w / 2.0])
    nphi = 4 * order
    phi = (np.arange(nphi) + 0.5) * (2.0 * math.pi / nphi)
    mm, pp = np.meshgrid(mu, phi, indexing="ij")
    s = np.sqrt(np.clip(1.0 - mm**2, 0.0, None))
    local = np.stack([s * np.cos(pp), s * np.sin(pp), mm], axis=-1).reshape(-1, 3)
    weights = (wmu[:, None] * np.full(nphi, 2.0 * math.pi / nphi)[None, :]).reshape(-1)
    return local @ _frame(axis).T, weights


def integrate_s2(
    f: Callable[[np.ndarray], np.ndarray],
    spec: QuadratureSpec | None = None,
    axis=None,
    avoid: Sequence = (),
) -> IntegralResult:
    """Integrate ``f`` over S^2 with respect to solid angle.

    Args:
        f: vectorized integrand.
        spec: quadrature settings; defaults to 10^6-sample Monte Carlo.
        axis: product rule only; the polar axis of the rule (put the
            density's hemisphere boundary normal here).
        avoid: Monte Carlo only; sgn boundary normals to keep samples off.

    Raises:
        IntegrationError: if ``f`` returns a non-finite value.
    """
    spec = spec or QuadratureSpec()
    if spec.scheme == "monte_carlo":
        return _mc(f, spec, 1, avoid)
    pts, w = product_rule_nodes(spec.samples, axis)
    vals = np.asarray(f(pts), dtype=float)
    vals = np.broadcast_to(vals, (pts.shape[0],))
    _check_finite(vals, [pts])
    return IntegralResult(float(vals @ w), 0.0, pts.shape[0], "product_rule", None, 1)


def integrate_s2_cubed(
    f: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray],
    spec: QuadratureSpec | None = None,
    avoid: Sequence = (),
) -> IntegralResult:
    """Monte Carlo integral of ``f(l1, l2, l3)`` over the product measure on (S^2)^3."""
    spec = spec or QuadratureSpec()
    if spec.scheme != "monte_carlo":
        raise ValueError("triple-sphere integrals support monte_carlo only")
    return _mc(f, spec, 3, avoid)


def sample_sphere_triples(
    seed: int, count: int, partitions: int = 1, avoid: Sequence = ()
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The exact triples ``integrate_s2_cubed`` would use for the same settings."""
    blocks = _partition_points(seed, count, partitions, 3, avoid)
    return tuple(np.concatenate([b[k] for b in blocks]) for k in range(3))


def sample_values(f, spec: QuadratureSpec, arity: int = 1, avoid: Sequence = ()) -> np.ndarray:
    """Per-sample integrand values at the points a Monte Carlo integral would use.

    Multiplying the mean by (4 pi)^arity gives the integral; callers use the
    raw values for ratio estimators and pointwise checks.
    """
    if spec.scheme != "monte_carlo":
        raise ValueError("sample_values needs a monte_carlo spec")
    blocks = _partition_points(spec.seed, spec.samples, spec.partitions, arity, avoid)
    vals = np.concatenate(_evaluate(f, blocks, spec.workers))
    _check_finite(vals, [np.concatenate([b[k] for b in blocks]) for k in range(arity)])
    return vals
