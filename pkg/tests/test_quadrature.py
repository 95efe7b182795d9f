"""Sphere sampling and the two integration schemes."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import directions
from teleport_hv.errors import IntegrationError
from teleport_hv.quadrature import (
    FOUR_PI,
    IntegralResult,
    QuadratureSpec,
    integrate_s2,
    integrate_s2_cubed,
    product_rule_nodes,
    sample_sphere,
    sample_sphere_triples,
)
from teleport_hv.spinor_core import Z_AXIS


def test_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(scheme="simpson")
    with pytest.raises(ValueError):
        QuadratureSpec(samples=0)
    with pytest.raises(ValueError):
        QuadratureSpec(samples=10, partitions=11)
    with pytest.raises(ValueError):
        QuadratureSpec(seed=-1)
    meta = QuadratureSpec(samples=1000, seed=5, partitions=2).metadata()
    assert meta["samples"] == 1000 and meta["seed"] == 5 and meta["partitions"] == 2
    assert "Philox" in meta["rng"]


def test_samples_are_unit_and_deterministic():
    a = sample_sphere(7, 5000, partitions=3)
    b = sample_sphere(7, 5000, partitions=3)
    assert a.shape == (5000, 3)
    assert np.array_equal(a, b)
    assert np.allclose(np.linalg.norm(a, axis=1), 1.0)
    assert not np.array_equal(a, sample_sphere(8, 5000, partitions=3))


def test_samples_are_uniform():
    pts = sample_sphere(1, 200_000)
    # first and second moments of the uniform measure: <x> = 0, <x x^T> = I/3
    assert np.all(np.abs(pts.mean(axis=0)) < 5 / math.sqrt(3 * 200_000))
    assert np.allclose(pts.T @ pts / len(pts), np.eye(3) / 3, atol=0.005)


def test_avoid_keeps_away_from_planes():
    pts = sample_sphere(3, 10_000, avoid=[Z_AXIS])
    assert np.all(np.abs(pts[:, 2]) >= 1e-12)


def test_constant_integral():
    res = integrate_s2(lambda lam: np.ones(len(lam)), QuadratureSpec(samples=1000))
    assert res.value == pytest.approx(FOUR_PI) and res.std_error == 0.0
    pr = integrate_s2(lambda lam: np.ones(len(lam)), QuadratureSpec("product_rule", 8))
    assert pr.value == pytest.approx(FOUR_PI, rel=1e-14)


@settings(max_examples=25, deadline=None)
@given(directions, st.integers(0, 4))
def test_product_rule_polynomials(axis, k):
    # int (lambda.z)^k dOmega = 4 pi / (k+1) for even k, 0 for odd k
    exact = FOUR_PI / (k + 1) if k % 2 == 0 else 0.0
    res = integrate_s2(lambda lam: lam[:, 2] ** k, QuadratureSpec("product_rule", 12), axis=axis)
    assert res.value == pytest.approx(exact, abs=1e-12)


def test_product_rule_exact_for_aligned_discontinuity():
    # int sgn(lambda.n) (lambda.n) dOmega = 2 pi, exact when the frame is aligned with n
    f = lambda lam: np.sign(lam[:, 2]) * lam[:, 2]
    res = integrate_s2(f, QuadratureSpec("product_rule", 4), axis=Z_AXIS)
    assert res.value == pytest.approx(2 * math.pi, rel=1e-14)


def test_nodes_weights():
    nodes, w = product_rule_nodes(6)
    assert nodes.shape == (2 * 6 * 24, 3)
    assert w.sum() == pytest.approx(FOUR_PI)
    assert np.allclose(np.linalg.norm(nodes, axis=1), 1.0)


def test_mc_standard_error():
    spec = QuadratureSpec(samples=100_000, seed=11)
    res = integrate_s2(lambda lam: lam[:, 0] ** 2, spec)
    # Var(x^2) = 1/5 - 1/9 under the uniform measure
    expected_se = FOUR_PI * math.sqrt(1 / 5 - 1 / 9) / math.sqrt(100_000)
    assert res.std_error == pytest.approx(expected_se, rel=0.02)
    assert res.within(FOUR_PI / 3)


def test_partitions_reproducible():
    spec = QuadratureSpec(samples=20_000, seed=3, partitions=4)
    f = lambda lam: np.sign(lam[:, 0])
    assert integrate_s2(f, spec) == integrate_s2(f, spec)
    threaded = QuadratureSpec(samples=20_000, seed=3, partitions=4, workers=4)
    assert integrate_s2(f, threaded).value == integrate_s2(f, spec).value


def test_non_finite_integrand_reports_point():
    with pytest.raises(IntegrationError) as err:
        integrate_s2(lambda lam: np.where(lam[:, 0] > 0, 1.0, np.nan), QuadratureSpec(samples=1000))
    assert err.value.point is not None


def test_cubed_integral():
    spec = QuadratureSpec(samples=50_000, seed=2)
    res = integrate_s2_cubed(lambda u, v, w: np.ones(len(u)), spec)
    assert res.value == pytest.approx(FOUR_PI**3)
    res = integrate_s2_cubed(lambda u, v, w: (u[:, 2] > 0) * (v[:, 2] > 0) * 1.0, spec)
    assert res.within(FOUR_PI**3 / 4)
    with pytest.raises(ValueError):
        integrate_s2_cubed(lambda u, v, w: u[:, 0], QuadratureSpec("product_rule", 4))
    u, v, w = sample_sphere_triples(2, 10)
    assert u.shape == v.shape == w.shape == (10, 3)


def test_z_score_zero_error():
    r = IntegralResult(value=1.0, std_error=0.0, evaluations=1)
    assert r.z_score(1.0) == 0.0 and r.z_score(2.0) == -math.inf
