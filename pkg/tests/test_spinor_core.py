"""Pauli algebra, eigenstates, tensor products and projective measurement."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import directions
from teleport_hv.errors import (
    InvalidDirectionError,
    NotHermitianError,
    UnsupportedDimensionError,
    ZeroProbabilityError,
)
from teleport_hv.spinor_core import (
    X_AXIS,
    Z_AXIS,
    Direction,
    embed,
    equal_up_to_phase,
    expectation,
    is_hermitian,
    is_unitary,
    make_pauli,
    project,
    sigma_dot,
    spin_eigenstate,
    state_vector,
    tensor,
)

SX, SY, SZ, I2 = (make_pauli(k) for k in "xyzi")


def test_pauli_algebra():
    for s in (SX, SY, SZ):
        assert np.allclose(s @ s, I2, atol=1e-15)
        assert is_hermitian(s) and is_unitary(s)
    assert np.allclose(SX @ SY, 1j * SZ)
    assert np.allclose(SY @ SZ, 1j * SX)
    assert np.allclose(SZ @ SX, 1j * SY)
    assert np.allclose(SX @ SY + SY @ SX, 0)


def test_pauli_unknown_axis():
    with pytest.raises(ValueError):
        make_pauli("w")


def test_paulis_are_read_only():
    with pytest.raises(ValueError):
        SX[0, 0] = 5


def test_direction_validation():
    with pytest.raises(InvalidDirectionError):
        Direction(1.0, 1.0, 0.0)
    with pytest.raises(InvalidDirectionError):
        Direction.from_vector([0.0, 0.0, 0.0], normalize=True)
    d = Direction.from_vector([3.0, 0.0, 4.0], normalize=True)
    assert math.isclose(d.z, 0.8)


@given(directions)
def test_angles_round_trip(d):
    th, ph = d.angles()
    assert np.allclose(Direction.from_angles(th, ph).vec, d.vec, atol=1e-12)


def test_eigenstate_phase_convention():
    th, ph = 1.1, 0.7
    psi = spin_eigenstate(Direction.from_angles(th, ph))
    assert np.allclose(psi, [math.cos(th / 2), np.exp(1j * ph) * math.sin(th / 2)])
    assert np.allclose(spin_eigenstate(Z_AXIS), [1, 0])
    n = Direction.from_angles(th, ph)
    assert np.allclose(spin_eigenstate(n, -1), spin_eigenstate(-n))
    assert equal_up_to_phase(spin_eigenstate(Z_AXIS, -1), np.array([0, 1], dtype=complex))


@given(directions)
def test_eigenstates(n):
    op = sigma_dot(n)
    up, down = spin_eigenstate(n), spin_eigenstate(n, -1)
    assert np.allclose(op @ up, up, atol=1e-12)
    assert np.allclose(op @ down, -down, atol=1e-12)
    assert abs(np.vdot(up, down)) < 1e-12
    assert math.isclose(np.linalg.norm(up), 1.0, abs_tol=1e-12)


@given(directions, directions)
def test_expectation_is_dot_product(n, a):
    # <+n| sigma.a |+n> = n.a
    assert math.isclose(expectation(sigma_dot(a), spin_eigenstate(n)), n.dot(a), abs_tol=1e-12)


@given(directions, directions)
def test_born_rule(n, a):
    # |<+a|+n>|^2 = cos^2(angle/2) = (1 + n.a)/2
    p, post = project(spin_eigenstate(n), np.outer(spin_eigenstate(a), spin_eigenstate(a).conj()))
    assert math.isclose(p, (1 + n.dot(a)) / 2, abs_tol=1e-12) or p < 1e-14
    assert equal_up_to_phase(post, spin_eigenstate(a))


def test_project_zero_probability():
    with pytest.raises(ZeroProbabilityError):
        project(spin_eigenstate(Z_AXIS), np.outer(spin_eigenstate(Z_AXIS, -1), spin_eigenstate(Z_AXIS, -1)))


def test_expectation_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        expectation(np.array([[0, 1], [0, 0]], dtype=complex), spin_eigenstate(X_AXIS))


def test_dimension_checks():
    with pytest.raises(UnsupportedDimensionError):
        state_vector(np.ones(3))
    with pytest.raises(UnsupportedDimensionError):
        expectation(SX, np.ones(4) / 2)
    with pytest.raises(UnsupportedDimensionError):
        tensor([SX, SY, SZ, SX])


def test_tensor_ordering():
    # particle 1 is the most significant index
    up, down = spin_eigenstate(Z_AXIS), spin_eigenstate(Z_AXIS, -1)
    psi = tensor([down, up, up])
    assert np.argmax(np.abs(psi)) == 4
    assert np.allclose(embed(SZ, 1, 3) @ psi, -psi)
    assert np.allclose(embed(SZ, 3, 3) @ psi, psi)


def test_embed_slot_range():
    with pytest.raises(ValueError):
        embed(SX, 0, 3)


@given(st.integers(1, 3), st.sampled_from("xyz"))
def test_embed_is_unitary_hermitian(slot, axis):
    op = embed(make_pauli(axis), slot, 3)
    assert op.shape == (8, 8)
    assert is_unitary(op) and is_hermitian(op)


@settings(max_examples=50)
@given(directions, st.floats(0, 2 * math.pi))
def test_global_phase_invisible(n, phase):
    psi = spin_eigenstate(n)
    assert equal_up_to_phase(psi, np.exp(1j * phase) * psi)
