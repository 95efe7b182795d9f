"""Bell basis, correction table, rotations and the two quantum routes."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import directions, labels
from teleport_hv.errors import ProductFormError, TeleportHVError
from teleport_hv.spinor_core import (
    Direction,
    Z_AXIS,
    equal_up_to_phase,
    expectation,
    is_unitary,
    sigma_dot,
    spin_eigenstate,
)
from teleport_hv.teleport import (
    ALL_LABELS,
    SINGLET,
    SINGLET_ROTATION_DIAGONALS,
    BellLabel,
    bell_observables,
    bell_projector,
    bell_state,
    check_rotation,
    conjugation_rotation,
    correction_rotation,
    correction_unitary,
    expansion_check,
    initial_state,
    protocol_run,
    route_a_expectation,
    route_b_expectation,
)

PAIRS = list(itertools.product(ALL_LABELS, ALL_LABELS))


def test_label_parsing():
    assert BellLabel.of("-1,1") == BellLabel(-1, 1)
    assert BellLabel.of((1, -1)) == BellLabel(1, -1)
    assert str(BellLabel(-1, -1)) == "-1,-1"
    for bad in ("1", "1,0", "a,b", "1,1,1", (2, 1)):
        with pytest.raises(TeleportHVError):
            BellLabel.of(bad)


@pytest.mark.parametrize("label", ALL_LABELS)
def test_bell_states_are_joint_eigenstates(label):
    b, bb = bell_observables()
    v = bell_state(label)
    assert np.allclose(b @ v, label.beta * v, atol=1e-15)
    assert np.allclose(bb @ v, label.beta_bar * v, atol=1e-15)


def test_bell_basis_orthonormal():
    m = np.array([bell_state(lab) for lab in ALL_LABELS])
    assert np.allclose(m.conj() @ m.T, np.eye(4), atol=1e-15)


def test_singlet_is_rotation_invariant():
    # the singlet is the unique state with sigma_1 . n sigma_2 . n = -1 for every n
    n = Direction.from_angles(0.9, 2.1)
    op = np.kron(sigma_dot(n), sigma_dot(n))
    assert np.allclose(op @ bell_state(SINGLET), -bell_state(SINGLET))


@pytest.mark.parametrize("label0,label", PAIRS)
def test_corrections_are_unitary_rotations(label0, label):
    u = correction_unitary(label0, label)
    assert is_unitary(u)
    assert check_rotation(conjugation_rotation(u))


def test_singlet_rotation_table_exact():
    for label, diag in SINGLET_ROTATION_DIAGONALS.items():
        r = correction_rotation(SINGLET, label).rotation
        assert np.array_equal(r, np.diag(diag))


def _oracle_component(n, label0, label):
    # independent oracle: build the 8-dim state by explicit sums over z-basis
    # products and contract with <label|_12 via einsum
    psi = np.einsum("i,jk->ijk", spin_eigenstate(n), bell_state(label0).reshape(2, 2))
    return np.einsum("ij,ijk->k", bell_state(label).reshape(2, 2).conj(), psi)


@settings(max_examples=40, deadline=None)
@given(directions, labels, labels)
def test_expansion_against_oracle(n, label0, label):
    phi = _oracle_component(n, label0, label)
    assert math.isclose(np.linalg.norm(phi), 0.5, abs_tol=1e-12)
    target = correction_unitary(label0, label) @ spin_eigenstate(n)
    assert np.allclose(phi, 0.5 * target, atol=1e-12)
    rec = expansion_check(initial_state(n, label0), label0, n)[BellLabel.of(label)]
    assert rec.matches and rec.residual < 1e-12 and math.isclose(abs(rec.c), 0.5, abs_tol=1e-12)


def test_expansion_rejects_other_states():
    n = Direction.from_angles(0.3, 0.2)
    with pytest.raises(ProductFormError):
        expansion_check(initial_state(-n, (1, 1)), (1, 1), n)


@settings(max_examples=30, deadline=None)
@given(directions, labels)
def test_protocol_probabilities_and_fidelity(n, label0):
    for label, rec in protocol_run(n, label0).items():
        assert math.isclose(rec.prob, 0.25, abs_tol=1e-12)
        assert math.isclose(rec.fidelity_after_correction, 1.0, abs_tol=1e-12)


def test_fidelity_before_correction_matches_rotation():
    # without the correction particle 3 sits at R n: fidelity (1 + n.Rn)/2
    n = Direction.from_angles(1.0, 0.4)
    for label, rec in protocol_run(n, (1, 1)).items():
        r = correction_rotation((1, 1), label).rotation
        assert math.isclose(rec.fidelity_before_correction, (1 + n.vec @ r @ n.vec) / 2, abs_tol=1e-12)


@settings(max_examples=40, deadline=None)
@given(directions, directions, labels, labels)
def test_route_equivalence(n, c, label0, label):
    ra = route_a_expectation(n, label0, label, c)
    rb = route_b_expectation(n, label0, label, c)
    assert abs(ra - rb) < 1e-12


@settings(max_examples=40, deadline=None)
@given(directions, labels, labels)
def test_unitary_maps_to_rotated_eigenstate(n, label0, label):
    entry = correction_rotation(label0, label, n)
    rn = Direction.from_vector(entry.rotation @ n.vec, normalize=True)
    u_plus = entry.unitary @ spin_eigenstate(n)
    assert equal_up_to_phase(u_plus, spin_eigenstate(rn))
    assert np.allclose(u_plus, np.exp(1j * entry.phase) * spin_eigenstate(rn), atol=1e-12)


def test_phase_depends_on_n():
    # e.g. U = sigma_x: the phase is -phi, so it cannot be a constant of U
    e = correction_rotation((1, 1), (-1, 1))
    p1 = e.phase_at(Direction.from_angles(1.0, 0.3))
    p2 = e.phase_at(Direction.from_angles(1.0, 1.3))
    assert not math.isclose(p1, p2)


def test_projector_is_projector():
    for label in ALL_LABELS:
        p = bell_projector(label)
        assert np.allclose(p @ p, p) and math.isclose(np.trace(p).real, 2.0)


def test_route_b_is_rotated_dot_product():
    n, c = Direction.from_angles(0.7, 0.1), Direction.from_angles(2.0, 1.5)
    r = correction_rotation(SINGLET, (1, 1)).rotation
    assert math.isclose(route_b_expectation(n, SINGLET, (1, 1), c), (r @ n.vec) @ c.vec, abs_tol=1e-12)
    assert math.isclose(expectation(sigma_dot(c), spin_eigenstate(Z_AXIS)), c.z, abs_tol=1e-12)
