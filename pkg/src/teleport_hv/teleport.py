"""Standard spin-1/2 teleportation: Bell basis, corrections, and the two
quantum-mechanical routes to the post-selected expectation of sigma_3 . c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ProductFormError, TeleportHVError, ZeroProbabilityError
from .spinor_core import (
    ALGEBRA_TOL,
    DEGENERATE_PROB,
    Direction,
    DirectionLike,
    Z_AXIS,
    _frozen,
    as_direction,
    embed,
    equal_up_to_phase,
    expectation,
    make_pauli,
    overlap_fidelity,
    project,
    sigma_dot,
    spin_eigenstate,
    state_vector,
    tensor,
)


class BellLabel(NamedTuple):
    """Eigenvalues (beta, beta_bar) of sigma_1z sigma_2z and sigma_1x sigma_2x."""

    beta: int
    beta_bar: int

    @classmethod
    def of(cls, value) -> "BellLabel":
        """Build a label from a pair or a string such as ``"-1,1"``."""
        if isinstance(value, BellLabel):
            return value
        if isinstance(value, str):
            parts = [p.strip() for p in value.split(",")]
            if len(parts) != 2:
                raise TeleportHVError(f"malformed Bell label {value!r}")
            try:
                value = tuple(int(p) for p in parts)
            except ValueError:
                raise TeleportHVError(f"malformed Bell label {value!r}") from None
        beta, beta_bar = value
        if beta not in (1, -1) or beta_bar not in (1, -1):
            raise TeleportHVError(f"Bell label components must be +1 or -1, got {value!r}")
        return cls(int(beta), int(beta_bar))

    def __str__(self) -> str:
        return f"{self.beta},{self.beta_bar}"


ALL_LABELS = tuple(BellLabel(b, bb) for b in (1, -1) for bb in (1, -1))
SINGLET = BellLabel(-1, -1)

_UP = np.array([1.0, 0.0], dtype=complex)
_DN = np.array([0.0, 1.0], dtype=complex)


def bell_state(label) -> np.ndarray:
    """|beta, beta_bar> on two particles, z-basis products."""
    beta, beta_bar = BellLabel.of(label)
    if beta == 1:
        v = np.kron(_UP, _UP) + beta_bar * np.kron(_DN, _DN)
    else:
        v = np.kron(_UP, _DN) + beta_bar * np.kron(_DN, _UP)
    return state_vector(v / math.sqrt(2.0))


def bell_observables() -> tuple[np.ndarray, np.ndarray]:
    """(B, B_bar) = (sigma_1z sigma_2z, sigma_1x sigma_2x)."""
    sz, sx = make_pauli("z"), make_pauli("x")
    return tensor([sz, sz]), tensor([sx, sx])


def initial_state(n: DirectionLike, label0) -> np.ndarray:
    """|+>^n_1 (x) |beta0, beta0_bar>_23."""
    plus = spin_eigenstate(as_direction(n), +1)
    return state_vector(np.kron(plus, bell_state(label0)))


_I = np.eye(2, dtype=complex)
_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)

# U[label0][label] such that <label|_12 |+>^n_1 |label0>_23 = 1/2 U |+>^n_3
_CORRECTIONS = {
    BellLabel(1, 1): {
        BellLabel(1, 1): _I,
        BellLabel(1, -1): _SZ,
        BellLabel(-1, 1): _SX,
        BellLabel(-1, -1): -1j * _SY,
    },
    BellLabel(1, -1): {
        BellLabel(1, 1): _SZ,
        BellLabel(1, -1): _I,
        BellLabel(-1, 1): 1j * _SY,
        BellLabel(-1, -1): -_SX,
    },
    BellLabel(-1, 1): {
        BellLabel(1, 1): _SX,
        BellLabel(1, -1): -1j * _SY,
        BellLabel(-1, 1): _I,
        BellLabel(-1, -1): _SZ,
    },
    BellLabel(-1, -1): {
        BellLabel(1, 1): -1j * _SY,
        BellLabel(1, -1): _SX,
        BellLabel(-1, 1): -_SZ,
        BellLabel(-1, -1): -_I,
    },
}

# expected rotation diagonals when particles 2-3 start in the singlet
SINGLET_ROTATION_DIAGONALS = {
    BellLabel(1, 1): (-1.0, 1.0, -1.0),
    BellLabel(1, -1): (1.0, -1.0, -1.0),
    BellLabel(-1, 1): (-1.0, -1.0, 1.0),
    BellLabel(-1, -1): (1.0, 1.0, 1.0),
}


def correction_unitary(label0, label) -> np.ndarray:
    """Unitary U acting on particle 3 that the outcome ``label`` leaves behind."""
    return _frozen(_CORRECTIONS[BellLabel.of(label0)][BellLabel.of(label)])


def conjugation_rotation(u) -> np.ndarray:
    """SO(3) image of a 2x2 unitary: R_ij = 1/2 Tr(sigma_i U sigma_j U^dagger)."""
    u = np.asarray(u, dtype=complex)
    paulis = (_SX, _SY, _SZ)
    r = np.empty((3, 3))
    for i, si in enumerate(paulis):
        for j, sj in enumerate(paulis):
            val = 0.5 * np.trace(si @ u @ sj @ u.conj().T)
            r[i, j] = val.real
    r.setflags(write=False)
    return r


def check_rotation(r, tol: float = ALGEBRA_TOL) -> bool:
    r = np.asarray(r, dtype=float)
    return bool(
        r.shape == (3, 3)
        and np.max(np.abs(r.T @ r - np.eye(3))) <= tol
        and abs(np.linalg.det(r) - 1.0) <= tol
    )


@dataclass(frozen=True)
class CorrectionEntry:
    """A correction unitary with its rotation and the phase it picks up at ``n``.

    ``U |+>^n = exp(i phase) |+>^{R n}``.  The phase depends on n through the
    ket phase convention, so it is recorded together with the n used.
    """

    unitary: np.ndarray
    rotation: np.ndarray
    phase: float
    n: Direction

    def phase_at(self, n: DirectionLike) -> float:
        return unitary_phase(self.unitary, self.rotation, n)


def unitary_phase(u, r, n: DirectionLike) -> float:
    """arg <+^{Rn}| U |+^n>."""
    n = as_direction(n)
    rn = Direction.from_vector(np.asarray(r) @ n.vec, normalize=True)
    amp = np.vdot(spin_eigenstate(rn), np.asarray(u) @ spin_eigenstate(n))
    return float(np.angle(amp))


def correction_rotation(label0, label, n: DirectionLike = Z_AXIS) -> CorrectionEntry:
    u = correction_unitary(label0, label)
    r = conjugation_rotation(u)
    n = as_direction(n)
    return CorrectionEntry(unitary=u, rotation=r, phase=unitary_phase(u, r, n), n=n)


def bell_projector(label) -> np.ndarray:
    """|label><label|_12 (x) I_3 on the three-particle space."""
    b = bell_state(label)
    return _frozen(np.kron(np.outer(b, b.conj()), np.eye(2)))


def particle3_component(psi, label) -> np.ndarray:
    """Unnormalized particle-3 vector (<label|_12 (x) I_3) |psi>."""
    psi = np.asarray(psi, dtype=complex).reshape(4, 2)
    return bell_state(label).conj() @ psi


@dataclass(frozen=True)
class ExpansionRecord:
    c: complex
    particle3_state: np.ndarray
    residual: float
    matches: bool


def expansion_check(psi, label0, n: DirectionLike) -> dict[BellLabel, ExpansionRecord]:
    """Expand |psi> over the 1-2 Bell basis and compare each particle-3 factor
    with U |+>^n.

    Raises:
        ProductFormError: if ``psi`` is not |+>^n (x) |label0> up to a phase.
    """
    n = as_direction(n)
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.shape != (8,) or not equal_up_to_phase(psi, initial_state(n, label0)):
        raise ProductFormError("state is not |+>^n (x) |beta0 beta0_bar>")
    plus = spin_eigenstate(n)
    out = {}
    for label in ALL_LABELS:
        phi = particle3_component(psi, label)
        target = correction_unitary(label0, label) @ plus
        c = complex(np.vdot(target, phi))
        residual = float(np.max(np.abs(phi - c * target)))
        norm = abs(c)
        state = state_vector(phi / norm) if norm > 0 else phi
        out[label] = ExpansionRecord(
            c=c,
            particle3_state=state,
            residual=residual,
            matches=residual <= ALGEBRA_TOL and abs(norm - 0.5) <= ALGEBRA_TOL,
        )
    return out


def route_a_expectation(n: DirectionLike, label0, label, c: DirectionLike) -> float:
    """<Psi| P (sigma_3 . c) P |Psi> / <Psi|P|Psi>, all in the 8-dim space."""
    psi = initial_state(n, label0)
    proj = bell_projector(label)
    obs = embed(sigma_dot(as_direction(c)), 3, 3)
    prob = expectation(proj, psi)
    if prob < DEGENERATE_PROB:
        raise ZeroProbabilityError(f"Bell outcome {label} has probability {prob!r}")
    return expectation(proj @ obs @ proj, psi) / prob


def route_b_expectation(n: DirectionLike, label0, label, c: DirectionLike) -> float:
    """Single-particle expectation of sigma . (R^-1 c) in the original |+>^n."""
    r = conjugation_rotation(correction_unitary(label0, label))
    c_rot = r.T @ as_direction(c).vec
    return expectation(sigma_dot(c_rot), spin_eigenstate(as_direction(n)))


@dataclass(frozen=True)
class OutcomeRecord:
    prob: float
    fidelity_before_correction: float
    fidelity_after_correction: float


def protocol_run(n: DirectionLike, label0) -> dict[BellLabel, OutcomeRecord]:
    """Run the protocol for every Bell outcome: project, undo U, compare with |+>^n."""
    n = as_direction(n)
    psi = initial_state(n, label0)
    plus = spin_eigenstate(n)
    out = {}
    for label in ALL_LABELS:
        prob, post = project(psi, bell_projector(label))
        # post = |label>_12 (x) psi3, so contracting with <label| is exact
        psi3 = particle3_component(post, label)
        corrected = correction_unitary(label0, label).conj().T @ psi3
        out[label] = OutcomeRecord(
            prob=prob,
            fidelity_before_correction=overlap_fidelity(plus, psi3),
            fidelity_after_correction=overlap_fidelity(plus, corrected),
        )
    return out
