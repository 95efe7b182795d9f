"""Dense linear algebra for one to three spin-1/2 particles.

States are complex numpy vectors of length 2, 4 or 8 and operators are
dense square complex matrices of matching size.  Both are returned
read-only so that they can be shared freely between threads.  The
particle ordering is always 1 (x) 2 (x) 3, particle 1 being the most
significant tensor factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import (
    InvalidDirectionError,
    NotHermitianError,
    TeleportHVError,
    UnsupportedDimensionError,
    ZeroProbabilityError,
)

UNIT_TOL = 1e-12
ALGEBRA_TOL = 1e-12
# projections with probability below this are treated as impossible outcomes
DEGENERATE_PROB = 1e-14

ALLOWED_DIMS = (2, 4, 8)


@dataclass(frozen=True)
class Direction:
    """A unit vector in R^3 (state axis, setting, hidden variable...)."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        comps = (self.x, self.y, self.z)
        if not all(math.isfinite(c) for c in comps):
            raise InvalidDirectionError(f"non-finite direction {comps}")
        norm2 = self.x * self.x + self.y * self.y + self.z * self.z
        if abs(norm2 - 1.0) > UNIT_TOL:
            raise InvalidDirectionError(
                f"direction {comps} is not a unit vector (|v|^2 = {norm2!r})"
            )

    @classmethod
    def from_angles(cls, theta: float, phi: float = 0.0) -> "Direction":
        """Polar angle ``theta`` from +z and azimuth ``phi``, in radians."""
        st = math.sin(theta)
        return cls(st * math.cos(phi), st * math.sin(phi), math.cos(theta))

    @classmethod
    def from_vector(cls, v, normalize: bool = False) -> "Direction":
        v = np.asarray(v, dtype=float).reshape(3)
        if normalize:
            norm = float(np.linalg.norm(v))
            if norm == 0.0 or not math.isfinite(norm):
                raise InvalidDirectionError(f"cannot normalize {v.tolist()}")
            v = v / norm
        return cls(float(v[0]), float(v[1]), float(v[2]))

    @property
    def vec(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def angles(self) -> tuple[float, float]:
        theta = math.atan2(math.hypot(self.x, self.y), self.z)
        phi = math.atan2(self.y, self.x)
        return theta, phi

    def dot(self, other: "Direction") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def __neg__(self) -> "Direction":
        return Direction(-self.x, -self.y, -self.z)


DirectionLike = Union[Direction, Sequence[float], np.ndarray]

X_AXIS = Direction(1.0, 0.0, 0.0)
Y_AXIS = Direction(0.0, 1.0, 0.0)
Z_AXIS = Direction(0.0, 0.0, 1.0)


def as_direction(d: DirectionLike) -> Direction:
    """Coerce ``d`` to a :class:`Direction`, enforcing unit norm."""
    if isinstance(d, Direction):
        return d
    return Direction.from_vector(d)


def random_direction(rng: np.random.Generator) -> Direction:
    v = rng.normal(size=3)
    return Direction.from_vector(v, normalize=True)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def state_vector(amps) -> np.ndarray:
    """Validate and freeze a state vector (dimension 2, 4 or 8, unit norm)."""
    v = np.asarray(amps, dtype=complex).reshape(-1)
    if v.size not in ALLOWED_DIMS:
        raise UnsupportedDimensionError(f"state dimension {v.size} not in {ALLOWED_DIMS}")
    if not np.all(np.isfinite(v)):
        raise TeleportHVError("state has non-finite amplitudes")
    norm2 = float(np.vdot(v, v).real)
    if abs(norm2 - 1.0) > UNIT_TOL:
        raise TeleportHVError(f"state is not normalized (norm^2 = {norm2!r})")
    return _frozen(v)


def normalize(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    norm = math.sqrt(float(np.vdot(v, v).real))
    if norm == 0.0:
        raise ZeroProbabilityError("cannot normalize the zero vector")
    return state_vector(v / norm)


_PAULI = {
    "identity": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_PAULI["i"] = _PAULI["identity"]


def make_pauli(axis: str) -> np.ndarray:
    """Return the 2x2 Pauli matrix for ``axis`` in {"x", "y", "z", "identity"}."""
    try:
        return _frozen(_PAULI[axis.lower()])
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None


def sigma_dot(d: DirectionLike) -> np.ndarray:
    """sigma . d for a real 3-vector ``d`` (need not be unit)."""
    if isinstance(d, Direction):
        v = d.vec
    else:
        v = np.asarray(d, dtype=float).reshape(3)
    return _frozen(v[0] * _PAULI["x"] + v[1] * _PAULI["y"] + v[2] * _PAULI["z"])


def spin_eigenstate(n: DirectionLike, sign: int = 1) -> np.ndarray:
    """Eigenvector of sigma . n with eigenvalue ``sign``.

    Phase convention: |+>^n = (cos(theta/2), e^{i phi} sin(theta/2)) with
    (theta, phi) the polar angles of n, and |->^n = |+>^{-n}.
    """
    n = as_direction(n)
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    theta, phi = n.angles()
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    if sign == 1:
        amps = [c, np.exp(1j * phi) * s]
    else:
        amps = [s, -np.exp(1j * phi) * c]
    return state_vector(amps)


def tensor(factors: Sequence[np.ndarray]) -> np.ndarray:
    """Kronecker product of 1-3 single-particle states or operators, in order 1, 2, 3."""
    factors = [np.asarray(f, dtype=complex) for f in factors]
    if not 1 <= len(factors) <= 3:
        raise UnsupportedDimensionError(f"tensor supports 1-3 factors, got {len(factors)}")
    for f in factors:
        if f.shape not in ((2,), (2, 2)):
            raise UnsupportedDimensionError(f"factor of shape {f.shape} is not single-particle")
    if len({f.ndim for f in factors}) != 1:
        raise TypeError("cannot mix states and operators in one tensor product")
    out = factors[0]
    for f in factors[1:]:
        out = np.kron(out, f)
    return _frozen(out)


def embed(op: np.ndarray, slot: int, parties: int) -> np.ndarray:
    """Lift a single-particle operator to act on particle ``slot`` of ``parties``."""
    op = np.asarray(op, dtype=complex)
    if op.shape != (2, 2):
        raise UnsupportedDimensionError(f"embed needs a 2x2 operator, got {op.shape}")
    if parties not in (1, 2, 3):
        raise UnsupportedDimensionError(f"parties must be 1..3, got {parties}")
    if not 1 <= slot <= parties:
        raise ValueError(f"slot {slot} out of range for {parties} particles")
    eye = np.eye(2, dtype=complex)
    return tensor([op if k == slot else eye for k in range(1, parties + 1)])


def is_hermitian(m, tol: float = ALGEBRA_TOL) -> bool:
    m = np.asarray(m)
    return bool(np.max(np.abs(m - m.conj().T)) <= tol)


def is_unitary(m, tol: float = ALGEBRA_TOL) -> bool:
    m = np.asarray(m)
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= tol)


def _check_dims(op: np.ndarray, psi: np.ndarray) -> None:
    if op.ndim != 2 or op.shape[0] != op.shape[1] or op.shape[0] != psi.shape[0]:
        raise UnsupportedDimensionError(
            f"operator of shape {op.shape} does not act on a state of dimension {psi.shape[0]}"
        )


def expectation(op, psi) -> float:
    """<psi|op|psi> for a hermitian ``op``."""
    op = np.asarray(op, dtype=complex)
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    _check_dims(op, psi)
    if not is_hermitian(op):
        raise NotHermitianError("expectation requires a hermitian operator")
    val = np.vdot(psi, op @ psi)
    if abs(val.imag) >= ALGEBRA_TOL:
        raise TeleportHVError(f"expectation has imaginary part {val.imag!r}")
    return float(val.real)


def project(psi, proj) -> tuple[float, np.ndarray]:
    """Selective projective measurement.

    Returns:
        ``(prob, post_state)`` with prob = <psi|P|psi> and the renormalized
        post-measurement state P psi / sqrt(prob).

    Raises:
        ZeroProbabilityError: if prob is below ``DEGENERATE_PROB``.
    """
    proj = np.asarray(proj, dtype=complex)
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    _check_dims(proj, psi)
    if not is_hermitian(proj) or np.max(np.abs(proj @ proj - proj)) > ALGEBRA_TOL:
        raise NotHermitianError("projector must be hermitian and idempotent")
    image = proj @ psi
    prob = float(np.vdot(image, image).real)
    if prob < DEGENERATE_PROB:
        raise ZeroProbabilityError(f"projection has probability {prob!r}")
    return prob, state_vector(image / math.sqrt(prob))


def overlap_fidelity(a, b) -> float:
    """|<a|b>|^2."""
    return float(abs(np.vdot(np.asarray(a), np.asarray(b))) ** 2)


def equal_up_to_phase(a, b, tol: float = ALGEBRA_TOL) -> bool:
    """True when the two vectors coincide after removing a global phase."""
    a = np.asarray(a, dtype=complex).reshape(-1)
    b = np.asarray(b, dtype=complex).reshape(-1)
    ov = np.vdot(a, b)
    if abs(ov) == 0.0:
        return bool(np.max(np.abs(a - b)) <= tol)
    phase = ov / abs(ov)
    return bool(np.max(np.abs(a * phase - b)) <= tol)
