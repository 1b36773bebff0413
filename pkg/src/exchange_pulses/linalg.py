"""Small dense complex linear algebra used as the numerical oracle.

Everything here works on plain ``numpy`` arrays. Unitaries are compared
through :func:`fidelity_up_to_phase`, never by raw equality.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

X_AXIS = (1.0, 0.0, 0.0)
Y_AXIS = (0.0, 1.0, 0.0)
Z_AXIS = (0.0, 0.0, 1.0)

UNIT_TOL = 1e-12
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class AxisAngle:
    """Rotation of the Bloch sphere by ``angle`` radians about ``axis``."""

    axis: tuple[float, float, float]
    angle: float

    def __post_init__(self):
        axis = tuple(float(a) for a in self.axis)
        if len(axis) != 3:
            raise InvalidArgument(f"axis must have 3 components, got {len(axis)}")
        norm = math.sqrt(sum(a * a for a in axis))
        if abs(norm - 1.0) > UNIT_TOL:
            raise InvalidArgument(f"axis must be unit norm, |n| = {norm!r}")
        if not math.isfinite(self.angle):
            raise InvalidArgument("angle must be finite")
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "angle", float(self.angle))

    def canonical(self) -> "AxisAngle":
        """Same rotation with the angle reduced to ``[0, 4*pi)``."""
        return AxisAngle(self.axis, self.angle % (4 * math.pi))


def rotation_operator(axis_angle: AxisAngle) -> np.ndarray:
    """Return ``cos(psi/2) I - i sin(psi/2) n.sigma``."""
    nx, ny, nz = axis_angle.axis
    half = axis_angle.angle / 2
    c, s = math.cos(half), math.sin(half)
    return np.array(
        [[c - 1j * s * nz, -1j * s * nx - s * ny],
         [-1j * s * nx + s * ny, c + 1j * s * nz]],
        dtype=complex,
    )


def rotation(axis, angle) -> np.ndarray:
    """Shorthand for ``rotation_operator(AxisAngle(axis, angle))``."""
    return rotation_operator(AxisAngle(axis, angle))


def is_hermitian(h, tol=HERMITIAN_TOL) -> bool:
    h = np.asarray(h)
    return h.ndim == 2 and h.shape[0] == h.shape[1] and np.max(np.abs(h - h.conj().T), initial=0.0) <= tol


def unitarity_error(u) -> float:
    """``max |U^dag U - I|`` elementwise."""
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def _expm_hermitian_2x2(h, t):
    # h = a I + b.sigma, exp(-i h t) = e^{-i a t} (cos(|b| t) I - i sin(|b| t) b.sigma/|b|)
    a = 0.5 * (h[0, 0] + h[1, 1]).real
    bz = 0.5 * (h[0, 0] - h[1, 1]).real
    bx = h[1, 0].real
    by = h[1, 0].imag
    r = math.sqrt(bx * bx + by * by + bz * bz)
    if r == 0.0:
        return np.exp(-1j * a * t) * I2.copy()
    c, s = math.cos(r * t), math.sin(r * t) / r
    u = np.array(
        [[c - 1j * s * bz, -1j * s * bx - s * by],
         [-1j * s * bx + s * by, c + 1j * s * bz]],
        dtype=complex,
    )
    return np.exp(-1j * a * t) * u


def expm_hermitian(h, t) -> np.ndarray:
    """Return ``exp(-i H t)`` for Hermitian ``H`` by exact diagonalisation.

    The 2x2 case is closed form; larger matrices go through ``numpy.linalg.eigh``.

    Raises
    ------
    InvalidArgument
        If ``H`` is not square and Hermitian within 1e-12.
    """
    h = np.asarray(h)
    if not is_hermitian(h):
        raise InvalidArgument("expm_hermitian needs a square Hermitian matrix")
    if not math.isfinite(t):
        raise InvalidArgument("t must be finite")
    if h.shape[0] == 2:
        return _expm_hermitian_2x2(h, t)
    evals, evecs = np.linalg.eigh(h)
    return (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T


def fidelity_up_to_phase(u, v) -> float:
    """``|tr(U^dag V)| / d``: 1 exactly when ``U`` and ``V`` differ by a global phase."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape or u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise InvalidArgument(f"dimension mismatch: {u.shape} vs {v.shape}")
    return float(abs(np.vdot(u, v)) / u.shape[0])


def global_phase(u, v) -> float:
    """Phase ``phi`` minimising ``|e^{i phi} V - U|``."""
    return float(np.angle(np.vdot(v, u)))


def special_unitary(u) -> np.ndarray:
    """Rescale a 2x2 unitary to determinant one (principal square root)."""
    u = np.asarray(u, dtype=complex)
    return u / np.sqrt(np.linalg.det(u))


def axis_angle_from_unitary(u) -> AxisAngle:
    """Invert :func:`rotation_operator` up to sign; the angle lies in ``[0, 2*pi]``.

    The identity maps to the z axis with angle zero.
    """
    v = special_unitary(u)
    c = 0.5 * np.trace(v).real
    # V = c I - i s n.sigma  =>  s n_k = (i/2) tr(V sigma_k)
    vec = np.array([(0.5j * np.trace(v @ p)).real for p in PAULIS])
    s = float(np.linalg.norm(vec))
    angle = 2.0 * math.atan2(s, c)
    if s < 1e-15:
        return AxisAngle(Z_AXIS, angle)
    return AxisAngle(tuple(vec / s), angle)


def bloch_vector(state) -> np.ndarray:
    """``(<sx>, <sy>, <sz>)`` of a 2-vector or 2x2 density matrix."""
    state = np.asarray(state, dtype=complex)
    rho = np.outer(state, state.conj()) if state.ndim == 1 else state
    return np.array([np.trace(rho @ p).real for p in PAULIS])
