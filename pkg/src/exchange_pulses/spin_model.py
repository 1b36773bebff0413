"""Hamiltonians of an exchange-coupled spin pair and of an N-spin chain.

Conventions follow the 4x4 pair matrix

    [[-Omega+K, 0,     0,      0       ],
     [0,        omega, K,      0       ],
     [0,        K,     -omega, 0       ],
     [0,        0,     0,      Omega+K ]]

in the basis |00>, |01>, |10>, |11> with K = 2J, Omega = (A+B)/2 and
omega = (A-B)/2. The logical qubit lives in {|01>, |10>}.

Chain states use site 0 as the most significant bit, and the chain
Hamiltonian is the site-wise Zeeman plus Heisenberg form. Read with that
ordering, this pair matrix puts the B energy on the left site, so a
two-site chain with energies ``(B, A)`` reproduces ``pair_hamiltonian(A, B)``.
:func:`abab_chain` takes care of that layout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityExceeded, DomainViolation, InvalidArgument

MAX_SPINS = 12
J_TOL = 1e-12


@dataclass(frozen=True)
class PairParams:
    """Transition energies of one AB pair and the coupling bound.

    ``j_max`` defaults to unbounded; the gate compiler substitutes its own
    default of ``(sqrt(3)/2) * omega`` when the pair carries no bound.
    """

    A: float
    B: float
    j_max: float = math.inf

    def __post_init__(self):
        if not (math.isfinite(self.A) and math.isfinite(self.B)):
            raise InvalidArgument("A and B must be finite")
        if not self.j_max >= 0:
            raise InvalidArgument("j_max must be >= 0")

    @classmethod
    def from_omega(cls, omega, Omega=0.0, j_max=math.inf):
        return cls(A=Omega + omega, B=Omega - omega, j_max=j_max)

    @property
    def omega(self) -> float:
        return 0.5 * (self.A - self.B)

    @property
    def Omega(self) -> float:
        return 0.5 * (self.A + self.B)

    def check_coupling(self, J):
        if not (-J_TOL <= J <= self.j_max * (1 + J_TOL) + J_TOL):
            raise DomainViolation(f"J={J!r} outside [0, j_max={self.j_max!r}]")

    def precession(self, J) -> float:
        """omega' = sqrt(omega^2 + K^2)."""
        return math.hypot(self.omega, 2.0 * J)


@dataclass(frozen=True)
class ChainParams:
    n_spins: int
    site_energies: tuple
    bond_couplings: tuple = field(default=None)

    def __post_init__(self):
        if self.n_spins < 2:
            raise InvalidArgument("a chain needs at least two spins")
        energies = tuple(float(e) for e in self.site_energies)
        bonds = self.bond_couplings
        bonds = (0.0,) * (self.n_spins - 1) if bonds is None else tuple(float(j) for j in bonds)
        if len(energies) != self.n_spins:
            raise InvalidArgument(f"expected {self.n_spins} site energies, got {len(energies)}")
        if len(bonds) != self.n_spins - 1:
            raise InvalidArgument(f"expected {self.n_spins - 1} bond couplings, got {len(bonds)}")
        if any(j < 0 for j in bonds):
            raise DomainViolation("bond couplings must be >= 0")
        object.__setattr__(self, "site_energies", energies)
        object.__setattr__(self, "bond_couplings", bonds)

    def with_couplings(self, couplings) -> "ChainParams":
        return ChainParams(self.n_spins, self.site_energies, tuple(couplings))


def abab_chain(params: PairParams, n_spins: int, logical_bonds="even") -> ChainParams:
    """Alternating chain whose chosen bonds each reproduce ``pair_hamiltonian(params)``.

    With ``logical_bonds="even"`` the bonds (0,1), (2,3), ... are AB pairs in
    the pair-matrix convention (the usual logical-qubit layout). With
    ``"odd"`` the bonds (1,2), (3,4), ... are, which gives the BABA section
    used by the two-qubit gate: logical qubits on the outer pairs, the
    coupled AB pair in the middle.
    """
    if logical_bonds == "even":
        first, second = params.B, params.A
    elif logical_bonds == "odd":
        first, second = params.A, params.B
    else:
        raise InvalidArgument("logical_bonds must be 'even' or 'odd'")
    energies = tuple(first if i % 2 == 0 else second for i in range(n_spins))
    return ChainParams(n_spins, energies)


def pair_hamiltonian(params: PairParams, J: float) -> np.ndarray:
    """The 4x4 pair matrix of the module docstring, global shift ``J * I`` included."""
    params.check_coupling(J)
    K = 2.0 * J
    w, W = params.omega, params.Omega
    return np.array(
        [[-W + K, 0.0, 0.0, 0.0],
         [0.0, w, K, 0.0],
         [0.0, K, -w, 0.0],
         [0.0, 0.0, 0.0, W + K]],
    )


def logical_hamiltonian(params: PairParams, J: float) -> np.ndarray:
    """``omega * sigma_z + K * sigma_x`` on {|0>_L, |1>_L} = {|01>, |10>}."""
    params.check_coupling(J)
    K = 2.0 * J
    w = params.omega
    return np.array([[w, K], [K, -w]])


def tilt_angle(params: PairParams, J: float) -> float:
    """Angle of the rotation axis from z, ``arctan(2J / omega)``."""
    return math.atan2(2.0 * J, params.omega)


def axis_and_rate(params: PairParams, J: float):
    """Rotation axis ``(sin theta, 0, cos theta)`` and Bloch rate ``2 omega'``.

    Raises
    ------
    DomainViolation
        If ``omega <= 0`` (the axis is then not the one the compiler assumes).
    """
    if not params.omega > 0:
        raise DomainViolation("axis_and_rate requires omega > 0")
    params.check_coupling(J)
    theta = tilt_angle(params, J)
    axis = (math.sin(theta), 0.0, math.cos(theta))
    return axis, 2.0 * params.precession(J)


def diagonalizer(params: PairParams, J: float) -> np.ndarray:
    """``R = [[cos(theta/2), sin(theta/2)], [-sin(theta/2), cos(theta/2)]]``.

    Satisfies ``R^dag diag(omega', -omega') R == logical_hamiltonian``.
    """
    half = 0.5 * tilt_angle(params, J)
    c, s = math.cos(half), math.sin(half)
    return np.array([[c, s], [-s, c]])


def _bits(n_spins):
    idx = np.arange(2**n_spins)
    # column i holds the bit of site i; site 0 is the most significant
    return (idx[:, None] >> (n_spins - 1 - np.arange(n_spins))[None, :]) & 1


def chain_hamiltonian(chain: ChainParams) -> np.ndarray:
    """Dense ``sum_i -(E_i/2) sz_i + sum_i J_i (s_i.s_{i+1} + 1)``.

    Built entry by entry so that matrix elements between different
    magnetisation sectors are exact zeros.
    """
    n = chain.n_spins
    if n > MAX_SPINS:
        raise CapacityExceeded(f"dense chain limited to {MAX_SPINS} spins, got {n}")
    dim = 2**n
    bits = _bits(n)
    z = 1 - 2 * bits  # sigma_z eigenvalue: +1 for bit 0
    energies = np.asarray(chain.site_energies)
    h = np.zeros((dim, dim))
    diag = -0.5 * (z * energies[None, :]).sum(axis=1)
    idx = np.arange(dim)
    for i, J in enumerate(chain.bond_couplings):
        if J == 0.0:
            continue
        diag = diag + J * (z[:, i] * z[:, i + 1] + 1)
        # sx sx + sy sy = 2 (s+ s- + s- s+): flips antiparallel neighbours
        anti = bits[:, i] != bits[:, i + 1]
        mask = (1 << (n - 1 - i)) | (1 << (n - 2 - i))
        src = idx[anti]
        h[src ^ mask, src] = 2.0 * J
    h[idx, idx] = diag
    return h


def total_magnetization(n_spins: int) -> np.ndarray:
    """Diagonal of ``sum_i sigma_z^(i)``."""
    return (1 - 2 * _bits(n_spins)).sum(axis=1)
