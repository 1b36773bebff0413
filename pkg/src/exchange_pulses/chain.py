"""Dense simulation of a whole spin chain under single-bond pulse schedules.

Every Heisenberg term conserves total sigma_z, so propagators are built
sector by sector; matrix elements between magnetisation sectors are exact
zeros rather than round-off.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapacityExceeded, InvalidArgument, SubspaceViolation
from .linalg import expm_hermitian
from .propagator import Schedule
from .spin_model import MAX_SPINS, ChainParams, chain_hamiltonian, total_magnetization

LEAKAGE_RENORM = 1e-8
LEAKAGE_FATAL = 1e-3


@dataclass(frozen=True)
class ChainState:
    n_spins: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (2**self.n_spins,):
            raise InvalidArgument(f"expected {2**self.n_spins} amplitudes, got {amps.shape}")
        if abs(np.linalg.norm(amps) - 1) > 1e-12:
            raise InvalidArgument("chain state must be normalised")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, bits: str) -> "ChainState":
        """Product state from a bit string, site 0 first (e.g. ``"0101"``)."""
        n = len(bits)
        amps = np.zeros(2**n, dtype=complex)
        amps[int(bits, 2)] = 1.0
        return cls(n, amps)

    @classmethod
    def logical(cls, n_spins, pair_states) -> "ChainState":
        """Product of per-pair logical 2-vectors; pairs are sites (2k, 2k+1)."""
        amps = np.ones(1, dtype=complex)
        for v in pair_states:
            v = np.asarray(v, dtype=complex)
            amps = np.kron(amps, np.array([0, v[0], v[1], 0]))
        if 2 * len(pair_states) < n_spins:
            amps = np.kron(amps, np.eye(1, 2 ** (n_spins - 2 * len(pair_states)), 0).ravel())
        return cls(n_spins, amps)


@dataclass(frozen=True)
class ChainSchedule:
    """Piecewise-constant couplings: ``segments`` of ``(bond_couplings, duration)``."""

    segments: tuple
    chain: ChainParams

    def __post_init__(self):
        segs = []
        for couplings, duration in self.segments:
            couplings = tuple(float(j) for j in couplings)
            if len(couplings) != self.chain.n_spins - 1:
                raise InvalidArgument("each segment needs one coupling per bond")
            if any(j < 0 for j in couplings):
                raise InvalidArgument("couplings must be >= 0")
            if sum(j != 0 for j in couplings) > 1:
                raise InvalidArgument("at most one active bond per segment")
            if not duration > 0:
                raise InvalidArgument("segment durations must be > 0")
            segs.append((couplings, float(duration)))
        object.__setattr__(self, "segments", tuple(segs))

    @classmethod
    def from_schedule(cls, schedule: Schedule, chain: ChainParams, bond: int) -> "ChainSchedule":
        """Drive one bond with a pair schedule (square pulses), all others off."""
        if not 0 <= bond < chain.n_spins - 1:
            raise InvalidArgument(f"bond {bond} out of range")
        segs = []
        for p in schedule.pulses:
            if p.shape != "square":
                raise InvalidArgument("chain schedules take square pulses only")
            couplings = [0.0] * (chain.n_spins - 1)
            couplings[bond] = p.J
            segs.append((tuple(couplings), p.duration))
        return cls(tuple(segs), chain)

    @property
    def total_duration(self) -> float:
        return math.fsum(d for _, d in self.segments)

    def then(self, other: "ChainSchedule") -> "ChainSchedule":
        return ChainSchedule(self.segments + other.segments, self.chain)

    def idle(self, duration) -> "ChainSchedule":
        """Append a segment with every bond off."""
        return ChainSchedule(self.segments + (((0.0,) * (self.chain.n_spins - 1), duration),), self.chain)


@lru_cache(maxsize=None)
def _sectors(n_spins):
    m = total_magnetization(n_spins)
    return tuple(np.flatnonzero(m == v) for v in np.unique(m))


def chain_propagator(chain: ChainParams, t) -> np.ndarray:
    """``exp(-i H t)`` for the chain's current couplings, block by magnetisation sector."""
    if chain.n_spins > MAX_SPINS:
        raise CapacityExceeded(f"dense chain limited to {MAX_SPINS} spins")
    h = chain_hamiltonian(chain)
    u = np.zeros(h.shape, dtype=complex)
    for idx in _sectors(chain.n_spins):
        block = h[np.ix_(idx, idx)]
        u[np.ix_(idx, idx)] = expm_hermitian(block, t) if len(idx) > 1 else np.exp(-1j * block * t)
    return u


def chain_unitary(schedule: ChainSchedule) -> np.ndarray:
    n = schedule.chain.n_spins
    u = np.eye(2**n, dtype=complex)
    cache = {}
    for couplings, duration in schedule.segments:
        key = (couplings, duration)
        if key not in cache:
            cache[key] = chain_propagator(schedule.chain.with_couplings(couplings), duration)
        u = cache[key] @ u
    return u


def propagate_chain(schedule: ChainSchedule, state: ChainState) -> ChainState:
    if state.n_spins != schedule.chain.n_spins:
        raise InvalidArgument("state and chain sizes differ")
    amps = state.amplitudes
    for couplings, duration in schedule.segments:
        amps = chain_propagator(schedule.chain.with_couplings(couplings), duration) @ amps
    return ChainState(state.n_spins, amps / np.linalg.norm(amps))


def magnetization_spectrum(state: ChainState) -> dict:
    """Probability mass per total-sigma_z sector, keyed by the sector's eigenvalue."""
    m = total_magnetization(state.n_spins)
    probs = np.abs(state.amplitudes) ** 2
    return {int(v): float(probs[m == v].sum()) for v in np.unique(m)}


def _code_index(n_spins, pair_bits):
    """Basis index with pair k in logical state ``pair_bits[k]`` and spare sites at 0."""
    idx = 0
    for k, b in enumerate(pair_bits):
        left, right = (0, 1) if b == 0 else (1, 0)
        idx |= left << (n_spins - 1 - 2 * k)
        idx |= right << (n_spins - 2 - 2 * k)
    return idx


@dataclass(frozen=True)
class LogicalBlock:
    """Logical action extracted from a chain unitary.

    ``leakage`` is the population that leaves the code space (every pair in
    {|01>, |10>}); ``spectator_loss`` the population that leaves the pinned
    reference state of the pairs not extracted.
    """

    matrix: np.ndarray
    leakage: float
    spectator_loss: float
    renormalized: bool


def logical_extract(u_chain, pair_index) -> LogicalBlock:
    """Restrict a chain unitary to the logical states of one or more pairs.

    Pairs are sites ``(2k, 2k+1)``. Pairs not listed are pinned to
    ``|0>_L = |01>``. ``pair_index`` may be an int or a sequence; for a
    sequence the first pair is the most significant logical bit.

    Raises
    ------
    SubspaceViolation
        If more than 1e-3 of the population leaves the code space, as
        happens part way through a drive on a bond joining two pairs.
    """
    u = np.asarray(u_chain)
    n = int(round(math.log2(u.shape[0])))
    n_pairs = n // 2
    pairs = [pair_index] if isinstance(pair_index, (int, np.integer)) else list(pair_index)
    if not pairs or any(not 0 <= p < n_pairs for p in pairs) or len(set(pairs)) != len(pairs):
        raise InvalidArgument(f"bad pair selection {pair_index!r} for {n} spins")

    code = []
    for word in range(2**n_pairs):
        bits = [(word >> (n_pairs - 1 - k)) & 1 for k in range(n_pairs)]
        code.append(_code_index(n, bits))
    code = np.array(code)

    chosen = []
    for word in range(2 ** len(pairs)):
        bits = [0] * n_pairs
        for j, p in enumerate(pairs):
            bits[p] = (word >> (len(pairs) - 1 - j)) & 1
        chosen.append(_code_index(n, bits))
    chosen = np.array(chosen)

    cols = u[:, chosen]
    in_code = np.sum(np.abs(cols[code, :]) ** 2, axis=0)
    leakage = float(max(0.0, 1.0 - in_code.mean()))
    if leakage > LEAKAGE_FATAL:
        raise SubspaceViolation(f"population {leakage:.3e} left the logical code space")
    block = cols[chosen, :]
    kept = np.sum(np.abs(block) ** 2, axis=0)
    spectator_loss = float(max(0.0, 1.0 - kept.mean()))
    renormalized = spectator_loss <= LEAKAGE_RENORM and leakage <= LEAKAGE_RENORM
    if renormalized:
        block = block / np.sqrt(kept)[None, :]
    return LogicalBlock(block, leakage, spectator_loss, renormalized)


def pair_populations(state: ChainState, pair_index) -> dict:
    """Populations of the pair's four basis states |00>, |01>, |10>, |11>."""
    n = state.n_spins
    probs = np.abs(state.amplitudes) ** 2
    idx = np.arange(2**n)
    left = (idx >> (n - 1 - 2 * pair_index)) & 1
    right = (idx >> (n - 2 - 2 * pair_index)) & 1
    return {f"{a}{b}": float(probs[(left == a) & (right == b)].sum()) for a in (0, 1) for b in (0, 1)}


def pair_logical_density(state: ChainState, pair_index) -> np.ndarray:
    """Reduced 2x2 density matrix of the pair on {|01>, |10>} (unnormalised)."""
    n = state.n_spins
    psi = state.amplitudes.reshape([2] * n)
    a, b = 2 * pair_index, 2 * pair_index + 1
    psi = np.moveaxis(psi, (a, b), (0, 1)).reshape(4, -1)
    rho = psi @ psi.conj().T
    return rho[1:3, 1:3]


def chain_trajectory(schedule: ChainSchedule, state: ChainState, samples=256):
    """States at ``samples`` uniform times over the schedule; returns ``(times, states)``."""
    total = schedule.total_duration
    times = np.linspace(0.0, total, samples) if samples > 1 else np.array([total])
    bounds = np.cumsum([0.0] + [d for _, d in schedule.segments])
    out = []
    amps, now, k = state.amplitudes, 0.0, 0
    for t in times:
        while now < t:
            if k >= len(schedule.segments):
                break
            end = min(t, bounds[k + 1])
            chain = schedule.chain.with_couplings(schedule.segments[k][0])
            amps = chain_propagator(chain, end - now) @ amps
            now = end
            if now >= bounds[k + 1]:
                k += 1
        out.append(ChainState(state.n_spins, amps / np.linalg.norm(amps)))
    return times, out
