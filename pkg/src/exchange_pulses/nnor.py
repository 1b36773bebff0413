"""Search for short exchange-pulse sequences realising the nNOR gate.

On the coupled middle pair of a BABA section the gate is
``i * diag(1, 1, -1, 1) * U_0(tau)``, where ``U_0`` is the free (J = 0)
evolution over the schedule's own total duration. Relative to free
evolution this is a phase of -1 on the middle pair's |10>, i.e. on
``|0>_L |0>_L`` of the two outer logical qubits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .chain import ChainSchedule, chain_propagator, chain_unitary, logical_extract
from .compiler import FidelityReport
from .errors import InvalidArgument, NotConverged
from .linalg import fidelity_up_to_phase
from .propagator import Pulse, Schedule, frame_residual, propagate_constant, propagate_schedule
from .spin_model import ChainParams, PairParams, abab_chain

NNOR_PHASES = np.diag([1.0, 1.0, -1.0, 1.0]).astype(complex)
LOGICAL_NNOR = np.diag([-1.0, 1.0, 1.0, 1.0]).astype(complex)
T_MIN = 1e-9


@dataclass(frozen=True)
class NnorTarget:
    tau: float
    target_unitary: np.ndarray = field(compare=False)


def free_evolution(params: PairParams, tau) -> np.ndarray:
    """``U_0(tau)``: the full 4x4 pair propagator with the coupling off."""
    return propagate_constant(params, 0.0, tau, "full4")


def nnor_target(params: PairParams, tau) -> NnorTarget:
    if not (tau > 0 and math.isfinite(tau)):
        raise InvalidArgument(f"tau must be > 0, got {tau!r}")
    return NnorTarget(tau, 1j * NNOR_PHASES @ free_evolution(params, tau))


def nnor_infidelity(params: PairParams, couplings, durations) -> float:
    """``1 - F(U(schedule), target(sum durations))`` on the full 4x4 pair space."""
    u = np.eye(4, dtype=complex)
    for J, t in zip(couplings, durations):
        u = propagate_constant(params, J, t, "full4") @ u
    tau = math.fsum(durations)
    target = 1j * NNOR_PHASES @ free_evolution(params, tau)
    return 1.0 - fidelity_up_to_phase(target, u)


@dataclass(frozen=True)
class SearchConfig:
    """Search bounds and budget.

    ``j_bounds`` / ``t_bounds`` default to ``[0, j_max]`` and
    ``(0, 4 pi / omega]``. ``frame_weight`` scales an optional penalty
    ``sin^2(omega tau / 2)`` pulling the total duration towards frame sync.
    """

    n_pulses: int = 2
    j_bounds: tuple | None = None
    t_bounds: tuple | None = None
    seeds: int = 64
    rng_seed: int = 0
    tolerance: float = 1e-6
    frame_weight: float = 0.0
    max_evals: int = 4000

    def __post_init__(self):
        if int(self.n_pulses) != self.n_pulses or self.n_pulses < 1:
            raise InvalidArgument("n_pulses must be an integer >= 1")
        if self.seeds < 1:
            raise InvalidArgument("seeds must be >= 1")
        if not self.tolerance > 0:
            raise InvalidArgument("tolerance must be > 0")
        for name in ("j_bounds", "t_bounds"):
            b = getattr(self, name)
            if b is not None:
                lo, hi = b
                if not (math.isfinite(lo) and math.isfinite(hi) and 0 <= lo <= hi):
                    raise InvalidArgument(f"{name} must be finite with 0 <= lo <= hi")
        if self.t_bounds is not None and not self.t_bounds[1] > 0:
            raise InvalidArgument("t_max must be > 0")

    def resolved(self, params: PairParams):
        w = abs(params.omega)
        j_max = params.j_max if math.isfinite(params.j_max) else 0.5 * math.sqrt(3) * w
        j_bounds = self.j_bounds if self.j_bounds is not None else (0.0, j_max)
        if self.t_bounds is not None:
            t_bounds = (max(self.t_bounds[0], T_MIN), self.t_bounds[1])
        elif w > 0:
            t_bounds = (T_MIN, 4 * math.pi / w)
        else:
            raise InvalidArgument("t_bounds must be given when omega = 0")
        return j_bounds, t_bounds


def _pad_warm_start(schedule, n_pulses, t_lo):
    pulses = list(schedule.pulses)[:n_pulses]
    while len(pulses) < n_pulses:
        # a trailing free-evolution sliver leaves the nNOR fidelity unchanged
        pulses.append(Pulse(0.0, t_lo))
    return np.array([v for p in pulses for v in (p.J, p.duration)])


def search_nnor(params: PairParams, config: SearchConfig = SearchConfig(), warm_start: Schedule | None = None):
    """Multi-start Nelder-Mead over ``(J_i, t_i)``; returns ``(Schedule, FidelityReport)``.

    Starts are drawn from ``numpy.random.default_rng(config.rng_seed)``; a
    ``warm_start`` schedule (padded with J = 0 slivers if short) is tried
    first. The lowest objective wins, earlier starts winning ties within
    1e-12. Not reaching ``config.tolerance`` is reported through
    ``report.converged``, not raised.
    """
    (j_lo, j_hi), (t_lo, t_hi) = config.resolved(params)
    n = config.n_pulses
    lo = np.array([j_lo, t_lo] * n)
    hi = np.array([j_hi, t_hi] * n)
    free = hi > lo
    w = params.omega

    def unpack(y):
        x = lo.copy()
        x[free] = y
        return x

    def objective(y):
        x = np.clip(unpack(y), lo, hi)
        f = nnor_infidelity(params, x[0::2], x[1::2])
        if config.frame_weight:
            f += config.frame_weight * math.sin(0.5 * w * math.fsum(x[1::2])) ** 2
        return f

    rng = np.random.default_rng(config.rng_seed)
    starts = [rng.uniform(lo, hi) for _ in range(config.seeds)]
    if warm_start is not None:
        starts.insert(0, np.clip(_pad_warm_start(warm_start, n, t_lo), lo, hi))

    best_f, best_x, best_seed, n_conv = math.inf, None, -1, 0
    for k, x0 in enumerate(starts):
        y0 = x0[free]
        if y0.size:
            res = minimize(objective, y0, method="Nelder-Mead", bounds=list(zip(lo[free], hi[free])),
                           options={"xatol": 1e-11, "fatol": 1e-15, "maxfev": config.max_evals,
                                    "adaptive": y0.size > 4})
            f, y = float(res.fun), res.x
            if objective(y0) < f:
                f, y = objective(y0), y0
        else:
            f, y = objective(y0), y0
        if f <= config.tolerance:
            n_conv += 1
        if f < best_f - 1e-12:
            best_f, best_x, best_seed = f, np.clip(unpack(y), lo, hi), k

    pulses = [Pulse(float(J), float(t)) for J, t in zip(best_x[0::2], best_x[1::2])]
    bounded = params if params.j_max >= j_hi else PairParams(params.A, params.B, j_hi)
    schedule = Schedule(pulses, bounded)
    infid = nnor_infidelity(params, best_x[0::2], best_x[1::2])
    tau = schedule.total_duration
    report = FidelityReport(
        fidelity=min(1.0, 1.0 - infid),
        total_duration=tau,
        pulse_count=len(pulses),
        frame_residual=frame_residual(w, tau) if w else 0.0,
        converged=infid <= config.tolerance,
        extras={"best_seed": best_seed, "starts_converged": n_conv, "starts": len(starts)},
    )
    return schedule, report


def nnor_frame_sync(schedule: Schedule) -> Schedule:
    """Append free evolution so ``omega * tau`` is a multiple of 2 pi.

    Free evolution commutes with the nNOR target, so the gate fidelity is
    unchanged while passive logical qubits come back to their start.
    """
    w = schedule.params.omega
    if not w > 0:
        raise InvalidArgument("frame sync needs omega > 0")
    tau = schedule.total_duration
    turns = w * tau / (2 * math.pi)
    if abs(turns - round(turns)) <= 1e-9 * max(1.0, turns):
        return schedule
    return schedule.then([Pulse(0.0, math.ceil(turns) * 2 * math.pi / w - tau)])


@dataclass
class NnorVerification:
    """Logical two-qubit action measured on the full four-spin chain.

    ``relative`` is the logical block of ``U_free^dag U``; ``absolute`` the
    logical block of the frame-synced schedule itself. Both are compared to
    ``diag(-1, 1, 1, 1)`` up to global phase.
    """

    relative: np.ndarray
    absolute: np.ndarray
    fidelity_relative: float
    fidelity_absolute: float
    offdiag_mass: float
    phase_pattern: np.ndarray
    leakage: float
    sync_padding: float

    def passed(self, tolerance) -> bool:
        return (self.fidelity_relative >= 1 - tolerance
                and self.fidelity_absolute >= 1 - tolerance
                and self.offdiag_mass <= tolerance)


def basa_chain(params: PairParams, neighbor_params: PairParams | None = None) -> ChainParams:
    """Four-spin section whose middle bond reproduces ``pair_hamiltonian(params)``.

    ``neighbor_params`` overrides the outer site energies (site 0 takes its
    ``A``, site 3 its ``B``).
    """
    chain = abab_chain(params, 4, logical_bonds="odd")
    if neighbor_params is None:
        return chain
    e = list(chain.site_energies)
    e[0], e[3] = neighbor_params.A, neighbor_params.B
    return ChainParams(4, tuple(e))


def verify_nnor_semantics(schedule: Schedule, params: PairParams | None = None,
                          neighbor_params: PairParams | None = None, *, report=None,
                          tolerance=1e-6) -> NnorVerification:
    """Run the schedule on the middle bond of a four-spin chain and read off the logical gate.

    Raises
    ------
    NotConverged
        If ``report`` says the search that produced ``schedule`` did not converge.
    """
    if report is not None and not report.converged:
        raise NotConverged(
            f"refusing to verify an unconverged schedule (infidelity {report.infidelity:.3e} > tolerance)")
    params = schedule.params if params is None else params
    chain = basa_chain(params, neighbor_params)
    cs = ChainSchedule.from_schedule(schedule, chain, bond=1)
    u = chain_unitary(cs)
    u_free = chain_propagator(chain, cs.total_duration)
    rel = logical_extract(u_free.conj().T @ u, (0, 1))

    synced = nnor_frame_sync(schedule)
    pad = synced.total_duration - schedule.total_duration
    u_abs = chain_unitary(ChainSchedule.from_schedule(synced, chain, bond=1))
    absolute = logical_extract(u_abs, (0, 1))

    m = rel.matrix
    off = m - np.diag(np.diag(m))
    pattern = np.diag(m) / np.diag(m)[1]
    return NnorVerification(
        relative=m,
        absolute=absolute.matrix,
        fidelity_relative=min(1.0, fidelity_up_to_phase(LOGICAL_NNOR, m)),
        fidelity_absolute=min(1.0, fidelity_up_to_phase(LOGICAL_NNOR, absolute.matrix)),
        offdiag_mass=float(np.sum(np.abs(off) ** 2) / 4),
        phase_pattern=pattern,
        leakage=max(rel.leakage, absolute.leakage),
        sync_padding=pad,
    )


def nnor_schedule_fidelity(schedule: Schedule) -> float:
    """Fidelity of a pair schedule against its own moving nNOR target."""
    u = propagate_schedule(schedule, "full4")
    return fidelity_up_to_phase(nnor_target(schedule.params, schedule.total_duration).target_unitary, u)
