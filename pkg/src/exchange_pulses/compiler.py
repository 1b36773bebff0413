"""Lower logical single-qubit gates to schedules of constant exchange pulses.

Building blocks, for a pair with fixed omega > 0:

* J = 0 held for t is a z rotation by ``2 omega t``.
* J > 0 held for t rotates by ``2 omega' t`` about an axis tilted by
  ``theta = arctan(2J/omega)`` from z towards x.
* A z pi-pulse followed by a tilted pi-pulse is a y rotation by ``2 theta``;
  the opposite order rotates by ``-2 theta``. Pairs are concatenated to
  reach larger angles.

Arbitrary gates go through a ZYZ Euler decomposition with adjacent z
pulses merged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityExceeded, InvalidArgument, UnsupportedConfiguration
from .linalg import (HADAMARD, SIGMA_X, Y_AXIS, Z_AXIS, fidelity_up_to_phase,
                     rotation, special_unitary, unitarity_error)
from .propagator import Pulse, Schedule, frame_residual, propagate_constant, propagate_schedule
from .spin_model import PairParams

TWO_PI = 2 * math.pi
FOUR_PI = 4 * math.pi
ANGLE_EPS = 1e-14


@dataclass(frozen=True)
class CompileOptions:
    """``j_max=None`` means: the pair's own bound if finite, else ``(sqrt(3)/2) omega``."""

    j_max: float | None = None
    frame_sync: bool = False
    tolerance: float = 1e-9
    max_pairs: int = 3
    strategy: str = "pairs"

    def __post_init__(self):
        if not self.tolerance > 0:
            raise InvalidArgument("tolerance must be > 0")
        if self.max_pairs < 1:
            raise InvalidArgument("max_pairs must be >= 1")
        if self.j_max is not None and not self.j_max > 0:
            raise InvalidArgument("j_max must be > 0")
        if self.strategy not in ("pairs", "sandwich"):
            raise InvalidArgument(f"unknown strategy {self.strategy!r}")


@dataclass(frozen=True)
class EulerAngles:
    """``U = e^{i global_phase} Rz(alpha) Ry(beta) Rz(gamma)``."""

    alpha: float
    beta: float
    gamma: float
    global_phase: float = 0.0

    def unitary(self) -> np.ndarray:
        return (np.exp(1j * self.global_phase) * rotation(Z_AXIS, self.alpha)
                @ rotation(Y_AXIS, self.beta) @ rotation(Z_AXIS, self.gamma))


@dataclass(frozen=True)
class GateSpec:
    """A requested logical operation.

    ``kind`` is one of ``rotation_z``, ``rotation_y``, ``rotation_tilted``,
    ``hadamard``, ``arbitrary``, ``swap``, ``nnor``. ``angle`` and ``theta``
    feed the rotations; ``matrix`` the arbitrary gate; ``J`` the swap.
    """

    kind: str
    angle: float = 0.0
    theta: float = 0.0
    matrix: np.ndarray | None = field(default=None, compare=False)
    J: float | None = None
    options: CompileOptions = CompileOptions()

    KINDS = ("rotation_z", "rotation_y", "rotation_tilted", "hadamard", "arbitrary", "swap", "nnor")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise InvalidArgument(f"unknown gate kind {self.kind!r}")
        if not (math.isfinite(self.angle) and math.isfinite(self.theta)):
            raise InvalidArgument("angles must be finite")
        if self.kind == "arbitrary":
            m = np.asarray(self.matrix, dtype=complex) if self.matrix is not None else None
            if m is None or m.shape != (2, 2) or unitarity_error(m) > 1e-10:
                raise InvalidArgument("arbitrary gate needs a 2x2 unitary (within 1e-10)")
            object.__setattr__(self, "matrix", m)

    def target(self) -> np.ndarray:
        """Logical 2x2 target (not defined for ``nnor``, which acts on four levels)."""
        if self.kind == "rotation_z":
            return rotation(Z_AXIS, self.angle)
        if self.kind == "rotation_y":
            return rotation(Y_AXIS, self.angle)
        if self.kind == "rotation_tilted":
            return rotation((math.sin(self.theta), 0.0, math.cos(self.theta)), self.angle)
        if self.kind == "hadamard":
            return HADAMARD
        if self.kind == "arbitrary":
            return self.matrix
        if self.kind == "swap":
            return SIGMA_X
        raise InvalidArgument("nnor has no single-pair logical target")


@dataclass
class FidelityReport:
    """Achieved vs requested operation.

    ``frame_residual`` is the distance of ``omega * total_duration`` from a
    multiple of 2 pi; ``extras`` holds construction-specific diagnostics.
    """

    fidelity: float
    total_duration: float
    pulse_count: int
    leakage: float = 0.0
    frame_residual: float = 0.0
    converged: bool = True
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("fidelity", "total_duration", "leakage", "frame_residual"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidArgument(f"report field {name} must be finite")
        if self.fidelity > 1 + 1e-12:
            raise InvalidArgument(f"fidelity {self.fidelity!r} exceeds 1")

    @property
    def infidelity(self) -> float:
        return max(0.0, 1.0 - self.fidelity)

    def ok(self, tolerance) -> bool:
        return self.converged and self.fidelity >= 1 - tolerance

    def as_lines(self, omega=None) -> list[str]:
        lines = [
            f"fidelity={self.fidelity!r}",
            f"infidelity={self.infidelity!r}",
            f"total_duration={self.total_duration!r}",
        ]
        if omega:
            lines.append(f"omega_tau={omega * self.total_duration!r}")
        lines += [
            f"pulse_count={self.pulse_count}",
            f"leakage={self.leakage!r}",
            f"frame_residual={self.frame_residual!r}",
            f"converged={str(self.converged).lower()}",
        ]
        lines += [f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}" for k, v in self.extras.items()]
        return lines


def resolve_j_max(params: PairParams, options: CompileOptions) -> float:
    if options.j_max is not None:
        return min(options.j_max, params.j_max)
    if math.isfinite(params.j_max):
        return params.j_max
    return 0.5 * math.sqrt(3) * abs(params.omega)


def _require_positive_omega(params):
    if not params.omega > 0:
        raise UnsupportedConfiguration(f"compiler requires omega > 0, got {params.omega!r}")


def _bounded(params, j_max):
    return params if params.j_max == j_max else PairParams(params.A, params.B, j_max)


def z_pulse(params: PairParams, angle) -> list:
    """J=0 pulse for ``Rz(angle)``; empty for a zero angle."""
    t = angle / (2 * params.omega)
    return [Pulse(0.0, t)] if t > ANGLE_EPS else []


def tilted_pi_pulse(params: PairParams, theta) -> Pulse:
    """Pi rotation about the axis tilted by ``theta`` (0 <= theta < pi/2)."""
    J = 0.5 * params.omega * math.tan(theta)
    return Pulse(J, math.pi / (2 * params.precession(J)))


def _merge_z(pulses):
    # adjacent J=0 pulses are one z rotation
    out = []
    for p in pulses:
        if out and p.J == 0.0 and out[-1].J == 0.0 and p.shape == out[-1].shape == "square":
            out[-1] = Pulse(0.0, out[-1].duration + p.duration)
        else:
            out.append(p)
    return out


def _reduce_z_durations(params, pulses):
    # z rotations only matter mod 2 pi (global phase); trim merged z pulses
    period = math.pi / params.omega
    out = []
    for p in pulses:
        if p.J == 0.0 and p.shape == "square":
            t = p.duration % period
            if t > ANGLE_EPS and period - t > ANGLE_EPS:
                out.append(Pulse(0.0, t))
        else:
            out.append(p)
    return _merge_z(out)


def compile_rotation_z(params: PairParams, angle) -> Schedule:
    """Single J=0 pulse of length ``psi / (2 omega)``, ``psi`` taken mod 4 pi."""
    _require_positive_omega(params)
    psi = angle % FOUR_PI
    if FOUR_PI - psi < ANGLE_EPS:
        psi = 0.0
    return Schedule(z_pulse(params, psi), params)


def pairs_needed(magnitude, theta_max) -> int:
    if magnitude <= ANGLE_EPS:
        return 0
    if theta_max <= 0:
        raise CapacityExceeded("no tilt available (j_max = 0)", required=None)
    return math.ceil(magnitude / (2 * theta_max) - 1e-12)


def y_pair_pulses(params: PairParams, magnitude, n_pairs, positive=True) -> list:
    """``n_pairs`` equal pairs rotating about +y (or -y) by ``magnitude`` in total."""
    if n_pairs == 0:
        return []
    theta = magnitude / (2 * n_pairs)
    z = z_pulse(params, math.pi)
    tilt = [tilted_pi_pulse(params, theta)]
    pair = z + tilt if positive else tilt + z
    return pair * n_pairs


def compile_rotation_y(params: PairParams, angle, options: CompileOptions = CompileOptions()) -> Schedule:
    """Y rotation from pairs of pi-pulses about z and a tilted axis.

    The angle is reduced mod 2 pi (up to phase) and reached by rotating
    either way about y, whichever is shorter; pairs split the angle equally.

    Raises
    ------
    CapacityExceeded
        If more than ``options.max_pairs`` pairs would be needed; the
        exception carries the minimal pair count in ``required``.
    """
    _require_positive_omega(params)
    j_max = resolve_j_max(params, options)
    bounded = _bounded(params, j_max)
    theta_max = math.atan2(2 * j_max, params.omega)
    phi = angle % TWO_PI
    positive = phi <= math.pi
    magnitude = phi if positive else TWO_PI - phi
    n = pairs_needed(magnitude, theta_max)
    if n > options.max_pairs:
        raise CapacityExceeded(
            f"y rotation by {magnitude:.6g} needs {n} pairs, max_pairs={options.max_pairs}", required=n)
    return Schedule(y_pair_pulses(bounded, magnitude, n, positive), bounded)


def sandwich_pi_x(params: PairParams, theta=math.pi / 4) -> Schedule:
    """Tilted pi, z pi, tilted pi: a pi rotation about an axis at ``2 theta`` from z.

    At ``theta = pi/4`` this is an x-axis pi rotation in
    ``pi (1 + sqrt 2) / (2 omega)`` total time.
    """
    _require_positive_omega(params)
    tilt = tilted_pi_pulse(params, theta)
    return Schedule([tilt] + z_pulse(params, math.pi) + [tilt], params)


def euler_decompose(u) -> EulerAngles:
    """ZYZ angles with ``beta`` in [0, pi] and ``alpha``, ``gamma`` in [0, 2 pi).

    At gimbal lock (beta = 0 or pi) the whole z angle goes into ``alpha``.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or unitarity_error(u) > 1e-10:
        raise InvalidArgument("euler_decompose needs a 2x2 unitary")
    v = special_unitary(u)
    a, b = v[0, 0], v[1, 0]
    beta = 2 * math.atan2(abs(b), abs(a))
    eps = 1e-13
    if abs(b) < eps:
        alpha, gamma = -2 * np.angle(a), 0.0
    elif abs(a) < eps:
        alpha, gamma = 2 * np.angle(b), 0.0
    else:
        s, d = -2 * np.angle(a), 2 * np.angle(b)  # alpha + gamma, alpha - gamma
        alpha, gamma = 0.5 * (s + d), 0.5 * (s - d)
    alpha, gamma = float(alpha) % TWO_PI, float(gamma) % TWO_PI
    if TWO_PI - alpha < 1e-15:
        alpha = 0.0
    if TWO_PI - gamma < 1e-15:
        gamma = 0.0
    bare = EulerAngles(alpha, beta, gamma).unitary()
    phase = float(np.angle(np.vdot(bare, u)))
    return EulerAngles(alpha, beta, gamma, phase)


def compile_unitary(params: PairParams, u, options: CompileOptions = CompileOptions()) -> Schedule:
    """Rz(gamma), then the y pairs, then Rz(alpha), z pulses merged."""
    _require_positive_omega(params)
    e = euler_decompose(u)
    y = compile_rotation_y(params, e.beta, options)
    pulses = z_pulse(params, e.gamma) + list(y.pulses) + z_pulse(params, e.alpha)
    return Schedule(_reduce_z_durations(params, _merge_z(pulses)), y.params)


def compile_hadamard(params: PairParams, options: CompileOptions = CompileOptions()) -> Schedule:
    """One pulse at ``J = omega/2`` (axis at 45 degrees) for ``pi / (2 sqrt2 omega)``."""
    _require_positive_omega(params)
    j_max = resolve_j_max(params, options)
    J = 0.5 * params.omega
    if J > j_max * (1 + 1e-12):
        return compile_unitary(params, HADAMARD, options)
    bounded = _bounded(params, j_max)
    return Schedule([Pulse(J, math.pi / (2 * math.sqrt(2) * params.omega))], bounded)


def compile_rotation_tilted(params, theta, angle, options=CompileOptions()) -> Schedule:
    """Single pulse when the axis is reachable, Euler fallback otherwise."""
    _require_positive_omega(params)
    j_max = resolve_j_max(params, options)
    psi = angle % FOUR_PI
    if 0 <= theta < math.pi / 2:
        J = 0.5 * params.omega * math.tan(theta)
        if J <= j_max * (1 + 1e-12):
            bounded = _bounded(params, j_max)
            t = psi / (2 * bounded.precession(J))
            return Schedule([Pulse(J, t)] if t > ANGLE_EPS else [], bounded)
    axis = (math.sin(theta), 0.0, math.cos(theta))
    return compile_unitary(params, rotation(axis, angle), options)


def compile_swap(params: PairParams, J) -> Schedule:
    """At omega = 0 one pulse of length ``pi / (4 J)`` exchanges |01> and |10>."""
    if params.omega != 0:
        raise UnsupportedConfiguration(f"single-pulse SWAP needs omega = 0, got {params.omega!r}")
    if not J > 0:
        raise InvalidArgument("swap coupling must be > 0")
    params.check_coupling(J)
    return Schedule([Pulse(J, math.pi / (4 * J))], params)


def frame_sync_pad(schedule: Schedule, params: PairParams | None = None,
                   j_max: float | None = None) -> Schedule:
    """Append net-identity 2 pi pulses until ``omega * tau`` is a multiple of 2 pi.

    Each pad pulse is a full 2 pi rotation about a tilted axis (``-I``). The
    deficit ``delta = 2 n pi / omega - tau`` is split into ``m`` equal pads
    of length ``pi / omega'``, with the smallest ``m`` whose ``omega'`` is at
    least ``omega``; ``n`` grows until that ``omega'`` fits under ``j_max``.
    """
    params = schedule.params if params is None else params
    _require_positive_omega(params)
    w = params.omega
    if j_max is None:
        j_max = params.j_max if math.isfinite(params.j_max) else 0.5 * math.sqrt(3) * w
    tau = schedule.total_duration
    turns = w * tau / TWO_PI
    if abs(turns - round(turns)) <= 1e-9 * max(1.0, turns):
        return schedule
    wp_max = math.hypot(w, 2 * j_max)
    n = math.ceil(turns)
    while True:
        delta = n * TWO_PI / w - tau
        if delta > ANGLE_EPS:
            m = max(1, math.ceil(delta * w / math.pi - 1e-12))
            wp = m * math.pi / delta
            if wp <= wp_max * (1 + 1e-12):
                J = min(0.5 * math.sqrt(max(wp * wp - w * w, 0.0)), j_max)
                pad = Pulse(J, delta / m)
                return schedule.then([pad] * m)
        n += 1


def _report_for(schedule, target, options, extras=None):
    u = propagate_schedule(schedule)
    fid = min(1.0, fidelity_up_to_phase(target, u))
    return FidelityReport(
        fidelity=fid,
        total_duration=schedule.total_duration,
        pulse_count=len(schedule),
        frame_residual=frame_residual(schedule.params.omega, schedule.total_duration),
        converged=True,
        extras=extras or {},
    )


def compile_gate(spec: GateSpec, params: PairParams):
    """Compile ``spec`` for ``params``; returns ``(Schedule, FidelityReport)``.

    ``nnor`` acts on two logical qubits and is handled by
    :func:`exchange_pulses.nnor.search_nnor`.
    """
    options = spec.options
    kind = spec.kind
    if kind == "swap":
        J = spec.J if spec.J is not None else (options.j_max or params.j_max)
        schedule = compile_swap(params, J)
        full = propagate_constant(params, J, schedule.total_duration, "full4")
        extras = {"phase00": float(np.angle(full[0, 0])), "phase11": float(np.angle(full[3, 3])),
                  "exchange_amplitude": float(abs(full[1, 2]))}
        return schedule, _report_for(schedule, spec.target(), options, extras)
    if kind == "nnor":
        raise UnsupportedConfiguration("nnor is a two-qubit search; use exchange_pulses.nnor.search_nnor")
    _require_positive_omega(params)
    if kind == "rotation_z":
        schedule = compile_rotation_z(params, spec.angle)
    elif kind == "rotation_y":
        schedule = compile_rotation_y(params, spec.angle, options)
    elif kind == "hadamard":
        schedule = compile_hadamard(params, options)
    elif kind == "rotation_tilted":
        schedule = compile_rotation_tilted(params, spec.theta, spec.angle, options)
    elif kind == "arbitrary":
        schedule = compile_unitary(params, spec.matrix, options)
    if options.frame_sync:
        schedule = frame_sync_pad(schedule, j_max=resolve_j_max(params, options))
    report = _report_for(schedule, spec.target(), options)
    report.converged = report.fidelity >= 1 - options.tolerance
    return schedule, report


def ry_pi_timing(params: PairParams, options: CompileOptions = CompileOptions()) -> dict:
    """Durations of the y pi rotation for both constructions, with the closed forms
    ``pi (1 + sqrt2) / (2 omega)`` (three pulses) and ``pi (2 + sqrt2) / (2 omega)`` (two pairs)."""
    w = params.omega
    pairs = compile_rotation_y(params, math.pi, options)
    sandwich = sandwich_pi_x(params)
    u_pairs = propagate_schedule(pairs)
    u_sand = propagate_schedule(sandwich)
    return {
        "pairs_time": pairs.total_duration,
        "pairs_pulses": len(pairs),
        "pairs_fidelity_ry_pi": fidelity_up_to_phase(rotation(Y_AXIS, math.pi), u_pairs),
        "sandwich_time": sandwich.total_duration,
        "sandwich_fidelity_ry_pi": fidelity_up_to_phase(rotation(Y_AXIS, math.pi), u_sand),
        "sandwich_fidelity_rx_pi": fidelity_up_to_phase(rotation((1.0, 0.0, 0.0), math.pi), u_sand),
        "three_pulse_time": math.pi * (1 + math.sqrt(2)) / (2 * w),
        "two_pair_time": math.pi * (2 + math.sqrt(2)) / (2 * w),
    }
