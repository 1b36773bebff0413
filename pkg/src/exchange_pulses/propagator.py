"""Unitaries generated by constant and shaped exchange pulses on one pair.

Schedules are applied left to right in time, so the propagator of
``[p1, p2, p3]`` is ``U3 @ U2 @ U1``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .linalg import bloch_vector
from .spin_model import PairParams, diagonalizer

log = logging.getLogger(__name__)

SUBSPACES = ("logical2", "full4")
DEFAULT_STEPS = 512
DEFAULT_SAMPLES = 256
FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))


@dataclass(frozen=True)
class Pulse:
    """One exchange pulse.

    For ``shape == "square"`` ``J`` is held for ``duration``. For
    ``"gaussian"`` ``J`` is the peak, centred in a window of length
    ``duration`` (truncation half-width ``duration / 2``).
    """

    J: float
    duration: float
    shape: str = "square"
    fwhm: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.J) and self.J >= 0):
            raise InvalidArgument(f"pulse J must be finite and >= 0, got {self.J!r}")
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise InvalidArgument(f"pulse duration must be > 0, got {self.duration!r}")
        if self.shape == "square":
            if self.fwhm is not None:
                raise InvalidArgument("square pulses take no fwhm")
        elif self.shape == "gaussian":
            if self.fwhm is None or not self.fwhm > 0:
                raise InvalidArgument("gaussian pulses need fwhm > 0")
            if self.truncation < 2 * self.fwhm * (1 - 1e-12):
                raise InvalidArgument("gaussian truncation half-width must be >= 2 * fwhm")
        else:
            raise InvalidArgument(f"unknown pulse shape {self.shape!r}")

    @classmethod
    def gaussian(cls, peak, fwhm, truncation=None):
        truncation = 3.0 * fwhm if truncation is None else truncation
        return cls(peak, 2.0 * truncation, "gaussian", fwhm)

    @property
    def truncation(self) -> float:
        return 0.5 * self.duration

    def coupling(self, t):
        """J at time ``t`` measured from the pulse start."""
        t = np.asarray(t, dtype=float)
        if self.shape == "square":
            return np.full_like(t, self.J)
        x = (t - self.truncation) / self.fwhm
        return self.J * np.exp(-4.0 * math.log(2.0) * x * x)

    def area(self) -> float:
        """Integral of J over the pulse window."""
        if self.shape == "square":
            return self.J * self.duration
        sigma = self.fwhm * FWHM_TO_SIGMA
        return self.J * sigma * math.sqrt(2 * math.pi) * math.erf(self.truncation / (sigma * math.sqrt(2)))

    def tail_area(self) -> float:
        """Area of the Gaussian lost to truncation (zero for square pulses)."""
        if self.shape == "square":
            return 0.0
        sigma = self.fwhm * FWHM_TO_SIGMA
        return self.J * sigma * math.sqrt(2 * math.pi) * math.erfc(self.truncation / (sigma * math.sqrt(2)))


@dataclass(frozen=True)
class Schedule:
    pulses: tuple
    params: PairParams

    def __post_init__(self):
        pulses = tuple(self.pulses)
        for p in pulses:
            if not isinstance(p, Pulse):
                raise InvalidArgument(f"schedule entries must be Pulse, got {type(p).__name__}")
            self.params.check_coupling(p.J)
        object.__setattr__(self, "pulses", pulses)

    def __len__(self):
        return len(self.pulses)

    def __iter__(self):
        return iter(self.pulses)

    @property
    def total_duration(self) -> float:
        return math.fsum(p.duration for p in self.pulses)

    def then(self, other) -> "Schedule":
        """Concatenate: ``self`` first, then ``other`` (a Schedule or pulses)."""
        extra = other.pulses if isinstance(other, Schedule) else tuple(other)
        return Schedule(self.pulses + tuple(extra), self.params)


def frame_residual(omega, tau) -> float:
    """Distance of ``omega * tau`` from the nearest multiple of 2 pi."""
    r = (omega * tau) % (2 * math.pi)
    return min(r, 2 * math.pi - r)


def embed_full(logical, phase00, phase11) -> np.ndarray:
    """4x4 unitary with ``logical`` on {|01>,|10>} and phases on |00>, |11>."""
    u = np.zeros((4, 4), dtype=complex)
    u[0, 0] = phase00
    u[1:3, 1:3] = logical
    u[3, 3] = phase11
    return u


def _check_subspace(subspace):
    if subspace not in SUBSPACES:
        raise InvalidArgument(f"subspace must be one of {SUBSPACES}, got {subspace!r}")


def propagate_constant(params: PairParams, J, t, subspace="logical2") -> np.ndarray:
    """Closed-form ``exp(-i H t)`` for constant J: ``R^dag diag(e^{-i w' t}, e^{i w' t}) R``."""
    _check_subspace(subspace)
    if t < 0 or not math.isfinite(t):
        raise InvalidArgument(f"t must be finite and >= 0, got {t!r}")
    params.check_coupling(J)
    if t == 0:
        return np.eye(2 if subspace == "logical2" else 4, dtype=complex)
    wp = params.precession(J)
    r = diagonalizer(params, J)
    phases = np.array([np.exp(-1j * wp * t), np.exp(1j * wp * t)])
    logical = r.T @ (phases[:, None] * r)
    if subspace == "logical2":
        return logical
    K = 2.0 * J
    W = params.Omega
    return embed_full(logical, np.exp(-1j * (-W + K) * t), np.exp(-1j * (W + K) * t))


def _waveform_samples(params, J_of_t, t_total, steps):
    dt = t_total / steps
    mids = (np.arange(steps) + 0.5) * dt
    if callable(J_of_t):
        js = np.asarray(J_of_t(mids), dtype=float)
        if js.shape == ():
            js = np.full(steps, float(js))
    else:
        js = np.asarray(J_of_t, dtype=float)
        if js.shape != (steps,):
            raise InvalidArgument(f"sampled waveform needs {steps} midpoint values, got {js.shape}")
    if js.size and (js.min() < -1e-12 or js.max() > params.j_max * (1 + 1e-12) + 1e-12):
        raise InvalidArgument("waveform values must lie in [0, j_max]")
    return js, dt


def propagate_waveform(params: PairParams, J_of_t, t_total, steps=DEFAULT_STEPS,
                       subspace="logical2", method="split") -> np.ndarray:
    """Time-ordered propagator for a time-dependent coupling ``J(t)``.

    Midpoint product ``prod_k exp(-i H(J(t_k + dt/2)) dt)``, second order in
    ``dt``. With ``method="split"`` (default) each factor is itself Strang
    split into Zeeman half-steps around the exchange step, so every factor
    is closed form and even a constant waveform shows the second-order
    error; ``method="exact"`` exponentiates each midpoint Hamiltonian
    exactly.

    ``J_of_t`` is a callable of time, or an array of the ``steps`` midpoint
    samples.
    """
    _check_subspace(subspace)
    if int(steps) != steps or steps < 16:
        raise InvalidArgument(f"steps must be an integer >= 16, got {steps!r}")
    if not (t_total >= 0 and math.isfinite(t_total)):
        raise InvalidArgument("t_total must be finite and >= 0")
    steps = int(steps)
    js, dt = _waveform_samples(params, J_of_t, t_total, steps)
    w = params.omega
    u = np.eye(2, dtype=complex)
    if method == "split":
        zh = np.array([np.exp(-0.5j * w * dt), np.exp(0.5j * w * dt)])
        for J in js:
            a = 2.0 * J * dt
            c, s = math.cos(a), math.sin(a)
            x = np.array([[c, -1j * s], [-1j * s, c]])
            u = (zh[:, None] * x * zh[None, :]) @ u
    elif method == "exact":
        for J in js:
            u = propagate_constant(params, J, dt) @ u
    else:
        raise InvalidArgument(f"unknown method {method!r}")
    if subspace == "logical2":
        return u
    # |00>, |11> are eigenstates for every J: their phases integrate exactly
    k_area = 2.0 * math.fsum(js) * dt
    W = params.Omega
    return embed_full(u, np.exp(-1j * (-W * t_total + k_area)), np.exp(-1j * (W * t_total + k_area)))


def propagate_pulse(params, pulse: Pulse, subspace="logical2", steps=DEFAULT_STEPS,
                    method="split", elapsed=None) -> np.ndarray:
    """Propagator of one pulse, optionally only its first ``elapsed`` time units."""
    t = pulse.duration if elapsed is None else elapsed
    if pulse.shape == "square":
        return propagate_constant(params, pulse.J, t, subspace)
    n = steps if elapsed is None else max(16, math.ceil(steps * t / pulse.duration))
    return propagate_waveform(params, pulse.coupling, t, n, subspace, method)


def propagate_schedule(schedule: Schedule, subspace="logical2", steps=DEFAULT_STEPS,
                       method="split") -> np.ndarray:
    """``U_n ... U_2 U_1`` for the schedule's pulses; identity when empty."""
    _check_subspace(subspace)
    dim = 2 if subspace == "logical2" else 4
    u = np.eye(dim, dtype=complex)
    for pulse in schedule.pulses:
        if pulse.shape == "gaussian":
            log.info("gaussian pulse peak=%g fwhm=%g: truncated tail area %.3e",
                     pulse.J, pulse.fwhm, pulse.tail_area())
        u = propagate_pulse(schedule.params, pulse, subspace, steps, method) @ u
    return u


def state_trajectory(schedule: Schedule, initial_state, samples=DEFAULT_SAMPLES,
                     subspace="logical2", steps=DEFAULT_STEPS):
    """States at ``samples`` uniform times spanning ``[0, total_duration]``.

    Returns ``(times, states)`` with ``states`` of shape ``(samples, dim)``.
    """
    state = np.asarray(initial_state, dtype=complex)
    dim = 2 if subspace == "logical2" else 4
    if state.shape != (dim,):
        raise InvalidArgument(f"initial state must have shape ({dim},)")
    if abs(np.linalg.norm(state) - 1) > 1e-12:
        raise InvalidArgument("initial state must be normalised")
    if samples < 1:
        raise InvalidArgument("samples must be >= 1")
    total = schedule.total_duration
    times = np.linspace(0.0, total, samples) if samples > 1 else np.array([total])
    starts = np.cumsum([0.0] + [p.duration for p in schedule.pulses])
    out = np.empty((samples, dim), dtype=complex)
    prefix = state
    k = 0
    for n, t in enumerate(times):
        while k < len(schedule.pulses) and t >= starts[k + 1]:
            prefix = propagate_pulse(schedule.params, schedule.pulses[k], subspace, steps) @ prefix
            k += 1
        elapsed = t - starts[k]
        if k == len(schedule.pulses) or elapsed <= 0:
            out[n] = prefix
        else:
            u = propagate_pulse(schedule.params, schedule.pulses[k], subspace, steps, elapsed=elapsed)
            out[n] = u @ prefix
    return times, out


def bloch_trajectory(schedule: Schedule, initial_state, samples=DEFAULT_SAMPLES, steps=DEFAULT_STEPS):
    """List of ``(time, (<sx>, <sy>, <sz>))`` for the logical state."""
    times, states = state_trajectory(schedule, initial_state, samples, "logical2", steps)
    return [(float(t), bloch_vector(s)) for t, s in zip(times, states)]
