"""Exit criteria, one test per criterion; each records a PASS/FAIL line for the summary."""
import math

import numpy as np
import pytest

from exchange_pulses.chain import (ChainSchedule, ChainState, chain_trajectory, chain_unitary, logical_extract,
                                   magnetization_spectrum, pair_populations, propagate_chain)
from exchange_pulses.compiler import (CompileOptions, GateSpec, compile_gate, frame_sync_pad, ry_pi_timing,
                                      tilted_pi_pulse, z_pulse)
from exchange_pulses.linalg import (HADAMARD, Y_AXIS, axis_angle_from_unitary, expm_hermitian,
                                    fidelity_up_to_phase, rotation)
from exchange_pulses.nnor import SearchConfig, basa_chain, search_nnor, verify_nnor_semantics
from exchange_pulses.propagator import (Pulse, Schedule, propagate_constant, propagate_pulse,
                                        propagate_schedule, propagate_waveform)
from exchange_pulses.spin_model import PairParams, abab_chain, pair_hamiltonian

from conftest import haar_unitary

pytestmark = pytest.mark.acceptance


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture(scope="module")
def nnor_result():
    return search_nnor(PairParams.from_omega(1.0), SearchConfig(n_pulses=2, rng_seed=7))


def test_c01_oracle_equivalence(record, rng):
    worst = 0.0
    for _ in range(1000):
        A, B = rng.uniform(-5, 5, 2)
        J, t = rng.uniform(0, 3), rng.uniform(0, 10)
        p = PairParams(A, B)
        worst = max(worst, np.max(np.abs(propagate_constant(p, J, t, "full4")
                                         - expm_hermitian(pair_hamiltonian(p, J), t))))
    assert record(1, "analytic propagator vs eigendecomposition (1000 draws)", worst <= 1e-11,
                  f"max |dU| = {worst:.2e}")


def test_c02_axis_rate_law(record, rng):
    worst_axis = worst_angle = 0.0
    for _ in range(500):
        p = PairParams.from_omega(rng.uniform(0.1, 3))
        J = rng.uniform(0, 3)
        wp = p.precession(J)
        # angle 2 w' t drawn over a full spinor period, away from the two points where the axis is undefined
        psi = rng.uniform(1e-3, 4 * math.pi - 1e-3)
        if abs(psi - 2 * math.pi) < 1e-3:
            psi += 2e-3
        t = psi / (2 * wp)
        aa = axis_angle_from_unitary(propagate_constant(p, J, t))
        theta = math.atan(2 * J / p.omega)
        axis = np.array([math.sin(theta), 0.0, math.cos(theta)])
        angle = 2 * wp * t
        if angle > 2 * math.pi:
            axis, angle = -axis, 4 * math.pi - angle
        worst_axis = max(worst_axis, np.max(np.abs(aa.axis - axis)))
        worst_angle = max(worst_angle, abs(aa.angle - angle))
    ok = worst_axis <= 1e-9 and worst_angle <= 1e-9
    assert record(2, "axis at arctan(2J/omega), angle 2 omega' t (500 draws)", ok,
                  f"axis err {worst_axis:.2e}, angle err {worst_angle:.2e}")


def test_c03_hadamard_one_pulse(record):
    p = PairParams.from_omega(1.0)
    schedule, report = compile_gate(GateSpec("hadamard"), p)
    (pulse,) = schedule.pulses
    fid = fidelity_up_to_phase(HADAMARD, propagate_constant(p, 0.5, math.pi / (2 * math.sqrt(2))))
    time_exact = pulse.duration == math.pi / (2 * math.sqrt(2) * p.omega) and pulse.J == 0.5
    # J = 2 omega at the same time misses the gate; reported only
    alt = fidelity_up_to_phase(HADAMARD, propagate_constant(PairParams.from_omega(1.0, j_max=2.0), 2.0,
                                                              math.pi / (2 * math.sqrt(2))))
    ok = 1 - fid <= 1e-12 and 1 - report.fidelity <= 1e-12 and time_exact
    assert record(3, "Hadamard in one pulse (J=0.5, t=pi/(2 sqrt2))", ok,
                  f"1-F = {1 - fid:.1e}; J=2 omega at that time gives F = {alt:.4f} (documented, not asserted)")


def test_c04_pair_identity(record):
    p = PairParams.from_omega(1.0)
    worst = 0.0
    for theta in (math.pi / 12, math.pi / 6, math.pi / 4, math.pi / 3):
        u = propagate_schedule(Schedule([tilted_pi_pulse(p, theta)] + z_pulse(p, math.pi), p))
        aa = axis_angle_from_unitary(u)
        # the product is a rotation by 2 theta about the y line; with these sign conventions it points along -y
        deficit = 1 - fidelity_up_to_phase(rotation((0, -1, 0), 2 * theta), u)
        assert abs(aa.axis[0]) <= 1e-12 and abs(aa.axis[2]) <= 1e-12
        worst = max(worst, deficit)
    assert record(4, "tilted pi then z pi is a y rotation by 2 theta", worst <= 1e-10,
                  f"max deficit {worst:.1e} over 4 angles")


def test_c05_universal_compiler(record, rng):
    p = PairParams.from_omega(1.0, j_max=math.sqrt(3) / 2)
    most, worst = 0, 0.0
    for _ in range(200):
        u = haar_unitary(rng)
        schedule, report = compile_gate(GateSpec("arbitrary", matrix=u), p)
        fid = fidelity_up_to_phase(u, propagate_schedule(schedule))
        most = max(most, len(schedule))
        worst = max(worst, 1 - fid)
    ok = most <= 7 and worst <= 1e-9
    assert record(5, "200 random SU(2) targets", ok, f"max pulses {most}, max 1-F {worst:.1e}")


def test_c06_frame_sync(record, rng):
    p = PairParams.from_omega(1.0)
    sync_err = passive_def = active_def = 0.0
    opts = CompileOptions(frame_sync=True)
    targets = [HADAMARD, rotation(Y_AXIS, math.pi)] + [haar_unitary(rng) for _ in range(48)]
    for u in targets:
        raw, _ = compile_gate(GateSpec("arbitrary", matrix=u), p)
        padded = frame_sync_pad(raw)
        synced, _ = compile_gate(GateSpec("arbitrary", matrix=u, options=opts), p)
        assert synced.pulses == padded.pulses
        tau = padded.total_duration
        turns = p.omega * tau / (2 * math.pi)
        sync_err = max(sync_err, abs(turns - round(turns)) / max(1.0, turns))
        passive_def = max(passive_def, 1 - fidelity_up_to_phase(np.eye(2), propagate_constant(p, 0.0, tau)))
        active_def = max(active_def, 1 - fidelity_up_to_phase(propagate_schedule(raw), propagate_schedule(padded)))
    ok = sync_err <= 1e-9 and passive_def <= 1e-8 and active_def <= 1e-10
    assert record(6, "frame sync padding (50 gates)", ok,
                  f"omega tau rel err {sync_err:.1e}, passive 1-F {passive_def:.1e}, active 1-F {active_def:.1e}")


def test_c07_nnor_search(record, nnor_result):
    schedule, report = nnor_result
    v = verify_nnor_semantics(schedule, report=report)
    phases = np.round(v.phase_pattern.real).tolist()
    ok = (report.infidelity <= 1e-6 and len(schedule) == 2 and v.passed(1e-5)
          and phases == [-1, 1, 1, 1] and v.offdiag_mass <= 1e-5)
    assert record(7, "nNOR with two pulses (seed 7)", ok,
                  f"1-F {report.infidelity:.1e}, chain 1-F {1 - v.fidelity_relative:.1e}, "
                  f"phases {phases}, offdiag {v.offdiag_mass:.1e}, "
                  f"{report.extras['starts_converged']}/{report.extras['starts']} starts converged")


def test_c08_swap(record):
    worst, products = 0.0, []
    for J in (0.5, 1.0, 2.0, 4.0):
        schedule, _ = compile_gate(GateSpec("swap", J=J), PairParams(1.0, 1.0, j_max=J))
        (pulse,) = schedule.pulses
        full = propagate_schedule(schedule, "full4")
        worst = max(worst, abs(abs(full[1, 2]) - 1), abs(abs(full[2, 1]) - 1))
        assert pulse.duration == math.pi / (4 * J)
        products.append(pulse.duration * J)
    ok = worst <= 1e-12 and max(products) - min(products) <= 1e-15
    assert record(8, "single-pulse SWAP at omega=0, t ~ 1/J", ok, f"max ||<01|U|10>|-1| {worst:.1e}")


def _random_chain_schedule(rng, chain, bonds, segments=8):
    segs = []
    for _ in range(segments):
        c = [0.0] * (chain.n_spins - 1)
        c[rng.choice(bonds)] = rng.uniform(0, 1.5)
        segs.append((tuple(c), rng.uniform(0.05, 3)))
    return ChainSchedule(tuple(segs), chain)


def test_c09_conservation(record, rng, nnor_result):
    p = PairParams.from_omega(1.0, j_max=1.5)
    drift = leak = 0.0
    for n in (4, 6):
        chain = abab_chain(p, n)
        for _ in range(50):
            # any bond, including those joining two logical pairs
            v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
            psi = ChainState(n, v / np.linalg.norm(v))
            before = magnetization_spectrum(psi)
            after = magnetization_spectrum(propagate_chain(_random_chain_schedule(rng, chain, range(n - 1)), psi))
            drift = max(drift, max(abs(before[k] - after[k]) for k in before))
            # bonds inside the logical pairs: no pair may leave {|01>, |10>}
            u = chain_unitary(_random_chain_schedule(rng, chain, range(0, n - 1, 2)))
            leak = max(leak, logical_extract(u, list(range(n // 2))).leakage)
    # the one gate that drives a bond between two logical pairs, checked at its end
    nnor, report = nnor_result
    gate_leak = verify_nnor_semantics(nnor, report=report).leakage
    leak = max(leak, gate_leak)
    # mid-gate the inter-pair bond does move population through |00>, |11> (reported, physical)
    cs = ChainSchedule.from_schedule(nnor, basa_chain(nnor.params), 1)
    _, states = chain_trajectory(cs, ChainState.basis("0101"), samples=200)
    mid = max(pair_populations(st, 0)["00"] for st in states)
    ok = drift <= 1e-11 and leak <= 1e-12
    assert record(9, "sector masses conserved; pair leakage", ok,
                  f"drift {drift:.1e}, leakage {leak:.1e} (nNOR end {gate_leak:.1e}; peak mid-gate p00 {mid:.2f})")


def test_c10_waveform_integrator(record):
    p = PairParams.from_omega(1.0, j_max=1.0)
    ref = propagate_constant(p, 0.5, 3.0)
    errs = [np.max(np.abs(propagate_waveform(p, lambda t: 0.5 + 0 * t, 3.0, n) - ref)) for n in (32, 64, 128, 256)]
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    near0 = PairParams.from_omega(1e-4, j_max=10.0)
    peak = math.pi / (2 * Pulse.gaussian(1.0, 1.0).area())
    g = Pulse.gaussian(peak, 1.0)
    fid = fidelity_up_to_phase(propagate_pulse(near0, g, steps=4096),
                               propagate_constant(near0, peak, g.area() / peak))
    ok = all(abs(r - 4) <= 0.5 for r in ratios) and fid >= 1 - 1e-6
    assert record(10, "second-order integrator; Gaussian equals square at omega->0", ok,
                  f"ratios {', '.join(f'{r:.3f}' for r in ratios)}, 1-F {1 - fid:.1e}")


def test_c11_timing_report(record):
    p = PairParams.from_omega(1.0)
    timing = ry_pi_timing(p)
    schedule, report = compile_gate(GateSpec("rotation_y", angle=math.pi), p)
    own = math.fsum(pulse.duration for pulse in schedule.pulses)
    ok = report.total_duration == own == schedule.total_duration and timing["pairs_time"] == own
    three_pulse = math.pi * (1 + math.sqrt(2)) / 2
    two_pair = math.pi * (2 + math.sqrt(2)) / 2
    assert record(11, "R_y(pi) timing (report only)", ok,
                  f"compiled {own:.6f} ({len(schedule)} pulses), three-pulse form {three_pulse:.6f}, two-pair {two_pair:.6f}, "
                  f"3-pulse sandwich {timing['sandwich_time']:.6f} is R_x(pi)")
