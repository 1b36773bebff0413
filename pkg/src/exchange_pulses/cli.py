"""Command-line entry point: ``exchange-pulses {compile,simulate,search-nnor,trajectory}``.

Reports are printed as ``key=value`` lines. Exit codes: 0 success,
1 usage or parse error, 2 not converged / fidelity below tolerance.
"""
from __future__ import annotations

import argparse
import ast
import json
import logging
import math
import operator
import re
import sys

import numpy as np

from . import compiler
from .chain import (ChainSchedule, ChainState, chain_trajectory, chain_unitary, logical_extract,
                    pair_logical_density, pair_populations)
from .compiler import CompileOptions, FidelityReport, GateSpec
from .errors import CapacityExceeded, ExchangePulseError, InvalidArgument
from .linalg import SIGMA_X, bloch_vector, fidelity_up_to_phase
from .nnor import (SearchConfig, nnor_frame_sync, nnor_schedule_fidelity, search_nnor,
                   verify_nnor_semantics)
from .propagator import DEFAULT_SAMPLES, DEFAULT_STEPS, frame_residual, propagate_schedule, state_trajectory
from .schedule_io import ScheduleFile, read_schedule, write_schedule, write_trajectory_csv
from .spin_model import PairParams, abab_chain

EXIT_OK, EXIT_USAGE, EXIT_NOT_CONVERGED = 0, 1, 2
INITIAL_STATES = {
    "0": (1, 0),
    "1": (0, 1),
    "+": (1 / math.sqrt(2), 1 / math.sqrt(2)),
    "-": (1 / math.sqrt(2), -1 / math.sqrt(2)),
    "+i": (1 / math.sqrt(2), 1j / math.sqrt(2)),
    "-i": (1 / math.sqrt(2), -1j / math.sqrt(2)),
}

log = logging.getLogger("exchange_pulses")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def parse_angle(text: str) -> float:
    """Numbers with optional ``pi``: ``1.2``, ``pi/2``, ``3pi/4``, ``-2*pi/3``."""
    src = text.strip().replace("π", "pi")
    src = re.sub(r"(\d)\s*pi", r"\1*pi", src)

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError(text)

    try:
        value = ev(ast.parse(src, mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse angle {text!r}") from None
    if not math.isfinite(value):
        raise UsageError(f"angle {text!r} is not finite")
    return value


def load_matrix(path) -> np.ndarray:
    """2x2 complex matrix from JSON: entries as numbers, ``[re, im]`` or ``"a+bj"`` strings."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read matrix file {path!r}: {exc}") from None
    if isinstance(data, dict):
        data = data.get("matrix")

    def entry(v):
        if isinstance(v, str):
            return complex(v.replace(" ", ""))
        if isinstance(v, list) and len(v) == 2:
            return complex(v[0], v[1])
        return complex(v)

    try:
        m = np.array([[entry(v) for v in row] for row in data], dtype=complex)
    except (TypeError, ValueError):
        raise UsageError(f"matrix file {path!r}: entries must be numbers, [re, im] or complex strings") from None
    if m.shape != (2, 2):
        raise UsageError(f"matrix file {path!r}: expected 2x2, got {m.shape}")
    return m


def _common(parser):
    parser.add_argument("--omega", type=float, default=1.0, help="omega = (A-B)/2 (default 1)")
    parser.add_argument("--omega-large", type=float, default=None, help="Omega = (A+B)/2 (default 0)")
    parser.add_argument("--j-max", type=float, default=None, help="coupling bound (default sqrt(3)/2 * omega)")
    parser.add_argument("--tolerance", type=float, default=None)
    parser.add_argument("--out", default=None)
    parser.add_argument("--rng-seed", type=int, default=0)
    parser.add_argument("--frame-sync", action=argparse.BooleanOptionalAction, default=False)
    parser.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="exchange-pulses", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compile", help="compile a gate to a schedule file")
    p.add_argument("gate", help="h | rz:ANGLE | ry:ANGLE | u:MATRIX.json | swap | nnor")
    p.add_argument("--j", type=float, default=None, help="swap coupling")
    p.add_argument("--max-pairs", type=int, default=3)
    p.add_argument("--seeds", type=int, default=64, help="nnor search starts")
    _common(p)

    p = sub.add_parser("simulate", help="propagate a schedule file and report fidelity")
    p.add_argument("schedule")
    p.add_argument("--target", default=None, help="target label (default: the file's)")
    p.add_argument("--chain", type=int, default=None, help="simulate on an N-spin chain")
    p.add_argument("--bond", type=int, default=0)
    p.add_argument("--steps", type=int, default=DEFAULT_STEPS)
    p.add_argument("--trajectory", default=None, help="write trajectory CSV here")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--initial", default="0", choices=sorted(INITIAL_STATES))
    _common(p)

    p = sub.add_parser("search-nnor", help="search a pulse sequence for the nNOR gate")
    p.add_argument("--pulses", type=int, default=2)
    p.add_argument("--seeds", type=int, default=64)
    _common(p)

    p = sub.add_parser("trajectory", help="write the logical Bloch trajectory as CSV")
    p.add_argument("schedule")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--steps", type=int, default=DEFAULT_STEPS)
    p.add_argument("--initial", default="0", choices=sorted(INITIAL_STATES))
    _common(p)
    return parser


def _params(args) -> PairParams:
    j_max = args.j_max if args.j_max is not None else 0.5 * math.sqrt(3) * abs(args.omega)
    return PairParams.from_omega(args.omega, args.omega_large or 0.0, j_max)


def _emit(report: FidelityReport, omega, out=None, extra=()):
    out = sys.stdout if out is None else out
    for line in list(extra) + report.as_lines(omega):
        print(line, file=out)


def _finish(report, tolerance):
    return EXIT_OK if report.ok(tolerance) else EXIT_NOT_CONVERGED


def _write(args, sfile: ScheduleFile):
    if args.out:
        write_schedule(args.out, sfile)
        return [f"schedule_file={args.out}"]
    return ["schedule=" + json.dumps(json.loads(sfile.dumps()), separators=(",", ":"))]


def _run_search(args, params, n_pulses, seeds, tolerance):
    config = SearchConfig(n_pulses=n_pulses, seeds=seeds, rng_seed=args.rng_seed, tolerance=tolerance)
    schedule, report = search_nnor(params, config)
    if args.frame_sync:
        schedule = nnor_frame_sync(schedule)
        report.total_duration = schedule.total_duration
        report.pulse_count = len(schedule)
        report.frame_residual = frame_residual(params.omega, schedule.total_duration)
    sfile = ScheduleFile.from_schedule(schedule, "nnor", args.frame_sync, j_max=params.j_max)
    return sfile, report


def cmd_compile(args) -> int:
    params = _params(args)
    gate = args.gate
    if gate == "nnor":
        tol = args.tolerance if args.tolerance is not None else 1e-6
        sfile, report = _run_search(args, params, 2, args.seeds, tol)
        _emit(report, params.omega, extra=_write(args, sfile))
        return _finish(report, tol)

    tol = args.tolerance if args.tolerance is not None else 1e-9
    if gate == "swap":
        J = args.j if args.j is not None else (args.j_max or 1.0)
        j_max = args.j_max if args.j_max is not None else J
        params = PairParams.from_omega(args.omega, args.omega_large or 0.0, j_max)
        spec = GateSpec("swap", J=J, options=CompileOptions(j_max=j_max, tolerance=tol))
    else:
        options = CompileOptions(j_max=params.j_max, frame_sync=args.frame_sync, tolerance=tol,
                                 max_pairs=args.max_pairs)
        if gate in ("h", "hadamard"):
            spec = GateSpec("hadamard", options=options)
        elif gate.startswith("rz:"):
            spec = GateSpec("rotation_z", angle=parse_angle(gate[3:]), options=options)
        elif gate.startswith("ry:"):
            spec = GateSpec("rotation_y", angle=parse_angle(gate[3:]), options=options)
        elif gate.startswith("u:"):
            spec = GateSpec("arbitrary", matrix=load_matrix(gate[2:]), options=options)
        else:
            raise UsageError(f"unknown gate {gate!r}; expected h, rz:ANGLE, ry:ANGLE, u:FILE, swap or nnor")
    try:
        schedule, report = compiler.compile_gate(spec, params)
    except CapacityExceeded as exc:
        print(f"error={exc}", file=sys.stderr)
        if exc.required is not None:
            print(f"required_pairs={exc.required}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    target = "identity" if not schedule.pulses else gate
    sfile = ScheduleFile.from_schedule(schedule, target, args.frame_sync and spec.kind != "swap",
                                       j_max=params.j_max)
    _emit(report, params.omega, extra=_write(args, sfile))
    return _finish(report, tol)


def resolve_target(label: str):
    """Logical 2x2 target for a label, or the string ``"nnor"``."""
    if label in ("identity", "i"):
        return np.eye(2, dtype=complex)
    if label in ("h", "hadamard"):
        return GateSpec("hadamard").target()
    if label.startswith("rz:"):
        return GateSpec("rotation_z", angle=parse_angle(label[3:])).target()
    if label.startswith("ry:"):
        return GateSpec("rotation_y", angle=parse_angle(label[3:])).target()
    if label.startswith("u:"):
        return load_matrix(label[2:])
    if label == "swap":
        return SIGMA_X
    if label == "nnor":
        return "nnor"
    raise UsageError(f"unknown target {label!r}")


def _load(path) -> ScheduleFile:
    try:
        return read_schedule(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path!r}: {exc.strerror}") from None


def _pair_trajectory_rows(schedule, initial, samples, steps, omega):
    times, states = state_trajectory(schedule, np.asarray(initial, dtype=complex), samples, "logical2", steps)
    scale = omega if omega else 1.0
    # logical propagation never populates |00> or |11>
    return [(t * scale, *bloch_vector(s), 0.0, 0.0) for t, s in zip(times, states)]


def _chain_trajectory_rows(cs, state, pair, samples, omega):
    times, states = chain_trajectory(cs, state, samples)
    scale = omega if omega else 1.0
    rows = []
    for t, s in zip(times, states):
        pops = pair_populations(s, pair)
        rows.append((t * scale, *bloch_vector(pair_logical_density(s, pair)), pops["00"], pops["11"]))
    return rows


def cmd_simulate(args) -> int:
    sfile = _load(args.schedule)
    schedule = sfile.to_schedule()
    params = schedule.params
    tol = args.tolerance if args.tolerance is not None else (1e-6 if sfile.target == "nnor" else 1e-9)
    target = resolve_target(args.target or sfile.target)
    initial = INITIAL_STATES[args.initial]
    tau = schedule.total_duration
    extra = [f"target={args.target or sfile.target}"]
    rows = None

    if args.chain is None:
        if isinstance(target, str):
            fid = nnor_schedule_fidelity(schedule)
        else:
            fid = fidelity_up_to_phase(target, propagate_schedule(schedule, steps=args.steps))
        leakage = 0.0
        if args.trajectory:
            rows = _pair_trajectory_rows(schedule, initial, args.samples, args.steps, params.omega)
    else:
        n = args.chain
        if n < 2 or not 0 <= args.bond < n - 1:
            raise UsageError(f"--bond {args.bond} not valid for a {n}-spin chain")
        if isinstance(target, str):
            if n != 4 or args.bond != 1:
                raise UsageError("nnor chain simulation uses --chain 4 --bond 1")
            v = verify_nnor_semantics(schedule, params)
            fid, leakage = v.fidelity_relative, v.leakage
            extra += [f"fidelity_frame_synced={v.fidelity_absolute!r}", f"offdiag_mass={v.offdiag_mass!r}"]
            chain, pair = None, 0
        else:
            chain = abab_chain(params, n, "even" if args.bond % 2 == 0 else "odd")
            pair = args.bond // 2
            cs = ChainSchedule.from_schedule(schedule, chain, args.bond)
            block = logical_extract(chain_unitary(cs), pair)
            fid, leakage = fidelity_up_to_phase(target, block.matrix), block.leakage
            extra.append(f"spectator_loss={block.spectator_loss!r}")
        if args.trajectory:
            chain = chain or abab_chain(params, n, "even" if args.bond % 2 == 0 else "odd")
            cs = ChainSchedule.from_schedule(schedule, chain, args.bond)
            pairs = [(1, 0)] * (n // 2)
            pairs[pair] = initial
            rows = _chain_trajectory_rows(cs, ChainState.logical(n, pairs), pair, args.samples, params.omega)

    if rows is not None:
        write_trajectory_csv(args.trajectory, rows)
        extra.append(f"trajectory_file={args.trajectory}")
        b = [float(v) for v in rows[-1][1:4]]
        extra.append(f"final_bloch={b[0]!r},{b[1]!r},{b[2]!r}")
    report = FidelityReport(
        fidelity=min(1.0, fid), total_duration=tau, pulse_count=len(schedule), leakage=leakage,
        frame_residual=frame_residual(params.omega, tau) if params.omega else 0.0, converged=True,
        extras={"steps": args.steps} if any(p.shape == "gaussian" for p in schedule.pulses) else {},
    )
    _emit(report, params.omega, extra=extra)
    return _finish(report, tol)


def cmd_search_nnor(args) -> int:
    if args.pulses < 1:
        raise UsageError("--pulses must be >= 1")
    if args.seeds < 1:
        raise UsageError("--seeds must be >= 1")
    params = _params(args)
    tol = args.tolerance if args.tolerance is not None else 1e-6
    sfile, report = _run_search(args, params, args.pulses, args.seeds, tol)
    _emit(report, params.omega, extra=_write(args, sfile))
    return _finish(report, tol)


def cmd_trajectory(args) -> int:
    sfile = _load(args.schedule)
    schedule = sfile.to_schedule()
    if not args.out:
        raise UsageError("trajectory needs --out FILE.csv")
    rows = _pair_trajectory_rows(schedule, INITIAL_STATES[args.initial], args.samples, args.steps,
                                 schedule.params.omega)
    write_trajectory_csv(args.out, rows)
    b = [float(v) for v in rows[-1][1:4]]
    print(f"trajectory_file={args.out}")
    print(f"samples={len(rows)}")
    print(f"final_bloch={b[0]!r},{b[1]!r},{b[2]!r}")
    return EXIT_OK


COMMANDS = {
    "compile": cmd_compile,
    "simulate": cmd_simulate,
    "search-nnor": cmd_search_nnor,
    "trajectory": cmd_trajectory,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvalidArgument, ExchangePulseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
