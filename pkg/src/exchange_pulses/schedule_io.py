"""JSON schedule files and trajectory CSV output."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

from .errors import InvalidArgument
from .propagator import Pulse, Schedule
from .spin_model import PairParams

FORMAT_VERSION = 1
CSV_HEADER = ("time", "bx", "by", "bz", "p00", "p11")


class ScheduleFileError(InvalidArgument):
    pass


@dataclass
class ScheduleFile:
    omega: float
    j_max: float
    pulses: list = field(default_factory=list)
    target: str = "identity"
    frame_synced: bool = False
    omega_large: float | None = None
    version: int = FORMAT_VERSION

    def validate(self):
        if self.version != FORMAT_VERSION:
            raise ScheduleFileError(f"field 'version': expected {FORMAT_VERSION}, got {self.version!r}")
        for name in ("omega", "j_max"):
            _finite(getattr(self, name), name)
        if self.omega_large is not None:
            _finite(self.omega_large, "omega_large")
        if not isinstance(self.target, str):
            raise ScheduleFileError("field 'target': must be a string")
        if not isinstance(self.frame_synced, bool):
            raise ScheduleFileError("field 'frame_synced': must be a boolean")
        if not isinstance(self.pulses, list):
            raise ScheduleFileError("field 'pulses': must be a list")
        if not self.pulses and self.target != "identity":
            raise ScheduleFileError("field 'pulses': empty, but target is not 'identity'")
        for k, p in enumerate(self.pulses):
            where = f"pulses[{k}]"
            if not isinstance(p, dict):
                raise ScheduleFileError(f"field '{where}': must be an object")
            unknown = set(p) - {"j", "t", "shape", "fwhm"}
            if unknown:
                raise ScheduleFileError(f"field '{where}': unknown keys {sorted(unknown)}")
            for key in ("j", "t"):
                if key not in p:
                    raise ScheduleFileError(f"field '{where}.{key}': missing")
                _finite(p[key], f"{where}.{key}")
            if p["j"] < 0:
                raise ScheduleFileError(f"field '{where}.j': must be >= 0")
            if not p["t"] > 0:
                raise ScheduleFileError(f"field '{where}.t': must be > 0")
            shape = p.get("shape", "square")
            if shape not in ("square", "gaussian"):
                raise ScheduleFileError(f"field '{where}.shape': unknown shape {shape!r}")
            if shape == "gaussian":
                if "fwhm" not in p:
                    raise ScheduleFileError(f"field '{where}.fwhm': required for gaussian pulses")
                _finite(p["fwhm"], f"{where}.fwhm")
            elif "fwhm" in p:
                raise ScheduleFileError(f"field '{where}.fwhm': only valid for gaussian pulses")
        return self

    def params(self) -> PairParams:
        return PairParams.from_omega(self.omega, self.omega_large or 0.0, self.j_max)

    def to_schedule(self) -> Schedule:
        pulses = []
        for k, p in enumerate(self.pulses):
            try:
                pulses.append(Pulse(p["j"], p["t"], p.get("shape", "square"), p.get("fwhm")))
            except InvalidArgument as exc:
                raise ScheduleFileError(f"field 'pulses[{k}]': {exc}") from None
        try:
            return Schedule(pulses, self.params())
        except InvalidArgument as exc:
            raise ScheduleFileError(str(exc)) from None

    @classmethod
    def from_schedule(cls, schedule: Schedule, target="identity", frame_synced=False, j_max=None):
        params = schedule.params
        if j_max is None:
            j_max = params.j_max if math.isfinite(params.j_max) else max([p.J for p in schedule.pulses] + [0.0])
        pulses = []
        for p in schedule.pulses:
            entry = {"j": p.J, "t": p.duration, "shape": p.shape}
            if p.shape == "gaussian":
                entry["fwhm"] = p.fwhm
            pulses.append(entry)
        return cls(omega=params.omega, j_max=j_max, pulses=pulses, target=target,
                   frame_synced=frame_synced, omega_large=params.Omega or None)

    def dumps(self) -> str:
        self.validate()
        data = {"version": self.version, "omega": self.omega}
        if self.omega_large is not None:
            data["omega_large"] = self.omega_large
        data.update(j_max=self.j_max, pulses=self.pulses, target=self.target, frame_synced=self.frame_synced)
        return json.dumps(data, indent=2) + "\n"

    @classmethod
    def loads(cls, text) -> "ScheduleFile":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScheduleFileError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        if not isinstance(data, dict):
            raise ScheduleFileError("top level must be an object")
        known = {"version", "omega", "omega_large", "j_max", "pulses", "target", "frame_synced"}
        unknown = set(data) - known
        if unknown:
            raise ScheduleFileError(f"unknown fields {sorted(unknown)}")
        for key in ("version", "omega", "j_max", "pulses"):
            if key not in data:
                raise ScheduleFileError(f"field '{key}': missing")
        return cls(**data).validate()


def _finite(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ScheduleFileError(f"field '{name}': must be a finite number, got {value!r}")


def write_schedule(path, sfile: ScheduleFile):
    with open(path, "w") as fh:
        fh.write(sfile.dumps())


def read_schedule(path) -> ScheduleFile:
    with open(path) as fh:
        return ScheduleFile.loads(fh.read())


def write_trajectory_csv(path, rows):
    """``rows`` are ``(time, bx, by, bz, p00, p11)`` tuples."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])
