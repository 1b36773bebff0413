"""Compile logical gates for an exchange-coupled ABAB spin chain into constant-J pulse schedules."""

from .errors import (CapacityExceeded, DomainViolation, ExchangePulseError, InvalidArgument,
                     NotConverged, SubspaceViolation, UnsupportedConfiguration)
from .linalg import (AxisAngle, axis_angle_from_unitary, expm_hermitian, fidelity_up_to_phase,
                     rotation_operator)
from .spin_model import (ChainParams, PairParams, abab_chain, axis_and_rate, chain_hamiltonian,
                         logical_hamiltonian, pair_hamiltonian)
from .propagator import (Pulse, Schedule, bloch_trajectory, propagate_constant, propagate_schedule,
                         propagate_waveform)
from .compiler import (CompileOptions, EulerAngles, FidelityReport, GateSpec, compile_gate,
                       compile_rotation_y, compile_rotation_z, compile_swap, euler_decompose,
                       frame_sync_pad)
from .chain import (ChainSchedule, ChainState, logical_extract, magnetization_spectrum,
                    propagate_chain)
from .nnor import NnorTarget, SearchConfig, nnor_target, search_nnor, verify_nnor_semantics

__version__ = "0.1.0"
