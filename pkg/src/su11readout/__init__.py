"""Signal, noise and error probability of dispersive qubit readout with
parametric-amplifier interferometers.

Submodules: :mod:`params` (units and device constants), :mod:`singlemode`
(closed-form SNRs), :mod:`cavity` (cavity response and photon number),
:mod:`multimode` (Gaussian propagation on a frequency grid),
:mod:`homodyne` (windowed detection), :mod:`scenarios` (schemes, photon cap,
sweeps) and :mod:`cli`.
"""

from .estimator import ReadoutSimulator
from .params import AmplifierSpec, DomainError, PulseSpec, SystemParams, reference_system
from .scenarios import ConstraintSpec, InfeasibleError, optimize_n_pulse, simulate, solve_g1
from .singlemode import SchemeKind, scheme_snr

__version__ = "0.1.0"

__all__ = [
    "AmplifierSpec",
    "ConstraintSpec",
    "DomainError",
    "InfeasibleError",
    "PulseSpec",
    "ReadoutSimulator",
    "SchemeKind",
    "SystemParams",
    "optimize_n_pulse",
    "reference_system",
    "scheme_snr",
    "simulate",
    "solve_g1",
]
