"""Small argument checks shared by the physics modules and the estimator."""

import math

import numpy as np


def check_positive(value, name):
    if not np.all(np.isfinite(value)) or np.any(np.asarray(value) <= 0):
        raise ValueError(f"{name} must be finite and > 0, got {value!r}")
    return value


def check_nonnegative(value, name):
    if not np.all(np.isfinite(value)) or np.any(np.asarray(value) < 0):
        raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
    return value


def check_gain(gain, name="gain"):
    """Power gains of amplifiers are >= 1 (no attenuators in the chain)."""
    # imported lazily: params imports this module
    from .params import DomainError

    gain = float(gain)
    if not math.isfinite(gain) or gain < 1.0:
        raise DomainError(f"{name} must be a finite power gain >= 1, got {gain!r}")
    return gain


def check_efficiency(eta):
    eta = float(eta)
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"efficiency eta must lie in (0, 1], got {eta!r}")
    return eta


def check_sign(sign):
    if sign not in (1, -1):
        raise ValueError(f"qubit_sign must be +1 (state |0>) or -1 (state |1>), got {sign!r}")
    return sign


def check_grid(values, name="grid"):
    """1-D, nonempty, finite grid of sweep values."""
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-D sequence")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr
