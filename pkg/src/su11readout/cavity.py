"""Qubit-loaded cavity in reflection as a linear frequency-domain element.

Qubit state |0> is ``qubit_sign = +1`` and pulls the resonance to
``omega_r - chi``; |1> (``-1``) pulls it to ``omega_r + chi``. The Fourier
convention is ``b[w] = (2 pi)^(-1/2) int dt exp(i w t) b(t)``, and time
signals are envelopes in the frame rotating at the probe carrier.
Propagation delays along the lines are dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import minimize_scalar

from ._validation import check_nonnegative, check_positive, check_sign
from .params import PulseSpec, SystemParams


class GridError(ValueError):
    """Frequency or time grid cannot represent the requested signal."""


def shifted_resonance(params: SystemParams, qubit_sign):
    return params.omega_r - check_sign(qubit_sign) * params.chi


def phase_at_detuning(delta_r, qubit_sign, kappa, chi):
    """``phi(w - w_r) = 2 arctan(2 (w - w_r)/kappa + sign * 2 chi / kappa)``.

    Unwrapped: it runs continuously from ``-pi`` to ``pi`` across resonance.
    """
    return 2.0 * np.arctan(2.0 * np.asarray(delta_r, dtype=float) / kappa + qubit_sign * 2.0 * chi / kappa)


def reflection(omega, qubit_sign, params: SystemParams):
    """Reflection coefficient ``(kappa/2 + i d) / (kappa/2 - i d)``, ``d = w - w~_r``."""
    d = np.asarray(omega, dtype=float) - shifted_resonance(params, qubit_sign)
    half = params.kappa / 2.0
    return (half + 1j * d) / (half - 1j * d)


def phase(omega, qubit_sign, params: SystemParams):
    check_sign(qubit_sign)
    return phase_at_detuning(np.asarray(omega, dtype=float) - params.omega_r, qubit_sign,
                             params.kappa, params.chi)


def group_delay(params: SystemParams):
    """``d phi / d omega`` at the bare resonance; the same for both qubit states."""
    x = 2.0 * params.chi / params.kappa
    return 4.0 / (params.kappa * (1.0 + x * x))


def cavity_filter(delta_r, qubit_sign, params: SystemParams):
    """``f(w) = sqrt(kappa) / (kappa/2 - i (w - w~_r))`` with ``delta_r = w - w_r``."""
    d = np.asarray(delta_r, dtype=float) + check_sign(qubit_sign) * params.chi
    return math.sqrt(params.kappa) / (params.kappa / 2.0 - 1j * d)


def steady_state_photons(F_t, params: SystemParams, qubit_sign, omega_c=None):
    """Intracavity photons for a plane-wave drive of flux ``F_t`` (photons/s)."""
    check_nonnegative(F_t, "F_t")
    omega_c = params.omega_r if omega_c is None else omega_c
    d = omega_c - shifted_resonance(params, qubit_sign)
    return params.kappa * F_t / (params.kappa**2 / 4.0 + d**2)


@dataclass(frozen=True)
class CavityOccupation:
    t: np.ndarray
    n_bar: np.ndarray
    n_max: float
    t_max: float
    n_crit_ref: float
    kappa: float

    @property
    def emitted_photons(self):
        """``kappa * int n_bar dt`` on the stored grid."""
        return self.kappa * float(trapezoid(self.n_bar, self.t))


def _spectral_grid(pulse: PulseSpec, params: SystemParams, n_points=None):
    W, kappa = pulse.W, params.kappa
    half_width = max(6.0 * W, 8.0 * kappa)
    if n_points is None:
        # resolve both the envelope and the cavity line, and leave a time
        # period 2 pi / d_omega several pulse+ringdown lengths long
        d_omega = min(W, kappa) / 16.0
        d_omega = min(d_omega, 2 * math.pi / (8.0 * (8.0 / W + 40.0 / kappa)))
        n_points = int(2 ** math.ceil(math.log2(2 * half_width / d_omega)))
        n_points = min(max(n_points, 2**12), 2**18)
    delta = np.linspace(-half_width, half_width, n_points + 1)
    return delta, delta[1] - delta[0]


def default_time_grid(pulse: PulseSpec, params: SystemParams, n_t=2001):
    """Time grid covering ``[-(4/W + 8/kappa), 4/W + 8/kappa]`` plus the group delay."""
    span = 4.0 / pulse.W + 8.0 / params.kappa
    return np.linspace(-span, span + 4.0 / params.kappa, n_t)


def _cavity_amplitude(t, pulse, params, qubit_sign, delta, d_omega):
    # <a(t)> per sqrt(photon) by direct quadrature of the inverse transform
    omega_c = pulse.carrier(params)
    spec = cavity_filter(delta + (omega_c - params.omega_r), qubit_sign, params) * pulse.envelope(delta)
    w = np.full(delta.size, d_omega)
    w[0] = w[-1] = d_omega / 2.0
    spec = spec * w / math.sqrt(2.0 * math.pi)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(t.size, dtype=complex)
    for s in range(0, t.size, 512):
        out[s:s + 512] = np.exp(-1j * np.outer(t[s:s + 512], delta)) @ spec
    return out


def pulsed_photons(pulse: PulseSpec, pre_gain, params: SystemParams, qubit_sign, time_grid=None,
                   n_points=None):
    """Instantaneous intracavity photon number for a Gaussian pulse.

    ``n_bar(t) = pre_gain * n_pulse * |FT(f h)(t)|^2`` where ``pre_gain`` is the
    power gain of whatever sits between the source and the cavity.
    """
    check_nonnegative(pre_gain, "pre_gain")
    check_sign(qubit_sign)
    delta, d_omega = _spectral_grid(pulse, params, n_points)
    t = default_time_grid(pulse, params) if time_grid is None else np.asarray(time_grid, dtype=float)
    needed = 4.0 / pulse.W + 8.0 / params.kappa
    if time_grid is not None and (t.min() > -needed or t.max() < needed):
        raise GridError(f"time grid must span at least [-{needed:.3g}, {needed:.3g}] s")
    period = 2.0 * math.pi / d_omega
    if t.max() - t.min() > period / 2.0:
        raise GridError("time grid longer than half the spectral-grid period; results would alias")
    n_cav = pre_gain * pulse.n_pulse
    n_bar = n_cav * np.abs(_cavity_amplitude(t, pulse, params, qubit_sign, delta, d_omega)) ** 2
    k = int(np.argmax(n_bar))
    return CavityOccupation(t=t, n_bar=n_bar, n_max=float(n_bar[k]), t_max=float(t[k]),
                            n_crit_ref=params.n_crit, kappa=params.kappa)


def peak_photon_fraction(pulse: PulseSpec, params: SystemParams, qubit_sign=1, rtol=1e-3):
    """``max_t |FT(f h)|^2``: peak cavity photons per photon arriving at the cavity.

    The spectral grid is doubled until the peak moves by less than ``rtol``
    and the maximum is polished with a bounded scalar search.
    """
    check_positive(rtol, "rtol")
    coarse = default_time_grid(pulse, params, n_t=801)
    delta, d_omega = _spectral_grid(pulse, params)
    prev = None
    for _ in range(4):
        vals = np.abs(_cavity_amplitude(coarse, pulse, params, qubit_sign, delta, d_omega)) ** 2
        k = int(np.argmax(vals))
        lo, hi = coarse[max(k - 1, 0)], coarse[min(k + 1, coarse.size - 1)]

        def neg(tt):
            return -abs(_cavity_amplitude([tt], pulse, params, qubit_sign, delta, d_omega)[0]) ** 2

        res = minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": 1e-6 * (hi - lo)})
        peak = max(-res.fun, vals[k])
        if prev is not None and abs(peak - prev) <= rtol * peak:
            return float(peak)
        prev = peak
        delta, d_omega = _spectral_grid(pulse, params, n_points=2 * (delta.size - 1))
    return float(prev)


def transmitted_envelope(pulse: PulseSpec, params: SystemParams, qubit_sign, t, n_points=None):
    """Reflected pulse envelope ``FT^-1[r(w) alpha(w)](t)`` (s^-1/2) in the carrier frame."""
    delta, d_omega = _spectral_grid(pulse, params, n_points)
    omega_c = pulse.carrier(params)
    r = reflection(omega_c + delta, qubit_sign, params)
    spec = r * pulse.amplitude(delta) * d_omega / math.sqrt(2.0 * math.pi)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return np.exp(-1j * np.outer(t, delta)) @ spec


def incident_envelope(pulse: PulseSpec, t):
    """Analytic envelope of the incoming pulse in time (``|.|^2`` integrates to n_pulse)."""
    t = np.asarray(t, dtype=float)
    W = pulse.W
    # FT of a Gaussian: (W / sqrt 2) exp(-W^2 t^2 / 4) times the spectral prefactor
    pref = math.sqrt(pulse.n_pulse) / ((2 * math.pi) ** 0.25 * math.sqrt(W / 2.0))
    return pref * (W / math.sqrt(2.0)) * np.exp(-(W**2) * t**2 / 4.0)
