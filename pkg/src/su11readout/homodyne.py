"""Windowed homodyne detection of the amplified pulse and readout error.

The detector integrates the ``p`` quadrature of the output field over a
window of length ``T_m`` centred at ``t0``. In the frequency domain that is
a linear functional with weight ``T_m sinc(T_m d / 2)`` per detuning ``d``
(``sinc(x) = sin(x)/x``); a window offset turns part of that weight onto the
``x`` quadrature. The overall ``1/sqrt(2 pi)`` of the transform is dropped:
it scales signal and noise alike and cancels in the SNR.

Two noise models are offered. The diagonal one sums per-frequency variances
only (treating frequency modes as independent). The full one also keeps the
covariance between ``omega_c + d`` and ``omega_c - d``, which is where the
squeezing of degenerate amplifiers lives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import log_ndtr, ndtr

from ._validation import check_efficiency, check_gain, check_nonnegative, check_positive
from .cavity import GridError
from .multimode import SIGNAL, ChainOutput, GaussianChainState
from .singlemode import UnequalNoiseError


class NoiseConsistencyError(RuntimeError):
    """A computed variance came out negative: the state or grid is inconsistent."""


def _checked(var):
    if not var >= 0.0:
        raise NoiseConsistencyError(f"negative homodyne variance {var:.6g}")
    return var


def _sinc(x):
    return np.sinc(np.asarray(x, dtype=float) / np.pi)


def window_weights(detunings, d_omega, T_m, t0=0.0):
    """Per-mode weights ``(w_x, w_p)`` of the integrated ``p`` quadrature.

    The discrete grid is periodic in time with period ``2 pi / d_omega``;
    windows longer than half of that would fold the pulse back in.
    """
    check_positive(T_m, "T_m")
    if T_m + 2.0 * abs(t0) > math.pi / d_omega:
        raise GridError(f"window of {T_m:.4g} s exceeds half the grid period {2 * math.pi / d_omega:.4g} s; "
                        "use a finer frequency grid")
    d = np.asarray(detunings, dtype=float)
    s = T_m * _sinc(T_m * d / 2.0) * math.sqrt(d_omega)
    return -s * np.sin(d * t0), s * np.cos(d * t0)


def _tail_measure(detunings, d_omega, T_m):
    # int sinc^2(T_m d / 2) dd over the real line minus the part the grid covers
    covered = float(np.sum(_sinc(T_m * np.asarray(detunings) / 2.0) ** 2)) * d_omega
    return max(2.0 * math.pi / T_m - covered, 0.0)


def windowed_signal(mean_p, detunings, d_omega, T_m, G_H=1.0):
    """``T_m sqrt(G_H) sum_j sinc(T_m d_j / 2) <p_j> sqrt(d_omega)`` (window at ``t0 = 0``)."""
    G_H = check_gain(G_H, "G_H")
    _, w_p = window_weights(detunings, d_omega, T_m)
    return math.sqrt(G_H) * float(np.dot(w_p, mean_p))


def windowed_noise(var_p, cross_cov, detunings, d_omega, T_m, G_H=1.0, n_bar_T=0.0,
                   include_hemt=False, include_cross=False, tail=True):
    """Variance of the windowed ``p`` quadrature from per-frequency moments.

    ``T_m^2 G_H sum_j sinc^2 [Var(p_j) + N_H] d_omega`` with
    ``N_H = (1 - 1/G_H)(n_bar_T + 1/2)`` when ``include_hemt``. With
    ``include_cross`` the pair covariances ``Cov(p(w_j), p(2 w_c - w_j))`` are
    added (the carrier has no partner). ``tail`` extends the sum beyond the
    grid with the edge variance.
    """
    G_H = check_gain(G_H, "G_H")
    check_nonnegative(n_bar_T, "n_bar_T")
    d = np.asarray(detunings, dtype=float)
    var_p = np.asarray(var_p, dtype=float)
    added = (1.0 - 1.0 / G_H) * (n_bar_T + 0.5) if include_hemt else 0.0
    s2 = (T_m * _sinc(T_m * d / 2.0)) ** 2 * d_omega
    total = float(np.dot(s2, var_p + added))
    if include_cross:
        c = np.asarray(cross_cov, dtype=float).copy()
        c[np.argmin(np.abs(d))] = 0.0
        s = T_m * _sinc(T_m * d / 2.0)
        total += float(np.dot(s * s[::-1], c)) * d_omega
    if tail:
        edge = 0.5 * (var_p[0] + var_p[-1]) + added
        if include_cross:
            edge += 0.5 * (cross_cov[0] + cross_cov[-1])
        total += T_m**2 * edge * _tail_measure(d, d_omega, T_m)
    return _checked(G_H * total)


def block_weights(state: GaussianChainState, T_m, t0=0.0, arm=SIGNAL):
    """Weights of the homodyne functional laid out like ``state.mean``."""
    grid = state.grid
    n = state.n_modes
    w = np.zeros_like(state.mean)
    ip, im = state.mode_index(arm, 1), state.mode_index(arm, -1)
    wx, wp = window_weights(grid.offsets, grid.d_omega, T_m, t0)
    w[:, ip], w[:, n + ip] = wx, wp
    wx, wp = window_weights(-grid.offsets[1:], grid.d_omega, T_m, t0)
    w[1:, im], w[1:, n + im] = wx, wp
    return w


def homodyne_statistics(state: GaussianChainState, T_m, t0=0.0, include_cross=True, tail=True,
                        arm=SIGNAL):
    """Mean and variance of the windowed homodyne variable for a Gaussian state.

    With ``include_cross=False`` only the diagonal of each block covariance
    enters, matching :func:`windowed_noise` without cross terms.
    """
    w = block_weights(state, T_m, t0, arm)
    mean = float(np.einsum("ka,ka->", w, state.mean))
    if include_cross:
        var = float(np.einsum("ka,kab,kb->", w, state.cov, w))
    else:
        var = float(np.einsum("ka,kaa,ka->", w, state.cov, w))
    if tail:
        n = state.n_modes
        ip, im = state.mode_index(arm, 1), state.mode_index(arm, -1)
        edge = w[-1, [ip, im, n + ip, n + im]]
        norm = float(edge @ edge)
        if norm > 0:
            sub = state.cov[-1][np.ix_([ip, im, n + ip, n + im], [ip, im, n + ip, n + im])]
            if not include_cross:
                sub = np.diag(np.diag(sub))
            edge_var = float(edge @ sub @ edge) / norm
        else:
            edge_var = 0.5 * (state.cov[-1, n + ip, n + ip] + state.cov[-1, n + im, n + im])
        var += T_m**2 * edge_var * _tail_measure(state.grid.detunings, state.grid.d_omega, T_m)
    return mean, _checked(var)


def snr(mean_plus, mean_minus, var_plus, var_minus, rtol=1e-6):
    """``|mu_+ - mu_-| / (2 sigma)``; the two noise levels must agree to ``rtol``."""
    sp, sm = math.sqrt(var_plus), math.sqrt(var_minus)
    if abs(sp - sm) > rtol * max(sp, sm):
        raise UnequalNoiseError(f"noise differs between qubit states: {sp:.9g} vs {sm:.9g}")
    return abs(mean_plus - mean_minus) / (sp + sm)


def p_error(snr_value, eta=1.0):
    """Assignment error ``erfc(sqrt(eta/2) SNR) / 2`` for detection efficiency ``eta``."""
    eta = check_efficiency(eta)
    return ndtr(-math.sqrt(eta) * np.asarray(snr_value, dtype=float))[()]


def log10_p_error(snr_value, eta=1.0):
    """``log10`` of :func:`p_error`, accurate where the error underflows."""
    eta = check_efficiency(eta)
    return (log_ndtr(-math.sqrt(eta) * np.asarray(snr_value, dtype=float)) / math.log(10.0))[()]


@dataclass(frozen=True)
class HomodyneSettings:
    """Detector settings.

    ``t0`` shifts the integration window relative to the pulse centre at
    the source; delays along the lines are not modelled, so the default is 0.
    :func:`cavity.group_delay` gives the offset that follows the pulse
    through the cavity.
    """

    T_m: float
    t0: float = 0.0
    eta: float = 0.5
    include_cross: bool = True
    tail: bool = True

    def __post_init__(self):
        check_positive(self.T_m, "T_m")
        check_efficiency(self.eta)

    def with_T_m(self, T_m):
        return HomodyneSettings(T_m, self.t0, self.eta, self.include_cross, self.tail)


@dataclass(frozen=True)
class ReadoutResult:
    T_m: float
    mean_plus: float
    mean_minus: float
    var_plus: float
    var_minus: float
    eta: float

    @property
    def std_plus(self):
        return math.sqrt(self.var_plus)

    @property
    def std_minus(self):
        return math.sqrt(self.var_minus)

    @property
    def signal(self):
        return abs(self.mean_plus - self.mean_minus)

    @property
    def noise(self):
        return 0.5 * (math.sqrt(self.var_plus) + math.sqrt(self.var_minus))

    @property
    def snr(self):
        return snr(self.mean_plus, self.mean_minus, self.var_plus, self.var_minus)

    @property
    def p_error(self):
        return float(p_error(self.snr, self.eta))

    @property
    def log10_p_error(self):
        return float(log10_p_error(self.snr, self.eta))


def read_out(out_plus: ChainOutput, out_minus: ChainOutput, settings: HomodyneSettings):
    """Homodyne statistics of both qubit branches for one window."""
    if out_plus.qubit_sign == out_minus.qubit_sign:
        raise ValueError("need one output per qubit state")
    if out_plus.qubit_sign < 0:
        out_plus, out_minus = out_minus, out_plus
    kw = dict(t0=settings.t0, include_cross=settings.include_cross, tail=settings.tail)
    mp, vp = homodyne_statistics(out_plus.state, settings.T_m, **kw)
    mm, vm = homodyne_statistics(out_minus.state, settings.T_m, **kw)
    return ReadoutResult(settings.T_m, mp, mm, vp, vm, settings.eta)
