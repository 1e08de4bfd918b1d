"""Estimator-style wrapper around the pulsed readout simulation.

``fit`` solves the operating point (photon number and first-stage gain)
for one scheme; ``predict`` maps integration times to error probabilities.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .params import PulseSpec, SystemParams, db_to_linear, linear_to_db
from .scenarios import ConstraintSpec, max_feasible_photons, optimize_n_pulse, simulate, solve_g1
from .singlemode import SchemeKind


class ReadoutSimulator(BaseEstimator):
    """Pulsed dispersive readout of one scheme at a fixed photon cap.

    Parameters
    ----------
    scheme : str
        ``coherent_pa``, ``coherent_dpa``, ``squeeze``, ``su11_pa`` or ``su11_dpa``.
    t_pulse : float
        Pulse duration ``2/W`` in seconds.
    n_pulse : float or "auto"
        Photons in the pulse before the first element; "auto" maximises the
        SNR at ``t_m_factor * t_pulse``.
    omega_r_hz, omega_q_hz, g_hz, chi_hz : float
        Device frequencies in Hz (``chi_hz=None`` derives the shift).
    kappa : float
        Cavity linewidth in 1/s.
    n_cap, g2_db, eta, hemt_db, n_bar_t, include_hemt
        Constraint and detection settings.

    Attributes
    ----------
    n_pulse_, g1_, g1_db_, snr_, p_error_ : float
        Operating point found by ``fit``.
    run_ : PulsedRun
        Simulated outputs reused by ``predict``/``transform``.
    """

    def __init__(self, scheme="su11_pa", t_pulse=60e-9, n_pulse="auto", omega_r_hz=6.789e9,
                 omega_q_hz=5.5e9, g_hz=100e6, kappa=4e7, chi_hz=7.7e6, n_cap=5.0, g2_db=20.0,
                 eta=0.5, hemt_db=30.1, n_bar_t=25.0, include_hemt=True, t_m_factor=1.2):
        self.scheme = scheme
        self.t_pulse = t_pulse
        self.n_pulse = n_pulse
        self.omega_r_hz = omega_r_hz
        self.omega_q_hz = omega_q_hz
        self.g_hz = g_hz
        self.kappa = kappa
        self.chi_hz = chi_hz
        self.n_cap = n_cap
        self.g2_db = g2_db
        self.eta = eta
        self.hemt_db = hemt_db
        self.n_bar_t = n_bar_t
        self.include_hemt = include_hemt
        self.t_m_factor = t_m_factor

    def _system(self):
        return SystemParams.from_hz(self.omega_r_hz, self.omega_q_hz, self.g_hz, self.kappa, chi_hz=self.chi_hz)

    def _constraint(self):
        return ConstraintSpec.from_db(self.n_cap, self.g2_db, self.eta, self.hemt_db, self.n_bar_t,
                                      self.include_hemt)

    def fit(self, X=None, y=None):
        """Solve the operating point; ``X`` and ``y`` are ignored."""
        kind = SchemeKind.parse(self.scheme)
        params = self._system()
        constraint = self._constraint().check_against(params)
        pulse = PulseSpec.from_duration(self.t_pulse)
        if isinstance(self.n_pulse, str):
            if self.n_pulse != "auto":
                raise ValueError("n_pulse must be a number or 'auto'")
            n = optimize_n_pulse(kind, constraint, pulse, params, T_m_factor=self.t_m_factor).n_pulse
        else:
            n = float(self.n_pulse)
        self.params_ = params
        self.constraint_ = constraint
        self.run_ = simulate(kind, n, pulse, constraint, params, with_ideal=True)
        self.n_pulse_ = n
        self.g1_ = self.run_.G1
        self.g1_db_ = linear_to_db(self.g1_)
        t_m = self.t_m_factor * pulse.T_pulse
        self.snr_ = self.run_.snr(t_m)
        self.p_error_ = self.run_.p_error(t_m)
        return self

    def _times(self, X):
        X = check_array(X, ensure_2d=False, dtype=float)
        X = X.reshape(-1, X.shape[-1]) if X.ndim > 1 else X.reshape(-1, 1)
        if X.shape[1] != 1:
            raise ValueError("X must hold a single column of integration times (seconds)")
        if np.any(X < 0):
            raise ValueError("integration times must be non-negative")
        return X[:, 0]

    def predict(self, X):
        """Error probability for each integration time in ``X`` (seconds)."""
        check_is_fitted(self, "run_")
        return np.array([self.run_.p_error(t) for t in self._times(X)])

    def transform(self, X):
        """Columns ``(signal, noise, snr)`` per integration time."""
        check_is_fitted(self, "run_")
        out = []
        for t in self._times(X):
            if t == 0:
                out.append((0.0, 0.0, 0.0))
                continue
            r = self.run_.readout(t)
            out.append((r.signal, r.noise, r.snr))
        return np.array(out)

    def score(self, X, y=None):
        """Best ``-log10 P_error`` over the integration times in ``X``."""
        check_is_fitted(self, "run_")
        best = 0.5
        logs = []
        for t in self._times(X):
            if t == 0:
                logs.append(np.log10(best))
            else:
                logs.append(self.run_.readout(t).log10_p_error)
        return float(-np.min(logs))
