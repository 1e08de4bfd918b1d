"""Physical constants, unit conventions and derived scalar quantities.

All frequencies stored on the records below are angular (rad/s) and all
times are in seconds. Constructors named ``from_*`` accept the ordinary
frequencies (Hz) that experimental tables quote and do the ``2*pi``
conversion once, at the boundary.

Gains are power gains; ``G_dB = 10 log10(G)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._validation import check_gain, check_positive

TWO_PI = 2.0 * math.pi


class DomainError(ValueError):
    """A physical formula was evaluated outside its domain (pole, negative gain...)."""


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def db_to_linear(gain_db):
    return _scalar_or_array(10.0 ** (np.asarray(gain_db, dtype=float) / 10.0))


def linear_to_db(gain):
    gain = np.asarray(gain, dtype=float)
    if np.any(gain <= 0):
        raise DomainError("power gain must be positive to express in dB")
    return _scalar_or_array(10.0 * np.log10(gain))


def squeeze_parameter(gain):
    """Squeeze parameter ``r`` with ``cosh(r)**2 == gain``."""
    gain = check_gain(gain, "gain")
    # arcsinh form stays accurate for gains just above 1
    return float(np.arcsinh(np.sqrt(gain - 1.0)))


def derive_chi_series(g, Delta):
    """Dispersive shift from the two-term Schrieffer-Wolff series.

    ``chi = g**2/Delta + 5 g**4 / (6 Delta**3)``. The quartic self-Kerr term
    ``(5 g^4 / 3 Delta^3) Z (a^dag a)^2`` of the same expansion is not
    simulated anywhere in this package.
    """
    if Delta == 0:
        raise DomainError("zero qubit-cavity detuning: dispersive expansion undefined")
    return g**2 / Delta + 5.0 * g**4 / (6.0 * Delta**3)


def derive_chi_transmon(g, Delta, E_c):
    """Transmon-corrected dispersive shift ``-E_c g^2 / (Delta (Delta - E_c))``."""
    if Delta == 0 or Delta == E_c:
        raise DomainError("dispersive shift has a pole at Delta = 0 and Delta = E_c")
    return -E_c * g**2 / (Delta * (Delta - E_c))


def n_crit(Delta, g):
    """Critical intracavity photon number ``Delta^2 / (4 g^2)``."""
    check_positive(g, "g")
    return Delta**2 / (4.0 * g**2)


def purcell_t1_bound(Delta, kappa, chi):
    """Upper bound on the Purcell-limited T1, ``Delta / (kappa chi)`` (seconds).

    Signs of ``Delta`` and ``chi`` always agree for the series formula, so
    the magnitudes are used.
    """
    check_positive(kappa, "kappa")
    if chi == 0:
        raise DomainError("Purcell bound needs a nonzero dispersive shift")
    return abs(Delta) / (kappa * abs(chi))


def added_noise_number(G):
    """Quantum-limited added noise of a phase-insensitive amplifier, ``(1 - 1/G)/2``."""
    G = np.asarray(G, dtype=float)
    if np.any(G < 1):
        raise DomainError("amplifier gain must be >= 1")
    return _scalar_or_array(0.5 * (1.0 - 1.0 / G))


@dataclass(frozen=True)
class SystemParams:
    """Cavity, qubit and coupling constants (angular units).

    ``chi`` is either supplied directly or derived from ``g`` and the
    detuning; ``chi_source`` records which (``"supplied"``, ``"series"``
    or ``"transmon"``).
    """

    omega_r: float
    omega_q: float
    g: float
    kappa: float
    chi: float
    E_c: Optional[float] = None
    chi_source: str = "supplied"

    def __post_init__(self):
        check_positive(self.kappa, "kappa")
        check_positive(self.g, "g")
        if self.omega_q == self.omega_r:
            raise DomainError("Delta = omega_q - omega_r must be nonzero")
        if self.chi_source not in ("supplied", "series", "transmon"):
            raise ValueError(f"unknown chi_source {self.chi_source!r}")

    @property
    def Delta(self):
        return self.omega_q - self.omega_r

    @property
    def n_crit(self):
        return n_crit(self.Delta, self.g)

    @property
    def purcell_t1_bound(self):
        return purcell_t1_bound(self.Delta, self.kappa, self.chi)

    @property
    def chi_over_kappa(self):
        return self.chi / self.kappa

    @classmethod
    def build(cls, omega_r, omega_q, g, kappa, chi=None, E_c=None):
        """Build from angular quantities, deriving ``chi`` if it is not given."""
        Delta = omega_q - omega_r
        if chi is not None:
            source = "supplied"
        elif E_c is not None:
            chi, source = derive_chi_transmon(g, Delta, E_c), "transmon"
        else:
            chi, source = derive_chi_series(g, Delta), "series"
        return cls(omega_r=omega_r, omega_q=omega_q, g=g, kappa=kappa,
                   chi=chi, E_c=E_c, chi_source=source)

    @classmethod
    def from_hz(cls, omega_r_hz, omega_q_hz, g_hz, kappa, chi_hz=None, e_c_hz=None):
        """Build from ``omega/2pi`` values in Hz. ``kappa`` is already a rate (1/s)."""
        return cls.build(
            omega_r=TWO_PI * omega_r_hz,
            omega_q=TWO_PI * omega_q_hz,
            g=TWO_PI * g_hz,
            kappa=kappa,
            chi=None if chi_hz is None else TWO_PI * chi_hz,
            E_c=None if e_c_hz is None else TWO_PI * e_c_hz,
        )

    def with_chi(self, chi):
        return SystemParams(self.omega_r, self.omega_q, self.g, self.kappa, chi,
                            self.E_c, "supplied")

    def with_chi_over_kappa(self, ratio):
        """Same system with ``chi = ratio * kappa`` (used by the 2chi/kappa sweeps)."""
        return self.with_chi(ratio * self.kappa)


def reference_system():
    """Device used throughout the numerical study: 6.789 GHz cavity, 5.5 GHz
    transmon, g/2pi = 100 MHz, 1/kappa = 25 ns, chi/2pi = 7.7 MHz."""
    return SystemParams.from_hz(6.789e9, 5.5e9, 100e6, kappa=1 / 25e-9, chi_hz=7.7e6)


@dataclass(frozen=True)
class PulseSpec:
    """Gaussian probe pulse.

    The spectral amplitude is
    ``alpha(w) = sqrt(n_pulse) exp(-(w - omega_c)^2 / W^2) / ((2 pi)^(1/4) sqrt(W/2))``
    so that ``int |alpha|^2 dw = n_pulse``; the intensity in time has standard
    deviation ``1/W`` and the nominal duration is ``T_pulse = 2/W``.
    """

    W: float
    n_pulse: float = 0.0
    omega_c: Optional[float] = None

    def __post_init__(self):
        check_positive(self.W, "W")
        if self.n_pulse < 0:
            raise ValueError("n_pulse must be >= 0")

    @property
    def T_pulse(self):
        return 2.0 / self.W

    @classmethod
    def from_duration(cls, T_pulse, n_pulse=0.0, omega_c=None):
        check_positive(T_pulse, "T_pulse")
        return cls(W=2.0 / T_pulse, n_pulse=n_pulse, omega_c=omega_c)

    def with_photons(self, n_pulse):
        return PulseSpec(self.W, n_pulse, self.omega_c)

    def envelope(self, detuning):
        """Unit-norm spectral envelope ``h`` as a function of ``w - omega_c``."""
        detuning = np.asarray(detuning, dtype=float)
        norm = (TWO_PI) ** 0.25 * math.sqrt(self.W / 2.0)
        return np.exp(-(detuning**2) / self.W**2) / norm

    def amplitude(self, detuning):
        """Spectral amplitude ``alpha`` (s^1/2) versus detuning from the carrier."""
        return math.sqrt(self.n_pulse) * self.envelope(detuning)

    def carrier(self, params):
        return params.omega_r if self.omega_c is None else self.omega_c


class AmplifierKind(enum.Enum):
    PA = "PA"
    DPA = "DPA"
    THERMAL = "THERMAL"


@dataclass(frozen=True)
class AmplifierSpec:
    """One amplifier stage; gain and phase are frequency independent."""

    kind: AmplifierKind
    gain: float
    theta: Optional[float] = None
    n_bar_T: Optional[float] = None
    r: float = field(init=False)

    def __post_init__(self):
        check_gain(self.gain, "gain")
        if self.kind is AmplifierKind.THERMAL:
            if self.theta is not None:
                raise ValueError("thermal amplifier has no pump phase")
            if self.n_bar_T is None or self.n_bar_T < 0:
                raise ValueError("thermal amplifier needs n_bar_T >= 0")
        else:
            if self.n_bar_T is not None:
                raise ValueError("parametric amplifiers carry no thermal occupancy")
            if self.theta is None:
                object.__setattr__(self, "theta", 0.0)
        object.__setattr__(self, "r", squeeze_parameter(self.gain))

    @property
    def gain_db(self):
        return linear_to_db(self.gain)

    @property
    def added_noise(self):
        if self.kind is AmplifierKind.THERMAL:
            return (1.0 - 1.0 / self.gain) * (self.n_bar_T + 0.5)
        return added_noise_number(self.gain)

    @classmethod
    def pa(cls, gain_db, theta=0.0):
        return cls(AmplifierKind.PA, db_to_linear(gain_db), theta=theta)

    @classmethod
    def dpa(cls, gain_db, theta=0.0):
        return cls(AmplifierKind.DPA, db_to_linear(gain_db), theta=theta)

    @classmethod
    def thermal(cls, gain_db, n_bar_T):
        return cls(AmplifierKind.THERMAL, db_to_linear(gain_db), n_bar_T=n_bar_T)
