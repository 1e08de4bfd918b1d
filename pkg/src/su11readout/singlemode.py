"""Closed-form single-frequency signal and noise for the readout schemes.

Every scheme is fed a coherent state ``|alpha>`` with real ``alpha``
(``n_in = alpha**2``) in the signal mode and vacuum in any idler, and is read
out on the ``p = -i (a - a^dag) / sqrt(2)`` quadrature, for which a coherent
state has variance 1/2. The qubit rotates the probe by ``+phi`` (state |0>)
or ``-phi`` (state |1>).

The ``*_pair`` functions return means and variances for both qubit states
at arbitrary amplifier phases; the ``snr_*`` functions are the closed-form
SNR expressions valid at the phase choices of :func:`optimal_phases`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_grid, check_nonnegative
from .params import added_noise_number, squeeze_parameter


class SchemeKind(str, enum.Enum):
    COHERENT_PA = "coherent_pa"
    COHERENT_DPA = "coherent_dpa"
    SQUEEZE = "squeeze"
    SU11_PA = "su11_pa"
    SU11_DPA = "su11_dpa"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower().replace("-", "_").replace("+", "_"))
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown scheme {value!r}; expected one of {names}") from None


class UnequalNoiseError(ValueError):
    """The two qubit outcomes have different quadrature noise, so no scalar SNR exists."""


@dataclass(frozen=True)
class SingleModeInput:
    """Inputs of the single-frequency model.

    ``r1``/``theta1`` describe the amplifier before the cavity and
    ``r2``/``theta2`` the one after it; schemes ignore what they do not use.
    """

    n_in: float
    phi: float
    r1: float = 0.0
    r2: float = 0.0
    theta1: float = 0.0
    theta2: float = 0.0

    def __post_init__(self):
        check_nonnegative(self.n_in, "n_in")
        check_nonnegative(self.r1, "r1")
        check_nonnegative(self.r2, "r2")

    @classmethod
    def from_gains(cls, n_in, phi, G1=1.0, G2=1.0, theta1=0.0, theta2=0.0):
        return cls(n_in, phi, squeeze_parameter(G1), squeeze_parameter(G2), theta1, theta2)

    @property
    def G1(self):
        return math.cosh(self.r1) ** 2

    @property
    def G2(self):
        return math.cosh(self.r2) ** 2


@dataclass(frozen=True)
class SignalNoisePair:
    """p-quadrature means and variances for qubit states |0> (+) and |1> (-)."""

    mean_plus: float
    mean_minus: float
    var_plus: float
    var_minus: float

    @property
    def signal(self):
        return abs(self.mean_plus - self.mean_minus)

    @property
    def balanced(self):
        return math.isclose(self.var_plus, self.var_minus, rel_tol=1e-9, abs_tol=1e-300)

    def snr(self):
        """``|<p+> - <p->| / (2 dp)``; refuses when the two noises differ."""
        if not self.balanced:
            raise UnequalNoiseError(
                f"var+ = {self.var_plus:.6g} differs from var- = {self.var_minus:.6g}; "
                "use optimal_phases() so both outcomes see the same noise"
            )
        return self.signal / (2.0 * math.sqrt(self.var_plus))


def _pair(mean, var, phi):
    return SignalNoisePair(mean(phi), mean(-phi), var(phi), var(-phi))


def coherent_pa_pair(inp: SingleModeInput):
    """Coherent probe, cavity, then phase-insensitive amplifier (gain ``cosh^2 r2``)."""
    a = math.sqrt(2.0 * inp.n_in)
    c2 = math.cosh(inp.r2)
    var = 0.5 * math.cosh(2.0 * inp.r2)
    return _pair(lambda ph: a * c2 * math.sin(ph), lambda ph: var, inp.phi)


def coherent_dpa_pair(inp: SingleModeInput):
    """Coherent probe, cavity, then degenerate amplifier (``r2``, ``theta2``)."""
    a = math.sqrt(2.0 * inp.n_in)
    r, th = inp.r2, inp.theta2
    # cosh 2r - cos(th) sinh 2r, written without cancellation
    var = 0.5 * (math.exp(-2 * r) + 2 * math.sin(th / 2) ** 2 * math.sinh(2 * r))
    return _pair(lambda ph: a * (math.cosh(r) * math.sin(ph) + math.sinh(r) * math.sin(th - ph)),
                 lambda ph: var, inp.phi)


def su11_pa_pair(inp: SingleModeInput):
    """Two-mode SU(1,1): PA (r1, theta1), cavity on the signal arm, PA (r2, theta2)."""
    a = math.sqrt(2.0 * inp.n_in)
    r1, r2 = inp.r1, inp.r2
    dth = inp.theta1 - inp.theta2
    offset = math.sinh(r1) * math.sinh(r2) * math.sin(inp.theta2 - inp.theta1)

    def mean(ph):
        return a * (math.cosh(r1) * math.cosh(r2) * math.sin(ph) + offset)

    def var(ph):
        # cosh 2r1 cosh 2r2 + cos(dth + ph) sinh 2r1 sinh 2r2
        return 0.5 * (math.cosh(2 * (r1 - r2))
                      + 2 * math.cos((dth + ph) / 2) ** 2 * math.sinh(2 * r1) * math.sinh(2 * r2))

    return _pair(mean, var, inp.phi)


def squeeze_pair(inp: SingleModeInput):
    """Pre-squeezed probe: DPA (r1, theta1), cavity, PA (r2) with vacuum idler."""
    a = math.sqrt(2.0 * inp.n_in)
    r1, r2, th = inp.r1, inp.r2, inp.theta1

    def mean(ph):
        return a * math.cosh(r2) * (math.cosh(r1) * math.sin(ph) + math.sinh(r1) * math.sin(th + ph))

    def var(ph):
        squeezed = math.exp(-2 * r1) + 2 * math.sin(ph + th / 2) ** 2 * math.sinh(2 * r1)
        return 0.5 * (math.sinh(r2) ** 2 + math.cosh(r2) ** 2 * squeezed)

    return _pair(mean, var, inp.phi)


def su11_dpa_pair(inp: SingleModeInput):
    """Single-mode SU(1,1) with the (0, pi) pump phases: DPA, cavity, DPA."""
    a = math.sqrt(2.0 * inp.n_in)
    r1, r2 = inp.r1, inp.r2
    return _pair(
        lambda ph: a * math.exp(r1 + r2) * math.sin(ph),
        lambda ph: 0.5 * math.exp(2 * r2) * (math.exp(-2 * r1) + 2 * math.sin(ph) ** 2 * math.sinh(2 * r1)),
        inp.phi,
    )


# -- closed-form SNRs ---------------------------------------------------------

def snr_coherent_pa(n_in, phi, G2):
    return 2.0 * np.sqrt(n_in) * np.abs(np.sin(phi)) / np.sqrt(2.0 * added_noise_number(G2) + 1.0)


def snr_coherent_dpa(n_in, phi):
    """Coherent probe with an ideal DPA at ``theta = pi``: no added noise."""
    return 2.0 * np.sqrt(n_in) * np.abs(np.sin(phi))


def snr_su11_pa(n_in, phi, A1, A2):
    """Two-mode SU(1,1) SNR for ``theta1 - theta2 = pi`` in terms of added noise numbers."""
    # (2A1+1)(2A2+1) - 8 cos(phi) sqrt(A1 A2), regrouped to avoid cancellation
    u, v = np.sqrt(A1), np.sqrt(A2)
    denom = (1 - 2 * u * v) ** 2 + 2 * (u - v) ** 2 + 16 * u * v * np.sin(phi / 2) ** 2
    return 2.0 * np.sqrt(n_in) * np.abs(np.sin(phi)) / np.sqrt(denom)


def snr_squeeze(n_in, phi, G1, A2):
    """Pre-squeezed probe SNR at ``theta1 = 0``."""
    t = np.sqrt(1.0 - 1.0 / G1)
    num = 2.0 * np.sqrt(n_in) * (1.0 + t) * np.abs(np.sin(phi))
    # 2 - 2 t cos(2 phi) = 2 (1 - t) + 4 t sin^2(phi), with 1 - t = (1/G1) / (1 + t)
    return num / np.sqrt((2.0 * A2 - 1.0) / G1 + 2.0 / (G1 * (1.0 + t)) + 4.0 * t * np.sin(phi) ** 2)


def snr_su11_dpa(n_in, phi, r1):
    """Single-mode SU(1,1) SNR; independent of the second (ideal) squeezer."""
    s2, c2 = np.sin(phi) ** 2, np.cos(phi) ** 2
    return 2.0 * np.sqrt(n_in) * np.abs(np.sin(phi)) / np.sqrt(s2 + c2 * np.exp(-4.0 * r1))


def optimal_phases(kind, phi):
    """Pump phases ``(theta1, theta2)`` that give both outcomes equal noise.

    Two-mode SU(1,1): ``theta1 - theta2 = pi`` while ``|phi| <= pi/2``, equal
    phases beyond. Squeeze: ``theta1 = 0`` for ``|phi| <= pi/4`` and ``pi``
    otherwise, which keeps ``cos(2 phi + theta1) >= 0``. Coherent+DPA reads
    out at ``theta = pi`` (stored as ``theta2``).
    """
    kind = SchemeKind.parse(kind)
    phi = abs(phi)
    if kind is SchemeKind.SU11_PA:
        return (0.0, math.pi) if phi <= math.pi / 2 else (0.0, 0.0)
    if kind is SchemeKind.SQUEEZE:
        return (0.0, 0.0) if phi <= math.pi / 4 else (math.pi, 0.0)
    if kind is SchemeKind.SU11_DPA:
        return (0.0, math.pi)
    if kind is SchemeKind.COHERENT_DPA:
        return (0.0, math.pi)
    return (0.0, 0.0)


_PAIRS = {
    SchemeKind.COHERENT_PA: coherent_pa_pair,
    SchemeKind.COHERENT_DPA: coherent_dpa_pair,
    SchemeKind.SQUEEZE: squeeze_pair,
    SchemeKind.SU11_PA: su11_pa_pair,
    SchemeKind.SU11_DPA: su11_dpa_pair,
}


def signal_noise(kind, inp: SingleModeInput):
    return _PAIRS[SchemeKind.parse(kind)](inp)


def scheme_snr(kind, n_in, phi, G1=1.0, G2=1.0, phases=None):
    """SNR of ``kind`` with its phase rule applied (or explicit ``phases``)."""
    kind = SchemeKind.parse(kind)
    th1, th2 = optimal_phases(kind, phi) if phases is None else phases
    inp = SingleModeInput.from_gains(n_in, phi, G1=G1, G2=G2, theta1=th1, theta2=th2)
    return signal_noise(kind, inp).snr()


def phase_from_ratio(two_chi_over_kappa):
    """Resonant-drive phase shift ``phi = 2 arctan(2 chi / kappa)``."""
    return 2.0 * np.arctan(two_chi_over_kappa)


@dataclass(frozen=True)
class RatioCurve:
    two_chi_over_kappa: np.ndarray
    phi: np.ndarray
    ratio: np.ndarray
    snr_a: np.ndarray
    snr_b: np.ndarray
    n_bar_a: np.ndarray
    n_bar_b: np.ndarray


def _cavity_flux(kind, flux_in, G1, r1):
    # photon flux reaching the cavity for a coherent input of flux_in
    if kind in (SchemeKind.SU11_PA,):
        return flux_in * G1
    if kind in (SchemeKind.SU11_DPA, SchemeKind.SQUEEZE):
        return flux_in * math.exp(2.0 * r1)
    return flux_in


def snr_ratio_curve(kind_a, kind_b, two_chi_over_kappa, flux_a, flux_b, G1=1.0, G2=100.0,
                    phases_a=None, phases_b=None, G1_b=None):
    """Steady-state ``SNR_a / SNR_b`` versus ``2 chi / kappa``.

    ``flux_a``/``flux_b`` are the input photon fluxes in units of ``kappa``
    (photons per ``1/kappa``) in front of each scheme's first element, held
    constant along the sweep. The steady-state intracavity photon number
    implied by each flux at the cavity, ``kappa F / (kappa^2/4 + chi^2)``,
    is returned alongside so a photon cap can be checked by the caller.
    ``phases_*`` override the phase rule, e.g. ``(0, 0)`` to force equal
    SU(1,1) pump phases at every point. ``G1_b`` gives scheme ``b`` its own
    first-stage gain (defaults to ``G1``).
    """
    x = check_grid(two_chi_over_kappa, "two_chi_over_kappa")
    kind_a, kind_b = SchemeKind.parse(kind_a), SchemeKind.parse(kind_b)
    G1_b = G1 if G1_b is None else G1_b
    phi = phase_from_ratio(x)
    snr_a = np.array([scheme_snr(kind_a, flux_a, p, G1, G2, phases_a) for p in phi])
    snr_b = np.array([scheme_snr(kind_b, flux_b, p, G1_b, G2, phases_b) for p in phi])
    # n = kappa F / (kappa^2/4 + chi^2) with F in units of kappa
    lorentz = 1.0 / (0.25 * (1.0 + x**2))
    n_a = _cavity_flux(kind_a, flux_a, G1, squeeze_parameter(G1)) * lorentz
    n_b = _cavity_flux(kind_b, flux_b, G1_b, squeeze_parameter(G1_b)) * lorentz
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = snr_a / snr_b
    return RatioCurve(x, phi, ratio, snr_a, snr_b, n_a, n_b)
