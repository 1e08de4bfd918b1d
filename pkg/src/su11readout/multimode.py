"""Gaussian-state propagation of a probe pulse on a symmetric frequency grid.

All pumps sit at the carrier ``omega_c``, so an amplifier only mixes the
frequency pair ``omega_c +- delta``. The state is therefore block diagonal:
block ``k`` (``k = 0..J``) holds the modes at ``+delta_k`` and ``-delta_k``
of the signal arm and, for two-arm chains, of the idler arm. Block 0 is the
carrier itself; its ``-delta`` slots are idle vacuum modes that no element
touches, which keeps every block the same shape.

Mode order inside a block is ``[s(+d), s(-d), i(+d), i(-d)]`` and the
quadrature vector is ``(x_1..x_n, p_1..p_n)`` with ``x = (b + b^dag)/sqrt 2``
and ``p = -i (b - b^dag)/sqrt 2``. Discrete modes are
``b_k = sqrt(d_omega) b(omega_k)`` so the vacuum covariance is ``I/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import erfc

from ._validation import check_efficiency, check_gain, check_nonnegative, check_sign
from .cavity import phase_at_detuning
from .params import PulseSpec, SystemParams, squeeze_parameter

SIGNAL, IDLER = "signal", "idler"


class ChainError(ValueError):
    """Malformed chain descriptor or element applied to an incompatible state."""


# -- frequency grid -----------------------------------------------------------

@dataclass(frozen=True)
class FrequencyGrid:
    """``M = 2J + 1`` points ``omega_c + k d_omega``, ``k = -J..J``."""

    omega_c: float
    d_omega: float
    J: int

    def __post_init__(self):
        if self.J < 1 or self.d_omega <= 0:
            raise ValueError("grid needs J >= 1 and d_omega > 0")

    @property
    def M(self):
        return 2 * self.J + 1

    @property
    def half_width(self):
        return self.J * self.d_omega

    @property
    def offsets(self):
        """``delta_k`` for the blocks ``k = 0..J``."""
        return np.arange(self.J + 1) * self.d_omega

    @property
    def detunings(self):
        """All ``M`` grid detunings from the carrier, ascending."""
        return np.arange(-self.J, self.J + 1) * self.d_omega

    @property
    def omegas(self):
        return self.omega_c + self.detunings

    def refined(self, factor=2):
        """Same span, ``factor`` times finer spacing."""
        return FrequencyGrid(self.omega_c, self.d_omega / factor, self.J * factor)

    @classmethod
    def for_pulse(cls, pulse: PulseSpec, params: SystemParams, half_width=None, J=None,
                  points_per_width=12):
        """Default grid: half-width ``max(6W, 8 kappa)`` and at least
        ``points_per_width`` points per spectral width ``W`` (never fewer
        than 2048 points per side)."""
        hw = max(6.0 * pulse.W, 8.0 * params.kappa) if half_width is None else float(half_width)
        if J is None:
            J = max(2048, int(math.ceil(points_per_width * hw / pulse.W)))
        return cls(pulse.carrier(params), hw / J, int(J))


# -- state --------------------------------------------------------------------

@dataclass(frozen=True)
class GaussianChainState:
    grid: FrequencyGrid
    two_arm: bool
    mean: np.ndarray  # (J+1, 2n)
    cov: np.ndarray  # (J+1, 2n, 2n)

    @property
    def n_modes(self):
        return 4 if self.two_arm else 2

    def mode_index(self, arm, side):
        """Position of mode (arm, side=+1/-1) inside a block."""
        if arm == IDLER and not self.two_arm:
            raise ChainError("state has no idler arm")
        base = 0 if arm == SIGNAL else 2
        return base + (0 if side > 0 else 1)

    def _per_frequency(self, values_plus, values_minus):
        # assemble a length-M array ordered by detuning from per-block arrays
        J = self.grid.J
        out = np.empty(2 * J + 1)
        out[J:] = values_plus
        out[:J] = values_minus[1:][::-1]
        return out

    def quadrature_means(self, arm=SIGNAL):
        n = self.n_modes
        ip, im = self.mode_index(arm, 1), self.mode_index(arm, -1)
        x = self._per_frequency(self.mean[:, ip], self.mean[:, im])
        p = self._per_frequency(self.mean[:, n + ip], self.mean[:, n + im])
        return x, p

    def mean_p(self, arm=SIGNAL):
        return self.quadrature_means(arm)[1]

    def var_p(self, arm=SIGNAL):
        n = self.n_modes
        ip, im = n + self.mode_index(arm, 1), n + self.mode_index(arm, -1)
        return self._per_frequency(self.cov[:, ip, ip], self.cov[:, im, im])

    def cross_cov_p(self, arm=SIGNAL):
        """``Cov(p(omega), p(2 omega_c - omega))`` per grid frequency.

        At the carrier the partner is the mode itself and the value is its variance.
        """
        n = self.n_modes
        ip, im = n + self.mode_index(arm, 1), n + self.mode_index(arm, -1)
        c = self.cov[:, ip, im].copy()
        c[0] = self.cov[0, ip, ip]
        return self._per_frequency(c, c)

    def photon_number(self, arm=SIGNAL):
        """Mean photon number in one arm, summed over the grid (idle slots excluded)."""
        n = self.n_modes
        total = 0.0
        for side in (1, -1):
            i = self.mode_index(arm, side)
            blocks = slice(None) if side > 0 else slice(1, None)
            x2 = self.cov[blocks, i, i] + self.mean[blocks, i] ** 2
            p2 = self.cov[blocks, n + i, n + i] + self.mean[blocks, n + i] ** 2
            total += float(np.sum((x2 + p2 - 1.0) / 2.0))
        return total


def symplectic_form(n):
    z, one = np.zeros((n, n)), np.eye(n)
    return np.block([[z, one], [-one, z]])


def bogoliubov_to_symplectic(A, B):
    """Real ``(xx..pp)`` matrix of ``b_out = A b + B b^dag`` (batched over leading axes)."""
    Ar, Ai, Br, Bi = A.real, A.imag, B.real, B.imag
    top = np.concatenate([Ar + Br, Bi - Ai], axis=-1)
    bottom = np.concatenate([Ai + Bi, Ar - Br], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def init_state(grid: FrequencyGrid, pulse: PulseSpec, two_arm=True, energy_tol=1e-3):
    """Coherent pulse (real amplitude) on the signal arm, vacuum everywhere else."""
    if erfc(math.sqrt(2.0) * grid.half_width / pulse.W) > energy_tol:
        raise ChainError("frequency grid holds less than 99.9% of the pulse energy; widen it")
    n = 4 if two_arm else 2
    nb = grid.J + 1
    mean = np.zeros((nb, 2 * n))
    amp = math.sqrt(2.0 * grid.d_omega) * pulse.amplitude(grid.offsets)
    mean[:, 0] = amp
    mean[1:, 1] = amp[1:]
    cov = np.broadcast_to(0.5 * np.eye(2 * n), (nb, 2 * n, 2 * n)).copy()
    return GaussianChainState(grid, two_arm, mean, cov)


def _identity_bogoliubov(state):
    nb, n = state.grid.J + 1, state.n_modes
    A = np.broadcast_to(np.eye(n, dtype=complex), (nb, n, n)).copy()
    return A, np.zeros((nb, n, n), dtype=complex)


def _apply(state, S):
    mean = np.einsum("kab,kb->ka", S, state.mean)
    cov = S @ state.cov @ np.swapaxes(S, -1, -2)
    return replace(state, mean=mean, cov=0.5 * (cov + np.swapaxes(cov, -1, -2)))


def pa_symplectic(state, G, theta):
    """Two-mode squeezer between the signal at ``+d`` and the idler at ``-d`` (and vice versa)."""
    if not state.two_arm:
        raise ChainError("a phase-insensitive PA needs the idler arm")
    r = squeeze_parameter(check_gain(G, "PA gain"))
    c, e = math.cosh(r), np.exp(1j * theta) * math.sinh(r)
    A, B = _identity_bogoliubov(state)
    A *= c
    # idle slots of the carrier block stay untouched
    A[0, 1, 1] = A[0, 3, 3] = 1.0
    pairs = [(0, 3), (1, 2), (2, 1), (3, 0)]
    for a, b in pairs:
        B[1:, a, b] = e
    B[0, 0, 2] = B[0, 2, 0] = e
    return bogoliubov_to_symplectic(A, B)


def dpa_symplectic(state, G, theta, arm=SIGNAL):
    """Degenerate squeezer coupling ``+d`` with ``-d`` inside one arm; single-mode at the carrier."""
    r = squeeze_parameter(check_gain(G, "DPA gain"))
    c, e = math.cosh(r), np.exp(1j * theta) * math.sinh(r)
    A, B = _identity_bogoliubov(state)
    ip, im = state.mode_index(arm, 1), state.mode_index(arm, -1)
    A[:, ip, ip] = c
    A[1:, im, im] = c
    B[1:, ip, im] = e
    B[1:, im, ip] = e
    B[0, ip, ip] = e
    return bogoliubov_to_symplectic(A, B)


def cavity_symplectic(state, qubit_sign, params: SystemParams):
    """Frequency-dependent phase rotation ``exp(i phi(omega - omega_r))`` of the signal arm."""
    check_sign(qubit_sign)
    offs = state.grid.offsets
    base = state.grid.omega_c - params.omega_r
    ph_p = phase_at_detuning(base + offs, qubit_sign, params.kappa, params.chi)
    ph_m = phase_at_detuning(base - offs, qubit_sign, params.kappa, params.chi)
    A, B = _identity_bogoliubov(state)
    A[:, 0, 0] = np.exp(1j * ph_p)
    A[1:, 1, 1] = np.exp(1j * ph_m[1:])
    return bogoliubov_to_symplectic(A, B)


def apply_pa(state, G, theta=0.0):
    return _apply(state, pa_symplectic(state, G, theta))


def apply_dpa(state, G, theta=0.0, arm=SIGNAL):
    return _apply(state, dpa_symplectic(state, G, theta, arm))


def apply_cavity(state, qubit_sign, params: SystemParams):
    return _apply(state, cavity_symplectic(state, qubit_sign, params))


def apply_thermal(state, G_H, n_bar_T, arm=SIGNAL):
    """Phase-insensitive amplifier fed by a thermal bath: ``sqrt(G) a + sqrt(G-1) c``."""
    G_H = check_gain(G_H, "thermal amplifier gain")
    check_nonnegative(n_bar_T, "n_bar_T")
    n = state.n_modes
    idx = [state.mode_index(arm, 1), state.mode_index(arm, -1)]
    idx = idx + [n + i for i in idx]
    scale = np.ones(2 * n)
    scale[idx] = math.sqrt(G_H)
    mean = state.mean * scale
    cov = state.cov * np.outer(scale, scale)
    added = (G_H - 1.0) * (n_bar_T + 0.5)
    for i in idx:
        cov[:, i, i] += added
    # idle carrier slots receive no bath noise: they are bookkeeping, not modes
    for i in (state.mode_index(arm, -1), n + state.mode_index(arm, -1)):
        cov[0, i, :] = state.cov[0, i, :] * scale * scale[i]
        cov[0, :, i] = cov[0, i, :]
        cov[0, i, i] = 0.5
    mean[0, [state.mode_index(arm, -1), n + state.mode_index(arm, -1)]] = 0.0
    return replace(state, mean=mean, cov=cov)


# -- chain descriptors --------------------------------------------------------

@dataclass(frozen=True)
class PA:
    gain: float
    theta: float = 0.0


@dataclass(frozen=True)
class DPA:
    gain: float
    theta: float = 0.0
    arm: str = SIGNAL


@dataclass(frozen=True)
class Cavity:
    pass


@dataclass(frozen=True)
class Thermal:
    gain: float
    n_bar_T: float


Element = Union[PA, DPA, Cavity, Thermal]


@dataclass(frozen=True)
class ChainDescriptor:
    elements: Tuple[Element, ...] = ()

    def __post_init__(self):
        els = tuple(self.elements)
        object.__setattr__(self, "elements", els)
        if sum(isinstance(e, Cavity) for e in els) > 1:
            raise ChainError("at most one cavity per chain")
        for k, e in enumerate(els):
            if not isinstance(e, (PA, DPA, Cavity, Thermal)):
                raise ChainError(f"unknown chain element {e!r}")
            if isinstance(e, Thermal) and k != len(els) - 1:
                raise ChainError("a thermal post-amplifier may only terminate the chain")
            if isinstance(e, DPA) and e.arm not in (SIGNAL, IDLER):
                raise ChainError(f"DPA arm must be 'signal' or 'idler', got {e.arm!r}")
            if isinstance(e, (PA, DPA, Thermal)):
                check_gain(e.gain, type(e).__name__ + " gain")

    @property
    def two_arm(self):
        return any(isinstance(e, PA) or (isinstance(e, DPA) and e.arm == IDLER) for e in self.elements)

    @property
    def has_thermal(self):
        return bool(self.elements) and isinstance(self.elements[-1], Thermal)

    def without_thermal(self):
        if not self.has_thermal:
            return self
        return ChainDescriptor(self.elements[:-1])

    def pre_cavity_gain(self):
        """Power gain of the coherent amplitude seen by the cavity (1 if no cavity)."""
        g = 1.0
        for e in self.elements:
            if isinstance(e, Cavity):
                return g
            if isinstance(e, PA):
                g *= e.gain
            elif isinstance(e, DPA) and e.arm == SIGNAL:
                r = squeeze_parameter(e.gain)
                # real input amplitude: |cosh r + e^{i theta} sinh r|^2
                g *= abs(math.cosh(r) + np.exp(1j * e.theta) * math.sinh(r)) ** 2
        return 1.0


def element_symplectic(element, state, qubit_sign=1, params: Optional[SystemParams] = None):
    if isinstance(element, PA):
        return pa_symplectic(state, element.gain, element.theta)
    if isinstance(element, DPA):
        return dpa_symplectic(state, element.gain, element.theta, element.arm)
    if isinstance(element, Cavity):
        if params is None:
            raise ChainError("cavity element needs system parameters")
        return cavity_symplectic(state, qubit_sign, params)
    raise ChainError(f"{type(element).__name__} is not symplectic")


def apply_element(state, element, qubit_sign, params):
    if isinstance(element, Thermal):
        return apply_thermal(state, element.gain, element.n_bar_T)
    return _apply(state, element_symplectic(element, state, qubit_sign, params))


@dataclass(frozen=True)
class ChainOutput:
    state: GaussianChainState
    qubit_sign: int

    @property
    def detunings(self):
        return self.state.grid.detunings

    @property
    def mean_p(self):
        return self.state.mean_p()

    @property
    def var_p(self):
        return self.state.var_p()

    @property
    def cross_cov(self):
        return self.state.cross_cov_p()


def run_chain(descriptor: ChainDescriptor, grid: FrequencyGrid, pulse: PulseSpec, qubit_sign,
              params: SystemParams, callback=None):
    """Push the pulse through ``descriptor`` for one qubit state.

    ``callback(element, state)`` is invoked after every element, which the
    property tests use to check uncertainty relations along the way.
    """
    check_sign(qubit_sign)
    state = init_state(grid, pulse, two_arm=descriptor.two_arm)
    for element in descriptor.elements:
        state = apply_element(state, element, qubit_sign, params)
        if callback is not None:
            callback(element, state)
    return ChainOutput(state, qubit_sign)


# -- Monte-Carlo oracle -------------------------------------------------------

def _bogoliubov(element, state, qubit_sign, params):
    """Complex ``(A, B)`` per block, built independently of the real symplectic form."""
    nb, n = state.grid.J + 1, state.n_modes
    A = np.zeros((nb, n, n), dtype=complex)
    B = np.zeros((nb, n, n), dtype=complex)
    for m in range(n):
        A[:, m, m] = 1.0
    if isinstance(element, Cavity):
        offs = state.grid.offsets
        base = state.grid.omega_c - params.omega_r
        A[:, 0, 0] = np.exp(1j * phase_at_detuning(base + offs, qubit_sign, params.kappa, params.chi))
        A[1:, 1, 1] = np.exp(1j * phase_at_detuning(base - offs[1:], qubit_sign, params.kappa, params.chi))
        return A, B
    r = squeeze_parameter(element.gain)
    c, e = math.cosh(r), np.exp(1j * element.theta) * math.sinh(r)
    if isinstance(element, PA):
        A[:, [0, 1, 2, 3], [0, 1, 2, 3]] = c
        A[0, 1, 1] = A[0, 3, 3] = 1.0
        B[1:, [0, 1, 2, 3], [3, 2, 1, 0]] = e
        B[0, [0, 2], [2, 0]] = e
    else:
        ip, im = state.mode_index(element.arm, 1), state.mode_index(element.arm, -1)
        A[:, ip, ip] = c
        A[1:, im, im] = c
        B[1:, [ip, im], [im, ip]] = e
        B[0, ip, ip] = e
    return A, B


def monte_carlo_homodyne(descriptor: ChainDescriptor, grid: FrequencyGrid, pulse: PulseSpec,
                         qubit_sign, params: SystemParams, weights_x, weights_p, n_samples=100_000,
                         seed=0, batch=20_000):
    """Sample the homodyne variable ``X = w_x . x + w_p . p`` by propagating
    classical Wigner samples of the complex field amplitudes through the chain.

    ``weights_x``/``weights_p`` have the per-block shape ``(J+1, n_modes)``.
    Returns the sample mean and sample variance of ``X``.
    """
    rng = np.random.default_rng(seed)
    probe = init_state(grid, pulse, two_arm=descriptor.two_arm)
    n = probe.n_modes
    mean_amp = (probe.mean[:, :n] + 1j * probe.mean[:, n:]) / math.sqrt(2.0)
    # symmetric-ordered vacuum: Var(Re b) = Var(Im b) = 1/4
    mats = []
    for e in descriptor.elements:
        mats.append(e if isinstance(e, Thermal) else _bogoliubov(e, probe, qubit_sign, params))
    wx = np.ascontiguousarray(weights_x)
    wp = np.ascontiguousarray(weights_p)
    sig = [probe.mode_index(SIGNAL, 1), probe.mode_index(SIGNAL, -1)]
    nb = grid.J + 1
    sums = np.zeros(2)
    shift = 0.0
    done = 0
    while done < n_samples:
        m = min(batch, n_samples - done)
        # layout (block, sample, mode) so each element is a batched matmul
        b = mean_amp[:, None, :] + 0.5 * (rng.standard_normal((nb, m, n))
                                          + 1j * rng.standard_normal((nb, m, n)))
        b[0, :, 1::2] = 0.0
        for mat in mats:
            if isinstance(mat, Thermal):
                sd = math.sqrt((mat.n_bar_T + 0.5) / 2.0)
                noise = sd * (rng.standard_normal((nb, m, 2)) + 1j * rng.standard_normal((nb, m, 2)))
                b[..., sig] = math.sqrt(mat.gain) * b[..., sig] + math.sqrt(mat.gain - 1.0) * noise
                b[0, :, sig[1]] = 0.0
            else:
                A, B = mat
                b = b @ np.swapaxes(A, 1, 2) + np.conj(b) @ np.swapaxes(B, 1, 2)
        X = math.sqrt(2.0) * (np.einsum("ksa,ka->s", b.real, wx) + np.einsum("ksa,ka->s", b.imag, wp))
        if done == 0:
            shift = float(X.mean())
        sums += [np.sum(X - shift), np.sum((X - shift) ** 2)]
        done += m
    mu = sums[0] / n_samples
    var = sums[1] / n_samples - mu**2
    return shift + mu, var * n_samples / (n_samples - 1)
