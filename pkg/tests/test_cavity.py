import math

import numpy as np
import pytest
from scipy.integrate import quad

from su11readout.cavity import (GridError, cavity_filter, group_delay, incident_envelope, peak_photon_fraction,
                                phase, phase_at_detuning, pulsed_photons, reflection, steady_state_photons,
                                transmitted_envelope)
from su11readout.params import PulseSpec, SystemParams

KAPPA = 4e7


def test_reflection_is_unimodular(params):
    rng = np.random.default_rng(1)
    omega = params.omega_r + rng.normal(scale=20 * KAPPA, size=10_000)
    for s in (1, -1):
        assert np.allclose(np.abs(reflection(omega, s, params)), 1.0, atol=1e-14)


def test_reflection_on_shifted_resonance(params):
    assert reflection(params.omega_r - params.chi, 1, params) == pytest.approx(1.0)
    assert reflection(params.omega_r + params.chi, -1, params) == pytest.approx(1.0)


def test_quarter_wave_phase(params):
    p = params.with_chi_over_kappa(0.5)
    assert phase(p.omega_r, 1, p) == pytest.approx(math.pi / 2)
    assert phase(p.omega_r, -1, p) == pytest.approx(-math.pi / 2)


def test_phase_at_bare_resonance(params):
    x = 2 * params.chi / params.kappa
    assert phase(params.omega_r, 1, params) == pytest.approx(2 * math.atan(x))
    assert phase(params.omega_r, -1, params) == pytest.approx(-2 * math.atan(x))
    p0 = params.with_chi(0.0)
    assert phase(p0.omega_r, 1, p0) == phase(p0.omega_r, -1, p0) == 0.0


def test_phase_branches_are_shifted_copies():
    kappa, chi = 2 * math.pi * 52e6, 2 * math.pi * 36e6
    d = np.linspace(-10 * kappa, 10 * kappa, 2001)
    assert np.allclose(phase_at_detuning(d, 1, kappa, chi), phase_at_detuning(d + 2 * chi, -1, kappa, chi))


def test_phase_matches_reflection_argument(params):
    d = np.linspace(-0.4 * KAPPA, 0.4 * KAPPA, 101)
    for s in (1, -1):
        r = reflection(params.omega_r + d, s, params)
        assert np.allclose(np.angle(r), phase(params.omega_r + d, s, params), atol=1e-12)


def test_group_delay(params):
    assert group_delay(params.with_chi(0.0)) == pytest.approx(4 / KAPPA)
    assert group_delay(params.with_chi_over_kappa(1.215)) == pytest.approx(4 / (KAPPA * (1 + 2.43**2)))
    h = 1e-3 * KAPPA
    for s in (1, -1):
        fd = (phase(params.omega_r + h, s, params) - phase(params.omega_r - h, s, params)) / (2 * h)
        assert fd == pytest.approx(group_delay(params), rel=1e-6)


def test_steady_state_photons(params):
    p = params.with_chi_over_kappa(2.5)
    assert steady_state_photons(32.5 * KAPPA, p, 1) == pytest.approx(5.0)
    assert steady_state_photons(32.5 * KAPPA, p, -1) == pytest.approx(5.0)
    assert steady_state_photons(0.0, p, 1) == 0.0
    assert steady_state_photons(32.5 * KAPPA, params.with_chi_over_kappa(1e6), 1) < 1e-9
    with pytest.raises(ValueError):
        steady_state_photons(-1.0, p, 1)


def test_peak_fraction_matches_quadrature(params, pulse60, pulse160):
    # frozen from adaptive quadrature of the cavity-filtered pulse
    assert peak_photon_fraction(pulse60, params) == pytest.approx(0.245817484, rel=1e-3)
    assert peak_photon_fraction(pulse160, params) == pytest.approx(0.0761561280, rel=1e-3)


def test_pulsed_photons_linear_and_positive(params, pulse60):
    one = pulsed_photons(pulse60.with_photons(3.0), 1.0, params, 1)
    two = pulsed_photons(pulse60.with_photons(3.0), 2.0, params, 1)
    assert np.all(one.n_bar >= 0)
    assert np.allclose(two.n_bar, 2 * one.n_bar)
    zero = pulsed_photons(pulse60.with_photons(0.0), 5.0, params, 1)
    assert np.all(zero.n_bar == 0)
    assert one.n_crit_ref == pytest.approx(params.n_crit)


def test_pulsed_photons_both_branches_agree(params, pulse60):
    a = pulsed_photons(pulse60.with_photons(9.0), 1.0, params, 1)
    b = pulsed_photons(pulse60.with_photons(9.0), 1.0, params, -1)
    assert np.allclose(a.n_bar, b.n_bar, rtol=1e-9, atol=1e-12)


def test_peak_lags_pulse_centre(params, pulse60):
    occ = pulsed_photons(pulse60.with_photons(9.0), 1.0, params.with_chi_over_kappa(1.215), 1)
    assert 0 < occ.t_max < 2 / KAPPA
    # frozen from quadrature: peak at 14.5 ns with 2.196 photons
    assert occ.t_max == pytest.approx(14.506e-9, abs=0.1e-9)
    assert occ.n_max == pytest.approx(2.19604772, rel=2e-3)


def test_fast_cavity_follows_pulse(params):
    # kappa -> infinity: kappa n(t) / 4 tends to the incident intensity
    pulse = PulseSpec.from_duration(60e-9, 9.0)
    fast = SystemParams(params.omega_r, params.omega_q, params.g, 400 * KAPPA, 0.0)
    t = np.linspace(-130e-9, 130e-9, 1001)
    occ = pulsed_photons(pulse, 1.0, fast, 1, time_grid=t)
    target = np.abs(incident_envelope(pulse, t)) ** 2
    assert np.max(np.abs(fast.kappa * occ.n_bar / 4 - target)) < 2e-2 * target.max()


def test_emitted_photons_parseval(params, pulse60):
    # kappa int n dt = n kappa int |f h|^2 dw: not the pulse photon number
    pulse = pulse60.with_photons(9.0)
    occ = pulsed_photons(pulse, 1.0, params, 1, time_grid=np.linspace(-1e-6, 1.2e-6, 8001))

    def integrand(d):
        return abs(cavity_filter(d, 1, params) * pulse.envelope(d)) ** 2

    expect = 9.0 * KAPPA * quad(integrand, -12 * pulse.W, 12 * pulse.W, points=[-params.chi], limit=200)[0]
    assert occ.emitted_photons == pytest.approx(expect, rel=1e-3)


def test_reflected_pulse_keeps_its_norm(params, pulse60):
    pulse = pulse60.with_photons(9.0)
    t = np.linspace(-1e-6, 1.2e-6, 8001)
    out = transmitted_envelope(pulse, params, 1, t)
    assert np.trapezoid(np.abs(out) ** 2, t) == pytest.approx(9.0, rel=1e-4)


def test_narrowband_pulse_is_delayed_copy(params):
    pulse = PulseSpec(0.01 * KAPPA, 4.0)
    tau = group_delay(params)
    phi0 = phase(params.omega_r, 1, params)
    t = np.linspace(-6 / pulse.W, 6 / pulse.W, 2001)
    out = transmitted_envelope(pulse, params, 1, t)
    ref = np.exp(1j * phi0) * incident_envelope(pulse, t - tau)
    err = np.sqrt(np.trapezoid(np.abs(out - ref) ** 2, t) / np.trapezoid(np.abs(ref) ** 2, t))
    assert err < 1e-3


def test_short_time_grid_rejected(params, pulse60):
    with pytest.raises(GridError):
        pulsed_photons(pulse60.with_photons(1.0), 1.0, params, 1, time_grid=np.linspace(-10e-9, 10e-9, 11))


def test_invalid_sign_rejected(params, pulse60):
    with pytest.raises(ValueError):
        pulsed_photons(pulse60.with_photons(1.0), 1.0, params, 0)
