import math

import numpy as np
import pytest

from su11readout.cavity import pulsed_photons
from su11readout.homodyne import block_weights, homodyne_statistics
from su11readout.multimode import DPA, PA, Cavity, FrequencyGrid, Thermal, init_state
from su11readout.params import DomainError, PulseSpec, linear_to_db
from su11readout.scenarios import (ConstraintSpec, InfeasibleError, SweepSpec, compose_chain, error_vs_chi,
                                   error_vs_time, max_feasible_photons, optimize_n_pulse, parallel_map,
                                   peak_fraction, simulate, solve_g1, steady_state_ratio)
from su11readout.singlemode import SchemeKind, phase_from_ratio, scheme_snr

S = SchemeKind
KAPPA = 4e7


def test_solve_g1_examples(params, constraint, pulse60, pulse160):
    assert linear_to_db(solve_g1(19.36, constraint, pulse60, params)) == pytest.approx(0.222, rel=0.1)
    assert linear_to_db(solve_g1(58.98, constraint, pulse160, params)) == pytest.approx(0.431, rel=0.1)


@pytest.mark.parametrize("kind", [S.SU11_PA, S.SU11_DPA, S.SQUEEZE])
@pytest.mark.parametrize("n", [2.0, 8.0, 15.0])
def test_solved_gain_fills_cavity_to_cap(params, constraint, pulse60, kind, n):
    G1 = solve_g1(n, constraint, pulse60, params, kind)
    pre = G1 if kind is S.SU11_PA else math.exp(2 * math.acosh(math.sqrt(G1)))
    occ = pulsed_photons(pulse60.with_photons(n), pre, params, 1)
    assert occ.n_max == pytest.approx(constraint.n_cap, rel=5e-3)


def test_solve_g1_edges(params, constraint, pulse60):
    assert solve_g1(0.0, constraint, pulse60, params) == constraint.g1_max
    n_max = max_feasible_photons(constraint, pulse60, params)
    assert n_max == pytest.approx(5.0 / 0.245817484, rel=1e-3)
    assert solve_g1(n_max, constraint, pulse60, params) == pytest.approx(1.0)
    with pytest.raises(InfeasibleError) as info:
        solve_g1(2 * n_max, constraint, pulse60, params)
    assert info.value.max_n_pulse == pytest.approx(n_max)
    with pytest.raises(ValueError):
        solve_g1(5.0, constraint, pulse60, params, S.COHERENT_PA)


def test_constraint_checks(params):
    with pytest.raises(DomainError):
        ConstraintSpec(n_cap=50.0).check_against(params)
    c = ConstraintSpec.from_db(g2_db=20.0, hemt_db=30.1)
    assert c.G2 == pytest.approx(100.0)
    assert c.hemt() == Thermal(c.hemt_gain, 25.0)
    assert c.ideal_postamp().hemt() is None


def test_compose_chain_layout():
    phi = 1.0
    assert compose_chain(S.COHERENT_PA, 1.0, 100.0, phi).elements == (Cavity(), PA(100.0, 0.0))
    assert compose_chain(S.COHERENT_DPA, 1.0, 100.0, phi).elements == (Cavity(), DPA(100.0, math.pi))
    assert compose_chain(S.SU11_PA, 2.0, 100.0, phi).elements == (PA(2.0, 0.0), Cavity(), PA(100.0, math.pi))
    assert compose_chain(S.SU11_PA, 2.0, 100.0, 2.0).elements[2] == PA(100.0, 0.0)
    assert compose_chain(S.SU11_DPA, 2.0, 100.0, phi).elements == (DPA(2.0, 0.0), Cavity(), DPA(100.0, math.pi))
    assert compose_chain(S.SQUEEZE, 2.0, 100.0, 0.5).elements[0] == DPA(2.0, 0.0)
    assert compose_chain(S.SQUEEZE, 2.0, 100.0, 1.0).elements[0] == DPA(2.0, math.pi)
    hemt = Thermal(1000.0, 25.0)
    assert compose_chain(S.SU11_PA, 2.0, 100.0, phi, hemt).elements[-1] == hemt


def test_optimum_is_local_maximum(params, constraint, pulse60):
    opt = optimize_n_pulse(S.SU11_PA, constraint, pulse60, params)
    T_m = 1.2 * pulse60.T_pulse
    for f in (0.98, 1.02):
        assert simulate(S.SU11_PA, f * opt.n_pulse, pulse60, constraint, params).snr(T_m) <= opt.snr
    assert opt.G1 == pytest.approx(solve_g1(opt.n_pulse, constraint, pulse60, params))
    assert opt.method in ("golden", "dense")


def test_coherent_optimum_saturates_cap(params, constraint, pulse60):
    opt = optimize_n_pulse(S.COHERENT_PA, constraint, pulse60, params)
    assert opt.method == "cap"
    assert opt.n_pulse == pytest.approx(max_feasible_photons(constraint, pulse60, params))
    assert opt.G1 == 1.0


def test_cavity_photons_respect_cap(params, constraint, pulse60):
    opt = optimize_n_pulse(S.SU11_PA, constraint, pulse60, params)
    run = simulate(S.SU11_PA, opt.n_pulse, pulse60, constraint, params)
    assert run.n_max_cavity <= 1.005 * constraint.n_cap
    occ = pulsed_photons(pulse60.with_photons(opt.n_pulse), run.G1, params, 1)
    assert occ.n_max <= 1.005 * constraint.n_cap


@pytest.mark.parametrize("kind", list(S))
def test_narrowband_limit_matches_single_mode(params, kind):
    pulse = PulseSpec(0.01 * KAPPA, 4.0)
    grid = FrequencyGrid.for_pulse(pulse, params)
    T_m = 1.2 * pulse.T_pulse
    # photons carried by the window mode: |<u, alpha>|^2 with u the unit-norm window
    st = init_state(grid, pulse, two_arm=False)
    w = block_weights(st, T_m)
    vac = homodyne_statistics(init_state(grid, pulse.with_photons(0.0), two_arm=False), T_m)[1]
    n_eff = float(np.sum(w[:, 2:] * st.mean[:, :2])) ** 2 / (4 * vac)
    constraint = ConstraintSpec(include_hemt=False)
    run = simulate(kind, 4.0, pulse, constraint, params, G1=2.0, grid=grid)
    phi = float(phase_from_ratio(2 * params.chi / params.kappa))
    assert run.snr(T_m) == pytest.approx(scheme_snr(kind, n_eff, phi, 2.0, constraint.G2), rel=0.02)


def test_error_vs_time_shape(params, constraint, pulse60):
    run = simulate(S.SU11_PA, 15.0, pulse60, constraint, params, with_ideal=True)
    T = np.array([0.0, 0.3, 1.0, 1.5, 3.0, 6.0]) * pulse60.T_pulse
    rows = error_vs_time([run], T)
    p = np.array([r.p_error for r in rows])
    assert p[0] == 0.5
    k = int(np.argmin(p))
    assert 0 < k < len(T) - 1
    assert np.all(np.diff(p[k:]) > 0) and p[-1] < 0.5
    assert all(r.p_error_ideal <= r.p_error for r in rows)


def test_thread_count_does_not_change_results(params):
    x = np.linspace(0.8, 1.6, 5)
    a = error_vs_chi(0.05, x, params, threads=1)
    b = error_vs_chi(0.05, x, params, threads=4)
    assert np.array_equal(a.p_error, b.p_error)
    assert parallel_map(lambda v: v * v, range(20), threads=4) == [v * v for v in range(20)]


def test_steady_state_ratio_trend():
    assert steady_state_ratio(1.0, 2.43) == pytest.approx(1.0)
    assert steady_state_ratio(1.2, 2.43) > steady_state_ratio(1.1, 2.43) > 1.0


def test_peak_fraction_is_cached(params, pulse60):
    assert peak_fraction(pulse60.with_photons(3.0), params) == peak_fraction(pulse60, params)


def test_sweep_spec_validation():
    SweepSpec("T_m", np.array([1.0, 2.0]), ("su11_pa",))
    with pytest.raises(ValueError):
        SweepSpec("bogus", np.array([1.0]))
    with pytest.raises(ValueError):
        SweepSpec("T_m", np.array([]))
    with pytest.raises(ValueError):
        SweepSpec("T_m", np.array([1.0]), fixed={"T_m": 1.0})
