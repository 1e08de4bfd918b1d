"""Acceptance criteria, one printed PASS/FAIL line each.

Run directly with ``python3 tests/test_acceptance.py`` or as part of the
normal suite; the lines are repeated in the terminal summary.
"""
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from su11readout.cavity import pulsed_photons
from su11readout.homodyne import block_weights, homodyne_statistics
from su11readout.multimode import (DPA, PA, Cavity, ChainDescriptor, FrequencyGrid, Thermal, element_symplectic,
                                   init_state, monte_carlo_homodyne, run_chain, symplectic_form)
from su11readout.params import PulseSpec, added_noise_number, linear_to_db
from su11readout.scenarios import (ConstraintSpec, error_vs_chi, error_vs_time, optimize_n_pulse,
                                   refine_chi_argmin, simulate, solve_g1, steady_state_ratio)
from su11readout.singlemode import (SchemeKind, SingleModeInput, phase_from_ratio, scheme_snr, snr_coherent_pa,
                                    snr_squeeze, snr_su11_dpa, snr_su11_pa, su11_pa_pair)

S = SchemeKind


def record(name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def check(name, ok, detail):
    assert record(name, ok, detail), detail


def test_c1_critical_photon_number(params):
    v = params.n_crit
    check("1 n_crit", abs(v - 41.53) <= 0.02, f"n_crit = {v:.4f} (target 41.53 +- 0.02)")


def test_c2_pulsed_cavity_occupation(params):
    t0 = time.perf_counter()
    p = params.with_chi_over_kappa(1.215)
    occ = pulsed_photons(PulseSpec.from_duration(60e-9, 9.0), 1.0, p, 1)
    dt = time.perf_counter() - t0
    in_band = 3.5 <= occ.n_max <= 5.0
    late = 0.0 < occ.t_max < 2.0 / p.kappa
    check("2 pulsed occupation", in_band and late and dt < 1.0,
          f"max n = {occ.n_max:.4f} (band [3.5, 5]), peak at {occ.t_max * 1e9:.2f} ns "
          f"(0 < t < {2e9 / p.kappa:.0f} ns: {late}), {dt:.2f} s")


@pytest.mark.parametrize("W, target", [(0.01, 1.0), (0.3, 1.4)])
def test_c3_error_vs_chi_argmin(params, W, target):
    t0 = time.perf_counter()
    scan = error_vs_chi(W, np.linspace(0.5, 2.5, 21), params, threads=4)
    x = refine_chi_argmin(scan, W, params)
    dt = time.perf_counter() - t0
    check(f"3 argmin at W = {W} kappa", abs(x - target) <= 0.1 and dt < 30,
          f"argmin 2chi/kappa = {x:.4f} (target {target} +- 0.1), 4 atan(x) = {4 * math.atan(x):.4f} rad, "
          f"{dt:.1f} s")


@pytest.fixture(scope="module")
def fig7b(params, constraint, pulse60):
    t0 = time.perf_counter()
    su = optimize_n_pulse(S.SU11_PA, constraint, pulse60, params)
    co = optimize_n_pulse(S.COHERENT_PA, constraint, pulse60, params)
    runs = [simulate(o.kind, o.n_pulse, pulse60, constraint, params, with_ideal=True) for o in (su, co)]
    T = np.linspace(0.05, 4.0, 80) * pulse60.T_pulse
    rows = error_vs_time(runs, T, threads=2)
    out = {"su": su, "dt": None}
    for kind, key in ((S.SU11_PA, "su"), (S.COHERENT_PA, "co")):
        out[key + "_min"] = min(r.p_error for r in rows if r.kind is kind)
        out[key + "_ideal"] = min(r.p_error_ideal for r in rows if r.kind is kind)
    out["dt"] = time.perf_counter() - t0
    return out


def test_c4a_optimal_photons(fig7b):
    n = fig7b["su"].n_pulse
    check("4a n* at 60 ns", abs(n / 19.36 - 1) <= 0.05 and fig7b["dt"] < 120,
          f"n* = {n:.3f} (19.36 +- 5%), G1 = {fig7b['su'].g1_db:.4f} dB, {fig7b['dt']:.1f} s")


def test_c4b_min_error_with_hemt(fig7b):
    v = fig7b["su_min"]
    check("4b min P with HEMT", 3.5e-4 <= v <= 1.4e-3, f"min P = {v:.4e} (band [3.5e-4, 1.4e-3])")


def test_c4c_min_error_ideal(fig7b):
    v = fig7b["su_ideal"]
    check("4c min P ideal post-amp", 1.5e-4 <= v <= 6e-4, f"min P = {v:.4e} (band [1.5e-4, 6e-4])")


def test_c4d_advantage_over_coherent(fig7b):
    a, b = fig7b["su_min"], fig7b["co_min"]
    check("4d SU11 <= coherent / 2", a <= 0.5 * b, f"SU11 {a:.4e} vs coherent {b:.4e}, ratio {a / b:.3f}")


def test_c5a_optimal_photons_160(params, constraint, pulse160):
    o = optimize_n_pulse(S.SU11_PA, constraint, pulse160, params)
    check("5a n* at 160 ns", abs(o.n_pulse / 58.98 - 1) <= 0.05, f"n* = {o.n_pulse:.3f} (58.98 +- 5%)")


def test_c5b_gain_at_160(params, constraint, pulse160):
    g = linear_to_db(solve_g1(58.98, constraint, pulse160, params))
    check("5b G1 at n = 58.98", abs(g / 0.431 - 1) <= 0.1, f"G1 = {g:.4f} dB (0.431 +- 10%)")


def test_c5c_steady_state_ratio(params, constraint, pulse160):
    o = optimize_n_pulse(S.SU11_PA, constraint, pulse160, params)
    r = steady_state_ratio(o.G1, 2 * params.chi / params.kappa)
    check("5c steady-state ratio", abs(r - 1.15) <= 0.05, f"ratio = {r:.4f} at G1 = {o.g1_db:.4f} dB (1.15 +- 0.05)")


def test_c6_closed_form_identities():
    rng = np.random.default_rng(0)
    n = rng.uniform(0.1, 50, 200)
    phi = rng.uniform(-math.pi, math.pi, 200)
    G2 = rng.uniform(1, 1e3, 200)
    A2 = added_noise_number(G2)
    errs = {
        "coherent G=1": np.abs(snr_coherent_pa(n, phi, 1.0) / (2 * np.sqrt(n) * np.abs(np.sin(phi))) - 1),
        "su11_pa r1=0": np.abs(snr_su11_pa(n, phi, 0.0, A2) / snr_coherent_pa(n, phi, G2) - 1),
        "su11_dpa pi/2": np.abs(snr_su11_dpa(n, math.pi / 2, rng.uniform(0, 3, 200)) / (2 * np.sqrt(n)) - 1),
        "squeeze G1=1": np.abs(snr_squeeze(n, phi, 1.0, A2) / snr_coherent_pa(n, phi, G2) - 1),
    }
    sig = []
    for k in range(50):
        r1, r2 = rng.uniform(0, 2, 2)
        base = su11_pa_pair(SingleModeInput(n[k], phi[k], r1, r2, 0.0, 0.0)).signal
        th = rng.uniform(-3, 3, 2)
        sig.append(abs(su11_pa_pair(SingleModeInput(n[k], phi[k], r1, r2, *th)).signal / base - 1))
    errs["signal vs pump phases"] = np.array(sig)
    worst = {k: float(v.max()) for k, v in errs.items()}
    check("6 closed-form identities", all(v <= 1e-12 for v in worst.values()),
          ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))


@pytest.fixture(scope="module")
def small(params):
    pulse = PulseSpec.from_duration(60e-9, 3.0)
    return pulse, FrequencyGrid.for_pulse(pulse, params, J=64)


def test_c7a_symplectic(params, small):
    pulse, grid = small
    state = init_state(grid, pulse)
    Om = symplectic_form(state.n_modes)
    worst = 0.0
    for G in (1.0, 1.2, 10.0, 100.0):
        for theta in (0.0, 1.1, math.pi):
            for e in (PA(G, theta), DPA(G, theta), DPA(G, theta, "idler"), Cavity()):
                Sm = element_symplectic(e, state, 1, params)
                err = np.abs(Sm @ Om @ np.swapaxes(Sm, -1, -2) - Om).max() / max(1.0, np.abs(Sm).max() ** 2)
                worst = max(worst, err)
    check("7a symplecticity", worst <= 1e-12, f"max relative |S Om S^T - Om| = {worst:.2e}")


def test_c7b_uncertainty(params, small):
    pulse, grid = small
    worst = math.inf
    for elements in ((PA(1.5, 0.0), Cavity(), PA(100.0, math.pi), Thermal(10**3.01, 25.0)),
                     (DPA(3.0, 0.0), Cavity(), DPA(100.0, math.pi), Thermal(10**3.01, 25.0))):
        states = []
        run_chain(ChainDescriptor(elements), grid, pulse, 1, params, callback=lambda e, s: states.append(s))
        for s in states:
            eig = np.linalg.eigvalsh(s.cov + 0.5j * symplectic_form(s.n_modes))
            worst = min(worst, float(eig.min()) / max(1.0, float(np.abs(s.cov).max())))
    check("7b uncertainty", worst >= -1e-9, f"min eigenvalue of V + i Om / 2 (relative) = {worst:.2e}")


def test_c7c_monte_carlo(params, small):
    pulse, grid = small
    N = 100_000
    lines, ok = [], True
    for elements in ((PA(2.0, 0.0), Cavity(), PA(100.0, math.pi), Thermal(50.0, 3.0)),
                     (DPA(3.0, 0.0), Cavity(), DPA(20.0, math.pi))):
        chain = ChainDescriptor(elements)
        out = run_chain(chain, grid, pulse, 1, params).state
        mean, var = homodyne_statistics(out, 72e-9, tail=False)
        w = block_weights(out, 72e-9)
        n = out.n_modes
        mc_mean, mc_var = monte_carlo_homodyne(chain, grid, pulse, 1, params, w[:, :n], w[:, n:],
                                               n_samples=N, seed=11)
        z = abs(mc_mean - mean) / math.sqrt(var / N)
        rv = abs(mc_var / var - 1)
        ok &= z <= 3 and rv <= 0.05
        lines.append(f"mean {z:.2f} sigma/sqrtN, var {100 * rv:.2f}%")
    check("7c Monte Carlo (1e5 samples)", ok, "; ".join(lines))


def test_c7d_narrowband_limit(params):
    pulse = PulseSpec(0.01 * params.kappa, 4.0)
    grid = FrequencyGrid.for_pulse(pulse, params)
    T_m = 1.2 * pulse.T_pulse
    st = init_state(grid, pulse, two_arm=False)
    w = block_weights(st, T_m)
    vac = homodyne_statistics(init_state(grid, pulse.with_photons(0.0), two_arm=False), T_m)[1]
    n_eff = float(np.sum(w[:, 2:] * st.mean[:, :2])) ** 2 / (4 * vac)
    c = ConstraintSpec(include_hemt=False)
    phi = float(phase_from_ratio(2 * params.chi / params.kappa))
    worst = 0.0
    for kind in S:
        multi = simulate(kind, 4.0, pulse, c, params, G1=2.0, grid=grid).snr(T_m)
        worst = max(worst, abs(multi / scheme_snr(kind, n_eff, phi, 2.0, c.G2) - 1))
    check("7d narrowband limit", worst <= 0.02, f"max relative SNR gap over all schemes = {100 * worst:.3f}%")


def test_c7e_grid_refinement(params, constraint, pulse60):
    o = optimize_n_pulse(S.SU11_PA, constraint, pulse60, params)
    pulse = pulse60.with_photons(o.n_pulse)
    grid = FrequencyGrid.for_pulse(pulse, params)
    T_m = 1.2 * pulse60.T_pulse
    a = simulate(S.SU11_PA, o.n_pulse, pulse60, constraint, params, G1=o.G1, grid=grid).snr(T_m)
    b = simulate(S.SU11_PA, o.n_pulse, pulse60, constraint, params, G1=o.G1, grid=grid.refined(2)).snr(T_m)
    check("7e grid refinement", abs(b / a - 1) <= 5e-3, f"relative SNR change on halving d_omega = {abs(b / a - 1):.2e}")


def test_c7f_emitted_photons(params):
    p = params.with_chi_over_kappa(1.215)
    occ = pulsed_photons(PulseSpec.from_duration(60e-9, 9.0), 1.0, p, 1)
    v = occ.emitted_photons
    check("7f kappa int n dt vs n_cav", abs(v / 9.0 - 1) <= 0.01, f"kappa int n dt = {v:.4f} vs n_cav = 9 "
          f"({100 * (v / 9 - 1):+.1f}%)")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
