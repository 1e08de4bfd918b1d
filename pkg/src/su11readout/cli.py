"""Command-line entry point: ``su11readout <command> [--config FILE] [--out FILE]``.

Every command writes CSV: a schema comment line, a header row, then data
rows with floats at 9 significant digits. Exit codes are 0 (ok),
2 (configuration error), 3 (infeasible photon cap) and 4 (internal
consistency failure).
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import math
import sys
from importlib import resources

import numpy as np

from .cavity import GridError, default_time_grid, pulsed_photons
from .config import ConfigError, RunConfig, defaults_text, load_config
from .homodyne import NoiseConsistencyError, block_weights, homodyne_statistics, p_error
from .multimode import ChainError, FrequencyGrid, monte_carlo_homodyne
from .params import db_to_linear, linear_to_db
from .scenarios import (InfeasibleError, compose_chain, error_vs_chi, error_vs_time, max_feasible_photons,
                        optimize_n_pulse, parallel_map, simulate, solve_g1, steady_state_snr)
from .singlemode import SchemeKind, UnequalNoiseError, phase_from_ratio

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_CONSISTENCY = 0, 2, 3, 4
PRESETS = ("fig4a", "fig5", "fig6a", "fig7b", "fig8")


class ConsistencyError(RuntimeError):
    pass


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "%.9g" % v
    return str(v)


def write_csv(stream, table, header, rows):
    stream.write(f"# su11readout-csv v{SCHEMA_VERSION} {table}\n")
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])


# -- commands -----------------------------------------------------------------

def _g1(cfg: RunConfig, kind, n_pulse, pulse):
    if kind in (SchemeKind.COHERENT_PA, SchemeKind.COHERENT_DPA):
        return 1.0
    if cfg.g1_db is not None:
        return db_to_linear(cfg.g1_db)
    return solve_g1(n_pulse, cfg.constraint, pulse, cfg.params, kind)


def _n_pulse(cfg: RunConfig, kind, threads):
    pulse = cfg.pulse()
    if cfg.n_pulse is not None:
        return cfg.n_pulse
    if cfg.g1_db is not None and kind not in (SchemeKind.COHERENT_PA, SchemeKind.COHERENT_DPA):
        # fixed gain: fill the cavity to the cap
        return max_feasible_photons(cfg.constraint, pulse, cfg.params) / db_to_linear(cfg.g1_db)
    return optimize_n_pulse(kind, cfg.constraint, pulse, cfg.params, cfg.t_m_factor, threads=threads).n_pulse


def cmd_single_mode(cfg: RunConfig, threads):
    if cfg.sweep_axis != "two_chi_over_kappa":
        raise ConfigError("single-mode sweeps need axis = two_chi_over_kappa")
    hemt = cfg.constraint.hemt()
    rows = []
    for kind in cfg.schemes:
        if cfg.g1_db is None and kind not in (SchemeKind.COHERENT_PA, SchemeKind.COHERENT_DPA):
            raise ConfigError("single-mode runs need an explicit g1_db")
        G1 = 1.0 if cfg.g1_db is None else db_to_linear(cfg.g1_db)
        for x in cfg.sweep_values:
            phi = float(phase_from_ratio(x))
            s = steady_state_snr(kind, cfg.n_in[kind], phi, G1, cfg.constraint.G2, hemt, cfg.phases)
            rows.append((kind.value, float(x), phi, s, float(p_error(s, cfg.constraint.eta))))
    return "single-mode", ["scheme", "two_chi_over_kappa", "phi", "snr", "p_error"], rows


def _run_for(cfg, kind, threads):
    n = _n_pulse(cfg, kind, threads)
    pulse = cfg.pulse(n)
    G1 = _g1(cfg, kind, n, pulse)
    grid = FrequencyGrid.for_pulse(pulse, cfg.params, **cfg.grid_kwargs())
    return simulate(kind, n, pulse, cfg.constraint, cfg.params, G1=G1, grid=grid, with_ideal=True,
                    phases=cfg.phases)


def cmd_multimode(cfg: RunConfig, threads):
    axis = cfg.sweep_axis
    if axis == "t_m_over_t_pulse":
        if np.any(cfg.sweep_values < 0):
            raise ConfigError("[sweep] window lengths must be >= 0")
        runs = [_run_for(cfg, k, threads) for k in cfg.schemes]
        rows = error_vs_time(runs, cfg.sweep_values * cfg.t_pulse, threads=threads,
                             include_cross=cfg.include_cross, t0=cfg.window_offset)
        header = ["t_m_ns", "scheme", "mean_plus", "mean_minus", "std", "snr", "p_error",
                  "p_error_ideal_postamp", "n_max_cavity", "g1_db"]
        out = [(r.T_m * 1e9, r.kind.value, r.mean_plus, r.mean_minus, r.std, r.snr, r.p_error,
                r.p_error_ideal, r.n_max_cavity, r.g1_db) for r in rows]
        return "multimode", header, out
    if axis == "two_chi_over_kappa":
        if cfg.schemes != (SchemeKind.COHERENT_PA,):
            raise ConfigError("the 2chi/kappa multimode sweep is defined for scheme = coherent_pa")
        if cfg.n_pulse is None:
            raise ConfigError("the 2chi/kappa multimode sweep needs a fixed n_pulse")
        w_over_kappa = cfg.pulse().W / cfg.params.kappa
        scan = error_vs_chi(w_over_kappa, cfg.sweep_values, cfg.params, cfg.n_pulse, cfg.t_m_factor,
                            cfg.constraint, threads)
        rows = [("coherent_pa", w_over_kappa, float(x), s, p)
                for x, s, p in zip(scan.two_chi_over_kappa, scan.snr, scan.p_error)]
        return "multimode-chi", ["scheme", "w_over_kappa", "two_chi_over_kappa", "snr", "p_error"], rows
    if axis == "n_pulse":
        T_m = cfg.t_m_factor * cfg.t_pulse

        def point(args):
            kind, n = args
            pulse = cfg.pulse(n)
            G1 = _g1(cfg, kind, n, pulse)
            run = simulate(kind, n, pulse, cfg.constraint, cfg.params, G1=G1, phases=cfg.phases)
            s = run.snr(T_m, include_cross=cfg.include_cross, t0=cfg.window_offset)
            return (kind.value, float(n), linear_to_db(G1), s, float(p_error(s, cfg.constraint.eta)))

        items = [(k, n) for k in cfg.schemes for n in cfg.sweep_values]
        rows = parallel_map(point, items, threads)
        return "multimode-n", ["scheme", "n_pulse", "g1_db", "snr", "p_error"], rows
    raise ConfigError(f"multimode does not sweep {axis}")


def cmd_cavity_photons(cfg: RunConfig, threads):
    kind = cfg.schemes[0]
    pulse = cfg.pulse()
    n = cfg.n_pulse if cfg.n_pulse is not None else max_feasible_photons(cfg.constraint, pulse, cfg.params)
    pre_gain = 1.0 if cfg.g1_db is None or kind in (SchemeKind.COHERENT_PA, SchemeKind.COHERENT_DPA) \
        else db_to_linear(cfg.g1_db)
    occ = pulsed_photons(pulse.with_photons(n), pre_gain, cfg.params, cfg.qubit_sign,
                         time_grid=default_time_grid(pulse, cfg.params))
    rows = [(t * 1e9, v) for t, v in zip(occ.t, occ.n_bar)]
    return "cavity-photons", ["t_ns", "n_bar"], rows


def cmd_optimize(cfg: RunConfig, threads):
    rows = []
    for kind in cfg.schemes:
        res = optimize_n_pulse(kind, cfg.constraint, cfg.pulse(), cfg.params, cfg.t_m_factor, threads=threads)
        rows.append((kind.value, cfg.t_pulse * 1e9, res.n_pulse, res.g1_db, res.snr, res.p_error,
                     res.T_m * 1e9, res.method))
    return "optimize", ["scheme", "t_pulse_ns", "n_pulse", "g1_db", "snr", "p_error", "t_m_ns", "method"], rows


def cmd_validate(cfg: RunConfig, threads, seed=0, samples=100_000, blocks=128):
    """Compare the covariance propagation with Monte-Carlo sampled fields."""
    rows, ok = [], True
    T_m = cfg.t_m_factor * cfg.t_pulse
    for kind in cfg.schemes:
        n = _n_pulse(cfg, kind, threads)
        pulse = cfg.pulse(n)
        G1 = _g1(cfg, kind, n, pulse)
        grid = FrequencyGrid.for_pulse(pulse, cfg.params, J=blocks,
                                       half_width=None if cfg.halfwidth_over_kappa is None
                                       else cfg.halfwidth_over_kappa * cfg.params.kappa)
        run = simulate(kind, n, pulse, cfg.constraint, cfg.params, G1=G1, grid=grid, phases=cfg.phases)
        phi = float(phase_from_ratio(2 * cfg.params.chi / cfg.params.kappa))
        chain = compose_chain(kind, G1, cfg.constraint.G2, phi, cfg.constraint.hemt(), cfg.phases)
        for out in run.outputs:
            state = out.state
            mean, var = homodyne_statistics(state, T_m, t0=cfg.window_offset, tail=False)
            w = block_weights(state, T_m, cfg.window_offset)
            nm = state.n_modes
            mc_mean, mc_var = monte_carlo_homodyne(chain, grid, pulse, out.qubit_sign, cfg.params,
                                                   w[:, :nm], w[:, nm:], n_samples=samples,
                                                   seed=seed + (0 if out.qubit_sign > 0 else 1))
            mean_tol = 3.0 * math.sqrt(var / samples)
            rel = abs(mc_var - var) / var
            good = abs(mc_mean - mean) <= mean_tol and rel <= 0.05
            ok &= good
            rows.append((kind.value, 0 if out.qubit_sign > 0 else 1, mean, mc_mean, mean_tol, var, mc_var,
                         rel, good))
    header = ["scheme", "qubit_state", "mean", "mean_mc", "mean_tol", "var", "var_mc", "var_rel_err", "pass"]
    return "validate", header, rows, ok


# -- argument handling --------------------------------------------------------

def preset_text(name):
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return resources.files("su11readout").joinpath("presets", f"{name}.ini").read_text(encoding="utf-8")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI run configuration")
    common.add_argument("--out", metavar="PATH", help="output CSV (default: stdout)")
    common.add_argument("--threads", type=int, default=1, metavar="N", help="worker threads for sweeps")
    common.add_argument("--print-defaults", action="store_true", help="print the default configuration and exit")

    parser = argparse.ArgumentParser(prog="su11readout", description="Dispersive qubit readout simulator.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("single-mode", parents=[common], help="steady-state SNR against 2chi/kappa")
    sub.add_parser("multimode", parents=[common], help="pulsed simulation against window length")
    sub.add_parser("cavity-photons", parents=[common], help="intracavity photon number against time")
    sub.add_parser("optimize", parents=[common], help="optimal pulse photon number per scheme")
    v = sub.add_parser("validate", parents=[common], help="Monte-Carlo check of the Gaussian propagation")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--samples", type=int, default=100_000)
    p = sub.add_parser("preset", parents=[common], help="run a named figure configuration")
    p.add_argument("name", nargs="?", help=", ".join(PRESETS))
    p.add_argument("--list", action="store_true", help="list presets")
    p.add_argument("--show", action="store_true", help="print the preset configuration instead of running it")
    return parser


COMMANDS = {
    "single-mode": cmd_single_mode,
    "multimode": cmd_multimode,
    "cavity-photons": cmd_cavity_photons,
    "optimize": cmd_optimize,
}


@contextlib.contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def run(argv=None):
    args = build_parser().parse_args(argv)
    if args.print_defaults:
        sys.stdout.write(defaults_text())
        return EXIT_OK
    try:
        if args.command == "preset":
            if args.list:
                sys.stdout.write("\n".join(PRESETS) + "\n")
                return EXIT_OK
            if not args.name:
                raise ConfigError("preset needs a name")
            text = preset_text(args.name)
            if args.show:
                sys.stdout.write(text)
                return EXIT_OK
            cfg = load_config(text=text)
        else:
            overrides = {("run", "command"): args.command}
            cfg = load_config(path=args.config, overrides=overrides)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        ok = True
        if cfg.command == "validate":
            seed = getattr(args, "seed", 0)
            samples = getattr(args, "samples", 100_000)
            table, header, rows, ok = cmd_validate(cfg, args.threads, seed, samples)
        else:
            table, header, rows = COMMANDS[cfg.command](cfg, args.threads)
    except (ConfigError, GridError, ChainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (UnequalNoiseError, NoiseConsistencyError, ConsistencyError) as exc:
        print(f"consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    with _output(args.out) as stream:
        write_csv(stream, table, header, rows)
    if not ok:
        print("consistency failure: Monte-Carlo estimate outside tolerance", file=sys.stderr)
        return EXIT_CONSISTENCY
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":  # pragma: no cover
    main()
