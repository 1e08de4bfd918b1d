"""INI run configuration for the command-line tools.

Every key carries its unit in the name (``_hz``, ``_ns``, ``_db``, ``_rad``,
``_per_ns``, ``_over_*``) or is dimensionless by definition (``eta``,
``n_pulse``, ``n_cap``). Unknown sections and keys are rejected.
"""

from __future__ import annotations

import configparser
import io
import math
import re
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .cavity import group_delay
from .params import DomainError, PulseSpec, SystemParams, db_to_linear
from .scenarios import ConstraintSpec
from .singlemode import SchemeKind


class ConfigError(ValueError):
    pass


DEFAULTS: Dict[str, Dict[str, str]] = {
    "run": {"command": "multimode"},
    "system": {
        "omega_r_hz": "6.789e9",
        "omega_q_hz": "5.5e9",
        "g_hz": "100e6",
        "kappa_per_ns": "0.04",
        "chi_hz": "7.7e6",
        "e_c_hz": "none",
    },
    "pulse": {
        "t_pulse_ns": "60",
        "n_pulse": "auto",
        "carrier": "resonance",
        "carrier_hz": "none",
        "qubit_state": "0",
    },
    "chain": {
        "scheme": "su11_pa, coherent_pa",
        "g1_db": "auto",
        "g2_db": "20",
        "theta_rule": "auto",
        "theta1_rad": "0",
        "theta2_rad": "0",
    },
    "constraint": {"n_cap": "5"},
    "detect": {
        "t_m_over_t_pulse": "1.2",
        "eta": "0.5",
        "hemt": "hemt",
        "hemt_g_db": "30.1",
        "hemt_n_bar_t": "25",
        "include_cross_cov": "true",
        "window_offset_ns": "0",
    },
    "grid": {
        "halfwidth_rule": "default",
        "halfwidth_over_kappa": "8",
        "points_per_width": "12",
    },
    "single_mode": {"n_in": "1"},
    "sweep": {"axis": "t_m_over_t_pulse", "from": "0.2", "to": "4", "steps": "39"},
}

SWEEP_AXES = ("two_chi_over_kappa", "w_over_kappa", "t_m_over_t_pulse", "n_pulse")
_SCHEME_KEY = re.compile(r"^n_in_(" + "|".join(k.value for k in SchemeKind) + r")$")

DEFAULTS_DOC = """\
; su11readout run configuration. Units are part of every key name.
; [system]  chi_hz = derive uses the dispersive series (or the transmon form if e_c_hz is set).
; [pulse]   n_pulse = auto optimises the photon number (coherent schemes saturate the cap).
;           carrier = resonance | explicit (then carrier_hz is the probe frequency).
; [chain]   scheme is a comma list of coherent_pa, coherent_dpa, squeeze, su11_pa, su11_dpa.
;           g1_db = auto solves the photon cap. theta_rule = auto | explicit.
; [detect]  hemt = hemt | ideal. window_offset_ns shifts the integration window
;           (a number, or group_delay to follow the pulse through the cavity).
; [grid]    halfwidth_rule = default (max(6W, 8 kappa)) | explicit (halfwidth_over_kappa).
; [single_mode] n_in is the photon number (or flux in units of kappa) per scheme;
;           n_in_<scheme> overrides it for one scheme.
; [sweep]   axis = two_chi_over_kappa | w_over_kappa | t_m_over_t_pulse | n_pulse.
"""


def defaults_text():
    cp = configparser.ConfigParser()
    cp.read_dict(DEFAULTS)
    buf = io.StringIO()
    cp.write(buf)
    return DEFAULTS_DOC + "\n" + buf.getvalue()


def _float(section, key, value):
    try:
        v = float(value)
    except ValueError:
        raise ConfigError(f"[{section}] {key} = {value!r} is not a number") from None
    if not math.isfinite(v):
        raise ConfigError(f"[{section}] {key} must be finite")
    return v


def _optional_float(section, key, value):
    return None if value.strip().lower() in ("none", "") else _float(section, key, value)


def _bool(section, key, value):
    v = value.strip().lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"[{section}] {key} = {value!r} is not a boolean")


def _choice(section, key, value, options):
    v = value.strip().lower()
    if v not in options:
        raise ConfigError(f"[{section}] {key} must be one of {', '.join(options)}, got {value!r}")
    return v


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: SystemParams
    t_pulse: float
    n_pulse: Optional[float]
    omega_c: Optional[float]
    qubit_sign: int
    schemes: Tuple[SchemeKind, ...]
    g1_db: Optional[float]
    phases: Optional[Tuple[float, float]]
    constraint: ConstraintSpec
    t_m_factor: float
    include_cross: bool
    window_offset: float
    halfwidth_over_kappa: Optional[float]
    points_per_width: int
    n_in: Dict[SchemeKind, float]
    sweep_axis: str
    sweep_values: np.ndarray

    def pulse(self, n_pulse=0.0):
        return PulseSpec.from_duration(self.t_pulse, n_pulse, self.omega_c)

    def grid_kwargs(self):
        kw = {"points_per_width": self.points_per_width}
        if self.halfwidth_over_kappa is not None:
            kw["half_width"] = self.halfwidth_over_kappa * self.params.kappa
        return kw


def load_config(text=None, path=None, overrides=None):
    """Parse INI text (or a file) on top of the defaults into a :class:`RunConfig`."""
    user = configparser.ConfigParser(interpolation=None)
    try:
        if path is not None:
            with open(path, encoding="utf-8") as fh:
                user.read_file(fh, source=str(path))
        elif text is not None:
            user.read_string(text)
    except (configparser.Error, OSError) as exc:
        raise ConfigError(str(exc)) from None
    merged = {s: dict(v) for s, v in DEFAULTS.items()}
    for section in user.sections():
        if section not in DEFAULTS:
            raise ConfigError(f"unknown section [{section}]")
        for key, value in user.items(section):
            if key not in DEFAULTS[section] and not (section == "single_mode" and _SCHEME_KEY.match(key)):
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            merged[section][key] = value
    for (section, key), value in (overrides or {}).items():
        merged[section][key] = value
    return _build(merged)


def _window_offset(value, params):
    if value.strip().lower() == "group_delay":
        return group_delay(params)
    return _float("detect", "window_offset_ns", value) * 1e-9


def _build(c):
    s = c["system"]
    chi_raw = s["chi_hz"].strip().lower()
    e_c = _optional_float("system", "e_c_hz", s["e_c_hz"])
    kappa = _float("system", "kappa_per_ns", s["kappa_per_ns"]) * 1e9
    try:
        params = SystemParams.from_hz(
            _float("system", "omega_r_hz", s["omega_r_hz"]),
            _float("system", "omega_q_hz", s["omega_q_hz"]),
            _float("system", "g_hz", s["g_hz"]),
            kappa,
            chi_hz=None if chi_raw == "derive" else _float("system", "chi_hz", s["chi_hz"]),
            e_c_hz=e_c,
        )
    except (DomainError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"[system] {exc}") from None

    p = c["pulse"]
    t_pulse = _float("pulse", "t_pulse_ns", p["t_pulse_ns"]) * 1e-9
    if t_pulse <= 0:
        raise ConfigError("[pulse] t_pulse_ns must be positive")
    n_pulse = None if p["n_pulse"].strip().lower() == "auto" else _float("pulse", "n_pulse", p["n_pulse"])
    if n_pulse is not None and n_pulse < 0:
        raise ConfigError("[pulse] n_pulse must be >= 0")
    carrier = _choice("pulse", "carrier", p["carrier"], ("resonance", "explicit"))
    omega_c = None
    if carrier == "explicit":
        hz = _optional_float("pulse", "carrier_hz", p["carrier_hz"])
        if hz is None:
            raise ConfigError("[pulse] carrier = explicit needs carrier_hz")
        omega_c = 2 * math.pi * hz
    qs = _choice("pulse", "qubit_state", p["qubit_state"], ("0", "1"))

    ch = c["chain"]
    names = [x.strip() for x in ch["scheme"].split(",") if x.strip()]
    if not names:
        raise ConfigError("[chain] scheme list is empty")
    try:
        schemes = tuple(SchemeKind.parse(x) for x in names)
    except ValueError as exc:
        raise ConfigError(f"[chain] {exc}") from None
    g1_db = None if ch["g1_db"].strip().lower() == "auto" else _float("chain", "g1_db", ch["g1_db"])
    if g1_db is not None and g1_db < 0:
        raise ConfigError("[chain] g1_db must be >= 0")
    g2_db = _float("chain", "g2_db", ch["g2_db"])
    if g2_db < 0:
        raise ConfigError("[chain] g2_db must be >= 0")
    rule = _choice("chain", "theta_rule", ch["theta_rule"], ("auto", "explicit"))
    phases = None
    if rule == "explicit":
        phases = (_float("chain", "theta1_rad", ch["theta1_rad"]), _float("chain", "theta2_rad", ch["theta2_rad"]))

    d = c["detect"]
    eta = _float("detect", "eta", d["eta"])
    if not 0 < eta <= 1:
        raise ConfigError("[detect] eta must lie in (0, 1]")
    hemt = _choice("detect", "hemt", d["hemt"], ("hemt", "ideal"))
    n_cap = _float("constraint", "n_cap", c["constraint"]["n_cap"])
    try:
        constraint = ConstraintSpec.from_db(
            n_cap=n_cap, g2_db=g2_db, eta=eta,
            hemt_db=_float("detect", "hemt_g_db", d["hemt_g_db"]),
            n_bar_T=_float("detect", "hemt_n_bar_t", d["hemt_n_bar_t"]),
            include_hemt=hemt == "hemt",
        ).check_against(params)
    except (DomainError, ValueError) as exc:
        raise ConfigError(f"[constraint] {exc}") from None

    g = c["grid"]
    hw_rule = _choice("grid", "halfwidth_rule", g["halfwidth_rule"], ("default", "explicit"))
    hw = _float("grid", "halfwidth_over_kappa", g["halfwidth_over_kappa"]) if hw_rule == "explicit" else None
    ppw = int(_float("grid", "points_per_width", g["points_per_width"]))
    if ppw < 2 or (hw is not None and hw <= 0):
        raise ConfigError("[grid] needs points_per_width >= 2 and a positive half-width")

    sm = c["single_mode"]
    base_n_in = _float("single_mode", "n_in", sm["n_in"])
    n_in = {k: base_n_in for k in SchemeKind}
    for key, value in sm.items():
        m = _SCHEME_KEY.match(key)
        if m:
            n_in[SchemeKind(m.group(1))] = _float("single_mode", key, value)

    sw = c["sweep"]
    axis = _choice("sweep", "axis", sw["axis"], SWEEP_AXES)
    steps = int(_float("sweep", "steps", sw["steps"]))
    if steps < 1:
        raise ConfigError("[sweep] steps must be >= 1 (the sweep is empty)")
    lo, hi = _float("sweep", "from", sw["from"]), _float("sweep", "to", sw["to"])
    values = np.linspace(lo, hi, steps)

    cmd = c["run"]["command"].strip().lower()
    if cmd not in ("single-mode", "multimode", "cavity-photons", "optimize", "validate"):
        raise ConfigError(f"[run] unknown command {cmd!r}")

    return RunConfig(
        command=cmd, params=params, t_pulse=t_pulse, n_pulse=n_pulse, omega_c=omega_c,
        qubit_sign=1 if qs == "0" else -1, schemes=schemes, g1_db=g1_db, phases=phases,
        constraint=constraint, t_m_factor=_float("detect", "t_m_over_t_pulse", d["t_m_over_t_pulse"]),
        include_cross=_bool("detect", "include_cross_cov", d["include_cross_cov"]),
        window_offset=_window_offset(d["window_offset_ns"], params),
        halfwidth_over_kappa=hw, points_per_width=ppw, n_in=n_in, sweep_axis=axis, sweep_values=values,
    )
