"""Command-line front end.

Usage::

    stirap-lab <command> [key=value ...] [--config FILE] [--out PATH] [--seed N]
    stirap-lab reproduce <figure> [--out DIR] [--seed N]

Commands: stirap, darkres, starkmap, fit-dipole, fit-lifetime, fit-darkres,
resonances. A config file holds ``key = value`` lines (``#`` starts a comment);
``key=value`` arguments on the command line override it. Unknown keys are
rejected. Frequencies given in MHz/kHz/GHz are cyclic (``omega1_peak_mhz = 4``
means ``Omega_1 = 2 pi x 4 MHz``).

Exit status: 0 success, 1 invalid configuration, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .dynamics import TWO_PI, LambdaSystem, PulseSchedule, dark_resonance_scan, dark_resonance_width, stirap_lineshape, stirap_transfer
from .errors import NoPeakError, StirapLabError
from .fitting import ScanData, find_resonances, fit_dark_resonance, fit_dipole, fit_lifetime
from .fitting.core import dipole_shift_model
from .io import fmt, read_scan, write_csv
from .stark import StarkModel, stark_map
from .units import dipole_from_rabi, kv_per_cm_to_v_per_m

THREADS_ENV = "STIRAP_LAB_THREADS"
COMMANDS = ("stirap", "darkres", "starkmap", "fit-dipole", "fit-lifetime", "fit-darkres", "resonances")
FIGURES = ("fig2b", "fig3a", "fig3b", "fig4", "fig5c", "fig6")


class ConfigError(Exception):
    """Invalid experiment configuration (exit status 1)."""


# --- parameter declarations ----------------------------------------------------------


@dataclass(frozen=True)
class Param:
    kind: type
    default: Any
    check: str = "any"  # any | nonneg | positive | finite | choice
    choices: tuple = ()

    def parse(self, key: str, raw: Any) -> Any:
        if raw is None or (isinstance(raw, str) and raw.lower() in ("none", "auto", "")):
            if self.default is None:
                return None
            raise ConfigError(f"{key}: a value is required")
        try:
            if self.kind is bool:
                if isinstance(raw, bool):
                    value = raw
                elif str(raw).lower() in ("true", "yes", "1"):
                    value = True
                elif str(raw).lower() in ("false", "no", "0"):
                    value = False
                else:
                    raise ValueError(raw)
            elif self.kind is int:
                value = int(str(raw))
            elif self.kind is float:
                value = float(raw)
            else:
                value = str(raw)
        except ValueError:
            raise ConfigError(f"{key}: cannot parse {raw!r} as {self.kind.__name__}") from None
        if self.kind in (int, float):
            if math.isnan(value) or (self.check != "positive_or_inf" and math.isinf(value)):
                raise ConfigError(f"{key}: value must be finite, got {raw!r}")
            if self.check == "nonneg" and value < 0:
                raise ConfigError(f"{key}: must be >= 0, got {value}")
            if self.check in ("positive", "positive_or_inf") and value <= 0:
                raise ConfigError(f"{key}: must be > 0, got {value}")
        if self.check == "choice" and value not in self.choices:
            raise ConfigError(f"{key}: must be one of {', '.join(self.choices)}, got {value!r}")
        return value


def _p(kind, default, check="any", choices=()):
    return Param(kind, default, check, tuple(choices))


_LAMBDA = {
    "omega1_peak_mhz": _p(float, 4.0, "nonneg"),
    "omega2_peak_mhz": _p(float, 7.0, "nonneg"),
    "gamma_e_mhz": _p(float, 6.0, "nonneg"),
    "delta_one_photon_mhz": _p(float, 0.0, "finite"),
    "laser_dephasing_khz": _p(float, 0.0, "nonneg"),
}

PARAMS: dict[str, dict[str, Param]] = {
    "stirap": {
        **_LAMBDA,
        "delta_two_photon_mhz": _p(float, 0.0, "finite"),
        "ground_lifetime_us": _p(float, math.inf, "positive_or_inf"),
        "shape": _p(str, "gaussian", "choice", ("gaussian", "sine-squared", "constant")),
        "duration_us": _p(float, 4.0, "positive"),
        "delay_us": _p(float, None, "nonneg"),
        "hold_us": _p(float, 0.0, "nonneg"),
        "sample_dt_us": _p(float, 0.05, "positive"),
        "scan_min_mhz": _p(float, None, "finite"),
        "scan_max_mhz": _p(float, None, "finite"),
        "scan_points": _p(int, 0, "nonneg"),
    },
    "darkres": {
        **_LAMBDA,
        "omega1_peak_mhz": _p(float, 0.5, "nonneg"),
        "omega2_peak_mhz": _p(float, 8.0, "nonneg"),
        "pulse_duration_us": _p(float, 20.0, "positive"),
        "scan_axis": _p(str, "down", "choice", ("down", "up", "one-photon")),
        "scan_min_mhz": _p(float, -15.0, "finite"),
        "scan_max_mhz": _p(float, 15.0, "finite"),
        "scan_points": _p(int, 121, "positive"),
        "noise_frac": _p(float, 0.0, "nonneg"),
    },
    "starkmap": {
        "b_rot_ghz": _p(float, 1.1139, "positive"),
        "dipole_debye": _p(float, 0.566, "nonneg"),
        "field_max_kv_per_cm": _p(float, 2.0, "positive"),
        "field_points": _p(int, 21, "positive"),
        "n_max": _p(int, 10, "positive"),
        "n_report": _p(int, 2, "nonneg"),
        "branches": _p(str, "all"),
        "noise_mhz": _p(float, 0.0, "nonneg"),
    },
    "fit-dipole": {
        "data_path": _p(str, None),
        "y_column": _p(str, None),
        "b_rot_ghz": _p(float, 1.1139, "positive"),
        "n": _p(int, 0, "nonneg"),
        "m": _p(int, 0, "nonneg"),
        "field_sys_frac": _p(float, 0.03, "nonneg"),
        "chi2_gate": _p(float, None, "positive"),
        "n_max": _p(int, 10, "positive"),
    },
    "fit-lifetime": {
        "data_path": _p(str, None),
        "y_column": _p(str, None),
        "noise": _p(str, "relative", "choice", ("relative", "absolute")),
    },
    "fit-darkres": {
        "data_path": _p(str, None),
        "y_column": _p(str, None),
        "omega1_peak_mhz": _p(float, 0.5, "nonneg"),
        "gamma_e_mhz": _p(float, 6.0, "nonneg"),
        "delta_one_photon_mhz": _p(float, 0.0, "finite"),
        "pulse_duration_us": _p(float, 20.0, "positive"),
        "scan_axis": _p(str, "down", "choice", ("down", "up", "one-photon")),
        "fit_gamma_e": _p(bool, False),
        "power_uw": _p(float, None, "positive"),
        "waist_um": _p(float, None, "positive"),
    },
    "resonances": {
        "data_path": _p(str, None),
        "y_column": _p(str, None),
        "prominence": _p(float, 0.2, "positive"),
    },
}

_RESERVED = ("command", "seed", "output_path")


@dataclass
class ExperimentConfig:
    command: str
    parameters: dict[str, Any] = field(default_factory=dict)
    seed: int | None = None
    output_path: Path | None = None

    def resolved(self) -> dict[str, str]:
        """Every parameter, defaults included, as text for the CSV header."""
        out = {k: ("none" if v is None else ("inf" if v == math.inf else str(v))) for k, v in self.parameters.items()}
        out["seed"] = "none" if self.seed is None else str(self.seed)
        return out

    @property
    def rng(self) -> np.random.Generator:
        return np.random.default_rng(0 if self.seed is None else self.seed)


def parse_config_text(text: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def build_config(command: str | None, raw: dict[str, Any], seed: int | None = None, out: str | None = None) -> ExperimentConfig:
    """Validate raw key/value pairs against the command's declared parameters."""
    raw = dict(raw)
    command = command or raw.pop("command", None)
    raw.pop("command", None)
    if command not in PARAMS:
        raise ConfigError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    if seed is None and raw.get("seed") not in (None, "none"):
        try:
            seed = int(raw["seed"])
        except ValueError:
            raise ConfigError(f"seed: cannot parse {raw['seed']!r} as int") from None
    raw.pop("seed", None)
    out = out or raw.pop("output_path", None)
    raw.pop("output_path", None)
    declared = PARAMS[command]
    unknown = sorted(set(raw) - set(declared))
    if unknown:
        raise ConfigError(f"unknown key(s) for {command}: {', '.join(unknown)}")
    params = {}
    for key, param in declared.items():
        params[key] = param.parse(key, raw[key]) if key in raw else param.default
    if "data_path" in declared and not params["data_path"]:
        raise ConfigError("data_path: a value is required")
    return ExperimentConfig(command, params, seed, Path(out) if out else None)


# --- command implementations ---------------------------------------------------------


def _map_fn():
    try:
        n = int(os.environ.get(THREADS_ENV, "1"))
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer") from None
    if n <= 1:
        return map, None
    pool = ThreadPoolExecutor(max_workers=n)
    return pool.map, pool


def _lambda_system(p) -> LambdaSystem:
    lifetime = p.get("ground_lifetime_us", math.inf)
    return LambdaSystem(
        omega1_peak=TWO_PI * 1e6 * p["omega1_peak_mhz"],
        omega2_peak=TWO_PI * 1e6 * p.get("omega2_peak_mhz", 0.0),
        delta_one_photon=TWO_PI * 1e6 * p["delta_one_photon_mhz"],
        delta_two_photon=TWO_PI * 1e6 * p.get("delta_two_photon_mhz", 0.0),
        gamma_e=TWO_PI * 1e6 * p["gamma_e_mhz"],
        gamma_g=0.0 if math.isinf(lifetime) else 1.0 / (lifetime * 1e-6),
        laser_dephasing=TWO_PI * 1e3 * p.get("laser_dephasing_khz", 0.0),
    )


def _header(cfg: ExperimentConfig) -> tuple[list[str], dict[str, str]]:
    return [f"stirap-lab {__version__}", f"command: {cfg.command}"], cfg.resolved()


def run_stirap(cfg: ExperimentConfig, out: Path) -> list[str]:
    p = cfg.parameters
    sys_ = _lambda_system(p)
    schedule = PulseSchedule(
        shape=p["shape"],
        duration=p["duration_us"] * 1e-6,
        delay=None if p["delay_us"] is None else p["delay_us"] * 1e-6,
        hold=p["hold_us"] * 1e-6,
    )
    comments, header = _header(cfg)
    if p["scan_points"]:
        if p["scan_min_mhz"] is None or p["scan_max_mhz"] is None:
            raise ConfigError("scan_min_mhz and scan_max_mhz are required when scan_points > 0")
        det = np.linspace(p["scan_min_mhz"], p["scan_max_mhz"], p["scan_points"])
        mapper, pool = _map_fn()
        try:
            shape = stirap_lineshape(sys_, schedule, TWO_PI * 1e6 * det, map_fn=mapper)
        finally:
            if pool:
                pool.shutdown()
        rows = np.column_stack([det, shape[:, 1], shape[:, 2]])
        write_csv(out, ["two_photon_detuning [MHz]", "roundtrip_population [1]", "oneway_remaining [1]"], rows, header, comments)
        best = int(np.argmax(shape[:, 1]))
        return [f"peak roundtrip={shape[best, 1]:.6f} at detuning={det[best]:.6g} MHz"]
    res = stirap_transfer(sys_, schedule, sample_dt=p["sample_dt_us"] * 1e-6)
    tr = res.trajectory
    pops = tr.populations
    rows = np.column_stack([tr.times * 1e6, pops[:, 0], pops[:, 1], pops[:, 2], tr.lost])
    comments.append(f"efficiency = {res.efficiency:.6f}")
    comments.append(f"roundtrip = {res.roundtrip:.6f}")
    comments.append(f"max_e_pop = {res.max_e_pop:.6f}")
    write_csv(out, ["time [us]", "pop_i [1]", "pop_e [1]", "pop_g [1]", "lost [1]"], rows, header, comments)
    return [
        f"efficiency={res.efficiency:.6f} roundtrip={res.roundtrip:.6f} "
        f"efficiency^2={res.efficiency ** 2:.6f} max_e_pop={res.max_e_pop:.6f}"
    ]


def run_darkres(cfg: ExperimentConfig, out: Path) -> list[str]:
    p = cfg.parameters
    sys_ = _lambda_system(p)
    det = np.linspace(p["scan_min_mhz"], p["scan_max_mhz"], p["scan_points"])
    mapper, pool = _map_fn()
    try:
        scan = dark_resonance_scan(sys_, p["pulse_duration_us"] * 1e-6, TWO_PI * 1e6 * det, p["scan_axis"], map_fn=mapper)
    finally:
        if pool:
            pool.shutdown()
    pop = scan[:, 1]
    if p["noise_frac"] > 0:
        pop = pop * (1 + p["noise_frac"] * cfg.rng.standard_normal(pop.size))
    comments, header = _header(cfg)
    lines = []
    try:
        width = dark_resonance_width(sys_, p["pulse_duration_us"] * 1e-6)
        comments.append(f"transparency_fwhm_khz = {width / 1e3:.6f}")
        lines.append(f"transparency FWHM = {width / 1e3:.3f} kHz")
    except NoPeakError:
        lines.append("no transparency window")
    write_csv(out, ["detuning [MHz]", "population [1]"], np.column_stack([det, pop]), header, comments)
    return lines


def _branches(text: str, n_report: int) -> list[int]:
    if text == "all":
        return list(range(n_report + 1))
    try:
        ns = sorted({int(s) for s in text.split(",")})
    except ValueError:
        raise ConfigError(f"branches: expected 'all' or a comma list of N, got {text!r}") from None
    if any(n < 0 or n > n_report for n in ns):
        raise ConfigError(f"branches: N must lie in 0..n_report ({n_report})")
    return ns


def run_starkmap(cfg: ExperimentConfig, out: Path) -> list[str]:
    p = cfg.parameters
    if p["field_points"] < 2:
        raise ConfigError("field_points: need at least 2")
    ns = _branches(p["branches"], p["n_report"])
    model = StarkModel(b_rot=p["b_rot_ghz"] * 1e9, dipole=p["dipole_debye"], n_max=max(p["n_max"], 3))
    fields_kv = np.linspace(0.0, p["field_max_kv_per_cm"], p["field_points"])
    levels = stark_map(model, kv_per_cm_to_v_per_m(fields_kv), n_report=p["n_report"])
    chosen = sorted((lv for lv in levels if lv.n_label in ns), key=lambda lv: (lv.n_label, lv.m_abs))
    cols = ["field [kV/cm]"]
    data = [fields_kv]
    rng = cfg.rng
    for lv in chosen:
        cols.append(f"shift_N{lv.n_label}_m{lv.m_abs} [MHz]")
        shift = lv.shifts / 1e6
        if p["noise_mhz"] > 0:
            shift = shift + p["noise_mhz"] * rng.standard_normal(shift.size)
        data.append(shift)
    if p["noise_mhz"] > 0:
        cols.append("sigma [MHz]")
        data.append(np.full(fields_kv.size, p["noise_mhz"]))
    comments, header = _header(cfg)
    write_csv(out, cols, np.column_stack(data), header, comments)
    lines = []
    for lv in chosen:
        lines.append(f"N={lv.n_label} |m|={lv.m_abs}: shift at {fields_kv[-1]:g} kV/cm = {lv.shifts[-1] / 1e6:.6g} MHz")
    return lines


def _load(cfg: ExperimentConfig, default_y: str | None = None) -> ScanData:
    p = cfg.parameters
    path = Path(p["data_path"])
    if not path.is_file():
        raise ConfigError(f"data_path: no such file {str(path)!r}")
    y_col = p.get("y_column") or default_y
    try:
        return read_scan(path, y_col)
    except StirapLabError as exc:
        if default_y and not p.get("y_column"):
            return read_scan(path, None)
        raise ConfigError(f"data_path: {exc}") from None


def run_fit_dipole(cfg: ExperimentConfig, out: Path) -> list[str]:
    p = cfg.parameters
    data = _load(cfg, f"shift_N{p['n']}_m{p['m']}")
    if data.axis_kind != "field":
        raise ConfigError("data_path: first column must be an electric field")
    if p["m"] > p["n"]:
        raise ConfigError("m: must not exceed n")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = fit_dipole(data, p["b_rot_ghz"] * 1e9, p["n"], p["m"], p["field_sys_frac"], p["chi2_gate"], p["n_max"])
    model, _ = dipole_shift_model(res.value, data.x, p["b_rot_ghz"] * 1e9, p["n"], p["m"], p["n_max"])
    comments, header = _header(cfg)
    comments += [f"dipole_debye = {res.value:.8g}", f"stat_err_debye = {res.stat_err:.3g}"]
    if res.sys_err is not None:
        comments.append(f"sys_err_debye = {res.sys_err:.3g}")
    comments.append(f"chi2_reduced = {res.chi2_reduced:.6g}")
    rows = np.column_stack([data.x / 1e5, data.y / 1e6, model / 1e6])
    write_csv(out, ["field [kV/cm]", "shift [MHz]", "model [MHz]"], rows, header, comments)
    sys_txt = "" if res.sys_err is None else f" (sys {res.sys_err:.3g})"
    lines = [f"dipole = {res.value:.6g} +/- {res.stat_err:.3g}{sys_txt} D, chi2_reduced = {res.chi2_reduced:.4g}"]
    lines += [f"warning: {w.message}" for w in caught]
    return lines


def run_fit_lifetime(cfg: ExperimentConfig, out: Path) -> list[str]:
    data = _load(cfg)
    if data.axis_kind != "time":
        raise ConfigError("data_path: first column must be a time")
    res = fit_lifetime(data, noise=cfg.parameters["noise"])
    model = res.params["amplitude"] * np.exp(-data.x / res.value)
    comments, header = _header(cfg)
    comments += [f"tau_us = {res.value * 1e6:.8g}", f"stat_err_us = {res.stat_err * 1e6:.3g}"]
    write_csv(out, ["time [us]", "counts [1]", "model [1]"], np.column_stack([data.x * 1e6, data.y, model]), header, comments)
    return [f"tau = {res.value * 1e6:.4g} +/- {res.stat_err * 1e6:.2g} us, chi2_reduced = {res.chi2_reduced:.4g}"]


def run_fit_darkres(cfg: ExperimentConfig, out: Path) -> list[str]:
    p = cfg.parameters
    data = _load(cfg)
    if data.axis_kind != "detuning":
        raise ConfigError("data_path: first column must be a frequency detuning")
    if (p["power_uw"] is None) != (p["waist_um"] is None):
        raise ConfigError("power_uw and waist_um must be given together")
    sys_ = _lambda_system({**p, "omega2_peak_mhz": 0.0})
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = fit_dark_resonance(data, sys_, p["pulse_duration_us"] * 1e-6, p["scan_axis"], p["fit_gamma_e"])
    fit_sys = sys_.replace(omega2_peak=res.value)
    if p["fit_gamma_e"]:
        fit_sys = fit_sys.replace(gamma_e=res.params["gamma_e"])
    model = res.params["scale"] * dark_resonance_scan(
        fit_sys, p["pulse_duration_us"] * 1e-6, TWO_PI * (data.x - res.params["center"]), p["scan_axis"]
    )[:, 1]
    om_mhz = res.value / TWO_PI / 1e6
    err_mhz = res.stat_err / TWO_PI / 1e6
    comments, header = _header(cfg)
    comments += [f"omega2_mhz = {om_mhz:.8g}", f"stat_err_mhz = {err_mhz:.3g}", f"center_mhz = {res.params['center'] / 1e6:.8g}"]
    lines = [f"Omega_2 = 2pi x {om_mhz:.5g} +/- {err_mhz:.2g} MHz, center = {res.params['center'] / 1e6:.5g} MHz"]
    if p["power_uw"] is not None:
        d = dipole_from_rabi(res.value, p["power_uw"] * 1e-6, p["waist_um"] * 1e-6)
        comments.append(f"transition_dipole_ea0 = {d:.6g}")
        lines.append(f"transition dipole = {d:.4g} ea0")
    lines += [f"warning: {w.message}" for w in caught]
    write_csv(out, ["detuning [MHz]", "population [1]", "model [1]"], np.column_stack([data.x / 1e6, data.y, model]), header, comments)
    return lines


def run_resonances(cfg: ExperimentConfig, out: Path) -> list[str]:
    data = _load(cfg)
    if data.axis_kind != "detuning":
        raise ConfigError("data_path: first column must be a frequency axis")
    found = find_resonances(data, cfg.parameters["prominence"])
    rows = [(r.center / 1e6, r.center_err / 1e6, r.height, r.width / 1e6, r.offset) for r in found]
    comments, header = _header(cfg)
    write_csv(out, ["center [MHz]", "sigma_center [MHz]", "height [1]", "width [MHz]", "offset [1]"], rows, header, comments)
    return [f"{len(found)} resonance(s)"] + [f"  center {r.center / 1e6:.6f} MHz, width {r.width / 1e6:.4g} MHz" for r in found]


RUNNERS: dict[str, Callable[[ExperimentConfig, Path], list[str]]] = {
    "stirap": run_stirap,
    "darkres": run_darkres,
    "starkmap": run_starkmap,
    "fit-dipole": run_fit_dipole,
    "fit-lifetime": run_fit_lifetime,
    "fit-darkres": run_fit_darkres,
    "resonances": run_resonances,
}


def run(config: ExperimentConfig) -> list[str]:
    """Execute one configured pipeline and write its CSV; returns summary lines."""
    out = config.output_path or Path(f"{config.command}.csv")
    return RUNNERS[config.command](config, out)


# --- figure recipes ------------------------------------------------------------------

# span of one gaussian sequence is 9.75 sigma = 2.4375 x duration; 25 us total one-way
_FIG3A_DURATION_US = 25.0 / 2.4375

RECIPES: dict[str, list[tuple[str, str, dict[str, Any]]]] = {
    "fig2b": [("darkres", "fig2b_darkres.csv", dict(
        omega1_peak_mhz=0.5, omega2_peak_mhz=8.0, scan_axis="up", pulse_duration_us=20.0,
        scan_min_mhz=-15.0, scan_max_mhz=15.0, scan_points=121))],
    "fig3a": [("stirap", "fig3a_stirap.csv", dict(
        omega1_peak_mhz=4.0, omega2_peak_mhz=8.0, duration_us=_FIG3A_DURATION_US, hold_us=10.0,
        ground_lifetime_us=170.0, sample_dt_us=0.1))],
    "fig4": [
        ("starkmap", "fig4_N0.csv", dict(b_rot_ghz=0.5264, dipole_debye=0.052, field_max_kv_per_cm=2.0, branches="0")),
        ("starkmap", "fig4_N2.csv", dict(b_rot_ghz=0.5264, dipole_debye=0.052, field_max_kv_per_cm=2.0, branches="2")),
    ],
    "fig5c": [("stirap", "fig5c_lineshape.csv", dict(
        omega1_peak_mhz=4.0, omega2_peak_mhz=7.0, duration_us=4.0,
        scan_min_mhz=-1.5, scan_max_mhz=1.5, scan_points=25))],
    "fig6": [
        ("starkmap", "fig6_N0.csv", dict(b_rot_ghz=1.1139, dipole_debye=0.566, field_max_kv_per_cm=3.0, field_points=31, branches="0")),
        ("starkmap", "fig6_N2.csv", dict(b_rot_ghz=1.1139, dipole_debye=0.566, field_max_kv_per_cm=3.0, field_points=31, branches="2")),
    ],
}


def _fig3b(out_dir: Path, seed: int | None) -> list[str]:
    tau, n0, noise = 170e-6, 1.8e4, 0.10
    times = np.linspace(0.0, 400e-6, 12)
    rng = np.random.default_rng(0 if seed is None else seed)
    counts = n0 * np.exp(-times / tau) * (1 + noise * rng.standard_normal(times.size))
    comments = [f"stirap-lab {__version__}", "command: reproduce fig3b (synthetic decay)"]
    header = {"tau_us": "170", "n0": fmt(n0), "noise_frac": "0.1", "seed": "none" if seed is None else str(seed)}
    data_path = write_csv(out_dir / "fig3b_decay.csv", ["time [us]", "counts [1]"], np.column_stack([times * 1e6, counts]), header, comments)
    cfg = build_config("fit-lifetime", {"data_path": str(data_path)}, seed, str(out_dir / "fig3b_fit.csv"))
    return run(cfg)


def reproduce(figure_id: str, out_dir: Path, seed: int | None = None) -> list[str]:
    """Regenerate the simulated analogue of a figure as CSV files in ``out_dir``."""
    if figure_id not in FIGURES:
        raise ConfigError(f"unknown figure {figure_id!r}; expected one of {', '.join(FIGURES)}")
    out_dir.mkdir(parents=True, exist_ok=True)
    if figure_id == "fig3b":
        return _fig3b(out_dir, seed)
    lines = []
    for command, filename, params in RECIPES[figure_id]:
        cfg = build_config(command, params, seed, str(out_dir / filename))
        lines += [f"{filename}: {line}" for line in run(cfg)]
    return lines


# --- entry point ---------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stirap-lab", description="STIRAP and Stark-spectroscopy simulator and fitter.")
    parser.add_argument("command", nargs="?", help=f"one of {', '.join(COMMANDS + ('reproduce',))}")
    parser.add_argument("overrides", nargs="*", help="key=value parameter overrides (or a figure id for reproduce)")
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--out", help="output CSV path (directory for reproduce)")
    parser.add_argument("--seed", type=int, help="RNG seed for synthetic noise")
    parser.add_argument("--version", action="version", version=f"stirap-lab {__version__}")
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = _parser().parse_intermixed_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "reproduce":
            if len(args.overrides) != 1:
                raise ConfigError("reproduce takes exactly one figure id")
            lines = reproduce(args.overrides[0], Path(args.out or "."), args.seed)
        else:
            raw: dict[str, Any] = {}
            if args.config:
                try:
                    raw.update(parse_config_text(Path(args.config).read_text(encoding="utf-8")))
                except OSError as exc:
                    raise ConfigError(f"cannot read config: {exc}") from None
            for item in args.overrides:
                if "=" not in item:
                    raise ConfigError(f"override {item!r} is not key=value")
                k, v = item.split("=", 1)
                raw[k.strip()] = v.strip()
            cfg = build_config(args.command, raw, args.seed, args.out)
            lines = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (StirapLabError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    for line in lines:
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
