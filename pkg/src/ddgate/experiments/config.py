"""Scenario configuration: YAML files, presets, defaults and resolution.

Frequencies in config files are ordinary frequencies in Hz (the value f in
2 pi x f); times are in seconds. Resolution converts everything to rad/s.
"""
from __future__ import annotations

import copy
import math
import re
from pathlib import Path
from typing import Any

import yaml

from ..constants import hz
from ..dynamics import LindbladSpec, NoiseSpec, PropagationSpec
from ..errors import ConfigError, DDGateError
from ..physics.config import DriveConfig, FlatEnvelope, GaussianRamp, QubitDrive, TrapConfig
from ..physics.planning import gate_plan

class _Loader(yaml.SafeLoader):
    """SafeLoader that also reads exponent floats without a dot, such as 1e-7."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?(?:[0-9][0-9_]*)(?:\.[0-9_]*)?[eE][-+]?[0-9]+$"),
    list("-+0123456789"),
)


def parse_yaml(text: str):
    return yaml.load(text, Loader=_Loader)


SCENARIOS = (
    "gate-evolution",
    "coherence-scan",
    "ramsey",
    "bell-tomography",
    "robustness",
    "scaling",
    "ramped-gate",
)

COMMON: dict[str, Any] = {
    "preset": "planned",
    "seed": 20240101,
    "out": "results",
    "workers": 1,
    "validity_threshold": 5.0,
    "trap": {
        "nu_axial": 98080.0,
        "gradient": 19.09,
        "n_ions": 2,
        "eta": 0.0329,
        "g_F": 1.0,
        "heating_rate": 0.0,
        "n_bar": 0.0,
    },
    "drive": {
        "omega1": "planned",
        "omega2": 71000.0,
        "omega1_amp": None,
        "omega1_phase": None,
        "omega2_per_qubit": None,
        "carrier_detuning": 0.0,
        "envelope": {"kind": "flat", "ramp_duration": 0.0, "sigma": 0.0, "phase_tracking": True},
    },
    "propagation": {
        "dt": 5.0e-8,
        "method": "piecewise-exponential",
        "order": 4,
        "fock_dim": 16,
        "convergence_tol": 1.0e-6,
        "check_convergence": True,
    },
}

SCENARIO_DEFAULTS: dict[str, dict[str, Any]] = {
    "gate-evolution": {
        "evolution": {"t_end": 3.4e-4, "sample_step": 5.0e-7, "lindblad": False, "fidelity": True},
    },
    "coherence-scan": {
        "trap": {"n_ions": 1, "n_bar": 0.6},
        "propagation": {"fock_dim": 28},
        "drive": {"omega1": 94800.0},
        "noise": {"sigma_omega1_rel": 0.01, "sigma_omega0": 0.0, "n_realizations": 30},
        "scan": {
            "ratios": [0.0, 0.025, 0.05, 0.075, 0.1, 0.125, 0.15, 0.2, 0.3, 0.5, 0.75, 1.0],
            "window": 3.0e-3,
            "lower_bound_factor": 10.0,
        },
    },
    "ramsey": {
        "trap": {"n_ions": 1, "n_bar": 0.6},
        "propagation": {"fock_dim": 20},
        "drive": {"omega1": 94800.0},
        "scan": {"omega1_values": [94800.0, 61000.0], "ratio": 0.75, "t_end": 4.0e-4},
    },
    "bell-tomography": {
        "tomography": {
            "gate_time": None,
            "target": "auto",
            "search_window": 1.0e-5,
            "search_step": 5.0e-8,
            "shots": 200,
            "exact": False,
            "detector": "nearest_neighbor",
            "detector_error": 0.02,
            "detector_sigma": 0.0,
            "detector_csv": None,
            "mc_samples": 10000,
        },
    },
    "robustness": {
        "scan": {
            "delta1": [-0.05, -0.04, -0.03, -0.02, -0.01, -0.005, 0.0, 0.005, 0.01, 0.02, 0.03, 0.04, 0.05],
            "delta2": [-0.10, -0.08, -0.06, -0.04, -0.02, -0.01, 0.0, 0.01, 0.02, 0.04, 0.06, 0.08, 0.10],
            "quadratic_range": 0.01,
            "gate_time": None,
        },
    },
    "scaling": {
        "trap": {"heating_rate": 200.0},
        "scan": {"gradients": [19.09, 50.0, 120.0], "modes": ["com", "stretch"], "verify": False},
    },
    "ramped-gate": {
        "trap": {"n_bar": 0.6},
        "propagation": {"fock_dim": 20},
        "drive": {
            "envelope": {"kind": "gaussian_ramp", "ramp_duration": 8.0e-5, "sigma": 2.6666666666666667e-5, "phase_tracking": True}
        },
        "scan": {"t_min": 4.0e-4, "t_max": 4.6e-4, "t_step": 2.0e-6, "flat_t_min": 3.0e-4, "flat_t_max": 3.2e-4},
    },
}

# Named parameter sets; "planned" closes the loop exactly (eps = eta nu).
PRESETS: dict[str, dict[str, Any]] = {
    "planned": {"trap": {"nu_axial": 98080.0, "eta": 0.0329}, "drive": {"omega1": "planned", "omega2": 71000.0}},
    "measured": {"trap": {"nu_axial": 98080.0, "eta": 0.0329}, "drive": {"omega1": 94800.0, "omega2": 71000.0}},
    "bare-basis-fit": {
        "trap": {"nu_axial": 97850.0, "eta": 0.0329},
        "drive": {"omega1": 94830.0, "omega2": 23 * 0.0329 * 97850.0},
    },
}

COMMENTS = {
    "preset": "named parameter set applied before this file: planned | measured | bare-basis-fit",
    "seed": "master seed; every random stream is split from it",
    "out": "output directory (CLI --out and the DDGATE_OUT variable override it)",
    "workers": "process-pool size for scan points (results are order-deterministic)",
    "validity_threshold": "ratio required for every '>>' regime condition",
    "trap": "trap parameters; frequencies in Hz",
    "nu_axial": "axial COM frequency nu/2pi (Hz)",
    "gradient": "magnetic gradient (T/m)",
    "eta": "Lamb-Dicke parameter; null derives it from the gradient",
    "heating_rate": "phonons per second",
    "n_bar": "initial thermal occupation",
    "drive": "phase-modulated dressing drive; frequencies in Hz",
    "omega1": "dressing Rabi and modulation frequency; 'planned' uses nu (1 - eta)",
    "omega2": "second-dressing frequency Omega2/2pi (Hz)",
    "omega1_amp": "optional per-qubit list overriding the amplitude Rabi frequency",
    "omega1_phase": "optional per-qubit list overriding the modulation frequency",
    "envelope": "flat or gaussian_ramp (ramp_duration, sigma in s)",
    "propagation": "integrator settings; dt in s",
    "dt": "time step (s); results are checked against dt/2",
    "order": "Magnus order of the piecewise-exponential stepper (2 or 4)",
    "fock_dim": "retained phonon levels",
}


def deep_merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        where = f"{path}{key}"
        if key not in out:
            raise ConfigError(f"unknown config key '{where}'")
        if isinstance(out[key], dict) and value is not None:
            if not isinstance(value, dict):
                raise ConfigError(f"config key '{where}' must be a mapping")
            out[key] = deep_merge(out[key], value, where + ".")
        else:
            out[key] = copy.deepcopy(value)
    return out


def default_config(scenario: str) -> dict:
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}")
    cfg = copy.deepcopy(COMMON)
    extra = copy.deepcopy(SCENARIO_DEFAULTS[scenario])
    for key in list(extra):
        if key not in cfg:
            cfg[key] = extra.pop(key)
    cfg = deep_merge(cfg, extra)
    cfg["scenario"] = scenario
    return cfg


def load_config(scenario: str, path: str | Path | None = None, overrides: dict | None = None) -> dict:
    """Defaults <- preset <- file <- CLI overrides, validated key by key."""
    user: dict = {}
    if path is not None:
        try:
            user = parse_yaml(Path(path).read_text(encoding="utf-8")) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config file must contain a mapping")
        if user.get("scenario", scenario) != scenario:
            raise ConfigError(f"config is for scenario {user['scenario']!r}, not {scenario!r}")
        user.pop("scenario", None)
    overrides = dict(overrides or {})
    cfg = default_config(scenario)
    preset = overrides.get("preset", user.get("preset", cfg["preset"]))
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    cfg = deep_merge(cfg, _preset_for(scenario, preset))
    cfg = deep_merge(cfg, user)
    for dotted, value in overrides.items():
        _set_dotted(cfg, dotted, value)
    validate(cfg)
    return cfg


def _preset_for(scenario: str, name: str) -> dict:
    preset = copy.deepcopy(PRESETS[name])
    # single-ion scans fix their own dressing frequency
    if scenario in ("coherence-scan", "ramsey"):
        preset.get("drive", {}).pop("omega1", None)
    return preset


def _set_dotted(cfg: dict, dotted: str, value) -> None:
    node = cfg
    parts = dotted.split(".")
    for p in parts[:-1]:
        if p not in node or not isinstance(node[p], dict):
            raise ConfigError(f"unknown config key '{dotted}'")
        node = node[p]
    if parts[-1] not in node:
        raise ConfigError(f"unknown config key '{dotted}'")
    node[parts[-1]] = value


def _num(value, name: str, positive: bool = False, nonneg: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise ConfigError(f"{name} must be finite")
    if positive and v <= 0:
        raise ConfigError(f"{name} must be > 0")
    if nonneg and v < 0:
        raise ConfigError(f"{name} must be >= 0")
    return v


def validate(cfg: dict) -> None:
    t, d, p = cfg["trap"], cfg["drive"], cfg["propagation"]
    _num(t["nu_axial"], "trap.nu_axial", positive=True)
    _num(t["gradient"], "trap.gradient", nonneg=True)
    _num(t["heating_rate"], "trap.heating_rate", nonneg=True)
    _num(t["n_bar"], "trap.n_bar", nonneg=True)
    if t["eta"] is not None:
        _num(t["eta"], "trap.eta", nonneg=True)
    if t["n_ions"] not in (1, 2):
        raise ConfigError("trap.n_ions must be 1 or 2")
    if d["omega1"] != "planned":
        _num(d["omega1"], "drive.omega1", positive=True)
    _num(d["omega2"], "drive.omega2", nonneg=True)
    for key in ("omega1_amp", "omega1_phase", "omega2_per_qubit"):
        if d[key] is not None:
            if not isinstance(d[key], list) or len(d[key]) != t["n_ions"]:
                raise ConfigError(f"drive.{key} must be a list with one entry per ion")
            for v in d[key]:
                _num(v, f"drive.{key}", nonneg=True)
    env = d["envelope"]
    if env["kind"] not in ("flat", "gaussian_ramp"):
        raise ConfigError("drive.envelope.kind must be flat or gaussian_ramp")
    _num(env["ramp_duration"], "drive.envelope.ramp_duration", nonneg=True)
    if env["kind"] == "gaussian_ramp" and env["ramp_duration"] > 0:
        _num(env["sigma"], "drive.envelope.sigma", positive=True)
    _num(p["dt"], "propagation.dt", positive=True)
    if p["method"] not in ("piecewise-exponential", "rk4"):
        raise ConfigError("propagation.method must be piecewise-exponential or rk4")
    if p["order"] not in (2, 4):
        raise ConfigError("propagation.order must be 2 or 4")
    if not isinstance(p["fock_dim"], int) or p["fock_dim"] < 2:
        raise ConfigError("propagation.fock_dim must be an integer >= 2")
    _num(p["convergence_tol"], "propagation.convergence_tol", positive=True)
    if not isinstance(cfg["seed"], int) or cfg["seed"] < 0:
        raise ConfigError("seed must be a nonnegative integer")
    if not isinstance(cfg["workers"], int) or cfg["workers"] < 1:
        raise ConfigError("workers must be a positive integer")
    for section in ("scan", "evolution", "tomography", "noise"):
        for key, value in cfg.get(section, {}).items():
            if isinstance(value, list) and not value:
                raise ConfigError(f"{section}.{key} must be nonempty")
    try:
        resolve_trap(cfg)
        if cfg["scenario"] not in ("coherence-scan", "ramsey"):
            resolve_drive(cfg)
    except DDGateError as exc:
        raise ConfigError(str(exc)) from exc


def resolve_trap(cfg: dict) -> TrapConfig:
    t = cfg["trap"]
    return TrapConfig(
        nu_axial=hz(t["nu_axial"]),
        gradient=float(t["gradient"]),
        n_ions=int(t["n_ions"]),
        g_F=float(t["g_F"]),
        heating_rate=float(t["heating_rate"]),
        n_bar_init=float(t["n_bar"]),
        eta_override=None if t["eta"] is None else float(t["eta"]),
    )


def planned_omega1(trap: TrapConfig, n: int = 1, k: int = 0) -> float:
    """Dressing frequency nu - eps that realizes the planned loop detuning."""
    probe = DriveConfig.symmetric(trap.nu_axial * 0.9, hz(71000.0), trap.n_ions)
    return gate_plan(trap, probe, n, k).omega1


def make_envelope(env: dict, total_duration: float | None):
    if env["kind"] == "flat" or env["ramp_duration"] == 0:
        return FlatEnvelope()
    if total_duration is None:
        raise ConfigError("a gaussian_ramp envelope needs a total duration")
    return GaussianRamp(float(env["ramp_duration"]), float(env["sigma"]), float(total_duration), bool(env["phase_tracking"]))


def resolve_drive(
    cfg: dict,
    trap: TrapConfig | None = None,
    omega1_hz: float | None = None,
    omega2_hz: float | None = None,
    total_duration: float | None = None,
) -> DriveConfig:
    trap = trap or resolve_trap(cfg)
    d = cfg["drive"]
    n = trap.n_ions
    if omega1_hz is not None:
        w1 = hz(omega1_hz)
    elif d["omega1"] == "planned":
        w1 = planned_omega1(trap)
    else:
        w1 = hz(d["omega1"])
    w2 = hz(d["omega2"] if omega2_hz is None else omega2_hz)
    amps = [hz(x) for x in d["omega1_amp"]] if d["omega1_amp"] else [w1] * n
    phases = [hz(x) for x in d["omega1_phase"]] if d["omega1_phase"] else [w1] * n
    w2s = [hz(x) for x in d["omega2_per_qubit"]] if d["omega2_per_qubit"] else [w2] * n
    det = hz(d["carrier_detuning"])
    qubits = tuple(QubitDrive(a, p, o2, det) for a, p, o2 in zip(amps, phases, w2s))
    env = make_envelope(d["envelope"], total_duration) if total_duration is not None else FlatEnvelope()
    return DriveConfig(qubits, env)


def propagation_settings(cfg: dict) -> dict:
    p = cfg["propagation"]
    return {"dt": float(p["dt"]), "method": p["method"], "order": int(p["order"]), "convergence_tol": float(p["convergence_tol"])}


def make_spec(cfg: dict, t_end: float, record_times, dt: float | None = None) -> PropagationSpec:
    s = propagation_settings(cfg)
    return PropagationSpec(
        0.0, t_end, dt or s["dt"], tuple(record_times), s["method"], s["order"], s["convergence_tol"]
    )


def noise_spec(cfg: dict) -> NoiseSpec:
    n = cfg["noise"]
    return NoiseSpec(float(n["sigma_omega1_rel"]), hz(n["sigma_omega0"]), int(n["n_realizations"]), int(cfg["seed"]))


def lindblad_spec(cfg: dict) -> LindbladSpec:
    return LindbladSpec(float(cfg["trap"]["heating_rate"]))


def _annotate(node: dict, indent: int = 0) -> list[str]:
    lines = []
    pad = "  " * indent
    for key, value in node.items():
        if key in COMMENTS:
            lines.append(f"{pad}# {COMMENTS[key]}")
        if isinstance(value, dict):
            lines.append(f"{pad}{key}:")
            lines.extend(_annotate(value, indent + 1))
        else:
            dumped = yaml.safe_dump({key: value}, default_flow_style=True, sort_keys=False).strip()
            lines.append(pad + dumped[1:-1] if dumped.startswith("{") else pad + dumped)
    return lines


def default_config_text(scenario: str) -> str:
    cfg = default_config(scenario)
    head = [f"# default configuration for the {scenario} scenario", "# frequencies in Hz, times in seconds"]
    return "\n".join(head + _annotate(cfg)) + "\n"

