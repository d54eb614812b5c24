"""JSON run configuration: schema, defaults and physical validation.

Lengths are in micrometres, frequencies in THz, times in ps, damping rates
in 1/ps and sheet densities in m^-2. Every error found is reported at once.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from jsonschema import Draft202012Validator

from .device import CavityOscillatorTable, DeviceConfig
from .dynamics import DEFAULT_DIP_DEPTH, DEFAULT_GAMMA_MP, DrivePulse
from .materials import MaterialStack

__all__ = ["SCHEMA_VERSION", "SCHEMA", "ConfigError", "RunConfig", "parse_config",
           "load_config_text"]

SCHEMA_VERSION = 1

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_grid = {
    "oneOf": [
        {"type": "array", "items": _num, "minItems": 1},
        {"type": "object", "additionalProperties": False,
         "required": ["start", "stop", "num"],
         "properties": {"start": _num, "stop": _num, "num": {"type": "integer", "minimum": 1}}},
    ]
}
_range = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}


def _obj(props: dict, required=()) -> dict:
    return {"type": "object", "additionalProperties": False, "properties": props,
            "required": list(required)}


SCHEMA = _obj({
    "schema_version": {"type": "integer"},
    "model": {"enum": ["device", "single_pair"]},
    "single_pair": _obj({"eta": {"type": "number", "minimum": 0}, "nu_cavity_THz": _pos,
                         "nu_matter_THz": _pos}),
    "device": _obj({
        "stack": _obj({
            "n_qw": {"type": "integer", "minimum": 1},
            "qw_period_um": _pos,
            "qw_depths_um": {"type": "array", "items": _num, "minItems": 1},
            "cap_thickness_um": _num,
            "screening_distance_um": {"type": ["number", "null"]},
            "eps_sub": _num,
            "eps_barrier": _num,
            "metal_coverage": _num,
            "effective_mass_ratio": _num,
            "rho_per_qw_m2": _num,
        }),
        "period_um": _pos,
        "alpha_cut": {"type": "integer", "minimum": 0},
        "oscillators": {"type": "array", "minItems": 1, "items": _obj(
            {"j": {"type": "integer", "minimum": 1}, "nu_THz": _num, "gamma_per_ps": _num,
             "amplitude": _num, "phase_rad": _num},
            required=("j", "nu_THz", "gamma_per_ps", "amplitude", "phase_rad"))},
        "coupling": _obj({
            "source": {"enum": ["synthetic", "file"]},
            "path": {"type": "string"},
            "global_scale": {"type": "number", "minimum": 0},
            "coupled_modes": {"type": "array", "items": {"type": "integer", "minimum": 1},
                              "minItems": 1},
            "base_profile": {"type": "object", "additionalProperties": {"type": "number"}},
            "penetration_depth_um": {"type": ["number", "null"]},
        }),
        "cross_diamagnetic": {"type": "boolean"},
    }),
    "bias": _obj({"nu_c_THz": {"type": "number", "minimum": 0},
                  "field_T": {"type": "number", "minimum": 0},
                  "nu_c_grid_THz": _grid}),
    "solver": _obj({
        "dt_ps": {"type": ["number", "null"]},
        "t_end_ps": _pos,
        "gamma_mp_per_ps": {"oneOf": [_num, {"type": "array", "items": _num}]},
        "pulse": _obj({"t0_ps": _num, "sigma_ps": _num, "amplitude": _num}),
        "dip_depth": _num,
        "kappa_rad": {"type": ["number", "null"]},
        "spectral_grid_THz": _grid,
        "output_stride": {"type": "integer", "minimum": 1},
    }),
    "wigner": _obj({"cavity_mode": {"type": "integer", "minimum": 1}, "x_range": _range,
                    "p_range": _range, "resolution": {"type": "integer", "minimum": 2},
                    "fock_n_max": {"type": "integer", "minimum": 2}}),
    "oracle": _obj({"etas": {"type": "array", "items": {"type": "number", "minimum": 0}},
                    "n_max": {"type": "integer", "minimum": 1},
                    "n_max_strong": {"type": "integer", "minimum": 1},
                    "strong_eta": {"type": "number", "minimum": 0}}),
    "output": _obj({"directory": {"type": "string"}}),
}, required=("schema_version",))

_VALIDATOR = Draft202012Validator(SCHEMA)


class ConfigError(ValueError):
    """Parse, version or validation failure; ``errors`` lists every problem."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


@dataclass
class RunConfig:
    model: str = "device"
    eta: float = 1.0
    nu_cavity: float = 1.0
    nu_matter: float | None = None
    device: DeviceConfig = field(default_factory=DeviceConfig)
    nu_c: float = 0.52
    nu_c_grid: np.ndarray | None = None
    dt: float | None = None
    t_end: float = 210.0
    gamma_mp: float | tuple[float, ...] = DEFAULT_GAMMA_MP
    pulse: DrivePulse = field(default_factory=DrivePulse)
    dip_depth: float = DEFAULT_DIP_DEPTH
    kappa_rad: float | None = None
    spectral_grid: np.ndarray = field(default_factory=lambda: np.linspace(0.05, 6.0, 120))
    output_stride: int = 1
    wigner_mode: int = 1
    x_range: tuple[float, float] = (-5.0, 5.0)
    p_range: tuple[float, float] = (-5.0, 5.0)
    resolution: int = 101
    fock_n_max: int | None = None
    oracle_etas: tuple[float, ...] = (0.1, 0.5, 1.0)
    oracle_n_max: int = 40
    oracle_strong_eta: float = 3.0
    oracle_n_max_strong: int = 80
    out_dir: str = "out"
    config_hash: str = ""
    raw: dict = field(default_factory=dict)


def _grid_values(spec) -> np.ndarray:
    if isinstance(spec, dict):
        return np.linspace(spec["start"], spec["stop"], spec["num"])
    return np.asarray(spec, dtype=float)


def _build_device(d: dict, errors: list[str]) -> DeviceConfig | None:
    st = d.get("stack", {})
    n_qw = st.get("n_qw", 48)
    period = st.get("qw_period_um", 0.05)
    cap = st.get("cap_thickness_um", 0.03)
    depths = st.get("qw_depths_um")
    if depths is not None and "n_qw" in st and len(depths) != n_qw:
        errors.append(f"device.stack: n_qw = {n_qw} but {len(depths)} qw_depths_um given")
    if depths is None:
        depths = [cap + (i + 0.5) * period for i in range(n_qw)]
    kw = dict(
        eps_sub=st.get("eps_sub", 12.9), eps_barrier=st.get("eps_barrier", 12.9),
        cap_thickness=cap, stack_thickness=max(len(depths) * period, 1e-9),
        metal_coverage=st.get("metal_coverage", 0.5),
        effective_mass_ratio=st.get("effective_mass_ratio", 0.067),
        qw_depths=tuple(depths), rho_per_qw=st.get("rho_per_qw_m2", 1.8e16),
        screening_distance=st.get("screening_distance_um", 0.2),
    )
    stack = None
    try:
        stack = MaterialStack(**kw)
    except ValueError as exc:
        errors.extend(f"device.stack: {e}" for e in str(exc).split("; "))

    osc = CavityOscillatorTable()
    if "oscillators" in d:
        rows = d["oscillators"]
        try:
            osc = CavityOscillatorTable(
                tuple(r["j"] for r in rows), tuple(r["nu_THz"] for r in rows),
                tuple(r["gamma_per_ps"] for r in rows), tuple(r["amplitude"] for r in rows),
                tuple(r["phase_rad"] for r in rows))
        except ValueError as exc:
            errors.append(f"device.oscillators: {exc}")

    cp = d.get("coupling", {})
    source = cp.get("source", "synthetic")
    path = cp.get("path")
    if source == "file" and not path:
        errors.append("device.coupling: source 'file' requires 'path'")
    if path and source == "file" and not Path(path).is_file():
        errors.append(f"device.coupling.path: no such file {path!r}")
    coupled = tuple(cp.get("coupled_modes", (1, 2)))
    missing = sorted(set(coupled) - set(osc.j))
    if missing:
        errors.append(f"device.coupling.coupled_modes: {missing} not in oscillator table")
    base = {}
    for key, val in cp.get("base_profile", {}).items():
        try:
            base[int(key)] = float(val)
        except ValueError:
            errors.append(f"device.coupling.base_profile: key {key!r} is not a cavity index")
        if val < 0:
            errors.append(f"device.coupling.base_profile[{key}] must be >= 0")
    pen = cp.get("penetration_depth_um", 3.0)
    if pen is not None and not pen > 0:
        errors.append("device.coupling.penetration_depth_um must be > 0 or null")
    if stack is None:
        return None
    return DeviceConfig(
        stack=stack, period=d.get("period_um", 30.0),
        alpha_cut=d.get("alpha_cut", 10), oscillators=osc, coupled_modes=coupled,
        global_scale=cp.get("global_scale", 0.23864), base_profile=base,
        penetration_depth=pen, weights_path=path if source == "file" else None,
        cross_diamagnetic=d.get("cross_diamagnetic", True))


def load_config_text(text: str, source: str = "<config>", base_dir: Path | None = None
                     ) -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{source}:{exc.lineno}:{exc.colno}: JSON parse error: {exc.msg}"])
    if not isinstance(raw, dict):
        raise ConfigError([f"{source}: top level must be a JSON object"])
    version = raw.get("schema_version")
    if version is not None and version != SCHEMA_VERSION:
        raise ConfigError([f"{source}: schema_version {version!r} is not supported "
                           f"(expected {SCHEMA_VERSION})"])
    errors = []
    for err in sorted(_VALIDATOR.iter_errors(raw), key=lambda e: list(e.absolute_path)):
        where = ".".join(str(p) for p in err.absolute_path) or "<root>"
        errors.append(f"{where}: {err.message}")
    if errors:
        raise ConfigError(errors)

    if base_dir is not None:
        cp = raw.get("device", {}).get("coupling", {})
        if "path" in cp and not Path(cp["path"]).is_absolute():
            cp["path"] = str(base_dir / cp["path"])

    cfg = RunConfig(raw=raw)
    cfg.model = raw.get("model", "device")
    sp = raw.get("single_pair", {})
    cfg.eta = sp.get("eta", 1.0)
    cfg.nu_cavity = sp.get("nu_cavity_THz", 1.0)
    cfg.nu_matter = sp.get("nu_matter_THz")
    device = _build_device(raw.get("device", {}), errors)
    if device is not None:
        cfg.device = device

    bias = raw.get("bias", {})
    if "nu_c_THz" in bias and "field_T" in bias:
        errors.append("bias: give nu_c_THz or field_T, not both")
    if "field_T" in bias:
        from .plasmons import BiasPoint
        cfg.nu_c = BiasPoint.from_field(bias["field_T"],
                                        cfg.device.stack.effective_mass_ratio).nu_c
    else:
        cfg.nu_c = bias.get("nu_c_THz", 0.52)
    if "nu_c_grid_THz" in bias:
        grid = _grid_values(bias["nu_c_grid_THz"])
        if np.any(grid < 0) or np.any(np.diff(grid) <= 0):
            errors.append("bias.nu_c_grid_THz must be non-negative and strictly increasing")
        cfg.nu_c_grid = grid

    so = raw.get("solver", {})
    cfg.dt = so.get("dt_ps")
    if cfg.dt is not None and not cfg.dt > 0:
        errors.append("solver.dt_ps must be > 0")
    cfg.t_end = so.get("t_end_ps", 210.0)
    gm = so.get("gamma_mp_per_ps", DEFAULT_GAMMA_MP)
    if np.any(np.asarray(gm) < 0):
        errors.append("solver.gamma_mp_per_ps must be >= 0")
    if isinstance(gm, list):
        n_mp = 2 * cfg.device.alpha_cut + 1
        if len(gm) != n_mp:
            errors.append(f"solver.gamma_mp_per_ps has {len(gm)} entries, expected {n_mp}")
        gm = tuple(gm)
    cfg.gamma_mp = gm
    pu = so.get("pulse", {})
    try:
        cfg.pulse = DrivePulse(pu.get("t0_ps", 1.0), pu.get("sigma_ps", 0.1),
                               pu.get("amplitude", 1.0))
        cfg.pulse.check_window(0.0, cfg.t_end)
    except ValueError as exc:
        errors.append(f"solver.pulse: {exc}")
    cfg.dip_depth = so.get("dip_depth", DEFAULT_DIP_DEPTH)
    if not 0 <= cfg.dip_depth < 1:
        errors.append("solver.dip_depth must lie in [0, 1)")
    cfg.kappa_rad = so.get("kappa_rad")
    if "spectral_grid_THz" in so:
        cfg.spectral_grid = _grid_values(so["spectral_grid_THz"])
        if np.any(np.diff(cfg.spectral_grid) <= 0):
            errors.append("solver.spectral_grid_THz must be strictly increasing")
    cfg.output_stride = so.get("output_stride", 1)

    wg = raw.get("wigner", {})
    cfg.wigner_mode = wg.get("cavity_mode", 1)
    cfg.x_range = tuple(wg.get("x_range", (-5.0, 5.0)))
    cfg.p_range = tuple(wg.get("p_range", (-5.0, 5.0)))
    for name, rg in (("x_range", cfg.x_range), ("p_range", cfg.p_range)):
        if not rg[1] > rg[0]:
            errors.append(f"wigner.{name} must be increasing")
    cfg.resolution = wg.get("resolution", 101)
    cfg.fock_n_max = wg.get("fock_n_max")

    orc = raw.get("oracle", {})
    cfg.oracle_etas = tuple(orc.get("etas", (0.1, 0.5, 1.0)))
    cfg.oracle_n_max = orc.get("n_max", 40)
    cfg.oracle_strong_eta = orc.get("strong_eta", 3.0)
    cfg.oracle_n_max_strong = orc.get("n_max_strong", 80)
    for name, n in (("n_max", cfg.oracle_n_max), ("n_max_strong", cfg.oracle_n_max_strong)):
        if (n + 1) ** 2 > 10**6:
            errors.append(f"oracle.{name} = {n} exceeds the Hilbert-space cap")

    cfg.out_dir = raw.get("output", {}).get("directory", "out")
    cfg.config_hash = hashlib.sha256(text.encode("utf-8")).hexdigest()
    if not math.isfinite(cfg.t_end):
        errors.append("solver.t_end_ps must be finite")
    if errors:
        raise ConfigError(errors)
    return cfg


def parse_config(path: str | Path) -> RunConfig:
    """Read, schema-check and physically validate a JSON config file.

    Raises
    ------
    ConfigError
        Listing every problem found (parse errors carry line:column).
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([f"{path}: cannot read config: {exc.strerror}"])
    return load_config_text(text, str(path), base_dir=path.parent)
