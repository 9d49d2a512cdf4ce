"""System configuration, unit parsing, presets, and sweep specification."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .signal_core import SPEED_OF_LIGHT

SWEEP_VARIABLES = ("kappa", "power", "speed", "q")
DEFAULT_KAPPA_SWEEP_DB = [-10.0, 0.0, 10.0, 20.0, 30.0, 40.0]


class ConfigError(ValueError):
    """Raised for unparseable or inconsistent configuration input."""


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def parse_power(value: Any, field_name: str) -> float:
    """Parse a power given in watts (number) or as a '<x> dBm'/'<x> dBW' string."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, str):
        text = value.strip()
        for suffix, offset in (("dBm", -30.0), ("dBW", 0.0)):
            if text.endswith(suffix):
                try:
                    level = float(text[: -len(suffix)].strip())
                except ValueError:
                    raise ConfigError(f"field '{field_name}': cannot parse power '{value}'")
                return 10.0 ** ((level + offset) / 10.0)
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"field '{field_name}': cannot parse power '{value}'")
    raise ConfigError(f"field '{field_name}': expected watts or a dBm/dBW string, got {value!r}")


@dataclass
class SystemConfig:
    """Physical and experiment constants for one simulation setup.

    Power quantities are stored in watts, angles in radians. `slot_power_w`
    holds the per-slot transmit powers (length = antennas); equal allocation
    is the default. `kappa_db` may be `inf` for a pure line-of-sight channel.
    """

    carrier_hz: float = 28e9
    bandwidth_hz: float = 6.25e6
    subcarriers: int = 64
    cyclic_prefix: int = 16
    antennas: int = 10
    users: int = 8
    codebook_size: int = 256
    kappa_db: float = 20.0
    noise_power_w: float = 1e-6
    slot_power_w: np.ndarray = field(default=None)  # type: ignore[assignment]
    antenna_spacing_m: float = None  # type: ignore[assignment]
    speed_mps: float = 39.0
    cell_range_m: tuple[float, float] = (100.0, 200.0)
    trials: int = 1000
    seed: int = 42
    worst_case_heading: bool = True
    carrier_wavenumber_only: bool = False
    baseline_power_split: str = "equal_total"
    sinr_cap_db: float = 80.0

    def __post_init__(self):
        if self.slot_power_w is None:
            self.slot_power_w = np.full(self.antennas, dbm_to_watt(25.0))
        else:
            self.slot_power_w = np.asarray(self.slot_power_w, dtype=float)
        if self.antenna_spacing_m is None:
            self.antenna_spacing_m = SPEED_OF_LIGHT / self.carrier_hz / 2.0
        self.validate()

    def validate(self):
        if self.antennas < 3:
            raise ConfigError("field 'antennas': need at least 3 (two pilot slots plus data)")
        if self.users < 1 or self.users > self.antennas - 2:
            raise ConfigError(
                f"field 'users': must satisfy 1 <= users <= antennas - 2 "
                f"(got users={self.users}, antennas={self.antennas})"
            )
        if self.subcarriers < 1:
            raise ConfigError("field 'subcarriers': must be positive")
        if self.codebook_size < 1:
            raise ConfigError("field 'codebook_size': must be positive")
        if self.bandwidth_hz <= 0:
            raise ConfigError("field 'bandwidth_hz': must be positive")
        if self.noise_power_w <= 0:
            raise ConfigError("field 'noise_power_w': must be positive")
        if self.slot_power_w.shape != (self.antennas,):
            raise ConfigError(
                f"field 'slot_power_w': expected {self.antennas} entries, "
                f"got shape {self.slot_power_w.shape}"
            )
        if np.any(self.slot_power_w <= 0):
            raise ConfigError("field 'slot_power_w': all slot powers must be positive")
        lo, hi = self.cell_range_m
        if not (0 < lo <= hi):
            raise ConfigError("field 'cell_range_m': expected 0 < min <= max")
        if self.trials < 1:
            raise ConfigError("field 'trials': must be >= 1")
        if self.baseline_power_split not in ("equal_total", "per_user"):
            raise ConfigError("field 'baseline_power_split': expected 'equal_total' or 'per_user'")
        if self.speed_mps < 0:
            raise ConfigError("field 'speed_mps': must be nonnegative")

    @property
    def block_duration_s(self) -> float:
        return (self.subcarriers + self.cyclic_prefix) / self.bandwidth_hz

    @property
    def kappa(self) -> float:
        """Rician factor in linear scale (inf means pure LoS)."""
        if math.isinf(self.kappa_db):
            return math.inf
        return db_to_linear(self.kappa_db)

    @property
    def sinr_cap(self) -> float:
        return db_to_linear(self.sinr_cap_db)

    @property
    def average_block_power_w(self) -> float:
        """Average radiated power per subcarrier per block, (1/N) * sum(p_n)."""
        return float(np.mean(self.slot_power_w))

    def echo(self) -> dict:
        """JSON-serializable snapshot of every field."""
        return {
            "carrier_hz": self.carrier_hz,
            "bandwidth_hz": self.bandwidth_hz,
            "subcarriers": self.subcarriers,
            "cyclic_prefix": self.cyclic_prefix,
            "antennas": self.antennas,
            "users": self.users,
            "codebook_size": self.codebook_size,
            "kappa_db": self.kappa_db,
            "noise_power_w": self.noise_power_w,
            "slot_power_w": [float(p) for p in self.slot_power_w],
            "antenna_spacing_m": self.antenna_spacing_m,
            "speed_mps": self.speed_mps,
            "cell_range_m": list(self.cell_range_m),
            "trials": self.trials,
            "seed": self.seed,
            "worst_case_heading": self.worst_case_heading,
            "carrier_wavenumber_only": self.carrier_wavenumber_only,
            "baseline_power_split": self.baseline_power_split,
            "sinr_cap_db": self.sinr_cap_db,
            "block_duration_s": self.block_duration_s,
        }


@dataclass(frozen=True)
class SweepSpec:
    """One swept variable, its values, and the per-point trial count."""

    variable: str
    values: tuple
    trials: int
    base: SystemConfig

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ConfigError(
                f"field 'sweep.variable': expected one of {SWEEP_VARIABLES}, got '{self.variable}'"
            )
        if len(self.values) == 0:
            raise ConfigError("field 'sweep.values': must be nonempty")
        if self.trials < 1:
            raise ConfigError("field 'sweep.trials': must be >= 1")


def apply_sweep_value(base: SystemConfig, variable: str, value: float) -> SystemConfig:
    """Config for one sweep point: kappa in dB, power in dBm, speed in m/s, q as size."""
    if variable == "kappa":
        return replace(base, kappa_db=float(value))
    if variable == "power":
        watts = dbm_to_watt(float(value))
        return replace(base, slot_power_w=np.full(base.antennas, watts))
    if variable == "speed":
        return replace(base, speed_mps=float(value))
    if variable == "q":
        return replace(base, codebook_size=int(value))
    raise ConfigError(f"unknown sweep variable '{variable}'")


def smoke_preset(cfg: SystemConfig) -> SystemConfig:
    """Fast preset for CI-scale runs: 50 trials, 16 subcarriers, 64-entry codebook."""
    return replace(cfg, trials=50, subcarriers=16, codebook_size=64)


_POWER_FIELDS = {"noise_power_w", "slot_power_w"}
_INT_FIELDS = {
    "subcarriers",
    "cyclic_prefix",
    "antennas",
    "users",
    "codebook_size",
    "trials",
    "seed",
}
_FLOAT_FIELDS = {
    "carrier_hz",
    "bandwidth_hz",
    "kappa_db",
    "antenna_spacing_m",
    "speed_mps",
    "sinr_cap_db",
}
_BOOL_FIELDS = {"worst_case_heading", "carrier_wavenumber_only"}
_OTHER_FIELDS = {"cell_range_m", "baseline_power_split"}
_KNOWN_FIELDS = _POWER_FIELDS | _INT_FIELDS | _FLOAT_FIELDS | _BOOL_FIELDS | _OTHER_FIELDS


def _parse_keyvalue_text(text: str, path: str) -> dict:
    """Parse flat 'key = value' lines; values use JSON literals."""
    data: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got '{raw.strip()}'")
        key, value = line.split("=", 1)
        try:
            data[key.strip()] = json.loads(value.strip())
        except json.JSONDecodeError:
            data[key.strip()] = value.strip()
    return data


def _coerce(key: str, value: Any) -> Any:
    if key in _POWER_FIELDS:
        if key == "slot_power_w" and isinstance(value, (list, tuple)):
            return np.array([parse_power(v, key) for v in value], dtype=float)
        return parse_power(value, key)
    if key in _INT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"field '{key}': expected an integer, got {value!r}")
        if float(value) != int(value):
            raise ConfigError(f"field '{key}': expected an integer, got {value!r}")
        return int(value)
    if key in _FLOAT_FIELDS:
        if isinstance(value, str) and value.lower() in ("inf", "infinity"):
            return math.inf
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"field '{key}': expected a number, got {value!r}")
        return float(value)
    if key in _BOOL_FIELDS:
        if not isinstance(value, bool):
            raise ConfigError(f"field '{key}': expected true/false, got {value!r}")
        return value
    if key == "cell_range_m":
        if not (isinstance(value, (list, tuple)) and len(value) == 2):
            raise ConfigError(f"field '{key}': expected [min, max], got {value!r}")
        return (float(value[0]), float(value[1]))
    if key == "baseline_power_split":
        if not isinstance(value, str):
            raise ConfigError(f"field '{key}': expected a string, got {value!r}")
        return value
    raise ConfigError(f"unknown configuration field '{key}'")


def load_config(path: str) -> tuple[SystemConfig, SweepSpec]:
    """Load a JSON or 'key = value' config file; empty input yields defaults.

    A 'sweep' object (JSON) or sweep_variable/sweep_values keys select the
    swept quantity; the default is the kappa sweep in dB.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config '{path}': {exc}") from exc

    if not text.strip():
        data: dict[str, Any] = {}
    else:
        stripped = text.lstrip()
        if stripped.startswith("{"):
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
            if not isinstance(data, dict):
                raise ConfigError(f"{path}: top-level JSON value must be an object")
        else:
            data = _parse_keyvalue_text(text, path)

    sweep_variable = data.pop("sweep_variable", None)
    sweep_values = data.pop("sweep_values", None)
    sweep_obj = data.pop("sweep", None)
    if isinstance(sweep_obj, dict):
        sweep_variable = sweep_obj.get("variable", sweep_variable)
        sweep_values = sweep_obj.get("values", sweep_values)

    kwargs = {}
    for key, value in data.items():
        if key not in _KNOWN_FIELDS:
            raise ConfigError(f"unknown configuration field '{key}'")
        kwargs[key] = _coerce(key, value)

    try:
        cfg = SystemConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    variable = sweep_variable or "kappa"
    if sweep_values is None:
        values = tuple(DEFAULT_KAPPA_SWEEP_DB) if variable == "kappa" else ()
        if not values:
            raise ConfigError(
                f"field 'sweep_values': required for sweep variable '{variable}'"
            )
    else:
        values = tuple(float(v) for v in sweep_values)
    spec = SweepSpec(variable=variable, values=values, trials=cfg.trials, base=cfg)
    return cfg, spec
