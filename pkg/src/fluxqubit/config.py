"""Run configuration: one strictly validated JSON document plus scalar overrides."""

from __future__ import annotations

import copy
import hashlib
import json
import math
import os
from pathlib import Path

import numpy as np

from .errors import ValidationError

OUTPUT_ENV = "FLUXQUBIT_OUTPUT_DIR"
DEFAULT_OUTPUT = "fluxqubit-out"

OPTIONAL_FLOAT = "float?"
OPTIONAL_INT = "int?"
OPTIONAL_GRID = "grid?"

# block -> key -> (kind, default)
SCHEMA: dict[str, dict[str, tuple]] = {
    "circuit": {
        "alpha": (float, 0.8),
        "ej_over_ec": (float, 40.0),
        "truncation": (int, 12),
        "n_levels": (int, 5),
        "f": (float, 0.5),
        "f_grid": (OPTIONAL_GRID, None),
    },
    "drive": {
        "omega_q": (float, 1.0),
        "lambda_x": (float, 0.02),
        "lambda_z": (float, 0.0),
        "omega_0": (float, 1.0),
        "transverse": (str, "linear"),
        "n": (int, 0),
        "x": (OPTIONAL_FLOAT, None),
        "omega_0_grid": (OPTIONAL_GRID, None),
        "x_grid": (OPTIONAL_GRID, None),
        "horizon": (OPTIONAL_FLOAT, None),
        "samples": (int, 3001),
        "tol": (float, 1e-10),
    },
    "bath": {
        "modes": (int, 21),
        "width": (OPTIONAL_FLOAT, None),
        "half_life_periods": (float, 50.0),
        "horizon_half_lives": (float, 5.0),
        "method": (str, "stroboscopic"),
    },
    "oscillator": {
        "omega": (float, 0.02),
        "g1": (float, 0.01),
        "g2": (float, 2e-4),
        "fock_cutoff": (int, 12),
        "form": (str, "plus-delta"),
        "lambda_model": (str, "bessel"),
        "levels": (int, 2),
        "photons": (OPTIONAL_INT, None),
        "periods": (OPTIONAL_INT, None),
        "min_amplitude": (float, 0.05),
    },
}
TOP_LEVEL = {"output_dir": (str, None), "seed": (OPTIONAL_INT, None)}

REQUIRED_BLOCKS = {
    "spectrum": ("circuit",),
    "matrix-elements": ("circuit",),
    "spectroscopy": ("drive",),
    "transparency": ("drive",),
    "zeno": ("drive", "bath"),
    "oscillator": ("drive", "oscillator"),
    "dispersive-check": ("drive", "oscillator"),
    "coexistence": ("drive", "oscillator"),
}


def _check_value(where: str, kind, value):
    if kind is float or kind == OPTIONAL_FLOAT:
        if value is None and kind == OPTIONAL_FLOAT:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"{where}: expected a number, got {value!r}")
        if not math.isfinite(value):
            raise ValidationError(f"{where}: must be finite")
        return float(value)
    if kind is int or kind == OPTIONAL_INT:
        if value is None and kind == OPTIONAL_INT:
            return None
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(f"{where}: expected an integer, got {value!r}")
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ValidationError(f"{where}: expected a string, got {value!r}")
        return value
    if kind == OPTIONAL_GRID:
        if value is None:
            return None
        grid_values(where, value)
        return value
    raise AssertionError(kind)


def grid_values(where: str, spec) -> np.ndarray:
    """Grid from an explicit list or ``{"start", "stop", "num"}``."""
    if isinstance(spec, list):
        if not spec:
            raise ValidationError(f"{where}: grid is empty")
        return np.array([_check_value(where, float, v) for v in spec])
    if isinstance(spec, dict):
        if set(spec) != {"start", "stop", "num"}:
            raise ValidationError(f"{where}: grid object needs exactly start, stop, num")
        start = _check_value(where + ".start", float, spec["start"])
        stop = _check_value(where + ".stop", float, spec["stop"])
        num = _check_value(where + ".num", int, spec["num"])
        if num < 1:
            raise ValidationError(f"{where}.num must be positive")
        return np.linspace(start, stop, num)
    raise ValidationError(f"{where}: grid must be a list or a start/stop/num object")


def validate(raw: dict, subcommand: str) -> dict:
    """Check keys and types, fill defaults and return a normalized copy.

    Raises
    ------
    ValidationError
        On unknown keys, wrong types or a missing block.
    """
    if subcommand not in REQUIRED_BLOCKS:
        raise ValidationError(f"unknown subcommand {subcommand!r}")
    if not isinstance(raw, dict):
        raise ValidationError("configuration must be a JSON object")
    unknown = set(raw) - set(SCHEMA) - set(TOP_LEVEL)
    if unknown:
        raise ValidationError(f"unknown top-level keys: {sorted(unknown)}")
    missing = [b for b in REQUIRED_BLOCKS[subcommand] if b not in raw]
    if missing:
        raise ValidationError(f"{subcommand} needs config blocks {missing}")
    out: dict = {}
    for key, (kind, default) in TOP_LEVEL.items():
        out[key] = default if raw.get(key) is None else _check_value(key, kind, raw[key])
    for block, fields in SCHEMA.items():
        if block not in raw:
            continue
        given = raw[block]
        if not isinstance(given, dict):
            raise ValidationError(f"{block}: expected an object")
        unknown = set(given) - set(fields)
        if unknown:
            raise ValidationError(f"{block}: unknown keys {sorted(unknown)}")
        out[block] = {k: (copy.deepcopy(d) if k not in given else _check_value(f"{block}.{k}", kind, given[k]))
                      for k, (kind, d) in fields.items()}
    return out


def apply_overrides(raw: dict, assignments: list[str]) -> dict:
    """Apply ``block.key=value`` (or ``key=value`` at top level) overrides.

    Values are parsed as JSON when possible and kept as strings otherwise.
    """
    raw = copy.deepcopy(raw)
    for item in assignments:
        if "=" not in item:
            raise ValidationError(f"override {item!r} must look like block.key=value")
        path, text = item.split("=", 1)
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        parts = path.split(".")
        if len(parts) == 1:
            raw[parts[0]] = value
        elif len(parts) == 2:
            block = raw.setdefault(parts[0], {})
            if not isinstance(block, dict):
                raise ValidationError(f"{parts[0]} is not a block")
            block[parts[1]] = value
        else:
            raise ValidationError(f"override path {path!r} is too deep")
    return raw


def load(path: str | os.PathLike | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc


def config_hash(config: dict) -> str:
    """sha256 of the canonical JSON form."""
    text = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def output_dir(config: dict, override: str | None = None) -> Path:
    if override:
        return Path(override)
    if config.get("output_dir"):
        return Path(config["output_dir"])
    return Path(os.environ.get(OUTPUT_ENV, DEFAULT_OUTPUT))
