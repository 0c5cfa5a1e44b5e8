"""Run configuration: JSON schema, validation, presets, and hashing.

Config keys carry explicit unit suffixes (temperature_c, b_field_mt,
length_cm, polarization_angle_deg) and are converted to SI exactly once, here.
Validation is total: every problem in the file is reported in one pass with
its dotted key path, and no partially built object escapes a failed load.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

from .errors import ConfigError, DataError
from .lineshape import CellConfig, LONGITUDINAL, TRANSVERSE
from .optimize import FomSpec, ParamBox
from .photon_stats import NoiseModel, RegionLayout

TEMPERATURE_RANGE_C = (20.0, 140.0)
FIELD_RANGE_MT = (0.0, 300.0)
LENGTH_RANGE_CM = (1.0, 100.0)


def preset_paper_optimum() -> dict:
    """Reference operating point: both filters on, Faraday cell at 102 C and
    10 mT, absorption cell at 100 C, signal detunings -2.3 / +7.8 GHz."""
    return {
        "seed": 12345,
        "grid": {"points": 4001, "lo_ghz": -15.0, "hi_ghz": 15.0},
        "cells": {
            "absorption": {
                "length_cm": 30.0,
                "temperature_c": 100.0,
                "b_field_mt": 10.0,
                "geometry": "transverse",
                "rb85_fraction": 0.985,
                "rb87_fraction": 0.015,
                "buffer_pressure_pa": 0.0,
                "polarization_angle_deg": 90.0,
                "temperature_offset_c": 0.0,
            },
            "faraday": {
                "length_cm": 30.0,
                "temperature_c": 102.0,
                "b_field_mt": 10.0,
                "geometry": "longitudinal",
                "rb85_fraction": 0.0,
                "rb87_fraction": 1.0,
                "buffer_pressure_pa": 0.0,
                "polarization_angle_deg": 0.0,
                "temperature_offset_c": 0.0,
            },
        },
        "chain": {"wollaston_extinction": 1.0e-5},
        "fom": {
            "signal_detunings_ghz": [-2.3, 7.8],
            "noise_detunings_ghz": [4.534682610904291, 0.9653173890957092],
            "min_suppression_db": 100.0,
        },
        "noise": {
            "preset": "filtered",
            "frames": 100000,
            "n_regions": 10,
        },
        "optimizer": {
            "budget": 2000,
            "restarts": 3,
            "box": {
                "t_abs_c": [90.0, 120.0],
                "t_far_c": [60.0, 120.0],
                "b_abs_mt": [5.0, 20.0],
                "b_far_mt": [1.0, 20.0],
            },
        },
    }


@dataclass
class RunConfig:
    seed: int
    grid_points: int
    grid_lo_ghz: float
    grid_hi_ghz: float
    cells: dict[str, CellConfig]
    wollaston_extinction: float
    fom: FomSpec
    noise: NoiseModel
    layout: RegionLayout
    frames: int
    optimizer_budget: int
    optimizer_restarts: int
    optimizer_box: ParamBox
    resolved: dict = field(repr=False, default_factory=dict)

    def grid(self):
        import numpy as np

        return np.linspace(self.grid_lo_ghz, self.grid_hi_ghz, self.grid_points)


class _Validator:
    """Collects every error with its dotted path before raising."""

    def __init__(self, data: dict):
        self.data = data
        self.errors: list[str] = []

    def fail(self, path: str, msg: str):
        self.errors.append(f"{path}: {msg}" if path else msg)

    def section(self, data, path, known: set[str]) -> dict:
        if not isinstance(data, dict):
            self.fail(path, f"expected an object, got {type(data).__name__}")
            return {}
        for key in data:
            if key not in known:
                self.fail(f"{path}.{key}" if path else key, "unknown key")
        return data

    def number(self, data, path, key, default=None, lo=None, hi=None, integer=False):
        dotted = f"{path}.{key}" if path else key
        if key not in data:
            if default is None:
                self.fail(dotted, "missing required key")
                return None
            return default
        v = data[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(dotted, f"expected a number, got {type(v).__name__}")
            return default
        if integer and int(v) != v:
            self.fail(dotted, f"expected an integer, got {v}")
            return default
        if not math.isfinite(v):
            self.fail(dotted, "must be finite")
            return default
        if lo is not None and v < lo or hi is not None and v > hi:
            self.fail(dotted, f"value {v} outside valid range [{lo}, {hi}]")
            return default
        return int(v) if integer else float(v)

    def choice(self, data, path, key, options, default=None):
        v = data.get(key, default)
        if v not in options:
            self.fail(f"{path}.{key}", f"must be one of {sorted(options)}, got {v!r}")
            return default
        return v

    def pair(self, data, path, key, default):
        v = data.get(key, default)
        if (not isinstance(v, (list, tuple)) or len(v) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)):
            self.fail(f"{path}.{key}", "expected a pair of numbers")
            return default
        return [float(v[0]), float(v[1])]


_CELL_KEYS = {"length_cm", "temperature_c", "b_field_mt", "geometry", "rb85_fraction",
              "rb87_fraction", "buffer_pressure_pa", "polarization_angle_deg",
              "temperature_offset_c"}


def _validate_cell(v: _Validator, data: dict, path: str, defaults: dict) -> CellConfig | None:
    data = v.section(data, path, _CELL_KEYS)
    merged = dict(defaults)
    merged.update(data)
    n_before = len(v.errors)
    length = v.number(merged, path, "length_cm", defaults["length_cm"], *LENGTH_RANGE_CM)
    temp = v.number(merged, path, "temperature_c", defaults["temperature_c"], *TEMPERATURE_RANGE_C)
    bfield = v.number(merged, path, "b_field_mt", defaults["b_field_mt"], *FIELD_RANGE_MT)
    geometry = v.choice(merged, path, "geometry", {LONGITUDINAL, TRANSVERSE}, defaults["geometry"])
    f85 = v.number(merged, path, "rb85_fraction", defaults["rb85_fraction"], 0.0, 1.0)
    f87 = v.number(merged, path, "rb87_fraction", defaults["rb87_fraction"], 0.0, 1.0)
    buffer_pa = v.number(merged, path, "buffer_pressure_pa", defaults["buffer_pressure_pa"], 0.0, 1e6)
    pol_deg = v.number(merged, path, "polarization_angle_deg", defaults["polarization_angle_deg"], -360.0, 360.0)
    t_off = v.number(merged, path, "temperature_offset_c", defaults["temperature_offset_c"], -5.0, 5.0)
    if f85 is not None and f87 is not None and f85 + f87 > 1.0 + 1e-12:
        v.fail(path, f"rb85_fraction + rb87_fraction = {f85 + f87} exceeds 1")
    if len(v.errors) > n_before:
        return None
    try:
        return CellConfig(
            name=path.rsplit(".", 1)[-1],
            length_m=length * 1e-2,
            temperature_k=273.15 + temp,
            b_field_t=bfield * 1e-3,
            geometry=geometry,
            rb85_fraction=f85,
            rb87_fraction=f87,
            buffer_pressure_pa=buffer_pa,
            polarization_angle_rad=math.radians(pol_deg),
            temperature_offset_k=t_off,
        )
    except ConfigError as exc:
        for e in exc.errors:
            v.fail(path, e)
        return None


def validate_config(data: dict) -> RunConfig:
    """Build a RunConfig from a parsed JSON object, reporting all problems."""
    if not isinstance(data, dict):
        raise ConfigError(["top level: expected a JSON object"])
    defaults = preset_paper_optimum()
    v = _Validator(data)
    v.section(data, "", {"seed", "grid", "cells", "chain", "fom", "noise", "optimizer"})

    seed = v.number(data, "", "seed", defaults["seed"], 0, 2**64 - 1, integer=True)

    grid = v.section(data.get("grid", {}), "grid", {"points", "lo_ghz", "hi_ghz"})
    points = v.number(grid, "grid", "points", defaults["grid"]["points"], 2, 10_000_000, integer=True)
    lo = v.number(grid, "grid", "lo_ghz", defaults["grid"]["lo_ghz"], -1e4, 1e4)
    hi = v.number(grid, "grid", "hi_ghz", defaults["grid"]["hi_ghz"], -1e4, 1e4)
    if lo is not None and hi is not None and lo >= hi:
        v.fail("grid", f"lo_ghz {lo} must be below hi_ghz {hi}")

    cells_in = v.section(data.get("cells", {}), "cells", {"absorption", "faraday"})
    cells: dict[str, CellConfig] = {}
    for name in ("absorption", "faraday"):
        cell = _validate_cell(v, cells_in.get(name, {}), f"cells.{name}", defaults["cells"][name])
        if cell is not None:
            cells[name] = cell

    chain = v.section(data.get("chain", {}), "chain", {"wollaston_extinction"})
    extinction = v.number(chain, "chain", "wollaston_extinction",
                          defaults["chain"]["wollaston_extinction"], 0.0, 0.999)

    fom_in = v.section(data.get("fom", {}), "fom",
                       {"signal_detunings_ghz", "noise_detunings_ghz", "min_suppression_db"})
    sig = v.pair(fom_in, "fom", "signal_detunings_ghz", defaults["fom"]["signal_detunings_ghz"])
    noi = v.pair(fom_in, "fom", "noise_detunings_ghz", defaults["fom"]["noise_detunings_ghz"])
    min_supp = v.number(fom_in, "fom", "min_suppression_db",
                        defaults["fom"]["min_suppression_db"], 1.0, 300.0)

    noise_in = v.section(data.get("noise", {}), "noise",
                         {"preset", "frames", "n_regions", "n_sig", "eta_s", "eta_as",
                          "b_fluorescence", "b_leakage", "intensifier_per_frame"})
    noise_preset = v.choice(noise_in, "noise", "preset", {"filtered", "unfiltered", "custom"},
                            defaults["noise"]["preset"])
    frames = v.number(noise_in, "noise", "frames", defaults["noise"]["frames"], 1, 10**8, integer=True)
    n_regions = v.number(noise_in, "noise", "n_regions", defaults["noise"]["n_regions"], 1, 1000, integer=True)
    custom_fields = {}
    for key, lo_k, hi_k in (("n_sig", 0.0, 100.0), ("eta_s", 0.0, 1.0), ("eta_as", 0.0, 1.0),
                            ("b_fluorescence", 0.0, 1e3), ("b_leakage", 0.0, 1e3),
                            ("intensifier_per_frame", 0.0, 1e4)):
        if key in noise_in:
            val = v.number(noise_in, "noise", key, 0.0, lo_k, hi_k)
            if val is not None:
                custom_fields[key] = val
    if noise_preset == "custom" and not custom_fields:
        v.fail("noise", "preset 'custom' requires explicit noise fields")

    opt_in = v.section(data.get("optimizer", {}), "optimizer", {"budget", "restarts", "box"})
    budget = v.number(opt_in, "optimizer", "budget", defaults["optimizer"]["budget"], 100, 10**7, integer=True)
    restarts = v.number(opt_in, "optimizer", "restarts", defaults["optimizer"]["restarts"], 1, 20, integer=True)
    box_in = v.section(opt_in.get("box", {}), "optimizer.box",
                       {"t_abs_c", "t_far_c", "b_abs_mt", "b_far_mt"})
    box_vals = {}
    for key in ("t_abs_c", "t_far_c", "b_abs_mt", "b_far_mt"):
        box_vals[key] = v.pair(box_in, "optimizer.box", key, defaults["optimizer"]["box"][key])

    if v.errors:
        raise ConfigError(v.errors)

    from .photon_stats import filtered_preset, unfiltered_preset

    if noise_preset == "filtered":
        noise_model, _ = filtered_preset()
    elif noise_preset == "unfiltered":
        noise_model, _ = unfiltered_preset()
    else:
        noise_model = NoiseModel(**custom_fields)
    if noise_preset != "custom" and custom_fields:
        import dataclasses

        noise_model = dataclasses.replace(noise_model, **custom_fields)
    layout = RegionLayout(n_regions=n_regions)

    try:
        fom = FomSpec(
            signal_detunings_ghz=tuple(sig),
            noise_detunings_ghz=tuple(noi),
            min_suppression_db=min_supp,
            wollaston_extinction=max(extinction, 1e-300),
        )
        box = ParamBox(
            t_abs_c=tuple(box_vals["t_abs_c"]),
            t_far_c=tuple(box_vals["t_far_c"]),
            b_abs_t=tuple(x * 1e-3 for x in box_vals["b_abs_mt"]),
            b_far_t=tuple(x * 1e-3 for x in box_vals["b_far_mt"]),
        )
    except ConfigError as exc:
        raise ConfigError(exc.errors) from None

    resolved = _resolve(defaults, data)
    return RunConfig(
        seed=seed,
        grid_points=points,
        grid_lo_ghz=lo,
        grid_hi_ghz=hi,
        cells=cells,
        wollaston_extinction=extinction,
        fom=fom,
        noise=noise_model,
        layout=layout,
        frames=frames,
        optimizer_budget=budget,
        optimizer_restarts=restarts,
        optimizer_box=box,
        resolved=resolved,
    )


def _resolve(defaults: dict, overrides: dict) -> dict:
    out = {}
    for key, dval in defaults.items():
        oval = overrides.get(key)
        if isinstance(dval, dict) and isinstance(oval, dict):
            out[key] = _resolve(dval, oval)
        elif oval is not None:
            out[key] = oval
        else:
            out[key] = dval
    for key, oval in overrides.items():
        if key not in defaults:
            out[key] = oval
    return out


def load_config(path: str | None = None) -> RunConfig:
    """Read, parse, and fully validate a JSON config; None loads the preset."""
    if path is None:
        return validate_config({})
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            [f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"]
        ) from exc
    return validate_config(data)


def config_hash(resolved: dict) -> str:
    """Stable digest of a resolved config for report provenance."""
    blob = json.dumps(resolved, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()
