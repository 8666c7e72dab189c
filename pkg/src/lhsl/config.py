"""Run configuration: a YAML file with one mapping per block.

Element values use engineering units at this boundary (nH, pF); lengths are
metres and qubit frequencies are multiples of omega_sl.  Everything is
converted to SI when specs are built.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np
import yaml

from .circuit import (
    PAPER_C_R,
    PAPER_C_SL,
    PAPER_D_R,
    PAPER_DZ,
    PAPER_L_R,
    PAPER_L_SL,
    PAPER_N_R,
    RightHandedSpec,
    SuperlatticeSpec,
)
from .errors import ConfigError, DomainError
from .modes import HybridLineSpec

_REQUIRED = object()

# block -> key -> (kind, default)
SCHEMA = {
    "superlattice": {
        "inductance_nH": ("float", _REQUIRED),
        "capacitance_pF": ("float", _REQUIRED),
        "eps": ("float", _REQUIRED),
        "n_cells": ("int", _REQUIRED),
        "dz_m": ("float", _REQUIRED),
    },
    "right_handed": {
        "cell_inductance_nH": ("float", _REQUIRED),
        "cell_capacitance_pF": ("float", _REQUIRED),
        "n_cells": ("int", _REQUIRED),
        "length_m": ("float", _REQUIRED),
    },
    "qubit": {
        "delta0_over_wsl": ("grid", [1.25, 1.5, 1.75, 2.0]),
        "g_over_wsl": ("grid", {"start": 0.0, "stop": 0.1, "num": 201}),
    },
    "solver": {
        "points_per_mode": ("int", 20),
        "root_rtol": ("float", 8.9e-16),
        "renorm_tol": ("float", 1e-10),
        "max_iter": ("int", 10_000),
        "floor_ratio": ("float", 1e-8),
        "jump_threshold": ("float", 0.05),
        "dom_edge_margin": ("int", 5),
        "profile_rh_points": ("int", 400),
    },
    "output": {
        "dir": ("str", None),
        "format": ("str", "csv"),
    },
}

PAPER_DEFAULTS = {
    "superlattice": {
        "inductance_nH": PAPER_L_SL * 1e9,
        "capacitance_pF": PAPER_C_SL * 1e12,
        "eps": 2.0,
        "n_cells": 200,
        "dz_m": PAPER_DZ,
    },
    "right_handed": {
        "cell_inductance_nH": PAPER_L_R * 1e9,
        "cell_capacitance_pF": PAPER_C_R * 1e12,
        "n_cells": PAPER_N_R,
        "length_m": PAPER_D_R,
    },
}


def _compose_with_lines(text: str, source: str):
    """Parse YAML into plain data plus a map from key path to line number."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"{source}: cannot parse YAML: {exc}",
                          line=mark.line + 1 if mark else None) from None
    lines: dict[tuple, int] = {}

    def walk(n, path):
        if isinstance(n, yaml.MappingNode):
            for key_node, value_node in n.value:
                lines[path + (key_node.value,)] = key_node.start_mark.line + 1
                walk(value_node, path + (key_node.value,))

    if node is not None:
        walk(node, ())
    data = yaml.safe_load(text) if node is not None else {}
    return data or {}, lines


def _deep_merge(base: dict, top: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in top.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _coerce(kind, value, key, line):
    def fail(expected):
        raise ConfigError(f"{key}: expected {expected}, got {value!r}", key=key, line=line)

    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            fail("a number")
        return float(value)
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            fail("an integer")
        return int(value)
    if kind == "str":
        if value is not None and not isinstance(value, str):
            fail("a string")
        return value
    if kind == "grid":
        if isinstance(value, list):
            if not value or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
                fail("a non-empty list of numbers")
            return [float(v) for v in value]
        if isinstance(value, dict):
            if set(value) != {"start", "stop", "num"}:
                fail("a mapping with exactly start, stop, num")
            return {"start": _coerce("float", value["start"], key + ".start", line),
                    "stop": _coerce("float", value["stop"], key + ".stop", line),
                    "num": _coerce("int", value["num"], key + ".num", line)}
        fail("a list or a {start, stop, num} mapping")
    raise AssertionError(kind)


def normalize(data: dict, lines: dict | None = None) -> dict:
    """Validate ``data`` against the schema and fill in optional defaults."""
    lines = lines or {}
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping of blocks")
    for block in data:
        if block not in SCHEMA:
            raise ConfigError(f"unknown block {block!r}", key=str(block), line=lines.get((block,)))
    out = {}
    for block, fields in SCHEMA.items():
        given = data.get(block) or {}
        if not isinstance(given, dict):
            raise ConfigError(f"{block}: expected a mapping", key=block, line=lines.get((block,)))
        for key in given:
            if key not in fields:
                raise ConfigError(f"unknown key {block}.{key}", key=f"{block}.{key}",
                                  line=lines.get((block, key)))
        out[block] = {}
        for key, (kind, default) in fields.items():
            name = f"{block}.{key}"
            if key in given:
                out[block][key] = _coerce(kind, given[key], name, lines.get((block, key)))
            elif default is _REQUIRED:
                raise ConfigError(f"missing required key {name}", key=name,
                                  line=lines.get((block,)))
            else:
                out[block][key] = copy.deepcopy(default)
    if out["output"]["format"] not in ("csv", "json"):
        raise ConfigError("output.format must be 'csv' or 'json'", key="output.format",
                          line=lines.get(("output", "format")))
    return out


def expand_grid(grid) -> np.ndarray:
    if isinstance(grid, dict):
        return np.linspace(grid["start"], grid["stop"], grid["num"])
    return np.asarray(grid, dtype=float)


@dataclass(frozen=True)
class RunConfig:
    data: dict

    @property
    def line(self) -> HybridLineSpec:
        s, r = self.data["superlattice"], self.data["right_handed"]
        try:
            sl = SuperlatticeSpec(s["inductance_nH"] * 1e-9, s["capacitance_pF"] * 1e-12,
                                  s["eps"], s["n_cells"], s["dz_m"])
            rh = RightHandedSpec(r["cell_inductance_nH"] * 1e-9, r["cell_capacitance_pF"] * 1e-12,
                                 r["n_cells"], r["length_m"])
        except DomainError as exc:
            raise ConfigError(str(exc)) from None
        return HybridLineSpec(sl, rh)

    @property
    def solver(self) -> dict:
        return self.data["solver"]

    @property
    def delta0_grid(self) -> np.ndarray:
        return expand_grid(self.data["qubit"]["delta0_over_wsl"])

    @property
    def g_grid(self) -> np.ndarray:
        return expand_grid(self.data["qubit"]["g_over_wsl"])

    def dump(self) -> str:
        return yaml.safe_dump(self.data, sort_keys=False)


def load_config(path=None, paper_defaults: bool = False, overrides: dict | None = None) -> RunConfig:
    """Read, merge and validate a configuration.

    ``paper_defaults`` supplies the element values first; the file and then
    ``overrides`` (dotted keys) are layered on top.
    """
    data: dict = copy.deepcopy(PAPER_DEFAULTS) if paper_defaults else {}
    lines: dict = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        file_data, lines = _compose_with_lines(text, str(path))
        if not isinstance(file_data, dict):
            raise ConfigError("configuration must be a mapping of blocks", line=1)
        data = _deep_merge(data, file_data)
    for dotted, value in (overrides or {}).items():
        block, _, key = dotted.partition(".")
        if not key:
            raise ConfigError(f"override {dotted!r} must be block.key", key=dotted)
        data.setdefault(block, {})
        if not isinstance(data[block], dict):
            raise ConfigError(f"{block}: expected a mapping", key=block)
        data[block][key] = value
    if path is None and not paper_defaults and not data:
        raise ConfigError("no configuration: pass --config PATH or --paper-defaults")
    return RunConfig(normalize(data, lines))
