"""Flat ``section.key = value`` run configuration.

Sections::

    system.   N tau gamma I0 n0 literal_ss
    control.  M1 M2 dt T P horizon_time epsilon cost_indexing seed
              random_starts max_iter rtol
    targets.  I_target n_target
    damping.  lambda1 lambda2 lambda3 lambda4
    run.      u1 u2 T dt system schedule workers
    grid.     u1_min u1_max u1_points u2_min u2_max u2_points
              hopf_u1_min hopf_u1_max hopf_points hopf_u2_min hopf_u2_max
    scenario. any option understood by the chosen experiment

Values are numbers, ``true``/``false``, bare strings, or comma-separated
number lists. Lines starting with ``#`` are comments. Unknown keys are
rejected with a message naming the key.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import ConfigError
from .model import SystemParams
from .nmpc import NmpcConfig

SECTIONS = {
    "system": {"N", "tau", "gamma", "I0", "n0", "literal_ss"},
    "control": {"M1", "M2", "dt", "T", "P", "horizon_time", "epsilon", "cost_indexing", "seed",
                "random_starts", "max_iter", "rtol"},
    "targets": {"I_target", "n_target"},
    "damping": {"lambda1", "lambda2", "lambda3", "lambda4"},
    "run": {"u1", "u2", "T", "dt", "system", "schedule", "workers"},
    "grid": {"u1_min", "u1_max", "u1_points", "u2_min", "u2_max", "u2_points",
             "hopf_u1_min", "hopf_u1_max", "hopf_points", "hopf_u2_min", "hopf_u2_max"},
    "scenario": None,  # free-form, validated by the scenario itself
}

GRID_DEFAULTS = {
    "u1_min": 1.0, "u1_max": 120.0, "u1_points": 20,
    "u2_min": 1e-3, "u2_max": 10.0, "u2_points": 20,
    "hopf_u1_min": 2.0, "hopf_u1_max": 96.0, "hopf_points": 30,
    "hopf_u2_min": 1e-6, "hopf_u2_max": 100.0,
}


def parse_value(text: str) -> Any:
    text = text.strip()
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if low in ("none", "null", ""):
        return None
    if "," in text:
        return tuple(parse_value(t) for t in text.split(",") if t.strip())
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


@dataclass
class RunConfig:
    values: dict[str, dict[str, Any]] = field(default_factory=lambda: {s: {} for s in SECTIONS})

    # ------------------------------------------------------------ building

    def set(self, dotted: str, value: Any) -> None:
        section, sep, key = dotted.strip().partition(".")
        if not sep or not key:
            raise ConfigError(f"config key {dotted!r} must look like section.key")
        if section not in SECTIONS:
            raise ConfigError(f"unknown config key {dotted!r}: section {section!r} not in {sorted(SECTIONS)}")
        allowed = SECTIONS[section]
        if allowed is not None and key not in allowed:
            raise ConfigError(f"unknown config key {dotted!r}; allowed: {', '.join(sorted(allowed))}")
        self.values[section][key] = value

    @classmethod
    def parse(cls, text: str, source: str = "<config>") -> "RunConfig":
        cfg = cls()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{source}:{lineno}: expected key = value, got {raw.strip()!r}")
            key, val = line.split("=", 1)
            try:
                cfg.set(key, parse_value(val))
            except ConfigError as exc:
                raise ConfigError(f"{source}:{lineno}: {exc}") from None
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc}") from None
        return cls.parse(text, str(p))

    def section(self, name: str) -> dict[str, Any]:
        return self.values[name]

    # ------------------------------------------------------------ typed views

    def system_params(self) -> SystemParams:
        s = dict(self.values["system"])
        _check_numeric(s, ("N", "tau", "gamma", "I0", "n0"), "system")
        return _construct(SystemParams, s, "system")

    def nmpc_fields(self) -> dict[str, Any]:
        """NmpcConfig keyword arguments present in the document (M1 may be missing)."""
        c = dict(self.values["control"])
        _check_numeric(c, ("M1", "M2", "dt", "T", "P", "horizon_time", "epsilon", "rtol", "seed",
                           "random_starts", "max_iter"), "control")
        t = self.values["targets"]
        _check_numeric(t, ("I_target", "n_target"), "targets")
        c.update(t)
        d = self.values["damping"]
        _check_numeric(d, tuple(d), "damping")
        if d:
            lam = list(NmpcConfig.__dataclass_fields__["lambdas"].default)
            for i in range(4):
                lam[i] = float(d.get(f"lambda{i + 1}", lam[i]))
            c["lambdas"] = tuple(lam)
        for k in ("P", "seed", "random_starts", "max_iter"):
            if k in c and c[k] is not None:
                if float(c[k]) != int(c[k]):
                    raise ConfigError(f"control.{k} must be an integer, got {c[k]!r}")
                c[k] = int(c[k])
        return c

    def nmpc_config(self) -> NmpcConfig:
        c = self.nmpc_fields()
        for key in ("M1", "M2"):
            if key not in c:
                raise ConfigError(f"missing required config key control.{key}")
        return _construct(NmpcConfig, c, "control")

    def grid(self) -> dict[str, Any]:
        g = dict(GRID_DEFAULTS)
        g.update(self.values["grid"])
        _check_numeric(g, tuple(g), "grid")
        for k in ("u1_points", "u2_points", "hopf_points"):
            if int(g[k]) != g[k] or g[k] < 0:
                raise ConfigError(f"grid.{k} must be a nonnegative integer, got {g[k]!r}")
            g[k] = int(g[k])
        if g["u1_points"] < 1 or g["u2_points"] < 1:
            raise ConfigError("grid.u1_points and grid.u2_points must be >= 1")
        if not 0 < g["u2_min"] <= g["u2_max"]:
            raise ConfigError("grid u2 range must satisfy 0 < u2_min <= u2_max")
        if g["u1_min"] < 0 or g["u1_max"] < g["u1_min"]:
            raise ConfigError("grid u1 range must satisfy 0 <= u1_min <= u1_max")
        return g

    def u1_values(self) -> np.ndarray:
        g = self.grid()
        return np.linspace(g["u1_min"], g["u1_max"], g["u1_points"])

    def u2_values(self) -> np.ndarray:
        g = self.grid()
        return np.geomspace(g["u2_min"], g["u2_max"], g["u2_points"])

    def scenario_overrides(self) -> dict[str, Any]:
        """Bare-name overrides for an experiment: explicit keys from every section."""
        out: dict[str, Any] = {}
        out.update(self.values["system"])
        out.update(self.nmpc_fields())
        out.update(self.values["scenario"])
        return out

    def effective(self) -> dict[str, dict[str, Any]]:
        return {k: dict(v) for k, v in self.values.items() if v}


def _check_numeric(d: Mapping[str, Any], keys, section: str) -> None:
    for k in keys:
        if k not in d or d[k] is None:
            continue
        v = d[k]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or math.isnan(v):
            raise ConfigError(f"{section}.{k} must be a number, got {v!r}")


def _construct(cls, kwargs: dict[str, Any], section: str):
    names = {f.name for f in dataclasses.fields(cls)}
    extra = set(kwargs) - names
    if extra:
        raise ConfigError(f"unknown {section} keys: {', '.join(sorted(extra))}")
    try:
        return cls(**kwargs)
    except ConfigError as exc:
        raise ConfigError(f"{section}: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{section}: {exc}") from None
