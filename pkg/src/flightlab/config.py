"""Scenario configuration files (YAML) and their validation.

A config names a scenario, a seed and optional parameter overrides::

    scenario: theorem1-power
    seed: 20240601
    output_dir: results/theorem1-power
    params:
      n: 5000
      var_band: [0.94, 1.06]

Every parameter has a default in the scenario registry; overrides must use a
known key and a value of the default's type.  The merged parameter set is what
the report records.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from .scenarios import SCENARIOS

TOP_LEVEL_KEYS = {"scenario", "seed", "output_dir", "params"}


class ConfigError(ValueError):
    """Raised with one line per problem found."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass
class ScenarioConfig:
    scenario: str
    seed: int
    params: dict
    output_dir: Optional[str] = None
    overrides: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"scenario": self.scenario, "seed": self.seed, "output_dir": self.output_dir, "params": self.params}


def _type_name(v: Any) -> str:
    if isinstance(v, bool):
        return "boolean"
    if isinstance(v, int):
        return "integer"
    if isinstance(v, float):
        return "number"
    if isinstance(v, str):
        return "string"
    if isinstance(v, list):
        return "list"
    if isinstance(v, dict):
        return "mapping"
    return type(v).__name__


def _conforms(value: Any, default: Any) -> bool:
    if isinstance(default, bool):
        return isinstance(value, bool)
    if isinstance(default, int):
        return isinstance(value, int) and not isinstance(value, bool)
    if isinstance(default, float):
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    return isinstance(value, type(default))


def _check(value: Any, default: Any, where: str, problems: list[str]) -> Any:
    """Validate ``value`` against ``default``'s shape; return it with numbers coerced."""
    if isinstance(default, dict):
        if not isinstance(value, dict):
            problems.append(f"{where}: expected a mapping, got {_type_name(value)}")
            return default
        merged = copy.deepcopy(default)
        for k, v in value.items():
            if k not in default:
                problems.append(f"{where}.{k}: unknown key (known: {', '.join(sorted(default))})")
            else:
                merged[k] = _check(v, default[k], f"{where}.{k}", problems)
        return merged
    if isinstance(default, list):
        if not isinstance(value, list) or not value:
            problems.append(f"{where}: expected a non-empty list, got {_type_name(value)}")
            return default
        if default:
            return [_check(v, default[0], f"{where}[{i}]", problems) for i, v in enumerate(value)]
        return value
    if not _conforms(value, default):
        problems.append(f"{where}: expected {_type_name(default)}, got {_type_name(value)} ({value!r})")
        return default
    return float(value) if isinstance(default, float) else value


def config_from_dict(raw: Any) -> ScenarioConfig:
    problems: list[str] = []
    if not isinstance(raw, dict):
        raise ConfigError([f"config must be a mapping at top level, got {_type_name(raw)}"])
    for k in raw:
        if k not in TOP_LEVEL_KEYS:
            problems.append(f"{k}: unknown top-level key (known: {', '.join(sorted(TOP_LEVEL_KEYS))})")
    name = raw.get("scenario")
    if name is None:
        problems.append("scenario: missing")
    elif name not in SCENARIOS:
        problems.append(f"scenario: unknown name {name!r} (known: {', '.join(SCENARIOS)})")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
        problems.append(f"seed: expected an integer in [0, 2^64), got {seed!r}")
    out = raw.get("output_dir")
    if out is not None and not isinstance(out, str):
        problems.append(f"output_dir: expected a string, got {_type_name(out)}")
    overrides = raw.get("params") or {}
    params = {}
    if name in SCENARIOS:
        params = _check(overrides, SCENARIOS[name].defaults, "params", problems)
    if problems:
        raise ConfigError(problems)
    return ScenarioConfig(name, seed, params, out, overrides)


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([f"cannot read {path}: {exc.strerror}"]) from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError([f"{path}: not valid YAML ({exc})"]) from exc
    return config_from_dict(raw)
