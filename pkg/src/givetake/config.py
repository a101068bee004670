"""Run configuration documents (JSON) for the command-line front end.

A config is one JSON object::

    {"command": "density",
     "chain": {"p": {"kind": "linear", "b": 1, "c": 1}, "left": 2, "right": 2},
     "options": {"grid": 2001}}

``parse_config`` validates it, fills defaults and rejects unknown fields;
``emit_config`` writes the normalized form, so emit -> parse -> emit is the
identity.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

from .core import (
    BetaIntFirst,
    BetaOneZ,
    ChainSpec,
    Constant,
    Indicator,
    Linear,
    Mixture,
    PiecewiseConstant,
    Polynomial,
    SearchForm,
)
from .exceptions import DomainError

__all__ = [
    "ConfigError",
    "RunConfig",
    "COMMANDS",
    "parse_config",
    "load_config",
    "emit_config",
    "build_direction",
    "build_law",
    "build_chain",
    "build_coverage",
    "build_search",
]

COMMANDS = ("density", "simulate", "verify", "bvp", "coverage", "search")

OPTION_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "density": {"grid": 2001},
    "simulate": {"n_steps": 10_000},
    "verify": {
        "n_steps": 1_000_000,
        "burn_in": 10_000,
        "ks_max": 0.01,
        "tv_max": 0.02,
        "bins": 200,
        "residual_grid": 201,
        "residual_max": 1e-6,
    },
    "bvp": {"grid": 2001, "residual_grid": 101, "residual_max": 1e-5, "oracle_cells": 0, "oracle_max": 2e-3},
    "coverage": {"n_steps": 1_000_000, "grid": 50, "tv_max": 0.05},
    "search": {},
}

SECTION = {
    "density": "chain",
    "simulate": "chain",
    "verify": "chain",
    "bvp": "chain",
    "coverage": "coverage",
    "search": "search",
}

_DIRECTION_FIELDS = {
    "constant": {"p0"},
    "linear": {"b", "c"},
    "polynomial": {"coefficients"},
    "piecewise": {"breakpoints", "levels"},
    "indicator": {"threshold"},
    "search": {"v", "pivot"},
}
_LAW_FIELDS = {"beta": {"a", "b"}, "mixture": {"terms"}}
_OBJECTIVE_FIELDS = {"abs": {"target"}, "squared": {"target"}, "constant": {"value"}}
_SCHEDULE_FIELDS = {"linear": {"z0", "slope"}}


class ConfigError(DomainError):
    """Malformed or unsupported run configuration."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    spec: Dict[str, Any]
    options: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    out: Optional[str] = None

    def to_dict(self):
        doc = {"command": self.command, SECTION[self.command]: copy.deepcopy(self.spec), "options": dict(self.options)}
        if self.seed is not None:
            doc["seed"] = self.seed
        if self.out is not None:
            doc["out"] = self.out
        return doc


def _only(doc, allowed, where):
    if not isinstance(doc, dict):
        raise ConfigError(f"{where} must be an object, got {type(doc).__name__}")
    extra = set(doc) - set(allowed)
    if extra:
        raise ConfigError(f"unknown field(s) in {where}: {sorted(extra)}")


def _kinded(doc, table, where):
    _only(doc, set().union(*table.values()) | {"kind"}, where)
    kind = doc.get("kind")
    if kind not in table:
        raise ConfigError(f"{where}.kind must be one of {sorted(table)}, got {kind!r}")
    _only(doc, table[kind] | {"kind"}, f"{where} ({kind})")
    missing = table[kind] - set(doc)
    if missing:
        raise ConfigError(f"missing field(s) in {where}: {sorted(missing)}")
    return kind


def _check_direction(doc, where="p"):
    _kinded(doc, _DIRECTION_FIELDS, where)
    return dict(doc)


def _check_law(doc, where):
    if isinstance(doc, bool):
        raise ConfigError(f"{where} must be a number or object")
    if isinstance(doc, (int, float)):
        return doc
    _kinded(doc, _LAW_FIELDS, where)
    return dict(doc)


def _normalize_chain(doc):
    _only(doc, {"p", "left", "right", "x0"}, "chain")
    for key in ("p", "left"):
        if key not in doc:
            raise ConfigError(f"chain.{key} is required")
    out = {"p": _check_direction(doc["p"], "chain.p"), "left": _check_law(doc["left"], "chain.left")}
    out["right"] = _check_law(doc.get("right", doc["left"]), "chain.right")
    out["x0"] = doc.get("x0", 0.5)
    return out


def _normalize_coverage(doc):
    _only(doc, {"dims", "p", "l", "r", "start"}, "coverage")
    for key in ("p", "l", "r"):
        if key not in doc:
            raise ConfigError(f"coverage.{key} is required")
    if not isinstance(doc["p"], list) or len(doc["p"]) != 2:
        raise ConfigError("coverage.p must list two direction functions")
    out = {
        "dims": list(doc.get("dims", [1.0, 1.0])),
        "p": [_check_direction(q, f"coverage.p[{i}]") for i, q in enumerate(doc["p"])],
        "l": list(doc["l"]),
        "r": list(doc["r"]),
    }
    out["start"] = list(doc["start"]) if doc.get("start") is not None else None
    return out


def _normalize_search(doc):
    _only(doc, {"dim", "objective", "v", "schedule", "start", "max_steps", "max_travel"}, "search")
    for key in ("dim", "objective"):
        if key not in doc:
            raise ConfigError(f"search.{key} is required")
    _kinded(doc["objective"], _OBJECTIVE_FIELDS, "search.objective")
    schedule = doc.get("schedule", {"kind": "linear", "z0": 1.0, "slope": 0.01})
    _kinded(schedule, _SCHEDULE_FIELDS, "search.schedule")
    return {
        "dim": doc["dim"],
        "objective": dict(doc["objective"]),
        "v": doc.get("v", 0.0),
        "schedule": dict(schedule),
        "start": list(doc["start"]) if doc.get("start") is not None else None,
        "max_steps": doc.get("max_steps", 2000),
        "max_travel": doc.get("max_travel"),
    }


_NORMALIZERS = {"chain": _normalize_chain, "coverage": _normalize_coverage, "search": _normalize_search}


def parse_config(doc) -> RunConfig:
    """Validate a config document (dict or JSON text) into a :class:`RunConfig`."""
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    command = doc.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"command must be one of {list(COMMANDS)}, got {command!r}")
    section = SECTION[command]
    _only(doc, {"command", section, "options", "seed", "out"}, "config")
    if section not in doc:
        raise ConfigError(f"'{command}' needs a '{section}' section")
    spec = _NORMALIZERS[section](doc[section])
    options = dict(OPTION_DEFAULTS[command])
    given = doc.get("options", {})
    _only(given, set(options), "options")
    options.update(given)
    seed = doc.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64):
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    out = doc.get("out")
    if out is not None and not isinstance(out, str):
        raise ConfigError("out must be a string path")
    return RunConfig(command, spec, options, seed, out)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def emit_config(cfg: RunConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


def build_direction(doc):
    kind = doc["kind"]
    if kind == "constant":
        return Constant(doc["p0"])
    if kind == "linear":
        return Linear(doc["b"], doc["c"])
    if kind == "polynomial":
        return Polynomial(tuple(doc["coefficients"]))
    if kind == "piecewise":
        return PiecewiseConstant(tuple(doc["breakpoints"]), tuple(doc["levels"]))
    if kind == "indicator":
        return Indicator(doc["threshold"])
    return SearchForm(doc["v"], doc["pivot"])


def build_law(doc):
    if isinstance(doc, (int, float)):
        return BetaOneZ(doc)
    if doc["kind"] == "beta":
        return BetaIntFirst(doc["a"], doc["b"])
    return Mixture(tuple(tuple(t) for t in doc["terms"]))


def build_chain(spec) -> ChainSpec:
    return ChainSpec(build_direction(spec["p"]), build_law(spec["left"]), build_law(spec["right"]), spec["x0"])


def build_coverage(spec, grid=50):
    from .apps import CoverageSpec

    start = tuple(spec["start"]) if spec["start"] is not None else None
    return CoverageSpec(
        tuple(spec["dims"]),
        tuple(build_direction(q) for q in spec["p"]),
        tuple(spec["l"]),
        tuple(spec["r"]),
        start,
        grid,
    )


def _objective(doc):
    import numpy as np

    kind = doc["kind"]
    if kind == "constant":
        value = float(doc["value"])
        return lambda x: value
    target = np.asarray(doc["target"], dtype=float)
    if kind == "abs":
        return lambda x: -float(np.abs(np.asarray(x) - target).sum())
    return lambda x: -float(((np.asarray(x) - target) ** 2).sum())


def build_search(spec):
    from .apps import SearchSpec

    z0, slope = float(spec["schedule"]["z0"]), float(spec["schedule"]["slope"])
    if z0 <= 0.0 or slope < 0.0:
        raise ConfigError("schedule needs z0 > 0 and slope >= 0")
    return SearchSpec(
        spec["dim"],
        _objective(spec["objective"]),
        spec["v"],
        lambda n: z0 + slope * n,
        tuple(spec["start"]) if spec["start"] is not None else None,
        spec["max_steps"],
        spec["max_travel"],
    )
