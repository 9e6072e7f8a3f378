"""JSON scenario files: schema, parsing and conversion to domain objects.

Example::

    {
      "K": 10, "N": 1000, "M": 100, "Z": [10, 10, 10, 10, 10, 10, 10, 10, 10, 10],
      "popularity": {"zipf": 1.0},
      "scheme": ["hybrid", "pure-coded", "pure-uncoded"],
      "sweep": {"alpha": {"start": 0.5, "stop": 1.6, "step": 0.1}},
      "simulate": true, "slots": 2000, "seed": 7
    }

``popularity`` is either ``{"zipf": alpha}`` or an explicit N x K matrix
(rows are contents, columns SBSs).  ``placement`` is ``{"M1": .., "N1": ..}``
or ``{"groups": [[..]], "X": N x G, "Y": N x K, "Mg": [..]}`` with 0/1 entries
and zero-based SBS indices.  Unknown keys are rejected.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import jsonschema
import numpy as np

from .model import (
    HeteroPlacement,
    HybridPlacement,
    PopularityMatrix,
    SystemConfig,
    validate,
    zipf_popularity,
)

__all__ = ["SCHEMA", "SCHEMES", "ScenarioError", "ScenarioParseError", "Scenario", "load_scenario", "parse_scenario"]

SCHEMES = ("hybrid", "pure-coded", "pure-uncoded", "hetero")

_INT = {"type": "integer"}
_NUM = {"type": "number"}
_MATRIX01 = {"type": "array", "items": {"type": "array", "items": {"enum": [0, 1, True, False]}}}
_RANGE = {
    "type": "object",
    "properties": {"start": _NUM, "stop": _NUM, "step": {"type": "number", "exclusiveMinimum": 0}},
    "required": ["start", "stop", "step"],
    "additionalProperties": False,
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "hybridcache scenario",
    "type": "object",
    "properties": {
        "K": _INT,
        "N": _INT,
        "M": _INT,
        "Z": {"type": "array", "items": _INT},
        "F": _NUM,
        "popularity": {
            "oneOf": [
                {"type": "object", "properties": {"zipf": {"type": "number", "minimum": 0}},
                 "required": ["zipf"], "additionalProperties": False},
                {"type": "array", "items": {"type": "array", "items": _NUM}},
            ]
        },
        "placement": {
            "oneOf": [
                {"type": "object", "properties": {"M1": _INT, "N1": _INT},
                 "required": ["M1", "N1"], "additionalProperties": False},
                {"type": "object",
                 "properties": {"groups": {"type": "array", "items": {"type": "array", "items": _INT}},
                                "X": _MATRIX01, "Y": _MATRIX01, "Mg": {"type": "array", "items": _INT}},
                 "required": ["groups", "X", "Y", "Mg"], "additionalProperties": False},
            ]
        },
        "scheme": {
            "oneOf": [
                {"enum": list(SCHEMES)},
                {"type": "array", "items": {"enum": list(SCHEMES)}, "minItems": 1},
            ]
        },
        "sweep": {
            "type": "object",
            "properties": {
                "alpha": {"oneOf": [{"type": "array", "items": {"type": "number", "minimum": 0}}, _RANGE]},
                "Z": {"type": "array", "items": {"type": "array", "items": _INT}},
                "M": {"oneOf": [{"type": "array", "items": _INT}, _RANGE]},
            },
            "additionalProperties": False,
        },
        "simulate": {"type": "boolean"},
        "slots": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "trace": {"type": "boolean"},
        "max_groups": {"type": "integer", "minimum": 1},
        "prune": {"type": "boolean"},
    },
    "required": ["K", "N", "M", "Z", "popularity"],
    "additionalProperties": False,
}


class ScenarioError(ValueError):
    """Scenario is well-formed but violates a model constraint."""


class ScenarioParseError(ValueError):
    """Scenario text is not valid JSON or does not follow the schema."""


@dataclass(frozen=True)
class Scenario:
    raw: dict
    config: SystemConfig
    popularity: object  # {"zipf": alpha} or an N x K list
    placement: object | None
    schemes: tuple
    sweep: dict
    simulate: bool = False
    slots: int = 2000
    seed: int = 0
    trace: bool = False
    max_groups: int = 2
    prune: bool = False

    @property
    def alpha(self):
        return self.popularity["zipf"] if isinstance(self.popularity, dict) else None

    def pop(self, config: SystemConfig | None = None, alpha: float | None = None) -> PopularityMatrix:
        config = config or self.config
        if isinstance(self.popularity, dict):
            return zipf_popularity(config.N, self.alpha if alpha is None else alpha, config.K)
        return PopularityMatrix(np.array(self.popularity, dtype=float))

    def with_config(self, **changes) -> SystemConfig:
        return replace(self.config, **changes)


def _expand(axis):
    if isinstance(axis, dict):
        n = int(np.floor((axis["stop"] - axis["start"]) / axis["step"] + 1e-9)) + 1
        return [round(axis["start"] + i * axis["step"], 12) for i in range(n)]
    return list(axis)


def _placement(d, config):
    if d is None:
        return None
    if "M1" in d:
        return HybridPlacement(d["M1"], d["N1"])
    X = np.array(d["X"], dtype=bool).reshape(config.N, len(d["groups"])) if d["groups"] else np.zeros((config.N, 0), bool)
    return HeteroPlacement(d["groups"], X, np.array(d["Y"], dtype=bool), d["Mg"])


def parse_scenario(data: dict) -> Scenario:
    """Validate ``data`` against :data:`SCHEMA` and the model constraints."""
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ScenarioParseError(f"field '{where}': {exc.message}") from None
    try:
        config = SystemConfig(data["K"], data["N"], data["M"], data["Z"], data.get("F", 1.0))
    except ValueError as exc:
        raise ScenarioError(f"config: {exc}") from None
    schemes = data.get("scheme", "hybrid")
    schemes = (schemes,) if isinstance(schemes, str) else tuple(schemes)
    sweep = {k: (_expand(v) if k != "Z" else [list(z) for z in v]) for k, v in data.get("sweep", {}).items()}
    if "alpha" in sweep and not isinstance(data["popularity"], dict):
        raise ScenarioError("sweep.alpha requires a zipf popularity")
    for Z in sweep.get("Z", []):
        if len(Z) != config.K:
            raise ScenarioError(f"sweep.Z entry {Z} has length {len(Z)}, expected K={config.K}")
    sc = Scenario(
        raw=data,
        config=config,
        popularity=data["popularity"],
        placement=None,
        schemes=schemes,
        sweep=sweep,
        simulate=data.get("simulate", False),
        slots=data.get("slots", 2000),
        seed=data.get("seed", 0),
        trace=data.get("trace", False),
        max_groups=data.get("max_groups", 2),
        prune=data.get("prune", False),
    )
    try:
        pop = sc.pop()
    except ValueError as exc:
        raise ScenarioError(f"popularity: {exc}") from None
    if pop.p.shape != (config.N, config.K):
        raise ScenarioError(f"popularity: shape {pop.p.shape} != (N, K) = ({config.N}, {config.K})")
    try:
        placement = _placement(data.get("placement"), config)
    except ValueError as exc:
        raise ScenarioError(f"placement: {exc}") from None
    if placement is not None:
        problems = validate(config, pop, placement)
        if problems:
            raise ScenarioError("placement: " + "; ".join(problems))
    return replace(sc, placement=placement)


def load_scenario(path) -> Scenario:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"{path}: {exc}") from None
    return parse_scenario(data)
