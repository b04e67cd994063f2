"""Scenario configuration files: JSON schema, validation, and resolution."""

from __future__ import annotations

import json
from dataclasses import dataclass

import jsonschema

from . import distributions
from .errors import ConfigError, AoiqError
from .scenario import Scenario

_DIST_SCHEMAS = [
    {
        "type": "object",
        "properties": {"kind": {"const": "exponential"}, "rate": {"type": "number", "exclusiveMinimum": 0}},
        "required": ["kind", "rate"],
        "additionalProperties": False,
    },
    {
        "type": "object",
        "properties": {
            "kind": {"const": "erlang"},
            "shape": {"type": "integer", "minimum": 1},
            "rate": {"type": "number", "exclusiveMinimum": 0},
        },
        "required": ["kind", "shape", "rate"],
        "additionalProperties": False,
    },
    {
        "type": "object",
        "properties": {
            "kind": {"const": "pareto"},
            "theta": {"type": "number", "exclusiveMinimum": 0},
            "alpha": {"type": "number", "exclusiveMinimum": 0},
        },
        "required": ["kind", "theta", "alpha"],
        "additionalProperties": False,
    },
    {
        "type": "object",
        "properties": {
            "kind": {"const": "hyperexp2"},
            "p": {"type": "number", "minimum": 0, "maximum": 1},
            "rate1": {"type": "number", "exclusiveMinimum": 0},
            "rate2": {"type": "number", "exclusiveMinimum": 0},
        },
        "required": ["kind", "p", "rate1", "rate2"],
        "additionalProperties": False,
    },
    {
        "type": "object",
        "properties": {"kind": {"const": "deterministic"}, "value": {"type": "number", "exclusiveMinimum": 0}},
        "required": ["kind", "value"],
        "additionalProperties": False,
    },
]

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "sources": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {"rate": {"type": "number", "exclusiveMinimum": 0}},
                "required": ["rate"],
                "additionalProperties": False,
            },
        },
        "adversary": {
            "type": "object",
            "properties": {
                "index": {"type": "integer", "minimum": 0},
                "rate": {"type": "number", "minimum": 0},
                "beta": {"type": "number", "minimum": 1},
            },
            "required": ["rate"],
            "additionalProperties": False,
        },
        "caps": {
            "type": "object",
            "properties": {
                "lambda_max": {"type": "number", "exclusiveMinimum": 0},
                "beta_max": {"type": "number", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "service": {"oneOf": _DIST_SCHEMAS},
        "sim": {
            "type": "object",
            "properties": {
                "runs": {"type": "integer", "minimum": 2},
                "deliveries_per_run": {"type": "integer", "minimum": 1},
                "warmup_fraction": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "confidence": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            },
            "additionalProperties": False,
        },
        "sweep": {
            "type": "object",
            "properties": {
                "parameter": {"type": "string"},
                "values": {"type": "array", "minItems": 1, "items": {"type": "number"}},
            },
            "required": ["parameter", "values"],
            "additionalProperties": False,
        },
    },
    "required": ["sources", "adversary", "service"],
    "additionalProperties": False,
}

SIM_DEFAULTS = {
    "runs": 12,
    "deliveries_per_run": 10_000,
    "warmup_fraction": 0.1,
    "seed": 1,
    "confidence": 0.95,
}

CAP_DEFAULTS = {"lambda_max": 2.0, "beta_max": 2.0}


@dataclass(frozen=True)
class SimSettings:
    runs: int
    deliveries_per_run: int
    warmup_fraction: float
    seed: int
    confidence: float


@dataclass(frozen=True)
class ResolvedConfig:
    scenario: Scenario
    sim: SimSettings
    sweep: dict | None
    raw: dict

    def describe(self) -> dict:
        """Fully resolved document; feeding it back reproduces the outputs."""
        return self.raw


def _json_path(error) -> str:
    parts = ["$"]
    for p in error.absolute_path:
        parts.append(f"[{p}]" if isinstance(p, int) else f".{p}")
    return "".join(parts)


def validate_document(doc: dict) -> None:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ConfigError(err.message, _json_path(err))


def resolve(doc: dict) -> ResolvedConfig:
    """Validate a config document, apply defaults, and build the scenario."""
    validate_document(doc)
    adversary = dict(doc["adversary"])
    adversary.setdefault("index", len(doc["sources"]))
    adversary.setdefault("beta", 1.5 if adversary["rate"] > 0 else 1.0)
    if not 0 <= adversary["index"] <= len(doc["sources"]):
        raise ConfigError(
            f"adversary index {adversary['index']} out of range", "$.adversary.index"
        )
    caps = {**CAP_DEFAULTS, **doc.get("caps", {})}
    sim = {**SIM_DEFAULTS, **doc.get("sim", {})}

    lambdas = [s["rate"] for s in doc["sources"]]
    lambdas.insert(adversary["index"], adversary["rate"])
    try:
        service = distributions.from_config(doc["service"])
        scenario = Scenario(
            lambdas=tuple(lambdas),
            adversary_index=adversary["index"],
            service=service,
            beta=adversary["beta"],
            lambda_max=caps["lambda_max"],
            beta_max=caps["beta_max"],
        )
    except AoiqError as exc:
        raise ConfigError(str(exc), "$") from exc

    resolved_raw = {
        "sources": [{"rate": s["rate"]} for s in doc["sources"]],
        "adversary": adversary,
        "caps": caps,
        "service": doc["service"],
        "sim": sim,
    }
    if "sweep" in doc:
        resolved_raw["sweep"] = doc["sweep"]
    return ResolvedConfig(
        scenario=scenario,
        sim=SimSettings(**sim),
        sweep=doc.get("sweep"),
        raw=resolved_raw,
    )


def load(path: str) -> ResolvedConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return resolve(doc)


def set_parameter(doc: dict, path: str, value: float) -> dict:
    """Return a copy of the raw document with a dotted-path entry replaced.

    Paths address the document, e.g. ``adversary.rate``, ``adversary.beta``,
    ``sources.0.rate``.
    """
    out = json.loads(json.dumps(doc))
    node = out
    keys = path.split(".")
    try:
        for key in keys[:-1]:
            node = node[int(key)] if isinstance(node, list) else node[key]
        last = keys[-1]
        if isinstance(node, list):
            node[int(last)] = value
        else:
            if last not in node:
                raise KeyError(last)
            node[last] = value
    except (KeyError, IndexError, ValueError, TypeError) as exc:
        raise ConfigError(f"unknown sweep parameter path {path!r}", "$.sweep.parameter") from exc
    return out
