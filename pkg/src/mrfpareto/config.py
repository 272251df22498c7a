"""JSON schemas for portfolio and scenario files.

Powers and scales follow the gamma *rate* convention: every factor rate
is ``Ga(power, 1)`` with density proportional to ``exp(-x) x**(power-1)``.
"""

from __future__ import annotations

import hashlib
import json

import jsonschema

from .errors import ValidationError

_FACTOR = {
    "type": "object",
    "required": ["power", "components"],
    "properties": {
        "power": {"type": "number", "exclusiveMinimum": 0},
        "components": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "integer", "minimum": 1},
        },
    },
    "additionalProperties": False,
}

PORTFOLIO_SCHEMA = {
    "type": "object",
    "required": ["sigma"],
    "properties": {
        "sigma": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "number", "exclusiveMinimum": 0},
        },
        "comonotone_factors": {"type": "array", "items": _FACTOR},
        "conditional_factors": {"type": "array", "items": _FACTOR},
    },
    "additionalProperties": False,
}

_LEVEL = {"type": "number", "minimum": 0, "exclusiveMaximum": 1}
_INDEX_SET = {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["portfolio"],
    "properties": {
        "portfolio": PORTFOLIO_SCHEMA,
        "queries": {
            "type": "object",
            "properties": {
                "ddf_points": {"type": "array", "items": {
                    "type": "array", "items": {"type": "number", "minimum": 0}}},
                "pairs": {"type": "array", "items": {
                    "type": "array", "minItems": 2, "maxItems": 2,
                    "items": {"type": "integer", "minimum": 1}}},
                "levels": {"type": "array", "items": _LEVEL},
                "minima_subsets": {"type": "array", "items": _INDEX_SET},
                "bonus_thresholds": {"type": "array", "items": {"type": "number", "minimum": 0}},
                "sample_count": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "mc": {
            "type": "object",
            "properties": {
                "samples": {"type": "integer", "minimum": 10000},
                "seed": {"type": "integer", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
        "output": {"type": "string"},
    },
    "additionalProperties": False,
}


def _path(err) -> str:
    parts = "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path)
    return "$" + parts


def _validate(data, schema, what):
    try:
        jsonschema.validate(data, schema)
    except jsonschema.ValidationError as err:
        raise ValidationError(f"invalid {what} at {_path(err)}: {err.message}") from None


def validate_portfolio(data) -> None:
    _validate(data, PORTFOLIO_SCHEMA, "portfolio")


def validate_scenario(data) -> None:
    _validate(data, SCENARIO_SCHEMA, "scenario")
    levels = data.get("queries", {}).get("levels", [])
    if any(not 0 <= q < 1 for q in levels):
        raise ValidationError("invalid scenario at $.queries.levels: levels must lie in [0, 1)")


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as err:
        raise ValidationError(f"{path}: not valid JSON ({err.msg} at line {err.lineno})") from None
    except OSError as err:
        raise ValidationError(f"cannot read {path}: {err.strerror}") from None


def config_hash(data) -> str:
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()
