"""Report envelopes: config echo, result payload, verdict, and a metadata block
that is the only place wall-clock data may appear."""
from __future__ import annotations

import datetime as _dt
import json
import platform

import jsonschema

from . import __version__

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "twistsum report",
    "type": "object",
    "required": ["command", "config", "result", "pass", "metadata"],
    "properties": {
        "command": {"type": "string"},
        "config": {"type": "object"},
        "result": {},
        "pass": {"type": "boolean"},
        "warnings": {"type": "array", "items": {"type": "string"}},
        "metadata": {
            "type": "object",
            "required": ["timestamp", "version"],
            "properties": {"timestamp": {"type": "string"}, "version": {"type": "string"},
                           "python": {"type": "string"}},
        },
    },
    "additionalProperties": False,
}

SUITE_RESULT_SCHEMA = {
    "type": "object",
    "required": ["suite", "pass", "config", "summary", "witnesses"],
    "properties": {
        "suite": {"type": "string"},
        "pass": {"type": "boolean"},
        "config": {"type": "object"},
        "summary": {"type": "object"},
        "witnesses": {"type": "array"},
    },
}

COUNT_RESULT_SCHEMA = {
    "type": "object",
    "required": ["query", "matched", "r_k", "partition", "bounds", "verdicts", "undecided",
                 "exceptional_primes", "p_f", "unresolved", "warnings"],
    "properties": {
        "r_k": {"type": "integer", "minimum": 0},
        "matched": {"type": "array", "items": {"type": "integer"}},
        "partition": {"type": "object", "additionalProperties": {"type": "array", "items": {"type": "integer"}}},
        "verdicts": {"type": "object", "additionalProperties": {"type": ["boolean", "null"]}},
    },
}


def _canonical(obj):
    """JSON-safe deep copy: tuples to lists, non-string keys to strings."""
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, float) and obj != obj:
        return "nan"
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    if hasattr(obj, "item"):  # numpy scalar
        return _canonical(obj.item())
    return str(obj)


def build_report(command: str, config: dict, result, passed: bool, warnings=()) -> dict:
    rep = {
        "command": command,
        "config": _canonical(config),
        "result": _canonical(result),
        "pass": bool(passed),
        "warnings": list(warnings),
        "metadata": {"timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
                     "version": __version__, "python": platform.python_version()},
    }
    jsonschema.validate(rep, REPORT_SCHEMA)
    return rep


def validate_report(rep: dict) -> None:
    jsonschema.validate(rep, REPORT_SCHEMA)
    if rep["command"] == "lemma":
        jsonschema.validate(rep["result"], SUITE_RESULT_SCHEMA)
    elif rep["command"] == "count" and isinstance(rep["result"], dict) and "r_k" in rep["result"]:
        jsonschema.validate(rep["result"], COUNT_RESULT_SCHEMA)


def dumps(rep: dict) -> str:
    return json.dumps(rep, indent=2, sort_keys=True) + "\n"


def deterministic_view(rep: dict) -> str:
    """The bytes covered by the determinism contract: everything but metadata."""
    return dumps({k: v for k, v in rep.items() if k != "metadata"})
