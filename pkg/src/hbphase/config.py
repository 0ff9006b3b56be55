"""Run configuration: JSON schema, parsing with located errors, canonical emit.

A configuration looks like::

    {
      "model": {"type": "two_mode", "omega1": 1, "omega2": 1, "lambda": 2.0},
      "task": "phase-scan",
      "path": {"target": "chi1", "lo": 0, "hi": 2, "samples": 201},
      "solver": {"tol_im": 1e-8}
    }

Complex parameters are written as a number or as ``[re, im]``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import jsonschema

from .eigen import SolverOptions
from .errors import HBError
from .model import MODEL_TYPES, complete_description

TASKS = ("spectrum", "phase-scan", "critical", "qfi", "check", "dump-matrix")

_NUMBER = {"type": "number"}
_COMPLEX = {"oneOf": [_NUMBER, {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}]}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["model"],
    "additionalProperties": False,
    "properties": {
        "model": {
            "type": "object",
            "required": ["type"],
            "properties": {"type": {"enum": sorted(MODEL_TYPES)}},
        },
        "task": {"enum": list(TASKS)},
        "path": {
            "type": "object",
            "required": ["target", "lo", "hi"],
            "additionalProperties": False,
            "properties": {
                "target": {"type": "string"},
                "lo": _NUMBER,
                "hi": _NUMBER,
                "samples": {"type": "integer", "minimum": 2},
                "scale": {"enum": ["linear", "log"]},
                "tol": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "qfi": {
            "type": "object",
            "required": ["phi"],
            "additionalProperties": False,
            "properties": {
                "phi": {"type": "string"},
                "at": _NUMBER,
                "step": {"type": "number", "exclusiveMinimum": 0},
                "n_max": {"type": "integer", "minimum": 2},
                "richardson": {"type": "boolean"},
                "gaps": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 3},
            },
        },
        "check": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"n_max": {"type": "integer", "minimum": 2}},
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "balance": {"type": "boolean"},
                "max_sweeps": {"type": ["integer", "null"], "minimum": 1},
                "tol_im": {"type": "number", "exclusiveMinimum": 0},
                "seed": {"type": "integer", "minimum": 0},
            },
        },
    },
}


class ConfigError(HBError, ValueError):
    """Configuration problems, each as ``(json_pointer, message)``."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"{p or '/'}: {m}" for p, m in self.errors))


def _pointer(parts) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in parts)


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


# nesting depth of each field of the "general" model; every other field is a scalar
_GENERAL_DEPTH = {"omega": 1, "chi": 1, "lam": 2, "g": 2}


def _decode_entry(v, where):
    if _is_number(v):
        return v
    if isinstance(v, list) and len(v) == 2 and all(_is_number(x) for x in v):
        return complex(v[0], v[1])
    raise ConfigError([(_pointer(where), f"{v!r} is not a number or [re, im] pair")])


def _decode(v, depth: int, where, real: bool = False):
    if depth == 0:
        if real and not _is_number(v):
            raise ConfigError([(_pointer(where), f"{v!r} is not a real number")])
        return _decode_entry(v, where)
    if not isinstance(v, list):
        raise ConfigError([(_pointer(where), f"expected an array, got {v!r}")])
    return [_decode(x, depth - 1, [*where, i], real) for i, x in enumerate(v)]


def _encode(v):
    if isinstance(v, complex):
        return [v.real, v.imag] if v.imag != 0 else v.real
    if isinstance(v, (list, tuple)):
        return [_encode(x) for x in v]
    return v


@dataclass(frozen=True)
class RunConfig:
    model: dict
    task: str = "spectrum"
    path: dict | None = None
    qfi: dict | None = None
    check: dict = field(default_factory=dict)
    solver: SolverOptions = field(default_factory=SolverOptions)

    def to_dict(self) -> dict:
        out = {"model": {k: _encode(v) for k, v in self.model.items()}, "task": self.task}
        if self.path is not None:
            out["path"] = dict(self.path)
        if self.qfi is not None:
            out["qfi"] = dict(self.qfi)
        if self.check:
            out["check"] = dict(self.check)
        s = self.solver
        out["solver"] = {"balance": s.balance, "max_sweeps": s.max_sweeps, "tol_im": s.tol_im, "seed": s.seed}
        return out


def emit(cfg: RunConfig) -> str:
    """Canonical JSON text; ``parse_config(emit(c)) == c``."""
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n"


def parse_config(text: str) -> RunConfig:
    """Validate and decode a configuration document.

    Raises :class:`ConfigError` listing every problem with its JSON-pointer
    location (``/model/type``, ``/path/target``, ...).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([("", f"malformed JSON: {exc.msg} at line {exc.lineno} column {exc.colno}")]) from None
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        raise ConfigError([(_pointer(e.absolute_path), e.message) for e in errors])

    raw_model = doc["model"]
    kind = raw_model["type"]
    decoded = {"type": kind}
    for k, v in raw_model.items():
        if k == "type":
            continue
        depth = _GENERAL_DEPTH.get(k, 0) if kind == "general" else 0
        decoded[k] = _decode(v, depth, ["model", k], real=(kind == "general" and k == "omega"))
    try:
        model = complete_description(decoded)
    except KeyError as exc:
        raise ConfigError([(_pointer(["model"]), f"missing parameter {exc.args[0]!r} for model type {kind!r}")]) from None
    except ValueError as exc:
        raise ConfigError([(_pointer(["model"]), str(exc))]) from None

    task = doc.get("task", "spectrum")
    path = doc.get("path")
    if path is not None:
        path = {"samples": 201, "scale": "linear", **path}
        if path["target"] not in MODEL_TYPES[kind].scalar:
            raise ConfigError([(_pointer(["path", "target"]),
                                f"target not found: {path['target']!r} is not a scalar parameter of {kind!r} "
                                f"(choose from {list(MODEL_TYPES[kind].scalar)})")])
        if not path["lo"] < path["hi"]:
            raise ConfigError([(_pointer(["path"]), "lo must be smaller than hi")])
    if task in ("phase-scan", "critical") and path is None:
        raise ConfigError([(_pointer(["path"]), f"task {task!r} needs a 'path' section")])
    qfi = doc.get("qfi")
    if qfi is not None:
        qfi = {"step": 1e-5, "richardson": False, **qfi}
    if task == "qfi" and qfi is None:
        raise ConfigError([(_pointer(["qfi"]), "task 'qfi' needs a 'qfi' section")])
    s = doc.get("solver", {})
    solver = SolverOptions(
        balance=s.get("balance", True),
        max_sweeps=s.get("max_sweeps"),
        tol_im=float(s.get("tol_im", 1e-8)),
        seed=int(s.get("seed", 0)),
    )
    return RunConfig(model, task, path, qfi, dict(doc.get("check", {})), solver)


__all__ = ["TASKS", "SCHEMA", "ConfigError", "RunConfig", "parse_config", "emit"]
