"""Run configuration: JSON document, schema-validated with field-path errors."""

from dataclasses import dataclass, field
import json
import math

import jsonschema

from .counting.perturbation import Envelope, PerturbationV, Rectangle
from .errors import ConfigError
from .potential import FourierPotential

_number = {"type": "number"}
_interval = {"type": "array", "items": _number, "minItems": 2, "maxItems": 2}

SCHEMA = {
    "type": "object",
    "required": ["potential", "b"],
    "additionalProperties": False,
    "properties": {
        "potential": {
            "type": "object",
            "required": ["period"],
            "additionalProperties": False,
            "properties": {
                "period": {"type": "number", "exclusiveMinimum": 0},
                "cos": {"type": "array", "items": _number},
                "sin": {"type": "array", "items": _number},
            },
        },
        "b": {"type": "number", "exclusiveMinimum": 0},
        "basis": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "N": {"oneOf": [{"type": "integer", "minimum": 16}, {"const": "auto"}]},
                "Q": {"type": ["integer", "null"], "minimum": 32},
                "eps_conv": {"type": "number", "exclusiveMinimum": 0},
                "N_max": {"type": "integer", "minimum": 16},
            },
        },
        "bands": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "j_max": {"type": "integer", "minimum": 1},
                "k_grid": {"type": "integer", "minimum": 8},
            },
        },
        "perturbation": {
            "type": "object",
            "additionalProperties": False,
            "required": ["rectangles"],
            "properties": {
                "rectangles": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["x", "y"],
                        "additionalProperties": False,
                        "properties": {
                            "x": _interval,
                            "y": _interval,
                            "amplitude": {"type": "number", "exclusiveMinimum": 0},
                        },
                    },
                },
                "envelope": {
                    "type": "object",
                    "required": ["C0", "m1", "m2"],
                    "additionalProperties": False,
                    "properties": {
                        "C0": {"type": "number", "minimum": 0},
                        "m1": {"type": "number", "exclusiveMinimum": 0},
                        "m2": {"type": "number", "exclusiveMinimum": 0},
                    },
                },
            },
        },
        "counting": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "band": {"type": "integer", "minimum": 1},
                "lambdas": {
                    "type": "array",
                    "items": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                    "minItems": 1,
                },
                "oracle_lambdas": {
                    "type": "array",
                    "items": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                    "minItems": 1,
                },
                "L": {"type": ["integer", "null"], "minimum": 1},
                "K_O1": {"type": "integer", "minimum": 0},
                "methods": {
                    "type": "array",
                    "items": {"enum": ["G2", "M1", "nu", "oracle"]},
                },
            },
        },
        "decay": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "band": {"type": "integer", "minimum": 1},
                "k0": _number,
                "interval": _interval,
                "xi": {"type": "array", "items": _number, "minItems": 5},
            },
        },
        "semiclassics": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "bands": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                "x0": {"type": "array", "items": _number},
                "k_points": {"type": "integer", "minimum": 1},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "directory": {"type": "string"},
                "formats": {"type": "array", "items": {"enum": ["csv", "json"]}},
            },
        },
    },
}


@dataclass
class RunConfig:
    potential: FourierPotential
    b: float
    N: object = 128  # int or "auto"
    Q: int = None
    eps_conv: float = 1e-9
    N_max: int = 1024
    j_max: int = 6
    k_grid: int = 512
    perturbation: PerturbationV = None
    band: int = 1
    lambdas: list = field(default_factory=lambda: [10.0**-e for e in range(6, 21, 2)])
    oracle_lambdas: list = None
    L: int = None
    K_O1: int = 3
    methods: list = field(default_factory=lambda: ["G2", "M1", "nu"])
    decay: dict = field(default_factory=dict)
    semiclassics: dict = field(default_factory=dict)
    output_dir: str = "out"
    formats: list = field(default_factory=lambda: ["csv", "json"])
    raw: dict = field(default_factory=dict)


def _path(error):
    parts = [str(p) for p in error.absolute_path]
    if error.validator == "required":
        # message: "'name' is a required property"
        missing = error.message.split("'")[1]
        parts.append(missing)
    elif error.validator == "additionalProperties":
        extra = error.message.split("'")[1] if "'" in error.message else ""
        parts.append(extra)
    return ".".join(parts) or "<root>"


def parse_config(doc):
    """Validate a decoded JSON document and build a RunConfig."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (len(list(e.absolute_path)), e.message))
    if errors:
        err = errors[0]
        raise ConfigError(_path(err), err.message)
    pot = doc["potential"]
    try:
        W = FourierPotential(pot["period"], tuple(pot.get("cos", [0.0])), tuple(pot.get("sin", [])))
    except ValueError as exc:
        raise ConfigError("potential", str(exc)) from exc
    cfg = RunConfig(potential=W, b=float(doc["b"]), raw=doc)
    basis = doc.get("basis", {})
    cfg.N = basis.get("N", cfg.N)
    cfg.Q = basis.get("Q", cfg.Q)
    cfg.eps_conv = basis.get("eps_conv", cfg.eps_conv)
    cfg.N_max = basis.get("N_max", cfg.N_max)
    if cfg.Q is not None and isinstance(cfg.N, int) and cfg.Q < 2 * cfg.N:
        raise ConfigError("basis.Q", f"quadrature order {cfg.Q} must be at least 2N = {2 * cfg.N}")
    bands = doc.get("bands", {})
    cfg.j_max = bands.get("j_max", cfg.j_max)
    cfg.k_grid = bands.get("k_grid", cfg.k_grid)
    if isinstance(cfg.N, int) and cfg.j_max + 1 > cfg.N // 2:
        raise ConfigError("bands.j_max", f"j_max + 1 = {cfg.j_max + 1} exceeds N/2 = {cfg.N // 2}")
    if "perturbation" in doc:
        cfg.perturbation = _perturbation(doc["perturbation"])
    counting = doc.get("counting", {})
    cfg.band = counting.get("band", cfg.band)
    cfg.lambdas = [float(x) for x in counting.get("lambdas", cfg.lambdas)]
    if "oracle_lambdas" in counting:
        cfg.oracle_lambdas = [float(x) for x in counting["oracle_lambdas"]]
    cfg.L = counting.get("L", cfg.L)
    cfg.K_O1 = counting.get("K_O1", cfg.K_O1)
    cfg.methods = list(counting.get("methods", cfg.methods))
    if min(cfg.lambdas) < 1e-300 or any(not math.isfinite(x) for x in cfg.lambdas):
        raise ConfigError("counting.lambdas", "lambda values must be finite and representable")
    cfg.decay = dict(doc.get("decay", {}))
    cfg.semiclassics = dict(doc.get("semiclassics", {}))
    out = doc.get("output", {})
    cfg.output_dir = out.get("directory", cfg.output_dir)
    cfg.formats = list(out.get("formats", cfg.formats))
    return cfg


def _perturbation(doc):
    rects = []
    for i, r in enumerate(doc["rectangles"]):
        try:
            rects.append(Rectangle(r["x"][0], r["x"][1], r["y"][0], r["y"][1], r.get("amplitude", 1.0)))
        except ValueError as exc:
            raise ConfigError(f"perturbation.rectangles.{i}", str(exc)) from exc
    env = doc.get("envelope")
    envelope = Envelope(env["C0"], env["m1"], env["m2"]) if env else None
    try:
        return PerturbationV(tuple(rects), envelope)
    except ValueError as exc:
        raise ConfigError("perturbation.envelope", str(exc)) from exc


def load_config(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError("<file>", f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from exc
    return parse_config(doc)
