"""JSON schemas, deterministic serialization and CSV writers for inputs and artifacts."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import jsonschema
import numpy as np

from .errors import ValidationError
from .integrator import ProblemDef
from .nonlinearity import Nonlinearity
from .weight import WeightSpec

_num = {"type": "number"}
_nonneg = {"type": "number", "minimum": 0}
_nullable_num = {"type": ["number", "null"]}

WEIGHT_SCHEMA = {
    "type": "object",
    "required": ["horizon", "pieces"],
    "properties": {
        "horizon": {"type": "number", "exclusiveMinimum": 0},
        "pieces": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["from", "to", "kind", "data"],
                "properties": {
                    "from": _num,
                    "to": _num,
                    "kind": {"enum": ["constant", "poly", "samples"]},
                    "data": {},
                },
            },
        },
    },
}

NONLINEARITY_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["logistic2", "logistic", "poly", "samples"]},
        "data": {},
        "lipschitz": {"type": "number", "exclusiveMinimum": 0},
    },
}

PROBLEM_SCHEMA = {
    "type": "object",
    "required": ["weight"],
    "properties": {
        "weight": WEIGHT_SCHEMA,
        "g": NONLINEARITY_SCHEMA,
        "lambda": _nonneg,
        "mu": _nonneg,
    },
}

RADIAL_SCHEMA = {
    "type": "object",
    "required": ["N", "R_i", "R_e", "weight"],
    "properties": {
        "N": {"type": "integer", "minimum": 2},
        "R_i": {"type": "number", "exclusiveMinimum": 0},
        "R_e": {"type": "number", "exclusiveMinimum": 0},
        "weight": WEIGHT_SCHEMA,
        "g": NONLINEARITY_SCHEMA,
        "lambda": _nonneg,
        "mu": _nonneg,
    },
}

_point = {
    "type": "object",
    "required": ["xi_forward", "xi_backward", "x", "y", "residual"],
    "properties": {k: _nullable_num for k in ("xi_forward", "xi_backward", "x", "y", "residual")},
}

INTERSECTIONS_SCHEMA = {
    "type": "object",
    "required": ["lambda", "mu", "intersections", "solutions", "rejected", "continua"],
    "properties": {
        "lambda": _num,
        "mu": _num,
        "intersections": {"type": "array", "items": _point},
        "solutions": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["xi", "P_x", "P_y", "residual_y0", "residual_yT",
                             "u_min", "u_max", "ode_residual"],
            },
        },
        "rejected": {
            "type": "array",
            "items": {"type": "object", "required": ["point", "reason"]},
        },
        "continua": {
            "type": "object",
            "required": ["forward", "backward"],
            "additionalProperties": {
                "type": "object",
                "required": ["nodes", "gap_achieved", "conforming"],
            },
        },
    },
}

THRESHOLDS_SCHEMA = {
    "type": "object",
    "required": ["lambda_star", "mu_star", "lam", "feasible", "params", "mode"],
    "properties": {
        "lambda_star": _nullable_num,
        "mu_star": _nullable_num,
        "lam": _nullable_num,
        "feasible": {"type": "boolean"},
        "params": {"type": "object"},
        "mode": {"type": "string"},
    },
}

LEMMA_VERDICTS_SCHEMA = {
    "type": "object",
    "required": ["testsuites"],
    "properties": {
        "testsuites": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "tests", "failures", "cases"],
                "properties": {
                    "name": {"type": "string"},
                    "tests": {"type": "integer", "minimum": 0},
                    "failures": {"type": "integer", "minimum": 0},
                    "cases": {"type": "array", "items": {
                        "type": "object",
                        "required": ["lemma_id", "trial", "seed", "passed"],
                    }},
                },
            },
        },
    },
}

RADIAL_REPORT_SCHEMA = {
    "type": "object",
    "required": ["N", "R_i", "R_e", "T", "solutions"],
    "properties": {
        "T": _num,
        "solutions": {"type": "array", "items": {
            "type": "object",
            "required": ["xi", "max_residual", "boundary_residual"],
        }},
    },
}

PERIODIC_SCHEMA = {
    "type": "object",
    "required": ["T", "period", "n_periods", "solutions"],
    "properties": {
        "T": _num,
        "period": _num,
        "n_periods": {"type": "integer", "minimum": 1},
        "solutions": {"type": "array", "items": {
            "type": "object", "required": ["xi", "residual", "gluing_defect"]}},
    },
}

# CSV artifacts: required header per file
CSV_COLUMNS = {
    "solutions.csv": ["solution", "t", "u", "du"],
    "continua.csv": ["direction", "xi", "x", "y"],
    "sweep.csv": ["lambda", "mu", "count"],
    "lemma_verdicts.csv": ["lemma", "trial", "seed", "passed", "t_from", "t_to",
                           "x0", "y0", "x_end", "y_end"],
    "radial_profile.csv": ["solution", "r", "U", "dU", "residual"],
    "periodic.csv": ["solution", "t", "u", "du"],
}

JSON_SCHEMAS = {
    "intersections.json": INTERSECTIONS_SCHEMA,
    "thresholds.json": THRESHOLDS_SCHEMA,
    "lemma_verdicts.json": LEMMA_VERDICTS_SCHEMA,
    "radial.json": RADIAL_REPORT_SCHEMA,
    "periodic.json": PERIODIC_SCHEMA,
}


def validate(instance: Any, schema: dict, what: str = "input") -> None:
    """Raise :class:`ValidationError` naming the first schema violation."""
    try:
        jsonschema.validate(instance, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValidationError(f"{what} violates schema at {where}: {exc.message}") from None


def _plain(obj: Any) -> Any:
    """Convert numpy scalars/arrays and tuples to JSON-native values; non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps(obj: Any) -> str:
    """Deterministic JSON: sorted keys, fixed indentation, shortest round-trip floats."""
    return json.dumps(_plain(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj: Any, schema: dict | None = None) -> None:
    data = _plain(obj)
    if schema is not None:
        validate(data, schema, Path(path).name)
    Path(path).write_text(dumps(data))


def read_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None


def fmt(v: float) -> str:
    return "%.17g" % v


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def validate_artifact(path) -> None:
    """Check an output file against the schema registered for its name."""
    path = Path(path)
    if path.name in JSON_SCHEMAS:
        validate(read_json(path), JSON_SCHEMAS[path.name], path.name)
    elif path.name in CSV_COLUMNS:
        header, rows = read_csv(path)
        if header != CSV_COLUMNS[path.name]:
            raise ValidationError(f"{path.name}: header {header} != {CSV_COLUMNS[path.name]}")
        n = len(header)
        for i, row in enumerate(rows):
            if len(row) != n:
                raise ValidationError(f"{path.name}: row {i + 1} has {len(row)} fields")
    else:
        raise ValidationError(f"no schema registered for {path.name}")


# -- inputs ----------------------------------------------------------------------


def problem_from_dict(d: dict, lam: float | None = None, mu: float | None = None) -> ProblemDef:
    validate(d, PROBLEM_SCHEMA, "problem")
    w = WeightSpec.from_dict(d["weight"])
    g = Nonlinearity.from_dict(d.get("g", {"kind": "logistic2"}))
    lam = d.get("lambda", 1.0) if lam is None else lam
    mu = d.get("mu", 1.0) if mu is None else mu
    return ProblemDef(w, g, lam, mu)


def problem_to_dict(p: ProblemDef) -> dict:
    return {"weight": p.weight.to_dict(), "g": p.g.to_dict(), "lambda": p.lam, "mu": p.mu}


def load_problem(path, lam: float | None = None, mu: float | None = None) -> ProblemDef:
    return problem_from_dict(read_json(path), lam, mu)
