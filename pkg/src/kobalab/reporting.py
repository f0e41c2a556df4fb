"""JSON report envelope, canonical serialization and schema validation."""
from __future__ import annotations

import json
import math

import jsonschema
import numpy as np

from . import __version__
from .config import load_schema


def jsonable(v):
    """Recursively convert numpy scalars, complex numbers and non-finite floats."""
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return jsonable(v.tolist())
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        v = v.item()
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def envelope(command, seed, passed, result, error=None):
    doc = {"command": command, "version": __version__, "seed": int(seed), "passed": bool(passed),
           "result": jsonable(result)}
    if error is not None:
        doc["error"] = jsonable(error)
    return doc


def validate(doc):
    jsonschema.validate(doc, load_schema("report"))
    return doc


def dumps(doc):
    """Canonical text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"
