"""File formats: ensemble and state documents (JSON) and CSV tables."""
from __future__ import annotations

import csv
import json
import math

import numpy as np

from .errors import SchemaError
from .measurements import complex_to_pairs, parse_complex_matrix, parse_ensemble
from .quantum import DensityMatrix


def _load_json(text, what):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON in {what}: {exc.msg}", f"line {exc.lineno} column {exc.colno}") from None


def read_ensemble(path):
    with open(path, encoding="utf-8") as fh:
        return parse_ensemble(_load_json(fh.read(), path))


def state_from_dict(doc) -> DensityMatrix:
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object", "$")
    dims = doc.get("dims")
    if not isinstance(dims, list) or not dims or not all(isinstance(x, int) and x >= 1 for x in dims):
        raise SchemaError("expected a list of positive integers", "dims")
    if "matrix" not in doc:
        raise SchemaError("missing field", "matrix")
    m = parse_complex_matrix(doc["matrix"], "matrix")
    return DensityMatrix(m, tuple(dims))


def parse_state(document) -> DensityMatrix:
    if isinstance(document, (str, bytes)):
        document = _load_json(document, "state document")
    return state_from_dict(document)


def read_state(path) -> DensityMatrix:
    with open(path, encoding="utf-8") as fh:
        return parse_state(fh.read())


def state_to_dict(state: DensityMatrix) -> dict:
    return {"dims": list(state.dims), "matrix": complex_to_pairs(state.matrix)}


def format_number(x) -> str:
    """12 significant digits, '.' decimal point, no grouping."""
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return repr(x)
    out = format(x, ".12g")
    return "0" if out == "-0" else out


def write_csv(fh, columns, rows) -> None:
    writer = csv.writer(fh, delimiter=",", lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([format_number(r[c]) for c in columns])


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj
