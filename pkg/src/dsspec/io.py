"""JSON documents for systems and results.

Complex numbers are encoded as two-element [re, im] arrays and matrices as
row-major nested arrays.  Output is deterministic: fields keep a fixed
order and floats are written with 17 significant digits.
"""

import json
import math

import numpy as np

from .core import SymplecticSystem, as_boundary, validate_system
from .errors import DssError


class ParseError(DssError, ValueError):
    """The document is not valid JSON or does not follow the schema."""


class ValidationFailed(DssError, ValueError):
    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


def _fmt_float(x):
    if not math.isfinite(x):
        raise ValueError(f"non-finite number {x} cannot be serialized")
    if x == 0:
        return "-0.0" if math.copysign(1.0, x) < 0 else "0.0"
    s = format(x, ".17g")
    if "e" not in s and "." not in s:
        s += ".0"
    return s


def dumps(obj, indent=2, _level=0):
    """Serialize nested dict/list/scalar data with fixed float formatting."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return dumps([float(obj.real), float(obj.imag)], indent, _level)
    if isinstance(obj, np.ndarray):
        return dumps(encode_array(obj), indent, _level)
    return json.dumps(str(obj))


def encode_array(a):
    """Nested lists with complex entries as [re, im]."""
    a = np.asarray(a)
    if a.ndim == 0:
        z = complex(a)
        return [z.real, z.imag]
    return [encode_array(x) for x in a]


def decode_array(data, ndim):
    """Inverse of encode_array; entries may also be plain real numbers."""

    def rec(x, depth):
        if depth == 0:
            if isinstance(x, (int, float)) and not isinstance(x, bool):
                return complex(x)
            if isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x):
                return complex(x[0], x[1])
            raise ParseError(f"bad complex entry {x!r}")
        if not isinstance(x, list):
            raise ParseError(f"expected a nested array of depth {ndim}")
        return [rec(v, depth - 1) for v in x]

    try:
        return np.array(rec(data, ndim), dtype=complex)
    except ValueError as exc:
        raise ParseError(f"ragged array: {exc}") from exc


def system_document(sys, alpha=None, beta=None, metadata=None):
    doc = {"n": sys.n, "N": sys.N, "S": encode_array(sys.S), "Psi": encode_array(sys.Psi)}
    if alpha is not None:
        doc["alpha"] = encode_array(alpha)
    if beta is not None:
        doc["beta"] = encode_array(beta)
    if metadata:
        doc["metadata"] = {str(k): str(v) for k, v in sorted(metadata.items())}
    return doc


def parse_system(doc, tol_struct=1e-10):
    """(system, alpha, beta, metadata) from a decoded document."""
    if not isinstance(doc, dict):
        raise ParseError("document must be a JSON object")
    for key in ("n", "N", "S", "Psi"):
        if key not in doc:
            raise ParseError(f"missing field {key!r}")
    n, N = doc["n"], doc["N"]
    if not (isinstance(n, int) and isinstance(N, int) and n > 0 and N >= 0):
        raise ParseError("n must be a positive integer and N a nonnegative integer")
    S = decode_array(doc["S"], 3)
    Psi = decode_array(doc["Psi"], 3)
    shape = (N + 1, 2 * n, 2 * n)
    if S.shape != shape or Psi.shape != shape:
        raise ParseError(f"S and Psi must have shape {shape}, got {S.shape} and {Psi.shape}")
    sys = SymplecticSystem(S, Psi, tol=tol_struct)
    report = validate_system(sys, tol_struct)
    if not report.passed:
        raise ValidationFailed("system fails structural validation", report)
    bounds = []
    for key in ("alpha", "beta"):
        if key in doc and doc[key] is not None:
            bounds.append(as_boundary(decode_array(doc[key], 2), n, tol_struct))
        else:
            bounds.append(None)
    meta = doc.get("metadata") or {}
    return sys, bounds[0], bounds[1], meta


def load_system(path, tol_struct=1e-10):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return parse_system(doc, tol_struct)


def save_system(path, sys, alpha=None, beta=None, metadata=None):
    with open(path, "w") as fh:
        fh.write(dumps(system_document(sys, alpha, beta, metadata)) + "\n")


def load_sequence(path, key):
    """A vector sequence stored either bare or under ``key`` in a JSON file."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if isinstance(data, dict):
        if key not in data:
            raise ParseError(f"{path}: missing field {key!r}")
        data = data[key]
    return decode_array(data, 2)
