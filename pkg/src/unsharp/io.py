"""File formats: POVM / state JSON, report JSON, and CSV tables.

A complex matrix is encoded as a list of rows, each row a list of
``[re, im]`` pairs.  A POVM file is::

    {"dim": d, "effects": [matrix, ...], "labels": ["1", ...]}

``labels`` is optional.  Parsing rejects NaN and infinities.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from typing import Iterable, Sequence

import numpy as np

from .observables import Povm

FLOAT_FORMAT = ".17g"


class FormatError(ValueError):
    """Input is not well-formed JSON of the expected schema."""


def _reject_constant(name: str):
    raise FormatError(f"non-finite number {name} is not allowed")


def loads(text: str):
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise FormatError(f"malformed JSON: {exc}") from None


def dumps(obj) -> str:
    """Serialise to JSON; floats use the shortest repr that round-trips exactly."""
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _number(x) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise FormatError(f"expected a number, got {x!r}")
    x = float(x)
    if not math.isfinite(x):
        raise FormatError("non-finite number")
    return x


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(obj, dim: int | None = None) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise FormatError("matrix must be a non-empty list of rows")
    d = len(obj) if dim is None else dim
    if len(obj) != d:
        raise FormatError(f"matrix has {len(obj)} rows, expected {d}")
    out = np.empty((d, d), dtype=np.complex128)
    for j, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != d:
            raise FormatError(f"row {j} must hold {d} entries")
        for k, z in enumerate(row):
            if not isinstance(z, list) or len(z) != 2:
                raise FormatError(f"entry ({j}, {k}) must be a [re, im] pair")
            out[j, k] = complex(_number(z[0]), _number(z[1]))
    return out


def povm_to_dict(povm: Povm) -> dict:
    return {
        "dim": povm.dim,
        "effects": [matrix_to_json(a) for a in povm],
        "labels": list(povm.labels),
    }


def povm_from_dict(obj) -> Povm:
    """Parse the POVM schema; structural problems raise :class:`FormatError`,
    invariant violations raise :class:`~unsharp.observables.InvalidPovmError`."""
    if not isinstance(obj, dict):
        raise FormatError("POVM JSON must be an object")
    if "dim" not in obj or "effects" not in obj:
        raise FormatError("POVM JSON needs 'dim' and 'effects'")
    dim = obj["dim"]
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise FormatError(f"'dim' must be a positive integer, got {dim!r}")
    effects = obj["effects"]
    if not isinstance(effects, list) or not effects:
        raise FormatError("'effects' must be a non-empty list")
    mats = [matrix_from_json(m, dim) for m in effects]
    labels = obj.get("labels")
    if labels is not None:
        if not isinstance(labels, list) or not all(isinstance(x, str) for x in labels):
            raise FormatError("'labels' must be a list of strings")
    return Povm(mats, labels)


def povm_to_json(povm: Povm) -> str:
    return dumps(povm_to_dict(povm))


def povm_from_json(text: str) -> Povm:
    return povm_from_dict(loads(text))


def load_povm(path) -> Povm:
    with open(path, encoding="utf-8") as fh:
        return povm_from_json(fh.read())


def state_from_dict(obj) -> np.ndarray:
    """A state file is ``{"dim": d, "matrix": matrix}``."""
    if not isinstance(obj, dict) or "matrix" not in obj:
        raise FormatError("state JSON needs a 'matrix' field")
    return matrix_from_json(obj["matrix"], obj.get("dim"))


def state_to_dict(rho) -> dict:
    rho = np.asarray(rho)
    return {"dim": int(rho.shape[0]), "matrix": matrix_to_json(rho)}


def format_float(x: float) -> str:
    return format(float(x), FLOAT_FORMAT)


def to_csv(rows: Iterable[dict], columns: Sequence[str]) -> str:
    """CSV text with a header; floats at 17 significant digits."""
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(
            format_float(row[c]) if isinstance(row[c], float) else row[c] for c in columns
        )
    return buf.getvalue()
