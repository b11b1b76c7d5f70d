"""JSON matrix format: ``{"dim": n, "re": [[...]], "im": [[...]]}``.

Rows are row-major; ``"im"`` may be omitted for real matrices.  Loaded
matrices must be Hermitian within 1e-10 and are returned symmetrized.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .linalg import as_hermitian

LOAD_HERMITIAN_TOL = 1e-10


class MatrixFormatError(ValueError):
    pass


def _grid(rows, n: int, key: str) -> np.ndarray:
    try:
        arr = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise MatrixFormatError(f'"{key}" must be a list of numeric rows') from exc
    if arr.shape != (n, n):
        raise MatrixFormatError(f'"{key}" has shape {arr.shape}, expected ({n}, {n})')
    if not np.all(np.isfinite(arr)):
        raise MatrixFormatError(f'"{key}" contains non-finite entries')
    return arr


def matrix_from_dict(obj) -> np.ndarray:
    if not isinstance(obj, dict):
        raise MatrixFormatError("matrix JSON must be an object")
    if "dim" not in obj or "re" not in obj:
        raise MatrixFormatError('matrix JSON needs "dim" and "re"')
    n = obj["dim"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise MatrixFormatError('"dim" must be a positive integer')
    re = _grid(obj["re"], n, "re")
    im = _grid(obj["im"], n, "im") if "im" in obj else np.zeros((n, n))
    return as_hermitian(re + 1j * im, atol=LOAD_HERMITIAN_TOL)


def matrix_to_dict(A) -> dict:
    A = np.asarray(A, dtype=complex)
    out = {"dim": int(A.shape[0]), "re": A.real.tolist()}
    if np.any(A.imag != 0):
        out["im"] = A.imag.tolist()
    return out


def load_matrix(path) -> np.ndarray:
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixFormatError(f"{path}: invalid JSON ({exc})") from exc
    return matrix_from_dict(obj)


def save_matrix(path, A) -> None:
    Path(path).write_text(json.dumps(matrix_to_dict(A)))
