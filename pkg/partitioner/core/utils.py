"""
Utility functions for the partitioner.
"""
import hashlib
import json
from typing import Any, Sequence

import numpy as np

from partitioner.core.errors import InputValidationError


def as_matrix(values: Any, name: str) -> np.ndarray:
    """
    Convert nested lists to a read-only 2D float array.

    Args:
        values: Array-like of rows
        name: Field name used in error messages

    Returns:
        np.ndarray: Immutable 2D array

    Raises:
        InputValidationError: If the input is not a rectangular matrix
    """
    try:
        matrix = np.array(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputValidationError("dimension-mismatch", f"{name} is not a numeric matrix") from exc
    if matrix.ndim != 2:
        raise InputValidationError("dimension-mismatch", f"{name} must be 2-dimensional")
    matrix.setflags(write=False)
    return matrix


def as_vector(values: Any, dtype: Any = float) -> np.ndarray:
    """Convert a sequence to a read-only 1D array."""
    vector = np.array(values, dtype=dtype).reshape(-1)
    vector.setflags(write=False)
    return vector


def stable_digest(payload: Any) -> str:
    """
    Hash a JSON-serialisable payload independently of key order.

    Args:
        payload: Any JSON-serialisable structure

    Returns:
        str: Hex SHA-256 digest
    """
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=_json_default)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def file_digest(paths: Sequence[str]) -> str:
    """Hash the bytes of several files, in the given order."""
    sha = hashlib.sha256()
    for path in paths:
        with open(path, "rb") as handle:
            sha.update(handle.read())
        sha.update(b"\0")
    return sha.hexdigest()


def evenly_spaced(lower: float, upper: float, count: int) -> list:
    """Return `count` values from lower to upper inclusive, endpoints exact."""
    if count == 1:
        return [lower]
    step = (upper - lower) / (count - 1)
    values = [lower + k * step for k in range(count)]
    values[-1] = upper
    return values


def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")
