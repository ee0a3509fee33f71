"""Small input-validation helpers used by the public entry points."""

from __future__ import annotations

import numpy as np


def require(condition: bool, message: str, exc: type = ValueError) -> None:
    if not condition:
        raise exc(message)


def positive_int(value, name: str, minimum: int = 1) -> int:
    v = int(value)
    require(v == value and v >= minimum, f"{name} must be an integer >= {minimum}, got {value!r}")
    return v


def positive_float(value, name: str) -> float:
    v = float(value)
    require(np.isfinite(v) and v > 0.0, f"{name} must be a positive finite number, got {value!r}")
    return v


def nonnegative_float(value, name: str) -> float:
    v = float(value)
    require(np.isfinite(v) and v >= 0.0, f"{name} must be a nonnegative finite number, got {value!r}")
    return v


def as_complex_array(z):
    """Coerce scalar or array-like input to a 1-d complex array.

    Returns the array together with a flag telling whether the input was a
    scalar, so callers can unwrap their result symmetrically.
    """
    arr = np.asarray(z, dtype=complex)
    scalar = arr.ndim == 0
    return np.atleast_1d(arr), scalar
