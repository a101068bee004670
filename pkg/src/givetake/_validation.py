"""Small argument checks used by every public entry point."""

import numbers

import numpy as np

from .exceptions import DomainError


def check_unit(x, name="x"):
    """Return ``x`` as float (or float array) after checking it lies in [0, 1]."""
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {x!r}")
    return float(arr) if arr.ndim == 0 else arr


def check_positive(x, name):
    if not isinstance(x, numbers.Real) or not np.isfinite(x) or x <= 0:
        raise DomainError(f"{name} must be a positive finite real, got {x!r}")
    return float(x)


def check_positive_int(n, name):
    if isinstance(n, bool) or not isinstance(n, numbers.Integral) or n < 1:
        raise DomainError(f"{name} must be a positive integer, got {n!r}")
    return int(n)


def check_nonneg_int(n, name):
    if isinstance(n, bool) or not isinstance(n, numbers.Integral) or n < 0:
        raise DomainError(f"{name} must be a non-negative integer, got {n!r}")
    return int(n)


def is_integer_valued(x, tol=0.0):
    return float(x).is_integer() if tol == 0.0 else abs(x - round(x)) <= tol
