"""Small argument checks shared by the public entry points."""

from __future__ import annotations

import numbers

import numpy as np


def check_points(points, dim):
    """Coerce query points to a finite float array of shape ``(n, dim)``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1) if dim == 1 else pts.reshape(1, -1)
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise ValueError(f"points must have shape (n, {dim}), got {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points contain non-finite values")
    return pts


def check_scalar(value, name, low=None, high=None, strict=True, integer=False):
    kind = numbers.Integral if integer else numbers.Real
    if isinstance(value, bool) or not isinstance(value, kind):
        raise TypeError(f"{name} must be {'an integer' if integer else 'a real number'}")
    if low is not None and (value <= low if strict else value < low):
        raise ValueError(f"{name} must be {'>' if strict else '>='} {low}, got {value}")
    if high is not None and (value >= high if strict else value > high):
        raise ValueError(f"{name} must be {'<' if strict else '<='} {high}, got {value}")
    return value


def check_option(value, name, options):
    if value not in options:
        raise ValueError(f"{name} must be one of {sorted(map(str, options))}, got {value!r}")
    return value


def check_complex_values(values, n):
    v = np.asarray(values, dtype=complex).ravel()
    if v.size != n:
        raise ValueError(f"expected {n} values, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise ValueError("values contain non-finite entries")
    return v
