"""Scalar fields as vectors in an inner-product space.

A scalar field is a 2D ``float64`` numpy array (rows = height, columns =
width). Every other module builds on the handful of primitives here.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

ScalarField = np.ndarray


def as_field(f, name: str = "field") -> ScalarField:
    """Return ``f`` as a finite 2D float64 array, raising on anything else."""
    arr = np.asarray(f, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 2D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite samples")
    return arr


def _check_same_shape(f: ScalarField, g: ScalarField) -> None:
    if f.shape != g.shape:
        raise ValueError(f"dimension mismatch: {f.shape} vs {g.shape}")


def inner_product(f, g) -> float:
    """Unweighted pixel-sum dot product ``sum(f * g)``."""
    f = as_field(f, "f")
    g = as_field(g, "g")
    _check_same_shape(f, g)
    # np.dot on raveled arrays has a fixed (BLAS) summation order per build
    return float(np.dot(f.ravel(), g.ravel()))


def norm(f) -> float:
    return float(np.sqrt(inner_product(f, f)))


def scale_add(f, alpha: float, g, beta: float) -> ScalarField:
    """Elementwise ``alpha * f + beta * g``."""
    f = as_field(f, "f")
    g = as_field(g, "g")
    _check_same_shape(f, g)
    return alpha * f + beta * g


def _sorted_values(values: Sequence[float]) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise ValueError("empty sequence")
    if not np.all(np.isfinite(v)):
        raise ValueError("values must be finite")
    return np.sort(v)


def percentile(values: Sequence[float], p: float) -> float:
    """Linear-interpolation percentile, ``p`` in [0, 100].

    Interpolates as ``(1 - t) * lo + t * hi`` so that ``percentile(v, 50)``
    is bit-identical to :func:`median` (halving is exact in binary floats).
    """
    if not 0.0 <= p <= 100.0:
        raise ValueError(f"percentile p must be in [0, 100], got {p}")
    v = _sorted_values(values)
    rank = (p / 100.0) * (v.size - 1)
    lo = int(np.floor(rank))
    hi = min(lo + 1, v.size - 1)
    t = rank - lo
    if t == 0.0:
        return float(v[lo])
    return float((1.0 - t) * v[lo] + t * v[hi])


def median(values: Sequence[float]) -> float:
    v = _sorted_values(values)
    n = v.size
    mid = n // 2
    if n % 2:
        return float(v[mid])
    return float(0.5 * v[mid - 1] + 0.5 * v[mid])
