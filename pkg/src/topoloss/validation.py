"""Input validation helpers shared by the library and the estimator API.

All public entry points funnel raw inputs through these checks so that
shape/dtype/range violations fail early with a uniform message style.
"""

from __future__ import annotations

import numpy as np


def check_image(values, name: str = "image") -> np.ndarray:
    """Validate a grayscale raster and return it as a float64 2D array.

    Values must lie in [0, 1] and the array must be 2D with at least one
    pixel per axis.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name}: expected a 2D array, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name}: empty axis in shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError(f"{name}: value out of range [0, 1]")
    return arr


def check_mask(values, name: str = "mask") -> np.ndarray:
    """Validate a binary mask and return it as a bool 2D array."""
    arr = np.asarray(values)
    if arr.ndim != 2:
        raise ValueError(f"{name}: expected a 2D array, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name}: empty axis in shape {arr.shape}")
    if arr.dtype == np.bool_:
        return arr.copy()
    fl = np.asarray(arr, dtype=np.float64)
    if not np.isin(fl, (0.0, 1.0)).all():
        raise ValueError(f"{name}: values must be 0 or 1")
    return fl.astype(np.bool_)


def check_same_shape(a: np.ndarray, b: np.ndarray, names: str = "inputs") -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {names} have shapes {a.shape} and {b.shape}")
