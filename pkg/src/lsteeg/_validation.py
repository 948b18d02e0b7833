"""Input validation helpers.

Small checks used at public API boundaries. They normalise inputs to
float64 ndarrays and raise the package's typed errors instead of letting
numpy broadcasting hide shape bugs.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, NumericError


def as_f64(x, name: str = "array") -> np.ndarray:
    """Convert to a float64 ndarray, rejecting non-numeric input."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.dtype != np.float64:
        raise DimensionError(f"{name}: cannot convert to float64")
    return arr


def check_finite(x: np.ndarray, name: str = "array") -> np.ndarray:
    """Raise NumericError if any entry is NaN or infinite."""
    if not np.all(np.isfinite(x)):
        raise NumericError(f"{name} contains non-finite values")
    return x


def check_shape(x: np.ndarray, shape: tuple, name: str = "array") -> np.ndarray:
    """Check an exact shape; None entries in `shape` are wildcards."""
    if x.ndim != len(shape):
        raise DimensionError(f"{name}: expected {len(shape)}-d, got {x.ndim}-d")
    for got, want in zip(x.shape, shape):
        if want is not None and got != want:
            raise DimensionError(f"{name}: expected shape {shape}, got {x.shape}")
    return x


def check_epoch(x, n_channels: int | None = None, n_samples: int | None = None,
                name: str = "epoch") -> np.ndarray:
    """Validate a single (n_channels, n_samples) epoch array."""
    arr = as_f64(x, name)
    check_shape(arr, (n_channels, n_samples), name)
    return arr


def check_epoch_batch(x, n_channels: int | None = None, n_samples: int | None = None,
                      name: str = "epochs") -> np.ndarray:
    """Validate a stacked (n_epochs, n_channels, n_samples) batch.

    A single 2-d epoch is promoted to a batch of one.
    """
    arr = as_f64(x, name)
    if arr.ndim == 2:
        arr = arr[None, :, :]
    check_shape(arr, (None, n_channels, n_samples), name)
    return arr
