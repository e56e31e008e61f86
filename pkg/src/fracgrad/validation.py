"""Input massaging shared by the estimator front door."""

from __future__ import annotations

import math

import numpy as np


def as_image_batch(X, image_size: int | None = None) -> np.ndarray:
    """Coerce X to float64 images shaped (N, H, W, 1).

    Accepts (N, H, W, 1), (N, H, W), or flat (N, H*W) rows; flat rows must
    form a square image (of image_size when given).  Values must be finite.
    """
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 2:
        side = image_size if image_size is not None else math.isqrt(arr.shape[1])
        if side * side != arr.shape[1]:
            raise ValueError(
                f"flat rows of length {arr.shape[1]} do not form square images"
            )
        arr = arr.reshape(arr.shape[0], side, side, 1)
    elif arr.ndim == 3:
        arr = arr[..., None]
    elif arr.ndim != 4:
        raise ValueError(f"X must have 2, 3, or 4 dims, got shape {arr.shape}")
    if arr.shape[3] != 1:
        raise ValueError(f"expected a single channel, got shape {arr.shape}")
    if arr.shape[1] != arr.shape[2]:
        raise ValueError(f"expected square images, got shape {arr.shape}")
    if image_size is not None and arr.shape[1] != image_size:
        raise ValueError(f"expected {image_size}x{image_size} images, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("X contains non-finite values")
    return arr


def as_binary_targets(y) -> tuple[np.ndarray, np.ndarray]:
    """Map arbitrary two-class labels to (classes_, one-hot float64)."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"y must be 1-d, got shape {y.shape}")
    classes = np.unique(y)
    if len(classes) != 2:
        raise ValueError(f"exactly two classes required, got {len(classes)}")
    onehot = np.zeros((len(y), 2), dtype=np.float64)
    onehot[np.arange(len(y)), np.searchsorted(classes, y)] = 1.0
    return classes, onehot
