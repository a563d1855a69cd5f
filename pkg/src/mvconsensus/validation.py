"""Input validation for the estimator layer.

Estimators follow the scikit-learn convention (arrays of shape
``(n_samples, n_features)``, one per view); the numeric core works on
transposed ``(n_features, n_samples)`` matrices.  These helpers validate and
convert at that boundary.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DimensionMismatchError,
    InconsistentSampleCountError,
    NonFiniteError,
)


def check_views(Xs) -> list[np.ndarray]:
    """Validate a list of per-view sample matrices.

    Each element must be a 2-D array-like of shape (n_samples, n_features_v)
    with finite entries; all views must agree on n_samples.  Returns float64
    copies in the same orientation.
    """
    if isinstance(Xs, np.ndarray) and Xs.ndim == 2:
        Xs = [Xs]
    try:
        views = list(Xs)
    except TypeError:
        raise DimensionMismatchError(
            f"expected a list of 2-D arrays, got {type(Xs).__name__}"
        ) from None
    if not views:
        raise DimensionMismatchError("need at least one view")
    out = []
    for v, x in enumerate(views):
        try:
            arr = np.asarray(x, dtype=float)
        except (TypeError, ValueError):
            raise DimensionMismatchError(f"view {v} is not numeric") from None
        if arr.ndim != 2:
            raise DimensionMismatchError(
                f"view {v} must be 2-D (n_samples, n_features), got shape {arr.shape}"
            )
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionMismatchError(f"view {v} is empty: shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError(f"view {v} contains NaN or infinite entries")
        out.append(arr.copy())
    n = out[0].shape[0]
    for v, arr in enumerate(out):
        if arr.shape[0] != n:
            raise InconsistentSampleCountError(
                f"view 0 has {n} samples but view {v} has {arr.shape[0]}"
            )
    return out


def check_labels(y, n_samples: int) -> np.ndarray:
    """Validate an integer label vector aligned with ``n_samples``."""
    arr = np.asarray(y)
    if arr.ndim != 1:
        raise DimensionMismatchError(f"labels must be 1-D, got shape {arr.shape}")
    if arr.shape[0] != n_samples:
        raise InconsistentSampleCountError(
            f"{arr.shape[0]} labels for {n_samples} samples"
        )
    if arr.dtype.kind not in "iu":
        cast = arr.astype(int)
        if not np.array_equal(cast, arr):
            raise DimensionMismatchError("labels must be integers")
        arr = cast
    return arr.copy()
