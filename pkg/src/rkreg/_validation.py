"""Input validation helpers shared by the estimator classes."""

import numpy as np


def check_univariate(X, name="X"):
    """Coerce `X` to a 1-D float array, accepting (n,) or (n, 1) input."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise ValueError(
                f"{name} must be univariate; got shape {arr.shape}"
            )
        arr = arr[:, 0]
    elif arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D or a single column; got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_paired(X, y):
    """Validate a regression sample, returning aligned 1-D float arrays."""
    X = check_univariate(X, "X")
    y = check_univariate(y, "y")
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"X and y have different lengths: {X.shape[0]} vs {y.shape[0]}")
    return X, y


def check_positive_scalar(value, name):
    value = float(value)
    if not np.isfinite(value) or value <= 0.0:
        raise ValueError(f"{name} must be a positive finite number; got {value!r}")
    return value
