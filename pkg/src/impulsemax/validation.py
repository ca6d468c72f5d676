"""Input coercion for the estimator facade."""

import numpy as np
from sklearn.utils.validation import check_array

from .errors import InvalidParameter


def as_state_array(X):
    """Coerce a scalar, 1-D array or single-column matrix to flat states."""
    if np.ndim(X) == 0:
        return np.asarray([float(X)])
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    arr = check_array(arr, dtype=float, ensure_2d=True)
    if arr.shape[1] != 1:
        raise InvalidParameter("states must form a single column")
    return arr[:, 0]
