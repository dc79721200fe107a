"""Multi-target error metrics."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from ..gaussian import ContractError


def ospa(X, Y, cutoff: float, order: float = 1.0) -> float:
    """Optimal subpattern assignment distance between two finite point sets."""
    if cutoff <= 0 or order < 1:
        raise ContractError("OSPA needs cutoff > 0 and order >= 1")
    X, Y = np.asarray(X, dtype=float), np.asarray(Y, dtype=float)
    X = X.reshape(len(X), -1) if X.size else np.zeros((0, 1))
    Y = Y.reshape(len(Y), -1) if Y.size else np.zeros((0, 1))
    m, n = len(X), len(Y)
    if m == 0 and n == 0:
        return 0.0
    if m == 0 or n == 0:
        return float(cutoff)
    if X.shape[1] != Y.shape[1]:
        raise ContractError("point sets of different dimension")
    D = np.minimum(cdist(X, Y), cutoff) ** order
    rows, cols = linear_sum_assignment(D)
    cost = D[rows, cols].sum() + cutoff**order * abs(m - n)
    return float((cost / max(m, n)) ** (1.0 / order))
