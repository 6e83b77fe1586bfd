"""Clustering evaluation: accuracy under optimal label matching and NMI."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ParameterError


def _contingency(y: np.ndarray, y_hat: np.ndarray) -> np.ndarray:
    """Count matrix with one row per true class and one column per cluster."""
    _, yi = np.unique(y, return_inverse=True)
    _, hi = np.unique(y_hat, return_inverse=True)
    n_true = yi.max() + 1
    n_pred = hi.max() + 1
    counts = np.zeros((n_true, n_pred), dtype=np.int64)
    np.add.at(counts, (yi, hi), 1)
    return counts


def _check_pair(y, y_hat):
    y = np.asarray(y).ravel()
    y_hat = np.asarray(y_hat).ravel()
    if y.size == 0 or y_hat.size == 0:
        raise ParameterError("label vectors must be nonempty")
    if y.size != y_hat.size:
        raise ParameterError(
            f"label vectors differ in length: {y.size} vs {y_hat.size}"
        )
    return y, y_hat


def accuracy(y, y_hat) -> float:
    """Fraction of samples matched under the best one-to-one cluster-to-class
    assignment (Hungarian method on the negated contingency matrix; rectangular
    cases are implicitly padded with zero rows/columns)."""
    y, y_hat = _check_pair(y, y_hat)
    counts = _contingency(y, y_hat)
    rows, cols = linear_sum_assignment(-counts)
    return float(counts[rows, cols].sum()) / y.size


def nmi(y, y_hat) -> float:
    """Normalized mutual information, 2*I(y, y_hat) / (H(y) + H(y_hat)).

    Entropies come from the empirical joint distribution and the mutual
    information is H(y) + H(y_hat) - H(joint), which keeps the identical
    (NMI = 1) and constant-labeling (NMI = 0) cases exact. If both labelings
    are constant the value is defined as 1.0.
    """
    y, y_hat = _check_pair(y, y_hat)
    counts = _contingency(y, y_hat).astype(np.float64)
    joint = counts / counts.sum()

    def entropy(p):
        p = p[p > 0]
        return float(-(p * np.log(p)).sum())

    hy = entropy(joint.sum(axis=1))
    hh = entropy(joint.sum(axis=0))
    if hy == 0.0 and hh == 0.0:
        return 1.0
    mi = hy + hh - entropy(joint.ravel())
    value = 2.0 * mi / (hy + hh)
    # guard tiny negative rounding, keep the contract value in [0, 1]
    return float(min(max(value, 0.0), 1.0))
