"""Lloyd k-means with k-means++ seeding and best-of-n restarts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .seeding import derive_seed


@dataclass(frozen=True)
class KMeansResult:
    centers: np.ndarray        # (k, d)
    assignments: np.ndarray    # (n,) ids in [0, k)
    inertia: float             # sum of squared distances to assigned centers
    iterations_run: int


def _sq_distances(points, centers, block=None):
    """(n, k) squared Euclidean distances, row-blocked to bound memory."""
    n, k = points.shape[0], centers.shape[0]
    if block is None:
        block = max(1, (1 << 22) // max(k, 1))
    c_sq = np.einsum("ij,ij->i", centers, centers)
    out = np.empty((n, k), dtype=np.float64)
    for start in range(0, n, block):
        stop = min(start + block, n)
        chunk = points[start:stop]
        p_sq = np.einsum("ij,ij->i", chunk, chunk)
        d = p_sq[:, None] + c_sq[None, :] - 2.0 * (chunk @ centers.T)
        np.maximum(d, 0.0, out=d)
        out[start:stop] = d
    return out


def _kmeanspp(points, k, rng):
    """Seed centers by D^2 sampling; returns the (k, d) initial centers."""
    n = points.shape[0]
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = rng.integers(n)
    diff = points - points[chosen[0]]
    d2 = np.einsum("ij,ij->i", diff, diff)
    for i in range(1, k):
        total = d2.sum()
        if total > 0:
            chosen[i] = rng.choice(n, p=d2 / total)
        else:
            chosen[i] = rng.integers(n)
        diff = points - points[chosen[i]]
        np.minimum(d2, np.einsum("ij,ij->i", diff, diff), out=d2)
    return points[chosen].copy()


def _lloyd(points, centers, max_iter):
    n, k = points.shape[0], centers.shape[0]
    labels = np.full(n, -1, dtype=np.int64)
    inertia = np.inf
    iterations = 0
    for _ in range(max_iter):
        d = _sq_distances(points, centers)
        new_labels = d.argmin(axis=1)
        point_d2 = d[np.arange(n), new_labels]
        new_inertia = float(point_d2.sum())
        assert new_inertia <= inertia * (1 + 1e-12) + 1e-9
        inertia = new_inertia
        iterations += 1
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels

        counts = np.bincount(labels, minlength=k)
        sums = np.zeros_like(centers)
        np.add.at(sums, labels, points)
        nonempty = counts > 0
        centers[nonempty] = sums[nonempty] / counts[nonempty, None]
        # empty clusters restart at the point farthest from its center
        if not nonempty.all():
            farthest_pool = point_d2.copy()
            for j in np.flatnonzero(~nonempty):
                far = int(farthest_pool.argmax())
                centers[j] = points[far]
                farthest_pool[far] = -np.inf
    return centers, labels, inertia, iterations


def kmeans(points, k: int, max_iter: int = 300, n_init: int = 10,
           seed: int = 0) -> KMeansResult:
    """Cluster row-vector points into k groups; best of n_init seeded runs.

    Lloyd iterations stop at an assignment fixpoint or after max_iter rounds;
    an emptied cluster is re-seeded at the farthest point from its center.
    Deterministic for fixed (points, parameters, seed).
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ParameterError(f"points must be (n, d), got {points.shape}")
    n = points.shape[0]
    if not 1 <= k <= n:
        raise ParameterError(f"k={k} outside [1, {n}]")
    if max_iter < 1 or n_init < 1:
        raise ParameterError("max_iter and n_init must be >= 1")

    best = None
    for trial in range(n_init):
        rng = np.random.default_rng(derive_seed(seed, trial))
        centers = _kmeanspp(points, k, rng)
        centers, labels, inertia, iterations = _lloyd(points, centers, max_iter)
        if best is None or inertia < best.inertia:
            best = KMeansResult(centers, labels, inertia, iterations)
    return best
