"""Scalable spectral clustering over a sample-to-representative bipartite graph.

Pipeline: hybrid sampling picks p representatives (random p'-subset refined by
k-means), each sample keeps Gaussian-kernel affinities to its k approximate
nearest representatives, and the N x p bipartite graph is clustered by
reducing the eigenproblem to the p x p representative graph and transferring
the eigenvectors back to the samples.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse

from .errors import ConnectivityError, ParameterError
from .hnsw import build_index, exact_knn, knn_query
from .kmeans import kmeans
from .seeding import derive_seed
from .subspace import FeatureMatrix


@dataclass(frozen=True)
class Representatives:
    matrix: np.ndarray    # (p, d) centers in feature space
    p: int
    p_prime: int


@dataclass(frozen=True)
class SparseAffinity:
    """Row-sparse N x p nonnegative affinity with exactly k entries per row."""

    indices: np.ndarray   # (N, k) representative ids, distinct per row
    weights: np.ndarray   # (N, k) kernel weights in (0, 1]
    n_representatives: int
    sigma: float


@dataclass(frozen=True)
class Embedding:
    coordinates: np.ndarray   # (N, C) spectral coordinates, rows = samples


@dataclass(frozen=True)
class ClusterResult:
    assignments: np.ndarray   # (N,) cluster ids in [0, n_clusters)
    n_clusters: int
    timing: dict = field(default_factory=dict)   # stage -> seconds
    inertia: float = 0.0


def hybrid_sample(matrix: FeatureMatrix, p_prime: int, p: int,
                  seed: int = 0) -> Representatives:
    """Uniformly sample p' candidate columns without replacement, then k-means
    them into p clusters; the centers are the representatives."""
    n = matrix.n_samples
    if p >= p_prime:
        raise ParameterError(f"need p < p_prime, got p={p}, p_prime={p_prime}")
    if p_prime > n:
        raise ParameterError(f"p_prime={p_prime} exceeds sample count {n}")
    rng = np.random.default_rng(derive_seed(seed, 0))
    candidate_ids = rng.choice(n, size=p_prime, replace=False)
    candidates = matrix.data.T[candidate_ids]
    # lite clustering: representative quality needs few Lloyd rounds
    result = kmeans(candidates, p, max_iter=10, n_init=1,
                    seed=derive_seed(seed, 1))
    return Representatives(result.centers, p=p, p_prime=p_prime)


def build_affinity(matrix: FeatureMatrix, reps: Representatives, k: int,
                   M: int = 16, ef_construction: int = 200,
                   ef_search: int = 64, seed: int = 0) -> SparseAffinity:
    """Gaussian affinities exp(-d^2 / (2 sigma^2)) from every sample to its k
    approximate nearest representatives; sigma is the mean distance to the
    k-th nearest representative."""
    p = reps.matrix.shape[0]
    if k > p:
        raise ParameterError(f"k={k} exceeds representative count {p}")
    samples = np.ascontiguousarray(matrix.data.T)
    n = samples.shape[0]
    index = build_index(reps.matrix, M=M, ef_construction=ef_construction,
                        seed=seed)
    ids = np.empty((n, k), dtype=np.int64)
    dists = np.empty((n, k), dtype=np.float64)
    ef = max(ef_search, k)
    for i in range(n):
        found = knn_query(index, samples[i], k, ef)
        if found.ids.shape[0] < k:   # beam starved; keep the row-count contract
            found = exact_knn(reps.matrix, samples[i], k)
        ids[i] = found.ids
        dists[i] = found.distances

    sigma = float(dists[:, -1].mean())
    if sigma <= 0.0:
        sigma = 1.0
    weights = np.exp(-(dists ** 2) / (2.0 * sigma ** 2))
    return SparseAffinity(ids, weights, n_representatives=p, sigma=sigma)


def _as_csr(affinity: SparseAffinity) -> scipy.sparse.csr_matrix:
    n, k = affinity.indices.shape
    rows = np.repeat(np.arange(n), k)
    return scipy.sparse.csr_matrix(
        (affinity.weights.ravel(), (rows, affinity.indices.ravel())),
        shape=(n, affinity.n_representatives),
    )


def transfer_cut(affinity: SparseAffinity, n_clusters: int) -> Embedding:
    """Spectral embedding of the bipartite graph via the representative-side
    eigenproblem.

    Forms the p x p graph Abar = A^T Dx^-1 A, solves the symmetric
    eigenproblem on Dy^-1/2 Abar Dy^-1/2, keeps the eigenvectors of the
    n_clusters largest eigenvalues, and transfers each one to the samples by
    u = Dx^-1 A Dy^-1/2 v, normalized to unit length.
    """
    n, _ = affinity.indices.shape
    p = affinity.n_representatives
    if not 2 <= n_clusters <= p:
        raise ParameterError(f"n_clusters={n_clusters} outside [2, {p}]")

    row_deg = affinity.weights.sum(axis=1)
    if (row_deg <= 0.0).any():
        bad = int(np.argmax(row_deg <= 0.0))
        raise ConnectivityError(f"sample {bad} has zero affinity degree")
    col_deg = np.bincount(affinity.indices.ravel(),
                          weights=affinity.weights.ravel(), minlength=p)
    if (col_deg <= 0.0).any():
        bad = int(np.argmax(col_deg <= 0.0))
        raise ConnectivityError(f"representative {bad} has zero degree")

    a = _as_csr(affinity)
    half = a.multiply(1.0 / np.sqrt(row_deg)[:, None]).tocsr()
    small = (half.T @ half).toarray()
    asym = np.abs(small - small.T).max()
    assert asym <= 1e-8 * max(1.0, np.abs(small).max())
    small = 0.5 * (small + small.T)

    inv_root = 1.0 / np.sqrt(col_deg)
    normalized = small * inv_root[:, None] * inv_root[None, :]
    values, vectors = np.linalg.eigh(normalized)
    assert values[0] >= -1e-8 and values[-1] <= 1.0 + 1e-8
    top = vectors[:, -n_clusters:][:, ::-1]

    transferred = a @ (top * inv_root[:, None])
    transferred /= row_deg[:, None]
    norms = np.linalg.norm(transferred, axis=0)
    norms[norms == 0.0] = 1.0
    return Embedding(transferred / norms)


def _row_normalize(coordinates: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(coordinates, axis=1, keepdims=True)
    return coordinates / np.maximum(norms, 1e-300)


def uspec(matrix: FeatureMatrix, n_clusters: int, p_prime: int, p: int,
          k: int, seed: int = 0, M: int = 16, ef_construction: int = 200,
          ef_search: int = 64) -> ClusterResult:
    """End-to-end scalable spectral clustering of the feature columns.

    Sample i receives the cluster of row i of the spectral embedding, which is
    row-normalized and clustered with k-means.
    """
    timing = {}
    t0 = time.perf_counter()
    reps = hybrid_sample(matrix, p_prime, p, seed=derive_seed(seed, 101))
    timing["sample"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    affinity = build_affinity(matrix, reps, k, M=M,
                              ef_construction=ef_construction,
                              ef_search=ef_search, seed=derive_seed(seed, 102))
    timing["affinity"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    embedding = transfer_cut(affinity, n_clusters)
    timing["eigen"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    rows = _row_normalize(embedding.coordinates)
    result = kmeans(rows, n_clusters, max_iter=300, n_init=10,
                    seed=derive_seed(seed, 103))
    timing["kmeans"] = time.perf_counter() - t0
    return ClusterResult(result.assignments, n_clusters, timing,
                         inertia=result.inertia)
