import numpy as np
import pytest

from scatclust.errors import ConnectivityError, ParameterError
from scatclust.kmeans import kmeans
from scatclust.metrics import accuracy
from scatclust.seeding import derive_seed
from scatclust.spectral import (SparseAffinity, _as_csr, _row_normalize,
                                build_affinity, hybrid_sample, transfer_cut,
                                uspec)
from scatclust.subspace import FeatureMatrix


def feature_matrix(points):
    return FeatureMatrix(np.asarray(points, dtype=float).T, domain="image")


def three_blobs(seed, n_per=100, spread=1.0, sep=30.0):
    rng = np.random.default_rng(seed)
    centers = np.array([[0.0, 0.0], [sep, 0.0], [0.0, sep]])
    points = np.concatenate([rng.normal(c, spread, size=(n_per, 2))
                             for c in centers])
    labels = np.repeat(np.arange(3), n_per)
    return points, labels


def dense_bipartite_assignments(affinity, n_clusters, seed):
    """Oracle: spectral clustering of the full (N+p) x (N+p) bipartite graph
    by dense eigendecomposition, with the same post-processing conventions."""
    a = _as_csr(affinity).toarray()
    n, p = a.shape
    graph = np.zeros((n + p, n + p))
    graph[:n, n:] = a
    graph[n:, :n] = a.T
    degree = graph.sum(axis=1)
    inv_root = 1.0 / np.sqrt(degree)
    normalized = graph * inv_root[:, None] * inv_root[None, :]
    _, vectors = np.linalg.eigh(normalized)
    top = vectors[:, -n_clusters:][:, ::-1]
    sample_block = top[:n] * inv_root[:n, None]
    norms = np.linalg.norm(sample_block, axis=0)
    norms[norms == 0.0] = 1.0
    rows = _row_normalize(sample_block / norms)
    return kmeans(rows, n_clusters, max_iter=300, n_init=10, seed=seed).assignments


def run_small_instance(seed):
    points, labels = three_blobs(seed, n_per=67)
    points = points[:200]
    labels = labels[:200]
    matrix = feature_matrix(points)
    reps = hybrid_sample(matrix, p_prime=60, p=20, seed=seed)
    affinity = build_affinity(matrix, reps, k=3, seed=seed)
    embedding = transfer_cut(affinity, 3)
    km_seed = derive_seed(seed, 103)
    mine = kmeans(_row_normalize(embedding.coordinates), 3,
                  max_iter=300, n_init=10, seed=km_seed).assignments
    oracle = dense_bipartite_assignments(affinity, 3, seed=km_seed)
    return mine, oracle, labels


def test_hybrid_sample_shapes_and_errors():
    points, _ = three_blobs(0)
    matrix = feature_matrix(points)
    reps = hybrid_sample(matrix, p_prime=150, p=30, seed=0)
    assert reps.matrix.shape == (30, 2)
    assert (reps.p, reps.p_prime) == (30, 150)
    with pytest.raises(ParameterError):
        hybrid_sample(matrix, p_prime=30, p=30, seed=0)
    with pytest.raises(ParameterError):
        hybrid_sample(matrix, p_prime=400, p=30, seed=0)


def test_hybrid_sample_degenerate_small_case():
    rng = np.random.default_rng(1)
    matrix = feature_matrix(rng.normal(size=(10, 2)))
    reps = hybrid_sample(matrix, p_prime=9, p=8, seed=1)
    assert reps.matrix.shape == (8, 2)


def test_hybrid_sample_covers_every_blob():
    points, labels = three_blobs(2, n_per=100)
    matrix = feature_matrix(points)
    reps = hybrid_sample(matrix, p_prime=150, p=30, seed=2)
    centers = np.array([[0.0, 0.0], [30.0, 0.0], [0.0, 30.0]])
    owner = np.linalg.norm(reps.matrix[:, None] - centers[None], axis=2).argmin(1)
    assert set(owner) == {0, 1, 2}


def test_affinity_contract():
    points, _ = three_blobs(3)
    matrix = feature_matrix(points)
    reps = hybrid_sample(matrix, p_prime=120, p=24, seed=3)
    affinity = build_affinity(matrix, reps, k=5, seed=3)
    n = matrix.n_samples
    assert affinity.indices.shape == (n, 5)          # exactly k*N entries
    assert affinity.weights.shape == (n, 5)
    assert affinity.sigma > 0.0
    assert np.all(affinity.weights > 0.0) and np.all(affinity.weights <= 1.0)
    for row in affinity.indices:
        assert len(set(row)) == 5
    with pytest.raises(ParameterError):
        build_affinity(matrix, reps, k=25, seed=3)


def test_affinity_weight_one_at_zero_distance():
    reps_points = np.array([[0.0, 0.0], [5.0, 0.0], [0.0, 5.0]])
    samples = np.array([[0.0, 0.0], [2.0, 2.0]])
    from scatclust.spectral import Representatives
    reps = Representatives(reps_points, p=3, p_prime=3)
    affinity = build_affinity(feature_matrix(samples), reps, k=1, seed=0)
    assert affinity.indices[0, 0] == 0
    assert affinity.weights[0, 0] == pytest.approx(1.0)


def test_affinity_equal_distances_give_equal_weights():
    reps_points = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    samples = np.zeros((3, 2))
    from scatclust.spectral import Representatives
    reps = Representatives(reps_points, p=4, p_prime=4)
    affinity = build_affinity(feature_matrix(samples), reps, k=4, seed=0)
    assert np.allclose(affinity.weights, affinity.weights[0, 0])


def test_transfer_cut_permutation_graph_separates_singletons():
    n = 6
    perm = np.array([2, 0, 1, 5, 3, 4])
    affinity = SparseAffinity(perm[:, None], np.ones((n, 1)),
                              n_representatives=n, sigma=1.0)
    # representative-side graph is the identity: all eigenvalues equal 1
    small = _as_csr(affinity).toarray()
    values = np.linalg.eigvalsh(small.T @ small)
    assert values.max() == pytest.approx(1.0)
    embedding = transfer_cut(affinity, n)
    rows = embedding.coordinates
    for i in range(n):
        for j in range(i + 1, n):
            assert np.linalg.norm(rows[i] - rows[j]) > 0.1


def test_transfer_cut_disconnected_components():
    # two blocks of samples wired to disjoint representative pairs
    indices = np.array([[0], [0], [1], [2], [3], [2]])
    weights = np.full((6, 1), 0.8)
    affinity = SparseAffinity(indices, weights, n_representatives=4, sigma=1.0)
    embedding = transfer_cut(affinity, 2)
    rows = _row_normalize(embedding.coordinates)
    # rows are constant within the {0,1,2} / {3,4,5} components
    np.testing.assert_allclose(rows[0], rows[1], atol=1e-8)
    np.testing.assert_allclose(rows[3], rows[5], atol=1e-8)
    # eigenvalue 1 has multiplicity >= 2 on the normalized small graph
    a = _as_csr(affinity)
    row_deg = np.asarray(a.sum(axis=1)).ravel()
    col_deg = np.asarray(a.sum(axis=0)).ravel()
    half = a.multiply(1.0 / np.sqrt(row_deg)[:, None]).tocsr()
    small = (half.T @ half).toarray()
    normalized = small / np.sqrt(col_deg)[:, None] / np.sqrt(col_deg)[None, :]
    values = np.linalg.eigvalsh(normalized)
    assert (values > 1.0 - 1e-10).sum() >= 2


def test_transfer_cut_connectivity_errors():
    indices = np.array([[0], [1], [1]])
    weights = np.array([[0.5], [0.5], [0.5]])
    dead_rep = SparseAffinity(indices, weights, n_representatives=3, sigma=1.0)
    with pytest.raises(ConnectivityError, match="representative 2"):
        transfer_cut(dead_rep, 2)
    dead_row = SparseAffinity(indices, np.array([[0.0], [0.5], [0.5]]),
                              n_representatives=2, sigma=1.0)
    with pytest.raises(ConnectivityError, match="sample 0"):
        transfer_cut(dead_row, 2)


def test_transfer_cut_small_graph_psd_and_bounded():
    points, _ = three_blobs(4)
    matrix = feature_matrix(points)
    reps = hybrid_sample(matrix, p_prime=90, p=18, seed=4)
    affinity = build_affinity(matrix, reps, k=3, seed=4)
    a = _as_csr(affinity)
    row_deg = np.asarray(a.sum(axis=1)).ravel()
    col_deg = np.asarray(a.sum(axis=0)).ravel()
    half = a.multiply(1.0 / np.sqrt(row_deg)[:, None]).tocsr()
    small = (half.T @ half).toarray()
    assert np.abs(small - small.T).max() <= 1e-8
    values = np.linalg.eigvalsh(small)
    assert values.min() >= -1e-8
    normalized = small / np.sqrt(col_deg)[:, None] / np.sqrt(col_deg)[None, :]
    nvalues = np.linalg.eigvalsh(normalized)
    assert nvalues.min() >= -1e-8 and nvalues.max() <= 1.0 + 1e-8


def test_transfer_cut_matches_dense_oracle():
    agree = 0
    for seed in range(10):
        mine, oracle, _ = run_small_instance(seed)
        if accuracy(mine, oracle) == 1.0:
            agree += 1
    assert agree >= 9


def test_representative_relabeling_invariance():
    points, _ = three_blobs(5)
    matrix = feature_matrix(points)
    reps = hybrid_sample(matrix, p_prime=90, p=18, seed=5)
    affinity = build_affinity(matrix, reps, k=3, seed=5)

    rng = np.random.default_rng(5)
    perm = rng.permutation(affinity.n_representatives)
    inverse = np.argsort(perm)
    permuted = SparseAffinity(inverse[affinity.indices], affinity.weights,
                              affinity.n_representatives, affinity.sigma)
    base = kmeans(_row_normalize(transfer_cut(affinity, 3).coordinates), 3,
                  seed=77).assignments
    relabeled = kmeans(_row_normalize(transfer_cut(permuted, 3).coordinates), 3,
                       seed=77).assignments
    assert accuracy(base, relabeled) == 1.0


def test_uspec_three_blobs_exact():
    points, labels = three_blobs(6, n_per=1000)
    result = uspec(feature_matrix(points), 3, p_prime=300, p=60, k=5, seed=6)
    assert accuracy(labels, result.assignments) == 1.0
    assert set(result.timing) == {"sample", "affinity", "eigen", "kmeans"}


def test_uspec_rings_beat_kmeans():
    rng = np.random.default_rng(7)
    n = 1000
    angles = rng.uniform(0, 2 * np.pi, 2 * n)
    radii = np.concatenate([1.0 + rng.normal(0, 0.05, n),
                            3.0 + rng.normal(0, 0.05, n)])
    rings = np.c_[radii * np.cos(angles), radii * np.sin(angles)]
    labels = np.repeat([0, 1], n)
    spectral_acc = accuracy(labels, uspec(feature_matrix(rings), 2, p_prime=500,
                                          p=100, k=3, seed=7).assignments)
    kmeans_acc = accuracy(labels, kmeans(rings, 2, seed=7).assignments)
    assert spectral_acc >= 0.98
    assert kmeans_acc <= 0.6


def test_uspec_deterministic():
    points, _ = three_blobs(8)
    matrix = feature_matrix(points)
    first = uspec(matrix, 3, p_prime=90, p=18, k=3, seed=8)
    second = uspec(matrix, 3, p_prime=90, p=18, k=3, seed=8)
    np.testing.assert_array_equal(first.assignments, second.assignments)
