"""Eigenspace analysis of feature matrices.

Covers covariance eigendecomposition, PCA reduction, projection onto the
orthogonal complement of the leading eigenvectors, normalized eigenvalue
spectra, and principal angles between class subspaces. Columns are samples
throughout; covariances are of mean-centered columns with divisor N-1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (DegeneracyError, DimensionError, InsufficientDataError,
                     ParameterError)

DOMAINS = ("image", "scattering", "pca", "poc")


@dataclass(frozen=True)
class FeatureMatrix:
    """D x N real matrix, one column per sample, tagged with its domain."""

    data: np.ndarray
    domain: str = "image"

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise DimensionError(f"feature matrix must be 2-D, got {data.shape}")
        if not np.all(np.isfinite(data)):
            raise DimensionError("feature matrix contains non-finite entries")
        if self.domain not in DOMAINS:
            raise ParameterError(f"unknown domain tag {self.domain!r}")
        object.__setattr__(self, "data", data)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted non-increasing with a column-aligned orthonormal
    eigenvector basis."""

    eigenvalues: np.ndarray   # (D,)
    eigenvectors: np.ndarray  # (D, D), column i pairs with eigenvalues[i]


def flatten_images(images: np.ndarray, domain: str = "image") -> FeatureMatrix:
    """Stack (N, H, W) images as a (H*W, N) column-per-sample matrix."""
    n = images.shape[0]
    return FeatureMatrix(images.reshape(n, -1).T.copy(), domain=domain)


def _center(data: np.ndarray) -> np.ndarray:
    return data - data.mean(axis=1, keepdims=True)


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of each column positive."""
    anchor = np.abs(vectors).argmax(axis=0)
    signs = np.sign(vectors[anchor, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _sorted_eigh(cov: np.ndarray):
    """Eigenpairs of a symmetric matrix, non-increasing, stable on ties,
    deterministic signs."""
    values, vectors = np.linalg.eigh(cov)
    order = np.argsort(-values, kind="stable")
    return values[order], _fix_signs(vectors[:, order])


def _covariance(matrix: FeatureMatrix) -> np.ndarray:
    if matrix.n_samples < 2:
        raise InsufficientDataError(
            f"need at least 2 samples, got {matrix.n_samples}"
        )
    centered = _center(matrix.data)
    return centered @ centered.T / (matrix.n_samples - 1)


def eigendecompose(matrix: FeatureMatrix) -> Spectrum:
    """Full spectrum of the sample covariance of mean-centered columns."""
    values, vectors = _sorted_eigh(_covariance(matrix))
    return Spectrum(values, vectors)


def pca_reduce(matrix: FeatureMatrix, target_dim: int) -> FeatureMatrix:
    """Project mean-centered columns onto the top target_dim eigenvectors."""
    d = matrix.dim
    if not 1 <= target_dim <= d:
        raise ParameterError(f"target_dim {target_dim} outside [1, {d}]")
    cov = _covariance(matrix)
    if target_dim < d:
        # ascending index window for the largest target_dim eigenvalues
        values, vectors = scipy.linalg.eigh(
            cov, subset_by_index=[d - target_dim, d - 1]
        )
        order = np.argsort(-values, kind="stable")
        basis = _fix_signs(vectors[:, order])
    else:
        basis = _sorted_eigh(cov)[1]
    return FeatureMatrix(basis.T @ _center(matrix.data), domain="pca")


def poc_project(matrix: FeatureMatrix, n: int) -> FeatureMatrix:
    """Drop the n leading eigendirections: project centered columns onto
    eigenvectors n+1..D, giving a (D-n) x N matrix."""
    d = matrix.dim
    if not 0 <= n < d:
        raise ParameterError(f"n={n} outside [0, {d})")
    _, vectors = _sorted_eigh(_covariance(matrix))
    return FeatureMatrix(vectors[:, n:].T @ _center(matrix.data), domain="poc")


def spectrum_report(matrix: FeatureMatrix) -> np.ndarray:
    """Covariance eigenvalues normalized to unit l1 sum, non-increasing."""
    values = np.linalg.eigvalsh(_covariance(matrix))[::-1]
    total = np.abs(values).sum()
    if total == 0.0:
        raise DegeneracyError("covariance spectrum is identically zero")
    return values / total


def _orthonormal_basis(vectors, name: str) -> np.ndarray:
    """Columns of `vectors` orthonormalized; errors if linearly dependent."""
    array = np.column_stack([np.asarray(v, dtype=np.float64).ravel()
                             for v in vectors])
    basis = scipy.linalg.orth(array)
    if basis.shape[1] < array.shape[1]:
        raise DegeneracyError(
            f"{name}: {array.shape[1]} vectors span only a "
            f"{basis.shape[1]}-dimensional subspace"
        )
    return basis


def principal_angles(U, V, n_angles: int) -> np.ndarray:
    """Principal angles between span(U) and span(V) in degrees, ascending.

    U and V are sequences of spanning vectors (a 2-D array is read as one
    vector per row). Computed as arccosines of the singular values of the
    product of the orthonormalized bases.
    """
    basis_u = _orthonormal_basis(U, "U")
    basis_v = _orthonormal_basis(V, "V")
    max_angles = min(basis_u.shape[1], basis_v.shape[1])
    if not 1 <= n_angles <= max_angles:
        raise ParameterError(
            f"n_angles {n_angles} outside [1, {max_angles}]"
        )
    cosines = scipy.linalg.svd(basis_u.T @ basis_v, compute_uv=False)
    cosines = np.clip(cosines, 0.0, 1.0)
    return np.degrees(np.arccos(cosines[:n_angles]))


def class_subspace(matrix: FeatureMatrix, labels: np.ndarray, label: int,
                   n_vectors: int) -> np.ndarray:
    """Top eigenvectors (columns) of one class's centered sample covariance."""
    columns = matrix.data[:, np.asarray(labels) == label]
    if columns.shape[1] < 2:
        raise InsufficientDataError(
            f"class {label} has {columns.shape[1]} samples, need >= 2"
        )
    sub = FeatureMatrix(columns, domain=matrix.domain)
    if not 1 <= n_vectors <= matrix.dim:
        raise ParameterError(f"n_vectors {n_vectors} outside [1, {matrix.dim}]")
    cov = _covariance(sub)
    d = matrix.dim
    if n_vectors < d:
        values, vectors = scipy.linalg.eigh(
            cov, subset_by_index=[d - n_vectors, d - 1]
        )
        order = np.argsort(-values, kind="stable")
        return _fix_signs(vectors[:, order])
    return _sorted_eigh(cov)[1][:, :n_vectors]
