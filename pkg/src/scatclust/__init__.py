"""Image clustering from scattering features.

The pipeline cascades a Morlet scattering transform, PCA, projection onto the
orthogonal complement of the leading eigendirections, and scalable bipartite
spectral clustering. Submodules are importable on their own; the most common
entry points are re-exported here.
"""

from .datasets import ImageSet, load_csv, load_idx, load_usps, pad_and_normalize
from .errors import (ConnectivityError, ConsistencyError, DegeneracyError,
                     DimensionError, FormatError, InsufficientDataError,
                     ParameterError, ScatclustError)
from .hnsw import AnnIndex, NeighborList, build_index, exact_knn, knn_query
from .kmeans import KMeansResult, kmeans
from .metrics import accuracy, nmi
from .pipeline import PipelineConfig, run_diagnostics, run_pipeline
from .scattering import (FilterBank, build_filter_bank, load_feature_cache,
                         save_feature_cache, scatter_dataset, scatter_image)
from .spectral import (ClusterResult, Embedding, Representatives,
                       SparseAffinity, build_affinity, hybrid_sample,
                       transfer_cut, uspec)
from .subspace import (FeatureMatrix, Spectrum, class_subspace, eigendecompose,
                       flatten_images, pca_reduce, poc_project,
                       principal_angles, spectrum_report)

__version__ = "0.1.0"

__all__ = [
    "AnnIndex", "ClusterResult", "ConnectivityError", "ConsistencyError",
    "DegeneracyError", "DimensionError", "Embedding", "FeatureMatrix",
    "FilterBank", "FormatError", "ImageSet", "InsufficientDataError",
    "KMeansResult", "NeighborList", "ParameterError", "PipelineConfig",
    "Representatives", "ScatclustError", "SparseAffinity", "Spectrum",
    "accuracy", "build_affinity", "build_filter_bank", "build_index",
    "class_subspace", "eigendecompose", "exact_knn", "flatten_images",
    "hybrid_sample", "kmeans", "knn_query", "load_csv", "load_feature_cache",
    "load_idx", "load_usps", "nmi", "pad_and_normalize", "pca_reduce",
    "poc_project", "principal_angles", "run_diagnostics", "run_pipeline",
    "save_feature_cache", "scatter_dataset", "scatter_image",
    "spectrum_report", "transfer_cut", "uspec",
]
