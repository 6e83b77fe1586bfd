"""End-to-end orchestration: load, pad, scatter, project, cluster, report.

A run is described by a PipelineConfig; `run_pipeline` executes the enabled
stages in order, repeats the clustering stage for `trials` consecutive seeds,
and returns a JSON-ready report with per-stage wall-clock timings. Reports
and per-sample assignments are written by the CLI layer.
"""

from __future__ import annotations

import os
import time
from contextlib import contextmanager
from dataclasses import dataclass, asdict, field

import numpy as np

from . import datasets
from .errors import ParameterError, ScatclustError
from .kmeans import kmeans
from .metrics import accuracy, nmi
from .scattering import (build_filter_bank, load_feature_cache,
                         save_feature_cache, scatter_dataset)
from .spectral import ClusterResult, uspec
from .subspace import (FeatureMatrix, class_subspace, flatten_images,
                       pca_reduce, poc_project, principal_angles,
                       spectrum_report)

DATASET_CHOICES = ("mnist", "mnist-test", "usps", "fashion-mnist", "csv")
CLUSTERER_CHOICES = ("uspec", "kmeans")


@dataclass
class PipelineConfig:
    dataset: str = "mnist-test"
    data_dir: str = "data"
    csv_path: str = ""                # used when dataset == "csv"
    J: int = 3
    L: int = 8
    pad_size: int = 32
    pca_dim: int = 1000               # 0 disables the PCA stage
    poc_n: int = 2
    p_prime: int = 9000
    p: int = 1000
    knn: int = 5
    clusters: int = 10
    seed: int = 0
    trials: int = 5
    use_scattering: bool = True
    use_poc: bool = True
    clusterer: str = "uspec"
    cache: str = ""                   # optional scattering feature cache file
    out: str = "report.json"
    assignments_out: str = ""         # default: <out stem>.assignments.csv
    figures: bool = True

    def validate(self) -> None:
        if self.dataset not in DATASET_CHOICES:
            raise ParameterError(f"unknown dataset {self.dataset!r}")
        if self.clusterer not in CLUSTERER_CHOICES:
            raise ParameterError(f"unknown clusterer {self.clusterer!r}")
        if self.dataset == "csv" and not self.csv_path:
            raise ParameterError("dataset 'csv' requires csv_path")
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if self.J < 1 or self.L < 1 or 2 ** self.J > self.pad_size:
            raise ParameterError(
                f"scattering parameters J={self.J}, L={self.L} invalid "
                f"for pad_size {self.pad_size}"
            )
        if self.pca_dim < 0 or self.poc_n < 0:
            raise ParameterError("pca_dim and poc_n must be >= 0")
        if self.clusterer == "uspec":
            if self.p < 2 or self.p_prime <= self.p:
                raise ParameterError(
                    f"need 2 <= p < p_prime, got p={self.p}, p_prime={self.p_prime}"
                )
            if self.knn < 1 or self.knn > self.p:
                raise ParameterError(f"knn={self.knn} outside [1, p={self.p}]")
        if self.clusters < 2:
            raise ParameterError("clusters must be >= 2")


class StageError(ScatclustError):
    """A pipeline stage failed; the message names the stage."""


@contextmanager
def _stage(name):
    try:
        yield
    except StageError:
        raise
    except (ScatclustError, OSError) as exc:
        raise StageError(f"stage '{name}': {exc}") from exc


def _resolve(data_dir, *names):
    """First existing file among `names` (each tried plain and gzipped)."""
    for name in names:
        for suffix in ("", ".gz"):
            path = os.path.join(data_dir, name + suffix)
            if os.path.exists(path):
                return path
    raise FileNotFoundError(
        f"none of {names} (optionally .gz) found under {data_dir!r}"
    )


def load_dataset(config: PipelineConfig) -> datasets.ImageSet:
    kind = config.dataset
    if kind == "csv":
        return datasets.load_csv(config.csv_path)
    if kind == "usps":
        return datasets.load_usps(_resolve(config.data_dir, "usps.csv"))
    test_pair = (
        _resolve(config.data_dir, "t10k-images-idx3-ubyte", "t10k-images.idx3-ubyte"),
        _resolve(config.data_dir, "t10k-labels-idx1-ubyte", "t10k-labels.idx1-ubyte"),
    )
    if kind == "mnist-test":
        return datasets.load_idx(*test_pair)
    # mnist / fashion-mnist: full 70k = train split + test split
    train_pair = (
        _resolve(config.data_dir, "train-images-idx3-ubyte", "train-images.idx3-ubyte"),
        _resolve(config.data_dir, "train-labels-idx1-ubyte", "train-labels.idx1-ubyte"),
    )
    train = datasets.load_idx(*train_pair)
    test = datasets.load_idx(*test_pair)
    images = np.concatenate([train.images, test.images])
    labels = np.concatenate([train.labels, test.labels])
    return datasets.ImageSet(images, labels,
                             max(train.n_classes, test.n_classes))


def compute_features(image_set: datasets.ImageSet,
                     config: PipelineConfig) -> tuple[FeatureMatrix, dict]:
    """Feature stages shared by clustering and diagnostics: scattering (or
    flattened pixels), then optional PCA, then optional projection onto the
    complement of the leading eigendirections."""
    timing = {}
    if config.use_scattering:
        t0 = time.perf_counter()
        if config.cache and os.path.exists(config.cache):
            features = load_feature_cache(config.cache)
            expected_dim = build_filter_bank(
                config.pad_size, config.J, config.L).n_coefficients()
            if (features.n_samples != len(image_set)
                    or features.dim != expected_dim):
                raise ParameterError(
                    f"cache {config.cache!r} holds {features.dim}x"
                    f"{features.n_samples}, expected {expected_dim}x"
                    f"{len(image_set)} for this dataset and bank"
                )
        else:
            bank = build_filter_bank(config.pad_size, config.J, config.L)
            features = scatter_dataset(image_set, bank)
            if config.cache:
                save_feature_cache(features, config.cache)
        timing["scattering"] = time.perf_counter() - t0
    else:
        features = flatten_images(image_set.images)

    if 0 < config.pca_dim < features.dim:
        t0 = time.perf_counter()
        features = pca_reduce(features, config.pca_dim)
        timing["pca"] = time.perf_counter() - t0

    if config.use_poc:
        t0 = time.perf_counter()
        features = poc_project(features, config.poc_n)
        timing["poc"] = time.perf_counter() - t0
    return features, timing


def _cluster_once(features: FeatureMatrix, config: PipelineConfig,
                  seed: int) -> ClusterResult:
    if config.clusterer == "uspec":
        p_prime = min(config.p_prime, features.n_samples)
        if p_prime <= config.p:
            raise ParameterError(
                f"p={config.p} must stay below effective p_prime={p_prime}"
            )
        return uspec(features, config.clusters, p_prime, config.p,
                     config.knn, seed=seed)
    result = kmeans(features.data.T, config.clusters, max_iter=300,
                    n_init=10, seed=seed)
    return ClusterResult(result.assignments, config.clusters,
                         {"kmeans": 0.0}, inertia=result.inertia)


def run_pipeline(config: PipelineConfig) -> dict:
    """Execute every enabled stage and return the report dictionary.

    The report always carries the config echo, per-stage timings, the metric
    values (or null metrics with labeled=false), and the trial seeds.
    """
    config.validate()
    total_start = time.perf_counter()
    stage_seconds = {}

    t0 = time.perf_counter()
    with _stage("load"):
        image_set = load_dataset(config)
    stage_seconds["load"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    with _stage("pad"):
        image_set = datasets.pad_and_normalize(image_set, config.pad_size)
    stage_seconds["pad"] = time.perf_counter() - t0

    with _stage("features"):
        features, feature_timing = compute_features(image_set, config)
    stage_seconds.update(feature_timing)

    seeds = [config.seed + t for t in range(config.trials)]
    t0 = time.perf_counter()
    with _stage("cluster"):
        results = [_cluster_once(features, config, s) for s in seeds]
    stage_seconds["cluster"] = time.perf_counter() - t0

    labeled = image_set.labels is not None
    acc_values = []
    nmi_values = []
    if labeled:
        for result in results:
            acc_values.append(accuracy(image_set.labels, result.assignments))
            nmi_values.append(nmi(image_set.labels, result.assignments))

    report = {
        "config": asdict(config),
        "labeled": labeled,
        "n_samples": len(image_set),
        "feature_dim": features.dim,
        "acc_mean": float(np.mean(acc_values)) if labeled else None,
        "acc_std": float(np.std(acc_values)) if labeled else None,
        "nmi_mean": float(np.mean(nmi_values)) if labeled else None,
        "nmi_std": float(np.std(nmi_values)) if labeled else None,
        "acc_per_trial": acc_values if labeled else None,
        "nmi_per_trial": nmi_values if labeled else None,
        "stage_seconds": stage_seconds,
        "total_seconds": time.perf_counter() - total_start,
        "seeds": seeds,
    }
    report["assignments"] = [r.assignments for r in results]
    return report


@dataclass
class DiagnosticsResult:
    spectra: dict = field(default_factory=dict)        # domain -> normalized eigenvalues
    prefix_50: dict = field(default_factory=dict)      # domain -> #eigenvalues to 50%
    angles: dict = field(default_factory=dict)         # domain -> degrees ascending
    class_pair: tuple = (0, 0)


def run_diagnostics(config: PipelineConfig, class_a: int, class_b: int,
                    n_angles: int = 5) -> DiagnosticsResult:
    """Eigenvalue-decay spectra and class-subspace principal angles in both
    the image and the scattering domains."""
    config.validate()
    image_set = load_dataset(config)
    if image_set.labels is None:
        raise ParameterError("diagnostics require a labeled dataset")
    image_set = datasets.pad_and_normalize(image_set, config.pad_size)

    pixel_features = flatten_images(image_set.images)
    if config.cache and os.path.exists(config.cache):
        scat_features = load_feature_cache(config.cache)
    else:
        bank = build_filter_bank(config.pad_size, config.J, config.L)
        scat_features = scatter_dataset(image_set, bank)
        if config.cache:
            save_feature_cache(scat_features, config.cache)

    result = DiagnosticsResult(class_pair=(class_a, class_b))
    for domain, features in (("image", pixel_features),
                             ("scattering", scat_features)):
        spectrum = spectrum_report(features)
        result.spectra[domain] = spectrum
        result.prefix_50[domain] = int(np.searchsorted(
            np.cumsum(spectrum), 0.5) + 1)
        basis_a = class_subspace(features, image_set.labels, class_a, n_angles)
        basis_b = class_subspace(features, image_set.labels, class_b, n_angles)
        result.angles[domain] = principal_angles(basis_a.T, basis_b.T, n_angles)
    return result
