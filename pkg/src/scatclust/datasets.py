"""Loaders for IDX (MNIST-family) and CSV (USPS-style) digit datasets.

Images are kept as an (N, H, W) float64 array with intensities in [0, 1].
IDX files may be plain or gzip-compressed; the binary layout is the usual
big-endian one (magic 0x00000803 for images, 0x00000801 for labels).
"""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, DimensionError, FormatError

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801


@dataclass(frozen=True)
class ImageSet:
    """A batch of same-shape grayscale images with optional class labels."""

    images: np.ndarray                      # (N, H, W), float64 in [0, 1]
    labels: np.ndarray | None = None        # (N,), int64 in [0, n_classes)
    n_classes: int = 0

    def __post_init__(self):
        images = np.asarray(self.images, dtype=np.float64)
        if images.ndim != 3:
            raise DimensionError(f"images must be (N, H, W), got {images.shape}")
        if images.size and (not np.all(np.isfinite(images))
                            or images.min() < 0.0 or images.max() > 1.0):
            raise FormatError("image intensities must be finite and in [0, 1]")
        object.__setattr__(self, "images", images)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64).ravel()
            if labels.shape[0] != images.shape[0]:
                raise ConsistencyError(
                    f"{labels.shape[0]} labels for {images.shape[0]} images"
                )
            if labels.size and (labels.min() < 0 or labels.max() >= self.n_classes):
                raise FormatError(
                    f"labels must lie in [0, {self.n_classes}), "
                    f"got range [{labels.min()}, {labels.max()}]"
                )
            object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.images.shape[0]

    @property
    def height(self) -> int:
        return self.images.shape[1]

    @property
    def width(self) -> int:
        return self.images.shape[2]


def _open_maybe_gzip(path):
    with open(path, "rb") as f:
        head = f.read(2)
    if head == b"\x1f\x8b":
        return gzip.open(path, "rb")
    return open(path, "rb")


def _read_idx_header(f, n_dims, path):
    raw = f.read(4 * (1 + n_dims))
    if len(raw) != 4 * (1 + n_dims):
        raise FormatError(f"{path}: truncated IDX header")
    return struct.unpack(f">{1 + n_dims}i", raw)


def load_idx(images_path, labels_path=None) -> ImageSet:
    """Load an IDX image file, optionally paired with an IDX label file.

    Pixel bytes are mapped to [0, 1] by division by 255; sample order is
    preserved.
    """
    with _open_maybe_gzip(images_path) as f:
        magic, n, h, w = _read_idx_header(f, 3, images_path)
        if magic != IDX_IMAGE_MAGIC:
            raise FormatError(
                f"{images_path}: bad image magic 0x{magic:08x}, "
                f"expected 0x{IDX_IMAGE_MAGIC:08x}"
            )
        if n < 0 or h <= 0 or w <= 0:
            raise FormatError(f"{images_path}: bad dimensions N={n}, H={h}, W={w}")
        payload = f.read(n * h * w + 1)
    if len(payload) != n * h * w:
        raise FormatError(
            f"{images_path}: payload holds {len(payload)} bytes, "
            f"header promises {n * h * w}"
        )
    images = np.frombuffer(payload, dtype=np.uint8).reshape(n, h, w)
    images = images.astype(np.float64) / 255.0

    labels = None
    n_classes = 0
    if labels_path is not None:
        with _open_maybe_gzip(labels_path) as f:
            magic, n_labels = _read_idx_header(f, 1, labels_path)
            if magic != IDX_LABEL_MAGIC:
                raise FormatError(
                    f"{labels_path}: bad label magic 0x{magic:08x}, "
                    f"expected 0x{IDX_LABEL_MAGIC:08x}"
                )
            raw = f.read(n_labels + 1)
        if len(raw) != n_labels:
            raise FormatError(
                f"{labels_path}: payload holds {len(raw)} bytes, "
                f"header promises {n_labels}"
            )
        if n_labels != n:
            raise ConsistencyError(
                f"{n} images but {n_labels} labels ({images_path}, {labels_path})"
            )
        labels = np.frombuffer(raw, dtype=np.uint8).astype(np.int64)
        n_classes = int(labels.max()) + 1 if n_labels else 0
    return ImageSet(images, labels, n_classes)


def load_csv(path, side=None, n_classes=None) -> ImageSet:
    """Load a header-free CSV with one image per row: label, then side*side
    intensity fields. `side` is inferred from the first row when omitted.

    Intensities already inside [0, 1] are kept; otherwise the whole file is
    min-max rescaled to [0, 1] (canonical USPS dumps use [-1, 1]).
    """
    labels = []
    rows = []
    with open(path, "r") as f:
        for i, line in enumerate(f):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if side is None:
                side = int(round((len(fields) - 1) ** 0.5))
            if len(fields) != side * side + 1:
                raise FormatError(
                    f"{path}: row {i} has {len(fields)} fields, "
                    f"expected {side * side + 1}"
                )
            try:
                labels.append(int(float(fields[0])))
                rows.append(np.array(fields[1:], dtype=np.float64))
            except ValueError as exc:
                raise FormatError(f"{path}: row {i}: {exc}") from exc
    if not rows:
        return ImageSet(np.zeros((0, side or 0, side or 0)), None, 0)
    pixels = np.stack(rows).reshape(len(rows), side, side)
    if not np.all(np.isfinite(pixels)):
        raise FormatError(f"{path}: non-finite intensity value")
    lo, hi = pixels.min(), pixels.max()
    if lo < 0.0 or hi > 1.0:
        span = hi - lo
        pixels = (pixels - lo) / (span if span > 0 else 1.0)
    labels = np.array(labels, dtype=np.int64)
    if n_classes is None:
        n_classes = int(labels.max()) + 1
    if labels.min() < 0 or labels.max() >= n_classes:
        bad = int(np.argmax((labels < 0) | (labels >= n_classes)))
        raise FormatError(
            f"{path}: row {bad} label {labels[bad]} outside [0, {n_classes})"
        )
    return ImageSet(pixels, labels, n_classes)


def load_usps(path) -> ImageSet:
    """Load USPS digits from the documented 257-field CSV (label + 16x16
    intensities, classes 0-9)."""
    return load_csv(path, side=16, n_classes=10)


def pad_and_normalize(image_set: ImageSet, target: int) -> ImageSet:
    """Center each image on a target x target zero canvas; labels unchanged."""
    h, w = image_set.height, image_set.width
    if target < h or target < w:
        raise DimensionError(f"target {target} smaller than image {h}x{w}")
    if target == h and target == w:
        return image_set
    top = (target - h) // 2
    left = (target - w) // 2
    padded = np.zeros((len(image_set), target, target), dtype=np.float64)
    padded[:, top:top + h, left:left + w] = image_set.images
    return ImageSet(padded, image_set.labels, image_set.n_classes)
