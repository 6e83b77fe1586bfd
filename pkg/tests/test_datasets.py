import gzip
import struct

import numpy as np
import pytest

from scatclust.datasets import (ImageSet, load_csv, load_idx, load_usps,
                                pad_and_normalize)
from scatclust.errors import (ConsistencyError, DimensionError, FormatError)


def write_idx_images(path, images, magic=0x00000803, drop_bytes=0, gz=False):
    images = np.asarray(images, dtype=np.uint8)
    n, h, w = images.shape
    payload = struct.pack(">4i", magic, n, h, w) + images.tobytes()
    if drop_bytes:
        payload = payload[:-drop_bytes]
    opener = gzip.open if gz else open
    with opener(path, "wb") as f:
        f.write(payload)


def write_idx_labels(path, labels, magic=0x00000801, gz=False):
    labels = np.asarray(labels, dtype=np.uint8)
    payload = struct.pack(">2i", magic, len(labels)) + labels.tobytes()
    opener = gzip.open if gz else open
    with opener(path, "wb") as f:
        f.write(payload)


@pytest.fixture
def idx_pair(tmp_path):
    rng = np.random.default_rng(0)
    images = rng.integers(0, 256, size=(7, 5, 4), dtype=np.uint8)
    labels = np.array([0, 1, 2, 1, 0, 2, 1], dtype=np.uint8)
    img_path = tmp_path / "images.idx"
    lab_path = tmp_path / "labels.idx"
    write_idx_images(img_path, images)
    write_idx_labels(lab_path, labels)
    return img_path, lab_path, images, labels


def test_load_idx_roundtrip(idx_pair):
    img_path, lab_path, images, labels = idx_pair
    loaded = load_idx(img_path, lab_path)
    assert len(loaded) == 7
    assert loaded.images.shape == (7, 5, 4)
    np.testing.assert_array_equal(loaded.images, images / 255.0)
    np.testing.assert_array_equal(loaded.labels, labels)
    assert loaded.n_classes == 3


def test_load_idx_gzip_transparent(tmp_path, idx_pair):
    _, _, images, labels = idx_pair
    img_gz = tmp_path / "images.idx.gz"
    lab_gz = tmp_path / "labels.idx.gz"
    write_idx_images(img_gz, images, gz=True)
    write_idx_labels(lab_gz, labels, gz=True)
    loaded = load_idx(img_gz, lab_gz)
    np.testing.assert_array_equal(loaded.images, images / 255.0)


def test_load_idx_deterministic(idx_pair):
    img_path, lab_path, _, _ = idx_pair
    first = load_idx(img_path, lab_path)
    second = load_idx(img_path, lab_path)
    assert first.images.tobytes() == second.images.tobytes()
    assert first.labels.tobytes() == second.labels.tobytes()


def test_load_idx_empty_file_ok(tmp_path):
    path = tmp_path / "empty.idx"
    write_idx_images(path, np.zeros((0, 4, 4), dtype=np.uint8))
    loaded = load_idx(path)
    assert len(loaded) == 0
    assert loaded.labels is None


def test_load_idx_truncated_payload(tmp_path):
    path = tmp_path / "short.idx"
    write_idx_images(path, np.zeros((100, 3, 3), dtype=np.uint8), drop_bytes=9)
    with pytest.raises(FormatError, match="payload"):
        load_idx(path)


def test_load_idx_bad_magic(tmp_path):
    path = tmp_path / "bad.idx"
    write_idx_images(path, np.zeros((2, 3, 3), dtype=np.uint8), magic=0x00000899)
    with pytest.raises(FormatError, match="magic"):
        load_idx(path)


def test_load_idx_label_magic_and_mismatch(tmp_path, idx_pair):
    img_path, _, _, labels = idx_pair
    bad_lab = tmp_path / "bad_labels.idx"
    write_idx_labels(bad_lab, labels, magic=0x00000777)
    with pytest.raises(FormatError, match="magic"):
        load_idx(img_path, bad_lab)

    short_lab = tmp_path / "short_labels.idx"
    write_idx_labels(short_lab, labels[:3])
    with pytest.raises(ConsistencyError, match="labels"):
        load_idx(img_path, short_lab)


def test_label_histogram_sums_to_n(idx_pair):
    img_path, lab_path, _, _ = idx_pair
    loaded = load_idx(img_path, lab_path)
    hist = np.bincount(loaded.labels, minlength=loaded.n_classes)
    assert hist.sum() == len(loaded)


def write_usps_csv(path, rows):
    with open(path, "w") as f:
        for label, pixels in rows:
            f.write(",".join([str(label)] + [f"{v:.6f}" for v in pixels]) + "\n")


def test_load_usps_basic(tmp_path):
    rng = np.random.default_rng(1)
    rows = [(int(rng.integers(0, 10)), rng.uniform(-1, 1, 256)) for _ in range(12)]
    path = tmp_path / "usps.csv"
    write_usps_csv(path, rows)
    loaded = load_usps(path)
    assert len(loaded) == 12
    assert loaded.images.shape == (12, 16, 16)
    assert loaded.n_classes == 10
    # [-1, 1] data is rescaled onto [0, 1]
    assert loaded.images.min() >= 0.0 and loaded.images.max() <= 1.0


def test_load_usps_single_row(tmp_path):
    path = tmp_path / "one.csv"
    write_usps_csv(path, [(4, np.linspace(0, 1, 256))])
    loaded = load_usps(path)
    assert len(loaded) == 1
    assert loaded.labels[0] == 4


def test_load_usps_label_out_of_range(tmp_path):
    path = tmp_path / "bad_label.csv"
    write_usps_csv(path, [(3, np.zeros(256)), (11, np.zeros(256))])
    with pytest.raises(FormatError, match="row 1"):
        load_usps(path)


def test_load_usps_wrong_field_count(tmp_path):
    path = tmp_path / "short_row.csv"
    with open(path, "w") as f:
        f.write(",".join(["1"] + ["0.5"] * 256) + "\n")
        f.write(",".join(["2"] + ["0.5"] * 200) + "\n")
    with pytest.raises(FormatError, match="row 1"):
        load_usps(path)


def test_load_usps_values_in_unit_interval_kept(tmp_path):
    pixels = np.full(256, 0.25)
    path = tmp_path / "unit.csv"
    write_usps_csv(path, [(0, pixels)])
    loaded = load_usps(path)
    np.testing.assert_allclose(loaded.images.ravel(), 0.25)


def test_load_csv_infers_side(tmp_path):
    path = tmp_path / "gen.csv"
    with open(path, "w") as f:
        f.write(",".join(["0"] + ["0.1"] * 64) + "\n")
        f.write(",".join(["1"] + ["0.9"] * 64) + "\n")
    loaded = load_csv(path)
    assert loaded.images.shape == (2, 8, 8)
    assert loaded.n_classes == 2


def test_pad_centers_28_to_32():
    rng = np.random.default_rng(2)
    image = rng.uniform(0.1, 1.0, (28, 28))
    padded = pad_and_normalize(ImageSet(image[None]), 32)
    assert padded.images.shape == (1, 32, 32)
    np.testing.assert_array_equal(padded.images[0, 2:30, 2:30], image)
    border = padded.images[0].copy()
    border[2:30, 2:30] = 0.0
    assert np.all(border == 0.0)


def test_pad_identity_when_sizes_match():
    rng = np.random.default_rng(3)
    image_set = ImageSet(rng.uniform(size=(4, 32, 32)))
    padded = pad_and_normalize(image_set, 32)
    np.testing.assert_array_equal(padded.images, image_set.images)


def test_pad_preserves_sum_and_nonzero_multiset():
    rng = np.random.default_rng(4)
    image = rng.uniform(0.01, 1.0, (16, 16))
    padded = pad_and_normalize(ImageSet(image[None]), 32)
    assert padded.images.sum() == image.sum()
    original = np.sort(image.ravel())
    kept = np.sort(padded.images[padded.images > 0.0])
    np.testing.assert_array_equal(kept, original)


def test_pad_keeps_labels():
    image_set = ImageSet(np.zeros((3, 8, 8)), [0, 1, 0], 2)
    padded = pad_and_normalize(image_set, 32)
    np.testing.assert_array_equal(padded.labels, [0, 1, 0])


def test_pad_rejects_small_target():
    image_set = ImageSet(np.zeros((1, 28, 28)))
    with pytest.raises(DimensionError):
        pad_and_normalize(image_set, 27)


def test_image_set_validation():
    with pytest.raises(ConsistencyError):
        ImageSet(np.zeros((3, 4, 4)), [0, 1], 2)
    with pytest.raises(FormatError):
        ImageSet(np.full((1, 2, 2), 1.5))
    with pytest.raises(FormatError):
        ImageSet(np.zeros((2, 2, 2)), [0, 5], 2)
