import os

import numpy as np
import pytest

from scatclust.datasets import ImageSet, pad_and_normalize

DATA_DIR = os.environ.get("SCATCLUST_DATA_DIR",
                          os.path.join(os.path.dirname(__file__), "..", "data"))


def dataset_path(*names):
    """First existing path among names (plain or .gz) under the data dir, or
    None when the benchmark data is not installed."""
    for name in names:
        for suffix in ("", ".gz"):
            path = os.path.join(DATA_DIR, name + suffix)
            if os.path.exists(path):
                return path
    return None


def require_dataset(*names):
    path = dataset_path(*names)
    if path is None:
        pytest.skip(
            f"benchmark data not installed: expected one of {names} under "
            f"{os.path.abspath(DATA_DIR)} (set SCATCLUST_DATA_DIR); see README"
        )
    return path


@pytest.fixture(scope="session")
def digit_images():
    """Real handwritten digits bundled with scikit-learn, upscaled to 16x16
    and zero-padded to the 32x32 pipeline canvas."""
    sklearn_datasets = pytest.importorskip("sklearn.datasets")
    digits = sklearn_datasets.load_digits()
    upscaled = np.kron(digits.images / 16.0, np.ones((1, 2, 2)))
    image_set = ImageSet(upscaled, digits.target, 10)
    return pad_and_normalize(image_set, 32)


@pytest.fixture(scope="session")
def digit_scattering(digit_images):
    from scatclust.scattering import build_filter_bank, scatter_dataset

    bank = build_filter_bank(32, 3, 8)
    return scatter_dataset(digit_images, bank)
