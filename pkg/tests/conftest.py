import os

import numpy as np
import pytest

MNIST_DIR = os.environ.get("WASSDIM_MNIST_DIR", "/root/data/mnist")


def _have_mnist():
    return os.path.exists(os.path.join(MNIST_DIR, "t10k-labels-idx1-ubyte")) or os.path.exists(
        os.path.join(MNIST_DIR, "t10k-labels-idx1-ubyte.gz")
    )


@pytest.fixture
def mnist_dir():
    if not _have_mnist():
        pytest.skip(f"MNIST IDX files not found in {MNIST_DIR} (set WASSDIM_MNIST_DIR)")
    return MNIST_DIR


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
