import os

os.environ.setdefault("TF_CPP_MIN_LOG_LEVEL", "3")

import numpy as np
import pytest

from synthdata import write_dataset


@pytest.fixture(scope="session")
def dataset10(tmp_path_factory):
    """Ten synthetic patches plus manifest, shared read-only by tests."""
    root = tmp_path_factory.mktemp("patches10")
    manifest = write_dataset(root, 10, np.random.default_rng(11))
    return root, manifest


@pytest.fixture(scope="session")
def dataset4(tmp_path_factory):
    """Four-patch dataset for quick training calls."""
    root = tmp_path_factory.mktemp("patches4")
    manifest = write_dataset(root, 4, np.random.default_rng(12))
    return root, manifest


@pytest.fixture(scope="session")
def light_model():
    """One untrained light 3-channel network for shape and validation tests."""
    from firescan_unet.config import VARIANTS
    from firescan_unet.model import build_model

    return build_model(VARIANTS["light3"])
