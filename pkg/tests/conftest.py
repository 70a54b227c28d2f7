import os

import numpy as np
import pytest

os.environ.setdefault("QT_QPA_PLATFORM", "offscreen")

from PySide6.QtWidgets import QApplication

from spheremax.core.bilop import Gaussian
from spheremax.harness.fitting import FitReport
from spheremax.utils.parallel import set_worker_limit


@pytest.fixture(scope="session")
def qapp():
    """Create a QApplication instance that can be reused for all tests."""
    app = QApplication.instance()
    if app is None:
        app = QApplication([])
    yield app


@pytest.fixture(autouse=True)
def single_worker():
    set_worker_limit(1)
    yield
    set_worker_limit(1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def gaussian_pair():
    """Two overlapping Gaussians centred in a box of side 16."""
    return Gaussian((8.0,), 1.0), Gaussian((8.25,), 1.0)


@pytest.fixture
def sample_fit():
    return FitReport(-1.5, 2.0, 0.999, [(5.0, -5.5), (6.0, -7.0), (7.0, -8.5)], "abc")


@pytest.fixture
def temp_config_dir(tmp_path):
    """Create a temporary config directory for testing."""
    config_dir = tmp_path / ".config" / "spheremax"
    config_dir.mkdir(parents=True)
    return config_dir
