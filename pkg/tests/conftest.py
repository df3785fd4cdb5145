import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wgdist.cli import bundled_dataset  # noqa: E402


@pytest.fixture(scope="session")
def air_conditioning():
    return bundled_dataset("air-conditioning")


@pytest.fixture(scope="session")
def carbon_fibre():
    return bundled_dataset("carbon-fibre")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
