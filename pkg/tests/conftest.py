import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from optomech.cli import DEFAULT_CONFIG, DEFAULT_DESK  # noqa: E402
from optomech.parameters import load_desk, load_parameters  # noqa: E402
from optomech.sde_oracle import desk_kernel  # noqa: E402


@pytest.fixture(scope="session")
def lab_params():
    """Laboratory parameter set shipped with the package."""
    return load_parameters(DEFAULT_CONFIG)


@pytest.fixture(scope="session")
def desk_config():
    """Scaled oracle parameter set shipped with the package."""
    return load_desk(DEFAULT_DESK)


@pytest.fixture(scope="session")
def desk_system(desk_config):
    """(K, N) of the scaled coupled system."""
    return desk_kernel(
        omega_m=desk_config.omega_m,
        gamma_m=desk_config.gamma_m,
        nbar=desk_config.nbar,
        kappa=(desk_config.kappa_a, desk_config.kappa_b),
        delta=(desk_config.delta_a, desk_config.delta_b),
        g_eff=(desk_config.g_a, desk_config.g_b),
    )


@pytest.fixture
def rng():
    """Seeded generator for test data."""
    return np.random.default_rng(20240611)


@pytest.fixture
def out_dir(tmp_path):
    """Temporary output directory."""
    path = tmp_path / "out"
    path.mkdir()
    return path


def tmsv_cm(r: float, nbar: float = 0.0) -> np.ndarray:
    """Two-mode squeezed thermal state, vacuum variance 1/2."""
    c = (2.0 * nbar + 1.0) * np.cosh(2.0 * r) / 2.0
    s = (2.0 * nbar + 1.0) * np.sinh(2.0 * r) / 2.0
    Z = np.diag([1.0, -1.0])
    return np.block([[c * np.eye(2), s * Z], [s * Z, c * np.eye(2)]])
