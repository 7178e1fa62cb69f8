import numpy as np
import pytest

from app.physics.emitter import gaussian_state, point_emitter
from app.physics.medium import kinematics_from_kinetic
from app.physics.radiation import make_detection_window, spectral_autocorrelation
from app.services.materials import get_material

NM = 1e-9
UM = 1e-6


@pytest.fixture(scope="session")
def silica():
    return get_material("fused_silica")


@pytest.fixture(scope="session")
def water():
    return get_material("water_const")


@pytest.fixture(scope="session")
def kin():
    return kinematics_from_kinetic(1e6)


@pytest.fixture(scope="session")
def window(silica, kin):
    """Default visible window: 400-700 nm, raised cosine, N = 256."""
    return make_detection_window(silica, kin, 400 * NM, 700 * NM)


@pytest.fixture(scope="session")
def small_window(silica, kin):
    return make_detection_window(silica, kin, 400 * NM, 700 * NM, n_points=64)


@pytest.fixture(scope="session")
def pdm_254(silica, kin, window):
    return spectral_autocorrelation(gaussian_state(254 * NM, kin), kin, silica, window)


@pytest.fixture(scope="session")
def pdm_1016(silica, kin, window):
    return spectral_autocorrelation(gaussian_state(1016 * NM, kin), kin, silica, window)


@pytest.fixture(scope="session")
def pdm_point(silica, kin, window):
    return spectral_autocorrelation(point_emitter(kin), kin, silica, window)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
