import numpy as np
import pytest

from pdrnav.sim import GaitSpec, generate

SQUARE = np.array([[0.0, 0.0], [8.0, 0.0], [8.0, 8.0], [0.0, 8.0], [0.0, 0.0]])


@pytest.fixture(scope="session")
def clean_walk():
    """Noise-free two-leg square walk at 100 Hz."""
    spec = GaitSpec(route=SQUARE.copy(), sample_rate=100.0)
    log1, log2, truth = generate(spec)
    return spec, log1, log2, truth


@pytest.fixture(scope="session")
def noisy_walk():
    """Consumer-sensor-grade noisy square walk at 100 Hz."""
    spec = GaitSpec(
        route=SQUARE.copy(),
        sample_rate=100.0,
        sigma_a=0.02,
        sigma_g=0.002,
        bias_a=0.005,
        bias_g=3e-4,
        seed=7,
    )
    log1, log2, truth = generate(spec)
    return spec, log1, log2, truth


@pytest.fixture(scope="session")
def small_noisy_walk():
    """Shorter 50 Hz noisy walk used by the slower pipeline tests."""
    spec = GaitSpec(
        route=SQUARE.copy(),
        sample_rate=50.0,
        sigma_a=0.02,
        sigma_g=0.002,
        bias_a=0.005,
        bias_g=3e-4,
        seed=11,
        mount_yaw2=np.deg2rad(10.0),
    )
    log1, log2, truth = generate(spec)
    return spec, log1, log2, truth
