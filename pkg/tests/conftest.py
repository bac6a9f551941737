"""Shared fixtures: seeded generators and small natural-statistics images."""

import numpy as np
import pytest


def textured_plane(seed: int, shape=(64, 64)) -> np.ndarray:
    """Smooth illumination times fine texture, strictly positive, <= 1."""
    rng = np.random.default_rng(seed)
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w]
    smooth = 0.35 + 0.45 * np.sin(xx / w * np.pi * (1 + rng.random())) * np.cos(
        yy / h * np.pi * (1 + rng.random())
    )
    texture = 1.0 + 0.18 * np.sin(xx * (0.9 + rng.random())) * np.cos(
        yy * (0.7 + rng.random())
    )
    noise = 0.02 * rng.standard_normal(shape)
    return np.clip(np.abs(smooth) * texture + noise, 0.02, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def rgb_image(rng):
    return rng.random((24, 31, 3))


@pytest.fixture
def night_scene():
    from nightdehaze.synth import HazeSpec, generate_scene, synthesize_scene

    r = np.random.default_rng(555)
    clean = generate_scene((96, 128), r)
    return synthesize_scene(clean, HazeSpec(noise_sigma=0.01), r)
