"""Recombination of the enhanced layers with the first-stage output."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class FusionParams:
    # Weight applied to the sum of the two fusion inputs; 0.5 averages them.
    scale: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.scale <= 1.0:
            raise ValueError("scale must lie in (0, 1]")


def nonlinear_fuse(structure: np.ndarray, texture: np.ndarray) -> np.ndarray:
    """Multiply the enhanced texture plane back onto the enhanced structure.

    The texture layer is a single plane acting on all three channels; the
    product is clamped to [0, 1] since sharpening can overshoot locally.
    """
    if structure.shape[:2] != texture.shape:
        raise ValueError(
            f"layer shapes differ: {structure.shape[:2]} vs {texture.shape}"
        )
    return np.clip(structure * texture[:, :, None], 0.0, 1.0)


def linear_fuse(
    dehazed: np.ndarray, recombined: np.ndarray, params: FusionParams | None = None
) -> np.ndarray:
    """Blend the model-inversion output with the enhanced recombination."""
    params = params or FusionParams()
    if dehazed.shape != recombined.shape:
        raise ValueError(f"image shapes differ: {dehazed.shape} vs {recombined.shape}")
    return np.clip(params.scale * (dehazed + recombined), 0.0, 1.0)
