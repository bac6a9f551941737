"""Inversion of the nighttime imaging model, plus the forward haze synthesizer.

The observation model is I = J*t + A*(1-t) with a per-pixel airlight field A
and transmittance t.  Inverting gives J = (I - A)/t + A.  The inverse path
requires a normalized transmittance map, whose range guarantee keeps the
division structurally safe; no epsilon guards are needed.
"""

from __future__ import annotations

import numpy as np

from .transmittance import STAGE_NORMALIZED, TransmittanceMap


def _check_shapes(img: np.ndarray, airlight: np.ndarray, t: np.ndarray) -> None:
    if img.shape != airlight.shape or img.shape[:2] != t.shape:
        raise ValueError(
            f"shape mismatch: image {img.shape}, airlight {airlight.shape}, "
            f"transmittance {t.shape}"
        )


def invert_model(
    img: np.ndarray, airlight: np.ndarray, tmap: TransmittanceMap
) -> np.ndarray:
    """Recover the scene radiance J = (I - A)/t + A, clamped to [0, 1]."""
    if tmap.stage != STAGE_NORMALIZED:
        raise ValueError(f"invert_model needs a normalized map, got {tmap.stage!r}")
    t = tmap.values
    _check_shapes(img, airlight, t)
    t3 = t[:, :, np.newaxis]
    return np.clip((img - airlight) / t3 + airlight, 0.0, 1.0)


def synthesize_haze(
    clean: np.ndarray, airlight: np.ndarray, t: np.ndarray
) -> np.ndarray:
    """Forward model I = J*t + A*(1-t).

    A per-pixel convex combination of scene and airlight, so the output is
    automatically in range for in-range inputs.  ``t`` may be a plane or a
    TransmittanceMap of any stage (synthesis allows the full (0, 1] range,
    and t = 0 as the pure-airlight limit).
    """
    if isinstance(t, TransmittanceMap):
        t = t.values
    _check_shapes(clean, airlight, t)
    t3 = t[:, :, np.newaxis]
    return clean * t3 + airlight * (1.0 - t3)
