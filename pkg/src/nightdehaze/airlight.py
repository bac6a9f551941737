"""Spatially varying atmospheric light via two-pass Gaussian filtering in YUV.

Nighttime scenes have no single airlight value: lamps and sky glow produce a
smooth, spatially varying ambient field.  The estimate here converts to YUV,
blurs only the luma plane with a wide kernel (coarse illumination), converts
back to RGB, then blurs each channel again with a narrower kernel to refine,
clamping once at the end.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imgcore import YUV_TO_RGB_MATRIX, gaussian_filter, rgb_to_yuv


@dataclass
class AirlightParams:
    """Sigmas for the two passes.

    Unset sigmas default to scene scale: max(W, H)/16 for the luma pass and
    max(W, H)/32 for the refinement pass, resolved against the image at call
    time.  Atmospheric light varies at scene scale, not texture scale.
    """

    sigma_coarse: float | None = None
    sigma_fine: float | None = None

    def resolved(self, shape) -> tuple[float, float]:
        scale = float(max(shape[0], shape[1]))
        coarse = self.sigma_coarse if self.sigma_coarse is not None else scale / 16.0
        fine = self.sigma_fine if self.sigma_fine is not None else scale / 32.0
        if coarse <= 0 or fine <= 0:
            raise ValueError("airlight sigmas must be positive")
        return coarse, fine


def estimate_airlight_map(
    img: np.ndarray, params: AirlightParams | None = None, clamp: bool = True
) -> np.ndarray:
    """Estimate the (H, W, 3) atmospheric light field.

    Steps: RGB->YUV, Gaussian on Y only (sigma_coarse), YUV->RGB, Gaussian on
    each RGB channel (sigma_fine), clamp to [0, 1].  ``clamp=False`` skips the
    final clamp, which keeps the map an exactly linear function of the input
    (useful for analysis); the pipeline always clamps.
    """
    params = params or AirlightParams()
    sigma_coarse, sigma_fine = params.resolved(img.shape)
    yuv = rgb_to_yuv(img)
    yuv[:, :, 0] = gaussian_filter(yuv[:, :, 0], sigma_coarse)
    # unclamped inverse conversion; the single clamp happens after pass 2 so
    # the two-pass estimate stays linear up to that point
    rgb = yuv @ YUV_TO_RGB_MATRIX.T
    out = np.empty_like(rgb)
    for c in range(3):
        out[:, :, c] = gaussian_filter(rgb[:, :, c], sigma_fine)
    if clamp:
        out = np.clip(out, 0.0, 1.0)
    return out
