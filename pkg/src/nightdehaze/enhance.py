"""Brightness and detail enhancement for the two decomposition layers.

The structure layer goes through gamma correction followed by multi-scale
retinex with color restoration (MSRCR), which lifts dark regions and evens
out color casts.  The texture layer is sharpened by subtracting a scaled
Laplacian-of-Gaussian response, i.e. unsharp masking in the second-derivative
sense.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .imgcore import gaussian_filter, log_filter

_EPS = 1e-6


@dataclass
class MsrcrParams:
    """Multi-scale retinex with color restoration.

    ``scales`` are the Gaussian surround sigmas.  ``restore_alpha`` /
    ``restore_beta`` shape the color-restoration factor; ``gain`` and
    ``offset`` are the classic output affine (offset on the 0-255 scale).
    The raw response is mapped to [0, 1] per channel by clipping at the
    ``rescale_lo`` / ``rescale_hi`` percentiles.
    """

    scales: tuple[float, ...] = (15.0, 80.0, 250.0)
    gain: float = 192.0
    offset: float = -30.0
    restore_alpha: float = 125.0
    restore_beta: float = 46.0
    rescale_lo: float = 1.0
    rescale_hi: float = 99.0

    def __post_init__(self):
        if not self.scales or any(s <= 0 for s in self.scales):
            raise ValueError("scales must be positive")
        if any(a >= b for a, b in zip(self.scales, self.scales[1:])):
            raise ValueError("scales must be strictly ascending")
        if self.gain <= 0:
            raise ValueError("gain must be positive")
        if not 0.0 <= self.rescale_lo < self.rescale_hi <= 100.0:
            raise ValueError("percentile bounds must satisfy 0 <= lo < hi <= 100")


@dataclass
class EnhanceParams:
    gamma: float = 0.4
    log_sigma: float = 0.5
    sharpen_amount: float = 1.0
    texture_ceiling: float = 2.0
    msrcr: MsrcrParams = field(default_factory=MsrcrParams)

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1): the exponent brightens")
        if self.log_sigma <= 0:
            raise ValueError("log_sigma must be positive")


def gamma_correct(img: np.ndarray, gamma: float = 0.4) -> np.ndarray:
    """Power-law brightening; gamma < 1 lifts shadows on [0, 1] data."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return np.power(np.clip(img, 0.0, 1.0), gamma)


def msrcr(img: np.ndarray, params: MsrcrParams | None = None) -> np.ndarray:
    """Multi-scale retinex with color restoration on an RGB image in [0, 1].

    Per channel, the retinex response is the mean over scales of
    log(S + eps) - log(blur(S) + eps); the color restoration factor rescales
    each channel by the log of its share of the channel sum.  The affine
    gain/offset follows the standard formulation, and each output channel is
    stretched to [0, 1] between its low/high percentiles so the result is
    display-ready.  Channels that come out flat map to mid-gray.
    """
    params = params or MsrcrParams()
    img = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)

    retinex = np.zeros_like(img)
    for sigma in params.scales:
        for c in range(3):
            blurred = gaussian_filter(img[:, :, c], sigma)
            retinex[:, :, c] += np.log(img[:, :, c] + _EPS) - np.log(blurred + _EPS)
    retinex /= len(params.scales)

    channel_sum = img.sum(axis=2)
    restore = params.restore_beta * (
        np.log(params.restore_alpha * img + _EPS)
        - np.log(channel_sum + _EPS)[:, :, None]
    )

    out = params.gain * (restore * retinex + params.offset / 255.0)

    for c in range(3):
        lo, hi = np.percentile(out[:, :, c], [params.rescale_lo, params.rescale_hi])
        if hi - lo <= _EPS:
            out[:, :, c] = 0.5
        else:
            out[:, :, c] = np.clip((out[:, :, c] - lo) / (hi - lo), 0.0, 1.0)
    return out


def enhance_structure(structure: np.ndarray, params: EnhanceParams | None = None) -> np.ndarray:
    """Gamma-brighten then retinex-balance the structure image."""
    params = params or EnhanceParams()
    return msrcr(gamma_correct(structure, params.gamma), params.msrcr)


def enhance_texture(texture: np.ndarray, params: EnhanceParams | None = None) -> np.ndarray:
    """Sharpen the texture plane by subtracting its scaled LoG response.

    The LoG kernel sums to zero, so flat regions pass through unchanged; the
    output is clamped to [0, ceiling] because the plane is a multiplicative
    layer and moderate overshoot is useful while sign flips are not.
    """
    params = params or EnhanceParams()
    response = log_filter(texture, params.log_sigma)
    return np.clip(
        texture - params.sharpen_amount * response, 0.0, params.texture_ceiling
    )
