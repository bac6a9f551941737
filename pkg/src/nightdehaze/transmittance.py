"""Transmittance estimation and region-adaptive correction.

The initial map comes from a boundary-constrained estimate anchored on the
global atmospheric light (dark-channel bright-pixel selection).  Two piecewise
compensations follow: one that deepens the dehazing of bright regions, one
that protects light-source pixels from over-amplification.  Their sum is
min-max normalized into a fixed working range so the later model inversion
never divides by anything close to zero.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

STAGE_INITIAL = "initial"
STAGE_COMPENSATED = "compensated"
STAGE_NORMALIZED = "normalized"


@dataclass
class DcpParams:
    """Dark-channel patch size and the bright-pixel fraction used for airlight."""

    patch_radius: int = 7
    bright_fraction: float = 0.001

    def __post_init__(self):
        if self.patch_radius < 1:
            raise ValueError("patch_radius must be >= 1")
        if not 0.0 < self.bright_fraction <= 0.05:
            raise ValueError("bright_fraction must be in (0, 0.05]")


@dataclass
class BoundaryParams:
    """Per-channel radiance bounds for the boundary-constrained estimate.

    The classic 8-bit values (20 and 300) are stored divided by 255; the
    upper bound deliberately exceeds 1.
    """

    lower: float = 20.0 / 255.0
    upper: float = 300.0 / 255.0

    def __post_init__(self):
        if not 0.0 <= self.lower < self.upper:
            raise ValueError("bounds must satisfy 0 <= lower < upper")


@dataclass
class CorrectionParams:
    """Thresholds for the piecewise compensations and the normalized range."""

    bright_threshold: float = 0.3
    bright_offset: float = 0.25
    source_threshold: float = 0.4
    source_low: float = 0.05
    source_high: float = 0.1
    t_min: float = 0.2
    t_max: float = 0.85

    def __post_init__(self):
        if not 0.0 < self.bright_threshold < 1.0:
            raise ValueError("bright_threshold must be in (0, 1)")
        if not 0.0 < self.source_threshold < 1.0:
            raise ValueError("source_threshold must be in (0, 1)")
        if not 0.0 < self.t_min < self.t_max <= 1.0:
            raise ValueError("need 0 < t_min < t_max <= 1")


@dataclass
class TransmittanceMap:
    """A transmittance plane tagged with its processing stage."""

    values: np.ndarray
    stage: str = STAGE_INITIAL


def dark_channel(img: np.ndarray, params: DcpParams | None = None) -> np.ndarray:
    """Per-pixel min over channels and the (2r+1)^2 neighborhood (replicate edges)."""
    params = params or DcpParams()
    per_pixel = img.min(axis=2)
    size = 2 * params.patch_radius + 1
    return ndimage.minimum_filter(per_pixel, size=size, mode="nearest")


def global_airlight(img: np.ndarray, params: DcpParams | None = None) -> np.ndarray:
    """Global atmospheric light as an RGB triple.

    Takes the top ``bright_fraction`` of dark-channel pixels and returns the
    RGB of the candidate whose channel sum is largest in the original image.
    Ties break deterministically: dark value descending, then pixel index.
    """
    params = params or DcpParams()
    dark = dark_channel(img, params).ravel()
    n_top = max(1, int(np.ceil(dark.size * params.bright_fraction)))
    order = np.argsort(-dark, kind="stable")
    candidates = order[:n_top]
    sums = img.reshape(-1, 3).sum(axis=1)
    best = candidates[np.argmax(sums[candidates])]
    return img.reshape(-1, 3)[best].copy()


def initial_transmittance(
    img: np.ndarray,
    airlight: np.ndarray,
    bounds: BoundaryParams | None = None,
) -> TransmittanceMap:
    """Boundary-constrained transmittance estimate.

    Per pixel: the channel-wise max of the two bound ratios, minimized over
    channels, clamped to [0, 1].  A channel of the airlight that coincides
    with a bound would zero a denominator; it is nudged 1e-6 toward the
    interior with a warning.
    """
    bounds = bounds or BoundaryParams()
    a = np.asarray(airlight, dtype=np.float64).copy()
    at_lower = a == bounds.lower
    at_upper = a == bounds.upper
    if at_lower.any() or at_upper.any():
        warnings.warn(
            "airlight channel coincides with a radiance bound; perturbing by 1e-6",
            stacklevel=2,
        )
        a[at_lower] += 1e-6
        a[at_upper] -= 1e-6
    diff = a - img
    ratio_low = diff / (a - bounds.lower)
    ratio_high = diff / (a - bounds.upper)
    t = np.clip(np.maximum(ratio_low, ratio_high).min(axis=2), 0.0, 1.0)
    return TransmittanceMap(values=t, stage=STAGE_INITIAL)


def bright_region_compensation(
    tmap: TransmittanceMap, cp: CorrectionParams | None = None
) -> np.ndarray:
    """Piecewise bright-region compensation of the initial map.

    Below the threshold the value collapses to 0, at the threshold it is kept,
    above it the offset is subtracted.  The result may go negative; the later
    normalization absorbs that, so no clamp happens here.
    """
    cp = cp or CorrectionParams()
    if tmap.stage != STAGE_INITIAL:
        raise ValueError(f"expected an initial-stage map, got {tmap.stage!r}")
    t = tmap.values
    thr = cp.bright_threshold
    out = np.where(t < thr, 0.0, t - cp.bright_offset)
    return np.where(t == thr, thr, out)


def light_source_compensation(
    img: np.ndarray, cp: CorrectionParams | None = None
) -> np.ndarray:
    """Light-source compensation keyed on the RGB channel product.

    Colored light sources push the product above the threshold and receive the
    higher floor; everything else gets the lower one.  The exact-equality
    branch keeps the threshold value itself.
    """
    cp = cp or CorrectionParams()
    product = img[:, :, 0] * img[:, :, 1] * img[:, :, 2]
    thr = cp.source_threshold
    out = np.where(product < thr, cp.source_low, cp.source_high)
    return np.where(product == thr, thr, out)


def normalize_transmittance(
    t_bright: np.ndarray,
    t_source: np.ndarray,
    cp: CorrectionParams | None = None,
) -> TransmittanceMap:
    """Sum the two compensated planes and min-max rescale into [t_min, t_max].

    The rescale is computed in convex-combination form so the plane's min and
    max land exactly on t_min and t_max.  A constant input (degenerate range)
    maps to the midpoint.
    """
    cp = cp or CorrectionParams()
    if t_bright.shape != t_source.shape:
        raise ValueError(
            f"plane shapes differ: {t_bright.shape} vs {t_source.shape}"
        )
    combined = t_bright + t_source
    lo = combined.min()
    hi = combined.max()
    if hi == lo:
        values = np.full_like(combined, 0.5 * (cp.t_min + cp.t_max))
    else:
        u = (combined - lo) / (hi - lo)
        values = np.clip(cp.t_min * (1.0 - u) + cp.t_max * u, cp.t_min, cp.t_max)
    return TransmittanceMap(values=values, stage=STAGE_NORMALIZED)


def correct_transmittance(
    img: np.ndarray,
    tmap: TransmittanceMap,
    cp: CorrectionParams | None = None,
) -> TransmittanceMap:
    """Full correction chain: both compensations, then normalization."""
    cp = cp or CorrectionParams()
    t_bright = bright_region_compensation(tmap, cp)
    t_source = light_source_compensation(img, cp)
    return normalize_transmittance(t_bright, t_source, cp)
