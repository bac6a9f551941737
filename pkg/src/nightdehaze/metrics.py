"""Image quality metrics: PSNR, SSIM, average gradient, entropy, CIEDE2000.

All image inputs follow the package convention of float arrays in [0, 1].
PSNR/SSIM are full-reference; average gradient and information entropy are
no-reference; CIEDE2000 operates on L*a*b* triples with sRGB/D65 conversion
helpers and a region-mean wrapper for color-patch comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .imgcore import gaussian_kernel, luminance, quantize_u8

SSIM_WINDOW_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
_MIN_SSIM_SIDE = 11

# sRGB (D65) linear RGB -> XYZ.
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_D65_WHITE = np.array([0.95047, 1.0, 1.08883])


@dataclass
class MetricsReport:
    """One image's scores; reference-based fields are None when no reference."""

    psnr: float | None = None
    ssim: float | None = None
    ag: float | None = None
    ie: float | None = None
    ciede2000: float | None = None


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB for [0, 1] images; inf if identical."""
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    mse = float(np.mean((np.asarray(a, float) - np.asarray(b, float)) ** 2))
    if mse == 0.0:
        return math.inf
    return -10.0 * math.log10(mse)


def _window_moments(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Gaussian-window local mean, restricted to fully covered positions."""
    out = ndimage.correlate1d(plane, kernel, axis=0, mode="nearest")
    out = ndimage.correlate1d(out, kernel, axis=1, mode="nearest")
    r = (kernel.size - 1) // 2
    return out[r:-r, r:-r]


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Single-scale SSIM on luminance with the standard 11x11 Gaussian window.

    Uses the usual constants (K1=0.01, K2=0.03) at dynamic range 1 and
    averages the index over window positions that fit entirely inside the
    image, so boundary padding never enters the score.
    """
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    x = luminance(a) if a.ndim == 3 else np.asarray(a, float)
    y = luminance(b) if b.ndim == 3 else np.asarray(b, float)
    if min(x.shape) < _MIN_SSIM_SIDE:
        raise ValueError(f"image sides must be >= {_MIN_SSIM_SIDE} for SSIM")

    kernel = gaussian_kernel(SSIM_WINDOW_SIGMA)
    c1 = SSIM_K1**2
    c2 = SSIM_K2**2
    mu_x = _window_moments(x, kernel)
    mu_y = _window_moments(y, kernel)
    var_x = _window_moments(x * x, kernel) - mu_x * mu_x
    var_y = _window_moments(y * y, kernel) - mu_y * mu_y
    cov = _window_moments(x * y, kernel) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def average_gradient(img: np.ndarray) -> float:
    """Mean gradient magnitude sqrt((dx^2 + dy^2) / 2) over the interior grid.

    Forward differences are taken where both neighbors exist, so an H x W
    image contributes (H-1) x (W-1) samples per channel.
    """
    arr = np.asarray(img, float)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.shape[0] < 2 or arr.shape[1] < 2:
        raise ValueError("image sides must be >= 2 for average gradient")
    dx = arr[:-1, 1:, :] - arr[:-1, :-1, :]
    dy = arr[1:, :-1, :] - arr[:-1, :-1, :]
    return float(np.mean(np.sqrt((dx * dx + dy * dy) / 2.0)))


def information_entropy(img: np.ndarray) -> float:
    """Shannon entropy (bits) of the 256-bin histogram of quantized luminance."""
    arr = np.asarray(img, float)
    if arr.size == 0:
        raise ValueError("empty image")
    plane = luminance(arr) if arr.ndim == 3 else arr
    levels = quantize_u8(plane)
    counts = np.bincount(levels.ravel(), minlength=256)
    p = counts[counts > 0] / levels.size
    return float(-np.sum(p * np.log2(p)))


def srgb_to_lab(rgb: np.ndarray) -> np.ndarray:
    """sRGB in [0, 1] -> CIE L*a*b* under D65, elementwise over trailing axis 3."""
    rgb = np.clip(np.asarray(rgb, float), 0.0, 1.0)
    linear = np.where(
        rgb <= 0.04045, rgb / 12.92, np.power((rgb + 0.055) / 1.055, 2.4)
    )
    xyz = linear @ _RGB_TO_XYZ.T / _D65_WHITE
    delta = 6.0 / 29.0
    f = np.where(
        xyz > delta**3, np.cbrt(xyz), xyz / (3.0 * delta**2) + 4.0 / 29.0
    )
    lab = np.empty_like(f)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def ciede2000(lab1, lab2) -> float:
    """CIEDE2000 color difference between two L*a*b* triples.

    Implements the complete formula: chroma-dependent a* rescaling, the
    lightness/chroma/hue weighting functions, and the blue-region rotation
    term.  Angles are handled in degrees as in the defining publication.
    """
    l1, a1, b1 = (float(v) for v in lab1)
    l2, a2, b2 = (float(v) for v in lab2)

    c1 = math.hypot(a1, b1)
    c2 = math.hypot(a2, b2)
    c_bar = 0.5 * (c1 + c2)
    g = 0.5 * (1.0 - math.sqrt(c_bar**7 / (c_bar**7 + 25.0**7)))
    a1p = (1.0 + g) * a1
    a2p = (1.0 + g) * a2
    c1p = math.hypot(a1p, b1)
    c2p = math.hypot(a2p, b2)

    def hue_deg(a, b):
        if a == 0.0 and b == 0.0:
            return 0.0
        return math.degrees(math.atan2(b, a)) % 360.0

    h1p = hue_deg(a1p, b1)
    h2p = hue_deg(a2p, b2)

    dl = l2 - l1
    dc = c2p - c1p
    if c1p * c2p == 0.0:
        dh_angle = 0.0
    else:
        diff = h2p - h1p
        if diff > 180.0:
            diff -= 360.0
        elif diff < -180.0:
            diff += 360.0
        dh_angle = diff
    dh = 2.0 * math.sqrt(c1p * c2p) * math.sin(math.radians(dh_angle) / 2.0)

    l_bar = 0.5 * (l1 + l2)
    cp_bar = 0.5 * (c1p + c2p)
    if c1p * c2p == 0.0:
        h_bar = h1p + h2p
    elif abs(h1p - h2p) <= 180.0:
        h_bar = 0.5 * (h1p + h2p)
    elif h1p + h2p < 360.0:
        h_bar = 0.5 * (h1p + h2p + 360.0)
    else:
        h_bar = 0.5 * (h1p + h2p - 360.0)

    t = (
        1.0
        - 0.17 * math.cos(math.radians(h_bar - 30.0))
        + 0.24 * math.cos(math.radians(2.0 * h_bar))
        + 0.32 * math.cos(math.radians(3.0 * h_bar + 6.0))
        - 0.20 * math.cos(math.radians(4.0 * h_bar - 63.0))
    )
    d_theta = 30.0 * math.exp(-(((h_bar - 275.0) / 25.0) ** 2))
    r_c = 2.0 * math.sqrt(cp_bar**7 / (cp_bar**7 + 25.0**7))
    s_l = 1.0 + 0.015 * (l_bar - 50.0) ** 2 / math.sqrt(20.0 + (l_bar - 50.0) ** 2)
    s_c = 1.0 + 0.045 * cp_bar
    s_h = 1.0 + 0.015 * cp_bar * t
    r_t = -math.sin(math.radians(2.0 * d_theta)) * r_c

    term_l = dl / s_l
    term_c = dc / s_c
    term_h = dh / s_h
    return math.sqrt(
        term_l**2 + term_c**2 + term_h**2 + r_t * term_c * term_h
    )


def region_ciede(
    img: np.ndarray,
    ref: np.ndarray,
    regions: list[tuple[int, int, int, int]],
) -> float:
    """Mean CIEDE2000 over rectangular patches, compared by mean Lab color.

    Each region is (top, left, height, width).  The mean L*a*b* of the patch
    is computed in both images and the per-region differences are averaged.
    """
    if img.shape != ref.shape:
        raise ValueError(f"image shapes differ: {img.shape} vs {ref.shape}")
    if not regions:
        raise ValueError("no regions given")
    h, w = img.shape[:2]
    diffs = []
    for top, left, height, width in regions:
        if height < 1 or width < 1 or top < 0 or left < 0:
            raise ValueError(f"degenerate region {(top, left, height, width)}")
        if top + height > h or left + width > w:
            raise ValueError(
                f"region {(top, left, height, width)} exceeds {h}x{w} image"
            )
        lab_a = srgb_to_lab(img[top : top + height, left : left + width])
        lab_b = srgb_to_lab(ref[top : top + height, left : left + width])
        diffs.append(
            ciede2000(lab_a.reshape(-1, 3).mean(axis=0), lab_b.reshape(-1, 3).mean(axis=0))
        )
    return float(np.mean(diffs))


def compute_metrics(
    img: np.ndarray,
    ref: np.ndarray | None = None,
    regions: list[tuple[int, int, int, int]] | None = None,
) -> MetricsReport:
    """All applicable metrics for one image, full-reference ones only with ref."""
    report = MetricsReport(ag=average_gradient(img), ie=information_entropy(img))
    if ref is not None:
        report.psnr = psnr(img, ref)
        report.ssim = ssim(img, ref)
        if regions:
            report.ciede2000 = region_ciede(img, ref, regions)
    return report
