"""Image containers, color conversion, filtering, and file I/O.

Everything downstream works on plain numpy arrays in a single numeric
convention: a "plane" is a 2-D float64 array, an RGB image is an (H, W, 3)
float64 array with samples in [0, 1] (intermediate results such as log
ratios or gradients may leave that range).  8-bit style constants from the
classic dehazing literature are divided by 255 on the way in so that one
scale rules everywhere.

Color conversion uses a fixed truncated YUV matrix pair.  The two matrices
are rounded to two decimals and are therefore not exact inverses of each
other; the measured worst-case round-trip error over the full 8-bit RGB
cube is 0.0068 per channel, documented rather than "fixed".
"""

from __future__ import annotations

import os

import cv2
import numpy as np
from scipy import ndimage, signal

# Forward RGB -> YUV and inverse YUV -> RGB matrices (truncated to 2 decimals,
# kept verbatim; see module docstring for the round-trip consequence).
RGB_TO_YUV_MATRIX = np.array(
    [
        [0.30, 0.59, 0.11],
        [-0.15, -0.29, 0.44],
        [0.62, -0.52, -0.10],
    ]
)
YUV_TO_RGB_MATRIX = np.array(
    [
        [1.00, 0.00, 1.14],
        [1.00, -0.39, -0.58],
        [1.00, 2.03, 0.00],
    ]
)

# Kernels longer than this are applied through FFT convolution; the result is
# the same convolution up to float round-off, just cheaper for wide Gaussians.
_FFT_KERNEL_THRESHOLD = 129

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


class ImageIOError(Exception):
    """Base class for image read/write failures."""


class UnreadableFileError(ImageIOError):
    """The file does not exist or cannot be opened for reading."""


class UnsupportedFormatError(ImageIOError):
    """The file is readable but is neither PNG nor binary PPM (P6)."""


class CorruptImageError(ImageIOError):
    """The file looks like a supported format but fails to decode."""


def rgb_to_yuv(img: np.ndarray) -> np.ndarray:
    """Convert an (H, W, 3) RGB image to YUV with the fixed forward matrix.

    Y lands in [0, 1] for in-range RGB; U and V are signed.
    """
    return img @ RGB_TO_YUV_MATRIX.T


def yuv_to_rgb(yuv: np.ndarray) -> np.ndarray:
    """Convert an (H, W, 3) YUV image back to RGB and clamp to [0, 1]."""
    return np.clip(yuv @ YUV_TO_RGB_MATRIX.T, 0.0, 1.0)


def luminance(img: np.ndarray) -> np.ndarray:
    """Y channel of the forward conversion, as a plane."""
    return img @ RGB_TO_YUV_MATRIX[0]


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Sampled 1-D Gaussian, radius ceil(3*sigma), normalized to unit sum."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    radius = int(np.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def log_kernel(sigma: float) -> np.ndarray:
    """Sampled 2-D Laplacian-of-Gaussian, radius ceil(3*sigma).

    The sampled kernel is mean-corrected so its entries sum exactly to zero
    (a constant input must map to zero response).
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    radius = int(np.ceil(3.0 * sigma))
    ax = np.arange(-radius, radius + 1, dtype=np.float64)
    xx, yy = np.meshgrid(ax, ax)
    r2 = xx * xx + yy * yy
    s2 = sigma * sigma
    k = (r2 - 2.0 * s2) / (2.0 * np.pi * s2 * s2 * s2) * np.exp(-r2 / (2.0 * s2))
    return k - k.mean()


def _correlate1d_replicate(arr: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    if kernel.size <= _FFT_KERNEL_THRESHOLD:
        return ndimage.correlate1d(arr, kernel, axis=axis, mode="nearest")
    radius = kernel.size // 2
    pad = [(0, 0)] * arr.ndim
    pad[axis] = (radius, radius)
    padded = np.pad(arr, pad, mode="edge")
    shape = [1] * arr.ndim
    shape[axis] = kernel.size
    # symmetric kernel: convolution equals correlation
    return signal.fftconvolve(padded, kernel.reshape(shape), mode="valid", axes=axis)


def gaussian_filter(plane: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur with replicate edge padding.

    The kernel is the unit-sum sampled Gaussian of :func:`gaussian_kernel`,
    so constants are preserved and the output stays within the input's
    min/max range.
    """
    k = gaussian_kernel(sigma)
    out = _correlate1d_replicate(np.asarray(plane, dtype=np.float64), k, axis=0)
    return _correlate1d_replicate(out, k, axis=1)


def log_filter(plane: np.ndarray, sigma: float) -> np.ndarray:
    """Laplacian-of-Gaussian response with replicate edge padding."""
    k = log_kernel(sigma)
    arr = np.asarray(plane, dtype=np.float64)
    if k.shape[0] <= _FFT_KERNEL_THRESHOLD:
        return ndimage.correlate(arr, k, mode="nearest")
    radius = k.shape[0] // 2
    padded = np.pad(arr, radius, mode="edge")
    return signal.fftconvolve(padded, k, mode="valid")


def _scale_to_unit(raw: np.ndarray) -> np.ndarray:
    if raw.dtype == np.uint8:
        return raw.astype(np.float64) / 255.0
    if raw.dtype == np.uint16:
        return raw.astype(np.float64) / 65535.0
    raise CorruptImageError(f"unexpected sample type {raw.dtype}")


def load_image(path: str | os.PathLike) -> np.ndarray:
    """Read a PNG (8/16-bit, RGB/gray) or binary PPM into an (H, W, 3) float image.

    Samples are scaled to [0, 1].  Grayscale files are replicated across the
    three channels; an alpha channel, if present, is dropped.

    Raises:
        UnreadableFileError: missing file or OS-level read failure.
        UnsupportedFormatError: magic bytes are neither PNG nor P6.
        CorruptImageError: recognized format that fails to decode.
    """
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise UnreadableFileError(f"cannot read {path}: {exc}") from exc
    if not (data.startswith(PNG_SIGNATURE) or data.startswith(b"P6")):
        raise UnsupportedFormatError(f"{path}: not a PNG or binary PPM file")
    raw = cv2.imdecode(np.frombuffer(data, dtype=np.uint8), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise CorruptImageError(f"{path}: header or pixel data failed to decode")
    if raw.ndim == 2:
        plane = _scale_to_unit(raw)
        return np.dstack([plane, plane, plane])
    if raw.shape[2] == 4:
        raw = raw[:, :, :3]
    return _scale_to_unit(raw)[:, :, ::-1].copy()  # BGR -> RGB


def quantize_u8(values: np.ndarray) -> np.ndarray:
    """Map [0, 1] floats to 8-bit with round-half-up."""
    return np.floor(np.clip(values, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def save_image(img: np.ndarray, path: str | os.PathLike) -> None:
    """Write an (H, W, 3) [0, 1] image as an 8-bit PNG (round-half-up)."""
    bgr = quantize_u8(img)[:, :, ::-1]
    ok, buf = cv2.imencode(".png", bgr)
    if not ok:
        raise ImageIOError(f"PNG encoding failed for {path}")
    try:
        with open(path, "wb") as fh:
            fh.write(buf.tobytes())
    except OSError as exc:
        raise ImageIOError(f"cannot write {path}: {exc}") from exc


def save_plane(plane: np.ndarray, path: str | os.PathLike) -> None:
    """Write a [0, 1] plane as an 8-bit grayscale PNG (debug/sidecar output)."""
    ok, buf = cv2.imencode(".png", quantize_u8(plane))
    if not ok:
        raise ImageIOError(f"PNG encoding failed for {path}")
    try:
        with open(path, "wb") as fh:
            fh.write(buf.tobytes())
    except OSError as exc:
        raise ImageIOError(f"cannot write {path}: {exc}") from exc
