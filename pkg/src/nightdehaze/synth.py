"""Synthetic nighttime scenes and forward haze simulation.

Real nighttime haze datasets are large and licensed, so evaluation here runs
on procedurally generated street scenes: dark gradient sky, textured ground,
building blocks with lit windows, and lamp glows.  The forward model then
degrades a clean scene with a chosen transmittance field (constant or
radial-depth) and airlight field (constant or with a warm light-source bump),
producing (hazy, clean, t, A) quadruples with known ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .dehaze import synthesize_haze
from .imgcore import gaussian_filter


@dataclass
class HazeSpec:
    """Parameter ranges for the degradation; sampled per scene from an RNG."""

    t_mode: str = "radial"  # "constant" | "radial"
    t_constant: float = 0.5
    beta_range: tuple[float, float] = (0.8, 1.5)
    t_near: float = 0.7  # transmittance at the depth center (haze everywhere)
    t_floor: float = 0.2
    airlight_mode: str = "bump"  # "constant" | "bump"
    airlight_base: tuple[float, float, float] = (0.08, 0.09, 0.12)
    base_jitter: float = 0.2
    bump_amplitude_range: tuple[float, float] = (0.2, 0.38)
    bump_color: tuple[float, float, float] = (1.0, 0.85, 0.6)
    bump_sigma_frac: tuple[float, float] = (0.06, 0.12)
    noise_sigma: float = 0.0  # additive sensor noise on the hazy result

    def __post_init__(self):
        if self.t_mode not in ("constant", "radial"):
            raise ValueError(f"unknown t_mode {self.t_mode!r}")
        if self.airlight_mode not in ("constant", "bump"):
            raise ValueError(f"unknown airlight_mode {self.airlight_mode!r}")
        if not 0.0 < self.t_constant <= 1.0:
            raise ValueError("t_constant must be in (0, 1]")
        if not 0.0 <= self.t_floor < 1.0:
            raise ValueError("t_floor must be in [0, 1)")
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be >= 0")


#: Named generation recipes.  "street" is a dark road with isolated lamp
#: glows; "glow" is a dense, washed-out fog field around a broad source,
#: which stresses the transmittance-correction ablation.
SCENE_PRESETS: dict[str, dict[str, Any]] = {
    "street": {"noise_sigma": 0.01},
    "glow": {
        "noise_sigma": 0.015,
        "airlight_base": (0.55, 0.60, 0.68),
        "base_jitter": 0.08,
        "bump_amplitude_range": (0.08, 0.15),
        "bump_sigma_frac": (0.30, 0.50),
        "t_near": 0.18,
        "t_floor": 0.10,
    },
}


def haze_preset(name: str, **overrides: Any) -> HazeSpec:
    """Build a :class:`HazeSpec` from a named recipe, with overrides."""
    try:
        base = SCENE_PRESETS[name]
    except KeyError:
        raise ValueError(
            f"unknown preset {name!r}; choose from {sorted(SCENE_PRESETS)}"
        ) from None
    return HazeSpec(**{**base, **overrides})


@dataclass
class SynthScene:
    hazy: np.ndarray
    clean: np.ndarray
    transmittance: np.ndarray
    airlight: np.ndarray
    params: dict[str, Any] = field(default_factory=dict)


def _smooth_noise(shape: tuple[int, int], sigma: float, rng: np.random.Generator):
    noise = gaussian_filter(rng.standard_normal(shape), sigma)
    span = noise.max() - noise.min()
    if span == 0:
        return np.zeros(shape)
    return (noise - noise.min()) / span


def generate_scene(
    shape: tuple[int, int] = (256, 256), rng: np.random.Generator | None = None
) -> np.ndarray:
    """Procedural clean night scene: sky gradient, buildings, windows, lamps."""
    rng = rng or np.random.default_rng()
    h, w = shape
    img = np.zeros((h, w, 3))

    # Sky-to-ground vertical gradient, slightly blue at the top.
    rows = np.linspace(0.0, 1.0, h)[:, None]
    img[:, :, 0] = 0.06 + 0.26 * rows
    img[:, :, 1] = 0.07 + 0.27 * rows
    img[:, :, 2] = 0.09 + 0.27 * rows

    # Low-frequency ground texture on the bottom half.
    tex = _smooth_noise((h, w), max(h, w) / 24.0, rng)
    band = np.clip(rows - 0.5, 0.0, 0.5) * 2.0
    img *= 1.0 + 0.5 * band[:, :, None] * (tex[:, :, None] - 0.5)

    # Building blocks rising from the skyline with per-block albedo and tint.
    n_blocks = int(rng.integers(3, 7))
    for _ in range(n_blocks):
        bw = int(rng.integers(w // 10, w // 3))
        left = int(rng.integers(0, max(1, w - bw)))
        top = int(rng.integers(h // 5, (3 * h) // 5))
        albedo = rng.uniform(0.2, 0.55)
        tint = 1.0 + rng.uniform(-0.12, 0.12, size=3)
        facade = albedo * tint * (0.85 + 0.3 * tex[top:, left : left + bw, None])
        img[top:, left : left + bw] = facade

        # Warm lit windows on a rough grid.
        n_win = int(rng.integers(4, 12))
        for _ in range(n_win):
            wh = int(rng.integers(2, max(3, h // 40) + 2))
            ww = int(rng.integers(2, max(3, w // 40) + 2))
            wy = int(rng.integers(top, max(top + 1, h - wh)))
            wx = int(rng.integers(left, max(left + 1, left + bw - ww)))
            glow = rng.uniform(0.7, 1.0)
            img[wy : wy + wh, wx : wx + ww] = glow * np.array([1.0, 0.85, 0.55])

    # Street lamps: bright cores with a soft Gaussian halo.
    yy, xx = np.mgrid[0:h, 0:w].astype(float)
    n_lamps = int(rng.integers(2, 5))
    for _ in range(n_lamps):
        cy = rng.uniform(0.3 * h, 0.8 * h)
        cx = rng.uniform(0.1 * w, 0.9 * w)
        radius = rng.uniform(0.01, 0.025) * max(h, w)
        halo = np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2.0 * (3.0 * radius) ** 2))
        core = np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2.0 * radius**2))
        lamp = 0.35 * halo + 0.9 * core
        img += lamp[:, :, None] * np.array([1.0, 0.92, 0.7])

    return np.clip(img, 0.0, 1.0)


def make_transmittance(
    shape: tuple[int, int], spec: HazeSpec, rng: np.random.Generator
) -> tuple[np.ndarray, dict[str, Any]]:
    """Transmittance field per the spec mode, with its sampled parameters."""
    h, w = shape
    if spec.t_mode == "constant":
        return np.full(shape, spec.t_constant), {
            "mode": "constant",
            "value": spec.t_constant,
        }
    beta = float(rng.uniform(*spec.beta_range))
    cy = float(rng.uniform(0.2, 0.8) * h)
    cx = float(rng.uniform(0.2, 0.8) * w)
    yy, xx = np.mgrid[0:h, 0:w].astype(float)
    dist = np.sqrt((yy - cy) ** 2 + (xx - cx) ** 2) / float(np.hypot(h, w))
    t = np.clip(spec.t_near * np.exp(-beta * dist * 3.0), spec.t_floor, 1.0)
    return t, {
        "mode": "radial",
        "beta": beta,
        "center": [cy, cx],
        "t_near": spec.t_near,
    }


def make_airlight(
    shape: tuple[int, int], spec: HazeSpec, rng: np.random.Generator
) -> tuple[np.ndarray, dict[str, Any]]:
    """Airlight field per the spec mode, with its sampled parameters."""
    h, w = shape
    base = np.asarray(spec.airlight_base, dtype=float)
    params: dict[str, Any] = {"mode": spec.airlight_mode}
    if spec.airlight_mode == "constant":
        airlight = np.broadcast_to(base, (h, w, 3)).copy()
        params["base"] = base.tolist()
        return airlight, params

    jitter = float(rng.uniform(1.0 - spec.base_jitter, 1.0 + spec.base_jitter))
    base = base * jitter
    amp = float(rng.uniform(*spec.bump_amplitude_range))
    sigma = float(rng.uniform(*spec.bump_sigma_frac)) * min(h, w)
    cy = float(rng.uniform(0.2, 0.8) * h)
    cx = float(rng.uniform(0.2, 0.8) * w)
    yy, xx = np.mgrid[0:h, 0:w].astype(float)
    bump = np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2.0 * sigma**2))
    airlight = base[None, None, :] + amp * bump[:, :, None] * np.asarray(spec.bump_color)
    params.update(
        {
            "base": base.tolist(),
            "amplitude": amp,
            "sigma": sigma,
            "center": [cy, cx],
        }
    )
    return np.clip(airlight, 0.0, 1.0), params


def synthesize_scene(
    clean: np.ndarray, spec: HazeSpec, rng: np.random.Generator
) -> SynthScene:
    """Degrade one clean image into a hazy scene with recorded ground truth."""
    shape = clean.shape[:2]
    t, t_params = make_transmittance(shape, spec, rng)
    airlight, a_params = make_airlight(shape, spec, rng)
    hazy = synthesize_haze(clean, airlight, t)
    if spec.noise_sigma > 0.0:
        hazy = np.clip(
            hazy + spec.noise_sigma * rng.standard_normal(hazy.shape), 0.0, 1.0
        )
    return SynthScene(
        hazy=hazy,
        clean=np.asarray(clean, dtype=np.float64),
        transmittance=t,
        airlight=airlight,
        params={"transmittance": t_params, "airlight": a_params},
    )
