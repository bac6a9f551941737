"""End-to-end two-stage dehazing pipeline.

Stage 1 estimates a corrected transmittance map and a spatially varying
airlight, then inverts the scattering model.  Stage 2 splits the result into
structure and texture layers, enhances each, recombines them, and blends the
recombination with the stage-1 output.  The three documented ablation flags
replace individual phases with pass-throughs so their effect can be measured
in isolation.
"""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .airlight import estimate_airlight_map
from .config import PipelineConfig
from .dehaze import invert_model
from .enhance import enhance_structure, enhance_texture
from .fusion import linear_fuse, nonlinear_fuse
from .star import star_yuv
from .transmittance import (
    STAGE_NORMALIZED,
    TransmittanceMap,
    correct_transmittance,
    global_airlight,
    initial_transmittance,
)


# Floor applied to the uncorrected transmittance map in the skip_t_correction
# ablation: keeps the model inversion finite while preserving the aggressive
# amplification that distinguishes the variant from the corrected pipeline.
RAW_T_FLOOR = 1e-3


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage name for diagnostics."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineResult:
    output: np.ndarray
    stage_ms: dict[str, float] = field(default_factory=dict)
    intermediates: dict[str, np.ndarray] = field(default_factory=dict)


@contextmanager
def _stage(name: str, timings: dict[str, float]):
    start = time.perf_counter()
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc
    finally:
        timings[name] = timings.get(name, 0.0) + (time.perf_counter() - start) * 1e3


def _validate_input(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an HxWx3 image, got shape {img.shape}")
    if not np.isfinite(img).all():
        raise ValueError("non-finite samples in input image")
    return np.clip(img, 0.0, 1.0)


def run_pipeline_detailed(
    img: np.ndarray,
    cfg: PipelineConfig | None = None,
    collect_intermediates: bool = False,
) -> PipelineResult:
    """Full pipeline with per-stage wall-clock times and optional snapshots."""
    cfg = cfg or PipelineConfig()
    img = _validate_input(img)
    total_start = time.perf_counter()
    timings: dict[str, float] = {}
    inter: dict[str, np.ndarray] = {}

    need_stage1 = not cfg.skip_dehaze or collect_intermediates
    t_used: TransmittanceMap | None = None
    airlight_map = None
    if need_stage1:
        with _stage("transmittance", timings):
            a_global = global_airlight(img, cfg.dcp)
            t_initial = initial_transmittance(img, a_global, cfg.boundary)
            if cfg.skip_t_correction:
                floored = np.maximum(t_initial.values, RAW_T_FLOOR)
                t_used = TransmittanceMap(floored, STAGE_NORMALIZED)
            else:
                t_used = correct_transmittance(img, t_initial, cfg.correction)
        with _stage("airlight", timings):
            airlight_map = estimate_airlight_map(img, cfg.airlight)
        if collect_intermediates:
            inter["t_initial"] = t_initial.values
            inter["t_used"] = t_used.values
            inter["airlight_global"] = a_global
            inter["airlight_map"] = airlight_map

    with _stage("dehaze", timings):
        if cfg.skip_dehaze:
            dehazed = img.copy()
        else:
            dehazed = invert_model(img, airlight_map, t_used)
    if collect_intermediates:
        inter["dehazed"] = dehazed

    if cfg.skip_star:
        recombined = dehazed
    else:
        with _stage("decompose", timings):
            structure, texture, dec = star_yuv(dehazed, cfg.star)
        with _stage("enhance", timings):
            structure_e = enhance_structure(structure, cfg.enhance)
            texture_e = enhance_texture(texture, cfg.enhance)
            recombined = nonlinear_fuse(structure_e, texture_e)
        if collect_intermediates:
            inter["structure"] = structure
            inter["texture"] = texture
            inter["structure_enhanced"] = structure_e
            inter["texture_enhanced"] = texture_e
            inter["recombined"] = recombined
            inter["objective_trace"] = dec.objective_trace

    with _stage("fuse", timings):
        output = linear_fuse(dehazed, recombined, cfg.fusion)

    timings["total"] = (time.perf_counter() - total_start) * 1e3
    return PipelineResult(output=output, stage_ms=timings, intermediates=inter)


def run_pipeline(img: np.ndarray, cfg: PipelineConfig | None = None) -> np.ndarray:
    """Dehaze one image; convenience wrapper returning only the result."""
    return run_pipeline_detailed(img, cfg).output
