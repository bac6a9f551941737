"""Two-stage nighttime image dehazing with structure/texture enhancement.

Stage 1 inverts the atmospheric scattering model with a region-adaptive
transmittance map and a spatially varying airlight field.  Stage 2 splits the
result into structure and texture layers by alternating minimization, lifts
the structure (gamma + multi-scale retinex) and sharpens the texture (LoG),
then fuses both phases.  A forward haze synthesizer and a metrics suite
(PSNR/SSIM/AG/IE/CIEDE2000) support self-contained evaluation.
"""

from .airlight import AirlightParams, estimate_airlight_map
from .config import ConfigError, PipelineConfig, load_config, parse_config, serialize_config
from .dehaze import invert_model, synthesize_haze
from .enhance import (
    EnhanceParams,
    MsrcrParams,
    enhance_structure,
    enhance_texture,
    gamma_correct,
    msrcr,
)
from .fusion import FusionParams, linear_fuse, nonlinear_fuse
from .imgcore import (
    CorruptImageError,
    ImageIOError,
    UnreadableFileError,
    UnsupportedFormatError,
    load_image,
    luminance,
    rgb_to_yuv,
    save_image,
    save_plane,
    yuv_to_rgb,
)
from .metrics import (
    MetricsReport,
    average_gradient,
    ciede2000,
    compute_metrics,
    information_entropy,
    psnr,
    region_ciede,
    srgb_to_lab,
    ssim,
)
from .pipeline import PipelineResult, StageError, run_pipeline, run_pipeline_detailed
from .star import StarDecomposition, StarParams, StarYuvResult, decompose, star_yuv
from .synth import (
    SCENE_PRESETS,
    HazeSpec,
    SynthScene,
    generate_scene,
    haze_preset,
    synthesize_scene,
)
from .transmittance import (
    BoundaryParams,
    CorrectionParams,
    DcpParams,
    TransmittanceMap,
    correct_transmittance,
    dark_channel,
    global_airlight,
    initial_transmittance,
)

__version__ = "0.1.0"

__all__ = [
    "AirlightParams",
    "BoundaryParams",
    "ConfigError",
    "CorrectionParams",
    "CorruptImageError",
    "DcpParams",
    "EnhanceParams",
    "FusionParams",
    "HazeSpec",
    "ImageIOError",
    "MetricsReport",
    "MsrcrParams",
    "PipelineConfig",
    "PipelineResult",
    "SCENE_PRESETS",
    "StageError",
    "StarDecomposition",
    "StarParams",
    "StarYuvResult",
    "SynthScene",
    "TransmittanceMap",
    "UnreadableFileError",
    "UnsupportedFormatError",
    "average_gradient",
    "ciede2000",
    "compute_metrics",
    "correct_transmittance",
    "dark_channel",
    "decompose",
    "enhance_structure",
    "enhance_texture",
    "estimate_airlight_map",
    "gamma_correct",
    "generate_scene",
    "global_airlight",
    "haze_preset",
    "information_entropy",
    "initial_transmittance",
    "invert_model",
    "linear_fuse",
    "load_config",
    "load_image",
    "luminance",
    "msrcr",
    "nonlinear_fuse",
    "parse_config",
    "psnr",
    "region_ciede",
    "rgb_to_yuv",
    "run_pipeline",
    "run_pipeline_detailed",
    "save_image",
    "save_plane",
    "serialize_config",
    "srgb_to_lab",
    "ssim",
    "star_yuv",
    "synthesize_haze",
    "synthesize_scene",
    "yuv_to_rgb",
]
