"""Batch command-line front end.

Subcommands:

* ``dehaze`` — run the full pipeline (or a configured ablation) over a file
  or directory, writing restored PNGs plus a JSON/CSV run report and figures.
* ``synth`` — degrade clean images (or procedurally generated night scenes)
  into hazy/clean/t/A quadruples with a JSON manifest.
* ``metrics`` — score (output, reference) pairs from a manifest into a CSV.
* ``ablate`` — run the three ablation variants next to the full model and
  emit a comparison CSV.

Exit codes: 0 success, 1 partial failure (some inputs failed), 2 bad
configuration or arguments.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .config import ConfigError, PipelineConfig, load_config, serialize_config
from .imgcore import ImageIOError, load_image, save_image, save_plane
from .metrics import compute_metrics
from .pipeline import PipelineResult, StageError, run_pipeline_detailed
from .report import (
    METRIC_COLUMNS,
    ImageRecord,
    RunReport,
    metrics_row,
    save_ablation_figure,
    save_metrics_figure,
    save_montage_figure,
    save_timing_figure,
    write_csv_with_summary,
    write_report_json,
)
from .synth import SCENE_PRESETS, HazeSpec, generate_scene, haze_preset, synthesize_scene

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2

IMAGE_SUFFIXES = (".png", ".ppm")

#: Ablation variants in report order: label -> config override.
ABLATION_VARIANTS: dict[str, dict[str, bool]] = {
    "full": {},
    "wo_t": {"skip_t_correction": True},
    "wo_dehaze": {"skip_dehaze": True},
    "wo_star": {"skip_star": True},
}

# Debug-dump layout: plane intermediates with their display divisor, and the
# RGB intermediates saved as-is.  Texture layers live around 1.0 and may
# legitimately reach 2.0, hence the halving for an 8-bit grayscale preview.
_DEBUG_PLANES = {"t_initial": 1.0, "t_used": 1.0, "texture": 2.0, "texture_enhanced": 2.0}
_DEBUG_IMAGES = ("airlight_map", "dehazed", "structure", "structure_enhanced", "recombined")


def _discover_images(path: Path) -> list[Path]:
    """A file as-is, or the sorted PNG/PPM members of a directory."""
    if path.is_file():
        return [path]
    if path.is_dir():
        return sorted(
            p for p in path.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES
        )
    raise FileNotFoundError(f"input path does not exist: {path}")


def _resolve_config(args: argparse.Namespace) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    try:
        if getattr(args, "threads", None):
            cfg = dataclasses.replace(cfg, threads=args.threads)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if getattr(args, "debug_dump", False):
        cfg = dataclasses.replace(cfg, debug_dump=True)
    return cfg


def _map_maybe_parallel(fn: Callable, items: Sequence, threads: int) -> list:
    """Order-preserving map, threaded when asked; results stay input-ordered."""
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _jsonable(value: Any) -> Any:
    """Recursively coerce numpy scalars/arrays and tuples for json.dump."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def _dump_debug(result: PipelineResult, debug_dir: Path) -> None:
    debug_dir.mkdir(parents=True, exist_ok=True)
    inter = result.intermediates
    for key, divisor in _DEBUG_PLANES.items():
        if key in inter:
            save_plane(np.clip(inter[key] / divisor, 0.0, 1.0), debug_dir / f"{key}.png")
    for key in _DEBUG_IMAGES:
        if key in inter:
            save_image(np.clip(inter[key], 0.0, 1.0), debug_dir / f"{key}.png")
    extras = {}
    if "airlight_global" in inter:
        extras["airlight_global"] = _jsonable(inter["airlight_global"])
    if "objective_trace" in inter:
        extras["objective_trace"] = _jsonable(inter["objective_trace"])
    extras["stage_ms"] = _jsonable(result.stage_ms)
    (debug_dir / "debug.json").write_text(json.dumps(extras, indent=2, sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# dehaze
# --------------------------------------------------------------------------


def cmd_dehaze(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    inputs = _discover_images(Path(args.input))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not inputs:
        print(f"warning: no PNG/PPM images under {args.input}", file=sys.stderr)

    def work(path: Path) -> tuple[ImageRecord, tuple | None]:
        try:
            img = load_image(path)
            result = run_pipeline_detailed(img, cfg, collect_intermediates=cfg.debug_dump)
            save_image(result.output, out_dir / f"{path.stem}.png")
            if cfg.debug_dump:
                _dump_debug(result, out_dir / f"{path.stem}_debug")
            record = ImageRecord(
                name=path.name,
                metrics=compute_metrics(result.output),
                stage_ms=result.stage_ms,
            )
            return record, (path.stem, img, result.output)
        except (ImageIOError, StageError, ValueError, OSError) as exc:
            print(f"error: {path.name}: {exc}", file=sys.stderr)
            return ImageRecord(name=path.name, status="failed", error=str(exc)), None

    results = _map_maybe_parallel(work, inputs, cfg.threads)
    report = RunReport(
        command="dehaze",
        version=__version__,
        config_text=serialize_config(cfg),
        images=[rec for rec, _ in results],
    )
    write_report_json(report, out_dir / "report.json")
    rows = []
    for rec in report.images:
        row = metrics_row(rec.name, rec.status, rec.metrics)
        row["total_ms"] = rec.stage_ms.get("total")
        rows.append(row)
    write_csv_with_summary(
        out_dir / "report.csv",
        ("name", "status", *METRIC_COLUMNS, "total_ms"),
        rows,
        mean_over=(*METRIC_COLUMNS, "total_ms"),
    )
    if not args.no_figures:
        save_timing_figure(report, out_dir / "report_timing.png")
        pairs = [pair for _, pair in results if pair is not None]
        save_montage_figure(pairs, out_dir / "report_montage.png")
    return EXIT_PARTIAL if report.failed else EXIT_OK


# --------------------------------------------------------------------------
# synth
# --------------------------------------------------------------------------


def _parse_size(text: str) -> tuple[int, int]:
    """``WIDTHxHEIGHT`` -> (height, width)."""
    try:
        w_str, h_str = text.lower().split("x")
        w, h = int(w_str), int(h_str)
    except ValueError:
        raise argparse.ArgumentTypeError(f"size must look like 640x480, got {text!r}")
    if w < 16 or h < 16:
        raise argparse.ArgumentTypeError("size must be at least 16x16")
    return (h, w)


def _parse_rgb(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected r,g,b — got {text!r}")
    try:
        r, g, b = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric channel in {text!r}")
    return (r, g, b)


def _spec_from_args(args: argparse.Namespace) -> HazeSpec:
    overrides = {
        name: getattr(args, name)
        for name in (
            "t_mode",
            "t_constant",
            "t_near",
            "t_floor",
            "airlight_mode",
            "airlight_base",
            "base_jitter",
            "noise_sigma",
        )
        if getattr(args, name) is not None
    }
    if args.preset:
        return haze_preset(args.preset, **overrides)
    return HazeSpec(**overrides)


def cmd_synth(args: argparse.Namespace) -> int:
    if (args.clean is None) == (args.generate is None):
        print("error: give a clean-image directory or --generate, not both", file=sys.stderr)
        return EXIT_CONFIG
    try:
        spec = _spec_from_args(args)
    except ValueError as exc:
        print(f"error: bad haze parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.generate is not None:
        names = [f"scene_{i:03d}" for i in range(args.generate)]
        sources: list[Path | None] = [None] * args.generate
    else:
        inputs = _discover_images(Path(args.clean))
        if not inputs:
            print(f"warning: no PNG/PPM images under {args.clean}", file=sys.stderr)
        names = [p.stem for p in inputs]
        sources = list(inputs)

    children = np.random.SeedSequence(args.seed).spawn(len(names))
    entries = []
    failed = 0
    montage = []
    for name, source, child in zip(names, sources, children):
        rng = np.random.default_rng(child)
        entry: dict[str, Any] = {"name": name, "status": "ok", "error": None}
        try:
            if source is None:
                clean = generate_scene(args.size, rng)
            else:
                clean = load_image(source)
            scene = synthesize_scene(clean, spec, rng)
            files = {
                "clean": f"{name}_clean.png",
                "hazy": f"{name}_hazy.png",
                "transmittance": f"{name}_t.png",
                "airlight": f"{name}_A.png",
            }
            save_image(scene.clean, out_dir / files["clean"])
            save_image(scene.hazy, out_dir / files["hazy"])
            save_plane(scene.transmittance, out_dir / files["transmittance"])
            save_image(scene.airlight, out_dir / files["airlight"])
            entry.update(files)
            entry["params"] = _jsonable(scene.params)
            if len(montage) < 8:
                montage.append((name, scene.clean, scene.hazy))
        except (ImageIOError, ValueError, OSError) as exc:
            print(f"error: {name}: {exc}", file=sys.stderr)
            entry["status"] = "failed"
            entry["error"] = str(exc)
            failed += 1
        entries.append(entry)

    manifest = {
        "command": "synth",
        "version": __version__,
        "seed": args.seed,
        "spec": _jsonable(dataclasses.asdict(spec)),
        "entries": entries,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )
    if not args.no_figures:
        save_montage_figure(
            montage, out_dir / "synth_montage.png", labels=("clean", "hazy")
        )
    return EXIT_PARTIAL if failed else EXIT_OK


# --------------------------------------------------------------------------
# metrics
# --------------------------------------------------------------------------


def _load_pairs(manifest_path: Path) -> list[dict[str, Any]]:
    """Normalize a pairs manifest to [{name, output, reference|None}].

    Accepted shapes: a bare JSON list of pair objects, ``{"pairs": [...]}``,
    or a ``synth`` manifest (whose hazy/clean files become the pairs).
    """
    data = json.loads(manifest_path.read_text())
    if isinstance(data, dict) and "entries" in data:
        pairs = [
            {"name": e["name"], "output": e.get("hazy"), "reference": e.get("clean")}
            for e in data["entries"]
            if e.get("status", "ok") == "ok"
        ]
    elif isinstance(data, dict) and "pairs" in data:
        pairs = list(data["pairs"])
    elif isinstance(data, list):
        pairs = list(data)
    else:
        raise ValueError("manifest must be a list, {'pairs': ...} or a synth manifest")
    out = []
    for i, pair in enumerate(pairs):
        if not isinstance(pair, dict) or "output" not in pair:
            raise ValueError(f"pair {i} lacks an 'output' field")
        out.append(
            {
                "name": pair.get("name") or Path(pair["output"]).stem,
                "output": pair["output"],
                "reference": pair.get("reference"),
            }
        )
    return out


def _load_regions(path: Path) -> list[tuple[int, int, int, int]]:
    data = json.loads(path.read_text())
    regions = []
    for i, item in enumerate(data):
        if isinstance(item, dict):
            item = [item["top"], item["left"], item["height"], item["width"]]
        if len(item) != 4:
            raise ValueError(f"region {i} must have 4 entries (top,left,height,width)")
        regions.append(tuple(int(v) for v in item))
    return regions


def cmd_metrics(args: argparse.Namespace) -> int:
    manifest_path = Path(args.manifest)
    try:
        pairs = _load_pairs(manifest_path)
        regions = _load_regions(Path(args.regions)) if args.regions else None
    except (ValueError, KeyError, json.JSONDecodeError, OSError) as exc:
        print(f"error: bad manifest: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    base = manifest_path.parent
    rows = []
    failed = 0
    for pair in pairs:
        try:
            out_img = load_image(base / pair["output"])
            ref_img = (
                load_image(base / pair["reference"])
                if pair["reference"] is not None
                else None
            )
            report = compute_metrics(out_img, ref_img, regions)
            rows.append(metrics_row(pair["name"], "ok", report))
        except (ImageIOError, ValueError, OSError) as exc:
            print(f"error: {pair['name']}: {exc}", file=sys.stderr)
            rows.append(metrics_row(pair["name"], "failed", None))
            failed += 1

    columns = ["psnr", "ssim", "ag", "ie"]
    if regions:
        columns.append("ciede2000")
    out_csv = Path(args.out)
    if out_csv.parent != Path(""):
        out_csv.parent.mkdir(parents=True, exist_ok=True)
    write_csv_with_summary(
        out_csv, ("name", "status", *columns), rows, mean_over=columns
    )
    if not args.no_figures:
        save_metrics_figure(rows, out_csv.with_suffix(".png"), title=out_csv.stem)
    return EXIT_PARTIAL if failed else EXIT_OK


# --------------------------------------------------------------------------
# ablate
# --------------------------------------------------------------------------


def cmd_ablate(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    inputs = _discover_images(Path(args.input))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not inputs:
        print(f"warning: no PNG/PPM images under {args.input}", file=sys.stderr)
    ref_dir = Path(args.reference) if args.reference else None

    def work(path: Path) -> list[dict[str, Any]]:
        rows = []
        try:
            img = load_image(path)
            ref = None
            if ref_dir is not None and (ref_dir / path.name).exists():
                ref = load_image(ref_dir / path.name)
        except (ImageIOError, ValueError, OSError) as exc:
            print(f"error: {path.name}: {exc}", file=sys.stderr)
            return [
                {"name": path.name, "variant": v, "status": "failed"}
                for v in ABLATION_VARIANTS
            ]
        for variant, flags in ABLATION_VARIANTS.items():
            try:
                result = run_pipeline_detailed(img, dataclasses.replace(cfg, **flags))
                save_image(result.output, out_dir / f"{path.stem}_{variant}.png")
                row = metrics_row(path.name, "ok", compute_metrics(result.output, ref))
                row["variant"] = variant
                rows.append(row)
            except (ImageIOError, StageError, ValueError, OSError) as exc:
                print(f"error: {path.name} [{variant}]: {exc}", file=sys.stderr)
                rows.append({"name": path.name, "variant": variant, "status": "failed"})
        return rows

    per_image = _map_maybe_parallel(work, inputs, cfg.threads)
    rows = [row for group in per_image for row in group]
    failed = sum(1 for row in rows if row["status"] != "ok")

    # Append a per-variant mean row for each metric that has values.
    variant_means: dict[str, dict[str, float]] = {}
    summary_rows = []
    for variant in ABLATION_VARIANTS:
        ok_rows = [r for r in rows if r["variant"] == variant and r["status"] == "ok"]
        means: dict[str, float] = {}
        for column in METRIC_COLUMNS:
            values = [
                r[column] for r in ok_rows if isinstance(r.get(column), (int, float))
            ]
            if values and np.all(np.isfinite(values)):
                means[column] = float(np.mean(values))
        if means:
            variant_means[variant] = {
                k: v for k, v in means.items() if k in ("ag", "ie")
            }
        summary_rows.append(
            {"name": "mean", "variant": variant, "status": "summary", **means}
        )

    write_csv_with_summary(
        out_dir / "ablation.csv",
        ("name", "variant", "status", *METRIC_COLUMNS),
        rows + summary_rows,
    )
    if not args.no_figures and variant_means:
        save_ablation_figure(variant_means, out_dir / "ablation.png")
    return EXIT_PARTIAL if failed else EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nightdehaze",
        description="Two-stage nighttime dehazing: batch runner, synthesizer, metrics.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dehaze", help="restore a file or directory of images")
    p.add_argument("input", help="input image or directory (PNG/PPM)")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.add_argument("--config", help="pipeline config file")
    p.add_argument("--threads", type=int, help="worker threads (overrides config)")
    p.add_argument("--debug-dump", action="store_true", help="write intermediate maps")
    p.add_argument("--no-figures", action="store_true", help="skip report figures")
    p.set_defaults(func=cmd_dehaze)

    p = sub.add_parser("synth", help="make hazy/clean/t/A quadruples")
    p.add_argument("clean", nargs="?", help="directory of clean images")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.add_argument("--generate", type=int, metavar="N", help="generate N night scenes")
    p.add_argument("--size", type=_parse_size, default=(256, 256), metavar="WxH",
                   help="generated scene size (default 256x256)")
    p.add_argument("--seed", type=int, default=0, help="root random seed")
    p.add_argument("--preset", choices=sorted(SCENE_PRESETS), help="named haze recipe")
    p.add_argument("--t-mode", choices=("constant", "radial"))
    p.add_argument("--t-constant", type=float)
    p.add_argument("--t-near", type=float)
    p.add_argument("--t-floor", type=float)
    p.add_argument("--airlight-mode", choices=("constant", "bump"))
    p.add_argument("--airlight-base", type=_parse_rgb, metavar="R,G,B")
    p.add_argument("--base-jitter", type=float)
    p.add_argument("--noise-sigma", type=float)
    p.add_argument("--no-figures", action="store_true", help="skip montage figure")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("metrics", help="score (output, reference) pairs")
    p.add_argument("manifest", help="pairs manifest JSON (or a synth manifest)")
    p.add_argument("-o", "--out", required=True, help="output CSV path")
    p.add_argument("--regions", help="JSON list of (top,left,height,width) patches")
    p.add_argument("--no-figures", action="store_true", help="skip metrics figure")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("ablate", help="run ablation variants and compare")
    p.add_argument("input", help="input image or directory (PNG/PPM)")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.add_argument("--config", help="pipeline config file")
    p.add_argument("--reference", help="directory of reference images (matched by name)")
    p.add_argument("--threads", type=int, help="worker threads (overrides config)")
    p.add_argument("--no-figures", action="store_true", help="skip comparison figure")
    p.set_defaults(func=cmd_ablate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
