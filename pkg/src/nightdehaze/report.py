"""Batch-run reports: delimited outputs plus rendered summary figures.

Every CLI subcommand that processes a set of images funnels its results
through here.  The delimited side is a JSON run report (full detail) and a
CSV (one row per image, a trailing mean row); the visual side is a small set
of matplotlib figures written next to the CSV so a run can be inspected
without loading the raw images.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import MetricsReport

#: Metric column order used in every CSV this package writes.
METRIC_COLUMNS = ("psnr", "ssim", "ag", "ie", "ciede2000")


@dataclass
class ImageRecord:
    """Outcome of processing one input image."""

    name: str
    status: str = "ok"  # "ok" | "failed"
    error: str | None = None
    metrics: MetricsReport | None = None
    stage_ms: dict[str, float] = field(default_factory=dict)


@dataclass
class RunReport:
    """One CLI invocation's results: per-image records plus run context."""

    command: str
    version: str
    config_text: str = ""
    images: list[ImageRecord] = field(default_factory=list)

    @property
    def failed(self) -> int:
        return sum(1 for rec in self.images if rec.status != "ok")


def _record_to_dict(rec: ImageRecord) -> dict[str, Any]:
    metrics = None
    if rec.metrics is not None:
        metrics = {name: getattr(rec.metrics, name) for name in METRIC_COLUMNS}
    return {
        "name": rec.name,
        "status": rec.status,
        "error": rec.error,
        "metrics": metrics,
        "stage_ms": dict(rec.stage_ms),
    }


def write_report_json(report: RunReport, path: str | Path) -> None:
    """Serialize the full run report; key order is fixed for diffability."""
    payload = {
        "command": report.command,
        "version": report.version,
        "config": report.config_text,
        "failed": report.failed,
        "images": [_record_to_dict(rec) for rec in report.images],
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def format_cell(value: Any) -> str:
    """CSV cell text: floats via shortest repr, None as empty."""
    if value is None:
        return ""
    if isinstance(value, float):
        return str(value)
    return str(value)


def write_csv_with_summary(
    path: str | Path,
    fieldnames: Sequence[str],
    rows: Sequence[dict[str, Any]],
    mean_over: Sequence[str] = (),
) -> None:
    """Write dict rows and, if requested, append a mean row.

    The mean of a column covers the rows where it holds a number; a column
    with no numbers stays empty in the summary.  Non-averaged columns of the
    summary row carry ``name="mean"`` / ``status="summary"`` when present.
    """
    out_rows = [dict(row) for row in rows]
    if mean_over:
        summary: dict[str, Any] = {}
        if "name" in fieldnames:
            summary["name"] = "mean"
        if "status" in fieldnames:
            summary["status"] = "summary"
        for column in mean_over:
            values = [
                row[column]
                for row in rows
                if isinstance(row.get(column), (int, float))
            ]
            if values:
                summary[column] = float(np.mean(values))
        out_rows.append(summary)
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(fieldnames))
        writer.writeheader()
        for row in out_rows:
            writer.writerow({k: format_cell(row.get(k)) for k in fieldnames})


def metrics_row(name: str, status: str, metrics: MetricsReport | None) -> dict[str, Any]:
    """Flatten one record into the standard CSV row shape."""
    row: dict[str, Any] = {"name": name, "status": status}
    if metrics is not None:
        for column in METRIC_COLUMNS:
            row[column] = getattr(metrics, column)
    return row


# --------------------------------------------------------------------------
# Figures.  Each helper renders one PNG and closes its figure; callers skip
# them wholesale under --no-figures.
# --------------------------------------------------------------------------


def save_timing_figure(report: RunReport, path: str | Path) -> None:
    """Mean wall time per pipeline stage across the successful images."""
    ok = [rec for rec in report.images if rec.status == "ok" and rec.stage_ms]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    if ok:
        stages = [s for s in ok[0].stage_ms if s != "total"]
        means = [float(np.mean([rec.stage_ms.get(s, 0.0) for rec in ok])) for s in stages]
        ax.bar(stages, means, color="#33688e")
        ax.set_ylabel("mean ms")
        total = float(np.mean([rec.stage_ms.get("total", 0.0) for rec in ok]))
        ax.set_title(f"{len(ok)} images, mean total {total:.0f} ms")
        ax.tick_params(axis="x", rotation=30)
    else:
        ax.set_title("no successful images")
        ax.set_axis_off()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_metrics_figure(
    rows: Sequence[dict[str, Any]], path: str | Path, title: str = "metrics"
) -> None:
    """Per-image bars, one panel per metric column that has any values."""
    panels = []
    for column in METRIC_COLUMNS:
        pairs = [
            (row["name"], row[column])
            for row in rows
            if isinstance(row.get(column), (int, float)) and math.isfinite(row[column])
        ]
        if pairs:
            panels.append((column, pairs))
    n = max(len(panels), 1)
    fig, axes = plt.subplots(1, n, figsize=(3.2 * n, 3.2), squeeze=False)
    if not panels:
        axes[0][0].set_title("no finite metric values")
        axes[0][0].set_axis_off()
    for ax, (column, pairs) in zip(axes[0], panels):
        names = [p[0] for p in pairs]
        ax.bar(range(len(pairs)), [p[1] for p in pairs], color="#7a4f94")
        ax.set_title(column)
        ax.set_xticks(range(len(pairs)))
        ax.set_xticklabels(names, rotation=90, fontsize=6)
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_montage_figure(
    items: Sequence[tuple[str, np.ndarray, np.ndarray]],
    path: str | Path,
    labels: tuple[str, str] = ("input", "output"),
    max_items: int = 8,
) -> None:
    """Before/after pairs in a two-column grid, newest-first trimmed."""
    items = list(items)[:max_items]
    rows = max(len(items), 1)
    fig, axes = plt.subplots(rows, 2, figsize=(6, 3 * rows), squeeze=False)
    for i in range(rows):
        for j in range(2):
            ax = axes[i][j]
            ax.set_axis_off()
            if i < len(items):
                name, before, after = items[i]
                img = before if j == 0 else after
                ax.imshow(np.clip(img, 0.0, 1.0))
                ax.set_title(f"{name} — {labels[j]}", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_ablation_figure(
    variant_means: dict[str, dict[str, float]], path: str | Path
) -> None:
    """Grouped bars of the mean no-reference scores for each variant."""
    variants = list(variant_means)
    measures = sorted({m for means in variant_means.values() for m in means})
    fig, ax = plt.subplots(figsize=(1.8 * max(len(variants), 2) + 2, 3.5))
    width = 0.8 / max(len(measures), 1)
    for k, measure in enumerate(measures):
        xs = [i + k * width for i in range(len(variants))]
        ys = [variant_means[v].get(measure, float("nan")) for v in variants]
        ax.bar(xs, ys, width=width, label=measure)
    ax.set_xticks([i + 0.4 - width / 2 for i in range(len(variants))])
    ax.set_xticklabels(variants)
    ax.legend()
    ax.set_title("ablation comparison (means)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
