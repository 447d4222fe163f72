"""Matplotlib rendering of trace panels and report charts.

Everything renders to files through the Agg backend; nothing here opens a
window. Stage maps are also written as plain PNGs next to the figures so
they can be inspected without replotting.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .image import save_image
from .pipeline import EnhancementTrace

# (trace key, panel label); order mirrors the processing stages
STAGE_PANELS = [
    ("input", "input"),
    ("illum_init", "initial luminance"),
    ("illumination", "illumination"),
    ("reflectance_noisy", "noisy reflectance"),
    ("reflectance", "reflectance"),
    ("output", "output"),
]


def _to_display(arr: np.ndarray) -> np.ndarray:
    if arr.ndim == 2:
        arr = np.dstack([arr] * 3)
    return np.clip(arr, 0.0, 1.0)


def save_trace_panels(input_img, output_img, trace: EnhancementTrace,
                      directory, stem: str) -> list[Path]:
    """Write one PNG per stage plus a combined contact sheet.

    Returns the paths written. Requires a trace captured with
    ``keep_maps=True``; stages missing from the trace are skipped.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    maps = dict(trace.maps)
    maps["input"] = input_img
    maps["output"] = output_img

    written: list[Path] = []
    panels = [(key, label) for key, label in STAGE_PANELS if key in maps]
    for index, (key, label) in enumerate(panels, start=1):
        path = directory / f"{stem}_{index}_{key}.png"
        save_image(path, _to_display(np.asarray(maps[key])))
        written.append(path)

    fig, axes = plt.subplots(1, len(panels), figsize=(2.4 * len(panels), 2.8))
    for ax, (key, label) in zip(np.atleast_1d(axes), panels):
        ax.imshow(_to_display(np.asarray(maps[key])))
        ax.set_title(label, fontsize=9)
        ax.axis("off")
    fig.tight_layout()
    sheet = directory / f"{stem}_stages.png"
    fig.savefig(sheet, dpi=120)
    plt.close(fig)
    written.append(sheet)
    return written


def save_metrics_chart(rows: list[dict], path) -> Path:
    """Bar chart of per-image SSIM with the mean as a horizontal line.

    ``rows`` are the eval-report dicts (keys: file, ssim, psnr).
    """
    path = Path(path)
    names = [row["file"] for row in rows]
    scores = [row["ssim"] for row in rows]
    mean_score = float(np.mean(scores)) if scores else 0.0

    fig, ax = plt.subplots(figsize=(max(4.0, 0.45 * len(names) + 1.5), 3.2))
    ax.bar(range(len(names)), scores, color="#4878a8")
    ax.axhline(mean_score, color="#b04030", linewidth=1.2,
               label=f"mean {mean_score:.4f}")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=60, ha="right", fontsize=7)
    ax.set_ylabel("SSIM")
    ax.set_ylim(0.0, 1.0)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_ablation_sheet(variant_images: dict[str, np.ndarray], path) -> Path:
    """One row of panels, one per ablation variant."""
    path = Path(path)
    names = list(variant_images)
    count = max(1, len(names))
    fig, axes = plt.subplots(1, count, figsize=(2.6 * count, 3.0))
    for ax, name in zip(np.atleast_1d(axes), names):
        ax.imshow(_to_display(np.asarray(variant_images[name])))
        ax.set_title(name, fontsize=9)
        ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
