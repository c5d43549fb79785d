"""SVG figures: correlation histograms and normalized curve overlays.

Figures are rendered without pyplot and with a fixed SVG hash salt and no
date stamp, so identical inputs give byte-identical files.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from .sweep import PAIRS, CorrelationRecord, SweepCurves, correlate, normalize_curve

_LABELS = {"otsu": "Otsu", "kapur": "Kapur", "ssim": "SSIM", "psnr": "PSNR"}
_RC = {"svg.hashsalt": "metricbias", "svg.fonttype": "path", "font.family": "DejaVu Sans"}


def _save(fig: Figure, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context(_RC):
        FigureCanvasSVG(fig)
        fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def histogram_figure(report, objective: str, metric: str) -> Figure:
    stats = report.pair(objective, metric)
    edges = report.bin_edges
    with matplotlib.rc_context(_RC):
        fig = Figure(figsize=(5, 3.5))
        ax = fig.add_subplot()
        widths = [b - a for a, b in zip(edges[:-1], edges[1:])]
        ax.bar(edges[:-1], stats.bins, width=widths, align="edge", color="#4878a8", edgecolor="white")
        ax.set_xlim(-1, 1)
        ax.set_xlabel("Pearson correlation")
        ax.set_ylabel("images")
        ax.set_title(f"{_LABELS[objective]} × {_LABELS[metric]}")
        fig.tight_layout()
    return fig


def emit_histograms(report, out_dir) -> list[Path]:
    """Write one correlation histogram per objective/metric pair.

    Raises ``OSError`` if ``out_dir`` cannot be created or written.
    """
    out_dir = Path(out_dir)
    return [
        _save(histogram_figure(report, obj, met), out_dir / f"hist_{obj}_{met}.svg")
        for obj, met in PAIRS
    ]


def _normalized(v):
    # A curve with no finite point (e.g. PSNR of a single-level image) is left blank.
    try:
        return normalize_curve(v)
    except ValueError:
        return np.full(len(v), np.nan)


def overlay_figure(curves: SweepCurves, objective: str, metric: str, rho: float | None = None) -> Figure:
    t = curves.thresholds
    a = _normalized(curves.series(objective))
    b = _normalized(curves.series(metric))
    with matplotlib.rc_context(_RC):
        fig = Figure(figsize=(5, 3.5))
        ax = fig.add_subplot()
        ax.plot(t, a, color="#c44e52", label=_LABELS[objective])
        ax.plot(t, b, color="#4878a8", label=_LABELS[metric])
        ax.set_xlim(0, 256)
        ax.set_ylim(-0.05, 1.05)
        ax.set_xlabel("threshold")
        ax.set_ylabel("normalized value")
        title = f"{_LABELS[objective]} × {_LABELS[metric]}"
        if rho is not None and rho == rho:
            title += f". Correlation = {rho:.2f}"
        ax.set_title(title)
        ax.legend(loc="best")
        fig.tight_layout()
    return fig


def emit_overlays(curves: SweepCurves, out_dir, record: CorrelationRecord | None = None) -> list[Path]:
    """Write normalized objective-vs-metric overlays for one image."""
    record = record or correlate(curves)
    out_dir = Path(out_dir)
    stem = curves.image_id.replace("/", "_") or "image"
    return [
        _save(
            overlay_figure(curves, obj, met, record.rho(obj, met)),
            out_dir / f"{stem}_{obj}_{met}.svg",
        )
        for obj, met in PAIRS
    ]


def emit_plots(report, out_dir, curves=None) -> list[Path]:
    """Histograms for ``report`` plus overlays for each given ``SweepCurves``."""
    paths = emit_histograms(report, out_dir)
    for c in curves or ():
        paths.extend(emit_overlays(c, out_dir))
    return paths
