"""Slow, definition-level implementations used as oracles.

Nothing here shares code with the accelerated paths in
:mod:`metricbias.objectives`, :mod:`metricbias.metrics` or
:mod:`metricbias.sweep`. Each function transcribes its formula directly,
so agreement between the two routes is meaningful.
"""
from __future__ import annotations

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .image import GrayImage, Histogram

L = 256
PAIRS = (("otsu", "ssim"), ("otsu", "psnr"), ("kapur", "ssim"), ("kapur", "psnr"))


def _ranges(thresholds):
    b = [0, *thresholds, L]
    return list(zip(b[:-1], b[1:]))


def otsu_naive(p, thresholds) -> float:
    p = np.asarray(p, dtype=np.float64)
    mu_t = sum(i * p[i] for i in range(L))
    total = 0.0
    for lo, hi in _ranges(thresholds):
        w = sum(p[i] for i in range(lo, hi))
        if w > 0:
            mu = sum(i * p[i] for i in range(lo, hi)) / w
            total += w * (mu - mu_t) ** 2
    return total


def kapur_naive(p, thresholds) -> float:
    p = np.asarray(p, dtype=np.float64)
    total = 0.0
    for lo, hi in _ranges(thresholds):
        w = sum(p[i] for i in range(lo, hi))
        if w <= 0:
            continue
        for i in range(lo, hi):
            if p[i] > 0:
                q = p[i] / w
                total -= q * math.log(q)
    return total


def variance_split(p, thresholds) -> tuple[float, float]:
    """Total and within-class gray-level variance of a histogram."""
    p = np.asarray(p, dtype=np.float64)
    mu_t = sum(i * p[i] for i in range(L))
    total = sum(p[i] * (i - mu_t) ** 2 for i in range(L))
    within = 0.0
    for lo, hi in _ranges(thresholds):
        w = sum(p[i] for i in range(lo, hi))
        if w > 0:
            mu = sum(i * p[i] for i in range(lo, hi)) / w
            within += w * (sum((i - mu) ** 2 * p[i] for i in range(lo, hi)) / w)
    return total, within


def ssim_patches(x, y, window_size=7, k1=0.01, k2=0.03, data_range=255.0, unbiased=True) -> float:
    """SSIM from explicitly materialized windows, one patch per interior pixel."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = window_size * window_size
    px = sliding_window_view(x, (window_size, window_size)).reshape(-1, n)
    py = sliding_window_view(y, (window_size, window_size)).reshape(-1, n)
    mx = px.mean(axis=1, keepdims=True)
    my = py.mean(axis=1, keepdims=True)
    dx = px - mx
    dy = py - my
    denom = n - 1 if unbiased else n
    vx = (dx * dx).sum(axis=1) / denom
    vy = (dy * dy).sum(axis=1) / denom
    vxy = (dx * dy).sum(axis=1) / denom
    mx = mx[:, 0]
    my = my[:, 0]
    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2
    local = ((2 * mx * my + c1) * (2 * vxy + c2)) / ((mx**2 + my**2 + c1) * (vx + vy + c2))
    return float(local.mean())


def render_naive(x: np.ndarray, threshold: int, rule: str) -> np.ndarray:
    """Bi-level rendering computed from the pixels themselves."""
    below = x < threshold
    y = np.empty_like(x, dtype=np.float64)
    for mask, lo, hi in ((below, 0, threshold), (~below, threshold, L)):
        if not mask.any():
            continue
        if rule == "class-mean":
            y[mask] = x[mask].astype(np.float64).mean()
        elif rule == "midpoint":
            y[mask] = (lo + hi - 1) / 2
        elif rule == "lower":
            y[mask] = lo
        else:
            raise ValueError(rule)
    return y


def sweep_naive(img: GrayImage, rule: str = "class-mean", window_size: int = 7) -> dict[str, np.ndarray]:
    """Per-threshold objective and metric curves, every value from its definition."""
    x = img.pixels.astype(np.float64)
    p = np.bincount(img.pixels.ravel(), minlength=L) / img.pixels.size
    out = {k: np.empty(L - 1) for k in ("otsu", "kapur", "ssim", "psnr")}
    for idx, t in enumerate(range(1, L)):
        out["otsu"][idx] = otsu_naive(p, [t])
        out["kapur"][idx] = kapur_naive(p, [t])
        y = render_naive(x, t, rule)
        err = float(((x - y) ** 2).mean())
        out["psnr"][idx] = math.inf if err == 0 else 10 * math.log10(255.0**2 / err)
        out["ssim"][idx] = ssim_patches(x, y, window_size)
    return out


def correlate_naive(curves: dict[str, np.ndarray]) -> dict[str, float]:
    """Pairwise-deleted correlations via ``numpy.corrcoef``."""
    out = {}
    for obj, met in PAIRS:
        a = np.asarray(curves[obj], dtype=np.float64)
        b = np.asarray(curves[met], dtype=np.float64)
        keep = np.isfinite(a) & np.isfinite(b)
        a, b = a[keep], b[keep]
        if len(a) < 2 or np.ptp(a) == 0 or np.ptp(b) == 0:
            out[f"rho_{obj}_{met}"] = math.nan
        else:
            out[f"rho_{obj}_{met}"] = float(np.corrcoef(a, b)[0, 1])
    out["dropped_points"] = int(np.sum(~np.isfinite(np.asarray(curves["psnr"]))))
    return out


def histogram_naive(img: GrayImage) -> Histogram:
    counts = np.zeros(L, dtype=np.int64)
    for v in img.pixels.ravel():
        counts[int(v)] += 1
    return Histogram(counts)
