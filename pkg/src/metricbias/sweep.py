"""Per-image threshold sweep and objective/metric correlation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import metrics
from .image import LEVELS, GrayImage, histogram
from .metrics import DEFAULT_SSIM, SsimConfig
from .objectives import ReconstructionRule, ThresholdSet, bilevel_curves, class_values, lookup_table

OBJECTIVE_NAMES = ("otsu", "kapur")
METRIC_NAMES = ("ssim", "psnr")
PAIRS = tuple((o, m) for o in OBJECTIVE_NAMES for m in METRIC_NAMES)
THRESHOLDS = np.arange(1, LEVELS, dtype=np.int64)


def _readonly(v) -> np.ndarray:
    a = np.array(v, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SweepCurves:
    """Objective and metric values at every threshold ``T = 1..255``."""

    otsu: np.ndarray
    kapur: np.ndarray
    ssim: np.ndarray
    psnr: np.ndarray
    image_id: str = ""
    rule: ReconstructionRule = ReconstructionRule.CLASS_MEAN
    thresholds: np.ndarray = field(default_factory=lambda: THRESHOLDS.copy())

    def __post_init__(self):
        for name in ("otsu", "kapur", "ssim", "psnr"):
            a = _readonly(getattr(self, name))
            if a.shape != (LEVELS - 1,):
                raise ValueError(f"{name} curve must have {LEVELS - 1} entries, got shape {a.shape}")
            object.__setattr__(self, name, a)
        t = np.asarray(self.thresholds, dtype=np.int64)
        if not np.array_equal(t, THRESHOLDS):
            raise ValueError("thresholds must be 1..255 in order")
        object.__setattr__(self, "thresholds", t)
        object.__setattr__(self, "rule", ReconstructionRule(self.rule))

    def series(self, name: str) -> np.ndarray:
        return getattr(self, name)


@dataclass(frozen=True)
class CorrelationRecord:
    """Pearson coefficients of the four objective/metric pairs; ``nan`` when undefined."""

    image_id: str
    rho_otsu_ssim: float
    rho_otsu_psnr: float
    rho_kapur_ssim: float
    rho_kapur_psnr: float
    dropped_points: int = 0

    def rho(self, objective: str, metric: str) -> float:
        return getattr(self, f"rho_{objective}_{metric}")


def _class_levels(values: np.ndarray) -> tuple[float, float]:
    lo, hi = values
    # An empty side has no pixels; give it the other side's value so the
    # rendering stays finite.
    if math.isnan(lo):
        lo = hi
    if math.isnan(hi):
        hi = lo
    return float(lo), float(hi)


def sweep_image(
    img: GrayImage,
    rule=ReconstructionRule.CLASS_MEAN,
    cfg: SsimConfig = DEFAULT_SSIM,
    image_id: str = "",
) -> SweepCurves:
    """Evaluate Otsu, Kapur, SSIM and PSNR for each single threshold.

    The image is rendered bi-level at each ``T`` as ``y = a + (b - a) * m``
    with ``m = [x >= T]``, so the local moments of ``y`` follow from box
    means of ``m`` and ``x * m`` alone; the statistics of ``x`` are filtered
    once. MSE comes from the histogram.
    """
    rule = ReconstructionRule(rule)
    metrics.check_window(img.shape, cfg)
    h = histogram(img)
    otsu, kapur = bilevel_curves(h)

    x = img.as_float()
    f = cfg.covariance_factor
    c1, c2 = cfg.c1, cfg.c2
    ux = metrics.box_mean(x, cfg)
    vx = f * (metrics.box_mean(x * x, cfg) - ux * ux)
    ux2_c1 = ux * ux + c1
    vx_c2 = vx + c2

    levels = np.arange(LEVELS, dtype=np.float64)
    counts = h.counts
    below = np.concatenate(([0], np.cumsum(counts)))
    ssim_curve = np.empty(LEVELS - 1)
    psnr_curve = np.empty(LEVELS - 1)
    m = np.empty_like(x)
    xm = np.empty_like(x)
    uy, cov, num, den, tmp = (np.empty_like(ux) for _ in range(5))
    cached_key = None
    um = uxm = None
    for idx, t in enumerate(THRESHOLDS):
        tset = ThresholdSet((int(t),))
        lut = lookup_table(h, tset, rule)
        err = float(np.dot(counts, (levels - lut) ** 2)) / h.total
        psnr_curve[idx] = metrics.psnr_from_mse(err, cfg.data_range)
        if err == 0.0:
            # the rendering reproduces the image exactly
            ssim_curve[idx] = 1.0
            continue

        # The mask only changes when some pixel sits at level T - 1.
        key = int(below[t])
        if key != cached_key:
            np.greater_equal(x, t, out=m)
            np.multiply(x, m, out=xm)
            um = metrics.box_mean(m, cfg)
            uxm = metrics.box_mean(xm, cfg)
            var_m = um - um * um
            cov_xm = uxm - ux * um
            cached_key = key
        a, b = _class_levels(class_values(h, tset, rule))
        d = b - a
        # uy = a + d*um; var(y) = d^2 var(m); cov(x, y) = d cov(x, m)
        np.multiply(um, d, out=uy)
        uy += a
        np.multiply(cov_xm, 2.0 * f * d, out=cov)
        cov += c2
        np.multiply(ux, uy, out=num)
        num *= 2.0
        num += c1
        num *= cov
        np.multiply(uy, uy, out=den)
        den += ux2_c1
        np.multiply(var_m, f * d * d, out=tmp)
        tmp += vx_c2
        den *= tmp
        num /= den
        ssim_curve[idx] = min(1.0, max(-1.0, float(num.mean(dtype=np.float64))))

    return SweepCurves(otsu=otsu, kapur=kapur, ssim=ssim_curve, psnr=psnr_curve, image_id=image_id, rule=rule)


def correlate(curves: SweepCurves) -> CorrelationRecord:
    """Pearson correlation for each objective/metric pair.

    Thresholds where either series is non-finite are dropped for that pair
    only. A pair with fewer than two remaining points or a constant series
    is ``nan``.
    """
    rhos = {}
    for obj, met in PAIRS:
        a = curves.series(obj)
        b = curves.series(met)
        keep = np.isfinite(a) & np.isfinite(b)
        if keep.sum() < 2:
            rhos[f"rho_{obj}_{met}"] = math.nan
        else:
            rhos[f"rho_{obj}_{met}"] = metrics.pearson(a[keep], b[keep])
    dropped = int(np.count_nonzero(~np.isfinite(curves.psnr)))
    return CorrelationRecord(image_id=curves.image_id, dropped_points=dropped, **rhos)


def normalize_curve(v) -> np.ndarray:
    """Min-max rescale finite entries to ``[0, 1]``; for display only.

    Constant vectors map to zeros. Non-finite entries pass through unchanged.
    """
    v = np.asarray(v, dtype=np.float64)
    finite = np.isfinite(v)
    if not finite.any():
        raise ValueError("curve has no finite entries")
    lo = v[finite].min()
    hi = v[finite].max()
    out = v.copy()
    if hi == lo:
        out[finite] = 0.0
    else:
        out[finite] = (v[finite] - lo) / (hi - lo)
    return out
