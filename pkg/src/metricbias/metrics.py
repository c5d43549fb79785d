"""Full-reference quality metrics and Pearson correlation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.ndimage import uniform_filter

from .errors import ShapeError
from .image import GrayImage, RealImage


class CovarianceNormalization(str, Enum):
    BIASED = "biased"
    UNBIASED = "unbiased"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class SsimConfig:
    """Parameters of the windowed SSIM.

    The defaults (7x7 uniform window, K1=0.01, K2=0.03, 8-bit range, sample
    covariance) reproduce scikit-image's ``structural_similarity``.
    """

    window_size: int = 7
    k1: float = 0.01
    k2: float = 0.03
    data_range: float = 255.0
    covariance: CovarianceNormalization = CovarianceNormalization.UNBIASED

    def __post_init__(self):
        if self.window_size < 3 or self.window_size % 2 == 0:
            raise ValueError(f"window_size must be odd and >= 3, got {self.window_size}")
        if self.k1 <= 0 or self.k2 <= 0:
            raise ValueError("k1 and k2 must be positive")
        if self.data_range <= 0:
            raise ValueError("data_range must be positive")
        object.__setattr__(self, "covariance", CovarianceNormalization(self.covariance))

    @property
    def c1(self) -> float:
        return (self.k1 * self.data_range) ** 2

    @property
    def c2(self) -> float:
        return (self.k2 * self.data_range) ** 2

    @property
    def covariance_factor(self) -> float:
        n = self.window_size**2
        return n / (n - 1) if self.covariance is CovarianceNormalization.UNBIASED else 1.0

    @property
    def border(self) -> int:
        return (self.window_size - 1) // 2

    def to_dict(self) -> dict:
        return {
            "window_size": self.window_size,
            "k1": self.k1,
            "k2": self.k2,
            "data_range": self.data_range,
            "covariance": str(self.covariance),
            "window": "uniform",
        }


DEFAULT_SSIM = SsimConfig()


@dataclass(frozen=True)
class MetricValue:
    value: float
    finite: bool

    def __float__(self) -> float:
        return self.value


def _array(img) -> np.ndarray:
    if isinstance(img, (GrayImage, RealImage)):
        return img.as_float()
    a = np.asarray(img, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-D image, got shape {a.shape}")
    return a


def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    a, b = _array(x), _array(y)
    if a.shape != b.shape:
        raise ShapeError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def mse(x, y) -> float:
    a, b = _pair(x, y)
    return float(np.mean((a - b) ** 2))


def psnr_from_mse(err: float, data_range: float = 255.0) -> float:
    """PSNR in dB; ``inf`` when ``err`` is zero."""
    if err == 0:
        return math.inf
    return 10.0 * math.log10(data_range**2 / err)


def psnr(x, y, data_range: float = 255.0) -> MetricValue:
    if data_range <= 0:
        raise ValueError("data_range must be positive")
    value = psnr_from_mse(mse(x, y), data_range)
    return MetricValue(value, math.isfinite(value))


def box_mean(a: np.ndarray, cfg: SsimConfig) -> np.ndarray:
    """Uniform-window local mean over the uncropped interior positions."""
    p = cfg.border
    out = uniform_filter(a, size=cfg.window_size, mode="reflect")
    return out[p : out.shape[0] - p, p : out.shape[1] - p]


def ssim_from_moments(mu_x, mu_y, var_x, var_y, cov_xy, cfg: SsimConfig) -> float:
    """Mean SSIM map from local means, (normalized) variances and covariance."""
    c1, c2 = cfg.c1, cfg.c2
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov_xy + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    value = float(np.mean(num / den, dtype=np.float64))
    return min(1.0, max(-1.0, value))


def check_window(shape, cfg: SsimConfig) -> None:
    if min(shape) < cfg.window_size:
        raise ShapeError(f"image {shape} is smaller than the {cfg.window_size}x{cfg.window_size} SSIM window")


def ssim(x, y, cfg: SsimConfig = DEFAULT_SSIM) -> float:
    """Windowed SSIM averaged over positions whose window lies inside the image.

    Local moments come from a uniform ``window_size`` box filter; a border
    of ``(window_size - 1) // 2`` pixels is discarded before averaging.
    """
    a, b = _pair(x, y)
    check_window(a.shape, cfg)
    f = cfg.covariance_factor
    ux = box_mean(a, cfg)
    uy = box_mean(b, cfg)
    vx = f * (box_mean(a * a, cfg) - ux * ux)
    vy = f * (box_mean(b * b, cfg) - uy * uy)
    vxy = f * (box_mean(a * b, cfg) - ux * uy)
    return ssim_from_moments(ux, uy, vx, vy, vxy, cfg)


def pearson(x, y) -> float:
    """Pearson correlation coefficient, or ``nan`` if either input is constant.

    Means and centered moments are formed with exactly rounded summation
    (``math.fsum``) in two passes; the result is clamped to ``[-1, 1]``.

    Raises
    ------
    ValueError
        On length mismatch or fewer than two samples.
    """
    xs = [float(v) for v in np.asarray(x, dtype=np.float64).ravel()]
    ys = [float(v) for v in np.asarray(y, dtype=np.float64).ravel()]
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    n = len(xs)
    if n < 2:
        raise ValueError("pearson needs at least two samples")
    # fsum(x) / n can miss a constant value by an ulp and fake a tiny variance.
    if min(xs) == max(xs) or min(ys) == max(ys):
        return math.nan
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    dx = [v - mx for v in xs]
    dy = [v - my for v in ys]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0.0 or syy == 0.0:
        return math.nan
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    norm = math.sqrt(sxx * syy)
    if not math.isfinite(norm):
        norm = math.sqrt(sxx) * math.sqrt(syy)
    r = sxy / norm
    return min(1.0, max(-1.0, r))
