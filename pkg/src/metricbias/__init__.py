"""Measure how strongly SSIM and PSNR track thresholding objectives.

For every single threshold of an 8-bit image the Otsu and Kapur criteria
and the SSIM/PSNR of the thresholded rendering are computed; Pearson
correlations between these curves, aggregated over a dataset, expose
which objective the metrics favor.
"""

__version__ = "0.1.0"

from .errors import CapabilityError, EmptyDatasetError, ImageFormatError, ImageReadError, ShapeError
from .image import GrayImage, Histogram, RealImage, decode_image, histogram, load_gray, to_grayscale
from .metrics import MetricValue, SsimConfig, mse, pearson, psnr, ssim
from .objectives import (
    ClassStats,
    ReconstructionRule,
    ThresholdSet,
    class_stats,
    exhaustive_search,
    kapur_objective,
    otsu_objective,
    reconstruct,
    register_objective,
)
from .sweep import CorrelationRecord, SweepCurves, correlate, normalize_curve, sweep_image
from .dataset import AggregateReport, RunConfig, aggregate, discover_images, run_batch

__all__ = [
    "AggregateReport",
    "CapabilityError",
    "ClassStats",
    "CorrelationRecord",
    "EmptyDatasetError",
    "GrayImage",
    "Histogram",
    "ImageFormatError",
    "ImageReadError",
    "MetricValue",
    "RealImage",
    "ReconstructionRule",
    "RunConfig",
    "ShapeError",
    "SsimConfig",
    "SweepCurves",
    "ThresholdSet",
    "aggregate",
    "class_stats",
    "correlate",
    "decode_image",
    "discover_images",
    "exhaustive_search",
    "histogram",
    "kapur_objective",
    "load_gray",
    "mse",
    "normalize_curve",
    "otsu_objective",
    "pearson",
    "psnr",
    "reconstruct",
    "register_objective",
    "run_batch",
    "ssim",
    "sweep_image",
    "to_grayscale",
]
