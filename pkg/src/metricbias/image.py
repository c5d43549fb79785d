"""Image containers, decoding, grayscale conversion and histograms.

Everything downstream of this module consumes :class:`GrayImage`,
:class:`RealImage` and :class:`Histogram` only, so the codec used to read a
file can never influence the numbers computed from it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ImageFormatError, ImageReadError, ShapeError

LEVELS = 256

# BT.601 luma weights in thousandths; integer arithmetic keeps rounding exact.
_LUMA_WEIGHTS = (299, 587, 114)
GRAYSCALE_RULE = "bt601-luma-round-half-away"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GrayImage:
    """8-bit grayscale image.

    ``pixels`` is a read-only ``(height, width)`` ``uint8`` array; row-major
    order is numpy's default layout.
    """

    pixels: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.pixels)
        if a.ndim != 2:
            raise ShapeError(f"expected a 2-D pixel grid, got shape {a.shape}")
        if a.shape[0] < 1 or a.shape[1] < 1:
            raise ShapeError("image must be at least 1x1")
        if a.dtype != np.uint8:
            if not np.issubdtype(a.dtype, np.integer):
                if not np.all(np.isfinite(a)) or np.any(a != np.round(a)):
                    raise ValueError("gray pixels must be integers")
            if a.min() < 0 or a.max() > LEVELS - 1:
                raise ValueError("gray pixels must lie in [0, 255]")
            a = a.astype(np.uint8)
        object.__setattr__(self, "pixels", _frozen(a))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def as_float(self) -> np.ndarray:
        return self.pixels.astype(np.float64)


@dataclass(frozen=True)
class RealImage:
    """Real-valued image, e.g. a rendered segmentation."""

    pixels: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.pixels, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ShapeError(f"expected a non-empty 2-D pixel grid, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("real image values must be finite")
        object.__setattr__(self, "pixels", _frozen(a))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def as_float(self) -> np.ndarray:
        return self.pixels


@dataclass(frozen=True)
class Histogram:
    """256-bin gray-level histogram.

    Attributes
    ----------
    counts : ndarray of int64, shape (256,)
        Number of pixels at each gray level.
    probs : ndarray of float64, shape (256,)
        ``counts / total``.
    total : int
        Pixel count.
    """

    counts: np.ndarray
    probs: np.ndarray = field(init=False)
    total: int = field(init=False)

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.shape != (LEVELS,):
            raise ShapeError(f"histogram needs {LEVELS} bins, got shape {c.shape}")
        if not np.issubdtype(c.dtype, np.integer):
            if np.any(c != np.round(c)):
                raise ValueError("histogram counts must be integers")
        c = c.astype(np.int64)
        if np.any(c < 0):
            raise ValueError("histogram counts must be nonnegative")
        total = int(c.sum())
        if total == 0:
            raise ValueError("histogram is empty")
        object.__setattr__(self, "counts", _frozen(c))
        object.__setattr__(self, "probs", _frozen(c / total))
        object.__setattr__(self, "total", total)


def histogram(img: GrayImage) -> Histogram:
    """Count pixels per gray level."""
    return Histogram(np.bincount(img.pixels.ravel(), minlength=LEVELS))


def to_grayscale(r, g, b) -> GrayImage:
    """Convert three 8-bit channel planes to luma.

    Uses ``0.299 R + 0.587 G + 0.114 B`` rounded half away from zero. The sum
    is formed in integer thousandths so exact halves round consistently.
    """
    planes = [np.asarray(p) for p in (r, g, b)]
    if not (planes[0].shape == planes[1].shape == planes[2].shape):
        raise ShapeError(
            "channel planes differ in shape: "
            + ", ".join(str(p.shape) for p in planes)
        )
    ints = []
    for p in planes:
        if not np.issubdtype(p.dtype, np.integer):
            if not np.all(np.isfinite(p)) or np.any(p != np.round(p)):
                raise ValueError("channel values must be integers")
        p = p.astype(np.int64)
        if p.size and (p.min() < 0 or p.max() > LEVELS - 1):
            raise ValueError("channel values must lie in [0, 255]")
        ints.append(p)
    wr, wg, wb = _LUMA_WEIGHTS
    scaled = wr * ints[0] + wg * ints[1] + wb * ints[2]
    luma = (scaled + 500) // 1000
    return GrayImage(np.clip(luma, 0, LEVELS - 1).astype(np.uint8))


def decode_image(path) -> GrayImage | tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read a JPEG or PNG file.

    Returns a :class:`GrayImage` for single-channel files and a tuple of
    ``uint8`` R, G, B planes for color files. Alpha channels are dropped and
    palette images are expanded to RGB.

    Raises
    ------
    ImageReadError
        The file is missing, truncated or not a decodable raster.
    ImageFormatError
        The raster is not 8 bits per channel.
    """
    path = Path(path)
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode == "P":
                im = im.convert("RGBA" if "transparency" in im.info else "RGB")
                mode = im.mode
            if mode in ("L", "LA"):
                arr = np.asarray(im.getchannel("L"), dtype=np.uint8)
                return GrayImage(arr)
            if mode in ("RGB", "RGBA"):
                arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
                return arr[..., 0].copy(), arr[..., 1].copy(), arr[..., 2].copy()
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        raise ImageReadError(f"cannot open {path}: {exc}") from exc
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise ImageReadError(f"cannot decode {path}: {exc}") from exc
    raise ImageFormatError(f"{path}: unsupported image mode {mode!r} (8-bit L/RGB required)")


def load_gray(path) -> GrayImage:
    """Decode ``path`` and convert to grayscale if needed."""
    decoded = decode_image(path)
    if isinstance(decoded, GrayImage):
        return decoded
    return to_grayscale(*decoded)
