"""
Sweeping every threshold of one image
=====================================

Otsu and Kapur each score a threshold from the histogram alone. SSIM and
PSNR score the same threshold by comparing the thresholded rendering with
the original. Sweeping T = 1..255 gives four curves per image. Their
Pearson correlations show which objective the metrics agree with.
"""
import sys
import tempfile
from pathlib import Path

import numpy as np

from metricbias import correlate, load_gray, normalize_curve, sweep_image
from metricbias.plots import emit_overlays

here = Path(__file__).resolve().parent
image_path = Path(sys.argv[1]) if len(sys.argv) > 1 else here.parent / "tests/data/corpus/natural/camera.png"

img = load_gray(image_path)
print(f"{image_path.name}: {img.height}x{img.width}")

# One pass computes all four curves, each indexed by threshold 1..255.
curves = sweep_image(img, image_id=image_path.stem)
for name in ("otsu", "kapur", "ssim", "psnr"):
    v = curves.series(name)
    best = int(curves.thresholds[np.nanargmax(np.where(np.isfinite(v), v, np.nan))])
    print(f"  {name:6s} peaks at T={best:3d}")

# %%
# The correlations are what gets aggregated over a dataset. PSNR usually
# tracks Otsu almost perfectly. That is expected: with class-mean rendering
# the MSE is the within-class variance, and Otsu maximizes the between-class
# variance, which is the total variance minus that.
record = correlate(curves)
for obj in ("otsu", "kapur"):
    for met in ("ssim", "psnr"):
        print(f"  rho({obj}, {met}) = {record.rho(obj, met):+.4f}")

# %%
# Normalizing to [0, 1] is only for display; correlations do not change.
print("normalized otsu range:", normalize_curve(curves.otsu).min(), normalize_curve(curves.otsu).max())

out = Path(sys.argv[2]) if len(sys.argv) > 2 else Path(tempfile.mkdtemp(prefix="metricbias-"))
for path in emit_overlays(curves, out, record):
    print("wrote", path)
