"""Regenerate the fallback mini-corpus and its golden results.

Run from the repository root::

    python tests/data/build_corpus.py

Images: five synthetic patterns and five crops of CC0 / public-domain
photographs shipped with scikit-image. Goldens come from the slow
definition-level pipeline in ``metricbias.reference``, never from the
accelerated sweep.
"""
import csv
import math
from pathlib import Path

import numpy as np
import skimage.data
from PIL import Image

from metricbias import reference

HERE = Path(__file__).parent
CORPUS = HERE / "corpus"
GOLDEN = HERE / "golden"
H, W = 96, 128


def synthetic():
    rng = np.random.default_rng(20240601)
    yy, xx = np.mgrid[0:H, 0:W]
    ramp = np.tile(np.linspace(0, 255, W).round().astype(np.uint8), (H, 1))
    two = np.where(xx < W // 2, 0, 255).astype(np.uint8)
    flat = np.full((H, W), 7, np.uint8)
    blobs = np.where((yy - 40) ** 2 + (xx - 50) ** 2 < 600, 170.0, 60.0)
    blobs += 30 * np.sin(xx / 9.0) + rng.normal(0, 18, (H, W))
    quads = 40.0 + 60 * (yy >= H // 2) + 110 * (xx >= W // 2) + rng.normal(0, 25, (H, W))
    return {
        "ramp": ramp,
        "two_level": two,
        "flat": flat,
        "blobs": np.clip(blobs.round(), 0, 255).astype(np.uint8),
        "quadrants": np.clip(quads.round(), 0, 255).astype(np.uint8),
    }


def natural():
    return {
        "camera": skimage.data.camera()[120 : 120 + H, 200 : 200 + W],
        "coins": skimage.data.coins()[90 : 90 + H, 120 : 120 + W],
        "coffee": skimage.data.coffee()[150 : 150 + H, 250 : 250 + W],
        "astronaut": skimage.data.astronaut()[60 : 60 + H, 180 : 180 + W],
        "chelsea": skimage.data.chelsea()[100 : 100 + H, 150 : 150 + W],
    }


def gray_from_file(path):
    with Image.open(path) as im:
        a = np.asarray(im).astype(np.int64)
    if a.ndim == 2:
        return a.astype(np.uint8)
    s = 299 * a[..., 0] + 587 * a[..., 1] + 114 * a[..., 2]
    return ((s + 500) // 1000).astype(np.uint8)


def fmt(v):
    return repr(float(v))


def main():
    for group, images in (("synthetic", synthetic()), ("natural", natural())):
        for name, arr in images.items():
            path = CORPUS / group / f"{name}.png"
            path.parent.mkdir(parents=True, exist_ok=True)
            Image.fromarray(arr).save(path, optimize=False)

    from metricbias.image import GrayImage

    rows = []
    for path in sorted(CORPUS.rglob("*.png"), key=lambda p: p.relative_to(CORPUS).as_posix()):
        image_id = path.relative_to(CORPUS).with_suffix("").as_posix()
        img = GrayImage(gray_from_file(path))
        curves = reference.sweep_naive(img, "class-mean")
        rec = reference.correlate_naive(curves)
        out = GOLDEN / "curves" / f"{image_id}.csv"
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["threshold", "otsu", "kapur", "ssim", "psnr"])
            for i in range(255):
                w.writerow([i + 1] + [fmt(curves[k][i]) for k in ("otsu", "kapur", "ssim", "psnr")])
        rows.append([image_id] + [fmt(rec[f"rho_{o}_{m}"]) for o, m in reference.PAIRS] + [rec["dropped_points"]])
        print(image_id, rows[-1][1:])
    with open(GOLDEN / "correlations.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["image_id", "rho_otsu_ssim", "rho_otsu_psnr", "rho_kapur_ssim", "rho_kapur_psnr", "dropped_points"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
