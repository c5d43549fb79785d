"""Dataset discovery, batch execution, aggregation and result files.

Output layout of :func:`run_batch`::

    OUT/curves/<image_id>.csv   threshold,otsu,kapur,ssim,psnr
    OUT/correlations.csv        one row per processed image
    OUT/report.json             aggregate statistics and run configuration
    OUT/plots/hist_<obj>_<metric>.svg

Rows, statistics and files are always ordered by ``image_id``, so the
worker count never changes any byte of the output.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import EmptyDatasetError
from .image import GRAYSCALE_RULE, load_gray
from .metrics import DEFAULT_SSIM, SsimConfig
from .objectives import ReconstructionRule
from .sweep import METRIC_NAMES, PAIRS, CorrelationRecord, SweepCurves, correlate, sweep_image

log = logging.getLogger(__name__)

CURVES_HEADER = ("threshold", "otsu", "kapur", "ssim", "psnr")
CORRELATIONS_HEADER = (
    "image_id",
    "rho_otsu_ssim",
    "rho_otsu_psnr",
    "rho_kapur_ssim",
    "rho_kapur_psnr",
    "dropped_points",
)
DEFAULT_EXTENSIONS = ("jpg", "png")


@dataclass(frozen=True)
class RunConfig:
    """Settings of a batch run.

    ``workers=None`` means one worker per CPU.
    """

    dataset_root: Path
    output_dir: Path
    rule: ReconstructionRule = ReconstructionRule.CLASS_MEAN
    ssim: SsimConfig = DEFAULT_SSIM
    workers: int | None = 1
    histogram_bins: int = 20
    image_extensions: tuple[str, ...] = DEFAULT_EXTENSIONS

    def __post_init__(self):
        if not str(self.dataset_root) or not str(self.output_dir):
            raise ValueError("dataset_root and output_dir must be non-empty")
        if self.histogram_bins < 2:
            raise ValueError("histogram_bins must be >= 2")
        if self.workers is not None and self.workers < 1:
            raise ValueError("workers must be positive")
        object.__setattr__(self, "dataset_root", Path(self.dataset_root))
        object.__setattr__(self, "output_dir", Path(self.output_dir))
        object.__setattr__(self, "rule", ReconstructionRule(self.rule))
        exts = tuple(sorted({e.lower().lstrip(".") for e in self.image_extensions}))
        if not exts:
            raise ValueError("image_extensions must not be empty")
        object.__setattr__(self, "image_extensions", exts)

    def to_dict(self) -> dict:
        # Worker count and output location are left out on purpose: they
        # must not change the bytes of any result file.
        return {
            "dataset_root": str(self.dataset_root),
            "rule": str(self.rule),
            "ssim": self.ssim.to_dict(),
            "histogram_bins": self.histogram_bins,
            "image_extensions": list(self.image_extensions),
            "grayscale": GRAYSCALE_RULE,
        }


@dataclass(frozen=True)
class PairStats:
    mean: float | None
    std: float | None
    defined: int
    undefined: int
    bins: tuple[int, ...]


@dataclass(frozen=True)
class WinCounts:
    """How often Otsu's correlation with a metric beats Kapur's, strictly."""

    otsu: int
    kapur: int
    ties: int
    undefined: int

    @property
    def total(self) -> int:
        return self.otsu + self.kapur + self.ties + self.undefined


@dataclass(frozen=True)
class AggregateReport:
    pairs: dict[str, PairStats]
    wins: dict[str, WinCounts]
    total_images: int
    bin_edges: tuple[float, ...]
    skipped: tuple[dict, ...] = ()
    config: dict = field(default_factory=dict)

    def pair(self, objective: str, metric: str) -> PairStats:
        return self.pairs[f"{objective}_{metric}"]

    def to_dict(self) -> dict:
        return {
            "tool": "metricbias",
            "tool_version": __version__,
            "config": self.config,
            "statistics": {"std_estimator": "population", "win_comparison": "strict", "histogram_range": [-1.0, 1.0]},
            "total_images": self.total_images,
            "skipped_count": len(self.skipped),
            "skipped": list(self.skipped),
            "pairs": {
                name: {
                    "mean": s.mean,
                    "std": s.std,
                    "defined": s.defined,
                    "undefined": s.undefined,
                    "bins": list(s.bins),
                }
                for name, s in self.pairs.items()
            },
            "bin_edges": list(self.bin_edges),
            "wins": {
                metric: {"otsu": w.otsu, "kapur": w.kapur, "ties": w.ties, "undefined": w.undefined}
                for metric, w in self.wins.items()
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"


def aggregate(records, bins: int = 20, skipped=(), config=None) -> AggregateReport:
    """Dataset statistics over per-image correlation records.

    Means and population standard deviations use defined coefficients
    only. Histograms use ``bins`` equal-width bins over ``[-1, 1]`` with the
    last bin closed on the right.
    """
    records = sorted(records, key=lambda r: r.image_id)
    if not records:
        raise ValueError("cannot aggregate an empty record list")
    if bins < 2:
        raise ValueError("bins must be >= 2")
    edges = np.linspace(-1.0, 1.0, bins + 1)
    pairs = {}
    for obj, met in PAIRS:
        values = np.array([r.rho(obj, met) for r in records], dtype=np.float64)
        defined = values[np.isfinite(values)]
        counts, _ = np.histogram(defined, bins=edges)
        mean = std = None
        if defined.size:
            mean = math.fsum(defined) / defined.size
            std = math.sqrt(math.fsum((defined - mean) ** 2) / defined.size)
        pairs[f"{obj}_{met}"] = PairStats(
            mean=mean,
            std=std,
            defined=int(defined.size),
            undefined=int(values.size - defined.size),
            bins=tuple(int(c) for c in counts),
        )
    wins = {}
    for met in METRIC_NAMES:
        otsu = kapur = ties = undefined = 0
        for r in records:
            a, b = r.rho("otsu", met), r.rho("kapur", met)
            if not (math.isfinite(a) and math.isfinite(b)):
                undefined += 1
            elif a > b:
                otsu += 1
            elif b > a:
                kapur += 1
            else:
                ties += 1
        wins[met] = WinCounts(otsu, kapur, ties, undefined)
    return AggregateReport(
        pairs=pairs,
        wins=wins,
        total_images=len(records),
        bin_edges=tuple(float(e) for e in edges),
        skipped=tuple(skipped),
        config=dict(config or {}),
    )


def image_id_for(root: Path, path: Path) -> str:
    return Path(path).relative_to(root).with_suffix("").as_posix()


def discover_images(root, extensions=DEFAULT_EXTENSIONS) -> list[Path]:
    """Recursively list image files under ``root`` sorted by relative path.

    Raises
    ------
    FileNotFoundError
        ``root`` does not exist or is not a directory.
    EmptyDatasetError
        No file matches ``extensions``.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset root not found: {root}")
    exts = {e.lower().lstrip(".") for e in extensions}
    found = [p for p in root.rglob("*") if p.is_file() and p.suffix.lower().lstrip(".") in exts]
    found.sort(key=lambda p: p.relative_to(root).as_posix())
    if not found:
        raise EmptyDatasetError(f"no images with extensions {sorted(exts)} under {root}")
    ids = [image_id_for(root, p) for p in found]
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        raise ValueError(f"several files map to the same image id: {dupes[:5]}")
    return found


def _fmt(v) -> str:
    # repr round-trips exactly and spells non-finite values inf/-inf/nan.
    return repr(float(v))


def curves_csv(curves: SweepCurves) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CURVES_HEADER)
    for i, t in enumerate(curves.thresholds):
        w.writerow([int(t), _fmt(curves.otsu[i]), _fmt(curves.kapur[i]), _fmt(curves.ssim[i]), _fmt(curves.psnr[i])])
    return buf.getvalue()


def write_curves_csv(curves: SweepCurves, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(curves_csv(curves), encoding="utf-8", newline="")


def read_curves_csv(path, image_id: str = "", rule=ReconstructionRule.CLASS_MEAN) -> SweepCurves:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CURVES_HEADER:
        raise ValueError(f"{path}: unexpected curves header {rows[0] if rows else None}")
    data = np.array([[float(v) for v in row] for row in rows[1:]], dtype=np.float64)
    return SweepCurves(
        thresholds=data[:, 0].astype(np.int64),
        otsu=data[:, 1],
        kapur=data[:, 2],
        ssim=data[:, 3],
        psnr=data[:, 4],
        image_id=image_id,
        rule=rule,
    )


def correlations_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CORRELATIONS_HEADER)
    for r in sorted(records, key=lambda r: r.image_id):
        w.writerow(
            [
                r.image_id,
                _fmt(r.rho_otsu_ssim),
                _fmt(r.rho_otsu_psnr),
                _fmt(r.rho_kapur_ssim),
                _fmt(r.rho_kapur_psnr),
                int(r.dropped_points),
            ]
        )
    return buf.getvalue()


def write_correlations_csv(records, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(correlations_csv(records), encoding="utf-8", newline="")


def read_correlations_csv(path) -> list[CorrelationRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CORRELATIONS_HEADER:
            raise ValueError(f"{path}: unexpected correlations header {header}")
        return [
            CorrelationRecord(
                image_id=row[0],
                rho_otsu_ssim=float(row[1]),
                rho_otsu_psnr=float(row[2]),
                rho_kapur_ssim=float(row[3]),
                rho_kapur_psnr=float(row[4]),
                dropped_points=int(row[5]),
            )
            for row in reader
            if row
        ]


def analyze_image(path, image_id: str, rule=ReconstructionRule.CLASS_MEAN, cfg: SsimConfig = DEFAULT_SSIM):
    """Decode, sweep and correlate one image file."""
    img = load_gray(path)
    curves = sweep_image(img, rule=rule, cfg=cfg, image_id=image_id)
    return curves, correlate(curves)


def _process(job):
    path, image_id, rule, cfg = job
    try:
        curves, record = analyze_image(path, image_id, rule, cfg)
    except Exception as exc:  # one bad file must not abort the run
        return image_id, None, None, f"{type(exc).__name__}: {exc}"
    return image_id, curves, record, None


def _worker_count(workers: int | None) -> int:
    return workers if workers is not None else (os.cpu_count() or 1)


def run_batch(cfg: RunConfig, progress=None) -> tuple[AggregateReport, list[CorrelationRecord]]:
    """Sweep and correlate every image under ``cfg.dataset_root``.

    Writes per-image curves, the correlations table, the JSON report and
    histogram plots into ``cfg.output_dir``. Images that fail to decode or
    are too small are listed in the report's ``skipped`` field.
    """
    from .plots import emit_histograms

    paths = discover_images(cfg.dataset_root, cfg.image_extensions)
    jobs = [(p, image_id_for(cfg.dataset_root, p), cfg.rule, cfg.ssim) for p in paths]
    n_workers = min(_worker_count(cfg.workers), len(jobs))
    log.info("processing %d images with %d worker(s)", len(jobs), n_workers)

    if n_workers == 1:
        results = map(_process, jobs)
        pool = None
    else:
        pool = ProcessPoolExecutor(max_workers=n_workers)
        results = pool.map(_process, jobs, chunksize=1)
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    records = []
    skipped = []
    try:
        for done, (image_id, curves, record, error) in enumerate(results, 1):
            if error is not None:
                log.warning("skipping %s: %s", image_id, error)
                skipped.append({"image_id": image_id, "error": error})
            else:
                write_curves_csv(curves, out / "curves" / f"{image_id}.csv")
                records.append(record)
            if progress is not None:
                progress(done, len(jobs), image_id)
    finally:
        if pool is not None:
            pool.shutdown()

    records.sort(key=lambda r: r.image_id)
    skipped.sort(key=lambda s: s["image_id"])
    write_correlations_csv(records, out / "correlations.csv")
    if not records:
        raise EmptyDatasetError(f"every image under {cfg.dataset_root} failed to process")
    report = aggregate(records, cfg.histogram_bins, skipped=skipped, config=cfg.to_dict())
    (out / "report.json").write_text(report.to_json(), encoding="utf-8", newline="")
    emit_histograms(report, out / "plots")
    return report, records
