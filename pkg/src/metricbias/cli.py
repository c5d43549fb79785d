"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 dataset or I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .dataset import (
    DEFAULT_EXTENSIONS,
    RunConfig,
    aggregate,
    analyze_image,
    read_correlations_csv,
    run_batch,
    write_correlations_csv,
    write_curves_csv,
)
from .image import histogram, load_gray
from .metrics import SsimConfig
from .objectives import MAX_EXHAUSTIVE_K, OBJECTIVES, ReconstructionRule, exhaustive_search

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _workers(value: str):
    if value == "auto":
        return None
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1 or 'auto'")
    return n


def _rule_arg(p):
    p.add_argument(
        "--rule",
        choices=[r.value for r in ReconstructionRule],
        default=ReconstructionRule.CLASS_MEAN.value,
        help="how a thresholded image is rendered for SSIM/PSNR (default: class-mean)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="metricbias",
        description="Correlate Otsu/Kapur thresholding objectives with SSIM/PSNR over every threshold.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="sweep one image and correlate its curves")
    p.add_argument("image", type=Path)
    _rule_arg(p)
    p.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
    p.add_argument("--plots", action="store_true", help="also write normalized overlay SVGs")

    p = sub.add_parser("batch", help="run the full pipeline over a dataset directory")
    p.add_argument("dataset_root", type=Path)
    p.add_argument("--out", type=Path, required=True)
    _rule_arg(p)
    p.add_argument("--workers", type=_workers, default=None, help="worker processes or 'auto' (default)")
    p.add_argument("--bins", type=int, default=20, help="correlation histogram bins over [-1, 1]")
    p.add_argument("--ext", nargs="+", default=list(DEFAULT_EXTENSIONS), help="image extensions")

    p = sub.add_parser("report", help="recompute aggregates and plots from a correlations CSV")
    p.add_argument("correlations", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--bins", type=int, default=20)

    p = sub.add_parser("threshold", help="exhaustive optimal thresholds for one image")
    p.add_argument("image", type=Path)
    p.add_argument("-K", dest="k", type=int, required=True, help=f"number of thresholds (1..{MAX_EXHAUSTIVE_K})")
    p.add_argument("--objective", choices=sorted(OBJECTIVES), default="otsu")
    return parser


def _cmd_analyze(args) -> int:
    image_id = args.image.stem
    curves, record = analyze_image(args.image, image_id, ReconstructionRule(args.rule))
    write_curves_csv(curves, args.out / f"{image_id}_curves.csv")
    write_correlations_csv([record], args.out / f"{image_id}_correlations.csv")
    if args.plots:
        from .plots import emit_overlays

        emit_overlays(curves, args.out, record)
    print(
        f"{image_id}: otsu-ssim={record.rho_otsu_ssim:.4f} otsu-psnr={record.rho_otsu_psnr:.4f} "
        f"kapur-ssim={record.rho_kapur_ssim:.4f} kapur-psnr={record.rho_kapur_psnr:.4f} "
        f"dropped={record.dropped_points}"
    )
    return EXIT_OK


def _summary(report) -> str:
    lines = [f"images: {report.total_images} (skipped {len(report.skipped)})"]
    for name, s in report.pairs.items():
        if s.mean is None:
            lines.append(f"{name:12s} undefined for all images")
        else:
            lines.append(f"{name:12s} {s.mean:.4f} ± {s.std:.4f}  (defined {s.defined}, undefined {s.undefined})")
    for metric, w in report.wins.items():
        lines.append(f"wins {metric}: otsu {w.otsu}, kapur {w.kapur}, ties {w.ties}, undefined {w.undefined}")
    return "\n".join(lines)


def _cmd_batch(args) -> int:
    cfg = RunConfig(
        dataset_root=args.dataset_root,
        output_dir=args.out,
        rule=ReconstructionRule(args.rule),
        ssim=SsimConfig(),
        workers=args.workers,
        histogram_bins=args.bins,
        image_extensions=tuple(args.ext),
    )
    report, _ = run_batch(cfg)
    print(_summary(report))
    return EXIT_OK


def _cmd_report(args) -> int:
    from .plots import emit_histograms

    records = read_correlations_csv(args.correlations)
    if not records:
        raise ValueError(f"{args.correlations} holds no records")
    report = aggregate(records, args.bins, config={"source": str(args.correlations), "histogram_bins": args.bins})
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "report.json").write_text(report.to_json(), encoding="utf-8", newline="")
    emit_histograms(report, args.out / "plots")
    print(_summary(report))
    return EXIT_OK


def _cmd_threshold(args) -> int:
    h = histogram(load_gray(args.image))
    tset, value = exhaustive_search(h, args.k, args.objective)
    print(json.dumps({"objective": args.objective, "thresholds": list(tset.thresholds), "value": value}))
    return EXIT_OK


_COMMANDS = {"analyze": _cmd_analyze, "batch": _cmd_batch, "report": _cmd_report, "threshold": _cmd_threshold}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "threshold" and not 1 <= args.k <= MAX_EXHAUSTIVE_K:
        parser.error(f"-K must be between 1 and {MAX_EXHAUSTIVE_K}")
    if getattr(args, "bins", 2) < 2:
        parser.error("--bins must be >= 2")
    try:
        return _COMMANDS[args.command](args)
    except (OSError, ValueError) as exc:
        print(f"metricbias: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
