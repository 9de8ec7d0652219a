"""Baseline CLI: `extract` images to features, `crossval` features to metrics.

    afib-baseline extract --images DIR --manifest manifest.csv \
        --weights densenet201.pth --out features.csv
    afib-baseline crossval --features features.csv --out metrics.csv
"""

from __future__ import annotations

import argparse
import sys

from .errors import BaselineError


def cmd_extract(args) -> int:
    from .features import extract_features, load_backbone, write_features_csv

    backbone = load_backbone(args.weights, args.untrained_seed)
    rows = extract_features(
        args.images,
        args.manifest,
        backbone,
        batch_size=args.batch_size,
        colormap=args.colormap,
    )
    write_features_csv(args.out, rows)
    source = "pretrained" if args.weights else f"untrained(seed={args.untrained_seed})"
    print(f"extracted {len(rows)} feature rows ({source} backbone) -> {args.out}")
    return 0


def cmd_crossval(args) -> int:
    from .features import read_features_csv
    from .svm import crossval, metrics_csv_rows, summarize, write_metrics_csv

    rows = read_features_csv(args.features)
    results = crossval(rows, k=args.k, seed=args.seed, C=args.C)
    write_metrics_csv(args.out, metrics_csv_rows(args.run_id, results))
    mean, std = summarize(results)
    for name in ("sensitivity", "specificity", "accuracy"):
        if name in mean:
            print(f"{name}: {100 * mean[name]:.2f}% ± {100 * std[name]:.2f}")
    print(f"metrics: {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="afib-baseline",
        description="Deep-feature + linear SVM baseline over exported spectrograms",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ext = sub.add_parser("extract", help="extract 1920-value features per image")
    p_ext.add_argument("--images", required=True, help="exported PGM directory")
    p_ext.add_argument("--manifest", required=True, help="windowing manifest CSV")
    p_ext.add_argument("--out", default="features.csv")
    p_ext.add_argument("--weights", help="path to pretrained backbone state dict")
    p_ext.add_argument("--untrained-seed", type=int,
                       help="use a deterministically initialized untrained backbone")
    p_ext.add_argument("--colormap", action="store_true",
                       help="colormap grayscale input instead of replicating channels")
    p_ext.add_argument("--batch-size", type=int, default=16)
    p_ext.set_defaults(func=cmd_extract)

    p_cv = sub.add_parser("crossval", help="k-fold linear SVM over a features CSV")
    p_cv.add_argument("--features", required=True)
    p_cv.add_argument("--out", default="metrics.csv")
    p_cv.add_argument("--k", type=int, default=5)
    p_cv.add_argument("--seed", type=int, default=0)
    p_cv.add_argument("--C", type=float, default=1.0)
    p_cv.add_argument("--run-id", default="baseline0")
    p_cv.set_defaults(func=cmd_crossval)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BaselineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: missing file {exc.filename}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
