"""Command-line entry point: ingest, segment, spectrogram, train, eval, report.

Configuration is a flat `key = value` text file; command-line flags override
file values. Heavy imports happen after --threads is applied so the BLAS
thread pool honors the cap.
"""

from __future__ import annotations

import argparse
import glob
import os
import sys
from dataclasses import dataclass, field, fields


@dataclass
class RunConfig:
    data_dir: str = "."
    records: str = "all"  # comma-separated ids or "all"
    synthetic: int = 0  # when > 0, generate this many synthetic windows instead
    window_s: float = 6.0
    stride_s: float = 1.0
    ratio: float = 0.7
    split_by_record: bool = False
    seed: int = 0
    segment_len: int = 150
    hop: int = 75
    window_fn: str = "hann"
    log_compress: bool = True
    conv_filters: str = "8,16"
    fc_widths: str = "256,64"
    learning_rate: float = 1e-3
    dropout_keep: float = 0.5
    batch_size: int = 64
    epochs: int = 100
    out_dir: str = "runs"
    threads: int = 0  # 0 = leave the BLAS default alone


_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def parse_config_file(path: str) -> dict:
    """Parse flat `key = value` lines; '#' starts a comment."""
    known = {f.name: f.type for f in fields(RunConfig)}
    values = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#")[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise SystemExit(f"{path}:{lineno}: expected `key = value`, got {raw.rstrip()!r}")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in known:
                raise SystemExit(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = _coerce(key, value)
    return values


def _coerce(key: str, value: str):
    proto = getattr(RunConfig(), key)
    if isinstance(proto, bool):
        low = value.lower()
        if low in _BOOL_TRUE:
            return True
        if low in _BOOL_FALSE:
            return False
        raise SystemExit(f"config key {key}: not a boolean: {value!r}")
    if isinstance(proto, int):
        return int(value)
    if isinstance(proto, float):
        return float(value)
    return value


def load_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        for key, value in parse_config_file(args.config).items():
            setattr(cfg, key, value)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out_dir = args.out
    if args.threads is not None:
        cfg.threads = args.threads
    return cfg


def _apply_threads(n: int) -> None:
    if n > 0:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(n)


def _stft_params(cfg: RunConfig):
    from .spectrogram import StftParams, WindowFn

    return StftParams(
        segment_len=cfg.segment_len,
        hop=cfg.hop,
        window_fn=WindowFn(cfg.window_fn),
        log_compress=cfg.log_compress,
    )


def _int_pair(text: str) -> tuple[int, int]:
    parts = [int(p) for p in text.split(",")]
    if len(parts) != 2:
        raise SystemExit(f"expected two comma-separated integers, got {text!r}")
    return parts[0], parts[1]


def _resolve_records(cfg: RunConfig) -> list[str]:
    if cfg.records.strip().lower() == "all":
        names = sorted(
            os.path.splitext(os.path.basename(p))[0]
            for p in glob.glob(os.path.join(cfg.data_dir, "*.hea"))
        )
        if not names:
            raise SystemExit(f"no .hea files found in {cfg.data_dir}")
        return names
    return [r.strip() for r in cfg.records.split(",") if r.strip()]


def _load_windows(cfg: RunConfig):
    """Windows either from WFDB records on disk or the synthetic generator."""
    from . import wfdb, windowing
    from .errors import AfibError
    from .synthetic import make_synthetic_windows

    if cfg.synthetic > 0:
        return make_synthetic_windows(
            cfg.synthetic, window_s=cfg.window_s, seed=cfg.seed
        )
    windows = []
    for name in _resolve_records(cfg):
        try:
            record = wfdb.read_record(cfg.data_dir, name)
        except FileNotFoundError as exc:
            raise SystemExit(f"record {name}: missing file {exc.filename}")
        except AfibError as exc:
            raise SystemExit(f"record {name}: {exc}")
        windows.extend(windowing.extract_windows(record, cfg.window_s, cfg.stride_s))
    return windows


def _split(cfg: RunConfig, windows):
    from . import windowing

    if cfg.split_by_record:
        return windowing.split_by_record(windows, cfg.ratio, cfg.seed)
    return windowing.split_dataset(windows, cfg.ratio, cfg.seed)


def cmd_ingest(cfg: RunConfig, args) -> int:
    from . import wfdb
    from .errors import AfibError

    total_afib_h = 0.0
    total_h = 0.0
    for name in _resolve_records(cfg):
        try:
            record = wfdb.read_record(cfg.data_dir, name)
        except FileNotFoundError as exc:
            print(f"error: record {name}: missing file {exc.filename}", file=sys.stderr)
            return 1
        except AfibError as exc:
            print(f"error: record {name}: {exc}", file=sys.stderr)
            return 1
        fs = record.header.sampling_frequency
        hours = record.header.n_samples / fs / 3600
        afib_samples = sum(
            iv.end_sample - iv.start_sample
            for iv in record.rhythm_intervals
            if iv.label is wfdb.Rhythm.AFIB
        )
        afib_h = afib_samples / fs / 3600
        total_h += hours
        total_afib_h += afib_h
        print(f"{name}: fs={fs:g} Hz, duration={hours:.2f} h, AFIB={afib_h:.2f} h")
    print(f"total: {total_h:.2f} h recorded, {total_afib_h:.2f} h AFIB")
    return 0


def cmd_segment(cfg: RunConfig, args) -> int:
    from .windowing import AFIB, write_manifest

    windows = _load_windows(cfg)
    split = _split(cfg, windows)
    os.makedirs(cfg.out_dir, exist_ok=True)
    manifest = os.path.join(cfg.out_dir, "manifest.csv")
    write_manifest(manifest, windows, split)
    n_train, n_test = len(split.train), len(split.test)
    n_afib = sum(1 for w in windows if w.label == AFIB)
    print(f"windows: {len(windows)} total ({n_afib} AFIB)")
    print(f"train: {n_train} ({n_train * cfg.window_s / 3600:.2f} h equivalent)")
    print(f"test: {n_test} ({n_test * cfg.window_s / 3600:.2f} h equivalent)")
    print(f"manifest: {manifest}")
    return 0


def cmd_spectrogram(cfg: RunConfig, args) -> int:
    from .spectrogram import export_pgm, window_to_image

    windows = _load_windows(cfg)
    if args.window_id:
        windows = [w for w in windows if w.window_id == args.window_id]
        if not windows:
            print(f"error: window id {args.window_id!r} not found", file=sys.stderr)
            return 1
    elif not args.all:
        print("error: pass --all or --window-id", file=sys.stderr)
        return 1
    export_dir = args.export or cfg.out_dir
    os.makedirs(export_dir, exist_ok=True)
    params = _stft_params(cfg)
    for w in windows:
        image = window_to_image(w.samples, params)
        name = f"{w.record_id}_{w.start_sample}_{w.label}.pgm"
        export_pgm(image, os.path.join(export_dir, name))
    print(f"exported {len(windows)} image(s) to {export_dir}")
    return 0


def _build_model(cfg: RunConfig):
    from .nn import Adam, ConvNet, ConvNetConfig

    model_cfg = ConvNetConfig(
        conv_filters=_int_pair(cfg.conv_filters),
        fc_widths=_int_pair(cfg.fc_widths),
        dropout_keep=cfg.dropout_keep,
    )
    model = ConvNet(model_cfg, seed=cfg.seed)
    optimizer = Adam({k: v.shape for k, v in model.parameters().items()},
                     learning_rate=cfg.learning_rate)
    return model, optimizer


def cmd_train(cfg: RunConfig, args) -> int:
    from .nn import TrainConfig, save_checkpoint
    from .training import train, write_epoch_log

    windows = _load_windows(cfg)
    split = _split(cfg, windows)
    model, optimizer = _build_model(cfg)
    train_cfg = TrainConfig(
        learning_rate=cfg.learning_rate,
        dropout_keep=cfg.dropout_keep,
        batch_size=cfg.batch_size,
        epochs=cfg.epochs,
        seed=cfg.seed,
    )
    entries = train(model, optimizer, windows, split, train_cfg, _stft_params(cfg))
    os.makedirs(cfg.out_dir, exist_ok=True)
    ckpt = os.path.join(cfg.out_dir, "model.afcn")
    save_checkpoint(ckpt, model, optimizer)
    log_path = os.path.join(cfg.out_dir, "epochs.csv")
    write_epoch_log(log_path, entries)
    print(f"checkpoint: {ckpt}")
    print(f"epoch log: {log_path}")
    if entries:
        last = entries[-1]
        print(f"final epoch: loss {last.mean_loss:.5f}, train acc {last.train_accuracy:.4f}")
    return 0


def cmd_eval(cfg: RunConfig, args) -> int:
    from .nn import load_checkpoint
    from .training import evaluate, metrics_csv_row, write_metrics_csv

    windows = _load_windows(cfg)
    split = _split(cfg, windows)
    model, _ = load_checkpoint(args.checkpoint)
    by_id = {w.window_id: w for w in windows}
    test_windows = [by_id[i] for i in split.test]
    metrics = evaluate(model, test_windows, _stft_params(cfg))
    os.makedirs(cfg.out_dir, exist_ok=True)
    csv_path = os.path.join(cfg.out_dir, "metrics.csv")
    row = metrics_csv_row(args.run_id, "convnet", 0, metrics)
    write_metrics_csv(csv_path, [row])

    def show(v):
        return "n/a" if v is None else f"{100 * v:.2f}%"

    cm = metrics.confusion
    print(f"sensitivity: {show(metrics.sensitivity)}")
    print(f"specificity: {show(metrics.specificity)}")
    print(f"accuracy: {show(metrics.accuracy)}")
    print(f"confusion: tp={cm.tp} fp={cm.fp} tn={cm.tn} fn={cm.fn}")
    print(f"metrics: {csv_path}")
    return 0


def cmd_report(cfg: RunConfig, args) -> int:
    from .training import METRICS_CSV_HEADER

    rows = []
    for path in args.csv:
        with open(path, "r", encoding="ascii") as f:
            lines = [ln.strip() for ln in f if ln.strip()]
        if not lines or lines[0] != METRICS_CSV_HEADER:
            print(f"error: {path}: unexpected metrics header", file=sys.stderr)
            return 1
        rows.extend(lines[1:])
    print(METRICS_CSV_HEADER)
    for row in rows:
        print(row)
    by_classifier: dict[str, list[list[float]]] = {}
    for row in rows:
        parts = row.split(",")
        if all(parts[3:6]):
            by_classifier.setdefault(parts[1], []).append([float(v) for v in parts[3:6]])
    for clf, values in sorted(by_classifier.items()):
        import numpy as np

        arr = np.array(values)
        # sample (n-1) standard deviation, zero for a single row
        std = arr.std(axis=0, ddof=1) if len(arr) > 1 else np.zeros(3)
        print(
            f"# {clf}: sens {100 * arr[:, 0].mean():.2f}±{100 * std[0]:.2f}  "
            f"spec {100 * arr[:, 1].mean():.2f}±{100 * std[1]:.2f}  "
            f"acc {100 * arr[:, 2].mean():.2f}±{100 * std[2]:.2f}  (n={len(arr)})"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="afibdet",
        description="Atrial fibrillation detection from ECG spectrograms",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="output directory")
        p.add_argument("--threads", type=int, help="cap BLAS worker threads")
        p.set_defaults(func=func)
        return p

    add("ingest", cmd_ingest, "parse records and summarize durations")
    add("segment", cmd_segment, "extract windows, split, write the manifest")
    p_spec = add("spectrogram", cmd_spectrogram, "render spectrogram images")
    p_spec.add_argument("--window-id", help="render a single window (record:start)")
    p_spec.add_argument("--all", action="store_true", help="render every window")
    p_spec.add_argument("--export", help="image output directory")
    add("train", cmd_train, "train the classifier, write checkpoint + epoch log")
    p_eval = add("eval", cmd_eval, "evaluate a checkpoint on the test split")
    p_eval.add_argument("checkpoint", help="path to a .afcn checkpoint")
    p_eval.add_argument("--run-id", default="run0")
    p_rep = add("report", cmd_report, "concatenate and summarize metrics CSVs")
    p_rep.add_argument("csv", nargs="+", help="metrics CSV files")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = load_config(args)
    _apply_threads(cfg.threads)
    if cfg.threads > 0:
        print(f"# threads capped at {cfg.threads} (part of reproducibility state)")
    return args.func(cfg, args)


if __name__ == "__main__":
    sys.exit(main())
