"""Fixed-length window extraction, labeling, splitting, and batch planning."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyDataset, RecordTooShort, SingleClassDataset
from .wfdb import AnnotatedRecord, Rhythm, RhythmInterval, to_physical

log = logging.getLogger(__name__)

AFIB = "AFIB"
NOT_AFIB = "NOT_AFIB"


@dataclass(frozen=True)
class LabeledWindow:
    record_id: str
    start_sample: int
    samples: np.ndarray  # millivolts, length window_s * fs
    label: str  # AFIB | NOT_AFIB

    @property
    def window_id(self) -> str:
        return f"{self.record_id}:{self.start_sample}"


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple[str, ...]
    test: tuple[str, ...]
    seed: int
    ratio: float


@dataclass(frozen=True)
class BatchPlan:
    batches: tuple[tuple[str, ...], ...]
    batch_size: int
    seed: int


def window_count(n_samples: int, window_len: int, stride: int) -> int:
    return (n_samples - window_len) // stride + 1


def label_window(start: int, end: int, intervals: list[RhythmInterval]) -> str:
    """AFIB iff the window [start, end) overlaps any AFIB interval by >= 1 sample."""
    for iv in intervals:
        if iv.label is Rhythm.AFIB and iv.start_sample < end and start < iv.end_sample:
            return AFIB
    return NOT_AFIB


def extract_windows(
    record: AnnotatedRecord,
    window_s: float = 6.0,
    stride_s: float = 1.0,
    channel: int = 0,
) -> list[LabeledWindow]:
    """Slice a record into labeled windows at a fixed stride.

    The first channel stands in for the Lead I waveform; samples come out in
    millivolts.
    """
    fs = record.header.sampling_frequency
    W = round(window_s * fs)
    S = round(stride_s * fs)
    n = record.header.n_samples
    if n < W:
        raise RecordTooShort(f"record {record.header.record_name}: {n} samples < window {W}")
    spec = record.header.signals[channel]
    mv = to_physical(record.digital[channel], spec.gain, spec.adc_zero)
    windows = []
    for i in range(window_count(n, W, S)):
        start = i * S
        windows.append(
            LabeledWindow(
                record_id=record.header.record_name,
                start_sample=start,
                samples=mv[start : start + W],
                label=label_window(start, start + W, record.rhythm_intervals),
            )
        )
    return windows


def split_dataset(windows: list[LabeledWindow], ratio: float = 0.7, seed: int = 0) -> DatasetSplit:
    """Random window-level train/test split, deterministic under seed."""
    if not windows:
        raise EmptyDataset("no windows to split")
    ids = [w.window_id for w in windows]
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(ids))
    n_train = int(np.ceil(ratio * len(ids)))
    train = tuple(ids[i] for i in perm[:n_train])
    test = tuple(ids[i] for i in perm[n_train:])
    if not test:
        log.warning("split ratio %g leaves the test set empty", ratio)
    return DatasetSplit(train=train, test=test, seed=seed, ratio=ratio)


def split_by_record(windows: list[LabeledWindow], ratio: float = 0.7, seed: int = 0) -> DatasetSplit:
    """Stricter split assigning whole records to one side."""
    if not windows:
        raise EmptyDataset("no windows to split")
    records = sorted({w.record_id for w in windows})
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(records))
    n_train = int(np.ceil(ratio * len(records)))
    train_records = {records[i] for i in perm[:n_train]}
    train = tuple(w.window_id for w in windows if w.record_id in train_records)
    test = tuple(w.window_id for w in windows if w.record_id not in train_records)
    if not test:
        log.warning("record-level split ratio %g leaves the test set empty", ratio)
    return DatasetSplit(train=train, test=test, seed=seed, ratio=ratio)


def balanced_batches(
    train_windows: list[LabeledWindow], batch_size: int, seed: int
) -> BatchPlan:
    """Plan one epoch of class-balanced batches.

    Each batch holds ceil(size/2) AFIB and floor(size/2) NOT_AFIB ids; the
    minority class is resampled with replacement to the majority count. The
    trailing partial batch is dropped.
    """
    afib = [w.window_id for w in train_windows if w.label == AFIB]
    other = [w.window_id for w in train_windows if w.label == NOT_AFIB]
    if not afib or not other:
        raise SingleClassDataset("balanced batching needs both classes present")
    rng = np.random.default_rng(seed)
    n = max(len(afib), len(other))

    def epoch_ids(ids: list[str]) -> list[str]:
        shuffled = [ids[i] for i in rng.permutation(len(ids))]
        if len(shuffled) < n:
            extra = rng.integers(0, len(ids), size=n - len(shuffled))
            shuffled += [ids[i] for i in extra]
        return shuffled

    pos = epoch_ids(afib)
    neg = epoch_ids(other)
    n_pos = (batch_size + 1) // 2
    n_neg = batch_size // 2
    n_batches = min(len(pos) // n_pos, len(neg) // n_neg) if n_neg else len(pos) // n_pos
    batches = []
    for b in range(n_batches):
        batch = pos[b * n_pos : (b + 1) * n_pos] + neg[b * n_neg : (b + 1) * n_neg]
        batches.append(tuple(batch))
    return BatchPlan(batches=tuple(batches), batch_size=batch_size, seed=seed)


def write_manifest(path: str, windows: list[LabeledWindow], split: DatasetSplit) -> None:
    """Write the window manifest: `record_id,start_sample,label,split` per line."""
    train_ids = set(split.train)
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write("record_id,start_sample,label,split\n")
        for w in windows:
            part = "train" if w.window_id in train_ids else "test"
            f.write(f"{w.record_id},{w.start_sample},{w.label},{part}\n")
