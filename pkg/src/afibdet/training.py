"""Training orchestration, evaluation metrics, and the k-fold harness."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import EmptyDataset, SingleClassDataset, TooFewFolds, TooFewItems
from .nn.layers import Mode
from .nn.model import AFIB_CLASS, ConvNet, TrainConfig, one_hot
from .nn.optim import Adam
from .spectrogram import StftParams, window_to_image
from .windowing import AFIB, BatchPlan, DatasetSplit, LabeledWindow, balanced_batches

log = logging.getLogger(__name__)

METRICS_CSV_HEADER = "run_id,classifier,fold,sensitivity,specificity,accuracy,tp,fp,tn,fn"


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class EvalMetrics:
    confusion: ConfusionMatrix
    sensitivity: float | None  # None when the denominator is zero
    specificity: float | None
    accuracy: float | None

    @classmethod
    def from_confusion(cls, cm: ConfusionMatrix) -> "EvalMetrics":
        sens = cm.tp / (cm.tp + cm.fn) if cm.tp + cm.fn else None
        spec = cm.tn / (cm.tn + cm.fp) if cm.tn + cm.fp else None
        acc = (cm.tp + cm.tn) / cm.total if cm.total else None
        return cls(cm, sens, spec, acc)


@dataclass(frozen=True)
class FoldReport:
    folds: tuple[EvalMetrics, ...]
    mean: dict[str, float]
    std: dict[str, float]  # sample standard deviation, n-1 denominator


@dataclass(frozen=True)
class EpochLogEntry:
    epoch: int
    mean_loss: float
    train_accuracy: float


class ImageCache:
    """Lazily renders and memoizes per-window spectrogram images."""

    def __init__(self, windows_by_id: dict[str, LabeledWindow], params: StftParams):
        self.windows_by_id = windows_by_id
        self.params = params
        self._images: dict[str, np.ndarray] = {}

    def image(self, window_id: str) -> np.ndarray:
        if window_id not in self._images:
            self._images[window_id] = window_to_image(
                self.windows_by_id[window_id].samples, self.params
            )
        return self._images[window_id]

    def batch(self, ids: tuple[str, ...]) -> np.ndarray:
        return np.stack([self.image(i) for i in ids])[:, None, :, :]

    def labels(self, ids: tuple[str, ...]) -> np.ndarray:
        return np.array(
            [AFIB_CLASS if self.windows_by_id[i].label == AFIB else 0 for i in ids]
        )


def train(
    model: ConvNet,
    optimizer: Adam,
    windows: list[LabeledWindow],
    split: DatasetSplit,
    config: TrainConfig,
    stft_params: StftParams = StftParams(),
) -> list[EpochLogEntry]:
    """Run the epoch loop over class-balanced batches; returns the epoch log.

    Each epoch gets a fresh BatchPlan under an epoch-dependent seed, so the
    whole run is deterministic under (config.seed, thread policy).
    """
    by_id = {w.window_id: w for w in windows}
    train_windows = [by_id[i] for i in split.train]
    if not train_windows:
        raise EmptyDataset("empty training set")
    if len({w.label for w in train_windows}) < 2 and config.epochs > 0:
        raise SingleClassDataset("training needs both classes")
    cache = ImageCache(by_id, stft_params)

    entries: list[EpochLogEntry] = []
    for epoch in range(config.epochs):
        plan: BatchPlan = balanced_batches(
            train_windows, config.batch_size, seed=config.seed + 1 + epoch
        )
        losses = []
        correct = 0
        seen = 0
        for ids in plan.batches:
            x = cache.batch(ids)
            y = cache.labels(ids)
            loss, logits = model.loss_and_backward(x, one_hot(y))
            optimizer.step(model.parameters(), model.gradients())
            losses.append(loss)
            correct += int((logits.argmax(axis=1) == y).sum())
            seen += len(ids)
        entry = EpochLogEntry(
            epoch=epoch,
            mean_loss=float(np.mean(losses)) if losses else float("nan"),
            train_accuracy=correct / seen if seen else float("nan"),
        )
        entries.append(entry)
        log.info("epoch %d: loss %.5f, train acc %.4f",
                 entry.epoch, entry.mean_loss, entry.train_accuracy)
    return entries


def evaluate(
    model: ConvNet,
    test_windows: list[LabeledWindow],
    stft_params: StftParams = StftParams(),
    batch_size: int = 64,
) -> EvalMetrics:
    """INFER-mode evaluation; AFIB is the positive class."""
    if not test_windows:
        raise EmptyDataset("empty test set")
    by_id = {w.window_id: w for w in test_windows}
    cache = ImageCache(by_id, stft_params)
    ids = tuple(by_id)
    tp = fp = tn = fn = 0
    for i in range(0, len(ids), batch_size):
        chunk = ids[i : i + batch_size]
        labels, _ = model.predict(cache.batch(chunk))
        truth = cache.labels(chunk)
        tp += int(((labels == 1) & (truth == 1)).sum())
        fp += int(((labels == 1) & (truth == 0)).sum())
        tn += int(((labels == 0) & (truth == 0)).sum())
        fn += int(((labels == 0) & (truth == 1)).sum())
    return EvalMetrics.from_confusion(ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn))


def kfold_split(items: list, k: int = 5, seed: int = 0) -> list[list]:
    """Random permutation then k near-equal disjoint folds."""
    if k < 2:
        raise TooFewFolds(f"k must be >= 2, got {k}")
    if len(items) < k:
        raise TooFewItems(f"{len(items)} items cannot fill {k} folds")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(items))
    base, extra = divmod(len(items), k)
    folds = []
    pos = 0
    for f in range(k):
        size = base + (1 if f < extra else 0)
        folds.append([items[i] for i in perm[pos : pos + size]])
        pos += size
    return folds


def aggregate(fold_metrics: list[EvalMetrics]) -> FoldReport:
    """Per-metric mean and sample standard deviation across folds."""
    if len(fold_metrics) < 2:
        raise TooFewFolds("aggregation needs at least 2 folds")
    mean, std = {}, {}
    for metric in ("sensitivity", "specificity", "accuracy"):
        values = [getattr(m, metric) for m in fold_metrics]
        if any(v is None for v in values):
            continue
        arr = np.array(values, dtype=np.float64)
        mean[metric] = float(arr.mean())
        std[metric] = float(arr.std(ddof=1))
    return FoldReport(folds=tuple(fold_metrics), mean=mean, std=std)


def metrics_csv_row(run_id: str, classifier: str, fold: int, m: EvalMetrics) -> str:
    def fmt(v):
        return "" if v is None else f"{v:.6f}"

    cm = m.confusion
    return (
        f"{run_id},{classifier},{fold},{fmt(m.sensitivity)},{fmt(m.specificity)},"
        f"{fmt(m.accuracy)},{cm.tp},{cm.fp},{cm.tn},{cm.fn}"
    )


def write_metrics_csv(path: str, rows: list[str]) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write(METRICS_CSV_HEADER + "\n")
        for row in rows:
            f.write(row + "\n")


def write_epoch_log(path: str, entries: list[EpochLogEntry]) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write("epoch,mean_loss,train_accuracy\n")
        for e in entries:
            f.write(f"{e.epoch},{e.mean_loss:.8f},{e.train_accuracy:.6f}\n")
