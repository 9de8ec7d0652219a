"""Linear SVM over deep features with 5-fold cross-validation.

Folds, metric definitions, and the CSV schema mirror the upstream
trainer so reports from both classifiers concatenate cleanly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.pipeline import Pipeline
from sklearn.preprocessing import StandardScaler
from sklearn.svm import LinearSVC

from .errors import DegenerateFold
from .features import FeatureRow

AFIB = "AFIB"

METRICS_CSV_HEADER = "run_id,classifier,fold,sensitivity,specificity,accuracy,tp,fp,tn,fn"


@dataclass(frozen=True)
class FoldMetrics:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def sensitivity(self) -> float | None:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else None

    @property
    def specificity(self) -> float | None:
        return self.tn / (self.tn + self.fp) if self.tn + self.fp else None

    @property
    def accuracy(self) -> float | None:
        total = self.tp + self.fp + self.tn + self.fn
        return (self.tp + self.tn) / total if total else None


def train_linear_svm(features: np.ndarray, labels: np.ndarray, C: float = 1.0):
    """Standardize-then-LinearSVC pipeline fit on the given fold.

    Features at this scale (n_samples << 1920) make the primal solver
    with per-feature standardization the stable choice.
    """
    if len(set(labels.tolist())) < 2:
        raise DegenerateFold("training fold contains a single class")
    clf = Pipeline([
        ("scale", StandardScaler()),
        ("svm", LinearSVC(C=C, dual=False, max_iter=20000)),
    ])
    clf.fit(features, labels)
    return clf


def kfold_indices(n: int, k: int, seed: int) -> list[np.ndarray]:
    """Shuffled fold index arrays; earlier folds absorb the remainder."""
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    base, extra = divmod(n, k)
    folds = []
    pos = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        folds.append(perm[pos : pos + size])
        pos += size
    return folds


def crossval(
    rows: list[FeatureRow],
    k: int = 5,
    seed: int = 0,
    C: float = 1.0,
) -> list[FoldMetrics]:
    """k-fold CV; each held-out fold yields one confusion-count record."""
    X = np.stack([r.features for r in rows]).astype(np.float64)
    y = np.array([1 if r.label == AFIB else 0 for r in rows])
    folds = kfold_indices(len(rows), k, seed)
    results = []
    for i, test_idx in enumerate(folds):
        train_idx = np.concatenate([f for j, f in enumerate(folds) if j != i])
        clf = train_linear_svm(X[train_idx], y[train_idx], C=C)
        pred = clf.predict(X[test_idx])
        truth = y[test_idx]
        results.append(FoldMetrics(
            tp=int(np.sum((pred == 1) & (truth == 1))),
            fp=int(np.sum((pred == 1) & (truth == 0))),
            tn=int(np.sum((pred == 0) & (truth == 0))),
            fn=int(np.sum((pred == 0) & (truth == 1))),
        ))
    return results


def summarize(results: list[FoldMetrics]) -> tuple[dict, dict]:
    """Mean and sample (n-1) std of each defined metric across folds."""
    mean: dict[str, float] = {}
    std: dict[str, float] = {}
    for name in ("sensitivity", "specificity", "accuracy"):
        values = [getattr(m, name) for m in results if getattr(m, name) is not None]
        if values:
            mean[name] = float(np.mean(values))
            std[name] = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
    return mean, std


def metrics_csv_rows(run_id: str, results: list[FoldMetrics],
                     classifier: str = "svm") -> list[str]:
    rows = []
    for fold, m in enumerate(results):
        ratios = ",".join(
            "" if v is None else f"{v:.6f}"
            for v in (m.sensitivity, m.specificity, m.accuracy)
        )
        rows.append(f"{run_id},{classifier},{fold},{ratios},{m.tp},{m.fp},{m.tn},{m.fn}")
    return rows


def write_metrics_csv(path: str, rows: list[str]) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write(METRICS_CSV_HEADER + "\n")
        for row in rows:
            f.write(row + "\n")
