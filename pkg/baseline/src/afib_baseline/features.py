"""Deep feature extraction from exported spectrogram images.

Each grayscale image is replicated to three channels (or colormapped with
``--colormap``), resized to the backbone's 224x224 input, normalized with
the standard ImageNet statistics, and pushed through a 201-layer densely
connected backbone. The global-average-pooled output of the final feature
map is a 1920-value vector per image.

Images arrive via the upstream CLI's export directory plus its manifest
CSV (``record_id,start_sample,label,split``); filenames follow the
exporter's ``{record}_{start}_{label}.pgm`` convention.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import BaselineError, ImageDecodeError, MissingWeights

FEATURE_DIM = 1920

_IMAGENET_MEAN = (0.485, 0.456, 0.406)
_IMAGENET_STD = (0.229, 0.224, 0.225)


@dataclass(frozen=True)
class FeatureRow:
    window_id: str
    features: np.ndarray  # shape (1920,), float32
    label: str


@dataclass(frozen=True)
class ManifestEntry:
    record_id: str
    start_sample: int
    label: str
    split: str

    @property
    def window_id(self) -> str:
        return f"{self.record_id}:{self.start_sample}"


def read_manifest(path: str) -> list[ManifestEntry]:
    with open(path, "r", encoding="ascii", newline="") as f:
        reader = csv.DictReader(f)
        return [
            ManifestEntry(r["record_id"], int(r["start_sample"]), r["label"], r["split"])
            for r in reader
        ]


def load_backbone(weights_path: str | None = None, untrained_seed: int | None = None):
    """201-layer densely connected backbone in eval mode.

    Pass `weights_path` for a pretrained state dict. `untrained_seed`
    builds a deterministically initialized untrained backbone instead —
    useful offline; features are then random projections, not learned
    ones, which is fine for sanity checks but weaker as a classifier
    input. With neither, MissingWeights is raised.
    """
    import torch
    from torchvision.models import densenet201

    if weights_path is not None:
        model = densenet201(weights=None)
        state = torch.load(weights_path, map_location="cpu", weights_only=True)
        model.load_state_dict(state)
    elif untrained_seed is not None:
        torch.manual_seed(untrained_seed)
        model = densenet201(weights=None)
    else:
        raise MissingWeights(
            "no backbone weights: pass weights_path or untrained_seed"
        )
    model.eval()
    return model


def read_image(path: str) -> np.ndarray:
    """Grayscale image as float64 in [0, 1], shape (H, W)."""
    try:
        with Image.open(path) as img:
            arr = np.asarray(img.convert("L"), dtype=np.float64)
    except (OSError, ValueError) as exc:
        raise ImageDecodeError(f"{path}: {exc}") from exc
    if arr.ndim != 2 or arr.size == 0:
        raise ImageDecodeError(f"{path}: expected a non-empty 2-D image")
    return arr / 255.0


def _colormap(gray: np.ndarray) -> np.ndarray:
    """Map a (N, H, W) grayscale batch to (N, 3, H, W) RGB via viridis."""
    from matplotlib import colormaps

    rgba = colormaps["viridis"](gray)  # (N, H, W, 4)
    return np.ascontiguousarray(rgba[..., :3].transpose(0, 3, 1, 2))


def extract_features(
    image_dir: str,
    manifest_path: str,
    backbone,
    batch_size: int = 16,
    colormap: bool = False,
) -> list[FeatureRow]:
    """One 1920-value feature row per manifest window, in manifest order."""
    import torch
    import torch.nn.functional as F

    entries = read_manifest(manifest_path)
    mean = torch.tensor(_IMAGENET_MEAN).view(3, 1, 1)
    std = torch.tensor(_IMAGENET_STD).view(3, 1, 1)
    rows: list[FeatureRow] = []
    with torch.no_grad():
        for i in range(0, len(entries), batch_size):
            chunk = entries[i : i + batch_size]
            gray = np.stack([
                read_image(os.path.join(
                    image_dir, f"{e.record_id}_{e.start_sample}_{e.label}.pgm"))
                for e in chunk
            ])
            if colormap:
                x = torch.from_numpy(_colormap(gray)).float()
            else:
                x = torch.from_numpy(gray).float().unsqueeze(1).repeat(1, 3, 1, 1)
            # full-image resize: spectrogram time/frequency extent is
            # informative out to the edges, so no center crop
            x = F.interpolate(x, size=(224, 224), mode="bilinear", align_corners=False)
            x = (x - mean) / std
            fmap = F.relu(backbone.features(x))
            pooled = F.adaptive_avg_pool2d(fmap, 1).flatten(1).numpy()
            for entry, vec in zip(chunk, pooled):
                rows.append(FeatureRow(entry.window_id, vec.astype(np.float32), entry.label))
    return rows


def write_features_csv(path: str, rows: list[FeatureRow]) -> None:
    header = ["window_id"] + [f"f{i:04d}" for i in range(FEATURE_DIM)] + ["label"]
    with open(path, "w", encoding="ascii", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([row.window_id, *(repr(float(v)) for v in row.features),
                             row.label])


def read_features_csv(path: str) -> list[FeatureRow]:
    with open(path, "r", encoding="ascii", newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if len(header) != FEATURE_DIM + 2:
            raise BaselineError(
                f"{path}: expected {FEATURE_DIM + 2} columns, found {len(header)}")
        return [
            FeatureRow(r[0], np.array(r[1:-1], dtype=np.float32), r[-1])
            for r in reader
        ]
