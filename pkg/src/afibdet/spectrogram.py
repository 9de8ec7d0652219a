"""STFT power spectrograms and their rendering as 128x64 grayscale images."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import IoFailure, SignalTooShort

IMAGE_HEIGHT = 64   # frequency rows, highest frequency at the top
IMAGE_WIDTH = 128   # time columns


class WindowFn(enum.Enum):
    HANN = "hann"
    RECTANGULAR = "rectangular"


@dataclass(frozen=True)
class StftParams:
    segment_len: int = 150
    hop: int = 75
    window_fn: WindowFn = WindowFn.HANN
    log_compress: bool = True

    def __post_init__(self):
        if not 0 < self.hop <= self.segment_len:
            raise ValueError(f"hop must be in (0, segment_len], got {self.hop}")

    @property
    def freq_bins(self) -> int:
        return self.segment_len // 2 + 1

    def taper(self) -> np.ndarray:
        if self.window_fn is WindowFn.RECTANGULAR:
            return np.ones(self.segment_len)
        return np.hanning(self.segment_len)


def stft(signal: np.ndarray, params: StftParams = StftParams()) -> np.ndarray:
    """One-sided STFT, shape [freq_bins x frames].

    Frame t, bin k is sum_n x[t*hop + n] * w[n] * exp(-i 2 pi k n / L).
    """
    x = np.asarray(signal, dtype=np.float64)
    L, hop = params.segment_len, params.hop
    if x.shape[0] < L:
        raise SignalTooShort(f"signal length {x.shape[0]} < segment length {L}")
    frames = (x.shape[0] - L) // hop + 1
    idx = np.arange(L)[None, :] + hop * np.arange(frames)[:, None]
    segments = x[idx] * params.taper()[None, :]
    return np.fft.rfft(segments, n=L, axis=1).T


def power_spectrogram(spectrum: np.ndarray) -> np.ndarray:
    """Magnitude squared of the STFT, elementwise."""
    return spectrum.real**2 + spectrum.imag**2


def _bilinear_resize(mat: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Align-corners bilinear resample of a 2-D array."""
    in_h, in_w = mat.shape
    ys = np.linspace(0.0, in_h - 1, out_h)
    xs = np.linspace(0.0, in_w - 1, out_w)
    y0 = np.clip(np.floor(ys).astype(int), 0, in_h - 2) if in_h > 1 else np.zeros(out_h, int)
    x0 = np.clip(np.floor(xs).astype(int), 0, in_w - 2) if in_w > 1 else np.zeros(out_w, int)
    fy = (ys - y0) if in_h > 1 else np.zeros(out_h)
    fx = (xs - x0) if in_w > 1 else np.zeros(out_w)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    top = mat[np.ix_(y0, x0)] * (1 - fx)[None, :] + mat[np.ix_(y0, x1)] * fx[None, :]
    bot = mat[np.ix_(y1, x0)] * (1 - fx)[None, :] + mat[np.ix_(y1, x1)] * fx[None, :]
    return top * (1 - fy)[:, None] + bot * fy[:, None]


def render_image(power: np.ndarray, log_compress: bool = True) -> np.ndarray:
    """Turn a power matrix into the 64x128 [0,1] grayscale classifier input.

    ln(1+p) compression, bilinear resize, per-image min-max normalization.
    Row 0 is the highest frequency (image convention); a constant input
    renders as all zeros.
    """
    v = np.log1p(power) if log_compress else np.asarray(power, dtype=np.float64)
    resized = _bilinear_resize(v, IMAGE_HEIGHT, IMAGE_WIDTH)
    flipped = resized[::-1, :]  # bin 0 (DC) ends up at the bottom row
    lo, hi = flipped.min(), flipped.max()
    # constant input (up to bilinear rounding noise) renders as all zeros
    if hi - lo <= 1e-12 * max(1.0, abs(hi)):
        return np.zeros((IMAGE_HEIGHT, IMAGE_WIDTH))
    return (flipped - lo) / (hi - lo)


def window_to_image(samples: np.ndarray, params: StftParams = StftParams()) -> np.ndarray:
    """Signal window -> spectrogram image, the full per-window pipeline."""
    return render_image(power_spectrogram(stft(samples, params)), params.log_compress)


def export_pgm(image: np.ndarray, path: str) -> None:
    """Write a [0,1] image as binary PGM (P5, maxval 255)."""
    pixels = np.rint(np.clip(image, 0.0, 1.0) * 255).astype(np.uint8)
    h, w = pixels.shape
    try:
        with open(path, "wb") as f:
            f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
            f.write(pixels.tobytes())
    except OSError as exc:
        raise IoFailure(f"cannot write PGM to {path}: {exc}") from exc


def import_pgm(path: str) -> np.ndarray:
    """Read a binary PGM back into a [0,1] float image."""
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as exc:
        raise IoFailure(f"cannot read PGM from {path}: {exc}") from exc
    # header: magic, width, height, maxval as whitespace-separated tokens
    tokens, i = [], 0
    while len(tokens) < 4:
        while i < len(data) and data[i : i + 1].isspace():
            i += 1
        if i < len(data) and data[i : i + 1] == b"#":
            while i < len(data) and data[i] != 0x0A:
                i += 1
            continue
        start = i
        while i < len(data) and not data[i : i + 1].isspace():
            i += 1
        tokens.append(data[start:i])
    i += 1  # single whitespace byte after maxval
    if tokens[0] != b"P5":
        raise IoFailure(f"{path} is not a binary PGM")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    pixels = np.frombuffer(data[i : i + w * h], dtype=np.uint8).reshape(h, w)
    return pixels.astype(np.float64) / maxval
