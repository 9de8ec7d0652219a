"""Synthetic ECG-like pulse trains for end-to-end pipeline checks.

Regular trains (NOT_AFIB surrogate) keep the beat period within a small
jitter band; irregular trains (AFIB surrogate) draw a large per-beat
jitter, mimicking the erratic RR intervals of fibrillation.
"""

from __future__ import annotations

import numpy as np

from .windowing import AFIB, NOT_AFIB, LabeledWindow


def pulse_train(
    rng: np.random.Generator,
    n_samples: int,
    fs: float,
    base_period_s: float,
    jitter: float,
    pulse_width_s: float = 0.02,
    noise_mv: float = 0.02,
) -> np.ndarray:
    """One window of gaussian QRS-like pulses with multiplicative RR jitter."""
    t = np.arange(n_samples) / fs
    signal = np.zeros(n_samples)
    # random phase so pulses are not aligned across windows
    beat_t = rng.uniform(0, base_period_s)
    while beat_t < n_samples / fs:
        signal += np.exp(-0.5 * ((t - beat_t) / pulse_width_s) ** 2)
        rr = base_period_s * (1.0 + rng.uniform(-jitter, jitter))
        beat_t += rr
    return signal + noise_mv * rng.standard_normal(n_samples)


def make_synthetic_windows(
    n_windows: int,
    fs: float = 250.0,
    window_s: float = 6.0,
    seed: int = 0,
    regular_jitter: float = 0.01,
    base_period_s: float = 0.8,
) -> list[LabeledWindow]:
    """Half regular-RR (NOT_AFIB) and half irregular-RR (AFIB) windows.

    Regular windows jitter the period by under 2%; irregular windows draw
    a per-window jitter uniformly from [0.15, 0.40]. The base period is
    fixed (75 bpm default) so jitter is the sole discriminating feature.
    """
    rng = np.random.default_rng(seed)
    n_samples = round(window_s * fs)
    windows = []
    for i in range(n_windows):
        irregular = i % 2 == 1
        jitter = rng.uniform(0.15, 0.40) if irregular else regular_jitter
        samples = pulse_train(rng, n_samples, fs, base_period_s, jitter)
        windows.append(
            LabeledWindow(
                record_id="synth-afib" if irregular else "synth-reg",
                start_sample=i * n_samples,
                samples=samples,
                label=AFIB if irregular else NOT_AFIB,
            )
        )
    return windows
