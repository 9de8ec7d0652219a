"""Atrial fibrillation detection from ECG spectrograms.

Pipeline: WFDB ingestion -> six-second window extraction -> STFT power
spectrograms rendered as 128x64 grayscale images -> a from-scratch
convolutional classifier trained with Adam.
"""

__version__ = "0.1.0"
