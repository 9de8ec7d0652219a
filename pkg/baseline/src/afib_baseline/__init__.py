"""Deep-feature + linear SVM baseline for AFIB spectrogram classification.

Consumes the spectrogram images and window manifest produced by the
`afibdet` CLI, extracts 1920-value deep features per image, and runs a
linear SVM under k-fold cross-validation, writing metrics in the same
CSV schema as the upstream trainer.
"""

__version__ = "0.1.0"
