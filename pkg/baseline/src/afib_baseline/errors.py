"""Errors raised by the baseline pipeline."""


class BaselineError(Exception):
    """Base class for baseline pipeline failures."""


class MissingWeights(BaselineError):
    """No backbone weights were supplied and no fallback was requested."""


class ImageDecodeError(BaselineError):
    """An input image could not be read or has an unexpected shape."""


class DegenerateFold(BaselineError):
    """A cross-validation training fold contains only one class."""
