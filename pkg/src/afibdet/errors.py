"""Exception hierarchy shared across the toolkit."""


class AfibError(Exception):
    """Base class for all toolkit errors."""


# --- WFDB ingestion ---

class MalformedHeader(AfibError):
    pass


class UnsupportedFormat(AfibError):
    pass


class TruncatedSignalFile(AfibError):
    pass


class TruncatedAnnotationStream(AfibError):
    pass


class AuxOverrun(AfibError):
    pass


# --- windowing / datasets ---

class RecordTooShort(AfibError):
    pass


class EmptyDataset(AfibError):
    pass


class SingleClassDataset(AfibError):
    pass


# --- spectrogram ---

class SignalTooShort(AfibError):
    pass


class IoFailure(AfibError):
    pass


# --- network kernels ---

class ShapeMismatch(AfibError):
    pass


class OddSpatialDim(AfibError):
    pass


class BatchTooSmall(AfibError):
    pass


# --- evaluation harness ---

class TooFewItems(AfibError):
    pass


class TooFewFolds(AfibError):
    pass
