"""PhysioNet WFDB ingestion: header text, format-212 signals, MIT annotations.

Only signal format 212 (two 12-bit two's-complement samples packed into
three bytes) is supported; everything else raises UnsupportedFormat.
"""

from __future__ import annotations

import enum
import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AuxOverrun,
    MalformedHeader,
    TruncatedAnnotationStream,
    TruncatedSignalFile,
    UnsupportedFormat,
)

log = logging.getLogger(__name__)

DEFAULT_GAIN = 200.0  # WFDB default, ADC units per millivolt

# MIT annotation stream pseudo-codes (top 6 bits of each 16-bit word)
SKIP_CODE = 59
NUM_CODE = 60
SUB_CODE = 61
CHN_CODE = 62
AUX_CODE = 63
RHYTHM_CODE = 28  # '+' rhythm change


class Rhythm(enum.Enum):
    AFIB = "AFIB"
    AFL = "AFL"
    JUNCTIONAL = "JUNCTIONAL"
    NSR = "NSR"
    OTHER = "OTHER"


_AUX_TO_RHYTHM = {
    "(AFIB": Rhythm.AFIB,
    "(AFL": Rhythm.AFL,
    "(J": Rhythm.JUNCTIONAL,
    "(N": Rhythm.NSR,
}


@dataclass(frozen=True)
class SignalSpec:
    file_name: str
    format_code: int
    gain: float
    adc_zero: int
    description: str


@dataclass(frozen=True)
class RecordHeader:
    record_name: str
    n_signals: int
    sampling_frequency: float
    n_samples: int
    signals: tuple[SignalSpec, ...]


@dataclass(frozen=True)
class RhythmInterval:
    start_sample: int
    end_sample: int  # exclusive
    label: Rhythm


@dataclass(frozen=True)
class Annotation:
    sample: int
    code: int
    aux: str | None = None


@dataclass
class AnnotatedRecord:
    header: RecordHeader
    digital: list[np.ndarray]  # per-channel int arrays, ADC units
    rhythm_intervals: list[RhythmInterval] = field(default_factory=list)


def parse_header(text: str) -> RecordHeader:
    """Parse a WFDB .hea file into a RecordHeader.

    Expects the record line `name n_signals fs n_samples` followed by one
    signal-spec line per channel. Comment lines (leading '#') are skipped.
    """
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise MalformedHeader("header has no content lines")

    rec_tokens = lines[0].split()
    if len(rec_tokens) < 4:
        raise MalformedHeader(
            f"record line needs `name n_signals fs n_samples`, got {lines[0]!r}"
        )
    record_name = rec_tokens[0].split("/")[0]
    try:
        n_signals = int(rec_tokens[1])
        # fs may carry a counter-frequency suffix: "250/21600000"
        sampling_frequency = float(rec_tokens[2].split("/")[0])
        n_samples = int(rec_tokens[3])
    except ValueError as exc:
        raise MalformedHeader(f"non-numeric field in record line {lines[0]!r}") from exc
    if n_signals < 1:
        raise MalformedHeader(f"n_signals must be >= 1, got {n_signals}")
    if sampling_frequency <= 0:
        raise MalformedHeader(f"sampling frequency must be positive, got {sampling_frequency}")
    if len(lines) < 1 + n_signals:
        raise MalformedHeader(f"expected {n_signals} signal lines, found {len(lines) - 1}")

    specs = []
    for ln in lines[1 : 1 + n_signals]:
        specs.append(_parse_signal_line(ln))
    for spec in specs:
        if spec.format_code != 212:
            raise UnsupportedFormat(
                f"signal format {spec.format_code} not supported (only 212)"
            )
    if sampling_frequency != 360:
        # The originating study quotes 360 Hz; published MIT-BIH AFIB headers
        # say otherwise. The header is authoritative, but make it visible.
        log.warning(
            "record %s: header sampling frequency %g Hz differs from the often-quoted 360 Hz",
            record_name,
            sampling_frequency,
        )
    return RecordHeader(record_name, n_signals, sampling_frequency, n_samples, tuple(specs))


def _parse_signal_line(line: str) -> SignalSpec:
    tokens = line.split()
    if len(tokens) < 2:
        raise MalformedHeader(f"signal line too short: {line!r}")
    file_name = tokens[0]
    fmt_token = tokens[1]
    # strip optional xN / :N / +N modifiers
    for sep in "x:+":
        fmt_token = fmt_token.split(sep)[0]
    try:
        format_code = int(fmt_token)
    except ValueError as exc:
        raise MalformedHeader(f"non-numeric format in {line!r}") from exc

    gain = DEFAULT_GAIN
    baseline = None
    if len(tokens) >= 3:
        gain_token = tokens[2].split("/")[0]  # drop units suffix
        if "(" in gain_token:
            gain_part, base_part = gain_token.split("(", 1)
            if not base_part.endswith(")"):
                raise MalformedHeader(f"unclosed baseline in {line!r}")
            try:
                baseline = int(base_part[:-1])
            except ValueError as exc:
                raise MalformedHeader(f"non-numeric baseline in {line!r}") from exc
            gain_token = gain_part
        try:
            gain = float(gain_token)
        except ValueError as exc:
            raise MalformedHeader(f"non-numeric gain in {line!r}") from exc
        if gain == 0:
            gain = DEFAULT_GAIN

    adc_zero = 0
    if len(tokens) >= 5:
        try:
            adc_zero = int(tokens[4])
        except ValueError as exc:
            raise MalformedHeader(f"non-numeric ADC zero in {line!r}") from exc
    if baseline is not None:
        adc_zero = baseline

    description = " ".join(tokens[8:]) if len(tokens) > 8 else ""
    return SignalSpec(file_name, format_code, gain, adc_zero, description)


def decode_format212(data: bytes, n_samples: int, n_signals: int) -> list[np.ndarray]:
    """Unpack format-212 bytes into per-channel int16 arrays (ADC units)."""
    total = n_samples * n_signals
    needed = math.ceil(total * 3 / 2)
    if len(data) < needed:
        raise TruncatedSignalFile(
            f"need {needed} bytes for {total} samples, have {len(data)}"
        )
    buf = np.frombuffer(data, dtype=np.uint8)
    n_pairs = total // 2
    groups = buf[: 3 * n_pairs].reshape(-1, 3).astype(np.int32)
    b0, b1, b2 = groups[:, 0], groups[:, 1], groups[:, 2]
    s0 = ((b1 & 0x0F) << 8) | b0
    s1 = ((b1 & 0xF0) << 4) | b2
    flat = np.empty(total, dtype=np.int32)
    flat[0 : 2 * n_pairs : 2] = s0
    flat[1 : 2 * n_pairs : 2] = s1
    if total % 2:  # lone trailing sample uses the first two bytes of a group
        t0 = int(buf[3 * n_pairs])
        t1 = int(buf[3 * n_pairs + 1])
        flat[-1] = ((t1 & 0x0F) << 8) | t0
    flat = np.where(flat >= 2048, flat - 4096, flat)  # 12-bit sign extension
    return [flat[ch::n_signals].astype(np.int16) for ch in range(n_signals)]


def parse_annotations(data: bytes) -> list[Annotation]:
    """Decode an MIT annotation stream into (sample, code, aux) records."""
    anns: list[Annotation] = []
    ts = 0
    i = 0
    n = len(data)
    ended = False
    while i + 2 <= n:
        word = data[i] | (data[i + 1] << 8)
        i += 2
        code = word >> 10
        delta = word & 0x3FF
        if word == 0:
            ended = True
            break
        if code == SKIP_CODE:
            if i + 4 > n:
                raise TruncatedAnnotationStream("SKIP needs 4 following bytes")
            # long delta: high 16 bits first, each word little-endian
            ts += (
                (data[i] << 16)
                | (data[i + 1] << 24)
                | data[i + 2]
                | (data[i + 3] << 8)
            )
            i += 4
        elif code == AUX_CODE:
            if i + delta > n:
                raise AuxOverrun(f"aux length {delta} exceeds remaining {n - i} bytes")
            raw = data[i : i + delta]
            i += delta + (delta & 1)  # pad byte keeps words aligned
            aux = raw.rstrip(b"\x00").decode("ascii", errors="replace")
            if not anns:
                raise TruncatedAnnotationStream("aux string with no preceding annotation")
            prev = anns[-1]
            anns[-1] = Annotation(prev.sample, prev.code, aux)
        elif code in (NUM_CODE, SUB_CODE, CHN_CODE):
            continue  # modifier values are not used here
        else:
            ts += delta
            anns.append(Annotation(ts, code))
    if not ended:
        raise TruncatedAnnotationStream("stream ended without 0x0000 terminator")
    return anns


def rhythm_intervals(annotations: list[Annotation], n_samples: int) -> list[RhythmInterval]:
    """Build the rhythm-interval tiling of [0, n_samples) from annotations.

    Each rhythm aux (aux starting with '(') opens an interval closed by the
    next rhythm aux or the end of record. Samples before the first rhythm
    annotation are OTHER; unrecognized aux strings map to OTHER.
    """
    changes: list[tuple[int, Rhythm]] = []
    for ann in annotations:
        if ann.aux and ann.aux.startswith("("):
            label = _AUX_TO_RHYTHM.get(ann.aux.rstrip("\x00"), Rhythm.OTHER)
            changes.append((min(ann.sample, n_samples), label))

    intervals: list[RhythmInterval] = []
    if not changes or changes[0][0] > 0:
        first = changes[0][0] if changes else n_samples
        intervals.append(RhythmInterval(0, first, Rhythm.OTHER))
    for idx, (start, label) in enumerate(changes):
        end = changes[idx + 1][0] if idx + 1 < len(changes) else n_samples
        if end > start:
            intervals.append(RhythmInterval(start, end, label))
    return [iv for iv in intervals if iv.end_sample > iv.start_sample]


def to_physical(digital: np.ndarray, gain: float, adc_zero: int) -> np.ndarray:
    """Convert ADC units to millivolts: (d - adc_zero) / gain."""
    return (np.asarray(digital, dtype=np.float64) - adc_zero) / gain


def read_record(data_dir: str, record_name: str) -> AnnotatedRecord:
    """Read `<data_dir>/<record>.hea/.dat/.atr` into an AnnotatedRecord."""
    hea_path = os.path.join(data_dir, record_name + ".hea")
    with open(hea_path, "r", encoding="ascii") as f:
        header = parse_header(f.read())

    dat_path = os.path.join(data_dir, header.signals[0].file_name)
    with open(dat_path, "rb") as f:
        digital = decode_format212(f.read(), header.n_samples, header.n_signals)

    atr_path = os.path.join(data_dir, record_name + ".atr")
    with open(atr_path, "rb") as f:
        annotations = parse_annotations(f.read())
    intervals = rhythm_intervals(annotations, header.n_samples)
    return AnnotatedRecord(header, digital, intervals)
