"""Walk through reading an annotated ECG record.

Parses the small test fixture shipped with the repo, prints its header,
rhythm intervals, and the labeled 6-second windows extracted from it.

    python3 demos/read_record.py [data_dir record_name]
"""

import sys

from afibdet import wfdb
from afibdet.windowing import extract_windows

data_dir, name = (sys.argv[1], sys.argv[2]) if len(sys.argv) == 3 else (
    "tests/fixtures", "fix01")

record = wfdb.read_record(data_dir, name)
header = record.header

print(f"record {header.record_name}: {header.n_signals} signal(s), "
      f"{header.sampling_frequency:g} Hz, {header.n_samples} samples "
      f"({header.n_samples / header.sampling_frequency:.1f} s)")
for spec in header.signals:
    print(f"  signal: {spec.description}, gain {spec.gain:g} adu/mV, "
          f"adc zero {spec.adc_zero}")

print("\nrhythm intervals:")
for iv in record.rhythm_intervals:
    seconds = (iv.end_sample - iv.start_sample) / header.sampling_frequency
    print(f"  [{iv.start_sample:>8}, {iv.end_sample:>8})  {iv.label.value:<12} "
          f"{seconds:7.1f} s")

windows = extract_windows(record)
n_afib = sum(w.label == "AFIB" for w in windows)
print(f"\n{len(windows)} windows (6 s, 1 s stride): {n_afib} AFIB, "
      f"{len(windows) - n_afib} NOT_AFIB")
for w in windows[:8]:
    mv = w.samples
    print(f"  {w.window_id:<14} {w.label:<9} "
          f"range [{mv.min():+.2f}, {mv.max():+.2f}] mV")
