import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from afibdet import wfdb
from afibdet.errors import (
    AuxOverrun,
    MalformedHeader,
    TruncatedAnnotationStream,
    TruncatedSignalFile,
    UnsupportedFormat,
)

import wfdb_oracle as oracle

# published header text of MIT-BIH AFIB record 04015
HEADER_04015 = """\
04015 2 250 9205760
04015.dat 212 200 12 1024 -69 7434 0 ECG1
04015.dat 212 200 12 1024 -58 9545 0 ECG2
"""


class TestParseHeader:
    def test_minimal_record(self):
        h = wfdb.parse_header("r1 1 250 2500\nr1.dat 212 200 12 0 0 0 0 ECG1\n")
        assert h.record_name == "r1"
        assert h.n_signals == 1
        assert h.sampling_frequency == 250
        assert h.n_samples == 2500
        assert h.signals[0].gain == 200
        assert h.signals[0].description == "ECG1"

    def test_record_04015(self):
        h = wfdb.parse_header(HEADER_04015)
        assert h.sampling_frequency == 250
        assert h.n_samples == 9205760
        assert h.n_signals == 2
        assert all(s.format_code == 212 for s in h.signals)
        assert all(s.gain == 200 for s in h.signals)
        assert all(s.adc_zero == 1024 for s in h.signals)

    def test_baseline_in_gain_overrides_adc_zero(self):
        h = wfdb.parse_header("r1 1 250 100\nr1.dat 212 200(512)/mV 12 0 0 0 0 ECG1\n")
        assert h.signals[0].adc_zero == 512
        assert h.signals[0].gain == 200

    def test_unsupported_format(self):
        with pytest.raises(UnsupportedFormat):
            wfdb.parse_header("r1 1 250 100\nr1.dat 16 200 12 0 0 0 0 ECG1\n")

    @pytest.mark.parametrize(
        "text",
        [
            "",
            "r1 1 250\n",  # too few record tokens
            "r1 one 250 2500\nr1.dat 212\n",  # non-numeric n_signals
            "r1 2 250 2500\nr1.dat 212 200\n",  # missing signal line
            "r1 1 250 2500\nr1.dat x12\n",  # non-numeric format
        ],
    )
    def test_malformed(self, text):
        with pytest.raises(MalformedHeader):
            wfdb.parse_header(text)

    def test_comments_skipped(self):
        h = wfdb.parse_header("# comment\nr1 1 250 100\nr1.dat 212 200 12 0 0 0 0 ECG1\n")
        assert h.record_name == "r1"


class TestDecodeFormat212:
    def test_zero_bytes(self):
        chans = wfdb.decode_format212(bytes([0, 0, 0]), 2, 1)
        assert chans[0].tolist() == [0, 0]

    def test_sign_extension(self):
        chans = wfdb.decode_format212(bytes([0xFF, 0xFF, 0xFF]), 2, 1)
        assert chans[0].tolist() == [-1, -1]

    def test_known_group(self):
        # independent scalar derivation of the packing rules
        b0, b1, b2 = 0x34, 0x12, 0xAB
        s0 = ((b1 & 0x0F) << 8) | b0
        s1 = ((b1 & 0xF0) << 4) | b2
        s0 = s0 - 4096 if s0 >= 2048 else s0
        s1 = s1 - 4096 if s1 >= 2048 else s1
        chans = wfdb.decode_format212(bytes([b0, b1, b2]), 2, 1)
        assert chans[0].tolist() == [s0, s1]

    def test_all_4096_values_round_trip(self):
        values = list(range(-2048, 2048))
        data = oracle.encode_format212(values)
        chans = wfdb.decode_format212(data, len(values), 1)
        assert chans[0].tolist() == values

    def test_round_trip_reencode(self):
        rng = np.random.default_rng(7)
        values = rng.integers(-2048, 2048, size=500).tolist()
        data = oracle.encode_format212(values)
        decoded = wfdb.decode_format212(data, len(values), 1)[0].tolist()
        assert oracle.encode_format212(decoded) == data

    def test_two_channel_deinterleave(self):
        # interleaved [a0, b0, a1, b1]
        values = [10, -20, 30, -40]
        data = oracle.encode_format212(values)
        chans = wfdb.decode_format212(data, 2, 2)
        assert chans[0].tolist() == [10, 30]
        assert chans[1].tolist() == [-20, -40]

    def test_odd_sample_count(self):
        values = [1, 2, 3]
        data = oracle.encode_format212(values)
        chans = wfdb.decode_format212(data, 3, 1)
        assert chans[0].tolist() == values

    def test_truncated(self):
        with pytest.raises(TruncatedSignalFile):
            wfdb.decode_format212(bytes([0, 0]), 2, 1)

    def test_deterministic(self):
        data = oracle.encode_format212([5, -5, 100, -100])
        a = wfdb.decode_format212(data, 4, 1)
        b = wfdb.decode_format212(data, 4, 1)
        assert np.array_equal(a[0], b[0])


class TestParseAnnotations:
    def test_immediate_end(self):
        assert wfdb.parse_annotations(bytes([0, 0])) == []

    def test_single_rhythm_with_aux(self):
        data = oracle.encode_annotations([(100, 28, "(AFIB")])
        anns = wfdb.parse_annotations(data)
        assert anns == [wfdb.Annotation(100, 28, "(AFIB")]

    def test_skip_long_delta(self):
        data = oracle.encode_annotations([(100000, 1, None)])
        anns = wfdb.parse_annotations(data)
        assert anns == [wfdb.Annotation(100000, 1)]

    def test_cumulative_deltas(self):
        data = oracle.encode_annotations([(10, 1, None), (30, 1, None), (45, 1, None)])
        assert [a.sample for a in wfdb.parse_annotations(data)] == [10, 30, 45]

    def test_aux_overrun(self):
        word = (63 << 10) | 10  # declares 10 aux bytes
        data = oracle.encode_annotations([(5, 1, None)])[:-2]
        data += bytes([word & 0xFF, word >> 8]) + b"abc"
        with pytest.raises(AuxOverrun):
            wfdb.parse_annotations(data)

    def test_missing_end_marker(self):
        data = oracle.encode_annotations([(5, 1, None)])[:-2]
        with pytest.raises(TruncatedAnnotationStream):
            wfdb.parse_annotations(data)

    def test_fixture_stream(self, fixture_dir):
        with open(f"{fixture_dir}/fix01.atr", "rb") as f:
            anns = wfdb.parse_annotations(f.read())
        rhythm = [(a.sample, a.aux) for a in anns if a.aux]
        assert rhythm == oracle.FIXTURE_RHYTHMS


class TestRhythmIntervals:
    def test_single_interval_tiles(self):
        anns = [wfdb.Annotation(0, 28, "(N")]
        ivs = wfdb.rhythm_intervals(anns, 1000)
        assert ivs == [wfdb.RhythmInterval(0, 1000, wfdb.Rhythm.NSR)]

    def test_closure_rule(self):
        anns = [wfdb.Annotation(0, 28, "(N"), wfdb.Annotation(400, 28, "(AFIB")]
        ivs = wfdb.rhythm_intervals(anns, 1000)
        assert ivs == [
            wfdb.RhythmInterval(0, 400, wfdb.Rhythm.NSR),
            wfdb.RhythmInterval(400, 1000, wfdb.Rhythm.AFIB),
        ]

    def test_leading_other(self):
        anns = [wfdb.Annotation(200, 28, "(J")]
        ivs = wfdb.rhythm_intervals(anns, 500)
        assert ivs[0] == wfdb.RhythmInterval(0, 200, wfdb.Rhythm.OTHER)
        assert ivs[1].label is wfdb.Rhythm.JUNCTIONAL

    def test_unknown_aux_maps_to_other(self):
        anns = [wfdb.Annotation(0, 28, "(SBR")]
        assert wfdb.rhythm_intervals(anns, 100)[0].label is wfdb.Rhythm.OTHER

    def test_no_rhythm_annotations(self):
        ivs = wfdb.rhythm_intervals([wfdb.Annotation(5, 1)], 100)
        assert ivs == [wfdb.RhythmInterval(0, 100, wfdb.Rhythm.OTHER)]

    @given(
        starts=st.lists(st.integers(0, 999), max_size=8),
        n_samples=st.integers(1, 1000),
    )
    @settings(max_examples=200, deadline=None)
    def test_tiling_property(self, starts, n_samples):
        anns = [wfdb.Annotation(s, 28, "(AFIB") for s in sorted(starts)]
        ivs = wfdb.rhythm_intervals(anns, n_samples)
        assert ivs[0].start_sample == 0
        assert ivs[-1].end_sample == n_samples
        for prev, cur in zip(ivs, ivs[1:]):
            assert prev.end_sample == cur.start_sample
        assert all(iv.start_sample < iv.end_sample for iv in ivs)


class TestToPhysical:
    def test_baseline_maps_to_zero(self):
        assert wfdb.to_physical(np.array([1024]), 200, 1024)[0] == 0.0

    def test_one_millivolt(self):
        assert wfdb.to_physical(np.array([1224]), 200, 1024)[0] == 1.0

    def test_matches_scalar_loop(self):
        rng = np.random.default_rng(3)
        digital = rng.integers(-2048, 2048, size=250)
        mv = wfdb.to_physical(digital, 200, 17)
        expected = [(int(d) - 17) / 200 for d in digital]
        assert np.allclose(mv, expected, atol=1e-12, rtol=0)


class TestReadRecord:
    def test_fixture_record(self, fixture_dir):
        rec = wfdb.read_record(fixture_dir, "fix01")
        assert rec.header.sampling_frequency == 250
        assert rec.header.n_samples == 2500
        assert rec.digital[0].tolist() == oracle.fixture_samples()
        assert [(iv.start_sample, iv.end_sample, iv.label) for iv in rec.rhythm_intervals] == [
            (0, 1800, wfdb.Rhythm.NSR),
            (1800, 2000, wfdb.Rhythm.AFIB),
            (2000, 2500, wfdb.Rhythm.NSR),
        ]
