import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from strawsim.workload import (SYNTHETIC_PRESETS, SyntheticSpec,
                               TraceFormatError, TraceRecord,
                               generate_synthetic, parse_trace,
                               spec_from_config, write_trace)


class TestSynthetic:
    def test_deterministic_for_seed(self):
        spec = SyntheticSpec(pattern="random", footprint=256, op_count=500,
                             seed=3)
        assert generate_synthetic(spec) == generate_synthetic(spec)
        other = SyntheticSpec(pattern="random", footprint=256, op_count=500,
                              seed=4)
        assert generate_synthetic(spec) != generate_synthetic(other)

    def test_sequential_wraps(self):
        spec = SyntheticSpec(pattern="sequential", footprint=10, op_count=25,
                             seed=0)
        offs = [r.offset for r in generate_synthetic(spec)]
        assert offs == (list(range(10)) * 3)[:25]

    def test_read_ratio_zero_and_one(self):
        pure_r = SyntheticSpec(read_ratio=1.0, footprint=64, op_count=200)
        assert all(r.is_read for r in generate_synthetic(pure_r))
        pure_w = SyntheticSpec(read_ratio=0.0, footprint=64, op_count=200)
        assert not any(r.is_read for r in generate_synthetic(pure_w))

    def test_hotspot_concentration(self):
        spec = SyntheticSpec(pattern="hotspot", footprint=4096, op_count=5000,
                             hot_pages=4, hot_ratio=0.9, seed=1)
        offs = np.array([r.offset for r in generate_synthetic(spec)])
        hot_frac = (offs < 4).mean()
        assert 0.85 < hot_frac < 0.95

    def test_mixed_has_sequential_runs_and_jumps(self):
        spec = SyntheticSpec(pattern="mixed", footprint=4096, op_count=5000,
                             mix_ratio=0.9, seed=2)
        offs = np.array([r.offset for r in generate_synthetic(spec)])
        step = np.diff(offs)
        seq_frac = (step == 1).mean()
        assert 0.8 < seq_frac < 1.0
        assert (step != 1).any()

    def test_arrival_interval_spacing(self):
        spec = SyntheticSpec(footprint=16, op_count=5, arrival_interval_us=250)
        ts = [r.timestamp for r in generate_synthetic(spec)]
        assert ts == [0, 250, 500, 750, 1000]

    @given(st.sampled_from(["sequential", "random", "mixed", "hotspot"]),
           st.integers(1, 200), st.integers(0, 300), st.integers(0, 10))
    def test_offsets_always_inside_footprint(self, pattern, footprint,
                                             op_count, seed):
        spec = SyntheticSpec(pattern=pattern, footprint=footprint,
                             op_count=op_count, seed=seed)
        recs = generate_synthetic(spec)
        assert len(recs) == op_count
        assert all(0 <= r.offset < footprint for r in recs)
        assert all(r.length == 1 for r in recs)

    def test_validation(self):
        with pytest.raises(ValueError, match="pattern"):
            SyntheticSpec(pattern="zipfian").validate()
        with pytest.raises(ValueError, match="read_ratio"):
            SyntheticSpec(read_ratio=1.5).validate()
        with pytest.raises(ValueError, match="request_size"):
            SyntheticSpec(footprint=4, request_size=8).validate()


class TestSpecFromConfig:
    def test_named_profiles(self):
        for name, expect in SYNTHETIC_PRESETS.items():
            spec = spec_from_config({"preset": name, "footprint": 128})
            assert spec.pattern == expect["pattern"]
            assert spec.read_ratio == expect["read_ratio"]
            assert spec.footprint == 128

    def test_unknown_keys_rejected(self):
        with pytest.raises(ValueError, match="unknown keys"):
            spec_from_config({"footprnt": 128})
        with pytest.raises(ValueError, match="preset"):
            spec_from_config({"preset": "nope"})


SAMPLE_TRACE = """\
device_id,opcode,offset_bytes,length_bytes,timestamp_us
0,R,0,16384,100
0,W,16384,32768,200
1,R,0,16384,250
0,R,163840000,4096,300
"""


class TestParseTrace:
    def test_unit_conversion_and_filtering(self):
        recs = parse_trace(io.StringIO(SAMPLE_TRACE), page_size=16384,
                           logical_pages=1000, device_id=0)
        assert recs[0] == TraceRecord(100, True, 0, 1)
        # offset rounds down to a page, length rounds up
        assert recs[1] == TraceRecord(200, False, 1, 2)
        # device 1's row is dropped; the large offset wraps mod capacity
        assert len(recs) == 3
        assert recs[2].offset == (163840000 // 16384) % 1000

    def test_keep_all_devices_when_unfiltered(self):
        recs = parse_trace(io.StringIO(SAMPLE_TRACE), 16384, 1000)
        assert len(recs) == 4

    def test_missing_column(self):
        text = "device_id,opcode,offset_bytes,length_bytes\n0,R,0,1\n"
        with pytest.raises(TraceFormatError, match="timestamp_us"):
            parse_trace(io.StringIO(text), 16384, 1000)

    def test_malformed_row_reports_line_number(self):
        text = ("device_id,opcode,offset_bytes,length_bytes,timestamp_us\n"
                "0,R,0,16384,100\n"
                "0,X,0,16384,200\n")
        with pytest.raises(TraceFormatError, match="line 3"):
            parse_trace(io.StringIO(text), 16384, 1000)
        text = ("device_id,opcode,offset_bytes,length_bytes,timestamp_us\n"
                "0,R,zero,16384,100\n")
        with pytest.raises(TraceFormatError, match="line 2"):
            parse_trace(io.StringIO(text), 16384, 1000)

    def test_non_monotone_timestamps_warn_and_sort(self, caplog):
        text = ("device_id,opcode,offset_bytes,length_bytes,timestamp_us\n"
                "0,R,0,16384,300\n"
                "0,R,16384,16384,100\n")
        with caplog.at_level("WARNING"):
            recs = parse_trace(io.StringIO(text), 16384, 1000)
        assert "not non-decreasing" in caplog.text
        assert [r.timestamp for r in recs] == [100, 300]

    def test_empty_stream(self):
        assert parse_trace(io.StringIO(""), 16384, 1000) == []

    def test_round_trip_through_writer(self):
        spec = SyntheticSpec(pattern="random", read_ratio=0.7, footprint=500,
                             op_count=300, arrival_interval_us=10, seed=5)
        recs = generate_synthetic(spec)
        buf = io.StringIO()
        write_trace(buf, recs, page_size=16384)
        buf.seek(0)
        again = parse_trace(buf, 16384, logical_pages=500, device_id=0)
        assert again == recs
