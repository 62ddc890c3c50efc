import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import csimotion as cm
from csimotion.errors import (
    CutoffAboveNyquist,
    DegenerateSpan,
    NonIntegerDecimation,
    SchemaViolation,
    ShapeMismatch,
    TooFewFrames,
)

# index table of the 80 MHz lower band, counted by hand from the layout:
# 64 bins, 14 nulls and 4 pilots inside -> 46 kept
LOWER_NULLS = {0, 1, 2, 3, 29, 30, 31, 32, 33, 34, 35, 61, 62, 63}
LOWER_PILOTS = {11, 25, 39, 53}


def tone_series(freq_hz, rate=100.0, duration=20.0, columns=2):
    t = np.arange(int(duration * rate)) / rate
    data = np.tile(np.sin(2 * np.pi * freq_hz * t)[:, None], (1, columns))
    return cm.AmplitudeSeries(data=data, rate=rate)


def tone_amplitude(series, freq_hz, edge_s=0.5):
    """FFT-magnitude oracle: amplitude of the tone away from the edges."""
    skip = int(edge_s * series.rate)
    x = series.data[skip:-skip, 0]
    spectrum = np.abs(np.fft.rfft(x)) / len(x) * 2
    freqs = np.fft.rfftfreq(len(x), 1 / series.rate)
    return spectrum[np.argmin(np.abs(freqs - freq_hz))]


class TestResample:
    def test_uniform_grid_identity(self):
        rate = 100.0
        t = np.arange(5) / rate
        values = np.arange(10, dtype=float).reshape(5, 2)
        out = cm.resample_linear(values, t, rate)
        assert np.array_equal(out.data, values)
        assert out.rate == rate and out.t0 == 0.0

    def test_midpoint_interpolation(self):
        out = cm.resample_linear(
            np.array([[0.0, 0.0], [2.0, 4.0]]), np.array([0.0, 0.02]), 100.0
        )
        assert len(out) == 3
        assert out.data[1, 0] == pytest.approx(1.0)
        assert out.data[1, 1] == pytest.approx(2.0)

    def test_jittered_ramp_exact(self):
        # values linear in time resample exactly onto the grid
        rng = np.random.default_rng(5)
        t = np.sort(rng.uniform(0.0, 10.0, 900))
        t[0], t[-1] = 0.0, 10.0
        slopes = np.array([2.0, -0.5, 7.25])
        offsets = np.array([1.0, 3.0, -2.0])
        values = t[:, None] * slopes[None, :] + offsets[None, :]
        out = cm.resample_linear(values, t, 100.0)
        expected = out.times[:, None] * slopes[None, :] + offsets[None, :]
        assert np.allclose(out.data, expected, atol=1e-9)

    @settings(max_examples=30, deadline=None)
    @given(st.data())
    def test_piecewise_linear_exactness(self, data):
        n = data.draw(st.integers(3, 20))
        breaks = np.cumsum(
            [0.0] + [data.draw(st.floats(0.01, 0.5)) for _ in range(n - 1)]
        )
        values = np.array(
            [[data.draw(st.floats(-100, 100)) for _ in range(2)] for _ in range(n)]
        )
        out = cm.resample_linear(values, breaks, 100.0)
        for i, t in enumerate(out.times):
            for col in range(2):
                expected = np.interp(t, breaks, values[:, col])
                assert out.data[i, col] == pytest.approx(expected, abs=1e-9)

    def test_duplicate_timestamps_keep_last(self):
        t = np.array([0.0, 0.01, 0.01, 0.02])
        values = np.array([[0.0, 0], [5.0, 0], [1.0, 0], [2.0, 0]])
        out = cm.resample_linear(values, t, 100.0)
        assert out.data[1, 0] == pytest.approx(1.0)

    def test_degenerate_span(self):
        with pytest.raises(DegenerateSpan):
            cm.resample_linear(np.ones((3, 2)), np.zeros(3), 100.0)

    def test_too_few_frames(self):
        with pytest.raises(TooFewFrames):
            cm.resample_linear(np.ones((1, 2)), np.zeros(1), 100.0)


class TestSubcarrierMap:
    def test_default_80_map_keeps_46(self, smap80):
        kept = smap80.retained_indices()
        assert len(kept) == 46
        expected = [
            i for i in range(64) if i not in LOWER_NULLS and i not in LOWER_PILOTS
        ]
        assert list(kept) == expected

    def test_prune_shapes(self, smap80):
        series = cm.AmplitudeSeries(data=np.random.default_rng(0).random((20, 256)),
                                    rate=100.0)
        out = cm.prune_subcarriers(series, smap80)
        assert out.data.shape == (20, 46)
        assert np.array_equal(out.data[:, 0], series.data[:, 4])

    def test_identity_map(self):
        smap = cm.SubcarrierMap(
            bandwidth_mhz=20,
            null_indices=frozenset(),
            pilot_indices=frozenset(),
            lower_band=(0, 64),
        )
        series = cm.AmplitudeSeries(data=np.ones((5, 64)), rate=100.0)
        out = cm.prune_subcarriers(series, smap)
        assert np.array_equal(out.data, series.data)

    def test_degenerate_map_rejected_at_construction(self):
        with pytest.raises(ShapeMismatch):
            cm.SubcarrierMap(
                bandwidth_mhz=20,
                null_indices=frozenset(range(63)),
                pilot_indices=frozenset(),
                lower_band=(0, 64),
            )

    def test_wrong_column_count(self, smap80):
        series = cm.AmplitudeSeries(data=np.ones((5, 64)), rate=100.0)
        with pytest.raises(ShapeMismatch):
            cm.prune_subcarriers(series, smap80)

    def test_map_file_round_trip(self, tmp_path, smap80):
        path = tmp_path / "subcarriers-80.map"
        lines = [f"lower {smap80.lower_band[0]} {smap80.lower_band[1]}"]
        lines += [f"null {i}" for i in sorted(smap80.null_indices)]
        lines += [f"pilot {i}" for i in sorted(smap80.pilot_indices)]
        path.write_text("\n".join(lines) + "\n")
        again = cm.load_subcarrier_map(path)
        assert again == smap80

    def test_map_file_bad_line(self, tmp_path):
        path = tmp_path / "subcarriers-80.map"
        path.write_text("lower 0 64\nnull x\n")
        with pytest.raises(SchemaViolation):
            cm.load_subcarrier_map(path)

    def test_map_name_required_for_bandwidth(self, tmp_path):
        path = tmp_path / "whatever.txt"
        path.write_text("lower 0 64\n")
        with pytest.raises(SchemaViolation):
            cm.load_subcarrier_map(path)
        assert cm.load_subcarrier_map(path, bandwidth_mhz=20).bandwidth_mhz == 20


class TestLowpass:
    def test_dc_preserved(self):
        series = cm.AmplitudeSeries(data=np.full((200, 3), 7.5), rate=100.0)
        out = cm.lowpass(series, 10.0)
        assert np.allclose(out.data, 7.5, atol=1e-9)

    def test_passband_tone_preserved(self):
        series = tone_series(2.0)
        out = cm.lowpass(series, 10.0)
        assert tone_amplitude(out, 2.0) == pytest.approx(1.0, rel=0.01)

    def test_stopband_tone_attenuated(self):
        series = tone_series(25.0)
        out = cm.lowpass(series, 10.0)
        assert tone_amplitude(out, 25.0) < 0.05

    def test_linearity(self):
        rng = np.random.default_rng(3)
        x = cm.AmplitudeSeries(data=rng.random((300, 2)), rate=100.0)
        y = cm.AmplitudeSeries(data=rng.random((300, 2)), rate=100.0)
        a, b = 2.5, -1.25
        combined = cm.AmplitudeSeries(data=a * x.data + b * y.data, rate=100.0)
        lhs = cm.lowpass(combined, 10.0).data
        rhs = a * cm.lowpass(x, 10.0).data + b * cm.lowpass(y, 10.0).data
        assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-12)

    def test_zero_phase_pulse_peak(self):
        data = np.zeros((301, 2))
        data[150, :] = 1.0
        out = cm.lowpass(cm.AmplitudeSeries(data=data, rate=100.0), 10.0)
        assert int(np.argmax(out.data[:, 0])) == 150

    def test_cutoff_above_nyquist(self):
        series = tone_series(1.0)
        with pytest.raises(CutoffAboveNyquist):
            cm.lowpass(series, 50.0)

    def test_too_short_for_padding(self):
        series = cm.AmplitudeSeries(data=np.ones((10, 2)), rate=100.0)
        with pytest.raises(TooFewFrames):
            cm.lowpass(series, 10.0)


class TestDownsample:
    def test_decimation_by_ten(self):
        data = np.arange(100, dtype=float).reshape(50, 2)
        out = cm.downsample(cm.AmplitudeSeries(data=data, rate=100.0), 10.0)
        assert len(out) == 5
        assert out.rate == 10.0
        assert np.array_equal(out.data, data[[0, 10, 20, 30, 40]])

    def test_identity(self):
        series = cm.AmplitudeSeries(data=np.ones((7, 2)), rate=100.0)
        out = cm.downsample(series, 100.0)
        assert np.array_equal(out.data, series.data)

    def test_non_integer_ratio(self):
        series = cm.AmplitudeSeries(data=np.ones((7, 2)), rate=100.0)
        with pytest.raises(NonIntegerDecimation):
            cm.downsample(series, 30.0)


class TestPipeline:
    def test_ten_second_capture_shape(self, env_profile, smap80):
        script = cm.SynthScript(duration_s=10.0, seed=11, base_profile=env_profile)
        capture, _ = cm.generate(script)
        trace = []
        out = cm.preprocess_pipeline(capture, smap80, trace=trace)
        span = capture.duration
        expected_resampled = int(np.floor(span * 100.0 + 1e-9)) + 1
        expected_rows = len(range(0, expected_resampled, 10))
        assert out.data.shape == (expected_rows, 46)
        assert 95 <= expected_rows <= 105
        assert out.rate == 10.0
        assert [name for name, _ in trace] == [
            "amplitudes", "resample", "prune", "lowpass", "downsample",
        ]
        assert trace[2][1][1] == 46

    def test_constant_capture_constant_output(self, smap80):
        rows = np.tile(np.linspace(1.0, 2.0, 256)[None, :], (500, 1))
        frames = [
            cm.CsiFrame(i / 100.0, rows[i].astype(np.complex128)) for i in range(500)
        ]
        capture = cm.CsiCapture(frames=frames, channel_spec=cm.ChannelSpec(5.0, 80))
        out = cm.preprocess_pipeline(capture, smap80)
        assert np.allclose(out.data, out.data[0], atol=1e-9)

    def test_single_frame_rejected(self, smap80):
        frames = [cm.CsiFrame(0.0, np.ones(256, dtype=np.complex128))]
        capture = cm.CsiCapture(frames=frames, channel_spec=cm.ChannelSpec(5.0, 80))
        with pytest.raises(TooFewFrames):
            cm.preprocess_pipeline(capture, smap80)

    @settings(max_examples=10, deadline=None)
    @given(scale=st.floats(1e-6, 1e120), seed=st.integers(0, 2**31))
    def test_no_nan_for_extreme_magnitudes(self, scale, seed, smap80):
        rng = np.random.default_rng(seed)
        rows = scale * (1.0 + rng.random((300, 256)))
        frames = [
            cm.CsiFrame(i / 100.0, rows[i].astype(np.complex128)) for i in range(300)
        ]
        capture = cm.CsiCapture(frames=frames, channel_spec=cm.ChannelSpec(5.0, 80))
        out = cm.preprocess_pipeline(capture, smap80)
        assert np.isfinite(out.data).all()
