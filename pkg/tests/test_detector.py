from statistics import fmean

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import csimotion as cm
from csimotion.detector import default_response_lag
from csimotion.errors import (
    EmptyCalibrationSet,
    InputTooShort,
    SchemaViolation,
    WindowTooLarge,
)


def pcc_of(values, rate=10.0, t0=0.0):
    return cm.PccSeries(values=np.asarray(values, dtype=float), rate=rate, t0=t0)


def hysteresis_oracle(variance, mov, nomov, w, initial):
    """Literal step-through of the detection state machine.

    Plain-Python mirror of the contract: normalize by the maximum, then
    per index compare adjacent window means; enter moving on a mean
    difference above mov, leave when the combined window level drops
    below nomov. Written independently of the package implementation.
    """
    variance = [float(v) for v in variance]
    peak = max(variance)
    if peak <= 0:
        return [False] * (len(variance) - 2 * w + 1)
    normalized = [v / peak for v in variance]
    output = []
    moving = initial
    for i in range(len(normalized) - 2 * w + 1):
        x = normalized[i : i + w]
        y = normalized[i + w : i + 2 * w]
        diff = abs(fmean(x) - fmean(y))
        level = fmean(x + y)
        if moving:
            if level < nomov:
                moving = False
        else:
            if diff > mov:
                moving = True
        output.append(moving)
    return output


def brute_force_variance(values, window):
    return np.array(
        [np.var(values[i : i + window]) for i in range(len(values) - window + 1)]
    )


class TestDetectorConfig:
    def test_defaults(self):
        cfg = cm.DetectorConfig()
        assert (cfg.mov_threshold, cfg.nomov_threshold) == (0.15, 0.05)
        assert (cfg.window_size, cfg.variance_window) == (5, 10)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(mov_threshold=0.05, nomov_threshold=0.15),
            dict(nomov_threshold=0.0),
            dict(mov_threshold=1.0),
            dict(window_size=0),
            dict(variance_window=1),
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            cm.DetectorConfig(**kwargs)


class TestCalibrate:
    def test_identical_flat_series(self):
        series = [pcc_of([0.95] * 20) for _ in range(5)]
        profile = cm.calibrate(series)
        assert profile.per_capture_means == pytest.approx((0.95,) * 5, abs=1e-12)
        assert profile.per_capture_ranges == (0.0,) * 5
        assert profile.containsmovement_threshold == pytest.approx(0.95, abs=1e-12)

    def test_mean_minus_twice_mean_range(self):
        stats = [
            (0.95, 0.03), (0.94, 0.04), (0.96, 0.03), (0.95, 0.02), (0.95, 0.03),
        ]
        series = [pcc_of([m - r / 2, m + r / 2]) for m, r in stats]
        profile = cm.calibrate(series, environment_label="env-1")
        assert profile.containsmovement_threshold == pytest.approx(0.89, abs=1e-12)
        assert profile.environment_label == "env-1"
        assert profile.created_at > 0

    def test_empty_set_rejected(self):
        with pytest.raises(EmptyCalibrationSet):
            cm.calibrate([])


class TestContainsMovement:
    def profile(self, threshold):
        return cm.CalibrationProfile(
            containsmovement_threshold=threshold,
            per_capture_means=(threshold,),
            per_capture_ranges=(0.0,),
        )

    def test_quiet_series_closed(self):
        assert not cm.contains_movement(pcc_of([0.99] * 50), self.profile(0.89))

    def test_dip_opens(self):
        values = [0.99] * 20 + [0.70] * 6 + [0.99] * 20
        assert cm.contains_movement(pcc_of(values), self.profile(0.89))

    def test_single_glitch_rejected_by_windowing(self):
        values = [0.99] * 20 + [0.50] + [0.99] * 20
        series = pcc_of(values)
        assert min(values) < 0.89
        assert not cm.contains_movement(series, self.profile(0.89))

    def test_short_series_uses_overall_mean(self):
        assert cm.contains_movement(pcc_of([0.5, 0.6]), self.profile(0.89))


class TestRunningVariance:
    def test_constant_series_zero(self):
        out = cm.running_variance(np.full(30, 0.7), 10)
        assert out.shape == (21,)
        assert np.array_equal(out, np.zeros(21))

    def test_alternating_pairs(self):
        out = cm.running_variance(np.array([0.0, 1.0] * 10), 2)
        assert np.allclose(out, 0.25)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            n = rng.integers(10, 400)
            w = int(rng.integers(2, min(n, 20)))
            values = rng.random(n) * 2 - 1
            got = cm.running_variance(values, w)
            want = brute_force_variance(values, w)
            assert np.allclose(got, want, rtol=1e-9, atol=1e-15)

    def test_accepts_pcc_series(self):
        out = cm.running_variance(pcc_of([0.1, 0.2, 0.3, 0.4]), 2)
        assert out.shape == (3,)

    def test_window_too_large(self):
        with pytest.raises(WindowTooLarge):
            cm.running_variance(np.ones(5), 6)


class TestSlidingVarianceAnalysis:
    def test_all_zero_variance_all_false(self):
        cfg = cm.DetectorConfig()
        mask = cm.sliding_variance_analysis(np.zeros(40), cfg, initial_moving=False)
        assert len(mask) == 40 + cfg.variance_window - 1
        assert not mask.values.any()

    def test_all_zero_with_initial_moving_still_false(self):
        mask = cm.sliding_variance_analysis(
            np.zeros(40), cm.DetectorConfig(), initial_moving=True
        )
        assert not mask.values.any()

    def test_step_enters_within_a_second_and_holds(self):
        # variance low for 5 s then a high plateau for 5 s at 10 Hz
        var = np.concatenate([np.zeros(50), np.ones(50)])
        cfg = cm.DetectorConfig()
        mask = cm.sliding_variance_analysis(var, cfg, initial_moving=False)
        first_true = int(np.flatnonzero(mask.values)[0])
        assert 40 <= first_true <= 50  # within 1 s of the step at index 50
        # holds through the plateau: only released once variance dies down
        assert mask.values[first_true:].all()

    def test_step_down_releases(self):
        var = np.concatenate([np.zeros(50), np.ones(30), np.zeros(50)])
        mask = cm.sliding_variance_analysis(
            var, cm.DetectorConfig(), initial_moving=False
        )
        values = mask.values
        assert values[45:70].all()
        assert not values[90:].any()

    def test_input_too_short(self):
        with pytest.raises(InputTooShort):
            cm.sliding_variance_analysis(
                np.ones(9), cm.DetectorConfig(), initial_moving=False
            )

    def test_matches_literal_oracle(self):
        rng = np.random.default_rng(1)
        for trial in range(100):
            n = int(rng.integers(20, 300))
            var = rng.random(n) * rng.choice([1e-3, 1.0, 50.0])
            if trial % 7 == 0:
                var[:] = 0.0
            mov = float(rng.uniform(0.05, 0.5))
            nomov = float(rng.uniform(0.01, mov - 0.005))
            cfg = cm.DetectorConfig(mov_threshold=mov, nomov_threshold=nomov)
            initial = bool(rng.integers(0, 2))
            mask = cm.sliding_variance_analysis(var, cfg, initial)
            oracle = hysteresis_oracle(var, mov, nomov, cfg.window_size, initial)
            assert list(mask.values[: len(oracle)]) == oracle
            # tail extends the final verdict
            assert (mask.values[len(oracle):] == mask.values[len(oracle) - 1]).all()

    def test_scale_invariance_exact_for_powers_of_two(self):
        rng = np.random.default_rng(2)
        var = rng.random(120)
        cfg = cm.DetectorConfig()
        base = cm.sliding_variance_analysis(var, cfg, False).values
        for k in (0.25, 0.5, 2.0, 1024.0):
            scaled = cm.sliding_variance_analysis(k * var, cfg, False).values
            assert np.array_equal(base, scaled)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10_000), st.floats(1e-6, 1e6))
    def test_scale_invariance_random(self, seed, k):
        var = np.random.default_rng(seed).random(60)
        cfg = cm.DetectorConfig()
        base = cm.sliding_variance_analysis(var, cfg, False).values
        scaled = cm.sliding_variance_analysis(k * var, cfg, False).values
        assert np.array_equal(base, scaled)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000))
    def test_hysteresis_monotonicity(self, seed):
        var = np.random.default_rng(seed).random(150)
        base_cfg = cm.DetectorConfig(mov_threshold=0.15, nomov_threshold=0.05)
        stricter = cm.DetectorConfig(mov_threshold=0.30, nomov_threshold=0.05)
        stickier = cm.DetectorConfig(mov_threshold=0.15, nomov_threshold=0.02)
        base = cm.sliding_variance_analysis(var, base_cfg, False).values.sum()
        assert cm.sliding_variance_analysis(var, stricter, False).values.sum() <= base
        assert cm.sliding_variance_analysis(var, stickier, False).values.sum() >= base

    def test_determinism(self):
        var = np.random.default_rng(3).random(80)
        cfg = cm.DetectorConfig()
        a = cm.sliding_variance_analysis(var, cfg, False).values
        b = cm.sliding_variance_analysis(var, cfg, False).values
        assert np.array_equal(a, b)


class TestInitialState:
    def profile(self, threshold=0.89):
        return cm.CalibrationProfile(
            containsmovement_threshold=threshold,
            per_capture_means=(threshold,),
            per_capture_ranges=(0.0,),
        )

    def test_quiet_opening(self):
        pcc = pcc_of([0.95] * 10)
        assert cm.set_initial_state(pcc, self.profile(), cm.DetectorConfig()) is False

    def test_moving_opening(self):
        pcc = pcc_of([0.70] * 10)
        assert cm.set_initial_state(pcc, self.profile(), cm.DetectorConfig()) is True

    def test_too_short(self):
        with pytest.raises(InputTooShort):
            cm.set_initial_state(pcc_of([0.9] * 3), self.profile(), cm.DetectorConfig())


class TestDetect:
    def test_empty_room_all_false(self, env_profile, calibration):
        capture, _ = cm.generate(
            cm.SynthScript(duration_s=12.0, seed=500, base_profile=env_profile)
        )
        mask = cm.detect(capture, calibration)
        assert not mask.values.any()
        assert mask.rate == 10.0

    def test_movement_episode_detected_in_place(self, env_profile, calibration):
        script = cm.SynthScript(
            duration_s=35.0,
            episodes=(cm.Episode(11.0, 25.0, 20.0),),
            seed=42,
            base_profile=env_profile,
        )
        capture, gt = cm.generate(script)
        mask = cm.detect(capture, calibration)
        times = mask.times - mask.t0
        moving_times = times[mask.values]
        assert moving_times.min() == pytest.approx(11.0, abs=1.0)
        assert moving_times.max() == pytest.approx(25.0, abs=1.0)
        assert cm.score(mask, gt).accuracy > 0.9

    def test_mask_matches_pcc_length(self, env_profile, calibration, smap80):
        script = cm.SynthScript(
            duration_s=20.0,
            episodes=(cm.Episode(5.0, 10.0, 15.0),),
            seed=7,
            base_profile=env_profile,
        )
        capture, _ = cm.generate(script)
        pcc = cm.pcc_series(cm.preprocess_pipeline(capture, smap80))
        mask = cm.detect(capture, calibration)
        assert len(mask) == len(pcc)
        assert mask.t0 == pcc.t0

    def test_determinism(self, env_profile, calibration):

        script = cm.SynthScript(
            duration_s=15.0,
            episodes=(cm.Episode(4.0, 8.0, 12.0),),
            seed=9,
            base_profile=env_profile,
        )
        capture, _ = cm.generate(script)
        a = cm.detect(capture, calibration)
        b = cm.detect(capture, calibration)
        assert np.array_equal(a.values, b.values)

    def test_default_response_lag(self):
        assert default_response_lag(cm.DetectorConfig()) == 10
        assert default_response_lag(cm.DetectorConfig(window_size=3)) == 8


class TestProfileFile:
    def test_round_trip(self, tmp_path, calibration):
        path = tmp_path / "profile.csical"
        cm.save_profile(calibration, path)
        again = cm.load_profile(path)
        assert again.containsmovement_threshold == calibration.containsmovement_threshold
        assert again.per_capture_means == calibration.per_capture_means
        assert again.per_capture_ranges == calibration.per_capture_ranges
        assert again.environment_label == calibration.environment_label

    def test_format_lines(self, tmp_path, calibration):
        path = tmp_path / "profile.csical"
        cm.save_profile(calibration, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "csical v1"
        assert lines[1].startswith("threshold ")
        assert sum(1 for l in lines if l.startswith("mean ")) == 5
        assert sum(1 for l in lines if l.startswith("range ")) == 5
        assert lines[-1].startswith("env ")

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.csical"
        path.write_text("nonsense\n")
        with pytest.raises(SchemaViolation):
            cm.load_profile(path)

    def test_inconsistent_threshold(self, tmp_path):
        path = tmp_path / "bad.csical"
        path.write_text("csical v1\nthreshold 0.5\nmean 0.9\nrange 0.01\nenv x\n")
        with pytest.raises(SchemaViolation):
            cm.load_profile(path)
