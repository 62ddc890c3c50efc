"""Movement detection: self-calibration, gating, and sliding variance analysis.

Detection works on the running variance of the frame-to-frame
correlation series. The variance is normalized by its capture maximum,
so thresholds are fractions of the strongest observed disturbance and
the method is insensitive to absolute signal magnitude. A calibration
pass over empty-room captures fixes the gate threshold that decides
whether a capture contains any movement at all.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .capture import CsiCapture
from .correlation import PccSeries, pcc_series
from .errors import (
    EmptyCalibrationSet,
    InputTooShort,
    SchemaViolation,
    WindowTooLarge,
)
from .preprocess import (
    PipelineConfig,
    SubcarrierMap,
    default_subcarrier_map,
    preprocess_pipeline,
)

def default_response_lag(config: "DetectorConfig") -> int:
    """Samples by which detect() delays the raw state-machine output.

    The analysis windows look ahead of the sample they are anchored at:
    the mean comparison pivots ``window_size`` samples in, and each
    variance sample summarizes a window centred ``variance_window / 2``
    ahead. Delaying by their sum re-centres mask onsets and offsets on
    the events that caused them.
    """
    return config.window_size + config.variance_window // 2


@dataclass(frozen=True)
class DetectorConfig:
    """Thresholds and window sizes of the variance analysis.

    Thresholds are fractions of the capture's maximum running variance.
    ``mov_threshold`` is the window-mean difference needed to enter the
    moving state; ``nomov_threshold`` is the variance level below which
    the moving state is released. At the 10 Hz processing rate the
    default ``window_size`` of 5 spans half a second.
    """

    mov_threshold: float = 0.15
    nomov_threshold: float = 0.05
    window_size: int = 5
    variance_window: int = 10

    def __post_init__(self):
        if not 0.0 < self.nomov_threshold < self.mov_threshold < 1.0:
            raise ValueError(
                "thresholds must satisfy 0 < nomov_threshold < mov_threshold < 1"
            )
        if self.window_size < 1:
            raise ValueError("window_size must be >= 1")
        if self.variance_window < 2:
            raise ValueError("variance_window must be >= 2")


@dataclass(frozen=True)
class CalibrationProfile:
    """Empty-room statistics and the derived movement gate threshold."""

    containsmovement_threshold: float
    per_capture_means: tuple
    per_capture_ranges: tuple
    created_at: float = 0.0
    environment_label: str = ""


@dataclass(eq=False)
class MovementMask:
    """Binary per-sample movement verdicts, sample i at ``t0 + i/rate``."""

    values: np.ndarray
    t0: float
    rate: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=bool)
        if self.values.ndim != 1:
            raise ValueError("mask values must be a vector")

    def __len__(self) -> int:
        return self.values.size

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self)) / self.rate

    def moving_seconds(self) -> float:
        return float(self.values.sum()) / self.rate


def calibrate(
    empty_room_pcc: list, environment_label: str = ""
) -> CalibrationProfile:
    """Derive the gate threshold from movement-free correlation series.

    Per capture, the mean and the range (max - min) of the correlation
    values are extracted; the threshold is the mean of the means minus
    twice the mean of the ranges.
    """
    if not empty_room_pcc:
        raise EmptyCalibrationSet("no calibration series given")
    means = []
    ranges = []
    for pcc in empty_room_pcc:
        values = pcc.values
        means.append(float(values.mean()))
        ranges.append(float(values.max() - values.min()))
    threshold = float(np.mean(means)) - 2.0 * float(np.mean(ranges))
    return CalibrationProfile(
        containsmovement_threshold=threshold,
        per_capture_means=tuple(means),
        per_capture_ranges=tuple(ranges),
        created_at=time.time(),
        environment_label=environment_label,
    )


def _sliding_means(values: np.ndarray, window: int) -> np.ndarray:
    csum = np.concatenate(([0.0], np.cumsum(values)))
    return (csum[window:] - csum[:-window]) / window


def contains_movement(
    pcc: PccSeries, profile: CalibrationProfile, window_size: int = 5
) -> bool:
    """Whether a correlation series dips below the calibrated gate.

    The minimum of sliding window means is compared rather than the raw
    minimum, so a single-sample glitch cannot open the gate. Series
    shorter than the window are judged on their overall mean.
    """
    window = min(window_size, len(pcc))
    means = _sliding_means(pcc.values, window)
    return bool(means.min() < profile.containsmovement_threshold)


def running_variance(values, window: int) -> np.ndarray:
    """Population variance over each length-``window`` slice.

    Output element i covers values[i : i + window]; the result is
    ``len(values) - window + 1`` long. Computed streaming from running
    sums of the mean-shifted series.
    """
    x = np.asarray(values.values if isinstance(values, PccSeries) else values,
                   dtype=np.float64)
    if window < 1:
        raise ValueError("window must be >= 1")
    if window > x.size:
        raise WindowTooLarge(f"window {window} exceeds series length {x.size}")
    # shifting by the global mean keeps the sum-of-squares trick well
    # conditioned; the variance itself is shift-invariant
    shifted = x - x.mean()
    c1 = np.concatenate(([0.0], np.cumsum(shifted)))
    c2 = np.concatenate(([0.0], np.cumsum(shifted * shifted)))
    s1 = (c1[window:] - c1[:-window]) / window
    s2 = (c2[window:] - c2[:-window]) / window
    return np.maximum(s2 - s1 * s1, 0.0)


def sliding_variance_analysis(
    variance,
    config: DetectorConfig,
    initial_moving: bool,
    t0: float = 0.0,
    rate: float = 10.0,
) -> MovementMask:
    """Hysteresis state machine over the normalized running variance.

    The variance series is divided by its maximum (an all-zero series
    short-circuits to an all-false mask). At each step two adjacent
    windows of ``window_size`` samples are compared:

    * not moving -> moving when the absolute difference of the window
      means exceeds ``mov_threshold`` (a sharp relative change);
    * moving -> not moving when the mean level across both windows
      falls below ``nomov_threshold`` (the disturbance has died down).

    The state after each step is the verdict for that step. Verdicts
    exist for indices up to ``len - 2 * window_size``; the final state
    is extended so the mask is as long as the correlation series the
    variance was computed from (``len + variance_window - 1``).
    """
    var = np.asarray(
        variance.values if isinstance(variance, PccSeries) else variance,
        dtype=np.float64,
    )
    w = config.window_size
    n = var.size
    if n < 2 * w:
        raise InputTooShort(f"need at least {2 * w} variance samples, got {n}")
    mask_len = n + config.variance_window - 1
    vmax = var.max()
    if vmax <= 0.0:
        return MovementMask(np.zeros(mask_len, dtype=bool), t0=t0, rate=rate)

    nv = var / vmax
    means = _sliding_means(nv, w)
    first = means[: n - 2 * w + 1]
    second = means[w : n - w + 1]
    diffs = np.abs(first - second)
    levels = 0.5 * (first + second)

    states = np.empty(diffs.size, dtype=bool)
    moving = bool(initial_moving)
    for i in range(diffs.size):
        if moving:
            moving = not (levels[i] < config.nomov_threshold)
        else:
            moving = diffs[i] > config.mov_threshold
        states[i] = moving

    tail = np.full(mask_len - states.size, states[-1], dtype=bool)
    return MovementMask(np.concatenate([states, tail]), t0=t0, rate=rate)


def set_initial_state(
    pcc: PccSeries, profile: CalibrationProfile, config: DetectorConfig
) -> bool:
    """Initial moving state: does the capture open below the gate level?

    Lets captures that begin mid-movement classify their first samples
    correctly instead of waiting for a variance transition.
    """
    if len(pcc) < config.window_size:
        raise InputTooShort(
            f"need {config.window_size} correlation samples, got {len(pcc)}"
        )
    opening = float(pcc.values[: config.window_size].mean())
    return opening < profile.containsmovement_threshold


def _align_response(values: np.ndarray, initial: bool, lag: int) -> np.ndarray:
    if lag <= 0:
        return values
    lead = np.full(min(lag, values.size), initial, dtype=bool)
    return np.concatenate([lead, values[: values.size - lead.size]])


def detect(
    capture: CsiCapture,
    profile: CalibrationProfile,
    config: DetectorConfig | None = None,
    smap: SubcarrierMap | None = None,
    pipeline: PipelineConfig | None = None,
    response_lag: int | None = None,
) -> MovementMask:
    """Full pipeline: preprocess, correlate, gate, analyse variance.

    Returns one verdict per correlation sample at the output rate. If
    the gate finds no movement at all, the mask is all false and the
    variance analysis is skipped. ``response_lag`` overrides the
    window look-ahead compensation (samples); the default re-centres
    detector responses on event times.
    """
    config = DetectorConfig() if config is None else config
    if smap is None:
        smap = default_subcarrier_map(capture.channel_spec.bandwidth_mhz)
    pipeline = PipelineConfig() if pipeline is None else pipeline
    lag = default_response_lag(config) if response_lag is None else response_lag

    series = preprocess_pipeline(capture, smap, pipeline)
    pcc = pcc_series(series)
    if not contains_movement(pcc, profile, window_size=config.window_size):
        return MovementMask(np.zeros(len(pcc), dtype=bool), t0=pcc.t0, rate=pcc.rate)

    variance = running_variance(pcc.values, config.variance_window)
    initial = set_initial_state(pcc, profile, config)
    raw = sliding_variance_analysis(variance, config, initial, t0=pcc.t0, rate=pcc.rate)
    aligned = _align_response(raw.values, initial, lag)
    return MovementMask(aligned, t0=pcc.t0, rate=pcc.rate)


def save_profile(profile: CalibrationProfile, path) -> None:
    """Write a profile as the small ``csical v1`` text format."""
    lines = ["csical v1", f"threshold {profile.containsmovement_threshold!r}"]
    lines += [f"mean {m!r}" for m in profile.per_capture_means]
    lines += [f"range {r!r}" for r in profile.per_capture_ranges]
    lines.append(f"env {profile.environment_label}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_profile(path) -> CalibrationProfile:
    """Read a ``csical v1`` profile file.

    The stored threshold is checked against the one recomputed from the
    stored statistics. File creation time is not stored; ``created_at``
    is zero on loaded profiles.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh]
    if not lines or lines[0].strip() != "csical v1":
        raise SchemaViolation("not a csical v1 file")
    threshold = None
    means, ranges = [], []
    label = ""
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        key, _, rest = line.partition(" ")
        try:
            if key == "threshold":
                threshold = float(rest)
            elif key == "mean":
                means.append(float(rest))
            elif key == "range":
                ranges.append(float(rest))
            elif key == "env":
                label = rest
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            raise SchemaViolation(f"line {lineno}: {exc}") from None
    if threshold is None or not means or len(means) != len(ranges):
        raise SchemaViolation("profile is missing threshold, means or ranges")
    expected = float(np.mean(means)) - 2.0 * float(np.mean(ranges))
    if abs(expected - threshold) > 1e-9:
        raise SchemaViolation(
            f"stored threshold {threshold} disagrees with statistics ({expected})"
        )
    return CalibrationProfile(
        containsmovement_threshold=threshold,
        per_capture_means=tuple(means),
        per_capture_ranges=tuple(ranges),
        environment_label=label,
    )
