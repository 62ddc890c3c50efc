"""Amplitude preprocessing: resample, prune subcarriers, filter, decimate.

The stages run in a fixed order on the gain matrix of a capture:
linear resampling onto a uniform 100 Hz grid, removal of pilot/null
subcarriers with extraction of the lower 20 MHz band, zero-phase
low-pass filtering at 10 Hz, then decimation to 10 Hz.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

import numpy as np
from scipy.signal import butter, filtfilt

from .capture import BANDWIDTH_SUBCARRIERS, CsiCapture, amplitudes
from .errors import (
    CutoffAboveNyquist,
    DegenerateSpan,
    NonIntegerDecimation,
    SchemaViolation,
    ShapeMismatch,
    TooFewFrames,
)

FILTER_ORDER = 5
_MAP_NAME = re.compile(r"subcarriers-(\d+)\.map$")


@dataclass(eq=False)
class AmplitudeSeries:
    """Uniformly sampled gain matrix, shape (samples, subcarriers).

    Sample i sits at time ``t0 + i / rate``. At least two subcarriers
    are required (frame correlation is meaningless on fewer) and all
    entries must be finite.
    """

    data: np.ndarray
    rate: float
    t0: float = 0.0

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("data must be 2-D (samples x subcarriers)")
        if arr.shape[1] < 2:
            raise ValueError("need at least 2 subcarriers")
        if not np.isfinite(arr).all():
            raise ValueError("data contains non-finite entries")
        if self.rate <= 0:
            raise ValueError("rate must be positive")
        self.data = arr

    def __len__(self) -> int:
        return self.data.shape[0]

    @property
    def n_subcarriers(self) -> int:
        return self.data.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self)) / self.rate


@dataclass(frozen=True)
class SubcarrierMap:
    """Which subcarrier indices to drop and which band slice to keep.

    ``lower_band`` is a half-open [start, stop) index interval. The kept
    columns are the lower-band indices minus nulls and pilots, in their
    original order. Construction fails if fewer than two columns remain.
    """

    bandwidth_mhz: int
    null_indices: frozenset
    pilot_indices: frozenset
    lower_band: tuple

    def __post_init__(self):
        total = self.total_subcarriers  # validates bandwidth
        start, stop = self.lower_band
        if not (0 <= start < stop <= total):
            raise ShapeMismatch(f"lower band {self.lower_band} outside [0, {total})")
        for idx in self.null_indices | self.pilot_indices:
            if not 0 <= idx < total:
                raise ShapeMismatch(f"index {idx} outside [0, {total})")
        if len(self.retained_indices()) < 2:
            raise ShapeMismatch("map retains fewer than 2 subcarriers")

    @property
    def total_subcarriers(self) -> int:
        if self.bandwidth_mhz not in BANDWIDTH_SUBCARRIERS:
            raise ShapeMismatch(f"unsupported bandwidth {self.bandwidth_mhz} MHz")
        return BANDWIDTH_SUBCARRIERS[self.bandwidth_mhz]

    def retained_indices(self) -> np.ndarray:
        start, stop = self.lower_band
        dropped = self.null_indices | self.pilot_indices
        return np.array([i for i in range(start, stop) if i not in dropped])


def parse_subcarrier_map(text: str, bandwidth_mhz: int) -> SubcarrierMap:
    """Parse ``null <i>`` / ``pilot <i>`` / ``lower <start> <stop>`` lines."""
    nulls, pilots = set(), set()
    lower = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        try:
            if tokens[0] == "null" and len(tokens) == 2:
                nulls.add(int(tokens[1]))
            elif tokens[0] == "pilot" and len(tokens) == 2:
                pilots.add(int(tokens[1]))
            elif tokens[0] == "lower" and len(tokens) == 3:
                lower = (int(tokens[1]), int(tokens[2]))
            else:
                raise ValueError
        except ValueError:
            raise SchemaViolation(f"line {lineno}: bad map entry {raw!r}") from None
    if lower is None:
        raise SchemaViolation("map does not define a lower band")
    return SubcarrierMap(
        bandwidth_mhz=bandwidth_mhz,
        null_indices=frozenset(nulls),
        pilot_indices=frozenset(pilots),
        lower_band=lower,
    )


def load_subcarrier_map(path, bandwidth_mhz: int | None = None) -> SubcarrierMap:
    """Load a map file; bandwidth comes from the ``subcarriers-<bw>.map`` name."""
    path = str(path)
    if bandwidth_mhz is None:
        match = _MAP_NAME.search(path)
        if match is None:
            raise SchemaViolation(
                f"cannot infer bandwidth from {path!r}; pass bandwidth_mhz"
            )
        bandwidth_mhz = int(match.group(1))
    with open(path, "r", encoding="utf-8") as fh:
        return parse_subcarrier_map(fh.read(), bandwidth_mhz)


def default_subcarrier_map(bandwidth_mhz: int = 80) -> SubcarrierMap:
    """The subcarrier table shipped with the package."""
    name = f"subcarriers-{bandwidth_mhz}.map"
    ref = resources.files("csimotion.data").joinpath(name)
    if not ref.is_file():
        raise SchemaViolation(f"no packaged subcarrier map for {bandwidth_mhz} MHz")
    return parse_subcarrier_map(ref.read_text(encoding="utf-8"), bandwidth_mhz)


def resample_linear(
    values: np.ndarray, timestamps: np.ndarray, target_rate: float
) -> AmplitudeSeries:
    """Linearly resample rows onto a uniform grid.

    The grid starts at the first timestamp, steps 1/target_rate and
    ends at or before the last timestamp. Each output row interpolates
    per column between the bracketing input rows; grid points that hit
    input timestamps reproduce the input rows exactly. Duplicate
    timestamps are collapsed keeping the last occurrence.
    """
    values = np.asarray(values, dtype=np.float64)
    timestamps = np.asarray(timestamps, dtype=np.float64)
    if values.ndim != 2 or timestamps.ndim != 1 or len(values) != len(timestamps):
        raise ShapeMismatch("values must be (frames x subcarriers) matching timestamps")
    if len(values) < 2:
        raise TooFewFrames("resampling needs at least 2 frames")
    if np.any(np.diff(timestamps) < 0):
        raise ValueError("timestamps must be non-decreasing")
    span = timestamps[-1] - timestamps[0]
    if span <= 0.0:
        raise DegenerateSpan("all frames share one timestamp")

    keep = np.concatenate([timestamps[1:] != timestamps[:-1], [True]])
    ts = timestamps[keep]
    rows = values[keep]

    n_out = int(np.floor(span * target_rate + 1e-9)) + 1
    grid = ts[0] + np.arange(n_out) / target_rate
    out = np.empty((n_out, values.shape[1]))
    for col in range(values.shape[1]):
        out[:, col] = np.interp(grid, ts, rows[:, col])
    return AmplitudeSeries(data=out, rate=target_rate, t0=ts[0])


def prune_subcarriers(series: AmplitudeSeries, smap: SubcarrierMap) -> AmplitudeSeries:
    """Restrict columns to the map's retained set, order preserved."""
    if series.n_subcarriers != smap.total_subcarriers:
        raise ShapeMismatch(
            f"series has {series.n_subcarriers} columns, map expects "
            f"{smap.total_subcarriers}"
        )
    kept = series.data[:, smap.retained_indices()]
    return AmplitudeSeries(data=kept, rate=series.rate, t0=series.t0)


def lowpass(series: AmplitudeSeries, cutoff_hz: float) -> AmplitudeSeries:
    """Zero-phase Butterworth low-pass, unity DC gain.

    A 5th-order filter is applied forward and backward per column
    (squaring the magnitude response, cancelling phase) with reflective
    edge padding of 3x the filter order.
    """
    nyquist = series.rate / 2.0
    if cutoff_hz >= nyquist:
        raise CutoffAboveNyquist(f"cutoff {cutoff_hz} Hz >= Nyquist {nyquist} Hz")
    if cutoff_hz <= 0:
        raise ValueError("cutoff must be positive")
    padlen = 3 * FILTER_ORDER
    if len(series) <= padlen:
        raise TooFewFrames(f"filtering needs more than {padlen} samples")
    b, a = butter(FILTER_ORDER, cutoff_hz / nyquist)
    filtered = filtfilt(b, a, series.data, axis=0, padtype="even", padlen=padlen)
    return AmplitudeSeries(data=filtered, rate=series.rate, t0=series.t0)


def downsample(series: AmplitudeSeries, target_rate: float) -> AmplitudeSeries:
    """Keep every (rate/target_rate)-th row starting at row 0."""
    factor = series.rate / target_rate
    if abs(factor - round(factor)) > 1e-9 or round(factor) < 1:
        raise NonIntegerDecimation(
            f"rate {series.rate} Hz is not an integer multiple of {target_rate} Hz"
        )
    step = int(round(factor))
    return AmplitudeSeries(
        data=series.data[::step], rate=series.rate / step, t0=series.t0
    )


@dataclass(frozen=True)
class PipelineConfig:
    """Rates for the preprocessing chain."""

    source_rate: float = 100.0
    cutoff_hz: float = 10.0
    output_rate: float = 10.0


def preprocess_pipeline(
    capture: CsiCapture,
    smap: SubcarrierMap,
    config: PipelineConfig = PipelineConfig(),
    trace: list | None = None,
) -> AmplitudeSeries:
    """Run the full chain: amplitudes -> resample -> prune -> lowpass -> downsample.

    Filtering at the output rate leaves the band edge at the decimated
    Nyquist; lower ``cutoff_hz`` for an anti-aliasing margin at the cost
    of responsiveness. Pass a list as ``trace`` to record each stage's
    output shape.
    """
    gains = amplitudes(capture)
    stages = [("amplitudes", gains.shape)]
    series = resample_linear(gains, capture.timestamps, config.source_rate)
    stages.append(("resample", series.data.shape))
    series = prune_subcarriers(series, smap)
    stages.append(("prune", series.data.shape))
    series = lowpass(series, config.cutoff_hz)
    stages.append(("lowpass", series.data.shape))
    series = downsample(series, config.output_rate)
    stages.append(("downsample", series.data.shape))
    if trace is not None:
        trace.extend(stages)
    return series
