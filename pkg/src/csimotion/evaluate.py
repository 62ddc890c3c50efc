"""Scoring of movement masks against interval ground truth.

Accuracy is the fraction of 10 Hz samples classified correctly. The
uncommon correct-to-incorrect ratio is also reported for completeness.
A mask's first sample is aligned with ground-truth time zero; absolute
capture epochs play no role in scoring.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .detector import (
    CalibrationProfile,
    DetectorConfig,
    MovementMask,
    detect,
)
from .errors import (
    CsiError,
    GapInGroundTruth,
    RateMismatch,
    SchemaViolation,
    UnsortedEvents,
)
from .preprocess import PipelineConfig, SubcarrierMap

_LABELS = ("moving", "still")
_TIME_EPS = 1e-9


@dataclass(frozen=True)
class GroundTruth:
    """Labelled, gap-free intervals covering [0, total_duration_s]."""

    intervals: tuple
    total_duration_s: float

    def __post_init__(self):
        if not self.intervals:
            raise GapInGroundTruth("no intervals")
        cursor = 0.0
        for start, end, label in self.intervals:
            if label not in _LABELS:
                raise ValueError(f"label must be one of {_LABELS}, got {label!r}")
            if abs(start - cursor) > _TIME_EPS:
                raise GapInGroundTruth(
                    f"interval starting at {start} leaves [{cursor}, {start}] uncovered"
                    if start > cursor
                    else f"interval starting at {start} overlaps the previous one"
                )
            if end <= start:
                raise GapInGroundTruth(f"empty interval ({start}, {end})")
            cursor = end
        if abs(cursor - self.total_duration_s) > _TIME_EPS:
            raise GapInGroundTruth(
                f"intervals cover [0, {cursor}], expected [0, {self.total_duration_s}]"
            )

    @classmethod
    def from_intervals(cls, intervals) -> "GroundTruth":
        intervals = tuple((float(s), float(e), str(l)) for s, e, l in intervals)
        return cls(intervals=intervals, total_duration_s=intervals[-1][1])


#: Scripted timelines of the five recorded movement patterns
#: (still/moving phases in seconds).
MOVEMENT_TIMELINES = {
    1: ((0, 10, "still"), (10, 25, "moving"), (25, 35, "still")),
    2: ((0, 7, "moving"), (7, 14, "still"), (14, 21, "moving")),
    3: ((0, 10, "still"), (10, 20, "moving"), (20, 30, "still")),
    4: ((0, 5, "still"), (5, 10, "moving")),
    5: ((0, 5, "still"), (5, 10, "moving")),
}


def movement_ground_truth(movement: int) -> GroundTruth:
    """Ground truth for one of the five scripted movement patterns."""
    if movement not in MOVEMENT_TIMELINES:
        raise ValueError(f"movement must be 1..5, got {movement}")
    return GroundTruth.from_intervals(MOVEMENT_TIMELINES[movement])


def rasterize(gt: GroundTruth, rate: float) -> np.ndarray:
    """Boolean moving-vector at the given rate; sample i sits at i/rate.

    A sample landing exactly on an interval boundary belongs to the
    following interval.
    """
    if rate <= 0:
        raise ValueError("rate must be positive")
    n = int(round(gt.total_duration_s * rate))
    times = np.arange(n) / rate
    starts = np.array([start for start, _, _ in gt.intervals])
    moving = np.array([label == "moving" for _, _, label in gt.intervals])
    idx = np.searchsorted(starts, times + _TIME_EPS, side="right") - 1
    return moving[idx]


@dataclass(frozen=True)
class AccuracyReport:
    """Sample-level agreement between a mask and ground truth.

    ``onset_latency_s`` holds, per moving interval, the delay from the
    interval start to the first true mask sample inside it (NaN when
    the interval was never detected). ``correct_to_incorrect`` is the
    literal ratio of correct to incorrect samples (inf when perfect).
    """

    accuracy: float
    correct_samples: int
    total_samples: int
    trimmed_samples: int
    correct_to_incorrect: float
    per_interval: tuple
    onset_latency_s: tuple


def score(mask: MovementMask, gt: GroundTruth, rate: float = 10.0) -> AccuracyReport:
    """Compare a mask against rasterized ground truth sample by sample.

    Mask and ground truth are truncated to the shorter of the two;
    the trimmed sample count is recorded in the report.
    """
    if abs(mask.rate - rate) > 1e-9:
        raise RateMismatch(f"mask rate {mask.rate} Hz, scoring expects {rate} Hz")
    reference = rasterize(gt, rate)
    n = min(len(reference), len(mask.values))
    trimmed = max(len(reference), len(mask.values)) - n
    predicted = mask.values[:n]
    actual = reference[:n]
    correct = int((predicted == actual).sum())
    incorrect = n - correct

    per_interval = []
    latencies = []
    for start, end, label in gt.intervals:
        lo = min(int(round(start * rate)), n)
        hi = min(int(round(end * rate)), n)
        if hi > lo:
            acc = float((predicted[lo:hi] == actual[lo:hi]).mean())
        else:
            acc = float("nan")
        per_interval.append((start, end, label, acc))
        if label == "moving":
            hits = np.flatnonzero(predicted[lo:hi])
            latencies.append(float(hits[0]) / rate if hits.size else float("nan"))

    return AccuracyReport(
        accuracy=correct / n if n else 0.0,
        correct_samples=correct,
        total_samples=n,
        trimmed_samples=trimmed,
        correct_to_incorrect=correct / incorrect if incorrect else float("inf"),
        per_interval=tuple(per_interval),
        onset_latency_s=tuple(latencies),
    )


def rasterize_events(events, rate: float, duration_s: float) -> np.ndarray:
    """Hold-last-state rasterization of (timestamp, state) events.

    The state before the first event is False. Events must be sorted.
    """
    times = np.array([t for t, _ in events], dtype=np.float64)
    if np.any(np.diff(times) < 0):
        raise UnsortedEvents("event timestamps must be ascending")
    states = np.array([bool(s) for _, s in events])
    n = int(round(duration_s * rate))
    grid = np.arange(n) / rate
    idx = np.searchsorted(times, grid + _TIME_EPS, side="right") - 1
    out = np.zeros(n, dtype=bool)
    seen = idx >= 0
    out[seen] = states[idx[seen]]
    return out


def score_pir(events, gt: GroundTruth, rate: float = 10.0) -> AccuracyReport:
    """Score a PIR event trace against ground truth.

    The trace is rasterized to a hold-last-state boolean signal at the
    scoring rate and then scored exactly like a movement mask.
    """
    values = rasterize_events(events, rate, gt.total_duration_s)
    return score(MovementMask(values, t0=0.0, rate=rate), gt, rate=rate)


@dataclass
class EvalRun:
    """One capture to score: inputs plus its movement-type label."""

    name: str
    capture: object
    gt: GroundTruth
    pir_events: list | None = None
    movement: str = ""


@dataclass
class RunResult:
    name: str
    movement: str
    csi_accuracy: float | None = None
    pir_accuracy: float | None = None
    error: str | None = None


@dataclass
class BatchSummary:
    """Per-run scores plus per-movement and overall means."""

    results: list = field(default_factory=list)

    @property
    def failures(self) -> list:
        return [r for r in self.results if r.error is not None]

    def _mean(self, values) -> float:
        values = [v for v in values if v is not None]
        return float(np.mean(values)) if values else float("nan")

    def movement_types(self) -> list:
        seen = []
        for r in self.results:
            if r.error is None and r.movement not in seen:
                seen.append(r.movement)
        return sorted(seen)

    def movement_mean(self, movement: str, sensor: str = "csi") -> float:
        rows = [r for r in self.results if r.error is None and r.movement == movement]
        key = "csi_accuracy" if sensor == "csi" else "pir_accuracy"
        return self._mean([getattr(r, key) for r in rows])

    def overall_mean(self, sensor: str = "csi") -> float:
        key = "csi_accuracy" if sensor == "csi" else "pir_accuracy"
        return self._mean([getattr(r, key) for r in self.results if r.error is None])

    def to_csv(self) -> str:
        lines = ["name,movement,csi_accuracy,pir_accuracy,error"]
        for r in self.results:
            csi = "" if r.csi_accuracy is None else f"{r.csi_accuracy:.6f}"
            pir = "" if r.pir_accuracy is None else f"{r.pir_accuracy:.6f}"
            lines.append(f"{r.name},{r.movement},{csi},{pir},{r.error or ''}")
        for movement in self.movement_types():
            csi = self.movement_mean(movement, "csi")
            pir = self.movement_mean(movement, "pir")
            pir_txt = "" if np.isnan(pir) else f"{pir:.6f}"
            lines.append(f"mean,{movement},{csi:.6f},{pir_txt},")
        csi = self.overall_mean("csi")
        pir = self.overall_mean("pir")
        pir_txt = "" if np.isnan(pir) else f"{pir:.6f}"
        lines.append(f"mean,all,{csi:.6f},{pir_txt},")
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        def pct(v):
            return "     -" if v is None or np.isnan(v) else f"{100 * v:5.1f}%"

        width = max([len(r.name) for r in self.results] + [12])
        header = f"{'run':<{width}}  {'movement':>8}  {'csi':>6}  {'pir':>6}"
        lines = [header, "-" * len(header)]
        for r in self.results:
            if r.error is not None:
                lines.append(f"{r.name:<{width}}  {r.movement:>8}  failed: {r.error}")
            else:
                lines.append(
                    f"{r.name:<{width}}  {r.movement:>8}  "
                    f"{pct(r.csi_accuracy)}  {pct(r.pir_accuracy)}"
                )
        lines.append("-" * len(header))
        for movement in self.movement_types():
            lines.append(
                f"{'mean movement ' + movement:<{width}}  {'':>8}  "
                f"{pct(self.movement_mean(movement, 'csi'))}  "
                f"{pct(self.movement_mean(movement, 'pir'))}"
            )
        lines.append(
            f"{'mean overall':<{width}}  {'':>8}  "
            f"{pct(self.overall_mean('csi'))}  {pct(self.overall_mean('pir'))}"
        )
        return "\n".join(lines) + "\n"


def batch_evaluate(
    runs,
    profile: CalibrationProfile,
    config: DetectorConfig | None = None,
    smap: SubcarrierMap | None = None,
    pipeline: PipelineConfig | None = None,
) -> BatchSummary:
    """Detect and score every run, continuing past per-run failures."""
    if not runs:
        raise ValueError("no runs to evaluate")
    summary = BatchSummary()
    for run in runs:
        result = RunResult(name=run.name, movement=str(run.movement))
        try:
            mask = detect(run.capture, profile, config, smap, pipeline)
            result.csi_accuracy = score(mask, run.gt).accuracy
            if run.pir_events is not None:
                result.pir_accuracy = score_pir(run.pir_events, run.gt).accuracy
        except CsiError as exc:
            result.error = f"{type(exc).__name__}: {exc}"
        summary.results.append(result)
    return summary


def load_ground_truth(path) -> GroundTruth:
    """Read ``start_s end_s {moving|still}`` lines."""
    intervals = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            if len(tokens) != 3 or tokens[2] not in _LABELS:
                raise SchemaViolation(f"line {lineno}: bad interval {raw!r}")
            try:
                intervals.append((float(tokens[0]), float(tokens[1]), tokens[2]))
            except ValueError:
                raise SchemaViolation(f"line {lineno}: bad number in {raw!r}") from None
    if not intervals:
        raise SchemaViolation("ground-truth file holds no intervals")
    return GroundTruth.from_intervals(intervals)


def save_ground_truth(gt: GroundTruth, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for start, end, label in gt.intervals:
            fh.write(f"{start!r} {end!r} {label}\n")


def load_pir_events(path) -> list:
    """Read a ``t_s,state`` CSV trace (header row optional)."""
    events = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or (lineno == 1 and line.lower().startswith("t_s")):
                continue
            parts = line.split(",")
            if len(parts) != 2 or parts[1].strip() not in ("0", "1"):
                raise SchemaViolation(f"line {lineno}: bad PIR event {raw!r}")
            try:
                events.append((float(parts[0]), parts[1].strip() == "1"))
            except ValueError:
                raise SchemaViolation(f"line {lineno}: bad timestamp {raw!r}") from None
    return events
