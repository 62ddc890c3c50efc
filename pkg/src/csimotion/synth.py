"""Seeded synthetic captures with scripted movement episodes.

Movement is modelled as rhythmic bursts of multiplicative per-frame
gain noise on a smooth per-subcarrier base profile: gestures such as
arm waving perturb the channel in pulses rather than at a constant
level, and the detector's variance windows rely on that texture. The
model carries enough structure to exercise the whole pipeline while
keeping ground truth known by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .capture import (
    BANDWIDTH_SUBCARRIERS,
    ChannelSpec,
    CsiCapture,
    CsiFrame,
)
from .errors import InvalidScript, SchemaViolation
from .evaluate import GroundTruth

_FIXED_PHASE = 0.6  # radians; the pipeline is gain-only, any constant works

#: Gesture rhythm inside movement episodes: burst repetition rate and
#: the fraction of peak perturbation sustained between bursts. Episodes
#: open on a burst peak, so onsets are sharp.
GESTURE_RATE_HZ = 0.6
GESTURE_FLOOR = 0.3


@dataclass(frozen=True)
class Episode:
    """A movement period: noise inside is ``intensity`` times the floor."""

    start_s: float
    end_s: float
    intensity: float


@dataclass(frozen=True)
class SynthScript:
    """Deterministic recipe for one capture and its ground truth."""

    duration_s: float = 35.0
    sample_rate: float = 100.0
    subcarriers: int = 256
    episodes: tuple = ()
    noise_floor: float = 0.02
    jitter_s: float = 0.002
    seed: int = 0
    base_profile: tuple | None = None

    def __post_init__(self):
        if self.duration_s <= 0 or self.sample_rate <= 0:
            raise InvalidScript("duration and sample rate must be positive")
        if self.subcarriers not in BANDWIDTH_SUBCARRIERS.values():
            raise InvalidScript(
                f"subcarriers must be one of {sorted(BANDWIDTH_SUBCARRIERS.values())}"
            )
        if self.noise_floor < 0 or self.jitter_s < 0:
            raise InvalidScript("noise floor and jitter must be non-negative")
        cursor = 0.0
        for ep in self.episodes:
            if ep.intensity < 0:
                raise InvalidScript(f"negative intensity in {ep}")
            if ep.start_s < cursor or ep.end_s <= ep.start_s:
                raise InvalidScript(f"episodes must be sorted and non-overlapping: {ep}")
            if ep.end_s > self.duration_s:
                raise InvalidScript(f"{ep} extends past duration {self.duration_s}")
            cursor = ep.end_s
        if self.base_profile is not None:
            profile = np.asarray(self.base_profile, dtype=np.float64)
            if profile.shape != (self.subcarriers,):
                raise InvalidScript("base profile length must match subcarriers")
            if not np.isfinite(profile).all() or profile.min() <= 0:
                raise InvalidScript("base profile must be finite and positive")

    @property
    def bandwidth_mhz(self) -> int:
        lookup = {s: bw for bw, s in BANDWIDTH_SUBCARRIERS.items()}
        return lookup[self.subcarriers]


def _default_profile(rng: np.random.Generator, subcarriers: int) -> np.ndarray:
    """Smooth frequency-selective gain curve, strictly positive."""
    idx = np.arange(subcarriers) / subcarriers
    phases = rng.uniform(0, 2 * np.pi, 3)
    profile = (
        1.0
        + 0.30 * np.sin(2 * np.pi * 2 * idx + phases[0])
        + 0.18 * np.sin(2 * np.pi * 5 * idx + phases[1])
        + 0.08 * np.sin(2 * np.pi * 11 * idx + phases[2])
    )
    return np.maximum(profile, 0.05)


def environment_profile(seed: int, subcarriers: int = 256) -> tuple:
    """Base gain profile standing in for one physical environment.

    Calibration only transfers between captures of the same room, so
    scripts meant to share an environment must share a base profile;
    vary only their script seeds. Scripts without an explicit profile
    each get a private one derived from their own seed.
    """
    rng = np.random.default_rng(seed)
    return tuple(float(v) for v in _default_profile(rng, subcarriers))


def _ground_truth(script: SynthScript) -> GroundTruth:
    intervals = []
    cursor = 0.0
    for ep in script.episodes:
        if ep.start_s > cursor:
            intervals.append((cursor, ep.start_s, "still"))
        intervals.append((ep.start_s, ep.end_s, "moving"))
        cursor = ep.end_s
    if cursor < script.duration_s:
        intervals.append((cursor, script.duration_s, "still"))
    return GroundTruth.from_intervals(intervals)


def generate(script: SynthScript):
    """Build a (CsiCapture, GroundTruth) pair from a script.

    Frame i sits near i/sample_rate with Gaussian timestamp jitter
    (order restored by sorting). Subcarrier gains are
    ``base_profile * (1 + sigma * z)``; sigma is the noise floor
    outside episodes, and inside an episode it pulses at the gesture
    rhythm with peaks of ``noise_floor * intensity``. The complex
    samples carry those gains at a fixed phase. Identical scripts
    produce identical captures.
    """
    rng = np.random.default_rng(script.seed)
    if script.base_profile is not None:
        profile = np.asarray(script.base_profile, dtype=np.float64)
    else:
        profile = _default_profile(rng, script.subcarriers)

    n = int(round(script.duration_s * script.sample_rate))
    if n < 2:
        raise InvalidScript("script yields fewer than 2 frames")
    times = np.arange(n) / script.sample_rate
    if script.jitter_s > 0:
        times = np.sort(times + rng.normal(0.0, script.jitter_s, n))

    sigma = np.full(n, script.noise_floor)
    for ep in script.episodes:
        inside = (times >= ep.start_s) & (times < ep.end_s)
        phase = 2.0 * np.pi * GESTURE_RATE_HZ * (times[inside] - ep.start_s)
        gesture = GESTURE_FLOOR + (1.0 - GESTURE_FLOOR) * 0.5 * (1.0 + np.cos(phase))
        sigma[inside] = script.noise_floor * ep.intensity * gesture

    noise = rng.standard_normal((n, script.subcarriers))
    gains = np.abs(profile[None, :] * (1.0 + sigma[:, None] * noise))
    values = gains * np.exp(1j * _FIXED_PHASE)

    frames = [
        CsiFrame(timestamp=float(times[i]), subcarriers=values[i], sequence=i)
        for i in range(n)
    ]
    spec = ChannelSpec(band_ghz=5.0, bandwidth_mhz=script.bandwidth_mhz)
    capture = CsiCapture(
        frames=frames, channel_spec=spec, nominal_rate=script.sample_rate
    )
    return capture, _ground_truth(script)


def load_script(path) -> SynthScript:
    """Read a script from a plain-text key-value file.

    Lines are ``<key> <value>`` with keys duration_s, sample_rate,
    subcarriers, noise_floor, jitter_s, seed, plus one
    ``episode <start> <end> <intensity>`` line per movement period and
    an optional ``base_profile`` line of comma-separated gains.
    """
    kwargs = {}
    episodes = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, _, rest = line.partition(" ")
            rest = rest.strip()
            try:
                if key == "episode":
                    start, end, intensity = (float(t) for t in rest.split())
                    episodes.append(Episode(start, end, intensity))
                elif key in ("duration_s", "sample_rate", "noise_floor", "jitter_s"):
                    kwargs[key] = float(rest)
                elif key in ("subcarriers", "seed"):
                    kwargs[key] = int(rest)
                elif key == "base_profile":
                    kwargs[key] = tuple(float(t) for t in rest.split(","))
                else:
                    raise ValueError(f"unknown key {key!r}")
            except ValueError as exc:
                raise SchemaViolation(f"line {lineno}: {exc}") from None
    return SynthScript(episodes=tuple(episodes), **kwargs)
