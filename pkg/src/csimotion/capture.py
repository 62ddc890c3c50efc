"""CSI capture containers and the portable ``csicap`` text format.

A capture is an ordered sequence of frames, one complex value per OFDM
subcarrier per frame. Downstream processing uses only the gain
(magnitude) of those values; phase is retained in the containers but
never propagated.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import MixedSubcarrierCount, NoCsiFrames, SchemaViolation

#: Subcarrier count per channel bandwidth (MHz) for 802.11ac captures.
BANDWIDTH_SUBCARRIERS = {20: 64, 40: 128, 80: 256}

DEFAULT_SOURCE_ID = b"\x00\x00\x00\x00\x00\x00"
DEFAULT_NOMINAL_RATE = 100.0

_CANONICAL_HEADER = re.compile(
    r"^csicap v1 S=(\d+) bw=(\d+) rate=([0-9eE.+-]+)$"
)


@dataclass(frozen=True)
class ComplexSample:
    """One subcarrier's complex channel estimate."""

    re: float
    im: float

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise ValueError(f"non-finite sample ({self.re}, {self.im})")

    @property
    def amplitude(self) -> float:
        """Gain sqrt(re^2 + im^2), always >= 0."""
        return math.hypot(self.re, self.im)

    @property
    def phase(self) -> float:
        """Phase angle in radians. Derivable but unused downstream."""
        return math.atan2(self.im, self.re)


@dataclass(frozen=True)
class ChannelSpec:
    """Radio channel parameters of a capture."""

    band_ghz: float
    bandwidth_mhz: int
    channel: int = 0

    def __post_init__(self):
        if self.bandwidth_mhz not in BANDWIDTH_SUBCARRIERS:
            raise ValueError(f"unsupported bandwidth {self.bandwidth_mhz} MHz")
        if self.band_ghz not in (2.4, 5.0):
            raise ValueError(f"unsupported band {self.band_ghz} GHz")

    @property
    def subcarriers(self) -> int:
        """Nominal subcarrier count for this bandwidth."""
        return BANDWIDTH_SUBCARRIERS[self.bandwidth_mhz]


@dataclass(eq=False)
class CsiFrame:
    """A single CSI measurement: one complex value per subcarrier.

    Attributes
    ----------
    timestamp : float
        Seconds since the capture epoch, microsecond resolution.
    subcarriers : np.ndarray
        Complex vector of per-subcarrier channel estimates, shape (S,).
    source_id : bytes
        Transmitter MAC address (6 bytes), opaque identifier.
    sequence : int
        Packet sequence counter as reported by the capture hardware.
    """

    timestamp: float
    subcarriers: np.ndarray
    source_id: bytes = DEFAULT_SOURCE_ID
    sequence: int = 0

    def __post_init__(self):
        arr = np.asarray(self.subcarriers, dtype=np.complex128)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("subcarriers must be a non-empty 1-D vector")
        if not np.isfinite(arr).all():
            raise ValueError("subcarriers contain non-finite values")
        if not math.isfinite(self.timestamp):
            raise ValueError("timestamp must be finite")
        self.subcarriers = arr

    def amplitudes(self) -> np.ndarray:
        """Per-subcarrier gains of this frame."""
        return np.abs(self.subcarriers)

    def __eq__(self, other):
        if not isinstance(other, CsiFrame):
            return NotImplemented
        return (
            self.timestamp == other.timestamp
            and self.sequence == other.sequence
            and self.source_id == other.source_id
            and np.array_equal(self.subcarriers, other.subcarriers)
        )


@dataclass(eq=False)
class CsiCapture:
    """An ordered CSI recording from a single transmit/receive pair.

    Frames are stably sorted by timestamp on construction, so captures
    always present a non-decreasing time axis. ``skipped_count`` records
    how many malformed payloads a parser dropped; it is provenance
    metadata and takes no part in equality.
    """

    frames: list[CsiFrame]
    channel_spec: ChannelSpec
    nominal_rate: float = DEFAULT_NOMINAL_RATE
    skipped_count: int = 0

    def __post_init__(self):
        if not self.frames:
            raise NoCsiFrames("capture holds no frames")
        counts = {f.subcarriers.size for f in self.frames}
        if len(counts) != 1:
            raise MixedSubcarrierCount(
                f"subcarrier count varies within capture: {sorted(counts)}"
            )
        self.frames = sorted(self.frames, key=lambda f: f.timestamp)

    def __eq__(self, other):
        if not isinstance(other, CsiCapture):
            return NotImplemented
        return (
            self.channel_spec == other.channel_spec
            and self.nominal_rate == other.nominal_rate
            and len(self.frames) == len(other.frames)
            and all(a == b for a, b in zip(self.frames, other.frames))
        )

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def subcarrier_count(self) -> int:
        return self.frames[0].subcarriers.size

    @property
    def timestamps(self) -> np.ndarray:
        return np.array([f.timestamp for f in self.frames])

    @property
    def duration(self) -> float:
        return self.frames[-1].timestamp - self.frames[0].timestamp

    def estimated_rate(self) -> float:
        """Observed frame rate (frames-1)/span, 0.0 for degenerate spans."""
        span = self.duration
        if span <= 0.0 or len(self.frames) < 2:
            return 0.0
        return (len(self.frames) - 1) / span


def amplitudes(capture: CsiCapture) -> np.ndarray:
    """Gain matrix of a capture, shape (frames, subcarriers).

    Entry (i, s) is sqrt(re^2 + im^2) of frame i, subcarrier s.
    """
    return np.abs(np.stack([f.subcarriers for f in capture.frames]))


def _fmt(value: float) -> str:
    # repr of a Python float is the shortest string that round-trips
    return repr(float(value))


def write_canonical(capture: CsiCapture) -> bytes:
    """Serialize a capture to the ``csicap v1`` text format.

    Deterministic: the same capture always produces identical bytes.
    The format stores timestamps, sequence numbers and complex values;
    source MAC and the 2.4/5 GHz band flag are not representable and
    are dropped (parsers restore their defaults).
    """
    s = capture.subcarrier_count
    lines = [
        f"csicap v1 S={s} bw={capture.channel_spec.bandwidth_mhz} "
        f"rate={_fmt(capture.nominal_rate)}"
    ]
    for frame in capture.frames:
        parts = [_fmt(frame.timestamp), str(frame.sequence)]
        for value in frame.subcarriers:
            parts.append(_fmt(value.real))
            parts.append(_fmt(value.imag))
        lines.append(" ".join(parts))
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_canonical(data: bytes) -> CsiCapture:
    """Parse the ``csicap v1`` text format back into a capture.

    Raises SchemaViolation with a line locus for malformed input and
    NoCsiFrames when the record list is empty. Round-trips exactly with
    write_canonical for captures using the default source id and band.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise SchemaViolation(f"not UTF-8 text: {exc}") from None
    lines = text.splitlines()
    if not lines:
        raise SchemaViolation("empty input, expected a csicap header")
    header = _CANONICAL_HEADER.match(lines[0])
    if header is None:
        raise SchemaViolation(f"line 1: bad header {lines[0]!r}")
    s = int(header.group(1))
    bandwidth = int(header.group(2))
    if s < 1:
        raise SchemaViolation("line 1: S must be >= 1")
    if bandwidth not in BANDWIDTH_SUBCARRIERS:
        raise SchemaViolation(f"line 1: unsupported bandwidth {bandwidth}")
    try:
        rate = float(header.group(3))
    except ValueError:
        raise SchemaViolation("line 1: bad rate") from None

    frames = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        tokens = line.split()
        if len(tokens) != 2 + 2 * s:
            raise SchemaViolation(
                f"line {lineno}: expected {2 + 2 * s} fields, got {len(tokens)}"
            )
        try:
            timestamp = float(tokens[0])
            sequence = int(tokens[1])
            values = np.array(tokens[2:], dtype=np.float64)
        except ValueError as exc:
            raise SchemaViolation(f"line {lineno}: {exc}") from None
        if not np.isfinite(values).all() or not math.isfinite(timestamp):
            raise SchemaViolation(f"line {lineno}: non-finite value")
        frames.append(
            CsiFrame(
                timestamp=timestamp,
                subcarriers=values[0::2] + 1j * values[1::2],
                sequence=sequence,
            )
        )
    if not frames:
        raise NoCsiFrames("csicap file declares no frames")
    spec = ChannelSpec(band_ghz=5.0, bandwidth_mhz=bandwidth)
    return CsiCapture(frames=frames, channel_spec=spec, nominal_rate=rate)


def load_capture(path) -> CsiCapture:
    """Read a capture file, sniffing pcap vs. canonical by magic bytes."""
    from .nexmon import PCAP_MAGIC_BYTES, parse_nexmon_pcap

    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] in PCAP_MAGIC_BYTES:
        return parse_nexmon_pcap(data)
    return parse_canonical(data)
