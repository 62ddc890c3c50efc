"""Decoder for classic-pcap captures of Nexmon CSI UDP traffic.

Only the framing needed to locate CSI payloads is parsed: Ethernet II,
IPv4, and UDP datagrams addressed to port 5500. Every other packet is
ignored. A CSI payload is laid out as::

    offset  size  field
    0       2     magic 0x1111 (little-endian)
    2       1     RSSI, signed dB
    3       1     802.11 frame control
    4       6     source MAC
    10      2     sequence counter (LE)
    12      2     core (bits 0-2) / spatial stream (bits 3-5) (LE)
    14      2     Broadcom chanspec (LE)
    16      2     chip version (LE)
    18      4*S   interleaved int16 LE real/imag pairs

S follows from the chanspec bandwidth bits (20 MHz -> 64, 40 -> 128,
80 -> 256). Payloads that do not decode are skipped and counted.
"""

from __future__ import annotations

import struct

import numpy as np

from .capture import ChannelSpec, CsiCapture, CsiFrame
from .errors import MixedStreams, MixedSubcarrierCount, NoCsiFrames, NotAPcap

PCAP_MAGIC = 0xA1B2C3D4
PCAP_MAGIC_BYTES = (
    PCAP_MAGIC.to_bytes(4, "little"),
    PCAP_MAGIC.to_bytes(4, "big"),
)
GLOBAL_HEADER_LEN = 24
RECORD_HEADER_LEN = 16

CSI_UDP_PORT = 5500
NEXMON_MAGIC = 0x1111
NEXMON_HEADER_LEN = 18

_CHANSPEC_BW_MASK = 0x3800
_CHANSPEC_BW = {0x1000: 20, 0x1800: 40, 0x2000: 80}
_CHANSPEC_BAND_MASK = 0xC000
_CHANSPEC_BAND = {0x0000: 2.4, 0xC000: 5.0}


def decode_chanspec(value: int) -> ChannelSpec | None:
    """Decode a Broadcom chanspec word, or None if band/bandwidth is unknown."""
    bandwidth = _CHANSPEC_BW.get(value & _CHANSPEC_BW_MASK)
    band = _CHANSPEC_BAND.get(value & _CHANSPEC_BAND_MASK)
    if bandwidth is None or band is None:
        return None
    return ChannelSpec(band_ghz=band, bandwidth_mhz=bandwidth, channel=value & 0xFF)


def encode_chanspec(spec: ChannelSpec) -> int:
    """Inverse of decode_chanspec, used when writing captures."""
    bw_bits = {v: k for k, v in _CHANSPEC_BW.items()}[spec.bandwidth_mhz]
    band_bits = {v: k for k, v in _CHANSPEC_BAND.items()}[spec.band_ghz]
    return band_bits | bw_bits | (spec.channel & 0xFF)


def _udp_payload(packet: bytes) -> bytes | None:
    """Payload of an Ethernet/IPv4/UDP packet to the CSI port, else None."""
    if len(packet) < 14 or packet[12:14] != b"\x08\x00":
        return None
    ip = packet[14:]
    if len(ip) < 20 or ip[0] >> 4 != 4:
        return None
    ihl = (ip[0] & 0x0F) * 4
    if ihl < 20 or len(ip) < ihl + 8 or ip[9] != 17:
        return None
    udp = ip[ihl:]
    if int.from_bytes(udp[2:4], "big") != CSI_UDP_PORT:
        return None
    udp_len = int.from_bytes(udp[4:6], "big")
    if udp_len < 8:
        return None
    return udp[8 : min(udp_len, len(udp))]


def _decode_csi_payload(payload: bytes):
    """Decode one CSI payload, or None when malformed."""
    if len(payload) < NEXMON_HEADER_LEN:
        return None
    magic, _rssi, _fctl = struct.unpack_from("<HbB", payload, 0)
    if magic != NEXMON_MAGIC:
        return None
    source_mac = bytes(payload[4:10])
    sequence, core_spatial, chanspec, _chip = struct.unpack_from("<HHHH", payload, 10)
    spec = decode_chanspec(chanspec)
    if spec is None:
        return None
    s = spec.subcarriers
    if len(payload) != NEXMON_HEADER_LEN + 4 * s:
        return None
    iq = np.frombuffer(
        payload, dtype="<i2", offset=NEXMON_HEADER_LEN, count=2 * s
    ).astype(np.float64)
    values = iq[0::2] + 1j * iq[1::2]
    return spec, core_spatial & 0x7, (core_spatial >> 3) & 0x7, source_mac, sequence, values


def parse_nexmon_pcap(data: bytes) -> CsiCapture:
    """Parse a classic pcap byte stream into a capture.

    One frame per valid CSI payload, timestamped from the pcap record
    header and stably sorted by time. Malformed CSI payloads are skipped
    and counted in ``skipped_count``; packets that are not UDP traffic
    to the CSI port are ignored silently.

    Raises
    ------
    NotAPcap
        Global header magic is neither 0xA1B2C3D4 nor its byte swap.
    NoCsiFrames
        No packet yielded a valid CSI frame.
    MixedSubcarrierCount
        The chanspec-implied subcarrier count changed mid-capture.
    MixedStreams
        More than one core/spatial-stream pair appears in the capture.
    """
    if len(data) < GLOBAL_HEADER_LEN:
        raise NotAPcap("input shorter than a pcap global header")
    if data[:4] == PCAP_MAGIC_BYTES[0]:
        endian = "<"
    elif data[:4] == PCAP_MAGIC_BYTES[1]:
        endian = ">"
    else:
        raise NotAPcap(f"bad magic {data[:4].hex()}")

    frames: list[CsiFrame] = []
    skipped = 0
    spec = None
    stream = None
    offset = GLOBAL_HEADER_LEN
    while offset + RECORD_HEADER_LEN <= len(data):
        ts_sec, ts_frac, incl_len, _orig_len = struct.unpack_from(
            endian + "IIII", data, offset
        )
        offset += RECORD_HEADER_LEN
        if incl_len > len(data) - offset:
            break  # truncated trailing record
        packet = data[offset : offset + incl_len]
        offset += incl_len

        payload = _udp_payload(packet)
        if payload is None:
            continue
        decoded = _decode_csi_payload(payload)
        if decoded is None:
            skipped += 1
            continue
        frame_spec, core, spatial, source_mac, sequence, values = decoded
        if spec is None:
            spec = frame_spec
            stream = (core, spatial)
        elif frame_spec.subcarriers != spec.subcarriers:
            raise MixedSubcarrierCount(
                f"subcarrier count changed from {spec.subcarriers} "
                f"to {frame_spec.subcarriers}"
            )
        if (core, spatial) != stream:
            raise MixedStreams(
                f"capture mixes streams {stream} and {(core, spatial)}"
            )
        frames.append(
            CsiFrame(
                timestamp=ts_sec + ts_frac * 1e-6,
                subcarriers=values,
                source_id=source_mac,
                sequence=sequence,
            )
        )

    if not frames:
        raise NoCsiFrames("no valid CSI payloads in capture")
    return CsiCapture(frames=frames, channel_spec=spec, skipped_count=skipped)
