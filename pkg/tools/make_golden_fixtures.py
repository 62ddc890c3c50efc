#!/usr/bin/env python3
"""Generate the golden parser fixtures under tests/fixtures/.

Writes a 3-frame CSI pcap, the byte-exact csicap rendering of the same
frames, a big-endian pcap variant, and a 5-payload pcap with one
truncated record. All bytes are produced by the struct-level builders
in tests/pcapgen.py, independent of the package code, so the fixtures
act as an external reference for the parsers. Run once from the repo
root; the outputs are committed.
"""

import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "tests"))
import pcapgen

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"
S = 256
BASE_SEC = 1700000000


def frame_values(rng):
    return [(int(re), int(im)) for re, im in rng.integers(-2000, 2000, size=(S, 2))]


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(2024)
    frames = [frame_values(rng) for _ in range(5)]

    # --- golden3: 3 CSI frames plus ignorable non-CSI traffic
    packets = [
        (pcapgen.udp_packet(pcapgen.csi_payload(frames[0], seq=100)), BASE_SEC, 0),
        (b"\x00" * 40, BASE_SEC, 5000),  # not an IPv4/UDP packet
        (pcapgen.udp_packet(pcapgen.csi_payload(frames[1], seq=101)), BASE_SEC, 10000),
        (pcapgen.udp_packet(b"hello", dport=9999), BASE_SEC, 15000),  # other port
        (pcapgen.udp_packet(pcapgen.csi_payload(frames[2], seq=102)), BASE_SEC, 20000),
    ]
    (OUT / "golden3.pcap").write_bytes(pcapgen.pcap(packets))
    (OUT / "golden3_be.pcap").write_bytes(pcapgen.pcap(packets, big_endian=True))

    # csicap rendering of the same three frames (sequence 100..102)
    lines = [f"csicap v1 S={S} bw=80 rate=100.0"]
    for i, (usec, seq) in enumerate([(0, 100), (10000, 101), (20000, 102)]):
        ts = BASE_SEC + usec * 1e-6
        parts = [repr(ts), str(seq)]
        for re, im in frames[i]:
            parts.append(repr(float(re)))
            parts.append(repr(float(im)))
        lines.append(" ".join(parts))
    (OUT / "golden3.csicap").write_text("\n".join(lines) + "\n", encoding="utf-8")

    # --- skip5: five CSI payloads, the third truncated mid-body
    packets = []
    for i in range(5):
        payload = pcapgen.csi_payload(frames[i], seq=200 + i)
        if i == 2:
            payload = payload[: len(payload) // 2]
        packets.append((pcapgen.udp_packet(payload), BASE_SEC + 1, i * 10000))
    (OUT / "skip5.pcap").write_bytes(pcapgen.pcap(packets))

    print("fixtures written to", OUT)
    print("frame0 subcarrier0:", frames[0][0], " subcarrier255:", frames[0][255])
    print("frame2 subcarrier7:", frames[2][7])


if __name__ == "__main__":
    main()
