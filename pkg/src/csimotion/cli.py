"""Command-line interface: parse, calibrate, detect, evaluate, synth.

Exit codes: 0 on success, 2 for user or input errors, 1 reserved for
internal failures. No command mutates its inputs.
"""

from __future__ import annotations

import argparse
import sys
import traceback

import numpy as np

from .capture import load_capture, write_canonical
from .correlation import pcc_series, sti_series
from .detector import (
    DetectorConfig,
    MovementMask,
    calibrate,
    contains_movement,
    detect,
    load_profile,
    running_variance,
    save_profile,
    set_initial_state,
)
from .errors import CsiError, SchemaViolation
from .evaluate import (
    EvalRun,
    batch_evaluate,
    load_ground_truth,
    load_pir_events,
    rasterize_events,
    save_ground_truth,
)
from .preprocess import (
    PipelineConfig,
    default_subcarrier_map,
    load_subcarrier_map,
    preprocess_pipeline,
)
from .synth import generate, load_script


def _write_series_csv(path, header: str, times, values, fmt=repr) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for t, v in zip(times, values):
            fh.write(f"{t:.6f},{fmt(v)}\n")


def write_mask_csv(mask: MovementMask, path) -> None:
    _write_series_csv(
        path, "t_s,moving", mask.times, mask.values, fmt=lambda v: "1" if v else "0"
    )


def _resolve_map(args, capture):
    if getattr(args, "map", None):
        return load_subcarrier_map(args.map)
    return default_subcarrier_map(capture.channel_spec.bandwidth_mhz)


def _detector_config(args) -> DetectorConfig:
    defaults = DetectorConfig()
    return DetectorConfig(
        mov_threshold=args.mov_threshold if args.mov_threshold is not None
        else defaults.mov_threshold,
        nomov_threshold=args.nomov_threshold if args.nomov_threshold is not None
        else defaults.nomov_threshold,
        window_size=args.window_size if args.window_size is not None
        else defaults.window_size,
        variance_window=args.variance_window if args.variance_window is not None
        else defaults.variance_window,
    )


def cmd_parse(args) -> int:
    with open(args.pcap, "rb") as fh:
        data = fh.read()
    from .nexmon import parse_nexmon_pcap

    capture = parse_nexmon_pcap(data)
    with open(args.out, "wb") as fh:
        fh.write(write_canonical(capture))
    print(
        f"frames={len(capture)} subcarriers={capture.subcarrier_count} "
        f"estimated_rate={capture.estimated_rate():.1f}Hz "
        f"skipped={capture.skipped_count}"
    )
    return 0


def cmd_calibrate(args) -> int:
    if len(args.captures) != 5:
        print(
            f"warning: calibration normally uses 5 captures, got {len(args.captures)}",
            file=sys.stderr,
        )
    series = []
    for path in args.captures:
        capture = load_capture(path)
        span = capture.duration
        if abs(span - 10.0) > 2.0:
            print(
                f"warning: {path} spans {span:.1f}s, expected about 10s",
                file=sys.stderr,
            )
        smap = _resolve_map(args, capture)
        series.append(pcc_series(preprocess_pipeline(capture, smap)))
    profile = calibrate(series, environment_label=args.env)
    save_profile(profile, args.out)
    print(f"containsmovement_threshold={profile.containsmovement_threshold:.6f}")
    return 0


def cmd_detect(args) -> int:
    capture = load_capture(args.capture)
    profile = load_profile(args.profile)
    smap = _resolve_map(args, capture)
    config = _detector_config(args)

    series = preprocess_pipeline(capture, smap)
    pcc = pcc_series(series)
    if args.emit_pcc:
        _write_series_csv(args.emit_pcc, "t_s,pcc", pcc.times, pcc.values)
    if args.emit_sti:
        values = sti_series(pcc, series.n_subcarriers)
        _write_series_csv(args.emit_sti, "t_s,sti", pcc.times, values)
    if args.emit_variance:
        variance = running_variance(pcc.values, config.variance_window)
        _write_series_csv(
            args.emit_variance, "t_s,variance", pcc.times[: variance.size], variance
        )

    mask = detect(capture, profile, config, smap)
    if args.out:
        write_mask_csv(mask, args.out)
    if args.emit_svg:
        from .plots import svg_timeline

        with open(args.emit_svg, "w", encoding="utf-8") as fh:
            fh.write(svg_timeline(mask))

    moving = mask.moving_seconds()
    total = len(mask) / mask.rate
    if moving > 0:
        print(f"moving {moving:.1f}s of {total:.1f}s ({100 * moving / total:.1f}%)")
    else:
        print("no movement detected")
    return 0


def _parse_manifest(path):
    profile_path = None
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = {}
            for token in line.split():
                key, sep, value = token.partition("=")
                if not sep or not value:
                    raise SchemaViolation(f"line {lineno}: bad token {token!r}")
                fields[key] = value
            if "profile" in fields:
                profile_path = fields["profile"]
                continue
            if "capture" not in fields or "gt" not in fields:
                raise SchemaViolation(
                    f"line {lineno}: entry needs capture= and gt= ({line!r})"
                )
            entries.append((lineno, fields))
    if profile_path is None:
        raise SchemaViolation("manifest is missing a profile= line")
    if not entries:
        raise SchemaViolation("manifest lists no runs")
    return profile_path, entries


def cmd_evaluate(args) -> int:
    profile_path, entries = _parse_manifest(args.manifest)
    profile = load_profile(profile_path)
    runs = []
    for lineno, fields in entries:
        try:
            capture = load_capture(fields["capture"])
            gt = load_ground_truth(fields["gt"])
            pir = load_pir_events(fields["pir"]) if "pir" in fields else None
        except (OSError, CsiError) as exc:
            raise SchemaViolation(
                f"manifest line {lineno} ({fields['capture']}): {exc}"
            ) from None
        runs.append(
            EvalRun(
                name=fields["capture"],
                capture=capture,
                gt=gt,
                pir_events=pir,
                movement=fields.get("movement", ""),
            )
        )
    summary = batch_evaluate(runs, profile, smap=_resolve_map(args, runs[0].capture))
    print(summary.to_text(), end="")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(summary.to_csv())
    return 0


def cmd_synth(args) -> int:
    script = load_script(args.script)
    capture, gt = generate(script)
    with open(args.out, "wb") as fh:
        fh.write(write_canonical(capture))
    if args.gt:
        save_ground_truth(gt, args.gt)
    print(
        f"frames={len(capture)} subcarriers={capture.subcarrier_count} "
        f"duration={script.duration_s:.1f}s episodes={len(script.episodes)}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csimotion",
        description="Movement detection from WiFi channel state information.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="convert a Nexmon pcap to the csicap format")
    p.add_argument("pcap")
    p.add_argument("out")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("calibrate", help="build a profile from empty-room captures")
    p.add_argument("captures", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--env", default="")
    p.add_argument("--map")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("detect", help="run movement detection on one capture")
    p.add_argument("capture")
    p.add_argument("--profile", required=True)
    p.add_argument("--out")
    p.add_argument("--emit-pcc")
    p.add_argument("--emit-sti")
    p.add_argument("--emit-variance")
    p.add_argument("--emit-svg")
    p.add_argument("--map")
    p.add_argument("--mov-threshold", type=float)
    p.add_argument("--nomov-threshold", type=float)
    p.add_argument("--window-size", type=int)
    p.add_argument("--variance-window", type=int)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate", help="score captures listed in a manifest")
    p.add_argument("manifest")
    p.add_argument("--csv")
    p.add_argument("--map")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="generate a synthetic capture from a script")
    p.add_argument("--script", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--gt")
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CsiError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 1


def run() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    run()
