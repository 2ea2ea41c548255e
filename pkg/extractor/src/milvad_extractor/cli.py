"""Command line front end: `vadbridge extract`."""

from __future__ import annotations

import argparse
import logging
import sys

from .encoders import parse_encoder
from .extract import DimensionMismatchError, extract
from .manifest import read_manifest
from .video import VideoDecodeError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vadbridge",
        description="Run clip encoders over videos and write feature-store files.",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    cmd = commands.add_parser("extract", help="encode manifest videos into one store file")
    cmd.add_argument("--manifest", required=True, help="CSV with path,id,label rows")
    cmd.add_argument("--out", required=True, help="output feature-store path")
    cmd.add_argument(
        "--i3d-encoder",
        default="projection:dim=24,seed=1",
        help="encoder spec for the first stream (default: %(default)s)",
    )
    cmd.add_argument(
        "--tsf-encoder",
        default="projection:dim=40,seed=2",
        help="encoder spec for the second stream (default: %(default)s)",
    )
    cmd.add_argument("--segments", type=int, default=32, help="segments per video")
    cmd.add_argument(
        "--frames-per-segment", type=int, default=16, help="frames fed per clip"
    )
    cmd.set_defaults(handler=_cmd_extract)
    return parser


def dispatch(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except (ValueError, OSError, VideoDecodeError, DimensionMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO, format="%(levelname)s: %(message)s"
    )
    sys.exit(dispatch(sys.argv[1:]))


def _cmd_extract(args: argparse.Namespace) -> int:
    if args.segments < 1 or args.frames_per_segment < 1:
        raise ValueError("--segments and --frames-per-segment must be >= 1")
    rows = read_manifest(args.manifest)
    summary = extract(
        rows,
        args.out,
        i3d_encoder=parse_encoder(args.i3d_encoder),
        tsf_encoder=parse_encoder(args.tsf_encoder),
        num_segments=args.segments,
        frames_per_segment=args.frames_per_segment,
    )
    print(
        f"wrote {summary.written} videos to {args.out} "
        f"({len(summary.skipped)} skipped, dims i3d={summary.i3d_dim} tsf={summary.tsf_dim})"
    )
    return 0
