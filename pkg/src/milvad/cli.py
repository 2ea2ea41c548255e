"""Command-line interface.

Subcommands: ``plan`` (segmentation arithmetic), ``synth`` (seeded synthetic
bags), ``train`` (fit a scoring head), ``score`` (per-segment scores),
``eval`` (AUC report), ``inspect`` (validate a bag file). Primary output
goes to stdout and is byte-deterministic for fixed arguments and inputs;
diagnostics go to stderr. Exit codes: 0 success, 1 validation or file
format failure, 2 usage error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .bagfile import read_bags, validate_bags, write_bags
from .errors import BagFormatError, NumericError
from .evaluation import evaluate
from .fusion import fuse_bag
from .head import load_checkpoint, save_checkpoint
from .planning import (
    DEFAULT_FRAMES_PER_SEGMENT,
    DEFAULT_NUM_SEGMENTS,
    VideoManifest,
    build_plan,
    plan_lines,
)
from .synthetic import SynthConfig, generate, partition
from .training import TrainConfig, score_video, train


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


def dispatch(argv: list[str]) -> int:
    """Parse and run one invocation, mapping failures to exit codes."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 0 for --help, 2 for usage errors
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except (ValueError, BagFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="milvad",
        description="Weakly supervised video anomaly detection on segment features.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="print segment boundaries and sampled frame indices")
    p.add_argument("--frames", type=int, required=True, help="total frame count")
    p.add_argument("--segments", type=int, default=DEFAULT_NUM_SEGMENTS)
    p.add_argument("--frames-per-segment", type=int, default=DEFAULT_FRAMES_PER_SEGMENT)
    p.set_defaults(handler=_cmd_plan)

    p = sub.add_parser("synth", help="generate a seeded synthetic feature bag file")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--normal", type=int, default=100, help="normal videos in the main split")
    p.add_argument("--anomalous", type=int, default=100, help="anomalous videos in the main split")
    p.add_argument("--test-normal", type=int, default=0, help="extra normal videos for a test split")
    p.add_argument("--test-anomalous", type=int, default=0)
    p.add_argument("--segments", type=int, default=32)
    p.add_argument("--i3d-dim", type=int, default=24)
    p.add_argument("--tsf-dim", type=int, default=40)
    p.add_argument("--planted", type=int, default=3, help="planted segments per anomalous video")
    p.add_argument("--shift", type=float, default=1.5, help="signal strength along the planted direction")
    p.add_argument("--out", required=True, help="output bag file for the main split")
    p.add_argument("--test-out", help="output bag file for the test split")
    p.add_argument("--masks", help="optional text file of planted segment indices (main split)")
    p.add_argument("--test-masks", help="optional masks file for the test split")
    p.set_defaults(handler=_cmd_synth)

    p = sub.add_parser("train", help="train a scoring head on a bag file")
    p.add_argument("--features", required=True, help="training bag file")
    p.add_argument("--val", help="optional validation bag file, reports AUC per epoch")
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch-pairs", type=int, default=8)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--beta1", type=float, default=0.9)
    p.add_argument("--beta2", type=float, default=0.999)
    p.add_argument("--eps", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--hidden", type=int, nargs=3, default=[512, 128, 32], metavar="H")
    p.add_argument("--slope", type=float, default=0.01)
    p.set_defaults(handler=_cmd_train)

    p = sub.add_parser("score", help="print per-video probability and segment scores")
    p.add_argument("--features", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--k", type=int, default=3)
    p.set_defaults(handler=_cmd_score)

    p = sub.add_parser("eval", help="print a CSV report with per-video rows and the AUC")
    p.add_argument("--features", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--report", help="also write the report to this file")
    p.set_defaults(handler=_cmd_eval)

    p = sub.add_parser("inspect", help="validate a bag file and print a summary")
    p.add_argument("file")
    p.set_defaults(handler=_cmd_inspect)

    return parser


def _cmd_plan(args) -> int:
    manifest = VideoManifest(video_id="video", frame_count=args.frames, label=0)
    plan = build_plan(manifest, args.segments, args.frames_per_segment)
    for line in plan_lines(plan):
        print(line)
    return 0


def _cmd_synth(args) -> int:
    for name in ("normal", "anomalous", "test_normal", "test_anomalous"):
        if getattr(args, name) < 0:
            raise ValueError(f"--{name.replace('_', '-')} must be >= 0")
    test_count = args.test_normal + args.test_anomalous
    if test_count > 0 and not args.test_out:
        raise ValueError("--test-out is required when test split counts are set")
    config = SynthConfig(
        seed=args.seed,
        num_normal=args.normal + args.test_normal,
        num_anomalous=args.anomalous + args.test_anomalous,
        num_segments=args.segments,
        i3d_dim=args.i3d_dim,
        tsf_dim=args.tsf_dim,
        anomalous_segments_per_video=args.planted,
        signal_shift=args.shift,
    )
    bags, masks = generate(config)
    main_bags, main_masks, test_bags, test_masks = partition(
        bags, masks, args.normal, args.anomalous
    )
    write_bags(args.out, main_bags)
    print(f"wrote {len(main_bags)} videos to {args.out}")
    if args.masks:
        _write_masks(args.masks, main_masks)
        print(f"wrote masks for {len(main_masks)} videos to {args.masks}")
    if test_count > 0:
        write_bags(args.test_out, test_bags)
        print(f"wrote {len(test_bags)} videos to {args.test_out}")
        if args.test_masks:
            _write_masks(args.test_masks, test_masks)
            print(f"wrote masks for {len(test_masks)} videos to {args.test_masks}")
    return 0


def _cmd_train(args) -> int:
    train_bags = [fuse_bag(b) for b in read_bags(args.features)]
    val_bags = [fuse_bag(b) for b in read_bags(args.val)] if args.val else None
    config = TrainConfig(
        k=args.k,
        epochs=args.epochs,
        batch_pairs=args.batch_pairs,
        learning_rate=args.lr,
        moment_decay_1=args.beta1,
        moment_decay_2=args.beta2,
        epsilon=args.eps,
        seed=args.seed,
        hidden_sizes=tuple(args.hidden),
        leaky_slope=args.slope,
    )

    def report(epoch: int, loss: float, val_auc: float | None) -> None:
        line = f"{epoch} {loss:.6f}"
        if val_auc is not None:
            line += f" {val_auc:.6f}"
        print(line, flush=True)

    record = train(train_bags, val_bags, config, on_epoch=report)
    save_checkpoint(args.out, record.parameters)
    print(f"checkpoint written to {args.out}", file=sys.stderr)
    return 0


def _cmd_score(args) -> int:
    params = load_checkpoint(args.checkpoint)
    for bag in read_bags(args.features):
        probability, scores = score_video(fuse_bag(bag), params, args.k)
        scores_text = " ".join(f"{s:.6f}" for s in scores)
        print(f"{bag.video_id} {probability:.6f} {scores_text}")
    return 0


def _cmd_eval(args) -> int:
    params = load_checkpoint(args.checkpoint)
    bags = [fuse_bag(b) for b in read_bags(args.features)]
    report = evaluate(bags, params, args.k)
    text = "\n".join(report.csv_lines())
    print(text)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return 0


def _cmd_inspect(args) -> int:
    report = validate_bags(args.file)
    for line in report.lines():
        print(line)
    return 0 if report.ok else 1


def _write_masks(path: str, masks: dict[str, tuple[int, ...]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for video_id in sorted(masks):
            indices = " ".join(str(i) for i in masks[video_id])
            fh.write(f"{video_id} {indices}\n")
