#!/usr/bin/env python3
"""
ctxcodec CLI Tool

Command-line front end for the contextual video codec: encode, decode,
train, evaluate and compare rate-distortion curves.
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Tuple

from ctxcodec import ContextualVideoCodec
from ctxcodec.exceptions import (
    ArgumentError,
    ConfigurationError,
    CtxCodecError,
    DataError,
)
from ctxcodec.harness import (
    bd_rate,
    curves_from_csv,
    entropy_demo,
    evaluate_reconstruction,
    run_benchmark,
)
from ctxcodec.video import load_image_sequence, load_manifest, load_yuv420

EXIT_OK = 0
EXIT_ARGUMENT = 2
EXIT_DATA = 3
EXIT_CONFIG = 4


# ANSI color codes
class Colors:
    """ANSI color escape codes."""

    RED = "\033[0;31m"
    GREEN = "\033[0;32m"
    YELLOW = "\033[1;33m"
    BLUE = "\033[0;34m"
    RESET = "\033[0m"


def colorize(text: str, color: str) -> str:
    """Add color to text if output is a TTY."""
    if sys.stdout.isatty():
        return f"{color}{text}{Colors.RESET}"
    return text


def success(msg: str):
    print(colorize(f"✓ {msg}", Colors.GREEN))


def error(msg: str):
    print(colorize(f"✗ {msg}", Colors.RED), file=sys.stderr)


def warning(msg: str):
    print(colorize(f"⚠ {msg}", Colors.YELLOW))


def info(msg: str):
    print(colorize(f"ℹ {msg}", Colors.BLUE))


def get_device() -> str:
    """Torch device from the environment (default: cpu)."""
    return os.environ.get("CTXCODEC_DEVICE", "") or "cpu"


def exit_code_for(exc: CtxCodecError) -> int:
    if isinstance(exc, ConfigurationError):
        return EXIT_CONFIG
    if isinstance(exc, DataError):
        return EXIT_DATA
    return EXIT_ARGUMENT


def parse_size(text: Optional[str]) -> Optional[Tuple[int, int]]:
    """``WxH`` to ``(width, height)``."""
    if text is None:
        return None
    try:
        width, height = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise ArgumentError(f"size must look like WxH, got: {text!r}") from None
    if width < 1 or height < 1:
        raise ArgumentError(f"size must be positive, got: {text!r}")
    return width, height


def load_frames(path: str, size: Optional[Tuple[int, int]], frames: int = 0):
    """Image directory or raw YUV420 file (``size`` required)."""
    if Path(path).is_dir():
        seq = load_image_sequence(path)
        if frames and len(seq) > frames:
            seq = type(seq)(seq.frames[:frames], seq.frame_rate)
        return seq
    if size is None:
        raise ArgumentError("raw YUV input needs --size WxH")
    return load_yuv420(path, size[0], size[1], max_frames=frames)


def load_codec(args) -> ContextualVideoCodec:
    codec = ContextualVideoCodec.from_checkpoint(args.checkpoint, device=args.device)
    if getattr(args, "intra", None):
        codec.intra_id = codec.registry.by_name(args.intra).codec_id
    return codec


def check_modes(args, codec: ContextualVideoCodec) -> None:
    """Flags that name a mode must agree with the checkpoint's configuration."""
    config = codec.config
    expected = {
        "entropy_mode": config.entropy_mode.value,
        "condition_mode": config.condition_mode.value,
        "motion_mode": config.motion_mode.value,
        "context_dim": config.context_dim,
    }
    for name, value in expected.items():
        given = getattr(args, name, None)
        if given is not None and given != value:
            raise ConfigurationError(f"--{name.replace('_', '-')} {given} does not match the checkpoint ({value})")


def cmd_encode(args):
    """Encode command."""
    codec = load_codec(args)
    check_modes(args, codec)
    records = codec.encode_file(
        args.input,
        args.out,
        size=parse_size(args.size),
        gop_size=args.gop,
        max_frames=args.frames,
        report_path=args.report,
    )
    total = sum(r.bpp for r in records) / len(records)
    success(f"Encoded {len(records)} frame(s) to {args.out} ({total:.4f} bpp)")
    return EXIT_OK


def cmd_decode(args):
    """Decode command."""
    codec = load_codec(args)
    seq = codec.decode_file(args.input, args.out)
    success(f"Decoded {len(seq)} frame(s) to {args.out}")
    return EXIT_OK


def cmd_train(args):
    """Train command."""
    # Imported here so encode/decode do not pay for the training stack.
    from ctxcodec.bitstream.intra import ToyHyperpriorIntra
    from ctxcodec.training import Trainer, load_train_job, train_intra

    job = load_train_job(args.config)
    if args.stage != "auto":
        job.schedule.stages = [int(args.stage)]
    dataset = job.dataset()
    intra = None
    if job.intra_steps:
        info(f"Training the toy intra codec for {job.intra_steps} step(s)...")
        intra = ToyHyperpriorIntra().to(args.device)
        train_intra(intra, dataset, job.intra_steps, lam=job.intra_lambda, batch_size=job.schedule.batch_size)
    info(f"Training stage(s) {job.schedule.stages} into {args.out}...")
    trainer = Trainer(
        job.config,
        job.schedule,
        dataset,
        args.out,
        device=args.device,
        init_from=args.resume,
        intra=intra,
        resume=args.resume is not None,
    )
    result = trainer.run()
    if result.history:
        last = result.history[-1]
        info(f"Last step: stage {last['stage']}, loss {last['loss']:.4f}")
    success(f"Checkpoint written to {result.checkpoint}")
    return EXIT_OK


def cmd_eval(args):
    """Eval command."""
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    size = parse_size(args.size)
    recon = load_frames(args.recon, size)
    reference = load_frames(args.ref, size, frames=len(recon))
    result = evaluate_reconstruction(recon, reference, metrics)
    for name, value in result.items():
        if value is None:
            warning(f"{name}: not defined for {reference.width}x{reference.height} frames")
        else:
            info(f"{name}: {value:.6f}")
    if args.report:
        Path(args.report).write_text(json.dumps({"frames": len(recon), **result}, indent=2))
        success(f"Report written to {args.report}")
    return EXIT_OK


def cmd_bdrate(args):
    """BD-rate command."""
    anchors = curves_from_csv(args.anchor, args.metric)
    tests = curves_from_csv(args.test, args.metric)
    results = []
    for (codec, sequence), test in sorted(tests.items()):
        matches = [curve for (_, seq), curve in anchors.items() if seq == sequence]
        if not matches:
            warning(f"No anchor curve for sequence {sequence}")
            continue
        value = bd_rate(matches[0], test)
        results.append(value)
        print(f"{codec:<24} {sequence:<24} {value:+8.2f}%")
    if not results:
        raise ArgumentError("anchor and test tables share no sequence")
    success(f"Average BD-rate over {len(results)} sequence(s): {sum(results) / len(results):+.2f}%")
    return EXIT_OK


def cmd_benchmark(args):
    """Benchmark command."""
    try:
        runs = json.loads(Path(args.runs).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"cannot read runs file {args.runs}: {e}") from e
    codecs = {label: {float(lam): path for lam, path in by_lambda.items()} for label, by_lambda in runs.items()}
    report = run_benchmark(load_manifest(args.manifest), codecs, args.out, device=args.device, workers=args.workers)
    success(f"{len(report.rows)} RD point(s) written to {args.out}")
    return EXIT_OK


def cmd_demo_entropy(args):
    """Entropy inequality demonstration."""
    report = entropy_demo(args.alphabet, args.trials, seed=args.seed)
    info(f"Independent uniform on {report.alphabet} symbols: "
         f"H(residue) = {report.uniform_residue:.4f} bits, H(conditional) = {report.uniform_conditional:.4f} bits")
    info(f"{report.trials} random joint pmfs: min gap {report.min_gap:.6f}, mean gap {report.mean_gap:.6f} bits")
    if report.violations:
        error(f"{report.violations} violation(s) of H(residue) >= H(conditional)")
        return EXIT_DATA
    success("Residue entropy never fell below the conditional entropy")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="ctxcodec CLI Tool",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Encode a 1920x1080 YUV420 file with GOP 10
  %(prog)s encode --input BasketballDrive.yuv --size 1920x1080 --gop 10 --checkpoint final.pt --out clip.dcv

  # Decode to PNGs
  %(prog)s decode --in clip.dcv --checkpoint final.pt --out decoded/

  # Train all stages from a job file
  %(prog)s train --config job.json --stage auto --out runs/lambda256

  # Compare RD tables
  %(prog)s bdrate --anchor x265.csv --test ctxcodec.csv

Environment Variables:
  CTXCODEC_DEVICE    Torch device for the networks (default: cpu)

Exit codes:
  0 success, 2 argument error, 3 data error, 4 configuration error
        """,
    )
    parser.add_argument("--device", default=get_device(), help="Torch device (default: from CTXCODEC_DEVICE or cpu)")
    parser.add_argument("--verbose", action="store_true", help="Verbose output")

    subparsers = parser.add_subparsers(dest="command", help="Command to execute")

    encode_parser = subparsers.add_parser("encode", help="Encode a sequence to a container file")
    encode_parser.add_argument("--input", required=True, help="Raw YUV420 file or PNG directory")
    encode_parser.add_argument("--size", help="Frame size WxH (raw YUV only)")
    encode_parser.add_argument("--gop", type=int, help="GOP size (default: 10 for YUV, 12 for images)")
    encode_parser.add_argument("--frames", type=int, default=0, help="Frames to encode (default: all)")
    encode_parser.add_argument("--checkpoint", required=True, help="Trained checkpoint")
    encode_parser.add_argument("--intra", help="Intra codec name (default: toy-hyperprior if trained, else lossless)")
    encode_parser.add_argument("--entropy-mode", help="Expected entropy mode of the checkpoint")
    encode_parser.add_argument("--condition-mode", help="Expected condition mode of the checkpoint")
    encode_parser.add_argument("--motion-mode", help="Expected motion mode of the checkpoint")
    encode_parser.add_argument("--context-dim", type=int, help="Expected context channels of the checkpoint")
    encode_parser.add_argument("--report", help="Write the per-frame rate report (JSON lines)")
    encode_parser.add_argument("--out", required=True, help="Output container file")
    encode_parser.set_defaults(func=cmd_encode)

    decode_parser = subparsers.add_parser("decode", help="Decode a container file")
    decode_parser.add_argument("--in", dest="input", required=True, help="Container file")
    decode_parser.add_argument("--checkpoint", required=True, help="Trained checkpoint")
    decode_parser.add_argument("--out", required=True, help="PNG directory, or a .yuv file")
    decode_parser.set_defaults(func=cmd_decode)

    train_parser = subparsers.add_parser("train", help="Progressive training")
    train_parser.add_argument("--config", required=True, help="JSON job file (codec, schedule, data)")
    train_parser.add_argument("--stage", choices=["1", "2", "3", "4", "auto"], default="auto",
                              help="Single stage or all configured stages (default: auto)")
    train_parser.add_argument("--resume", help="Checkpoint to continue from (weights and global step)")
    train_parser.add_argument("--out", default="runs", help="Output directory (default: runs)")
    train_parser.set_defaults(func=cmd_train)

    eval_parser = subparsers.add_parser("eval", help="Measure reconstruction quality")
    eval_parser.add_argument("--recon", required=True, help="Reconstruction (PNG directory or .yuv)")
    eval_parser.add_argument("--ref", required=True, help="Reference (PNG directory or .yuv)")
    eval_parser.add_argument("--size", help="Frame size WxH (raw YUV only)")
    eval_parser.add_argument("--metrics", default="psnr,msssim", help="Comma-separated metrics (default: psnr,msssim)")
    eval_parser.add_argument("--report", help="JSON report path")
    eval_parser.set_defaults(func=cmd_eval)

    bdrate_parser = subparsers.add_parser("bdrate", help="BD-rate of a test RD table against an anchor")
    bdrate_parser.add_argument("--anchor", required=True, help="Anchor RD CSV")
    bdrate_parser.add_argument("--test", required=True, help="Test RD CSV")
    bdrate_parser.add_argument("--metric", choices=["psnr", "msssim"], default="psnr", help="Quality axis")
    bdrate_parser.set_defaults(func=cmd_bdrate)

    bench_parser = subparsers.add_parser("benchmark", help="RD sweep over a manifest")
    bench_parser.add_argument("--manifest", required=True, help="Sequence manifest (JSON)")
    bench_parser.add_argument("--runs", required=True, help='JSON {"label": {"lambda": "checkpoint"}}')
    bench_parser.add_argument("--workers", type=int, default=1, help="Concurrent jobs (default: 1)")
    bench_parser.add_argument("--out", required=True, help="Output directory for rd.csv and report.json")
    bench_parser.set_defaults(func=cmd_benchmark)

    demo_parser = subparsers.add_parser("demo-entropy", help="Residue vs conditional entropy sweep")
    demo_parser.add_argument("--alphabet", type=int, default=4, help="Alphabet size (default: 4)")
    demo_parser.add_argument("--trials", type=int, default=1000, help="Random joint pmfs (default: 1000)")
    demo_parser.add_argument("--seed", type=int, default=0, help="RNG seed (default: 0)")
    demo_parser.set_defaults(func=cmd_demo_entropy)

    return parser


def main(argv=None):
    """Main entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return EXIT_ARGUMENT

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        return args.func(args)
    except KeyboardInterrupt:
        print()
        error("Interrupted by user")
        return 130
    except FileNotFoundError as e:
        error(f"File not found: {e.filename or e}")
        return EXIT_ARGUMENT
    except CtxCodecError as e:
        if args.verbose:
            import traceback

            traceback.print_exc()
        error(str(e))
        return exit_code_for(e)


if __name__ == "__main__":
    sys.exit(main())
