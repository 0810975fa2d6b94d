"""Argparse front end: ``detect``, ``suite`` and ``synth`` subcommands."""

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from ...application.ports import RecordingSource
from ...application.use_cases import SUITE_METHODS, DetectObjectsUseCase, RunSuiteResult, RunSuiteUseCase
from ...core.exceptions import ConfigurationError, DetectionError
from ...core.logger import get_logger, setup_logging
from ...core.metrics import write_metrics
from ...core.settings import PipelineSettings, get_settings
from ...infrastructure.io.config_file import load_config_file
from ...infrastructure.io.debug_images import DebugImageWriter
from ...infrastructure.io.npz_loader import NpzRecordingSource
from ...infrastructure.io.text_formats import (
    TextRecordingSource,
    write_detections,
    write_events,
    write_ground_truth,
    write_imu,
    write_intrinsics,
    write_score_report,
)
from ...infrastructure.synth import StandardSuiteCatalog, dump_scene_file, generate, load_scene_file, standard_suite

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1


def _positive_int(raw: str) -> int:
    value = int(raw)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {raw}")
    return value


def _positive_float(raw: str) -> float:
    value = float(raw)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {raw}")
    return value


def build_parser() -> argparse.ArgumentParser:
    """Parser for all subcommands."""
    parser = argparse.ArgumentParser(
        prog="jstr",
        description="Moving-object detection for event cameras with IMU ego-motion compensation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    detect = sub.add_parser("detect", help="Detect moving objects in a recording")
    detect.add_argument("--events", type=Path, help="Event file, x,y,t,p per line")
    detect.add_argument("--imu", type=Path, help="IMU file, t,wx,wy,wz,ax,ay,az per line")
    detect.add_argument("--intrinsics", type=Path, help="Intrinsics key=value file")
    detect.add_argument("--npz", type=Path, help="Archive with events, imu and intrinsics arrays")
    detect.add_argument("--gt", type=Path, help="Ground-truth boxes, t0,x_min,y_min,x_max,y_max per line")
    detect.add_argument("--config", type=Path, help="Flat key=value settings file")
    detect.add_argument("--method", choices=SUITE_METHODS, help="Overrides the configured method")
    detect.add_argument("--workers", type=_positive_int, help="Windows processed in parallel")
    detect.add_argument("--debug-dir", type=Path, help="Write intermediate images here")
    detect.add_argument("--out", type=Path, default=Path("out"), help="Output directory")
    detect.add_argument("--metrics-file", type=Path, help="Prometheus text exposition output")
    detect.set_defaults(handler=cmd_detect)

    suite = sub.add_parser("suite", help="Score every method on the synthetic benchmark scenes")
    suite.add_argument("--out", type=Path, default=Path("suite"), help="Output directory")
    suite.add_argument("--seed", type=int, default=0, help="Scene seed")
    suite.add_argument("--config", type=Path, help="Flat key=value settings file")
    suite.add_argument("--scene", action="append", dest="scenes", help="Restrict to a scene; repeatable")
    suite.add_argument("--workers", type=_positive_int, help="Windows processed in parallel")
    suite.set_defaults(handler=cmd_suite)

    synth = sub.add_parser("synth", help="Render a synthetic scene to text files")
    source = synth.add_mutually_exclusive_group(required=True)
    source.add_argument("--scene", help="Name of a standard scene")
    source.add_argument("--spec", type=Path, help="Scene description file")
    synth.add_argument("--seed", type=int, default=0, help="Seed for standard scenes")
    synth.add_argument("--dt", type=_positive_float, default=0.02, help="Window duration for ground truth")
    synth.add_argument("--out", type=Path, default=Path("scene"), help="Output directory")
    synth.set_defaults(handler=cmd_synth)
    return parser


def _settings(args: argparse.Namespace) -> PipelineSettings:
    settings = load_config_file(args.config) if args.config else get_settings()
    overrides = {}
    if getattr(args, "method", None):
        overrides["method"] = args.method
    if getattr(args, "workers", None):
        overrides["workers"] = args.workers
    return settings.model_copy(update=overrides) if overrides else settings


def _source(args: argparse.Namespace) -> RecordingSource:
    if args.npz:
        return NpzRecordingSource(args.npz, args.gt)
    missing = [flag for flag in ("events", "imu", "intrinsics") if getattr(args, flag) is None]
    if missing:
        raise ConfigurationError(f"missing {', '.join('--' + m for m in missing)} (or pass --npz)")
    return TextRecordingSource(args.events, args.imu, args.intrinsics, args.gt)


def _fail(stage: str, error: Exception | str) -> int:
    print(f"[{stage}] {error}", file=sys.stderr)
    return EXIT_FAILURE


def cmd_detect(args: argparse.Namespace) -> int:
    """Run detection on one recording and write its outputs.

    Writes ``detections.txt`` and, with ground truth, ``metrics.txt`` into
    ``--out``.
    """
    try:
        settings = _settings(args)
    except DetectionError as e:
        return _fail("config", e)
    setup_logging(settings)

    try:
        recording = _source(args).load()
    except DetectionError as e:
        return _fail("load", e)

    debug_sink = DebugImageWriter(args.debug_dir) if args.debug_dir else None
    result = DetectObjectsUseCase(settings, debug_sink).execute(recording)
    if not result.success:
        print(result.error, file=sys.stderr)
        return EXIT_FAILURE

    count = write_detections(args.out / "detections.txt", result.detections)
    if result.report is not None:
        write_score_report(
            args.out / "metrics.txt",
            result.report,
            header=[("recording", recording.name), ("method", result.method)],
        )
    if args.metrics_file and settings.metrics_enabled:
        write_metrics(args.metrics_file)

    summary = f"{recording.name}: {len(result.windows)} windows, {count} detections"
    if result.report is not None:
        summary += f", mean_iou={result.report.mean_iou:.6f}, accuracy={result.report.accuracy:.6f}"
    print(summary)
    return EXIT_OK


def format_suite_table(result: RunSuiteResult) -> str:
    """Fixed-width scene x method table."""
    lines = [f"{'scene':<22}{'method':<12}{'mean_iou':>10}{'accuracy':>10}{'windows':>9}"]
    for r in result.rows:
        lines.append(f"{r.scene:<22}{r.method:<12}{r.mean_iou:>10.6f}{r.accuracy:>10.6f}{r.windows:>9d}")
    return "\n".join(lines) + "\n"


def suite_document(result: RunSuiteResult, seed: int) -> str:
    """JSON form of the suite table."""
    doc = {
        "seed": seed,
        "rows": [
            {
                "scene": r.scene,
                "method": r.method,
                "mean_iou": round(r.mean_iou, 12),
                "accuracy": round(r.accuracy, 12),
                "windows": r.windows,
            }
            for r in result.rows
        ],
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def cmd_suite(args: argparse.Namespace) -> int:
    """Evaluate all methods on the standard scenes; writes ``report.txt`` and ``report.json``."""
    try:
        settings = _settings(args)
    except DetectionError as e:
        return _fail("config", e)
    setup_logging(settings)

    catalog = StandardSuiteCatalog(seed=args.seed)
    try:
        result = RunSuiteUseCase(settings, catalog).execute(scenes=args.scenes)
    except DetectionError as e:
        return _fail("suite", e)
    if not result.success:
        print(result.error, file=sys.stderr)
        return EXIT_FAILURE

    args.out.mkdir(parents=True, exist_ok=True)
    table = format_suite_table(result)
    (args.out / "report.txt").write_text(table, encoding="utf-8")
    (args.out / "report.json").write_text(suite_document(result, args.seed), encoding="utf-8")
    print(table, end="")
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    """Render a scene into the text formats ``detect`` reads."""
    try:
        if args.spec:
            spec = load_scene_file(args.spec)
        else:
            scenes = standard_suite(args.seed)
            if args.scene not in scenes:
                return _fail("synth", f"unknown scene {args.scene!r}; choose from {', '.join(scenes)}")
            spec = scenes[args.scene]
        output = generate(spec, args.dt)
    except DetectionError as e:
        return _fail("synth", e)

    out: Path = args.out
    write_events(out / "events.txt", output.events)
    write_imu(out / "imu.txt", output.imu)
    write_intrinsics(out / "intrinsics.txt", spec.geometry)
    write_ground_truth(out / "gt.txt", output.ground_truth)
    dump_scene_file(spec, out / "scene.txt")
    print(f"{out}: {len(output.events)} events, {len(output.imu)} imu samples, {len(output.ground_truth)} boxes")
    return EXIT_OK


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments and dispatch; returns the process exit status."""
    args = build_parser().parse_args(argv)
    return args.handler(args)
