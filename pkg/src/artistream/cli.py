"""Command-line entry point.

Subcommands: stream (live pipeline), eval (PCC against a reference), sweep
(artificial-context comparison), profile (summarize a latency CSV),
shm-inspect (dump shared-memory log state).

Config precedence: CLI flag > environment (ARTISTREAM_SHM_NAME,
ARTISTREAM_WS_PORT) > --config JSON file > built-in default.

Exit codes: 0 clean end (including Ctrl-C on a live stream), 2 configuration
errors, 3 runtime errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .audio import open_source
from .defaults import default_norm_spec, default_rig
from .ema import NUM_DIMS, NormSpec
from .engine import CsvSink, EngineConfig, ShmSink, StreamEngine, WsSink
from .errors import ArtistreamError, ConfigError
from .evaluate import context_sweep, evaluate_stream
from .inversion import parse_backend_spec
from .kinematics import RigConfig
from .profiler import format_summary, read_profile_csv, summarize, summary_json, write_profile_csv
from .transport import DEFAULT_WS_PORT, ShmWriter, StreamServer, inspect_shm
from .vad import VadConfig
from .window import ContextStrategy, WindowConfig

ENV_SHM_NAME = "ARTISTREAM_SHM_NAME"
ENV_WS_PORT = "ARTISTREAM_WS_PORT"
DEFAULT_SHM_NAME = "artistream"


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read --config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"--config {path} must hold a JSON object")
    return raw


def _resolve(cli_value, cfg: dict, key: str, env: str | None = None, default=None, cast=None):
    """CLI > env > config file > default."""
    value = cli_value
    if value is None and env is not None and os.environ.get(env):
        value = os.environ[env]
    if value is None and key in cfg:
        value = cfg[key]
    if value is None:
        value = default
    if value is not None and cast is not None:
        try:
            value = cast(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {value!r}") from exc
    return value


def _load_rest_pose(path: str | None) -> np.ndarray | None:
    """Twelve normalized values, either a bare JSON list or {"values": [...]}."""
    if path is None:
        return None
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read --rest-pose {path}: {exc}") from exc
    values = raw.get("values") if isinstance(raw, dict) else raw
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape != (NUM_DIMS,):
        raise ConfigError(f"--rest-pose {path} must hold {NUM_DIMS} values")
    return arr


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="artistream",
        description="Stream speech audio into articulator trajectories in real time.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("stream", help="run the audio-to-articulator pipeline")
    src = ps.add_argument_group("audio source")
    src.add_argument("--input", metavar="PATH.WAV", help="stream a WAV file")
    src.add_argument(
        "--mic",
        nargs="?",
        const="",
        default=None,
        metavar="DEVICE",
        help="capture from a microphone (optionally a named device)",
    )
    src.add_argument(
        "--realtime",
        action="store_true",
        help="throttle file input to wall-clock rate (mic is always real time)",
    )
    vad = ps.add_argument_group("voice activity gate")
    vad.add_argument("--vad", choices=("on", "off"), default="on",
                     help="off treats every batch as speech")
    vad.add_argument("--vad-threshold", type=float, default=None, metavar="DBFS",
                     help="energy threshold in dBFS (default -40)")
    vad.add_argument("--vad-hangover", type=int, default=None, metavar="BATCHES",
                     help="batches of speech kept after energy drops (default 3)")
    win = ps.add_argument_group("context window")
    win.add_argument("--window-secs", type=int, default=None, metavar="N",
                     help="inversion window length in seconds (default 1)")
    win.add_argument("--context", choices=[s.value for s in ContextStrategy],
                     default=None, help="artificial context for the warmup deficit")
    win.add_argument("--context-file", metavar="PATH.WAV",
                     help="recording used by vowel/utterance context")
    ps.add_argument("--backend", default=None,
                    help="mock | replay:<csv> | remote:<host:port> (default mock)")
    post = ps.add_argument_group("post-processing")
    post.add_argument("--no-smoothing", action="store_true",
                      help="disable the batch-seam interpolation (diagnostic)")
    post.add_argument("--rest-pose", metavar="PATH.JSON",
                      help="normalized 12-dim pose published during silence")
    cal = ps.add_argument_group("calibration")
    cal.add_argument("--norm-spec", metavar="PATH.JSON",
                     help="per-dimension millimeter ranges (default: bundled synthetic)")
    cal.add_argument("--rig", metavar="PATH.JSON",
                     help="avatar rest geometry and jaw hinge (default: bundled)")
    out = ps.add_argument_group("outputs")
    out.add_argument("--shm-name", default=None, metavar="NAME",
                     help=f"shared-memory log name (default {DEFAULT_SHM_NAME})")
    out.add_argument("--no-shm", action="store_true", help="skip the shared-memory log")
    out.add_argument("--keep-shm", action="store_true",
                     help="leave the log mapped after exit for shm-inspect")
    out.add_argument("--serve", action="store_true",
                     help="serve the WebSocket/HTTP bridge (implied by --ws-port)")
    out.add_argument("--ws-port", type=int, default=None, metavar="PORT",
                     help=f"WebSocket bridge port (default {DEFAULT_WS_PORT})")
    out.add_argument("--static-dir", metavar="DIR",
                     help="serve a viewer build at / (implies --serve)")
    out.add_argument("--save-ema", metavar="PATH.CSV",
                     help="write the published millimeter trajectory")
    out.add_argument("--profile", metavar="PATH.CSV",
                     help="write per-batch latency records")
    ps.add_argument("--config", metavar="PATH.JSON", help="flag defaults file")
    ps.set_defaults(func=cmd_stream)

    pe = sub.add_parser("eval", help="Pearson correlation of predicted vs reference EMA")
    pe.add_argument("--pred", required=True, metavar="PATH.CSV")
    pe.add_argument("--ref", required=True, metavar="PATH.CSV")
    pe.add_argument("--skip", type=int, default=0, metavar="N",
                    help="drop the first N aligned frames (warmup noise)")
    pe.add_argument("--align-shift", type=int, default=10, metavar="K",
                    help="pred frame s is compared to ref frame s-K (default 10, "
                         "the pipeline's intentional one-batch delay)")
    pe.add_argument("--json", metavar="PATH", help="also write the report as JSON")
    pe.set_defaults(func=cmd_eval)

    pw = sub.add_parser("sweep", help="compare artificial context strategies")
    pw.add_argument("--input", required=True, metavar="PATH.WAV")
    pw.add_argument("--ref", required=True, metavar="PATH.CSV")
    pw.add_argument("--strategies", default="none,silence,vowel,utterance,loop",
                    help="comma-separated subset of none,silence,vowel,utterance,loop")
    pw.add_argument("--backend", default="mock")
    pw.add_argument("--window-secs", type=int, default=1)
    pw.add_argument("--context-file", metavar="PATH.WAV")
    pw.add_argument("--skip", type=int, default=0)
    pw.add_argument("--align-shift", type=int, default=10)
    pw.add_argument("--json", metavar="PATH")
    pw.set_defaults(func=cmd_sweep)

    pp = sub.add_parser("profile", help="summarize a latency CSV from --profile")
    pp.add_argument("csv", metavar="PATH.CSV")
    pp.add_argument("--json", metavar="PATH")
    pp.set_defaults(func=cmd_profile)

    pi = sub.add_parser("shm-inspect", help="dump a shared-memory log's state")
    pi.add_argument("--shm-name", default=None, metavar="NAME")
    pi.set_defaults(func=cmd_shm_inspect)
    return parser


def cmd_stream(args) -> int:
    cfg = _load_config_file(args.config)
    if (args.input is None) == (args.mic is None):
        raise ConfigError("exactly one of --input or --mic is required")

    window = WindowConfig(
        n_seconds=_resolve(args.window_secs, cfg, "window_secs", default=1, cast=int),
        strategy=ContextStrategy(
            _resolve(args.context, cfg, "context", default="silence")
        ),
        context_file=_resolve(args.context_file, cfg, "context_file"),
    )
    vad_config = VadConfig(
        threshold_dbfs=_resolve(args.vad_threshold, cfg, "vad_threshold",
                                default=VadConfig.threshold_dbfs, cast=float),
        hangover_batches=_resolve(args.vad_hangover, cfg, "vad_hangover",
                                  default=VadConfig.hangover_batches, cast=int),
    )
    norm_path = _resolve(args.norm_spec, cfg, "norm_spec")
    rig_path = _resolve(args.rig, cfg, "rig")
    config = EngineConfig(
        norm_spec=NormSpec.from_json(norm_path) if norm_path else default_norm_spec(),
        rig=RigConfig.from_json(rig_path) if rig_path else default_rig(),
        window=window,
        vad=vad_config,
        vad_enabled=args.vad != "off",
        smoothing=not args.no_smoothing,
        rest_pose=_load_rest_pose(args.rest_pose),
    )
    backend = parse_backend_spec(_resolve(args.backend, cfg, "backend", default="mock"))

    shm_name = _resolve(args.shm_name, cfg, "shm_name", env=ENV_SHM_NAME,
                        default=DEFAULT_SHM_NAME)
    ws_port = _resolve(args.ws_port, cfg, "ws_port", env=ENV_WS_PORT,
                       default=None, cast=int)
    serve = args.serve or args.static_dir is not None or ws_port is not None

    sinks = []
    writer = None
    server = None
    try:
        if not args.no_shm:
            writer = ShmWriter(shm_name)
            sinks.append(ShmSink(writer))
        if args.save_ema:
            sinks.append(CsvSink(args.save_ema))
        if serve:
            server = StreamServer(
                port=ws_port if ws_port is not None else DEFAULT_WS_PORT,
                static_dir=args.static_dir,
            )
            server.start()
            sinks.append(WsSink(server))
            print(f"serving ws://127.0.0.1:{server.port}/stream", file=sys.stderr)

        engine = StreamEngine(
            config,
            backend,
            sinks=sinks,
            animate_source=(lambda: server.animate_ms) if server else None,
        )
        source = open_source(
            wav=args.input,
            mic=args.mic is not None,
            device=args.mic or None,
            realtime=args.realtime,
        )
        try:
            with source:
                engine.run(source)
        except KeyboardInterrupt:
            pass  # interrupted live stream still ends cleanly
        engine.close_sinks()

        records = engine.records
        print(f"published {engine.frames_published} frames over {len(records)} batches")
        if records:
            if args.profile:
                write_profile_csv(records, args.profile)
            print(format_summary(summarize(records)))
        return 0
    finally:
        if server is not None:
            server.stop()
        if writer is not None:
            writer.close(unlink=not args.keep_shm)


def cmd_eval(args) -> int:
    report = evaluate_stream(args.pred, args.ref, skip=args.skip, align_shift=args.align_shift)
    print(report.format_table())
    if args.json:
        Path(args.json).write_text(json.dumps(report.to_json_dict(), indent=2) + "\n")
    return 0


def cmd_sweep(args) -> int:
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    if not strategies:
        raise ConfigError("--strategies must name at least one strategy")
    for name in strategies:
        if name not in {s.value for s in ContextStrategy}:
            raise ConfigError(f"unknown context strategy {name!r}")
    report = context_sweep(
        args.input,
        args.ref,
        strategies,
        parse_backend_spec(args.backend),
        n_seconds=args.window_secs,
        context_file=args.context_file,
        skip=args.skip,
        align_shift=args.align_shift,
    )
    print(report.format_table())
    if args.json:
        Path(args.json).write_text(json.dumps(report.to_json_dict(), indent=2) + "\n")
    return 0


def cmd_profile(args) -> int:
    records = read_profile_csv(args.csv)
    summary = summarize(records)
    print(format_summary(summary))
    if args.json:
        Path(args.json).write_text(summary_json(summary) + "\n")
    return 0


def cmd_shm_inspect(args) -> int:
    name = _resolve(args.shm_name, {}, "shm_name", env=ENV_SHM_NAME,
                    default=DEFAULT_SHM_NAME)
    report = inspect_shm(name)
    for key, value in report.items():
        print(f"{key}: {value}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ArtistreamError as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
