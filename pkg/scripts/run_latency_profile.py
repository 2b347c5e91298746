#!/usr/bin/env python3
"""Profile per-batch latency over a WAV file and print the breakdown table.

Example:
    python3 scripts/run_latency_profile.py --input demo/speech_like.wav
    python3 scripts/run_latency_profile.py --input x.wav --backend remote:host:9300 --csv lat.csv
"""

import argparse

from artistream.engine import run_wav_pipeline
from artistream.inversion import parse_backend_spec
from artistream.profiler import format_summary, summarize, write_profile_csv
from artistream.window import WindowConfig


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--input", required=True, metavar="PATH.WAV")
    parser.add_argument("--backend", default="mock",
                        help="mock | replay:<csv> | remote:<host:port>")
    parser.add_argument("--window-secs", type=int, default=1)
    parser.add_argument("--no-smoothing", action="store_true")
    parser.add_argument("--csv", metavar="PATH.CSV", help="also write raw records")
    args = parser.parse_args()

    out = run_wav_pipeline(
        args.input,
        window=WindowConfig(n_seconds=args.window_secs),
        backend=parse_backend_spec(args.backend),
        smoothing=not args.no_smoothing,
    )
    print(f"published {len(out.values)} frames over {out.result.batches} batches")
    print(format_summary(summarize(out.result.records)))
    if args.csv:
        write_profile_csv(out.result.records, args.csv)
        print(f"records -> {args.csv}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
