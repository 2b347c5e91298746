#!/usr/bin/env python3
"""Compare artificial-context strategies over one recording.

With --ref the rows score against that trajectory; without it the silence
strategy's own output becomes the reference, which isolates how much each
strategy changes the published frames (a slice-local backend shows 1.0000
everywhere except the no-fill warmup).

Example:
    python3 scripts/run_context_sweep.py --input demo/steady.wav \
        --strategies none,silence,loop
"""

import argparse

from artistream.engine import run_wav_pipeline
from artistream.evaluate import context_sweep
from artistream.inversion import parse_backend_spec
from artistream.window import ContextStrategy, WindowConfig


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--input", required=True, metavar="PATH.WAV")
    parser.add_argument("--ref", metavar="PATH.CSV",
                        help="reference trajectory (default: silence-strategy output)")
    parser.add_argument("--strategies", default="none,silence,vowel,utterance,loop")
    parser.add_argument("--backend", default="mock")
    parser.add_argument("--context-file", metavar="PATH.WAV",
                        help="recording for the vowel/utterance strategies")
    parser.add_argument("--window-secs", type=int, default=1)
    parser.add_argument("--skip", type=int, default=0)
    parser.add_argument("--align-shift", type=int, default=None,
                        help="default: 10 against --ref, 0 against the self baseline")
    args = parser.parse_args()

    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    if args.ref is not None:
        ref = args.ref
        align = 10 if args.align_shift is None else args.align_shift
    else:
        baseline = run_wav_pipeline(
            args.input,
            window=WindowConfig(
                n_seconds=args.window_secs, strategy=ContextStrategy.SILENCE
            ),
            backend=parse_backend_spec(args.backend),
        )
        ref = baseline.values
        align = 0 if args.align_shift is None else args.align_shift

    report = context_sweep(
        args.input,
        ref,
        strategies,
        parse_backend_spec(args.backend),
        n_seconds=args.window_secs,
        context_file=args.context_file,
        skip=args.skip,
        align_shift=align,
    )
    print(report.format_table())
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
