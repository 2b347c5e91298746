#!/usr/bin/env python3
"""Write demo audio and a replayable reference trajectory into ./demo.

Gives the CLI something to chew on without real recordings:

    python3 scripts/make_demo_fixtures.py
    artistream stream --input demo/speech_like.wav --no-shm --save-ema out.csv
    artistream stream --input demo/steady.wav --backend replay:demo/ref.csv --no-shm
    artistream eval --pred out.csv --ref demo/ref.csv
"""

import argparse
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from artistream.ema import write_ema_csv

RATE = 16000


def speech_like(seconds: float) -> np.ndarray:
    """Amplitude-modulated harmonic stack with a silent gap in the middle."""
    t = np.arange(int(seconds * RATE)) / RATE
    f0 = 130.0 + 20.0 * np.sin(2 * np.pi * 0.7 * t)
    sig = sum(np.sin(2 * np.pi * k * f0 * t) / k for k in (1, 2, 3))
    sig *= 0.25 * (1.0 + 0.6 * np.sin(2 * np.pi * 2.3 * t))
    gap = (t > seconds * 0.45) & (t < seconds * 0.6)
    sig[gap] = 0.0
    return sig.astype(np.float32)


def steady(seconds: float) -> np.ndarray:
    t = np.arange(int(seconds * RATE)) / RATE
    return (0.5 * np.sin(2 * np.pi * (180.0 + 12.0 * t) * t)).astype(np.float32)


def reference(frames: int) -> np.ndarray:
    t = np.arange(frames) / 100.0
    return np.stack(
        [0.8 * np.sin(2 * np.pi * (0.4 + 0.13 * d) * t + 0.3 * d) for d in range(12)],
        axis=1,
    )


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="demo", metavar="DIR")
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    wavfile.write(str(out / "speech_like.wav"), RATE, speech_like(4.0))
    wavfile.write(str(out / "steady.wav"), RATE, steady(10.0))
    ref = reference(1000)  # matches steady.wav: 100 batches -> 1000 frames
    write_ema_csv(out / "ref.csv", np.arange(len(ref)), ref)
    for name in ("speech_like.wav", "steady.wav", "ref.csv"):
        print(out / name)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
