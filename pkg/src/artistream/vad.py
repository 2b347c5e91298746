"""Deterministic energy VAD with hangover, gating inversion per batch.

Stands in for an external detector: a batch is split into ten 160-sample
sub-frames, a sub-frame is active when its RMS level (dBFS, full-scale sine
= -3 dBFS) reaches the threshold, and a raw speech decision needs at least
``min_active_frames`` active sub-frames. Hangover holds the decision true
for a few batches after energy drops so word-final consonants are not
clipped. Any callable ``(AudioBatch) -> bool`` can be swapped in as a gate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import AudioBatch, BATCH_SAMPLES
from .errors import ConfigError

SUBFRAMES = 10
SUBFRAME_SAMPLES = BATCH_SAMPLES // SUBFRAMES
SILENCE_FLOOR_DBFS = -240.0  # stands in for -inf on all-zero sub-frames


@dataclass(frozen=True)
class VadConfig:
    threshold_dbfs: float = -40.0
    min_active_frames: int = 3
    hangover_batches: int = 3

    def __post_init__(self) -> None:
        if not self.threshold_dbfs < 0:
            raise ConfigError("vad threshold must be negative dBFS")
        if not 0 <= self.min_active_frames <= SUBFRAMES:
            raise ConfigError(f"min_active_frames must be 0..{SUBFRAMES}")
        if self.hangover_batches < 0:
            raise ConfigError("hangover_batches must be >= 0")


@dataclass(frozen=True)
class VadState:
    # Batches elapsed since the last raw-true decision; start "infinitely"
    # far from one so a fresh stream begins silent.
    batches_since_voiced: int = 1 << 30


def rms_dbfs(x: np.ndarray) -> float:
    rms = float(np.sqrt(np.mean(np.square(np.asarray(x, dtype=np.float64)))))
    if rms < 1e-12:
        return SILENCE_FLOOR_DBFS
    return 20.0 * float(np.log10(rms))


def is_speech(batch: AudioBatch, config: VadConfig, state: VadState) -> tuple[bool, VadState]:
    """Speech decision for one batch plus the successor state.

    Total and deterministic: the same (batch, config, state) always yields
    the same output.
    """
    sub = batch.samples.reshape(SUBFRAMES, SUBFRAME_SAMPLES)
    active = sum(1 for row in sub if rms_dbfs(row) >= config.threshold_dbfs)
    raw = active >= config.min_active_frames
    if raw:
        return True, VadState(batches_since_voiced=0)
    since = state.batches_since_voiced + 1
    decision = since <= config.hangover_batches
    return decision, VadState(batches_since_voiced=since)


class EnergyGate:
    """Stateful wrapper around is_speech for single-stream use."""

    def __init__(self, config: VadConfig | None = None):
        self.config = config or VadConfig()
        self.state = VadState()

    def __call__(self, batch: AudioBatch) -> bool:
        decision, self.state = is_speech(batch, self.config, self.state)
        return decision


class AlwaysSpeech:
    """Gate used by --vad off: every batch is treated as speech."""

    def __call__(self, batch: AudioBatch) -> bool:
        return True
