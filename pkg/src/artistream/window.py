"""Rolling context window assembly.

Every inversion call sees exactly 16000*n samples laid out as

    [ context prefix | working batch | lookahead batch ]
      16000n - 3200       1600            1600

The prefix is real history where available; before enough audio has been
read the deficit is covered by artificial context (silence, a vowel or
utterance recording, or a loop of what has been read so far). Artificial
samples are right-aligned, i.e. they are the oldest part of the window, so
the seam to real audio is as recent-correct as possible.

Emitting the window for batch k requires batch k+1 to have arrived; that
one-batch (100 ms) delay is intentional and provides forward context.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from . import audio
from .audio import AudioBatch, BATCH_SAMPLES, SAMPLE_RATE
from .errors import ArtistreamError, BadContextFile, ConfigError, OutOfOrderBatch

LOOKAHEAD_SAMPLES = BATCH_SAMPLES


class ContextStrategy(Enum):
    SILENCE = "silence"
    VOWEL = "vowel"
    UTTERANCE = "utterance"
    LOOPED_BUFFER = "loop"
    # No artificial fill at all: hold until real history covers the prefix
    # ("zero-deficit start"). Used by the context sweep's None row.
    NONE = "none"


_NEEDS_FILE = (ContextStrategy.VOWEL, ContextStrategy.UTTERANCE)


@dataclass(frozen=True)
class WindowConfig:
    n_seconds: int = 1
    strategy: ContextStrategy = ContextStrategy.SILENCE
    context_file: str | Path | None = None

    def __post_init__(self) -> None:
        if not (isinstance(self.n_seconds, int) and self.n_seconds >= 1):
            raise ConfigError("--window-secs must be a positive integer")
        if self.strategy in _NEEDS_FILE and self.context_file is None:
            raise ConfigError(
                f"--context {self.strategy.value} requires --context-file <path>"
            )

    @property
    def window_samples(self) -> int:
        return SAMPLE_RATE * self.n_seconds

    @property
    def prefix_samples(self) -> int:
        return self.window_samples - 2 * BATCH_SAMPLES


@dataclass(frozen=True)
class ContextWindow:
    """Immutable snapshot handed to the inversion stage."""

    samples: np.ndarray  # (16000 * n_seconds,) float32
    working_index: int
    n_seconds: int

    def __post_init__(self) -> None:
        s = np.asarray(self.samples, dtype=np.float32)
        expected = SAMPLE_RATE * self.n_seconds
        if s.shape != (expected,):
            raise ValueError(f"window must hold {expected} samples, got {s.shape}")
        s = s.copy()
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def working_span(self) -> slice:
        n = len(self.samples)
        return slice(n - 2 * BATCH_SAMPLES, n - BATCH_SAMPLES)

    @property
    def lookahead_span(self) -> slice:
        return slice(len(self.samples) - BATCH_SAMPLES, len(self.samples))

    @property
    def working(self) -> np.ndarray:
        return self.samples[self.working_span]

    @property
    def lookahead(self) -> np.ndarray:
        return self.samples[self.lookahead_span]

    @property
    def start_frame(self) -> int:
        """Absolute 100 fps frame index of samples[0] on the stream timeline.

        Negative while the window still reaches back into artificial
        context. Replay backends align on this.
        """
        start_sample = (self.working_index + 2) * BATCH_SAMPLES - len(self.samples)
        return start_sample // 160


def artificial_fill(
    strategy: ContextStrategy,
    deficit: int,
    real_history: np.ndarray,
    context_samples: np.ndarray | None = None,
) -> np.ndarray:
    """Produce `deficit` samples of artificial context, right-aligned.

    Right-aligned means the returned array's final sample sits adjacent to
    real audio: recordings and loops are tiled from the left so their end,
    not their start, meets the seam.
    """
    if deficit < 0:
        raise ValueError("deficit must be >= 0")
    if deficit == 0:
        return np.zeros(0, dtype=np.float32)
    if strategy is ContextStrategy.SILENCE:
        return np.zeros(deficit, dtype=np.float32)
    if strategy in _NEEDS_FILE:
        if context_samples is None or len(context_samples) == 0:
            raise BadContextFile(f"{strategy.value} context has no samples")
        return _tile_right_aligned(np.asarray(context_samples, dtype=np.float32), deficit)
    if strategy is ContextStrategy.LOOPED_BUFFER:
        hist = np.asarray(real_history, dtype=np.float32)
        if len(hist) == 0:
            return np.zeros(deficit, dtype=np.float32)
        return _tile_right_aligned(hist, deficit)
    raise ValueError(f"strategy {strategy} does not use artificial fill")


def _tile_right_aligned(source: np.ndarray, length: int) -> np.ndarray:
    reps = -(-length // len(source))  # ceil
    return np.tile(source, reps)[-length:]


def load_context_file(path: str | Path) -> np.ndarray:
    """Decode an artificial-context recording to 16 kHz mono."""
    try:
        samples = audio.decode_wav(path)
    except ArtistreamError as exc:
        raise BadContextFile(f"context file {path}: {exc}") from exc
    if len(samples) == 0:
        raise BadContextFile(f"context file {path} holds no audio")
    return samples


class WindowBuilder:
    """Single-stream state machine: push batches in order, get windows back.

    push_batch returns None for the first batch (no lookahead yet) and, under
    the NONE strategy, for every batch whose window would still need
    artificial samples. History storage is bounded to the prefix length.
    """

    def __init__(self, config: WindowConfig, context_samples: np.ndarray | None = None):
        self.config = config
        if config.strategy in _NEEDS_FILE and context_samples is None:
            context_samples = load_context_file(config.context_file)
        self._context = context_samples
        self._history = np.zeros(0, dtype=np.float32)  # newest prefix_samples only
        self._real_len = 0  # total real samples before the pending batch
        self._pending: AudioBatch | None = None
        self._expected_index = 0

    def push_batch(self, batch: AudioBatch) -> ContextWindow | None:
        if batch.index != self._expected_index:
            raise OutOfOrderBatch(
                f"expected batch {self._expected_index}, got {batch.index}"
            )
        self._expected_index += 1
        if self._pending is None:
            self._pending = batch
            return None
        working = self._pending
        window = self._assemble(working, lookahead=batch)
        # Roll the working batch into history only after assembly.
        self._history = np.concatenate([self._history, working.samples])[
            -self.config.prefix_samples :
        ]
        self._real_len += BATCH_SAMPLES
        self._pending = batch
        return window

    def _assemble(self, working: AudioBatch, lookahead: AudioBatch) -> ContextWindow | None:
        need = self.config.prefix_samples
        deficit = max(0, need - self._real_len)
        if deficit and self.config.strategy is ContextStrategy.NONE:
            return None
        if deficit:
            fill = artificial_fill(
                self.config.strategy, deficit, self._history, self._context
            )
            prefix = np.concatenate([fill, self._history])
        else:
            prefix = self._history[-need:]
        samples = np.concatenate([prefix, working.samples, lookahead.samples])
        return ContextWindow(
            samples=samples, working_index=working.index, n_seconds=self.config.n_seconds
        )
