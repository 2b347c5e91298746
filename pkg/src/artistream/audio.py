"""Audio ingest: 16 kHz mono batches of 1600 samples (0.1 s) from WAV files
or a live microphone.

WAV files may be 16/24/32-bit integer or 32-bit float PCM, mono or stereo
(stereo is downmixed by averaging). Other sample rates are linearly resampled
to 16 kHz; linear is deliberate; the VAD and inversion backends tolerate it
and it keeps the hot path cheap.
"""

from __future__ import annotations

import queue
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    DeviceUnavailable,
    IoFailure,
    Overrun,
    UnsupportedFormat,
)

SAMPLE_RATE = 16000
BATCH_SAMPLES = 1600  # 0.1 s
BATCH_SECONDS = BATCH_SAMPLES / SAMPLE_RATE
MIC_BUFFER_SECONDS = 2.0  # beyond this much unconsumed audio, raise Overrun

_INT_SCALES = {np.dtype(np.int16): 2**15, np.dtype(np.int32): 2**31}


@dataclass(frozen=True)
class AudioBatch:
    """Exactly 1600 mono samples in [-1, 1]; a final partial file batch is
    zero-padded with the pad length recorded."""

    index: int
    samples: np.ndarray  # (1600,) float32
    capture_time: float  # monotonic clock, when the batch became available
    pad: int = 0

    def __post_init__(self) -> None:
        s = np.asarray(self.samples, dtype=np.float32)
        if s.shape != (BATCH_SAMPLES,):
            raise ValueError(f"batch needs {BATCH_SAMPLES} samples, got {s.shape}")
        s = s.copy()
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)


def resample_linear(x: np.ndarray, sr_from: int, sr_to: int) -> np.ndarray:
    """Linear-interpolation resample on uniform time grids."""
    if sr_from == sr_to:
        return np.asarray(x, dtype=np.float32)
    n_out = int(round(len(x) * sr_to / sr_from))
    if len(x) == 0 or n_out == 0:
        return np.zeros(0, dtype=np.float32)
    t_src = np.arange(len(x), dtype=np.float64) / sr_from
    t_dst = np.arange(n_out, dtype=np.float64) / sr_to
    return np.interp(t_dst, t_src, np.asarray(x, dtype=np.float64)).astype(np.float32)


def decode_wav(path: str | Path) -> np.ndarray:
    """Decode a WAV file to float32 mono at 16 kHz, values in [-1, 1]."""
    from scipy.io import wavfile

    try:
        rate, data = wavfile.read(str(path))
    except FileNotFoundError as exc:
        raise IoFailure(f"cannot open {path}: {exc}") from exc
    except ValueError as exc:
        # scipy raises ValueError for non-PCM codecs and unknown chunks
        raise UnsupportedFormat(f"{path}: {exc}") from exc
    except OSError as exc:
        raise IoFailure(f"read failure on {path}: {exc}") from exc

    if data.ndim == 2:
        if data.shape[1] > 2:
            raise UnsupportedFormat(f"{path}: {data.shape[1]} channels, want mono/stereo")
        data = data.astype(np.float64).mean(axis=1)
    dtype = np.asarray(data).dtype
    if dtype in _INT_SCALES:
        samples = np.asarray(data, dtype=np.float64) / _INT_SCALES[dtype]
    elif dtype in (np.dtype(np.float32), np.dtype(np.float64)):
        samples = np.asarray(data, dtype=np.float64)
    else:
        raise UnsupportedFormat(f"{path}: unsupported sample format {dtype}")
    samples = np.clip(samples, -1.0, 1.0).astype(np.float32)
    return resample_linear(samples, rate, SAMPLE_RATE)


def batches_from_samples(samples: np.ndarray) -> list[tuple[np.ndarray, int]]:
    """Split mono samples into 1600-sample chunks, zero-padding the last.
    Returns (chunk, pad) pairs."""
    out: list[tuple[np.ndarray, int]] = []
    samples = np.asarray(samples, dtype=np.float32)
    for start in range(0, len(samples), BATCH_SAMPLES):
        chunk = samples[start : start + BATCH_SAMPLES]
        pad = BATCH_SAMPLES - len(chunk)
        if pad:
            chunk = np.concatenate([chunk, np.zeros(pad, dtype=np.float32)])
        out.append((chunk, pad))
    return out


class BatchStream:
    """Base stream: read_batch() returns the next AudioBatch or None at end."""

    def read_batch(self) -> AudioBatch | None:
        raise NotImplementedError

    def close(self) -> None:
        pass

    def __iter__(self):
        while True:
            batch = self.read_batch()
            if batch is None:
                return
            yield batch

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class WavFileSource(BatchStream):
    """Batches from a WAV file; optionally throttled to real time so batch k
    is released no earlier than k * 100 ms after the first read."""

    def __init__(self, path: str | Path, realtime: bool = False):
        self.path = Path(path)
        self.realtime = realtime
        self._chunks = batches_from_samples(decode_wav(path))
        self._next = 0
        self._start: float | None = None

    def __len__(self) -> int:
        return len(self._chunks)

    def read_batch(self) -> AudioBatch | None:
        if self._next >= len(self._chunks):
            return None
        k = self._next
        if self._start is None:
            self._start = time.monotonic()
        if self.realtime:
            release = self._start + k * BATCH_SECONDS
            now = time.monotonic()
            if release > now:
                time.sleep(release - now)
        chunk, pad = self._chunks[k]
        self._next += 1
        return AudioBatch(index=k, samples=chunk, capture_time=time.monotonic(), pad=pad)


class MicrophoneSource(BatchStream):
    """Live capture via sounddevice/PortAudio.

    The capture callback runs on the audio thread and feeds a bounded queue
    (2 s); if the pipeline falls behind that, read_batch raises Overrun
    rather than silently dropping; latency accounting depends on knowing
    about stalls.
    """

    def __init__(self, device: str | None = None):
        try:
            import sounddevice
        except Exception as exc:  # ImportError or missing PortAudio
            raise DeviceUnavailable(
                f"microphone capture needs the sounddevice package ({exc})"
            ) from exc
        self._queue: queue.Queue[np.ndarray] = queue.Queue(
            maxsize=int(MIC_BUFFER_SECONDS / BATCH_SECONDS)
        )
        self._overrun = False
        self._leftover = np.zeros(0, dtype=np.float32)
        self._next = 0

        def callback(indata, frames, time_info, status):
            if status and status.input_overflow:
                self._overrun = True
            try:
                self._queue.put_nowait(indata[:, 0].astype(np.float32).copy())
            except queue.Full:
                self._overrun = True

        try:
            self._stream = sounddevice.InputStream(
                samplerate=SAMPLE_RATE,
                channels=1,
                blocksize=BATCH_SAMPLES,
                device=device,
                callback=callback,
            )
            self._stream.start()
        except Exception as exc:
            raise DeviceUnavailable(f"cannot open microphone {device!r}: {exc}") from exc

    def read_batch(self) -> AudioBatch | None:
        while len(self._leftover) < BATCH_SAMPLES:
            if self._overrun:
                raise Overrun("microphone buffer exceeded 2 s; pipeline too slow")
            try:
                block = self._queue.get(timeout=1.0)
            except queue.Empty:
                continue
            self._leftover = np.concatenate([self._leftover, block])
        chunk = self._leftover[:BATCH_SAMPLES]
        self._leftover = self._leftover[BATCH_SAMPLES:]
        k = self._next
        self._next += 1
        return AudioBatch(index=k, samples=chunk, capture_time=time.monotonic())

    def close(self) -> None:
        try:
            self._stream.stop()
            self._stream.close()
        except Exception:
            pass


def open_source(
    *,
    wav: str | Path | None = None,
    mic: bool = False,
    device: str | None = None,
    realtime: bool = False,
) -> BatchStream:
    """Open exactly one audio source (WAV file or microphone)."""
    if (wav is None) == (not mic):
        raise ConfigError("exactly one of wav= or mic= must be given")
    if wav is not None:
        return WavFileSource(wav, realtime=realtime)
    return MicrophoneSource(device=device)
