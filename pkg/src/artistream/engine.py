"""The streaming engine: audio -> VAD -> window -> inversion -> selection ->
smoothing -> denormalization -> kinematics -> transports.

Timing model (one iteration per arriving batch, 10 frames out per batch):

* Arrival of batch k completes the window whose working batch is k-1 (the
  intentional 100 ms lookahead delay). The very first arrival, and arrivals
  during a NONE-context warmup, publish silence holds instead, so the output
  rate is exactly 10 frames per input batch from the start.
* Published seq therefore runs 10 frames ahead of the audio content it
  carries: frame seq s holds EMA for audio frame s - 10. Evaluation against
  a same-timeline reference compensates with --align-shift 10.
* The VAD decision for a batch is made on arrival and applied when that
  batch becomes the working batch; silence publishes held frames with
  speech=False and skips inversion entirely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import ema
from .audio import AudioBatch, WavFileSource
from .ema import EmaFrame, NormSpec, Space, denormalize, write_ema_csv
from .errors import ConfigError
from .inversion import InversionRequest
from .kinematics import AvatarPose, RigConfig, pose_from_frame
from .postproc import PostProcessor, select_working_frames
from .profiler import BatchTimer, LatencyRecord
from .vad import AlwaysSpeech, EnergyGate, VadConfig
from .window import ContextWindow, WindowBuilder, WindowConfig

FRAMES_PER_BATCH = 10


class CollectSink:
    """Accumulate published frames/poses in memory (tests, sweeps)."""

    def __init__(self):
        self.frames: list[EmaFrame] = []
        self.poses: list[AvatarPose] = []

    def publish(self, frame: EmaFrame, pose: AvatarPose) -> None:
        self.frames.append(frame)
        self.poses.append(pose)

    def close(self) -> None:
        pass


class CsvSink:
    """Stream published millimeter frames to a trajectory CSV."""

    def __init__(self, path: str | Path):
        self._path = path
        self._seqs: list[int] = []
        self._values: list[np.ndarray] = []

    def publish(self, frame: EmaFrame, pose: AvatarPose) -> None:
        self._seqs.append(frame.seq)
        self._values.append(frame.values)

    def close(self) -> None:
        write_ema_csv(self._path, np.asarray(self._seqs), np.stack(self._values))


class ShmSink:
    def __init__(self, writer):
        self.writer = writer

    def publish(self, frame: EmaFrame, pose: AvatarPose) -> None:
        self.writer.write(frame)

    def close(self) -> None:
        pass  # writer lifecycle owned by the caller


class WsSink:
    def __init__(self, server):
        self.server = server
        self._last_lat: dict | None = None

    def set_latency(self, record: LatencyRecord | None) -> None:
        if record is not None:
            self._last_lat = {"model": record.model_ms, "send": record.send_ms}

    def publish(self, frame: EmaFrame, pose: AvatarPose) -> None:
        self.server.publish_frame(frame, pose, self._last_lat)

    def close(self) -> None:
        pass


@dataclass
class EngineConfig:
    norm_spec: NormSpec
    rig: RigConfig
    window: WindowConfig = field(default_factory=WindowConfig)
    vad: VadConfig | None = field(default_factory=VadConfig)
    vad_enabled: bool = True
    smoothing: bool = True
    rest_pose: np.ndarray | None = None  # normalized; default all-zero


@dataclass
class EngineResult:
    records: list[LatencyRecord]
    frames_published: int

    @property
    def batches(self) -> int:
        return len(self.records)


class StreamEngine:
    """Single-stream sequential pipeline; one process_batch call per arrival."""

    def __init__(self, config: EngineConfig, backend, sinks=(), animate_source=None):
        self.config = config
        self.backend = backend
        self.sinks = list(sinks)
        self.animate_source = animate_source  # () -> float | None, from the viewer
        self._gate = (
            EnergyGate(config.vad or VadConfig()) if config.vad_enabled else AlwaysSpeech()
        )
        self._builder = WindowBuilder(config.window)
        self._post = PostProcessor(rest_pose=config.rest_pose, smoothing=config.smoothing)
        self._pending_vad: bool | None = None  # decision for the batch awaiting lookahead
        self._seq = 0
        self.records: list[LatencyRecord] = []

    @property
    def frames_published(self) -> int:
        return self._seq

    def process_batch(self, batch: AudioBatch) -> list[tuple[EmaFrame, AvatarPose]]:
        """Ingest one batch; publish and return exactly 10 frames."""
        timer = BatchTimer(batch.index)
        arriving_vad = self._gate(batch)
        window = self._builder.push_batch(batch)

        speech = False
        if window is not None and self._pending_vad:
            with timer.stage("model"):
                response = self.backend.invert(self._request(window))
            kept = select_working_frames(response.values, self.config.window.n_seconds)
            values = self._post.speech(kept)
            speech = True
        else:
            values = self._post.hold()
        self._pending_vad = arriving_vad

        published = []
        frames_mm = []
        for row in values:
            norm = EmaFrame(seq=self._seq, values=row, space=Space.NORMALIZED, speech=speech)
            mm = denormalize(norm, self.config.norm_spec)
            pose = pose_from_frame(mm, self.config.rig)
            frames_mm.append((mm, pose))
            self._seq += 1
        with timer.stage("send"):
            for mm, pose in frames_mm:
                for sink in self.sinks:
                    sink.publish(mm, pose)
        published.extend(frames_mm)

        animate = self.animate_source() if self.animate_source else None
        record = timer.finish(speech=speech, animate_ms=animate)
        self.records.append(record)
        for sink in self.sinks:
            if isinstance(sink, WsSink):
                sink.set_latency(record)
        return published

    def run(self, stream) -> EngineResult:
        """Drain a batch stream to the end (or interrupt)."""
        for batch in stream:
            self.process_batch(batch)
        return EngineResult(records=self.records, frames_published=self._seq)

    def close_sinks(self) -> None:
        for sink in self.sinks:
            sink.close()

    def _request(self, window: ContextWindow) -> InversionRequest:
        return InversionRequest(
            samples=window.samples,
            n_seconds=window.n_seconds,
            window_start_frame=window.start_frame,
        )


@dataclass
class PipelineOutput:
    values: np.ndarray  # (frames, 12) published millimeter trajectory
    seqs: np.ndarray
    speech: np.ndarray  # bool per frame
    result: EngineResult


def run_wav_pipeline(
    wav_path: str | Path,
    window: WindowConfig,
    backend,
    norm_spec: NormSpec | None = None,
    rig: RigConfig | None = None,
    vad: VadConfig | None = None,
    vad_enabled: bool = True,
    smoothing: bool = True,
    extra_sinks=(),
) -> PipelineOutput:
    """Convenience: run a WAV file through the engine, collecting frames."""
    from .defaults import default_norm_spec, default_rig

    config = EngineConfig(
        norm_spec=norm_spec or default_norm_spec(),
        rig=rig or default_rig(),
        window=window,
        vad=vad,
        vad_enabled=vad_enabled,
        smoothing=smoothing,
    )
    collect = CollectSink()
    engine = StreamEngine(config, backend, sinks=[collect, *extra_sinks])
    with WavFileSource(wav_path) as source:
        result = engine.run(source)
    engine.close_sinks()
    if collect.frames:
        values = np.stack([f.values for f in collect.frames])
        seqs = np.asarray([f.seq for f in collect.frames])
        speech = np.asarray([f.speech for f in collect.frames], dtype=bool)
    else:
        values = np.zeros((0, ema.NUM_DIMS))
        seqs = np.zeros(0, dtype=np.int64)
        speech = np.zeros(0, dtype=bool)
    return PipelineOutput(values=values, seqs=seqs, speech=speech, result=result)
