"""Real-time acoustic-to-articulatory streaming: 100 ms audio batches in,
12-dim EMA frames out at 100 fps, with shared-memory and WebSocket fanout."""

__version__ = "0.1.0"

from .audio import AudioBatch, BATCH_SAMPLES, SAMPLE_RATE, open_source
from .defaults import default_norm_spec, default_rig
from .ema import (
    CHANNELS,
    DIM_NAMES,
    EmaFrame,
    FRAME_RATE,
    NormSpec,
    NUM_DIMS,
    Space,
    denormalize,
    normalize,
)
from .engine import EngineConfig, StreamEngine, run_wav_pipeline
from .errors import ArtistreamError, ConfigError
from .evaluate import context_sweep, evaluate_stream, pearson
from .inversion import (
    InversionRequest,
    InversionResponse,
    MockBackend,
    RemoteBackend,
    ReplayBackend,
    parse_backend_spec,
)
from .kinematics import AvatarPose, RigConfig, pose_from_frame
from .postproc import PostProcessor, cubic_bezier, smooth_seam
from .profiler import BatchTimer, LatencyRecord, summarize
from .transport import ShmReader, ShmWriter, StreamServer
from .vad import EnergyGate, VadConfig
from .window import ContextStrategy, ContextWindow, WindowBuilder, WindowConfig

__all__ = [
    "ArtistreamError",
    "AudioBatch",
    "AvatarPose",
    "BATCH_SAMPLES",
    "BatchTimer",
    "CHANNELS",
    "ConfigError",
    "ContextStrategy",
    "ContextWindow",
    "DIM_NAMES",
    "EmaFrame",
    "EngineConfig",
    "EnergyGate",
    "FRAME_RATE",
    "InversionRequest",
    "InversionResponse",
    "LatencyRecord",
    "MockBackend",
    "NUM_DIMS",
    "NormSpec",
    "PostProcessor",
    "RemoteBackend",
    "ReplayBackend",
    "RigConfig",
    "SAMPLE_RATE",
    "ShmReader",
    "ShmWriter",
    "Space",
    "StreamEngine",
    "StreamServer",
    "VadConfig",
    "WindowBuilder",
    "WindowConfig",
    "context_sweep",
    "cubic_bezier",
    "default_norm_spec",
    "default_rig",
    "denormalize",
    "evaluate_stream",
    "normalize",
    "open_source",
    "parse_backend_spec",
    "pearson",
    "pose_from_frame",
    "run_wav_pipeline",
    "smooth_seam",
    "summarize",
]
