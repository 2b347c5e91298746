"""Pluggable acoustic-to-articulatory inversion backends.

A backend turns one 16000*n-sample window into 100*n normalized EMA frames
(frame j covers window samples [160j, 160j+160)). Three implementations:

* MockBackend is deterministic and slice-local: each frame depends only on
  its own 160-sample slice. It verifies plumbing (window math, frame
  selection), not articulatory fidelity.
* ReplayBackend serves rows of a prerecorded normalized trajectory CSV,
  aligned by the window's absolute frame position on the stream timeline.
* RemoteBackend speaks a length-prefixed TCP protocol carrying raw
  samples, so any model host (BiGRU, Transformer, ...) can serve it;
  feature extraction is the host's concern.

Wire protocol (all integers u32 little-endian, floats f32 little-endian):

    request  = [payload_len][payload = n_samples, sample_rate, f32 * n_samples]
    response = [payload_len][payload = n_frames, dim=12, f32 * (n_frames*12)]
"""

from __future__ import annotations

import socket
import socketserver
import struct
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ema import NUM_DIMS, RANGE_TOL, read_ema_csv
from .errors import (
    ConfigError,
    FrameCountMismatch,
    RemoteProtocolError,
    RemoteTimeout,
    RemoteUnavailable,
    ValueOutOfRange,
)

SAMPLES_PER_FRAME = 160
DEFAULT_TIMEOUT = 0.5  # seconds
MAX_PAYLOAD = 64 * 2**20  # sanity bound on either direction


@dataclass(frozen=True)
class InversionRequest:
    samples: np.ndarray  # (16000 * n_seconds,) float32
    sample_rate: int = 16000
    n_seconds: int = 1
    # Absolute 100 fps index of samples[0] on the stream timeline; negative
    # while the window reaches into artificial context. Replay aligns on it.
    window_start_frame: int = 0

    def __post_init__(self) -> None:
        s = np.asarray(self.samples, dtype=np.float32)
        expected = self.sample_rate * self.n_seconds
        if s.shape != (expected,):
            raise ValueError(f"request needs {expected} samples, got {s.shape}")
        s = s.copy()
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def n_frames(self) -> int:
        return len(self.samples) // SAMPLES_PER_FRAME


@dataclass(frozen=True)
class InversionResponse:
    """100*n normalized frames as a (100n, 12) array, frame j covering
    window samples [160j, 160j+160)."""

    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.shape[1] != NUM_DIMS:
            raise ValueError(f"response values must be (n, {NUM_DIMS}), got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueOutOfRange("inversion backend produced non-finite values")
        if np.any(np.abs(vals) > 1.0 + RANGE_TOL):
            worst = float(np.max(np.abs(vals)))
            raise ValueOutOfRange(
                f"inversion backend produced |value| up to {worst}, limit 1 (normalized)"
            )
        vals = np.clip(vals, -1.0, 1.0)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n_frames(self) -> int:
        return len(self.values)


def _check_frame_count(values: np.ndarray, req: InversionRequest, origin: str) -> None:
    if len(values) != req.n_frames:
        raise FrameCountMismatch(
            f"{origin} returned {len(values)} frames, expected {req.n_frames}"
        )


def mock_frame_values(slice_160: np.ndarray) -> np.ndarray:
    """The mock's per-frame rule: e = RMS of the slice, dim d = sin(2*pi*(d+1)*e).

    Depends only on the local 160-sample slice; that locality is what lets
    downstream frame-selection tests catch off-by-one window math.
    """
    e = float(np.sqrt(np.mean(np.square(np.asarray(slice_160, dtype=np.float64)))))
    d = np.arange(1, NUM_DIMS + 1, dtype=np.float64)
    return np.sin(2.0 * np.pi * d * e)


class MockBackend:
    """Deterministic slice-local backend; output always within [-1, 1]."""

    def invert(self, req: InversionRequest) -> InversionResponse:
        frames = req.samples.reshape(req.n_frames, SAMPLES_PER_FRAME)
        values = np.stack([mock_frame_values(row) for row in frames])
        return InversionResponse(values=values)


class ReplayBackend:
    """Serve a prerecorded normalized trajectory by absolute frame index.

    Window frame j maps to trajectory row window_start_frame + j, clamped to
    the trajectory's ends (early windows reach into negative, artificial
    territory). The trajectory must be contiguous from seq 0.
    """

    def __init__(self, trajectory: np.ndarray | str | Path):
        if isinstance(trajectory, (str, Path)):
            seqs, values = read_ema_csv(trajectory)
            if len(values) == 0:
                raise ConfigError(f"replay trajectory {trajectory} is empty")
            if not np.array_equal(seqs, np.arange(len(seqs))):
                raise ConfigError(
                    f"replay trajectory {trajectory} must be contiguous from seq 0"
                )
        else:
            values = np.asarray(trajectory, dtype=np.float64)
        if np.any(np.abs(values) > 1.0 + RANGE_TOL):
            raise ValueOutOfRange("replay trajectory must be in normalized space [-1, 1]")
        self.values = np.clip(values, -1.0, 1.0)

    def invert(self, req: InversionRequest) -> InversionResponse:
        idx = req.window_start_frame + np.arange(req.n_frames)
        idx = np.clip(idx, 0, len(self.values) - 1)
        return InversionResponse(values=self.values[idx])


# ---------------------------------------------------------------------------
# Wire protocol


def _recv_exact(sock: socket.socket, length: int) -> bytes:
    chunks = []
    got = 0
    while got < length:
        chunk = sock.recv(length - got)
        if not chunk:
            raise RemoteProtocolError(f"connection closed after {got}/{length} bytes")
        chunks.append(chunk)
        got += len(chunk)
    return b"".join(chunks)


def _recv_message(sock: socket.socket) -> bytes:
    (length,) = struct.unpack("<I", _recv_exact(sock, 4))
    if length > MAX_PAYLOAD:
        raise RemoteProtocolError(f"payload length {length} exceeds {MAX_PAYLOAD}")
    return _recv_exact(sock, length)


def _send_message(sock: socket.socket, payload: bytes) -> None:
    sock.sendall(struct.pack("<I", len(payload)) + payload)


def encode_request(req: InversionRequest) -> bytes:
    samples = np.asarray(req.samples, dtype="<f4")
    return struct.pack("<II", len(samples), req.sample_rate) + samples.tobytes()


def decode_request(payload: bytes) -> tuple[np.ndarray, int]:
    if len(payload) < 8:
        raise RemoteProtocolError("request payload shorter than its header")
    n_samples, rate = struct.unpack_from("<II", payload)
    if len(payload) != 8 + 4 * n_samples:
        raise RemoteProtocolError(
            f"request payload {len(payload)} B inconsistent with {n_samples} samples"
        )
    samples = np.frombuffer(payload, dtype="<f4", count=n_samples, offset=8)
    return samples.copy(), rate


def encode_response(values: np.ndarray) -> bytes:
    values = np.ascontiguousarray(values, dtype="<f4")
    n_frames, dim = values.shape
    return struct.pack("<II", n_frames, dim) + values.tobytes()


def decode_response(payload: bytes) -> np.ndarray:
    if len(payload) < 8:
        raise RemoteProtocolError("response payload shorter than its header")
    n_frames, dim = struct.unpack_from("<II", payload)
    if dim != NUM_DIMS:
        raise RemoteProtocolError(f"response dim {dim}, expected {NUM_DIMS}")
    if len(payload) != 8 + 4 * n_frames * dim:
        raise RemoteProtocolError(
            f"response payload {len(payload)} B inconsistent with {n_frames} frames"
        )
    flat = np.frombuffer(payload, dtype="<f4", count=n_frames * dim, offset=8)
    return flat.reshape(n_frames, dim).astype(np.float64)


def remote_roundtrip(
    req: InversionRequest, host: str, port: int, timeout: float = DEFAULT_TIMEOUT
) -> InversionResponse:
    """One request/response over the wire; connection per call."""
    try:
        with socket.create_connection((host, port), timeout=timeout) as sock:
            sock.settimeout(timeout)
            _send_message(sock, encode_request(req))
            values = decode_response(_recv_message(sock))
    except socket.timeout as exc:
        raise RemoteTimeout(f"inversion host {host}:{port} timed out after {timeout}s") from exc
    except ConnectionError as exc:
        raise RemoteUnavailable(f"inversion host {host}:{port}: {exc}") from exc
    except OSError as exc:
        raise RemoteUnavailable(f"inversion host {host}:{port}: {exc}") from exc
    _check_frame_count(values, req, f"remote {host}:{port}")
    return InversionResponse(values=values)


class RemoteBackend:
    def __init__(self, host: str, port: int, timeout: float = DEFAULT_TIMEOUT):
        self.host = host
        self.port = port
        self.timeout = timeout

    def invert(self, req: InversionRequest) -> InversionResponse:
        return remote_roundtrip(req, self.host, self.port, timeout=self.timeout)


class InversionServer:
    """Minimal TCP host for an invert function, for tests and model hosting.

    handler(samples: float32 (n,), sample_rate) -> (n/160, 12) array.
    Serves any number of requests per connection until the peer closes.
    """

    def __init__(self, handler, host: str = "127.0.0.1", port: int = 0):
        self.handler = handler
        outer = self

        class _Handler(socketserver.BaseRequestHandler):
            def handle(self) -> None:
                while True:
                    try:
                        payload = _recv_message(self.request)
                    except (RemoteProtocolError, OSError):
                        return
                    samples, rate = decode_request(payload)
                    values = outer.handler(samples, rate)
                    _send_message(self.request, encode_response(np.asarray(values)))

        class _Server(socketserver.ThreadingTCPServer):
            allow_reuse_address = True
            daemon_threads = True

        self._server = _Server((host, port), _Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def address(self) -> tuple[str, int]:
        return self._server.server_address[:2]

    def start(self) -> "InversionServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()

    def __enter__(self) -> "InversionServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


def mock_handler(samples: np.ndarray, sample_rate: int) -> np.ndarray:
    """Wire-protocol handler exposing MockBackend, e.g. for a demo host."""
    frames = np.asarray(samples, dtype=np.float32).reshape(-1, SAMPLES_PER_FRAME)
    return np.stack([mock_frame_values(row) for row in frames])


def parse_backend_spec(spec: str):
    """Parse --backend {mock|replay:<csv>|remote:<host:port>}."""
    if spec == "mock":
        return MockBackend()
    if spec.startswith("replay:"):
        path = spec[len("replay:") :]
        if not path:
            raise ConfigError("--backend replay:<csv> needs a trajectory path")
        return ReplayBackend(path)
    if spec.startswith("remote:"):
        rest = spec[len("remote:") :]
        host, sep, port = rest.rpartition(":")
        if not sep or not host or not port.isdigit():
            raise ConfigError("--backend remote:<host:port> needs host and port")
        return RemoteBackend(host, int(port))
    raise ConfigError(f"unknown --backend {spec!r}; use mock, replay:<csv>, remote:<host:port>")
