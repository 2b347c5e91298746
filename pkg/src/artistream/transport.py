"""Frame publication: cumulative shared-memory log and a WebSocket bridge.

Shared-memory layout (little-endian throughout), default capacity 5 MB:

    offset 0   magic   "EMASTRM1" (8 bytes ASCII)
    offset 8   u32     version = 1
    offset 12  u32     frame_record_size = 60
    offset 16  u32     dim = 12
    offset 20  u32     frame_rate = 100
    offset 24  ...     reserved (zero)
    offset 56  u64     published_count
    offset 64  records: [seq u64][speech u8][pad 3B][f32 x 12] = 60 bytes

The log is append-only and cumulative; records are never overwritten, so a
reader that polls late still sees everything it has not consumed (loss-free
catch-up). Publication ordering is a hard contract: record i is fully
written before published_count becomes i+1, so a reader never observes a
counter covering unwritten bytes. Exactly one writer; readers poll without
locks and never block. At 100 fps the default capacity (87380 records) lasts
about 14.5 minutes, after which writes raise BufferFull.

The WebSocket bridge broadcasts one JSON message per frame on /stream and
serves GET /healthz plus (optionally) the static viewer at /. Slow clients
are disconnected once 64 messages back up rather than stalling the pipeline.
"""

import asyncio
import json
import struct
import threading
import time
from dataclasses import dataclass
from multiprocessing import resource_tracker, shared_memory
from pathlib import Path

import numpy as np

from .ema import FRAME_RATE, NUM_DIMS, EmaFrame, Space
from .errors import BadMagic, BadVersion, BufferFull, ConfigError
from .kinematics import AvatarPose

SHM_MAGIC = b"EMASTRM1"
SHM_VERSION = 1
HEADER_SIZE = 64
RECORD_SIZE = 60
COUNT_OFFSET = 56
DEFAULT_CAPACITY = 5 * 2**20  # 5 MB
_RECORD = struct.Struct("<QB3x12f")
_HEADER = struct.Struct("<8sIIII")

DEFAULT_WS_PORT = 8765
WS_PATH = "/stream"
CLIENT_QUEUE_LIMIT = 64


def max_records(capacity: int = DEFAULT_CAPACITY) -> int:
    return (capacity - HEADER_SIZE) // RECORD_SIZE


class ShmWriter:
    """Single writer owning a named shared-memory log."""

    def __init__(self, name: str, capacity: int = DEFAULT_CAPACITY, unlink_existing: bool = True):
        if capacity < HEADER_SIZE + RECORD_SIZE:
            raise ConfigError(f"shm capacity {capacity} below one record")
        if unlink_existing:
            try:
                stale = shared_memory.SharedMemory(name=name)
                stale.close()
                stale.unlink()
            except FileNotFoundError:
                pass
        self._shm = shared_memory.SharedMemory(name=name, create=True, size=capacity)
        self.capacity = capacity
        self._count = 0
        buf = self._shm.buf
        buf[:HEADER_SIZE] = b"\0" * HEADER_SIZE
        _HEADER.pack_into(buf, 0, SHM_MAGIC, SHM_VERSION, RECORD_SIZE, NUM_DIMS, FRAME_RATE)
        struct.pack_into("<Q", buf, COUNT_OFFSET, 0)

    @property
    def name(self) -> str:
        return self._shm.name

    @property
    def max_records(self) -> int:
        return max_records(self.capacity)

    @property
    def published_count(self) -> int:
        return self._count

    def write(self, frame: EmaFrame) -> None:
        """Append one record, then advance the published counter."""
        if self._count >= self.max_records:
            raise BufferFull(
                f"shared-memory log full at {self.max_records} records "
                f"(~{self.max_records / FRAME_RATE / 60:.1f} min at {FRAME_RATE} fps)"
            )
        offset = HEADER_SIZE + self._count * RECORD_SIZE
        _RECORD.pack_into(
            self._shm.buf,
            offset,
            frame.seq,
            1 if frame.speech else 0,
            *np.asarray(frame.values, dtype=np.float32),
        )
        # Counter moves only after the record bytes are in place.
        self._count += 1
        struct.pack_into("<Q", self._shm.buf, COUNT_OFFSET, self._count)

    def close(self, unlink: bool = True) -> None:
        if self._shm is None:
            return
        shm, self._shm = self._shm, None
        shm.close()
        if unlink:
            shm.unlink()
        else:
            # Leave the mapping alive past process exit for later inspection;
            # without this the resource tracker unlinks it at shutdown.
            try:
                resource_tracker.unregister(shm._name, "shared_memory")
            except Exception:
                pass

    def __enter__(self) -> "ShmWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


class ShmReader:
    """Lock-free polling reader; never blocks."""

    def __init__(self, name: str):
        try:
            self._shm = shared_memory.SharedMemory(name=name)
        except FileNotFoundError as exc:
            raise ConfigError(f"no shared-memory buffer named {name!r}") from exc
        # Attaching registers with the resource tracker, which would unlink
        # the writer's buffer when this process exits; readers don't own it.
        try:
            resource_tracker.unregister(self._shm._name, "shared_memory")
        except Exception:
            pass
        magic, version, record_size, dim, rate = _HEADER.unpack_from(self._shm.buf, 0)
        if magic != SHM_MAGIC:
            self._shm.close()
            raise BadMagic(f"buffer {name!r} magic {magic!r} != {SHM_MAGIC!r}")
        if version != SHM_VERSION:
            self._shm.close()
            raise BadVersion(f"buffer {name!r} is layout version {version}, want {SHM_VERSION}")
        if record_size != RECORD_SIZE or dim != NUM_DIMS:
            self._shm.close()
            raise BadVersion(
                f"buffer {name!r} record geometry {record_size}/{dim} unsupported"
            )
        self.frame_rate = rate

    @property
    def published_count(self) -> int:
        return struct.unpack_from("<Q", self._shm.buf, COUNT_OFFSET)[0]

    def record(self, i: int) -> EmaFrame:
        """Decode record i; caller guarantees i < published_count."""
        fields = _RECORD.unpack_from(self._shm.buf, HEADER_SIZE + i * RECORD_SIZE)
        return EmaFrame(
            seq=fields[0],
            values=np.array(fields[2:], dtype=np.float64),
            space=Space.MILLIMETERS,
            speech=bool(fields[1]),
        )

    def poll(self, last_seen: int) -> list[EmaFrame]:
        """Decode records [last_seen, published_count); empty when caught up."""
        count = self.published_count
        return [self.record(i) for i in range(last_seen, count)]

    def close(self) -> None:
        self._shm.close()

    def __enter__(self) -> "ShmReader":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def inspect_shm(name: str) -> dict:
    """Header fields, published count, first/last seq, and a decode check of
    the final record. Used by `artistream shm-inspect`."""
    with ShmReader(name) as reader:
        count = reader.published_count
        report = {
            "name": name,
            "version": SHM_VERSION,
            "record_size": RECORD_SIZE,
            "dim": NUM_DIMS,
            "frame_rate": reader.frame_rate,
            "published_count": count,
            "first_seq": None,
            "last_seq": None,
            "last_record_ok": None,
        }
        if count > 0:
            first = reader.record(0)
            last = reader.record(count - 1)
            report["first_seq"] = int(first.seq)
            report["last_seq"] = int(last.seq)
            report["last_record_ok"] = bool(
                np.all(np.isfinite(last.values)) and last.seq >= first.seq
            )
        return report


def frame_message(
    frame: EmaFrame, pose: AvatarPose, lat_ms: dict | None = None
) -> dict:
    """The JSON schema broadcast per frame to viewer clients."""
    if frame.space is not Space.MILLIMETERS:
        raise ValueError("viewer messages carry millimeter frames")
    return {
        "seq": int(frame.seq),
        "speech": bool(frame.speech),
        "ema": [float(v) for v in frame.values],
        "pose": {
            "points": [[float(x), float(y)] for x, y in pose.points],
            "theta": float(pose.theta),
        },
        "lat_ms": lat_ms,
    }


class _ClientSlot:
    def __init__(self, limit: int, ws=None):
        self.queue: asyncio.Queue[str] = asyncio.Queue(maxsize=limit)
        self.ws = ws
        self.dropped = False


class StreamServer:
    """WebSocket/HTTP bridge running uvicorn on a dedicated thread.

    broadcast() is safe to call from the pipeline thread: it hops onto the
    server's event loop and enqueues per-client; a client whose queue is full
    is marked dead and disconnected instead of stalling anyone else.
    """

    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int = DEFAULT_WS_PORT,
        static_dir: str | Path | None = None,
        stats_provider=None,
        queue_limit: int = CLIENT_QUEUE_LIMIT,
    ):
        self.host = host
        self.port = port
        self.static_dir = Path(static_dir) if static_dir else None
        self.stats_provider = stats_provider  # () -> published frame count
        self.queue_limit = queue_limit
        self._clients: set[_ClientSlot] = set()
        self._clients_lock = threading.Lock()
        self._loop: asyncio.AbstractEventLoop | None = None
        self._server = None
        self._thread: threading.Thread | None = None
        self._started = time.monotonic()
        self._animate_ms: float | None = None
        self._frames_sent = 0
        self._app = self._build_app()

    # -- app ---------------------------------------------------------------

    def _build_app(self):
        from fastapi import FastAPI, WebSocket, WebSocketDisconnect

        app = FastAPI()
        server = self

        @app.get("/healthz")
        async def healthz():
            # An injected provider (e.g. the shm writer's counter) wins;
            # otherwise fall back to the bridge's own publish count.
            count = server.stats_provider() if server.stats_provider else server._frames_sent
            return {
                "published_count": count,
                "uptime_s": time.monotonic() - server._started,
                "clients": len(server._clients),
            }

        @app.websocket(WS_PATH)
        async def stream(ws: WebSocket):
            await ws.accept()
            server._loop = asyncio.get_running_loop()
            slot = _ClientSlot(server.queue_limit, ws=ws)
            with server._clients_lock:
                server._clients.add(slot)
            sender = asyncio.create_task(server._sender(ws, slot))
            try:
                while True:
                    text = await ws.receive_text()
                    server._note_stats(text)
            except WebSocketDisconnect:
                pass
            except Exception:
                pass
            finally:
                sender.cancel()
                with server._clients_lock:
                    server._clients.discard(slot)

        if self.static_dir and self.static_dir.is_dir():
            from fastapi.staticfiles import StaticFiles

            app.mount("/", StaticFiles(directory=str(self.static_dir), html=True))
        return app

    async def _sender(self, ws, slot: _ClientSlot) -> None:
        try:
            while True:
                text = await slot.queue.get()
                await ws.send_text(text)
        except asyncio.CancelledError:
            raise
        except Exception:
            slot.dropped = True

    def _note_stats(self, text: str) -> None:
        """Clients report their render time as {"animate_ms": <float>}."""
        try:
            value = json.loads(text).get("animate_ms")
            if value is not None:
                self._animate_ms = float(value)
        except (ValueError, AttributeError):
            pass

    @property
    def app(self):
        return self._app

    @property
    def animate_ms(self) -> float | None:
        return self._animate_ms

    @property
    def client_count(self) -> int:
        return len(self._clients)

    # -- broadcast ---------------------------------------------------------

    def attach_loop(self, loop: asyncio.AbstractEventLoop) -> None:
        self._loop = loop

    def broadcast(self, message: dict) -> None:
        """Enqueue one message for every connected client; never blocks."""
        if not self._clients:
            return
        text = json.dumps(message)
        loop = self._loop
        if loop is None or loop.is_closed():
            return
        loop.call_soon_threadsafe(self._fanout, text)

    def _fanout(self, text: str) -> None:
        with self._clients_lock:
            clients = list(self._clients)
        for slot in clients:
            try:
                slot.queue.put_nowait(text)
            except asyncio.QueueFull:
                # Backpressure limit hit: cut this client loose instead of
                # stalling the pipeline. Runs on the event loop, so closing
                # directly is safe.
                slot.dropped = True
                with self._clients_lock:
                    self._clients.discard(slot)
                if slot.ws is not None:
                    asyncio.ensure_future(self._close_quietly(slot.ws))

    @staticmethod
    async def _close_quietly(ws) -> None:
        try:
            await ws.close()
        except Exception:
            pass

    def publish_frame(self, frame: EmaFrame, pose: AvatarPose, lat_ms: dict | None = None) -> None:
        self._frames_sent += 1
        self.broadcast(frame_message(frame, pose, lat_ms))

    # -- lifecycle ---------------------------------------------------------

    def start(self, wait: float = 5.0) -> "StreamServer":
        import uvicorn

        config = uvicorn.Config(
            self._app, host=self.host, port=self.port, log_level="warning", ws="auto"
        )
        self._server = uvicorn.Server(config)
        self._thread = threading.Thread(target=self._run_server, daemon=True)
        self._thread.start()
        deadline = time.monotonic() + wait
        while not self._server.started:
            if time.monotonic() > deadline:
                raise ConfigError(f"websocket bridge failed to start on {self.host}:{self.port}")
            if not self._thread.is_alive():
                raise ConfigError(f"websocket bridge exited while binding {self.host}:{self.port}")
            time.sleep(0.01)
        sockets = self._server.servers[0].sockets if self._server.servers else []
        if sockets:
            self.port = sockets[0].getsockname()[1]
        return self

    def _run_server(self) -> None:
        loop = asyncio.new_event_loop()
        asyncio.set_event_loop(loop)
        self._loop = loop
        loop.run_until_complete(self._server.serve())

    def stop(self) -> None:
        if self._server is not None:
            self._server.should_exit = True
        if self._thread is not None:
            self._thread.join(timeout=5.0)
            self._thread = None

    def __enter__(self) -> "StreamServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
