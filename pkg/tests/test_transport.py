import json
import struct
import threading
import time
import uuid

import numpy as np
import pytest

from artistream.defaults import default_rig
from artistream.ema import EmaFrame, NUM_DIMS, Space, flatten_points
from artistream.errors import BadMagic, BadVersion, BufferFull, ConfigError
from artistream.kinematics import pose_from_frame
from artistream.transport import (
    COUNT_OFFSET,
    HEADER_SIZE,
    RECORD_SIZE,
    SHM_MAGIC,
    ShmReader,
    ShmWriter,
    StreamServer,
    frame_message,
    inspect_shm,
    max_records,
)


def shm_name():
    return f"artistream-test-{uuid.uuid4().hex[:12]}"


def mm_frame(seq, values=None, speech=True):
    if values is None:
        rng = np.random.default_rng(seq)
        # float32-representable payload so shm round trips are bit-identical
        values = rng.uniform(-50, 50, NUM_DIMS).astype(np.float32).astype(np.float64)
    return EmaFrame(seq=seq, values=values, space=Space.MILLIMETERS, speech=speech)


@pytest.fixture
def writer():
    w = ShmWriter(shm_name())
    yield w
    w.close()


def test_header_layout(writer):
    buf = bytes(writer._shm.buf[:HEADER_SIZE])
    magic, version, record_size, dim, rate = struct.unpack_from("<8sIIII", buf)
    assert magic == SHM_MAGIC == b"EMASTRM1"
    assert (version, record_size, dim, rate) == (1, 60, 12, 100)
    (count,) = struct.unpack_from("<Q", buf, COUNT_OFFSET)
    assert count == 0


def test_record_layout(writer):
    values = np.arange(NUM_DIMS, dtype=np.float32).astype(np.float64)
    writer.write(EmaFrame(seq=7, values=values, space=Space.MILLIMETERS, speech=True))
    raw = bytes(writer._shm.buf[HEADER_SIZE : HEADER_SIZE + RECORD_SIZE])
    seq, speech = struct.unpack_from("<QB", raw)
    floats = struct.unpack_from("<12f", raw, 12)
    assert (seq, speech) == (7, 1)
    assert floats == tuple(values)
    assert len(raw) == 60


def test_capacity_math():
    assert max_records() == 87380  # (5 MiB - 64) // 60
    assert max_records(HEADER_SIZE + 2 * RECORD_SIZE) == 2


def test_round_trip_bit_identical(writer):
    frames = [mm_frame(i, speech=bool(i % 2)) for i in range(360)]
    for f in frames:
        writer.write(f)
    with ShmReader(writer.name) as reader:
        back = reader.poll(0)
    assert len(back) == 360
    for a, b in zip(frames, back):
        assert a == b  # seq, speech, and every f32-representable value


def test_poll_is_incremental_and_non_blocking(writer):
    with ShmReader(writer.name) as reader:
        assert reader.poll(0) == []  # nothing yet; returns immediately
        for i in range(5):
            writer.write(mm_frame(i))
        first = reader.poll(0)
        assert [f.seq for f in first] == [0, 1, 2, 3, 4]
        assert reader.poll(5) == []
        for i in range(5, 8):
            writer.write(mm_frame(i))
        assert [f.seq for f in reader.poll(5)] == [5, 6, 7]


def test_reader_sees_gap_free_prefix_under_concurrency(writer):
    """Single writer, polling reader on another thread: the reader must
    observe seqs 0..N-1 in order with no gaps or duplicates."""
    total = 360
    seen = []
    stop = threading.Event()

    def poll_loop():
        last = 0
        while not stop.is_set() or last < total:
            frames = ShmReader(writer.name).poll(last)
            seen.extend(f.seq for f in frames)
            last += len(frames)

    t = threading.Thread(target=poll_loop)
    t.start()
    for i in range(total):
        writer.write(mm_frame(i))
    stop.set()
    t.join(timeout=10)
    assert seen == list(range(total))


def test_buffer_full_is_an_error():
    name = shm_name()
    w = ShmWriter(name, capacity=HEADER_SIZE + 3 * RECORD_SIZE)
    try:
        for i in range(3):
            w.write(mm_frame(i))
        with pytest.raises(BufferFull):
            w.write(mm_frame(3))
    finally:
        w.close()


def test_reader_rejects_missing_and_corrupt_buffers():
    with pytest.raises(ConfigError):
        ShmReader("artistream-test-does-not-exist")
    name = shm_name()
    w = ShmWriter(name)
    try:
        w._shm.buf[0:8] = b"WRONGMAG"
        with pytest.raises(BadMagic):
            ShmReader(name)
        w._shm.buf[0:8] = SHM_MAGIC
        w._shm.buf[8:12] = struct.pack("<I", 99)
        with pytest.raises(BadVersion):
            ShmReader(name)
    finally:
        w.close()


def test_inspect_reports_counts(writer):
    report = inspect_shm(writer.name)
    assert report["published_count"] == 0
    assert report["first_seq"] is None
    for i in range(12):
        writer.write(mm_frame(i))
    report = inspect_shm(writer.name)
    assert report["published_count"] == 12
    assert report["first_seq"] == 0
    assert report["last_seq"] == 11
    assert report["last_record_ok"] is True


def test_writer_unlink_frees_the_name():
    name = shm_name()
    ShmWriter(name).close(unlink=True)
    with pytest.raises(ConfigError):
        ShmReader(name)


# -- websocket bridge --------------------------------------------------------


def rest_publisher(server, count, lat=None, seq0=0):
    rig = default_rig()
    for s in range(seq0, seq0 + count):
        frame = EmaFrame(seq=s, values=flatten_points(rig.rest),
                         space=Space.MILLIMETERS, speech=True)
        server.publish_frame(frame, pose_from_frame(frame, rig), lat)


def test_frame_message_schema():
    rig = default_rig()
    frame = EmaFrame(seq=5, values=flatten_points(rig.rest),
                     space=Space.MILLIMETERS, speech=False)
    msg = frame_message(frame, pose_from_frame(frame, rig), {"model": 1.5, "send": 0.2})
    assert msg["seq"] == 5 and msg["speech"] is False
    assert len(msg["ema"]) == 12
    assert len(msg["pose"]["points"]) == 6
    assert msg["pose"]["theta"] == 0.0
    assert msg["lat_ms"] == {"model": 1.5, "send": 0.2}
    norm = EmaFrame(seq=0, values=np.zeros(NUM_DIMS), space=Space.NORMALIZED)
    with pytest.raises(ValueError):
        frame_message(norm, pose_from_frame(frame, rig))


def test_healthz_and_stream_round_trip():
    import httpx
    from websockets.sync.client import connect

    published = []
    server = StreamServer(port=0, stats_provider=lambda: len(published))
    with server:
        health = httpx.get(f"http://127.0.0.1:{server.port}/healthz").json()
        assert health["published_count"] == 0
        assert health["clients"] == 0
        assert health["uptime_s"] >= 0

        with connect(f"ws://127.0.0.1:{server.port}/stream") as ws:
            deadline = time.monotonic() + 5
            while server.client_count == 0 and time.monotonic() < deadline:
                time.sleep(0.01)
            rest_publisher(server, 20)
            seqs = [json.loads(ws.recv(timeout=5))["seq"] for _ in range(20)]
            assert seqs == list(range(20))

            ws.send(json.dumps({"animate_ms": 7.25}))
            deadline = time.monotonic() + 5
            while server.animate_ms is None and time.monotonic() < deadline:
                time.sleep(0.01)
            assert server.animate_ms == 7.25


def test_healthz_counts_publishes_when_no_provider_given():
    import httpx

    server = StreamServer(port=0)
    with server:
        url = f"http://127.0.0.1:{server.port}/healthz"
        assert httpx.get(url).json()["published_count"] == 0
        rest_publisher(server, 7)
        assert httpx.get(url).json()["published_count"] == 7


def test_slow_client_is_disconnected_not_blocking():
    from websockets.sync.client import connect

    server = StreamServer(port=0, queue_limit=8)
    with server:
        with connect(f"ws://127.0.0.1:{server.port}/stream") as ws:
            deadline = time.monotonic() + 5
            while server.client_count == 0 and time.monotonic() < deadline:
                time.sleep(0.01)
            # client never reads: flood well past the queue limit
            t0 = time.monotonic()
            rest_publisher(server, 500)
            assert time.monotonic() - t0 < 2.0  # publishing never stalls
            deadline = time.monotonic() + 5
            while server.client_count > 0 and time.monotonic() < deadline:
                time.sleep(0.01)
            assert server.client_count == 0  # cut loose, not queued forever


def test_static_dir_served_at_root(tmp_path):
    import httpx

    (tmp_path / "index.html").write_text("<html><body>viewer</body></html>")
    server = StreamServer(port=0, static_dir=tmp_path)
    with server:
        body = httpx.get(f"http://127.0.0.1:{server.port}/").text
        assert "viewer" in body
