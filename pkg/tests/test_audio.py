import time

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from artistream.audio import (
    AudioBatch,
    BATCH_SAMPLES,
    MicrophoneSource,
    SAMPLE_RATE,
    WavFileSource,
    batches_from_samples,
    decode_wav,
    open_source,
    resample_linear,
)
from artistream.errors import ConfigError, DeviceUnavailable, IoFailure, UnsupportedFormat

from conftest import write_wav


def test_batch_enforces_sample_count():
    with pytest.raises(ValueError):
        AudioBatch(index=0, samples=np.zeros(100, dtype=np.float32), capture_time=0.0)


def test_batch_samples_read_only():
    batch = AudioBatch(index=0, samples=np.zeros(BATCH_SAMPLES), capture_time=0.0)
    with pytest.raises(ValueError):
        batch.samples[0] = 1.0


def test_resample_identity_same_rate():
    x = np.linspace(-1, 1, 100).astype(np.float32)
    assert np.array_equal(resample_linear(x, 16000, 16000), x)


def test_resample_doubles_length():
    x = np.sin(np.arange(800) * 0.01).astype(np.float32)
    y = resample_linear(x, 8000, 16000)
    assert len(y) == 1600
    # constant stays constant under linear interpolation
    z = resample_linear(np.full(500, 0.25, dtype=np.float32), 44100, 16000)
    assert np.allclose(z, 0.25, atol=1e-6)


def test_decode_int16_scaling(tmp_path):
    path = tmp_path / "i16.wav"
    raw = np.array([0, 16384, -16384, 32767, -32768], dtype=np.int16)
    write_wav(path, raw)
    out = decode_wav(path)
    assert out.dtype == np.float32
    assert np.allclose(out, raw.astype(np.float64) / 2**15, atol=1e-7)


def test_decode_float32_passthrough(tmp_path):
    path = tmp_path / "f32.wav"
    raw = np.array([0.0, 0.5, -0.5, 1.0, -1.0], dtype=np.float32)
    write_wav(path, raw)
    assert np.array_equal(decode_wav(path), raw)


def test_decode_stereo_downmix(tmp_path):
    path = tmp_path / "st.wav"
    left = np.full(100, 0.5, dtype=np.float32)
    right = np.full(100, -0.25, dtype=np.float32)
    write_wav(path, np.stack([left, right], axis=1))
    out = decode_wav(path)
    assert np.allclose(out, 0.125, atol=1e-7)


def test_decode_resamples_foreign_rate(tmp_path):
    path = tmp_path / "8k.wav"
    write_wav(path, np.zeros(8000, dtype=np.float32), rate=8000)
    assert len(decode_wav(path)) == SAMPLE_RATE


def test_decode_rejects_unsupported_dtype(tmp_path):
    path = tmp_path / "u8.wav"
    write_wav(path, np.full(64, 128, dtype=np.uint8))
    with pytest.raises(UnsupportedFormat):
        decode_wav(path)


def test_decode_missing_file(tmp_path):
    with pytest.raises(IoFailure):
        decode_wav(tmp_path / "nope.wav")


def test_batches_pad_the_tail():
    chunks = batches_from_samples(np.ones(3600, dtype=np.float32))
    assert [pad for _, pad in chunks] == [0, 0, 1200]
    assert all(len(c) == BATCH_SAMPLES for c, _ in chunks)
    assert np.all(chunks[2][0][400:] == 0.0)


@given(st.integers(0, 5000))
def test_batches_reassemble_to_padded_original(n):
    samples = np.arange(n, dtype=np.float32) / max(n, 1)
    chunks = batches_from_samples(samples)
    if n == 0:
        assert chunks == []
        return
    joined = np.concatenate([c for c, _ in chunks])
    assert len(joined) % BATCH_SAMPLES == 0
    assert np.array_equal(joined[:n], samples)
    assert np.all(joined[n:] == 0.0)


def test_wav_source_iterates_in_order(tmp_path):
    path = tmp_path / "three.wav"
    sig = np.arange(4000, dtype=np.float32) / 4000
    write_wav(path, sig)
    with WavFileSource(path) as src:
        batches = list(src)
    assert [b.index for b in batches] == [0, 1, 2]
    assert [b.pad for b in batches] == [0, 0, 800]
    assert np.array_equal(batches[0].samples, sig[:BATCH_SAMPLES])
    assert src.read_batch() is None  # stays exhausted


def test_wav_source_realtime_throttles(tmp_path):
    path = tmp_path / "short.wav"
    write_wav(path, np.zeros(3 * BATCH_SAMPLES, dtype=np.float32))
    src = WavFileSource(path, realtime=True)
    t0 = time.monotonic()
    list(src)
    # batch k releases at k * 100 ms; three batches take at least 200 ms
    assert time.monotonic() - t0 >= 0.18


def test_open_source_requires_exactly_one():
    with pytest.raises(ConfigError):
        open_source()
    with pytest.raises(ConfigError):
        open_source(wav="x.wav", mic=True)


def test_microphone_unavailable_without_driver():
    # sounddevice is not installed in this environment
    with pytest.raises(DeviceUnavailable):
        MicrophoneSource()
