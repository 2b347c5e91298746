import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from scipy.io import wavfile

from artistream.audio import SAMPLE_RATE

settings.register_profile(
    "suite", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")


def write_wav(path, samples, rate=SAMPLE_RATE):
    wavfile.write(str(path), rate, samples)


@pytest.fixture(scope="session")
def tone_wav(tmp_path_factory):
    """3.6 s of a 220 Hz tone at half scale: 36 batches, all voiced."""
    path = tmp_path_factory.mktemp("audio") / "tone36.wav"
    t = np.arange(int(3.6 * SAMPLE_RATE)) / SAMPLE_RATE
    write_wav(path, (0.5 * np.sin(2 * np.pi * 220.0 * t)).astype(np.float32))
    return path


@pytest.fixture(scope="session")
def long_wav(tmp_path_factory):
    """10 s chirp-ish tone, half scale: 100 batches."""
    path = tmp_path_factory.mktemp("audio") / "tone100.wav"
    t = np.arange(10 * SAMPLE_RATE) / SAMPLE_RATE
    sig = 0.5 * np.sin(2 * np.pi * (180.0 + 12.0 * t) * t)
    write_wav(path, sig.astype(np.float32))
    return path


@pytest.fixture(scope="session")
def gap_wav(tmp_path_factory):
    """1 s silence, 1.5 s tone, 1.1 s silence: exercises the VAD gate."""
    path = tmp_path_factory.mktemp("audio") / "gap36.wav"
    sr = SAMPLE_RATE
    lead = np.zeros(sr, dtype=np.float32)
    t = np.arange(int(1.5 * sr)) / sr
    voiced = (0.5 * np.sin(2 * np.pi * 200.0 * t)).astype(np.float32)
    tail = np.zeros(int(1.1 * sr), dtype=np.float32)
    write_wav(path, np.concatenate([lead, voiced, tail]))
    return path


@pytest.fixture(scope="session")
def vowel_wav(tmp_path_factory):
    """0.3 s sustained pseudo-vowel used as artificial context."""
    path = tmp_path_factory.mktemp("audio") / "vowel.wav"
    t = np.arange(int(0.3 * SAMPLE_RATE)) / SAMPLE_RATE
    sig = 0.3 * np.sin(2 * np.pi * 140.0 * t) + 0.15 * np.sin(2 * np.pi * 280.0 * t)
    write_wav(path, sig.astype(np.float32))
    return path


def smooth_norm_trajectory(frames: int) -> np.ndarray:
    """Synthetic normalized (frames, 12) trajectory; every dim non-constant."""
    t = np.arange(frames) / 100.0
    return np.stack(
        [0.8 * np.sin(2 * np.pi * (0.4 + 0.13 * d) * t + 0.3 * d) for d in range(12)],
        axis=1,
    )


@pytest.fixture(scope="session")
def norm_ref_1000(tmp_path_factory):
    """(values, csv_path) for a 1000-frame normalized reference."""
    from artistream.ema import write_ema_csv

    values = smooth_norm_trajectory(1000)
    path = tmp_path_factory.mktemp("ref") / "ref1000.csv"
    write_ema_csv(path, np.arange(1000), values)
    return values, path
