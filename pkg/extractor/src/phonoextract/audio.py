"""WAV loading and resampling to the 16 kHz mono pipeline rate."""

from __future__ import annotations

import wave
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.signal import resample_poly

from .errors import BadAudio

TARGET_RATE = 16_000

_WIDTH_DTYPE = {2: "<i2", 4: "<i4"}


def load_wav(path: str | Path) -> tuple[np.ndarray, int]:
    """Read a PCM WAV file into float32 samples in [-1, 1] plus its rate."""
    try:
        with wave.open(str(path), "rb") as fh:
            n_channels = fh.getnchannels()
            width = fh.getsampwidth()
            rate = fh.getframerate()
            frames = fh.readframes(fh.getnframes())
    except (wave.Error, EOFError, OSError) as exc:
        raise BadAudio(f"{path}: {exc}") from exc

    if width == 1:  # unsigned 8-bit
        samples = np.frombuffer(frames, dtype=np.uint8).astype(np.float32)
        samples = (samples - 128.0) / 128.0
    elif width in _WIDTH_DTYPE:
        ints = np.frombuffer(frames, dtype=_WIDTH_DTYPE[width])
        samples = ints.astype(np.float32) / float(2 ** (8 * width - 1))
    else:
        raise BadAudio(f"{path}: unsupported sample width {width}")
    if n_channels > 1:
        samples = samples.reshape(-1, n_channels).mean(axis=1)
    return samples, rate


def to_pipeline_rate(samples: np.ndarray, rate: int) -> np.ndarray:
    """Resample mono float samples to 16 kHz."""
    if rate == TARGET_RATE:
        return samples.astype(np.float32)
    ratio = Fraction(TARGET_RATE, rate).limit_denominator(1000)
    out = resample_poly(samples.astype(np.float64), ratio.numerator, ratio.denominator)
    return out.astype(np.float32)


def load_pipeline_audio(path: str | Path) -> np.ndarray:
    samples, rate = load_wav(path)
    return to_pipeline_rate(samples, rate)
