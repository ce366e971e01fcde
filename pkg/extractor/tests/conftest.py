"""Toy audio + TextGrid fixtures for extractor tests."""

from __future__ import annotations

import wave
from pathlib import Path

import numpy as np
import pytest


def write_wav(path: Path, seconds: float = 1.0, rate: int = 16_000, channels: int = 1, seed: int = 0):
    rng = np.random.default_rng(seed)
    n = int(seconds * rate)
    t = np.arange(n) / rate
    signal = 0.4 * np.sin(2 * np.pi * 220 * t) + 0.05 * rng.normal(size=n)
    samples = np.clip(signal, -1, 1)
    pcm = (samples * 32767).astype("<i2")
    if channels == 2:
        pcm = np.column_stack([pcm, pcm]).reshape(-1)
    path.parent.mkdir(parents=True, exist_ok=True)
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(channels)
        fh.setsampwidth(2)
        fh.setframerate(rate)
        fh.writeframes(pcm.tobytes())


def write_textgrid(path: Path, phones, words, xmax: float = 1.0):
    out = ['File type = "ooTextFile"', 'Object class = "TextGrid"', ""]
    out += [f"xmin = 0", f"xmax = {xmax:g}", "tiers? <exists>", "size = 2", "item []:"]
    for k, (name, intervals) in enumerate((("phones", phones), ("words", words)), start=1):
        out.append(f"    item [{k}]:")
        out.append('        class = "IntervalTier"')
        out.append(f'        name = "{name}"')
        out.append("        xmin = 0")
        out.append(f"        xmax = {xmax:g}")
        out.append(f"        intervals: size = {len(intervals)}")
        for i, (label, a, b) in enumerate(intervals, start=1):
            out.append(f"        intervals [{i}]:")
            out.append(f"            xmin = {a:g}")
            out.append(f"            xmax = {b:g}")
            out.append(f'            text = "{label}"')
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(out) + "\n", encoding="utf-8")


UTT1_PHONES = [
    ("m", 0.00, 0.20),
    ("a", 0.20, 0.35),
    ("p", 0.35, 0.50),
    ("", 0.50, 0.55),  # silence, must be excluded from tokens
    ("i", 0.55, 0.65),
    ("s", 0.65, 0.80),
    ("u", 0.80, 1.00),
]
UTT1_WORDS = [("map", 0.0, 0.5), ("isu", 0.55, 1.0)]
UTT2_PHONES = [("t", 0.0, 0.3), ("a", 0.3, 0.6), ("u", 0.6, 0.9)]
UTT2_WORDS = [("tau", 0.0, 0.9)]


@pytest.fixture
def toy_input(tmp_path):
    audio = tmp_path / "audio"
    grids = tmp_path / "grids"
    write_wav(audio / "spk1" / "utt1.wav", seed=1)
    write_wav(audio / "spk1" / "utt2.wav", seed=2)
    write_textgrid(grids / "spk1" / "utt1.TextGrid", UTT1_PHONES, UTT1_WORDS)
    write_textgrid(grids / "spk1" / "utt2.TextGrid", UTT2_PHONES, UTT2_WORDS, xmax=0.9)
    return audio, grids
