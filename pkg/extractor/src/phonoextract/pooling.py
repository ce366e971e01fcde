"""Frame pooling over phone intervals."""

from __future__ import annotations

import numpy as np

from .backbones import FRAME_RATE
from .errors import EmptyUtterance


def frame_centers(n_frames: int) -> np.ndarray:
    return (np.arange(n_frames) + 0.5) / FRAME_RATE


def pool_frames(frames: np.ndarray, interval: tuple[float, float]) -> np.ndarray:
    """Mean of the frames whose centers fall in [start, end).

    When no frame center lands inside the interval, the single frame whose
    center is nearest the interval midpoint is used (earlier frame on ties).
    Raises EmptyUtterance when there are no frames at all or the interval
    lies outside the utterance.
    """
    start, end = interval
    n = len(frames)
    if n == 0:
        raise EmptyUtterance("utterance has no frames")
    if end <= start:
        raise EmptyUtterance(f"empty interval [{start}, {end})")
    duration = n / FRAME_RATE
    if start >= duration or end <= 0.0:
        raise EmptyUtterance(
            f"interval [{start}, {end}) outside utterance of {duration:.3f}s"
        )
    centers = frame_centers(n)
    inside = (centers >= start) & (centers < end)
    if inside.any():
        return frames[inside].mean(axis=0)
    midpoint = 0.5 * (start + end)
    nearest = int(np.argmin(np.abs(centers - midpoint)))
    return frames[nearest]
