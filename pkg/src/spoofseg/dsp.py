"""Waveform utilities: pre-emphasis, reflection extension, segment slicing."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .timeline import FRAME_SECONDS, Segment

DEFAULT_PRE_EMPHASIS = 0.97


@dataclass(frozen=True, eq=False)
class Waveform:
    """Mono waveform. Samples are float64; IO code normalizes into [-1, 1]."""

    samples: np.ndarray = field(repr=False)
    sample_rate: int = 16000

    def __post_init__(self):
        arr = np.array(self.samples, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("samples must be a non-empty 1-d sequence")
        if not np.isfinite(arr).all():
            raise ValueError("samples must be finite")
        if self.sample_rate < 1:
            raise ValueError("sample_rate must be positive")
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_seconds(self) -> float:
        return self.samples.size / self.sample_rate


def pre_emphasis(w: Waveform, alpha: float = DEFAULT_PRE_EMPHASIS) -> Waveform:
    """High-pass difference filter: out[n] = w[n] - alpha * w[n-1], out[0] = w[0]."""
    if not (0.0 <= alpha < 1.0):
        raise ValueError(f"alpha must be in [0, 1), got {alpha}")
    x = w.samples
    out = np.empty_like(x)
    out[0] = x[0]
    out[1:] = x[1:] - alpha * x[:-1]
    return Waveform(out, w.sample_rate)


def mirror_indices(length: int, target_len: int) -> np.ndarray:
    """Source indices of a time-symmetric reflection to `target_len` samples.

    The mirror has period 2L-2 (no duplicated edge samples), so consecutive
    output samples always map to adjacent source samples and the extension
    introduces no new discontinuities. A single-sample source just repeats.
    """
    if length < 1 or target_len < 1:
        raise ValueError("length and target_len must be >= 1")
    if length == 1:
        return np.zeros(target_len, dtype=np.int64)
    period = 2 * length - 2
    m = np.arange(target_len, dtype=np.int64) % period
    return np.where(m < length, m, period - m)


def reflect_extend(w: Waveform, target_len: int) -> Waveform:
    """Extend (or truncate) to exactly `target_len` samples by reflection."""
    idx = mirror_indices(len(w), target_len)
    return Waveform(w.samples[idx], w.sample_rate)


def samples_per_frame(sample_rate: int) -> int:
    """Samples in one 20 ms frame; the rate must divide evenly."""
    spf = sample_rate * FRAME_SECONDS
    if abs(spf - round(spf)) > 1e-9:
        raise ValueError(
            f"sample rate {sample_rate} does not yield an integer number of "
            f"samples per {FRAME_SECONDS} s frame"
        )
    return int(round(spf))


def extract_segment(w: Waveform, seg: Segment | tuple[int, int]) -> Waveform:
    """Slice the samples covered by a frame-grid segment. No resampling."""
    start_f, end_f = seg[0], seg[1]
    spf = samples_per_frame(w.sample_rate)
    a, b = start_f * spf, end_f * spf
    if start_f < 0 or b > len(w) or a >= b:
        raise ValueError(
            f"segment frames [{start_f}, {end_f}) map to samples [{a}, {b}) "
            f"outside the waveform of {len(w)} samples"
        )
    return Waveform(w.samples[a:b], w.sample_rate)
