"""Visual shot-boundary detection from per-frame color histograms.

A frame is summarized as 3 channels x 64 uniform bins over pixel values
[0, 256), each channel L1-normalized (an all-zero channel is allowed only
for a declared blank frame).  The distance between two frames is half the
L1 distance averaged over the three channels, which is a metric bounded in
[0, 1].  A shot boundary is any frame whose distance to its predecessor
exceeds a configurable threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

CHANNELS = 3
BINS_PER_CHANNEL = 64
_BIN_WIDTH = 256 // BINS_PER_CHANNEL  # 4 pixel values per bin
_NORM_TOL = 1e-6


class EmptyFrame(ValueError):
    """Frame has no pixels."""


class LayoutMismatch(ValueError):
    """Histograms do not share the 3 x 64 bin layout."""


def check_bins(bins) -> np.ndarray:
    """Validate a 3 x 64 histogram; returns it as a float array.

    Each channel must be non-negative and sum to 1 within 1e-6, or be
    all-zero (blank frame).  Raises ValueError otherwise.
    """
    arr = np.asarray(bins, dtype=float)
    if arr.shape != (CHANNELS, BINS_PER_CHANNEL):
        raise ValueError(
            f"histogram must be {CHANNELS} channels x {BINS_PER_CHANNEL} bins, got shape {arr.shape}")
    if np.any(arr < 0):
        raise ValueError("histogram bins must be non-negative")
    sums = arr.sum(axis=1)
    for c, s in enumerate(sums):
        if s != 0.0 and abs(s - 1.0) > _NORM_TOL:
            raise ValueError(f"channel {c} sums to {s}, expected 1 within {_NORM_TOL} (or all-zero)")
    return arr


@dataclass(frozen=True)
class Histogram:
    """Validated per-frame color histogram."""

    bins: tuple  # 3 x 64, tuples of floats

    @classmethod
    def from_array(cls, arr) -> "Histogram":
        arr = check_bins(arr)
        return cls(bins=tuple(tuple(float(v) for v in ch) for ch in arr))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.bins, dtype=float)


@dataclass(frozen=True)
class BoundaryConfig:
    distance_threshold: float = 0.35  # in (0, 1]

    def validate(self) -> "BoundaryConfig":
        if not (0.0 < self.distance_threshold <= 1.0):
            raise ValueError(
                f"distance_threshold must be in (0, 1], got {self.distance_threshold}")
        return self


def histogram_of_frame(pixels) -> Histogram:
    """Bin an rows x cols x 3 array of values in [0, 255] into a Histogram.

    Bin b of a channel counts pixels with value in [4b, 4b+4); each channel
    is normalized by the pixel count.
    """
    arr = np.asarray(pixels)
    if arr.ndim != 3 or arr.shape[2] != CHANNELS:
        raise ValueError(f"expected rows x cols x {CHANNELS} pixel array, got shape {arr.shape}")
    rows, cols = arr.shape[:2]
    if rows < 1 or cols < 1:
        raise EmptyFrame("frame has no pixels")
    n = rows * cols
    idx = (arr.astype(np.int64) // _BIN_WIDTH).clip(0, BINS_PER_CHANNEL - 1)
    bins = np.zeros((CHANNELS, BINS_PER_CHANNEL))
    for c in range(CHANNELS):
        bins[c] = np.bincount(idx[:, :, c].ravel(), minlength=BINS_PER_CHANNEL) / n
    return Histogram.from_array(bins)


def frame_distance(a: Histogram, b: Histogram) -> float:
    """Half the L1 distance averaged over channels; symmetric, in [0, 1]."""
    aa, bb = np.asarray(a.bins, dtype=float), np.asarray(b.bins, dtype=float)
    if aa.shape != bb.shape:
        raise LayoutMismatch(f"bin layouts differ: {aa.shape} vs {bb.shape}")
    return float(np.abs(aa - bb).sum() / (2 * CHANNELS))


def detect_boundaries(frames: Sequence, cfg: BoundaryConfig = BoundaryConfig()) -> list:
    """Timestamps of frames whose distance to the previous frame exceeds the threshold.

    `frames` is a time-ordered sequence of (StreamTime, Histogram) pairs with
    strictly increasing timestamps; fewer than two frames yield no boundaries.
    """
    cfg.validate()
    boundaries = []
    prev_t = None
    prev_h = None
    for t, hist in frames:
        if prev_t is not None:
            if t <= prev_t:
                raise ValueError(f"frame times must be strictly increasing ({prev_t} -> {t})")
            if frame_distance(prev_h, hist) > cfg.distance_threshold:
                boundaries.append(t)
        prev_t, prev_h = t, hist
    return boundaries


def read_raw_frame(data: bytes) -> np.ndarray:
    """Decode the binary test format: rows, cols as 32-bit little-endian,
    then row-major 8-bit RGB triples."""
    if len(data) < 8:
        raise ValueError("raw frame shorter than its 8-byte header")
    rows = int.from_bytes(data[0:4], "little")
    cols = int.from_bytes(data[4:8], "little")
    expected = rows * cols * CHANNELS
    body = np.frombuffer(data[8:], dtype=np.uint8)
    if body.size != expected:
        raise ValueError(f"raw frame body has {body.size} bytes, expected {expected}")
    return body.reshape(rows, cols, CHANNELS)


def write_raw_frame(pixels) -> bytes:
    """Inverse of read_raw_frame."""
    arr = np.asarray(pixels, dtype=np.uint8)
    rows, cols = arr.shape[:2]
    return rows.to_bytes(4, "little") + cols.to_bytes(4, "little") + arr.tobytes()
