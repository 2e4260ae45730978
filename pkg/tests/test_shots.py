"""Histogram construction, frame distance, and boundary detection."""

import random

import numpy as np
import pytest

from fanfare.shots import (BoundaryConfig, EmptyFrame, Histogram, LayoutMismatch,
                           check_bins, detect_boundaries, frame_distance,
                           histogram_of_frame, read_raw_frame, write_raw_frame)


def solid(value):
    """Histogram of a frame where every pixel is `value` on all channels."""
    bins = np.zeros((3, 64))
    bins[:, value // 4] = 1.0
    return Histogram.from_array(bins)


class TestHistogramOfFrame:
    def test_all_black(self):
        hist = histogram_of_frame(np.zeros((4, 4, 3), dtype=np.uint8))
        arr = hist.as_array()
        assert arr[:, 0].tolist() == [1.0, 1.0, 1.0]
        assert arr.sum() == 3.0

    def test_all_white(self):
        hist = histogram_of_frame(np.full((4, 4, 3), 255, dtype=np.uint8))
        arr = hist.as_array()
        assert arr[:, 63].tolist() == [1.0, 1.0, 1.0]

    def test_half_black_half_white(self):
        frame = np.zeros((2, 4, 3), dtype=np.uint8)
        frame[:, 2:, :] = 255
        arr = histogram_of_frame(frame).as_array()
        assert arr[:, 0].tolist() == [0.5, 0.5, 0.5]
        assert arr[:, 63].tolist() == [0.5, 0.5, 0.5]

    def test_empty_frame(self):
        with pytest.raises(EmptyFrame):
            histogram_of_frame(np.zeros((0, 4, 3), dtype=np.uint8))

    def test_bin_edges(self):
        # values 0-3 land in bin 0, value 4 in bin 1
        frame = np.array([[[3, 3, 3], [4, 4, 4]]], dtype=np.uint8)
        arr = histogram_of_frame(frame).as_array()
        assert arr[0, 0] == 0.5 and arr[0, 1] == 0.5

    def test_raw_frame_roundtrip(self):
        rng = np.random.default_rng(5)
        pixels = rng.integers(0, 256, size=(6, 8, 3), dtype=np.uint8)
        again = read_raw_frame(write_raw_frame(pixels))
        assert np.array_equal(pixels, again)


class TestFrameDistance:
    def test_identity(self):
        assert frame_distance(solid(0), solid(0)) == 0.0

    def test_black_vs_white_is_one(self):
        assert frame_distance(solid(0), solid(255)) == 1.0

    def test_black_vs_half(self):
        # per channel: |1-0.5| + |0.5| = 1; half -> 0.5; averaged over 3 -> 0.5
        frame = np.zeros((2, 4, 3), dtype=np.uint8)
        frame[:, 2:, :] = 255
        half = histogram_of_frame(frame)
        assert frame_distance(solid(0), half) == 0.5

    def test_symmetry_and_triangle_on_random(self):
        rng = np.random.default_rng(11)
        hists = []
        for _ in range(12):
            raw = rng.random((3, 64))
            raw /= raw.sum(axis=1, keepdims=True)
            hists.append(Histogram.from_array(raw))
        for _ in range(60):
            a, b, c = rng.choice(len(hists), size=3)
            dab = frame_distance(hists[a], hists[b])
            dba = frame_distance(hists[b], hists[a])
            assert dab == pytest.approx(dba)
            assert 0.0 <= dab <= 1.0
            assert dab <= frame_distance(hists[a], hists[c]) + frame_distance(hists[c], hists[b]) + 1e-12

    def test_layout_mismatch(self):
        with pytest.raises(LayoutMismatch):
            frame_distance(solid(0), Histogram(bins=((1.0,),)))

    def test_check_bins_rejects_negative(self):
        bad = np.zeros((3, 64))
        bad[0, 0], bad[0, 1] = 2.0, -1.0
        with pytest.raises(ValueError):
            check_bins(bad)

    def test_check_bins_accepts_blank_channel(self):
        bins = np.zeros((3, 64))
        bins[0, 0] = 1.0
        bins[1, 5] = 1.0  # channel 2 all-zero: declared blank
        check_bins(bins)


class TestDetectBoundaries:
    def test_constant_frames(self):
        frames = [(t, solid(0)) for t in range(0, 10000, 1000)]
        assert detect_boundaries(frames) == []

    def test_hard_cut(self):
        frames = [(t, solid(0)) for t in range(0, 5000, 1000)]
        frames += [(t, solid(255)) for t in range(5000, 10000, 1000)]
        assert detect_boundaries(frames) == [5000]

    def test_noise_below_cut_above(self):
        # successive distances <= 0.1 from jitter, one 0.6 jump at 6000
        rng = random.Random(3)
        frames = []
        for t in range(0, 6000, 1000):
            a = rng.uniform(0, 0.1)
            bins = np.zeros((3, 64))
            bins[:, 0], bins[:, 1] = 1.0 - a, a
            frames.append((t, Histogram.from_array(bins)))
        for t in range(6000, 12000, 1000):
            a = rng.uniform(0, 0.1)
            bins = np.zeros((3, 64))
            bins[:, 32], bins[:, 33] = 1.0 - a, a
            frames.append((t, Histogram.from_array(bins)))
        assert detect_boundaries(frames, BoundaryConfig(0.35)) == [6000]

    def test_fewer_than_two_frames(self):
        assert detect_boundaries([]) == []
        assert detect_boundaries([(0, solid(0))]) == []

    def test_threshold_monotone(self):
        rng = np.random.default_rng(9)
        frames = []
        for t in range(0, 30000, 1000):
            raw = rng.random((3, 64))
            raw /= raw.sum(axis=1, keepdims=True)
            frames.append((t, Histogram.from_array(raw)))
        low = detect_boundaries(frames, BoundaryConfig(0.2))
        high = detect_boundaries(frames, BoundaryConfig(0.5))
        assert set(high) <= set(low)

    def test_permutation_invariance_of_pixels(self):
        rng = np.random.default_rng(21)
        base = rng.integers(0, 256, size=(8, 8, 3), dtype=np.uint8)
        flat = base.reshape(-1, 3)
        shuffled = flat[rng.permutation(len(flat))].reshape(8, 8, 3)
        assert frame_distance(histogram_of_frame(base), histogram_of_frame(shuffled)) == 0.0

    def test_non_increasing_times_rejected(self):
        with pytest.raises(ValueError):
            detect_boundaries([(0, solid(0)), (0, solid(0))])

    def test_threshold_validation(self):
        with pytest.raises(ValueError):
            detect_boundaries([], BoundaryConfig(0.0))
