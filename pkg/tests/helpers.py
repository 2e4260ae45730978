"""Shared event-construction helpers for the test suite."""

import numpy as np

from fanfare.events import (ActionScore, CheerScore, FaceDetection, FrameHistogram,
                            Graphic, Kind, MarkerEvent, ToneScore, Transcript,
                            validate_stream)


def cheer(t0, score, channel="c1"):
    return MarkerEvent(channel, Kind.CHEER, t0, t0 + 6000, CheerScore(score))


def tone(t0, score, channel="c1"):
    return MarkerEvent(channel, Kind.TONE, t0, t0 + 6000, ToneScore(score))


def action(t0, score, channel="c1"):
    return MarkerEvent(channel, Kind.ACTION, t0, t0 + 1000, ActionScore(score))


def transcript(t0, text, channel="c1"):
    return MarkerEvent(channel, Kind.TRANSCRIPT, t0, t0 + 1000, Transcript(text))


def graphic(t0, text, channel="c1", confidence=0.9):
    return MarkerEvent(channel, Kind.GRAPHIC, t0, t0 + 1000, Graphic(text, confidence))


def solid_bins(bin_index):
    bins = np.zeros((3, 64))
    bins[:, bin_index] = 1.0
    return tuple(tuple(row) for row in bins)


def hist_event(t0, bin_index, channel="c1"):
    return MarkerEvent(channel, Kind.HISTOGRAM, t0, t0 + 1000,
                       FrameHistogram(bins=solid_bins(bin_index)))


def face_event(t0, box, frame_dims, embedding, label=None, channel="c1"):
    return MarkerEvent(channel, Kind.FACE, t0, t0 + 1000,
                       FaceDetection(box=tuple(box), frame_dims=tuple(frame_dims),
                                     embedding=tuple(embedding), label=label))


def stream_of(*events, channel=None):
    return validate_stream(list(events), channel=channel)
