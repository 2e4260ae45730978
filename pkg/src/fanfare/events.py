"""Marker-event streams: time model, wire schemas, validation, windowed access.

Every detector in the pipeline (crowd cheer, commentator tone, transcripts,
player action, TV graphics, frame histograms, face detections) reports its
output as a time-stamped :class:`MarkerEvent` on a channel stream.  This
module owns the wire format (line-delimited JSON, one object per line), the
per-kind payload invariants, and the time-windowed access used by the
curation engine.

Time is integer milliseconds since stream start.  Audio-derived scores
(cheer, tone) cover back-to-back 6 s windows; action scores cover single
1 s frames.  Interval intersection is closed on both ends: an event that
touches a window boundary is inside it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence, Union

from . import shots

StreamTime = int  # milliseconds since stream start, >= 0

AUDIO_WINDOW_MS = 6000  # cheer/tone scores cover exactly this span
FRAME_MS = 1000         # action scores cover exactly one frame at 1 fps


class Kind(str, Enum):
    """Marker kinds, one per upstream detector."""

    CHEER = "cheer"
    TONE = "tone"
    TRANSCRIPT = "transcript"
    ACTION = "action"
    GRAPHIC = "graphic"
    HISTOGRAM = "histogram"
    FACE = "face"


class StreamError(Exception):
    """Base class for event-stream errors; carries the offending field."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


class MalformedRecord(StreamError):
    """Record is not parseable as one JSON object with the expected fields."""


class UnknownKind(StreamError):
    """Record names a kind no detector produces."""


class InvariantViolation(StreamError):
    """Record parsed but a payload invariant does not hold."""


class MixedChannels(StreamError):
    """Events from more than one channel were given to validate_stream."""


@dataclass(frozen=True)
class CheerScore:
    score: float  # signed classifier decision in [-1, 1]


@dataclass(frozen=True)
class ToneScore:
    score: float  # signed classifier decision in [-1, 1]


@dataclass(frozen=True)
class ActionScore:
    score: float  # per-frame celebration score in [0, 1]


@dataclass(frozen=True)
class Transcript:
    text: str  # may be empty


@dataclass(frozen=True)
class Graphic:
    text: str         # raw OCR output, unparsed
    confidence: float  # OCR confidence in [0, 1]


@dataclass(frozen=True)
class FrameHistogram:
    bins: tuple  # 3 channels x 64 bins, each channel L1-normalized or all-zero


@dataclass(frozen=True)
class FaceDetection:
    box: tuple               # (x, y, w, h) pixels, within frame bounds
    frame_dims: tuple        # (W, H) pixels
    embedding: tuple         # fixed-dimension real vector
    label: Optional[str] = None  # optional oracle identity, for purity checks


Payload = Union[
    CheerScore, ToneScore, ActionScore, Transcript, Graphic,
    FrameHistogram, FaceDetection,
]

_PAYLOAD_TYPES = {
    Kind.CHEER: CheerScore,
    Kind.TONE: ToneScore,
    Kind.ACTION: ActionScore,
    Kind.TRANSCRIPT: Transcript,
    Kind.GRAPHIC: Graphic,
    Kind.HISTOGRAM: FrameHistogram,
    Kind.FACE: FaceDetection,
}

# Wire fields each kind may carry beyond channel/kind/t_start/t_end.
_KNOWN_FIELDS = {
    Kind.CHEER: {"score"},
    Kind.TONE: {"score"},
    Kind.ACTION: {"score"},
    Kind.TRANSCRIPT: {"text"},
    Kind.GRAPHIC: {"text", "confidence"},
    Kind.HISTOGRAM: {"bins"},
    Kind.FACE: {"box", "frame_dims", "embedding", "label"},
}
_COMMON_FIELDS = {"channel", "kind", "t_start", "t_end"}


@dataclass
class ParseStats:
    """Warning tallies accumulated while parsing a stream."""

    unknown_fields: dict = field(default_factory=dict)

    @property
    def unknown_field_count(self) -> int:
        return sum(self.unknown_fields.values())

    def note_unknown(self, name: str) -> None:
        self.unknown_fields[name] = self.unknown_fields.get(name, 0) + 1


@dataclass(frozen=True)
class MarkerEvent:
    """One time-stamped detector output on a channel stream."""

    channel: str
    kind: Kind
    t_start: StreamTime
    t_end: StreamTime
    payload: Payload

    def intersects(self, t0: StreamTime, t1: StreamTime) -> bool:
        """Closed-closed interval intersection with [t0, t1]."""
        return self.t_end >= t0 and self.t_start <= t1


def _require(record: dict, name: str, types, err=MalformedRecord):
    if name not in record:
        raise err(f"missing field '{name}'", field=name)
    value = record[name]
    if not isinstance(value, types) or isinstance(value, bool):
        raise err(f"field '{name}' has wrong type", field=name)
    return value


def _check_score(value: float, lo: float, hi: float, name: str) -> float:
    if not (lo <= value <= hi):
        raise InvariantViolation(
            f"field '{name}' = {value} outside [{lo}, {hi}]", field=name)
    return float(value)


def validate_event(ev: MarkerEvent) -> MarkerEvent:
    """Check every invariant for the event's kind; return it unchanged."""
    if not ev.channel or not isinstance(ev.channel, str):
        raise InvariantViolation("channel must be a non-empty string", field="channel")
    if not isinstance(ev.t_start, int) or not isinstance(ev.t_end, int):
        raise InvariantViolation("t_start/t_end must be integer milliseconds", field="t_start")
    if ev.t_start < 0:
        raise InvariantViolation("t_start must be >= 0", field="t_start")
    if ev.t_end < ev.t_start:
        raise InvariantViolation("t_end must be >= t_start", field="t_end")

    duration = ev.t_end - ev.t_start
    p = ev.payload
    expected = _PAYLOAD_TYPES[ev.kind]
    if not isinstance(p, expected):
        raise InvariantViolation(
            f"payload type {type(p).__name__} does not match kind '{ev.kind.value}'",
            field="kind")

    if ev.kind in (Kind.CHEER, Kind.TONE):
        _check_score(p.score, -1.0, 1.0, "score")
        if duration != AUDIO_WINDOW_MS:
            raise InvariantViolation(
                f"{ev.kind.value} events must span exactly {AUDIO_WINDOW_MS} ms, got {duration}",
                field="t_end")
    elif ev.kind is Kind.ACTION:
        _check_score(p.score, 0.0, 1.0, "score")
        if duration != FRAME_MS:
            raise InvariantViolation(
                f"action events must span exactly {FRAME_MS} ms, got {duration}",
                field="t_end")
    elif ev.kind is Kind.GRAPHIC:
        _check_score(p.confidence, 0.0, 1.0, "confidence")
    elif ev.kind is Kind.HISTOGRAM:
        try:
            shots.check_bins(p.bins)
        except ValueError as exc:
            raise InvariantViolation(str(exc), field="bins") from exc
    elif ev.kind is Kind.FACE:
        _validate_face(p)
    return ev


def _validate_face(p: FaceDetection) -> None:
    if len(p.frame_dims) != 2 or any(d <= 0 for d in p.frame_dims):
        raise InvariantViolation("frame_dims must be two positive integers", field="frame_dims")
    if len(p.box) != 4:
        raise InvariantViolation("box must be (x, y, w, h)", field="box")
    x, y, w, h = p.box
    big_w, big_h = p.frame_dims
    if w <= 0 or h <= 0:
        raise InvariantViolation("box width/height must be positive", field="box")
    if x < 0 or y < 0 or x + w > big_w or y + h > big_h:
        raise InvariantViolation("box must lie within frame bounds", field="box")
    if len(p.embedding) == 0:
        raise InvariantViolation("embedding must be non-empty", field="embedding")


def parse_event(line: str, stats: Optional[ParseStats] = None) -> MarkerEvent:
    """Parse one line-delimited JSON record into a validated MarkerEvent.

    Unknown extra fields are ignored; when `stats` is given they are tallied
    there so callers can surface a warning count.
    """
    try:
        record = json.loads(line)
    except (json.JSONDecodeError, TypeError) as exc:
        raise MalformedRecord(f"not valid JSON: {exc}") from exc
    if not isinstance(record, dict):
        raise MalformedRecord("record must be a JSON object")

    kind_name = _require(record, "kind", str)
    try:
        kind = Kind(kind_name)
    except ValueError:
        raise UnknownKind(f"unknown kind '{kind_name}'", field="kind") from None

    channel = _require(record, "channel", str)
    t_start = _require(record, "t_start", int)
    t_end = _require(record, "t_end", int)

    if stats is not None:
        for name in record:
            if name not in _COMMON_FIELDS and name not in _KNOWN_FIELDS[kind]:
                stats.note_unknown(name)

    if kind in (Kind.CHEER, Kind.TONE, Kind.ACTION):
        score = _require(record, "score", (int, float))
        payload: Payload = _PAYLOAD_TYPES[kind](score=float(score))
    elif kind is Kind.TRANSCRIPT:
        payload = Transcript(text=_require(record, "text", str))
    elif kind is Kind.GRAPHIC:
        payload = Graphic(
            text=_require(record, "text", str),
            confidence=float(_require(record, "confidence", (int, float))))
    elif kind is Kind.HISTOGRAM:
        bins = _require(record, "bins", list)
        try:
            payload = FrameHistogram(
                bins=tuple(tuple(float(v) for v in channel_bins) for channel_bins in bins))
        except (TypeError, ValueError) as exc:
            raise MalformedRecord("field 'bins' must be a list of numeric lists",
                                  field="bins") from exc
    else:  # face
        box = _require(record, "box", list)
        dims = _require(record, "frame_dims", list)
        emb = _require(record, "embedding", list)
        label = record.get("label")
        if label is not None and not isinstance(label, str):
            raise MalformedRecord("field 'label' must be a string", field="label")
        try:
            payload = FaceDetection(
                box=tuple(int(v) for v in box),
                frame_dims=tuple(int(v) for v in dims),
                embedding=tuple(float(v) for v in emb),
                label=label)
        except (TypeError, ValueError) as exc:
            raise MalformedRecord("face payload fields must be numeric", field="box") from exc

    return validate_event(MarkerEvent(channel=channel, kind=kind,
                                      t_start=t_start, t_end=t_end, payload=payload))


def serialize_event(ev: MarkerEvent) -> str:
    """Inverse of parse_event: one compact JSON object, no trailing newline."""
    record: dict = {"channel": ev.channel, "kind": ev.kind.value,
                    "t_start": ev.t_start, "t_end": ev.t_end}
    p = ev.payload
    if ev.kind in (Kind.CHEER, Kind.TONE, Kind.ACTION):
        record["score"] = p.score
    elif ev.kind is Kind.TRANSCRIPT:
        record["text"] = p.text
    elif ev.kind is Kind.GRAPHIC:
        record["text"] = p.text
        record["confidence"] = p.confidence
    elif ev.kind is Kind.HISTOGRAM:
        record["bins"] = [list(channel_bins) for channel_bins in p.bins]
    else:
        record["box"] = list(p.box)
        record["frame_dims"] = list(p.frame_dims)
        record["embedding"] = list(p.embedding)
        if p.label is not None:
            record["label"] = p.label
    return json.dumps(record, separators=(",", ":"))


@dataclass(frozen=True)
class ValidatedStream:
    """One channel's events in canonical time order, with known duration.

    Events are sorted by t_start, ties broken by kind name then ingestion
    order; duration is the largest t_end (0 for an empty stream).
    """

    channel: str
    events: tuple
    duration: StreamTime


def validate_stream(events: Sequence[MarkerEvent],
                    channel: Optional[str] = None) -> ValidatedStream:
    """Sort and seal a single channel's events.

    An empty input is legal and yields a zero-duration stream; events from
    more than one channel raise MixedChannels.  Idempotent: validating a
    ValidatedStream's own events returns an equal stream.
    """
    events = list(events)
    channels = {e.channel for e in events}
    if channel is not None:
        channels.add(channel)
    if len(channels) > 1:
        raise MixedChannels(f"events span channels {sorted(channels)}", field="channel")
    resolved = channels.pop() if channels else ""

    ordered = sorted(events, key=lambda e: (e.t_start, e.kind.value))  # stable on ties
    duration = max((e.t_end for e in ordered), default=0)
    return ValidatedStream(channel=resolved, events=tuple(ordered), duration=duration)


def slice_stream(stream: ValidatedStream, kind: Kind,
                 t0: StreamTime, t1: StreamTime) -> list:
    """Events of `kind` whose [t_start, t_end] intersects [t0, t1], in time order."""
    if t0 > t1:
        raise ValueError(f"slice window reversed: t0={t0} > t1={t1}")
    return [e for e in stream.events if e.kind is kind and e.intersects(t0, t1)]


def read_events(lines: Iterable[str], stats: Optional[ParseStats] = None):
    """Yield (line_number, MarkerEvent | StreamError) for each non-blank line."""
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            yield lineno, parse_event(line, stats)
        except StreamError as exc:
            yield lineno, exc


def load_stream(path, channel: Optional[str] = None) -> ValidatedStream:
    """Read a line-delimited JSON event file into a ValidatedStream.

    Raises the first StreamError encountered; use read_events for
    partial-acceptance ingestion.
    """
    events = []
    with open(path, encoding="utf-8") as fh:
        for lineno, item in read_events(fh):
            if isinstance(item, StreamError):
                item.args = (f"line {lineno}: {item.args[0]}",)
                raise item
            events.append(item)
    return validate_stream(events, channel=channel)
