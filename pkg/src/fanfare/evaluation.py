"""Ranking evaluation and deterministic synthetic scenario generation.

Two halves.  The metrics half scores ranked highlight lists: nDCG against
the ideal ordering of the same relevance multiset, and precision/recall of
(player, hole) pairs against a reference set, with shot-level duplicates
collapsed.  The generator half plants fully specified shots into a synthetic
marker stream and returns, alongside the stream, the exact highlights the
curation pipeline must produce for it under the default configuration with
zero noise; that ground truth is derived by direct arithmetic on the planted
values, not by running the pipeline.
"""

from __future__ import annotations

import math
import random
import string
from dataclasses import dataclass
from typing import Optional, Sequence

from .engine import CheerBout, ComponentScores, EngineConfig, Highlight, fuse
from .events import (AUDIO_WINDOW_MS, ActionScore, CheerScore, FrameHistogram,
                     Graphic, Kind, MarkerEvent, ToneScore, Transcript,
                     validate_stream)
from .lexicon import ExcitementLexicon, default_lexicon, score_text


class NonNegativeRelRequired(ValueError):
    pass


class EmptyReference(ValueError):
    pass


class SpecOutOfBounds(ValueError):
    pass


@dataclass(frozen=True)
class RankedList:
    """An ordered list of (highlight id, relevance >= 0); ids unique."""

    items: tuple

    def __post_init__(self):
        ids = [i for i, _ in self.items]
        if len(set(ids)) != len(ids):
            raise ValueError("ranked list ids must be unique")
        for i, rel in self.items:
            if rel < 0:
                raise NonNegativeRelRequired(f"relevance for {i!r} is negative: {rel}")


def _dcg(rels: Sequence[float], k: int) -> float:
    return sum((2.0 ** rel - 1.0) / math.log2(i + 1)
               for i, rel in enumerate(rels[:k], start=1))


def ndcg(ranked: RankedList, k: int) -> float:
    """Normalized discounted cumulative gain at depth k.

    Normalization is against the ideal ordering of this list's own relevance
    multiset.  An all-zero-relevance list is vacuously perfect and returns 1.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    rels = [rel for _, rel in ranked.items]
    z = _dcg(sorted(rels, reverse=True), k)
    if z == 0.0:
        return 1.0
    return _dcg(rels, k) / z


@dataclass(frozen=True)
class ReferenceSet:
    """Unique (player, hole) pairs from a professionally curated reference."""

    entries: frozenset

    @classmethod
    def from_pairs(cls, pairs) -> "ReferenceSet":
        return cls(entries=frozenset((player, hole) for player, hole in pairs))


def _player_hole(item) -> tuple:
    if isinstance(item, Highlight):
        return (item.player, item.hole)
    player, hole = item
    return (player, hole)


@dataclass(frozen=True)
class MatchResult:
    precision: float
    recall: float
    matched: frozenset  # reference entries that some produced item hit


def match_highlights(produced: Sequence, reference: ReferenceSet,
                     depth: int) -> MatchResult:
    """Precision/recall of produced highlights against the reference at a depth.

    A produced item matches when its (player, hole) is in the reference; shot
    numbers do not exist at this granularity, so duplicates of one pair count
    once for recall while every produced item still occupies a precision slot.
    Precision divides by min(depth, number produced) so short outputs are not
    penalized for slots they never filled.
    """
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    if not reference.entries:
        raise EmptyReference("reference set has no entries")
    top = [_player_hole(item) for item in produced[:depth]]
    matched_items = sum(1 for key in top if key in reference.entries)
    matched_refs = frozenset(key for key in top if key in reference.entries)
    precision = matched_items / len(top) if top else 0.0
    recall = len(matched_refs) / len(reference.entries)
    return MatchResult(precision=precision, recall=recall, matched=matched_refs)


# --- synthetic scenario generation -----------------------------------------

_FRAME_LEAD_MS = 2000   # histogram frames start this far before the bout end
_FRAME_TAIL_MS = 7000   # and continue this far after it

# Two maximally distant frame palettes (distance 1.0 under the frame metric).
_PALETTE_A = tuple(tuple(1.0 if b == 8 else 0.0 for b in range(64)) for _ in range(3))
_PALETTE_B = tuple(tuple(1.0 if b == 56 else 0.0 for b in range(64)) for _ in range(3))

_BACKGROUND_CHEER = -0.8
_OCR_GLYPHS = "0123456789#?" + string.ascii_uppercase


@dataclass(frozen=True)
class ShotSpec:
    """One planted shot: where its markers go and what they score."""

    graphic_time: int
    player: str
    hole: int
    cheer_start: int
    cheer_scores: tuple                 # one positive score per 6 s window
    actions: tuple = ()                 # (t_start, score) pairs
    tones: tuple = ()                   # (t_start, score) pairs
    transcripts: tuple = ()             # (t_start, text) pairs
    boundary: Optional[int] = None      # planted cut time, else fallback end
    graphic_text: Optional[str] = None  # defaults to "<player>  Hole <hole>"

    @property
    def bout_end(self) -> int:
        return self.cheer_start + AUDIO_WINDOW_MS * len(self.cheer_scores)

    def text(self) -> str:
        if self.graphic_text is not None:
            return self.graphic_text
        return f"{self.player}  Hole {self.hole}"


@dataclass(frozen=True)
class ScenarioSpec:
    """A reproducible synthetic stream: planted shots plus noise knobs."""

    seed: int
    duration: int
    shots: tuple
    channel: str = "c1"
    spurious_cheer_rate: float = 0.0   # per free 6 s slot
    ocr_corruption_rate: float = 0.0   # per graphic-text character


def _envelope(shot: ShotSpec, cfg: EngineConfig) -> tuple:
    """Inclusive time range that must not touch any other shot's range."""
    lo = min(shot.graphic_time - cfg.start_lead,
             shot.cheer_start - cfg.tone_window // 2)
    hi = max(shot.bout_end + cfg.tone_window // 2,
             shot.bout_end + _FRAME_TAIL_MS)
    for t, _ in shot.actions:
        lo, hi = min(lo, t), max(hi, t + 1000)
    for t, _ in shot.tones:
        lo, hi = min(lo, t), max(hi, t + AUDIO_WINDOW_MS)
    for t, _ in shot.transcripts:
        lo, hi = min(lo, t), max(hi, t + 1000)
    return lo, hi


def validate_spec(spec: ScenarioSpec, cfg: EngineConfig = EngineConfig()) -> ScenarioSpec:
    """Check every planted time against the engine rules; raise SpecOutOfBounds."""
    if spec.duration <= 0:
        raise SpecOutOfBounds(f"duration must be positive, got {spec.duration}")
    if not (0.0 <= spec.spurious_cheer_rate <= 1.0
            and 0.0 <= spec.ocr_corruption_rate <= 1.0):
        raise SpecOutOfBounds("noise rates must be in [0, 1]")

    previous_hi = None
    for n, shot in enumerate(spec.shots):
        where = f"shot {n}"
        if not shot.cheer_scores:
            raise SpecOutOfBounds(f"{where}: needs at least one cheer window")
        if any(s <= 0 or s > 1 for s in shot.cheer_scores):
            raise SpecOutOfBounds(f"{where}: cheer scores must be in (0, 1]")
        if shot.cheer_start < 0 or shot.graphic_time < 0:
            raise SpecOutOfBounds(f"{where}: times must be non-negative")
        bout_end = shot.bout_end
        if shot.graphic_time > bout_end:
            raise SpecOutOfBounds(f"{where}: graphic after the bout end")
        if bout_end - shot.graphic_time > cfg.graphic_match_window:
            raise SpecOutOfBounds(f"{where}: graphic more than the match window before the bout end")
        if shot.boundary is not None and not (
                bout_end < shot.boundary <= bout_end + cfg.end_search_window):
            raise SpecOutOfBounds(f"{where}: boundary must fall in the end-search window")
        action_lo = shot.cheer_start - cfg.action_window // 2
        action_hi = bout_end + cfg.action_window // 2
        for t, s in shot.actions:
            if not (0 < s <= 1):
                raise SpecOutOfBounds(f"{where}: action scores must be in (0, 1]")
            if t + 1000 < action_lo or t > action_hi:
                raise SpecOutOfBounds(f"{where}: action at {t} outside its window")
        tone_lo = shot.cheer_start - cfg.tone_window // 2
        tone_hi = bout_end + cfg.tone_window // 2
        for t, s in shot.tones:
            if not (0 < s <= 1):
                raise SpecOutOfBounds(f"{where}: tone scores must be in (0, 1]")
            if t + AUDIO_WINDOW_MS < tone_lo or t > tone_hi:
                raise SpecOutOfBounds(f"{where}: tone at {t} outside its window")
        transcript_times = [t for t, _ in shot.transcripts]
        if len(set(transcript_times)) != len(transcript_times):
            raise SpecOutOfBounds(f"{where}: transcript times must be distinct")
        for t, _ in shot.transcripts:
            if t + 1000 < tone_lo or t > tone_hi:
                raise SpecOutOfBounds(f"{where}: transcript at {t} outside its window")
        if not (1 <= shot.hole <= 18):
            raise SpecOutOfBounds(f"{where}: hole must be 1-18, got {shot.hole}")

        lo, hi = _envelope(shot, cfg)
        if lo < 0 or hi > spec.duration:
            raise SpecOutOfBounds(f"{where}: markers spill outside [0, {spec.duration}]")
        if previous_hi is not None and lo <= previous_hi:
            raise SpecOutOfBounds(f"{where}: overlaps the previous shot's marker envelope")
        previous_hi = hi
    return spec


def _corrupt(text: str, rate: float, rng: random.Random) -> str:
    if rate <= 0.0:
        return text
    return "".join(rng.choice(_OCR_GLYPHS) if rng.random() < rate else ch
                   for ch in text)


def generate_stream(spec: ScenarioSpec,
                    lexicon: Optional[ExcitementLexicon] = None,
                    cfg: EngineConfig = EngineConfig()) -> tuple:
    """Emit the scenario's marker stream and its zero-noise ground truth.

    Deterministic: the same scenario always yields byte-identical event
    streams.  The ground truth lists exactly the highlights curate must
    produce under `cfg` with zero noise, derived arithmetically from the
    planted values.
    """
    validate_spec(spec, cfg)
    lexicon = lexicon if lexicon is not None else default_lexicon()
    rng = random.Random(spec.seed)
    channel = spec.channel
    events = []

    occupied = set()   # 6 s grid slots covered by planted cheer windows
    for shot in spec.shots:
        for w in range(len(shot.cheer_scores)):
            t0 = shot.cheer_start + w * AUDIO_WINDOW_MS
            for slot in range(t0 // AUDIO_WINDOW_MS,
                              (t0 + AUDIO_WINDOW_MS - 1) // AUDIO_WINDOW_MS + 1):
                occupied.add(slot)

    # Planted markers.
    for shot in spec.shots:
        events.append(MarkerEvent(channel, Kind.GRAPHIC, shot.graphic_time,
                                  shot.graphic_time + 1000,
                                  Graphic(text=_corrupt(shot.text(), spec.ocr_corruption_rate, rng),
                                          confidence=round(rng.uniform(0.85, 0.99), 3))))
        for w, score in enumerate(shot.cheer_scores):
            t0 = shot.cheer_start + w * AUDIO_WINDOW_MS
            events.append(MarkerEvent(channel, Kind.CHEER, t0, t0 + AUDIO_WINDOW_MS,
                                      CheerScore(score=score)))
        for t, score in shot.actions:
            events.append(MarkerEvent(channel, Kind.ACTION, t, t + 1000,
                                      ActionScore(score=score)))
        for t, score in shot.tones:
            events.append(MarkerEvent(channel, Kind.TONE, t, t + AUDIO_WINDOW_MS,
                                      ToneScore(score=score)))
        for t, text in shot.transcripts:
            events.append(MarkerEvent(channel, Kind.TRANSCRIPT, t, t + 1000,
                                      Transcript(text=text)))

        frame_times = set(range(shot.bout_end - _FRAME_LEAD_MS,
                                shot.bout_end + _FRAME_TAIL_MS + 1, 1000))
        if shot.boundary is not None:
            frame_times.add(shot.boundary)
        for t in sorted(frame_times):
            cut = shot.boundary is not None and t >= shot.boundary
            events.append(MarkerEvent(channel, Kind.HISTOGRAM, t, t + 1000,
                                      FrameHistogram(bins=_PALETTE_B if cut else _PALETTE_A)))

    # Background cheer bed: negative scores on every free 6 s slot; spurious
    # positives replace free slots that are not adjacent to a planted window.
    for slot in range(spec.duration // AUDIO_WINDOW_MS):
        if slot in occupied:
            continue
        t0 = slot * AUDIO_WINDOW_MS
        spurious_ok = (slot - 1) not in occupied and (slot + 1) not in occupied
        if (spec.spurious_cheer_rate > 0.0 and spurious_ok
                and rng.random() < spec.spurious_cheer_rate):
            score = round(rng.uniform(0.05, 0.6), 3)
        else:
            score = _BACKGROUND_CHEER
        events.append(MarkerEvent(channel, Kind.CHEER, t0, t0 + AUDIO_WINDOW_MS,
                                  CheerScore(score=score)))

    stream = validate_stream(events, channel=channel)

    truth = []
    for shot in spec.shots:
        bout = CheerBout(shot.cheer_start, shot.bout_end, max(shot.cheer_scores))
        end = shot.boundary if shot.boundary is not None else bout.t_end + cfg.end_search_window
        transcript_text = " ".join(text for _, text in sorted(shot.transcripts))
        components = ComponentScores(
            cheer=min(max(bout.score, 0.0), 1.0),
            tone=max((s for _, s in shot.tones), default=0.0),
            text=score_text(transcript_text, lexicon).score,
            action=max((s for _, s in shot.actions), default=0.0))
        truth.append(Highlight(
            id=f"{channel}-{bout.t_start}",
            channel=channel,
            t_start=max(0, shot.graphic_time - cfg.start_lead),
            t_end=end,
            bout=bout,
            components=components,
            fused_score=fuse(components, cfg.weights),
            player=shot.player,
            hole=shot.hole,
            graphic_time=shot.graphic_time,
            shared_graphic=False,
        ))
    truth.sort(key=lambda h: (-h.fused_score, h.t_start))
    return stream, truth


_ROSTER = (
    "Sergio Garcia", "Daniel Berger", "Justin Rose", "Rickie Fowler",
    "Jordan Spieth", "Charl Schwartzel", "Matt Kuchar", "Adam Scott",
    "Paul Casey", "Rory McIlroy", "Thomas Pieters", "Charley Hoffman",
)

_PHRASES = (
    "great shot", "fantastic", "unbelievable", "what a shot",
    "right at the flag", "a long walk up to the green",
    "the wind is picking up", "take a bow", "steady round so far",
)

SLOT_MS = 200000  # one planted shot per slot keeps marker envelopes disjoint


def random_scenario(seed: int, n_shots: int, channel: str = "c1",
                    spurious_cheer_rate: float = 0.0,
                    ocr_corruption_rate: float = 0.0) -> ScenarioSpec:
    """A valid randomized scenario: n shots on a spaced lattice, seeded rng."""
    rng = random.Random(seed)
    shots = []
    for i in range(n_shots):
        slot = i * SLOT_MS
        graphic_time = slot + 20000 + rng.randrange(0, 20) * 1000
        cheer_start = ((graphic_time + rng.randrange(12000, 48000)) // AUDIO_WINDOW_MS
                       + 1) * AUDIO_WINDOW_MS
        windows = rng.randrange(1, 4)
        cheer_scores = tuple(round(rng.uniform(0.2, 1.0), 3) for _ in range(windows))
        bout_end = cheer_start + windows * AUDIO_WINDOW_MS

        actions = ()
        if rng.random() < 0.8:
            t = rng.randrange(cheer_start - 7000, bout_end + 6000, 1000)
            actions = ((t, round(rng.uniform(0.1, 1.0), 3)),)
        tones = ()
        if rng.random() < 0.8:
            t = rng.randrange(cheer_start - 9000, bout_end + 4000, 1000)
            tones = ((t, round(rng.uniform(0.05, 1.0), 3)),)
        transcripts = ()
        if rng.random() < 0.8:
            t = rng.randrange(cheer_start - 9000, bout_end + 8000, 1000)
            transcripts = ((t, rng.choice(_PHRASES)),)
        boundary = None
        if rng.random() < 0.75:
            boundary = bout_end + rng.randrange(1, 6) * 1000

        shots.append(ShotSpec(
            graphic_time=graphic_time,
            player=rng.choice(_ROSTER),
            hole=1 + (i % 18),
            cheer_start=cheer_start,
            cheer_scores=cheer_scores,
            actions=actions,
            tones=tones,
            transcripts=transcripts,
            boundary=boundary,
        ))
    duration = n_shots * SLOT_MS + 60000 if n_shots else 600000
    return ScenarioSpec(seed=seed, duration=duration, shots=tuple(shots),
                        channel=channel, spurious_cheer_rate=spurious_cheer_rate,
                        ocr_corruption_rate=ocr_corruption_rate)


# --- scenario file mapping ---------------------------------------------------

def spec_from_dict(record: dict) -> ScenarioSpec:
    try:
        shots = tuple(ShotSpec(
            graphic_time=s["graphic_time"],
            player=s["player"],
            hole=s["hole"],
            cheer_start=s["cheer_start"],
            cheer_scores=tuple(s["cheer_scores"]),
            actions=tuple((t, v) for t, v in s.get("actions", [])),
            tones=tuple((t, v) for t, v in s.get("tones", [])),
            transcripts=tuple((t, v) for t, v in s.get("transcripts", [])),
            boundary=s.get("boundary"),
            graphic_text=s.get("graphic_text"),
        ) for s in record["shots"])
        spec = ScenarioSpec(
            seed=record.get("seed", 0),
            duration=record["duration"],
            shots=shots,
            channel=record.get("channel", "c1"),
            spurious_cheer_rate=record.get("spurious_cheer_rate", 0.0),
            ocr_corruption_rate=record.get("ocr_corruption_rate", 0.0),
        )
    except (KeyError, TypeError) as exc:
        raise SpecOutOfBounds(f"scenario file is missing or mistypes a field: {exc}") from exc
    return validate_spec(spec)


def spec_to_dict(spec: ScenarioSpec) -> dict:
    return {
        "seed": spec.seed,
        "duration": spec.duration,
        "channel": spec.channel,
        "spurious_cheer_rate": spec.spurious_cheer_rate,
        "ocr_corruption_rate": spec.ocr_corruption_rate,
        "shots": [{
            "graphic_time": s.graphic_time,
            "player": s.player,
            "hole": s.hole,
            "cheer_start": s.cheer_start,
            "cheer_scores": list(s.cheer_scores),
            "actions": [list(a) for a in s.actions],
            "tones": [list(t) for t in s.tones],
            "transcripts": [list(t) for t in s.transcripts],
            "boundary": s.boundary,
            "graphic_text": s.graphic_text,
        } for s in spec.shots],
    }
