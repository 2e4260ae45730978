"""Highlight curation: cheer-bout merging, graphic pairing, clip bounds, fusion.

The pipeline seeds every candidate highlight from crowd cheering: adjacent
positive 6 s cheer windows merge into a bout, each bout is paired with the
latest TV graphic shown up to 80 s before the bout ends, the clip starts 5 s
before that graphic and ends at the first shot boundary within 5 s after the
cheering stops.  Per-modality scores (cheer, commentator tone, commentator
text, player action) are aggregated over windows around the bout and fused
linearly into one excitement score.  The graphic's OCR text supplies the
player name and hole number; metadata failures never drop a highlight.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from . import shots
from .events import Kind, MarkerEvent, StreamTime, ValidatedStream, slice_stream
from .lexicon import ExcitementLexicon, score_text


@dataclass(frozen=True)
class FusionWeights:
    """Linear fusion weights for the four excitement markers."""

    w_cheer: float = 0.61
    w_tone: float = 0.13
    w_text: float = 0.13
    w_action: float = 0.13

    def validate(self) -> "FusionWeights":
        values = (self.w_cheer, self.w_tone, self.w_text, self.w_action)
        if any(w < 0 for w in values):
            raise ValueError(f"fusion weights must be non-negative, got {values}")
        total = sum(values)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"fusion weights must sum to 1 (got {total})")
        return self

    def as_tuple(self) -> tuple:
        return (self.w_cheer, self.w_tone, self.w_text, self.w_action)


@dataclass(frozen=True)
class EngineConfig:
    """Every tunable of the curation pipeline, with broadcast defaults."""

    graphic_match_window: int = 80000  # max ms from graphic to bout end
    start_lead: int = 5000             # clip starts this far before the graphic
    end_search_window: int = 5000      # shot-boundary search span after the bout
    action_window: int = 15000         # player-action aggregation envelope
    tone_window: int = 20000           # tone/text aggregation envelope
    weights: FusionWeights = field(default_factory=FusionWeights)
    cheer_positive_threshold: float = 0.0

    def validate(self) -> "EngineConfig":
        for name in ("graphic_match_window", "start_lead", "end_search_window",
                     "action_window", "tone_window"):
            value = getattr(self, name)
            if not isinstance(value, int) or value <= 0:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        self.weights.validate()
        return self


@dataclass(frozen=True)
class CheerBout:
    """A maximal run of back-to-back positive cheer windows."""

    t_start: StreamTime
    t_end: StreamTime
    score: float  # highest window score in the run


@dataclass(frozen=True)
class SegmentProposal:
    """A bout paired with its qualifying TV graphic."""

    bout: CheerBout
    graphic: MarkerEvent
    graphic_time: StreamTime
    t_start: StreamTime
    shared_graphic: bool = False


@dataclass(frozen=True)
class ComponentScores:
    cheer: float
    tone: float
    text: float
    action: float

    def as_tuple(self) -> tuple:
        return (self.cheer, self.tone, self.text, self.action)


@dataclass(frozen=True)
class Highlight:
    """A curated clip with component scores, fused score, and metadata."""

    id: str
    channel: str
    t_start: StreamTime
    t_end: StreamTime
    bout: CheerBout
    components: ComponentScores
    fused_score: float
    player: Optional[str]
    hole: Optional[int]
    graphic_time: StreamTime
    shared_graphic: bool

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "channel": self.channel,
            "t_start": self.t_start,
            "t_end": self.t_end,
            "bout": {"t_start": self.bout.t_start, "t_end": self.bout.t_end,
                     "score": self.bout.score},
            "components": {"cheer": self.components.cheer, "tone": self.components.tone,
                           "text": self.components.text, "action": self.components.action},
            "fused_score": self.fused_score,
            "player": self.player,
            "hole": self.hole,
            "graphic_time": self.graphic_time,
            "shared_graphic": self.shared_graphic,
        }

    @classmethod
    def from_dict(cls, record: dict) -> "Highlight":
        return cls(
            id=record["id"],
            channel=record["channel"],
            t_start=record["t_start"],
            t_end=record["t_end"],
            bout=CheerBout(**record["bout"]),
            components=ComponentScores(**record["components"]),
            fused_score=record["fused_score"],
            player=record.get("player"),
            hole=record.get("hole"),
            graphic_time=record["graphic_time"],
            shared_graphic=record["shared_graphic"],
        )


class MetadataError(ValueError):
    """Graphic text could not be resolved; highlights are kept regardless."""


class NoPlayerMatch(MetadataError):
    pass


class NoHoleFound(MetadataError):
    pass


def merge_cheer_bouts(stream: ValidatedStream, cfg: EngineConfig) -> list:
    """Merge back-to-back positive cheer windows into disjoint, time-ordered bouts.

    A window is positive when its score exceeds cfg.cheer_positive_threshold;
    a run continues while each window starts exactly where the previous one
    ended.  The bout score is the highest window score in the run.
    """
    positives = [e for e in slice_stream(stream, Kind.CHEER, 0, stream.duration)
                 if e.payload.score > cfg.cheer_positive_threshold]
    bouts = []
    run_start = run_end = None
    run_score = 0.0
    for ev in positives:
        if run_end is not None and ev.t_start == run_end:
            run_end = ev.t_end
            run_score = max(run_score, ev.payload.score)
        else:
            if run_end is not None:
                bouts.append(CheerBout(run_start, run_end, run_score))
            run_start, run_end, run_score = ev.t_start, ev.t_end, ev.payload.score
    if run_end is not None:
        bouts.append(CheerBout(run_start, run_end, run_score))
    return bouts


def propose_segments(bouts: Sequence[CheerBout], graphics: Sequence[MarkerEvent],
                     cfg: EngineConfig) -> list:
    """Pair each bout with the latest graphic no more than the match window before its end.

    Bouts without a qualifying graphic are dropped.  When several bouts pick
    the same graphic all of them are kept, flagged shared_graphic.
    """
    proposals = []
    uses: dict = {}
    for bout in bouts:
        chosen = None
        for g in graphics:
            if g.t_start <= bout.t_end and bout.t_end - g.t_start <= cfg.graphic_match_window:
                chosen = g  # graphics are time-ordered; keep the latest qualifier
        if chosen is None:
            continue
        proposals.append(SegmentProposal(
            bout=bout, graphic=chosen, graphic_time=chosen.t_start,
            t_start=max(0, chosen.t_start - cfg.start_lead)))
        uses[chosen] = uses.get(chosen, 0) + 1
    return [replace(p, shared_graphic=uses[p.graphic] > 1) for p in proposals]


def resolve_end(proposal: SegmentProposal, boundaries: Sequence[StreamTime],
                cfg: EngineConfig) -> StreamTime:
    """Clip end: the earliest shot boundary strictly after the bout, within the
    search window; otherwise the far edge of the window."""
    bout_end = proposal.bout.t_end
    for b in boundaries:
        if bout_end < b <= bout_end + cfg.end_search_window:
            return b
    return bout_end + cfg.end_search_window


def _clamp01(x: float) -> float:
    return min(max(x, 0.0), 1.0)


def _max_positive(events, default: float = 0.0) -> float:
    scores = [e.payload.score for e in events if e.payload.score > 0]
    return max(scores) if scores else default


def aggregate_components(proposal: SegmentProposal, stream: ValidatedStream,
                         lexicon: ExcitementLexicon, cfg: EngineConfig) -> ComponentScores:
    """Per-modality scores over windows centered on the bout.

    Each envelope extends half its window before the bout start and half
    after the bout end; events are counted if their interval intersects the
    envelope.  Cheer is the bout score; action and tone are the highest
    positive score in their envelopes; text scores the concatenation of
    transcripts in the tone envelope.  All clamped to [0, 1].
    """
    bout = proposal.bout
    action_half = cfg.action_window // 2
    tone_half = cfg.tone_window // 2

    action_events = slice_stream(stream, Kind.ACTION,
                                 max(0, bout.t_start - action_half), bout.t_end + action_half)
    tone_lo, tone_hi = max(0, bout.t_start - tone_half), bout.t_end + tone_half
    tone_events = slice_stream(stream, Kind.TONE, tone_lo, tone_hi)
    transcripts = slice_stream(stream, Kind.TRANSCRIPT, tone_lo, tone_hi)

    text = " ".join(t.payload.text for t in transcripts)
    return ComponentScores(
        cheer=_clamp01(bout.score),
        tone=_clamp01(_max_positive(tone_events)),
        text=score_text(text, lexicon).score,
        action=_clamp01(_max_positive(action_events)),
    )


def fuse(components: ComponentScores, weights: FusionWeights) -> float:
    """Weighted linear combination; in [0, 1] whenever the weights sum to 1."""
    return (weights.w_cheer * components.cheer
            + weights.w_tone * components.tone
            + weights.w_text * components.text
            + weights.w_action * components.action)


# --- TV-graphic text parsing ---------------------------------------------

_WORD_RE = re.compile(r"\w+", re.UNICODE)
_SPAN_BREAKERS = {"hole", "shot", "par", "round", "tee", "yds", "yards"}
_MAX_SPAN_TOKENS = 4
_MATCH_TOLERANCE = 0.3
MIN_HOLE, MAX_HOLE = 1, 18


def _levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(previous[j] + 1, current[j - 1] + 1,
                               previous[j - 1] + (ca != cb)))
        previous = current
    return previous[-1]


def _normalized_distance(a: str, b: str) -> float:
    longest = max(len(a), len(b))
    return _levenshtein(a, b) / longest if longest else 0.0


def _name_forms(name: str) -> list:
    """Match forms for one roster entry: full name, surname, initial + surname."""
    tokens = [t.lower() for t in _WORD_RE.findall(name)]
    if not tokens:
        return []
    forms = [" ".join(tokens)]
    if len(tokens) > 1:
        forms.append(tokens[-1])
        forms.append(f"{tokens[0][0]} {tokens[-1]}")
    return forms


def find_hole(ocr_text: str) -> int:
    """The first 1-18 integer after a 'hole' token, else the first anywhere."""
    tokens = [t.lower() for t in _WORD_RE.findall(ocr_text)]

    def in_range(tok: str) -> Optional[int]:
        if tok.isdigit():
            value = int(tok)
            if MIN_HOLE <= value <= MAX_HOLE:
                return value
        return None

    for i, tok in enumerate(tokens):
        if tok == "hole":
            for later in tokens[i + 1:]:
                value = in_range(later)
                if value is not None:
                    return value
    for tok in tokens:
        value = in_range(tok)
        if value is not None:
            return value
    raise NoHoleFound(f"no standalone hole number 1-{MAX_HOLE} in {ocr_text!r}")


def find_player(ocr_text: str, roster: Sequence[str]) -> str:
    """The roster entry closest in edit distance to a name-like span of the text.

    Spans are runs of letter-bearing tokens (digits and scoreboard keywords
    break them); a candidate is accepted only when its normalized distance to
    some roster form is at most 0.3.  OCR digit-for-letter substitutions
    inside a name stay within that tolerance.
    """
    if not roster:
        raise ValueError("roster must be non-empty")
    tokens = [t.lower() for t in _WORD_RE.findall(ocr_text)]
    runs: list = [[]]
    for tok in tokens:
        if tok.isdigit() or tok in _SPAN_BREAKERS:
            if runs[-1]:
                runs.append([])
        else:
            runs[-1].append(tok)

    spans = []
    for run in runs:
        for width in range(1, min(_MAX_SPAN_TOKENS, len(run)) + 1):
            for start in range(len(run) - width + 1):
                spans.append(" ".join(run[start:start + width]))

    best = None  # (distance, roster index, span order)
    for order, span in enumerate(spans):
        for idx, name in enumerate(roster):
            for form in _name_forms(name):
                d = _normalized_distance(span, form)
                key = (d, idx, order)
                if best is None or key < best:
                    best = key
    if best is None or best[0] > _MATCH_TOLERANCE:
        raise NoPlayerMatch(f"no roster name within tolerance in {ocr_text!r}")
    return roster[best[1]]


def parse_graphic_text(ocr_text: str, roster: Sequence[str]) -> tuple:
    """Resolve (player, hole) from raw graphic OCR text.

    Raises NoPlayerMatch or NoHoleFound; curate degrades each field
    independently instead of calling this combined form.
    """
    return find_player(ocr_text, roster), find_hole(ocr_text)


# --- end-to-end curation ---------------------------------------------------

def stream_boundaries(stream: ValidatedStream,
                      boundary_cfg: shots.BoundaryConfig = shots.BoundaryConfig()) -> list:
    """Shot boundaries from the stream's frame-histogram events.

    Repeated timestamps can arrive when batches overlap; the first histogram
    seen for a timestamp wins so the frame sequence stays strictly increasing.
    """
    frames: dict = {}
    for e in slice_stream(stream, Kind.HISTOGRAM, 0, stream.duration):
        frames.setdefault(e.t_start, shots.Histogram(bins=e.payload.bins))
    return shots.detect_boundaries(sorted(frames.items()), boundary_cfg)


def curate(stream: ValidatedStream, lexicon: ExcitementLexicon,
           roster: Sequence[str], cfg: EngineConfig = EngineConfig(),
           boundary_cfg: shots.BoundaryConfig = shots.BoundaryConfig()) -> list:
    """Run the full pipeline over one channel stream.

    Returns highlights sorted by fused score descending, ties broken by the
    earlier start time.  Deterministic; metadata parse failures leave player
    and hole unset but keep the highlight.
    """
    cfg.validate()
    bouts = merge_cheer_bouts(stream, cfg)
    graphics = slice_stream(stream, Kind.GRAPHIC, 0, stream.duration)
    proposals = propose_segments(bouts, graphics, cfg)
    boundaries = stream_boundaries(stream, boundary_cfg)

    highlights = []
    for proposal in proposals:
        end = resolve_end(proposal, boundaries, cfg)
        components = aggregate_components(proposal, stream, lexicon, cfg)
        ocr = proposal.graphic.payload.text
        player = hole = None
        try:
            player = find_player(ocr, roster)
        except (NoPlayerMatch, ValueError):
            player = None
        try:
            hole = find_hole(ocr)
        except NoHoleFound:
            hole = None
        highlights.append(Highlight(
            id=f"{stream.channel}-{proposal.bout.t_start}",
            channel=stream.channel,
            t_start=proposal.t_start,
            t_end=end,
            bout=proposal.bout,
            components=components,
            fused_score=fuse(components, cfg.weights),
            player=player,
            hole=hole,
            graphic_time=proposal.graphic_time,
            shared_graphic=proposal.shared_graphic,
        ))
    highlights.sort(key=lambda h: (-h.fused_score, h.t_start))
    return highlights


# --- config file mapping ----------------------------------------------------

def config_from_dict(record: dict) -> EngineConfig:
    """Build an EngineConfig from the documented key-value JSON form."""
    known = {"graphic_match_window", "start_lead", "end_search_window",
             "action_window", "tone_window", "weights", "cheer_positive_threshold"}
    unknown = set(record) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {k: v for k, v in record.items() if k != "weights"}
    if "weights" in record:
        w = record["weights"]
        extra = set(w) - {"w_cheer", "w_tone", "w_text", "w_action"}
        if extra:
            raise ValueError(f"unknown weight keys: {sorted(extra)}")
        kwargs["weights"] = FusionWeights(**w)
    return EngineConfig(**kwargs).validate()


def config_to_dict(cfg: EngineConfig) -> dict:
    return {
        "graphic_match_window": cfg.graphic_match_window,
        "start_lead": cfg.start_lead,
        "end_search_window": cfg.end_search_window,
        "action_window": cfg.action_window,
        "tone_window": cfg.tone_window,
        "weights": {"w_cheer": cfg.weights.w_cheer, "w_tone": cfg.weights.w_tone,
                    "w_text": cfg.weights.w_text, "w_action": cfg.weights.w_action},
        "cheer_positive_threshold": cfg.cheer_positive_threshold,
    }
