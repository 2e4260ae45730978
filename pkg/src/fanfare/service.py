"""Long-running curation service: ingestion, retrieval, and review workflow.

State is an append-only JSONL log of accepted event batches and review
transitions; everything else (per-channel streams, curated highlights,
indices) lives in memory and is rebuilt by replaying the log on startup, so
an acknowledged write always survives a crash.  Ingestion and curation are
serialized per channel; queries copy a consistent snapshot under the store
lock and never block other channels.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import engine
from .events import ParseStats, StreamError, parse_event, validate_stream
from .lexicon import ExcitementLexicon, default_lexicon

REVIEW_STATUSES = ("new", "reviewed", "published", "rejected")
_TRANSITIONS = {
    "new": {"reviewed", "rejected"},
    "reviewed": {"published", "rejected"},
    "published": set(),
    "rejected": set(),
}

MAX_QUERY_LIMIT = 1000
DEFAULT_QUERY_LIMIT = 50


class ServiceError(Exception):
    """Service failure with a machine-readable code and optional field."""

    code = "service_error"
    http_status = 400

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field

    def body(self) -> dict:
        payload = {"code": self.code, "message": str(self)}
        if self.field:
            payload["field"] = self.field
        return payload


class UnknownId(ServiceError):
    code = "unknown_id"
    http_status = 404


class IllegalTransition(ServiceError):
    code = "illegal_transition"
    http_status = 409


class BadFilter(ServiceError):
    code = "bad_filter"
    http_status = 400


@dataclass(frozen=True)
class QueryFilter:
    player: Optional[str] = None
    hole: Optional[int] = None
    min_score: Optional[float] = None
    channel: Optional[str] = None
    status: Optional[str] = None
    limit: int = DEFAULT_QUERY_LIMIT

    def validate(self) -> "QueryFilter":
        if not (1 <= self.limit <= MAX_QUERY_LIMIT):
            raise BadFilter(f"limit must be in [1, {MAX_QUERY_LIMIT}]", field="limit")
        if self.hole is not None and not (1 <= self.hole <= 18):
            raise BadFilter("hole must be in [1, 18]", field="hole")
        if self.min_score is not None and not (0.0 <= self.min_score <= 1.0):
            raise BadFilter("min_score must be in [0, 1]", field="min_score")
        if self.status is not None and self.status not in REVIEW_STATUSES:
            raise BadFilter(f"status must be one of {REVIEW_STATUSES}", field="status")
        return self


@dataclass
class HighlightRecord:
    highlight: engine.Highlight
    review_status: str
    created_at: str  # ISO-8601 UTC, fixed at first derivation

    def to_dict(self) -> dict:
        record = self.highlight.to_dict()
        record["review_status"] = self.review_status
        record["created_at"] = self.created_at
        return record


@dataclass
class IngestResult:
    accepted: int
    duplicate: bool
    errors: list  # of {"line", "code", "message", "field"?}

    def to_dict(self) -> dict:
        return {"accepted": self.accepted, "duplicate": self.duplicate,
                "errors": self.errors}


def _iso(ts: float) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).isoformat()


class HighlightStore:
    """Event log, per-channel streams, and curated highlight records."""

    def __init__(self, log_path, roster: Sequence[str] = (),
                 lexicon: Optional[ExcitementLexicon] = None,
                 cfg: engine.EngineConfig = engine.EngineConfig()):
        self.log_path = Path(log_path)
        self.roster = list(roster)
        self.lexicon = lexicon if lexicon is not None else default_lexicon()
        self.cfg = cfg.validate()
        self._lock = threading.RLock()
        self._channel_locks: dict = {}
        self._events: dict = {}       # channel -> list[MarkerEvent]
        self._records: dict = {}      # highlight id -> HighlightRecord
        self._batch_hashes: set = set()
        self._stats = ParseStats()
        self._last_curation_ms: Optional[float] = None
        self._replay()

    # -- persistence --------------------------------------------------------

    def _replay(self) -> None:
        if not self.log_path.exists():
            return
        with open(self.log_path, encoding="utf-8") as fh:
            for raw in fh:
                if not raw.strip():
                    continue
                entry = json.loads(raw)
                if entry["type"] == "batch":
                    self._apply_batch(entry["channel"], entry["lines"],
                                      entry["ts"], entry["hash"])
                elif entry["type"] == "review":
                    self._apply_review(entry["id"], entry["status"])

    def _append_log(self, entry: dict) -> None:
        self.log_path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, separators=(",", ":")) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    # -- ingestion ----------------------------------------------------------

    def _channel_lock(self, channel: str) -> threading.Lock:
        with self._lock:
            if channel not in self._channel_locks:
                self._channel_locks[channel] = threading.Lock()
            return self._channel_locks[channel]

    def ingest(self, channel: str, body: str, now: Optional[float] = None) -> IngestResult:
        """Parse and persist one batch; valid records are accepted even when
        some lines fail.  Byte-identical batches are deduplicated by hash."""
        digest = hashlib.sha256((channel + "\n" + body).encode("utf-8")).hexdigest()
        lines = [line for line in body.splitlines() if line.strip()]

        valid_lines = []
        errors = []
        for lineno, line in enumerate(lines, start=1):
            try:
                ev = parse_event(line, self._stats)
                if ev.channel != channel:
                    raise StreamError(
                        f"record channel {ev.channel!r} does not match endpoint channel {channel!r}",
                        field="channel")
                valid_lines.append(line)
            except StreamError as exc:
                errors.append({"line": lineno, "code": type(exc).__name__,
                               "message": str(exc),
                               **({"field": exc.field} if exc.field else {})})

        with self._channel_lock(channel):
            with self._lock:
                if digest in self._batch_hashes:
                    return IngestResult(accepted=0, duplicate=True, errors=errors)
            ts = time.time() if now is None else now
            if valid_lines:
                self._append_log({"type": "batch", "ts": ts, "channel": channel,
                                  "hash": digest, "lines": valid_lines})
            with self._lock:
                self._apply_batch(channel, valid_lines, ts, digest)
        return IngestResult(accepted=len(valid_lines), duplicate=False, errors=errors)

    def _apply_batch(self, channel: str, lines: Sequence[str], ts: float,
                     digest: str) -> None:
        self._batch_hashes.add(digest)
        events = self._events.setdefault(channel, [])
        events.extend(parse_event(line) for line in lines)
        self._recurate(channel, ts)

    def _recurate(self, channel: str, ts: float) -> None:
        started = time.perf_counter()
        stream = validate_stream(self._events[channel], channel=channel)
        fresh = engine.curate(stream, self.lexicon, self.roster, self.cfg)
        self._last_curation_ms = (time.perf_counter() - started) * 1000.0
        fresh_ids = {h.id for h in fresh}
        stale = [hid for hid, rec in self._records.items()
                 if rec.highlight.channel == channel and hid not in fresh_ids]
        for hid in stale:
            del self._records[hid]
        for h in fresh:
            prior = self._records.get(h.id)
            if prior is None:
                self._records[h.id] = HighlightRecord(
                    highlight=h, review_status="new", created_at=_iso(ts))
            else:
                prior.highlight = h
    # -- queries ------------------------------------------------------------

    def query(self, flt: QueryFilter) -> list:
        flt.validate()
        with self._lock:
            records = list(self._records.values())
        selected = []
        for rec in records:
            h = rec.highlight
            if flt.player is not None and h.player != flt.player:
                continue
            if flt.hole is not None and h.hole != flt.hole:
                continue
            if flt.min_score is not None and h.fused_score < flt.min_score:
                continue
            if flt.channel is not None and h.channel != flt.channel:
                continue
            if flt.status is not None and rec.review_status != flt.status:
                continue
            selected.append(rec)
        selected.sort(key=lambda r: (-r.highlight.fused_score, r.highlight.t_start,
                                     r.highlight.channel, r.highlight.id))
        return selected[:flt.limit]

    def get(self, highlight_id: str) -> HighlightRecord:
        with self._lock:
            rec = self._records.get(highlight_id)
        if rec is None:
            raise UnknownId(f"no highlight with id {highlight_id!r}", field="id")
        return rec

    def players(self) -> list:
        with self._lock:
            names = {r.highlight.player for r in self._records.values()
                     if r.highlight.player}
        return sorted(names)

    def metrics(self) -> dict:
        """Operational counters; no latency guarantee is implied."""
        with self._lock:
            return {
                "channels": len(self._events),
                "events": sum(len(evs) for evs in self._events.values()),
                "highlights": len(self._records),
                "last_curation_ms": self._last_curation_ms,
                "unknown_field_warnings": self._stats.unknown_field_count,
            }

    # -- review workflow ------------------------------------------------------

    def set_review_status(self, highlight_id: str, status: str) -> HighlightRecord:
        if status not in REVIEW_STATUSES:
            raise BadFilter(f"status must be one of {REVIEW_STATUSES}", field="status")
        with self._lock:
            rec = self._records.get(highlight_id)
            if rec is None:
                raise UnknownId(f"no highlight with id {highlight_id!r}", field="id")
            if status not in _TRANSITIONS[rec.review_status]:
                raise IllegalTransition(
                    f"cannot move {highlight_id} from {rec.review_status!r} to {status!r}",
                    field="status")
        # persisted before the in-memory transition is acknowledged
        self._append_log({"type": "review", "ts": time.time(),
                          "id": highlight_id, "status": status})
        with self._lock:
            self._apply_review(highlight_id, status)
            return self._records[highlight_id]

    def _apply_review(self, highlight_id: str, status: str) -> None:
        rec = self._records.get(highlight_id)
        if rec is not None and status in _TRANSITIONS.get(rec.review_status, set()):
            rec.review_status = status


def create_app(store: HighlightStore) -> FastAPI:
    """FastAPI wiring over a HighlightStore."""
    app = FastAPI(title="fanfare curator")

    @app.exception_handler(ServiceError)
    async def service_error_handler(_request, exc: ServiceError):
        return JSONResponse(status_code=exc.http_status, content=exc.body())

    @app.get("/health")
    def health():
        return {"status": "ok", "metrics": store.metrics()}

    @app.get("/players")
    def players():
        return store.players()

    def _as_int(value: Optional[str], name: str) -> Optional[int]:
        if value is None:
            return None
        try:
            return int(value)
        except ValueError:
            raise BadFilter(f"{name} must be an integer", field=name) from None

    def _as_float(value: Optional[str], name: str) -> Optional[float]:
        if value is None:
            return None
        try:
            return float(value)
        except ValueError:
            raise BadFilter(f"{name} must be a number", field=name) from None

    @app.get("/highlights")
    def list_highlights(player: Optional[str] = None, hole: Optional[str] = None,
                        min_score: Optional[str] = None, channel: Optional[str] = None,
                        status: Optional[str] = None,
                        limit: Optional[str] = None):
        parsed_limit = _as_int(limit, "limit")
        flt = QueryFilter(player=player,
                          hole=_as_int(hole, "hole"),
                          min_score=_as_float(min_score, "min_score"),
                          channel=channel, status=status,
                          limit=DEFAULT_QUERY_LIMIT if parsed_limit is None else parsed_limit)
        return [rec.to_dict() for rec in store.query(flt)]

    @app.get("/highlights/{highlight_id}")
    def get_highlight(highlight_id: str):
        return store.get(highlight_id).to_dict()

    @app.post("/channels/{channel}/events")
    async def ingest(channel: str, request: Request):
        body = (await request.body()).decode("utf-8")
        return store.ingest(channel, body).to_dict()

    @app.post("/highlights/{highlight_id}/review")
    async def review(highlight_id: str, request: Request):
        try:
            payload = json.loads((await request.body()).decode("utf-8"))
            status = payload["status"]
        except (json.JSONDecodeError, KeyError, TypeError):
            raise BadFilter("body must be JSON {\"status\": ...}", field="status") from None
        return store.set_review_status(highlight_id, status).to_dict()

    return app
