"""Self-supervised face-dataset building and temporal label smoothing.

TV graphics announce who is about to play, so the frames that follow one are
a free source of labeled faces.  Candidates harvested from that window are
filtered geometrically (size, one face per frame, preference for large and
central boxes), then split by two-class k-means on their embeddings; the
larger cluster is kept as the player's training set and the rest rejected
as bystanders.  At prediction time, temporally coherent runs of per-frame
identity predictions are smoothed to their majority label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .events import Kind, StreamTime, ValidatedStream, slice_stream

HARVEST_WINDOW_MS = 60000   # how long after a graphic faces are harvested
MIN_FACE_HEIGHT_PX = 40     # smaller detections are discarded
SMOOTH_GAP_MS = 2000        # max time gap within one smoothing run
SMOOTH_SIM_THRESHOLD = 0.5  # min cosine similarity within one smoothing run


class TooFewPoints(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


def centrality_of(box, frame_dims) -> float:
    """Gaussian preference for boxes near the frame center, in (0, 1]."""
    x, y, w, h = box
    big_w, big_h = frame_dims
    dx = (x + w / 2.0) - big_w / 2.0
    dy = (y + h / 2.0) - big_h / 2.0
    return math.exp(-(dx * dx + dy * dy) / (0.125 * (big_w ** 2 + big_h ** 2)))


@dataclass(frozen=True)
class FaceCandidate:
    """One detected face with its embedding; centrality is derived."""

    t: StreamTime
    box: tuple          # (x, y, w, h)
    frame_dims: tuple   # (W, H)
    embedding: tuple
    label: Optional[str] = None  # oracle identity when supplied, for purity checks

    @property
    def centrality(self) -> float:
        return centrality_of(self.box, self.frame_dims)

    @property
    def area(self) -> float:
        return self.box[2] * self.box[3]


@dataclass(frozen=True)
class PlayerFaceDataset:
    """Per-player bootstrap result: kept faces, rejected faces, cluster centroids."""

    player: str
    kept: tuple
    rejected: tuple
    cluster_centroids: Optional[tuple]  # two vectors, None for degenerate inputs
    low_confidence: bool = False        # set when too few candidates to cluster


def harvest_candidates(stream: ValidatedStream, graphic_time: StreamTime,
                       window: int = HARVEST_WINDOW_MS,
                       min_height_px: int = MIN_FACE_HEIGHT_PX) -> list:
    """Face candidates in [graphic_time, graphic_time + window], one per frame.

    Detections shorter than min_height_px are discarded; within a frame the
    single candidate maximizing area x centrality wins (first detection on
    exact ties).
    """
    if window <= 0:
        raise ValueError(f"window must be positive, got {window}")
    per_frame: dict = {}
    for ev in slice_stream(stream, Kind.FACE, graphic_time, graphic_time + window):
        p = ev.payload
        if p.box[3] < min_height_px:
            continue
        cand = FaceCandidate(t=ev.t_start, box=tuple(p.box),
                             frame_dims=tuple(p.frame_dims),
                             embedding=tuple(p.embedding), label=p.label)
        best = per_frame.get(ev.t_start)
        if best is None or cand.area * cand.centrality > best.area * best.centrality:
            per_frame[ev.t_start] = cand
    return [per_frame[t] for t in sorted(per_frame)]


def expand_box(box, frame_dims) -> tuple:
    """Grow a box 1.4x about its center, clipped to the frame.

    Returns (x, y, w, h) as floats; idempotent only when the result is
    clipped at the frame on every side.
    """
    x, y, w, h = box
    big_w, big_h = frame_dims
    cx, cy = x + w / 2.0, y + h / 2.0
    half_w, half_h = 0.7 * w, 0.7 * h
    x0, x1 = max(0.0, cx - half_w), min(float(big_w), cx + half_w)
    y0, y1 = max(0.0, cy - half_h), min(float(big_h), cy + half_h)
    return (x0, y0, x1 - x0, y1 - y0)


def kmeans_two(embeddings: Sequence, max_iters: int = 100) -> tuple:
    """Deterministic two-class k-means (Lloyd, squared Euclidean).

    Initial centroids are the two points at maximal pairwise distance (first
    such pair in index order); an empty cluster is re-seeded with the point
    farthest from its centroid, unless every point coincides with its
    centroid (then the empty cluster stays empty and all assignments agree).
    Returns (assignments, (centroid_a, centroid_b)).
    """
    n = len(embeddings)
    if n < 2:
        raise TooFewPoints(f"need at least 2 points, got {n}")
    dims = {len(e) for e in embeddings}
    if len(dims) != 1:
        raise DimensionMismatch(f"embedding dimensions differ: {sorted(dims)}")

    points = np.asarray(embeddings, dtype=float)
    diffs = points[:, None, :] - points[None, :, :]
    dist2 = (diffs ** 2).sum(axis=2)
    best_pair, best_d = (0, 1), -1.0
    for i in range(n):
        for j in range(i + 1, n):
            if dist2[i, j] > best_d:
                best_d, best_pair = dist2[i, j], (i, j)
    centroids = np.stack([points[best_pair[0]], points[best_pair[1]]])

    assignments = np.full(n, -1, dtype=int)
    for _ in range(max_iters):
        to_centroids = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assign = np.argmin(to_centroids, axis=1)  # argmin breaks ties toward cluster 0

        for cluster in (0, 1):
            if np.any(new_assign == cluster):
                continue
            own = to_centroids[np.arange(n), new_assign]
            if own.max() > 0.0:
                new_assign[int(np.argmax(own))] = cluster

        if np.array_equal(new_assign, assignments):
            break
        assignments = new_assign
        for cluster in (0, 1):
            members = points[assignments == cluster]
            if len(members):
                centroids[cluster] = members.mean(axis=0)

    return assignments.tolist(), (tuple(centroids[0]), tuple(centroids[1]))


def build_dataset(candidates: Sequence[FaceCandidate], player: str) -> PlayerFaceDataset:
    """Keep the larger embedding cluster as the player's faces.

    Ties go to the cluster with greater mean centrality (cluster 0 if those
    are equal too).  Fewer than two candidates cannot be clustered: all are
    kept and the dataset is flagged low-confidence.
    """
    candidates = list(candidates)
    if len(candidates) < 2:
        return PlayerFaceDataset(player=player, kept=tuple(candidates), rejected=(),
                                 cluster_centroids=None, low_confidence=True)
    assignments, centroids = kmeans_two([c.embedding for c in candidates])
    clusters = ([c for c, a in zip(candidates, assignments) if a == 0],
                [c for c, a in zip(candidates, assignments) if a == 1])
    if len(clusters[0]) != len(clusters[1]):
        keep = 0 if len(clusters[0]) > len(clusters[1]) else 1
    else:
        mean_centrality = [sum(c.centrality for c in cl) / len(cl) if cl else -1.0
                           for cl in clusters]
        keep = 0 if mean_centrality[0] >= mean_centrality[1] else 1
    return PlayerFaceDataset(player=player,
                             kept=tuple(clusters[keep]),
                             rejected=tuple(clusters[1 - keep]),
                             cluster_centroids=centroids)


def kept_purity(dataset: PlayerFaceDataset) -> Optional[float]:
    """Fraction of kept faces whose oracle label is the dataset's player.

    None when any kept face lacks a label (purity needs full supervision).
    """
    if not dataset.kept or any(c.label is None for c in dataset.kept):
        return None
    return sum(1 for c in dataset.kept if c.label == dataset.player) / len(dataset.kept)


@dataclass(frozen=True)
class LabeledPrediction:
    """A per-frame identity prediction awaiting temporal smoothing."""

    t: StreamTime
    embedding: tuple
    predicted: str
    confidence: float


def _cosine(a, b) -> float:
    av, bv = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    norm = np.linalg.norm(av) * np.linalg.norm(bv)
    return float(av @ bv / norm) if norm else 0.0


def smooth_labels(predictions: Sequence[LabeledPrediction],
                  gap_ms: int = SMOOTH_GAP_MS,
                  sim_threshold: float = SMOOTH_SIM_THRESHOLD) -> list:
    """Replace each prediction's label with its temporal run's majority label.

    A run extends while consecutive predictions are within gap_ms and their
    embeddings have cosine similarity at least sim_threshold.  Majority ties
    go to the label of the run's most confident item.  Order, timestamps,
    and confidences are unchanged.
    """
    out: list = []
    run: list = []

    def flush():
        if not run:
            return
        counts: dict = {}
        for p in run:
            counts[p.predicted] = counts.get(p.predicted, 0) + 1
        top = max(counts.values())
        tied = {label for label, c in counts.items() if c == top}
        if len(tied) == 1:
            winner = tied.pop()
        else:
            best = max((p for p in run if p.predicted in tied),
                       key=lambda p: (p.confidence, -p.t))
            winner = best.predicted
        out.extend(LabeledPrediction(p.t, p.embedding, winner, p.confidence) for p in run)

    for p in predictions:
        if run and (p.t - run[-1].t > gap_ms
                    or _cosine(p.embedding, run[-1].embedding) < sim_threshold):
            flush()
            run = []
        run.append(p)
    flush()
    return out


def candidate_record(candidate: FaceCandidate, status: str) -> dict:
    """One export line: original box plus the expanded crop coordinates."""
    crop = expand_box(candidate.box, candidate.frame_dims)
    record = {"t": candidate.t, "status": status,
              "box": list(candidate.box), "crop": [round(v, 3) for v in crop],
              "frame_dims": list(candidate.frame_dims)}
    if candidate.label is not None:
        record["label"] = candidate.label
    return record
