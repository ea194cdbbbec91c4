"""Relevance between clues, measured on their change-point arrays.

The directed distance from S to T sums, over each point of S, the
absolute gap to its nearest point of T (ties resolve to the earlier
point). Relevance symmetrizes the two directed distances, normalizes
each by its source size and by twice the window length in samples, and
subtracts from 1:

    R(S1, S2) = 1 - (d(S1,S2)/|S1| + d(S2,S1)/|S2|) / (2 * window_len)

Identical non-empty arrays score 1. Both arrays empty scores 0 (no
signal to compare), and exactly one empty also scores 0 (nothing in the
other array can explain it).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError

RelevanceScore = float


def _as_points(arr) -> np.ndarray:
    pts = getattr(arr, "points", arr)
    out = np.asarray(list(pts), dtype=np.float64)
    if out.ndim != 1:
        raise InvalidArgumentError("change-point input must be one-dimensional")
    return np.sort(out)


def directed_distance(source, target) -> float:
    """Sum over source points of the distance to the nearest target point.

    ``target`` must be non-empty; the empty case is a convention handled
    by :func:`relevance`, not a distance.
    """
    s = _as_points(source)
    t = _as_points(target)
    if len(t) == 0:
        raise InvalidArgumentError("directed distance needs a non-empty target")
    if len(s) == 0:
        return 0.0
    idx = np.searchsorted(t, s)
    left = t[np.clip(idx - 1, 0, len(t) - 1)]
    right = t[np.clip(idx, 0, len(t) - 1)]
    d_left = np.abs(s - left)
    d_right = np.abs(s - right)
    # Ties go to the earlier point; with distances equal the choice does
    # not move the sum, so plain minimum is exact.
    return float(np.minimum(d_left, d_right).sum())


def relevance(first, second, window_len: int) -> RelevanceScore:
    """Symmetrized, normalized similarity of two change-point arrays.

    ``window_len`` is the analysis-window length in samples and the
    arrays are expected in the same sample units.
    """
    if window_len <= 0:
        raise InvalidArgumentError("window_len must be positive")
    s1 = _as_points(first)
    s2 = _as_points(second)
    if len(s1) == 0 and len(s2) == 0:
        return 0.0
    if len(s1) == 0 or len(s2) == 0:
        return 0.0
    forward = directed_distance(s1, s2) / len(s1)
    backward = directed_distance(s2, s1) / len(s2)
    return 1.0 - (forward + backward) / (2.0 * window_len)


@dataclass(frozen=True)
class RankedCandidate:
    clue_id: str
    score: RelevanceScore


def rank_candidates(
    baseline,
    candidates: Sequence[tuple[str, object]],
    window_len: int,
    k: int,
) -> list[RankedCandidate]:
    """Top-``k`` candidates by relevance to the baseline, descending.

    ``candidates`` are (clue id, change-point array) pairs. Ties break
    toward the lexicographically smaller clue id so rankings are stable.
    """
    if k < 0:
        raise InvalidArgumentError("k must be non-negative")
    scored = [
        RankedCandidate(cid, relevance(baseline, arr, window_len)) for cid, arr in candidates
    ]
    scored.sort(key=lambda rc: (-rc.score, rc.clue_id))
    return scored[:k]
