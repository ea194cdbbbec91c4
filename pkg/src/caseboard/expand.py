"""Guided expansion around a clue in five directions.

Directional moves walk the knowledge graph hop by hop from the clue's
entity instance: up and down follow the containment hierarchy, right
follows lateral relations, left enumerates sibling instances under the
same parent (or every peer instance in global-sibling mode), and inward
stays on the instance and scores its other attributes.

Every reached candidate attribute is scored by change-point relevance
against the baseline clue. Instances whose candidates enter the running
top-k are expanded first, which reproduces the
promising-instances-first behaviour that matters under a tight budget;
remaining reachable instances are still expanded while budget is left,
so a search that completes equals exhaustive enumeration plus ranking.
The wall-clock budget is checked on a monotonic clock before each
scoring call, and exceeding it marks the result truncated.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .changepoint import ChangePointArray, DetectorConfig, changepoints_for_data, sample_offsets
from .errors import InvalidArgumentError, NotFoundError
from .graph import Direction, KnowledgeGraph, neighbors
from .relevance import relevance
from .store import Clue, SeriesKey, TelemetryStore, fill_template
from .windows import TimeWindow


@dataclass(frozen=True)
class PathHop:
    """One instance-level edge of a relation path.

    ``source_instance`` and ``target_instance`` are aligned with the
    relation's declared source and target concepts, not with traversal
    order, so notes rendered from a path always read the relation the
    way it was authored (parent first for containment).
    """

    relation: str
    source_instance: str
    target_instance: str

    def to_json(self) -> dict:
        return {
            "relation": self.relation,
            "source_instance": self.source_instance,
            "target_instance": self.target_instance,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PathHop":
        return cls(obj["relation"], obj["source_instance"], obj["target_instance"])


@dataclass(frozen=True)
class ExpansionEntry:
    clue: Clue
    score: float
    path: tuple[PathHop, ...] = ()

    def to_json(self) -> dict:
        return {
            "clue": self.clue.to_json(),
            "score": self.score,
            "path": [h.to_json() for h in self.path],
        }


@dataclass(frozen=True)
class ExpansionResult:
    direction: Direction
    entries: tuple[ExpansionEntry, ...]
    visited: tuple[tuple[str, str], ...]
    truncated_by_budget: bool = False

    def to_json(self) -> dict:
        return {
            "direction": self.direction.value,
            "entries": [e.to_json() for e in self.entries],
            "visited": [list(v) for v in self.visited],
            "truncated_by_budget": self.truncated_by_budget,
        }


@dataclass(frozen=True)
class ExpandConfig:
    detector: DetectorConfig = DetectorConfig()
    global_siblings: bool = False


class ClueScorer:
    """Resolves clues to change points in sample units, with caching.

    One scorer holds one detector configuration, so the cache key is
    (series key, window); build a fresh scorer to score under different
    detector settings.
    """

    def __init__(self, store: TelemetryStore, detector: DetectorConfig = DetectorConfig()):
        self.store = store
        self.detector = detector
        self._cache: dict[tuple[SeriesKey, TimeWindow], np.ndarray | None] = {}
        self.scoring_calls = 0

    def changepoints(self, key: SeriesKey, window: TimeWindow) -> np.ndarray | None:
        """Sample-unit change points, or None when no payload exists."""
        cache_key = (key, window)
        if cache_key in self._cache:
            return self._cache[cache_key]
        self.scoring_calls += 1
        try:
            data = self.store.query_clue(key, window)
        except NotFoundError:
            self._cache[cache_key] = None
            return None
        cpa = changepoints_for_data(data, window, self.store.step, self.detector)
        offsets = sample_offsets(cpa, window, self.store.step)
        self._cache[cache_key] = offsets
        return offsets

    def has_data(self, key: SeriesKey) -> bool:
        meta = self.store.attributes.get((key.concept, key.attribute))
        if meta is None:
            return False
        if meta.record_backed:
            return self.store.records is not None
        return (key.concept, key.instance, key.attribute) in self.store.payloads


def _sorted_entries(entries: list[ExpansionEntry], k: int) -> tuple[ExpansionEntry, ...]:
    entries = sorted(entries, key=lambda e: (-e.score, e.clue.key.clue_id))
    return tuple(entries[:k])


class _Budget:
    def __init__(self, seconds: float | None):
        self.seconds = seconds
        self.start = time.monotonic()

    def exceeded(self) -> bool:
        if self.seconds is None:
            return False
        return (time.monotonic() - self.start) > self.seconds


def expand_inward(
    store: TelemetryStore,
    graph: KnowledgeGraph,
    clue: Clue,
    window: TimeWindow | None = None,
    k: int = 5,
    exclude: tuple[str, ...] = (),
    config: ExpandConfig = ExpandConfig(),
    scorer: ClueScorer | None = None,
) -> ExpansionResult:
    """Score the other attributes of the clue's own instance.

    ``exclude`` lists attribute ids already on the board; those are not
    offered again.
    """
    window = (window or clue.window).require_nonempty()
    concept = graph.concept(clue.key.concept)
    if scorer is None or scorer.detector != config.detector:
        scorer = ClueScorer(store, config.detector)
    baseline = scorer.changepoints(clue.key, window)
    if baseline is None:
        raise NotFoundError(f"baseline clue {clue.key.clue_id} has no data")
    window_len = window.sample_count(store.step)
    skip = set(exclude) | {clue.key.attribute}
    entries = []
    for attr in concept.attributes:
        if attr.id in skip:
            continue
        key = SeriesKey(concept.id, clue.key.instance, attr.id)
        if not scorer.has_data(key):
            continue
        points = scorer.changepoints(key, window)
        if points is None:
            continue
        score = relevance(baseline, points, window_len)
        entries.append(ExpansionEntry(Clue(key, window), score))
    return ExpansionResult(
        direction=Direction.IN,
        entries=_sorted_entries(entries, k),
        visited=((clue.key.concept, clue.key.instance),),
        truncated_by_budget=False,
    )


def _left_candidates(
    store: TelemetryStore, clue: Clue, global_siblings: bool
) -> list[tuple[str, tuple[PathHop, ...]]]:
    """Sibling instances and the containment hop that reaches each."""
    concept, instance = clue.key.concept, clue.key.instance
    if global_siblings:
        return [(sib, ()) for sib in store.list_instances(concept) if sib != instance]
    containment = store.containment_of(concept, instance)
    if containment is None:
        return []
    relation_id, _, parent_instance = containment
    siblings = store.list_instances(concept, parent=parent_instance)
    return [
        (sib, (PathHop(relation_id, parent_instance, sib),))
        for sib in siblings
        if sib != instance
    ]


def expand_directional(
    store: TelemetryStore,
    graph: KnowledgeGraph,
    clue: Clue,
    direction: Direction | str,
    window: TimeWindow | None = None,
    k: int = 5,
    budget_s: float | None = 2.0,
    config: ExpandConfig = ExpandConfig(),
    scorer: ClueScorer | None = None,
) -> ExpansionResult:
    """Iterative one-hop search in one of up, down, left, right.

    Visited instances are never revisited within one invocation. See the
    module docstring for the traversal policy and budget semantics.
    """
    direction = Direction(direction)
    if direction is Direction.IN:
        raise InvalidArgumentError("use expand_inward for the inward direction")
    window = (window or clue.window).require_nonempty()
    graph.concept(clue.key.concept)
    store._require_instance(clue.key.concept, clue.key.instance)
    if scorer is None or scorer.detector != config.detector:
        scorer = ClueScorer(store, config.detector)
    budget = _Budget(budget_s)
    baseline = scorer.changepoints(clue.key, window)
    if baseline is None:
        raise NotFoundError(f"baseline clue {clue.key.clue_id} has no data")
    window_len = window.sample_count(store.step)

    origin = (clue.key.concept, clue.key.instance)
    visited: set[tuple[str, str]] = {origin}
    entries: list[ExpansionEntry] = []
    truncated = False

    def score_instance(concept_id: str, instance: str, path: tuple[PathHop, ...], attrs) -> bool:
        """Score one instance's candidate attributes; True if any entry
        lands in the current running top-k."""
        nonlocal truncated
        added_ids = []
        for attr in attrs:
            key = SeriesKey(concept_id, instance, attr.id)
            if not scorer.has_data(key):
                continue
            if budget.exceeded():
                truncated = True
                return False
            points = scorer.changepoints(key, window)
            if points is None:
                continue
            score = relevance(baseline, points, window_len)
            entries.append(ExpansionEntry(Clue(key, window), score, path))
            added_ids.append(key.clue_id)
        if not added_ids:
            return False
        top = {e.clue.key.clue_id for e in _sorted_entries(entries, k)}
        return any(cid in top for cid in added_ids)

    if direction is Direction.LEFT:
        attr = graph.concept(clue.key.concept).attribute(clue.key.attribute)
        for sib, path in _left_candidates(store, clue, config.global_siblings):
            if truncated:
                break
            visited.add((clue.key.concept, sib))
            key = SeriesKey(clue.key.concept, sib, attr.id, clue.key.filter)
            if not scorer.has_data(key):
                continue
            if budget.exceeded():
                truncated = True
                break
            points = scorer.changepoints(key, window)
            if points is None:
                continue
            score = relevance(baseline, points, window_len)
            entries.append(ExpansionEntry(Clue(key, window), score, path))
        return ExpansionResult(
            direction=direction,
            entries=_sorted_entries(entries, k),
            visited=tuple(sorted(visited)),
            truncated_by_budget=truncated,
        )

    # Up, down, right: hop-by-hop traversal. Promoted instances (their
    # clue entered the running top-k) expand before the rest.
    hot: deque[tuple[str, str, tuple[PathHop, ...]]] = deque()
    cold: deque[tuple[str, str, tuple[PathHop, ...]]] = deque()
    hot.append((clue.key.concept, clue.key.instance, ()))
    while (hot or cold) and not truncated:
        concept_id, instance, path = hot.popleft() if hot else cold.popleft()
        for rel, nconcept in neighbors(graph, concept_id, direction):
            if truncated:
                break
            try:
                related = store.execute(fill_template(rel.traversal_query, instance=instance))
            except NotFoundError:
                continue
            for nxt in related:
                if (nconcept.id, nxt) in visited:
                    continue
                visited.add((nconcept.id, nxt))
                if direction is Direction.UP or (direction is Direction.RIGHT and rel.source != concept_id):
                    hop = PathHop(rel.id, nxt, instance)
                else:
                    hop = PathHop(rel.id, instance, nxt)
                hop_path = path + (hop,)
                promoted = score_instance(nconcept.id, nxt, hop_path, nconcept.attributes)
                if truncated:
                    break
                (hot if promoted else cold).append((nconcept.id, nxt, hop_path))
    return ExpansionResult(
        direction=direction,
        entries=_sorted_entries(entries, k),
        visited=tuple(sorted(visited)),
        truncated_by_budget=truncated,
    )


def expand_all(
    store: TelemetryStore,
    graph: KnowledgeGraph,
    clue: Clue,
    window: TimeWindow | None = None,
    k: int = 5,
    budget_s: float | None = 2.0,
    config: ExpandConfig = ExpandConfig(),
    exclude_inward: tuple[str, ...] = (),
) -> dict[Direction, ExpansionResult]:
    """All five directions; each directional search gets its own budget."""
    scorer = ClueScorer(store, config.detector)
    out: dict[Direction, ExpansionResult] = {}
    for direction in (Direction.UP, Direction.DOWN, Direction.LEFT, Direction.RIGHT):
        out[direction] = expand_directional(
            store, graph, clue, direction, window, k, budget_s, config, scorer
        )
    out[Direction.IN] = expand_inward(store, graph, clue, window, k, exclude_inward, config, scorer)
    return out
