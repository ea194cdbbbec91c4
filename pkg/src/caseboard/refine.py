"""Filter refinement: find option combinations with extreme trends.

Given a record-backed attribute and a set of pre-selected filters, the
search walks the space of predicates (one non-empty option set per
filter) looking for the combination whose filtered count series has the
steepest increasing or decreasing trend. The space is combinatorial, so
the walk is simulated annealing: neighbors toggle a single option,
moves that worsen the objective are accepted with probability
``exp(delta / temperature)``, temperature cools geometrically, and the
best feasible state over several restarts wins. Ties prefer the
lexicographically smallest predicate, and a fixed seed fixes the walk.

Predicates matching fewer than ``min_support`` records are infeasible:
their trend would be noise. When nothing feasible exists the result
says so explicitly instead of returning a junk predicate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .changepoint import ChangePointArray, DetectorConfig, detect_series, sample_offsets
from .errors import InvalidArgumentError
from .graph import DataKind, FilterDef, KnowledgeGraph
from .notes import render_filter_note
from .relevance import relevance
from .store import Clue, FilterClause, FilterPredicate, SeriesKey, TelemetryStore, TimeSeriesData
from .windows import TimeWindow

MAXIMIZE = "maximize"
MINIMIZE = "minimize"
_EPS = 1e-9
# Spaces at or below this size are enumerated outright; annealing only
# pays for itself above it, and small spaces must return the exact
# optimum deterministically.
EXHAUSTIVE_LIMIT = 32


def trend_score(values) -> float:
    """Least-squares slope of value against sample index, scaled by the
    sample standard deviation (plus a small epsilon so constant series
    score exactly zero rather than dividing by zero)."""
    x = np.asarray(values, dtype=np.float64)
    n = len(x)
    if n < 2:
        raise InvalidArgumentError("trend needs at least 2 samples")
    idx = np.arange(n, dtype=np.float64)
    idx -= idx.mean()
    denom = float((idx * idx).sum())
    slope = float((idx * (x - x.mean())).sum()) / denom
    return slope / (float(np.std(x)) + _EPS)


@dataclass(frozen=True)
class RefineConfig:
    min_support: int = 5
    max_iters: int = 500
    restarts: int = 8
    initial_temp: float = 1.0
    cooling: float = 0.995
    seed: int = 0

    def __post_init__(self):
        if self.min_support < 0 or self.max_iters < 1 or self.restarts < 1:
            raise InvalidArgumentError("refine config out of range")
        if not 0.0 < self.cooling <= 1.0 or self.initial_temp <= 0.0:
            raise InvalidArgumentError("cooling must be in (0, 1], initial_temp positive")


@dataclass(frozen=True)
class CombinationResult:
    """Winner of one annealing search. ``feasible`` False means the whole
    space fell below min_support; predicate and score are then empty."""

    objective: str
    predicate: FilterPredicate | None
    score: float
    feasible: bool
    evaluations: int

    def to_json(self) -> dict:
        return {
            "objective": self.objective,
            "predicate": None if self.predicate is None else self.predicate.to_json(),
            "score": self.score,
            "feasible": self.feasible,
            "evaluations": self.evaluations,
        }


def _predicate_for(selection: Sequence[FilterDef], state: tuple[tuple[str, ...], ...]) -> FilterPredicate:
    return FilterPredicate(
        tuple(
            FilterClause(fdef.id, opts)
            for fdef, opts in zip(selection, state)
        )
    )


def _state_key(state: tuple[tuple[str, ...], ...]) -> tuple:
    return tuple(tuple(sorted(opts)) for opts in state)


def anneal_combinations(
    selection: Sequence[FilterDef],
    evaluate: Callable[[FilterPredicate], float],
    objective: str,
    config: RefineConfig = RefineConfig(),
) -> CombinationResult:
    """Core annealing walk over option-set states.

    ``evaluate`` maps a predicate to its objective value, returning
    ``-inf`` for infeasible predicates. Values are compared on the
    maximize scale; the minimize objective negates them, which makes the
    two searches mirror images move for move under the same seed.
    """
    if objective not in (MAXIMIZE, MINIMIZE):
        raise InvalidArgumentError(f"objective must be {MAXIMIZE!r} or {MINIMIZE!r}")
    if not selection:
        raise InvalidArgumentError("selection must name at least one filter")
    for fdef in selection:
        if not fdef.options:
            raise InvalidArgumentError(f"filter {fdef.id!r} has no options to search")
    sign = 1.0 if objective == MAXIMIZE else -1.0
    memo: dict[tuple, float] = {}

    def value(state) -> float:
        key = _state_key(state)
        got = memo.get(key)
        if got is None:
            raw = evaluate(_predicate_for(selection, state))
            got = sign * raw if math.isfinite(raw) else -math.inf
            memo[key] = got
        return got

    toggles = [(i, opt) for i, fdef in enumerate(selection) for opt in fdef.options]
    rng = np.random.Generator(np.random.PCG64(config.seed))
    best_state = None
    best_v = -math.inf

    def consider(state, v):
        nonlocal best_state, best_v
        if v == -math.inf:
            return
        if v > best_v or (v == best_v and _state_key(state) < _state_key(best_state)):
            best_state, best_v = state, v

    space = 1
    for fdef in selection:
        space *= 2 ** len(fdef.options) - 1
        if space > EXHAUSTIVE_LIMIT:
            break
    if space <= EXHAUSTIVE_LIMIT:
        per_filter = [
            [
                tuple(sorted(chosen))
                for r in range(1, len(fdef.options) + 1)
                for chosen in itertools.combinations(fdef.options, r)
            ]
            for fdef in selection
        ]
        for state in itertools.product(*per_filter):
            consider(state, value(state))
        if best_state is None:
            return CombinationResult(objective, None, math.nan, False, len(memo))
        return CombinationResult(
            objective, _predicate_for(selection, best_state), sign * best_v, True, len(memo)
        )

    def random_state() -> tuple[tuple[str, ...], ...]:
        clauses = []
        for fdef in selection:
            picked = [o for o in fdef.options if rng.random() < 0.5]
            if not picked:
                picked = [fdef.options[int(rng.integers(len(fdef.options)))]]
            clauses.append(tuple(sorted(picked)))
        return tuple(clauses)

    for _ in range(config.restarts):
        state = random_state()
        v = value(state)
        consider(state, v)
        temp = config.initial_temp
        for _ in range(config.max_iters):
            i, opt = toggles[int(rng.integers(len(toggles)))]
            opts = set(state[i])
            if opt in opts:
                if len(opts) == 1:
                    # Removing the last option would empty the clause;
                    # burn the move but keep cooling.
                    temp *= config.cooling
                    continue
                opts.remove(opt)
            else:
                opts.add(opt)
            neighbor = state[:i] + (tuple(sorted(opts)),) + state[i + 1 :]
            nv = value(neighbor)
            accept = nv >= v
            if not accept and nv > -math.inf:
                accept = rng.random() < math.exp((nv - v) / temp)
            if accept:
                state, v = neighbor, nv
                consider(state, v)
            temp *= config.cooling
    if best_state is None:
        return CombinationResult(objective, None, math.nan, False, len(memo))
    return CombinationResult(objective, _predicate_for(selection, best_state), sign * best_v, True, len(memo))


def implicit_selection(
    store: TelemetryStore,
    graph: KnowledgeGraph,
    concept_id: str,
) -> tuple[FilterDef, ...]:
    """Resolve the filter dimensions available for refining a concept.

    Declared filters win.  When a concept declares none, each string-kind
    attribute acts as a filter whose options are the distinct interval
    labels observed in the store for that attribute (computed lazily here,
    never persisted into the graph).
    """
    concept = graph.concept(concept_id)
    if concept.filters:
        return concept.filters
    out: list[FilterDef] = []
    for attr in concept.attributes:
        if attr.kind is not DataKind.STRING:
            continue
        labels: set[str] = set()
        for (c, _inst, a), payload in store.payloads.items():
            if c != concept_id or a != attr.id:
                continue
            for seq in payload:
                labels.update(lab for _, _, lab in seq.intervals)
        if labels:
            out.append(FilterDef(attr.id, attr.name, tuple(sorted(labels))))
    return tuple(out)


def search_combinations(
    store: TelemetryStore,
    key: SeriesKey,
    selection: Sequence[FilterDef],
    objective: str,
    window: TimeWindow,
    config: RefineConfig = RefineConfig(),
) -> CombinationResult:
    """Anneal over filter predicates of a record-backed attribute.

    The objective value of a predicate is the trend score of its per-bin
    filtered count series inside ``window`` (bin = the dataset step);
    predicates matching fewer than ``min_support`` records are
    infeasible.
    """
    window.require_nonempty()
    if window.sample_count(store.step) < 2:
        raise InvalidArgumentError("refinement window spans fewer than 2 bins")
    meta = store.attribute_meta(key.concept, key.attribute)
    if not meta.record_backed:
        raise InvalidArgumentError(
            f"attribute {key.attribute!r} is not record-backed; refinement needs records"
        )

    def evaluate(predicate: FilterPredicate) -> float:
        filtered = SeriesKey(key.concept, key.instance, key.attribute, predicate)
        series = store.bin_records(filtered, window, store.step)
        if float(series.values.sum()) < config.min_support:
            return -math.inf
        return trend_score(series.values)

    return anneal_combinations(selection, evaluate, objective, config)


@dataclass(frozen=True)
class RefineBranch:
    """One objective's winner with its derived evidence."""

    objective: str
    feasible: bool
    predicate: FilterPredicate | None
    trend: float
    series: TimeSeriesData | None
    changepoints: ChangePointArray
    avg_relevance: float
    no_evidence: bool
    note: str

    def to_json(self) -> dict:
        return {
            "objective": self.objective,
            "feasible": self.feasible,
            "predicate": None if self.predicate is None else self.predicate.to_json(),
            "trend": self.trend,
            "series": None
            if self.series is None
            else {
                "timestamps": self.series.timestamps.tolist(),
                "values": self.series.values.tolist(),
            },
            "changepoints": self.changepoints.to_json(),
            "avg_relevance": self.avg_relevance,
            "no_evidence": self.no_evidence,
            "note": self.note,
        }


@dataclass(frozen=True)
class RefineResult:
    target: Clue
    increasing: RefineBranch
    decreasing: RefineBranch

    @property
    def note(self) -> str:
        """The increasing branch's filter note when it exists."""
        return self.increasing.note or self.decreasing.note

    def to_json(self) -> dict:
        return {
            "target": self.target.to_json(),
            "increasing": self.increasing.to_json(),
            "decreasing": self.decreasing.to_json(),
            "note": self.note,
        }


def refine_clue(
    store: TelemetryStore,
    clue: Clue,
    selection: Sequence[FilterDef],
    board_evidence: Sequence[ChangePointArray] = (),
    window: TimeWindow | None = None,
    config: RefineConfig = RefineConfig(),
    detector: DetectorConfig = DetectorConfig(),
) -> RefineResult:
    """Run both objectives over a clue's filter space.

    ``board_evidence`` holds the change-point arrays (sample units) of
    the clues already validated on the board; each branch reports the
    average relevance of its filtered series against them, flagged
    ``no_evidence`` when the board has none.
    """
    window = (window or clue.window).require_nonempty()
    window_len = window.sample_count(store.step)
    branches = {}
    for objective in (MAXIMIZE, MINIMIZE):
        combo = search_combinations(store, clue.key, selection, objective, window, config)
        if not combo.feasible:
            branches[objective] = RefineBranch(
                objective=objective,
                feasible=False,
                predicate=None,
                trend=math.nan,
                series=None,
                changepoints=ChangePointArray(),
                avg_relevance=0.0,
                no_evidence=not board_evidence,
                note="",
            )
            continue
        filtered_key = SeriesKey(clue.key.concept, clue.key.instance, clue.key.attribute, combo.predicate)
        series = store.bin_records(filtered_key, window, store.step)
        cpa = detect_series(series, window, detector)
        offsets = sample_offsets(cpa, window, store.step)
        if board_evidence:
            avg = float(
                np.mean([relevance(offsets, ev, window_len) for ev in board_evidence])
            )
            no_evidence = False
        else:
            avg = 0.0
            no_evidence = True
        branches[objective] = RefineBranch(
            objective=objective,
            feasible=True,
            predicate=combo.predicate,
            trend=combo.score,
            series=series,
            changepoints=cpa,
            avg_relevance=avg,
            no_evidence=no_evidence,
            note=render_filter_note(selection, combo.predicate),
        )
    return RefineResult(target=clue, increasing=branches[MAXIMIZE], decreasing=branches[MINIMIZE])
