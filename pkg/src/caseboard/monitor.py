"""Monitoring: KPI anomaly alerts and the hand-off into an investigation.

Alerts come from a rolling z-score: each sample is scored against the
mean and standard deviation of the preceding window, and a run of at
least ``min_run`` consecutive samples beyond the threshold becomes one
alert. Qualifying runs separated by a single calm sample are merged;
alerts sort by absolute peak score, strongest first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .board import InvestigationSession, create_session
from .errors import InvalidArgumentError, NotFoundError
from .graph import DataKind, KnowledgeGraph
from .store import Clue, IncidentLog, SeriesKey, TelemetryStore
from .windows import TimeWindow

INSUFFICIENT_DATA = "insufficient-data"


@dataclass(frozen=True)
class MonitorConfig:
    rolling_window: int = 24
    z_threshold: float = 3.0
    min_run: int = 2

    def __post_init__(self):
        if self.rolling_window < 2 or self.min_run < 1 or self.z_threshold <= 0:
            raise InvalidArgumentError("monitor config out of range")


@dataclass(frozen=True)
class AnomalyAlert:
    key: SeriesKey
    window: TimeWindow
    peak_z: float
    direction: str

    def to_json(self) -> dict:
        return {
            "key": self.key.to_json(),
            "window": self.window.to_json(),
            "peak_z": self.peak_z,
            "direction": self.direction,
        }


@dataclass(frozen=True)
class AnomalyScan:
    alerts: tuple[AnomalyAlert, ...]
    skipped: tuple[tuple[SeriesKey, str], ...] = ()

    def to_json(self) -> dict:
        return {
            "alerts": [a.to_json() for a in self.alerts],
            "skipped": [{"key": k.to_json(), "reason": r} for k, r in self.skipped],
        }


@dataclass(frozen=True)
class BrushSelection:
    """A user's drag over a KPI chart; the range may spill past the data."""

    key: SeriesKey
    window: TimeWindow


def _rolling_z(values: np.ndarray, rolling: int) -> np.ndarray:
    """z-score of each sample against the preceding ``rolling`` samples.

    The first ``rolling`` samples have no full history and score 0. A
    zero-variance history gets a tiny floor so a genuine jump off a flat
    baseline still registers as a large finite score.
    """
    n = len(values)
    z = np.zeros(n)
    for i in range(rolling, n):
        hist = values[i - rolling : i]
        mean = float(hist.mean())
        std = float(hist.std())
        z[i] = (float(values[i]) - mean) / max(std, 1e-9)
    return z


def detect_anomalies(
    store: TelemetryStore,
    keys: Sequence[SeriesKey],
    window: TimeWindow | None = None,
    config: MonitorConfig = MonitorConfig(),
) -> AnomalyScan:
    """Scan numeric KPIs for rolling z-score excursions.

    Series too short for the rolling window (plus one scored sample) are
    skipped with an insufficient-data marker rather than guessed at.
    """
    window = (window or store.window).require_nonempty()
    alerts: list[AnomalyAlert] = []
    skipped: list[tuple[SeriesKey, str]] = []
    for key in keys:
        meta = store.attribute_meta(key.concept, key.attribute)
        if meta.kind is not DataKind.NUMBER:
            raise InvalidArgumentError(
                f"anomaly scan needs number-kind series, {key.clue_id} is {meta.kind.value}"
            )
        data = store.query_clue(key, window)
        series = data.series[0]
        if len(series) < config.rolling_window + 1:
            skipped.append((key, INSUFFICIENT_DATA))
            continue
        z = _rolling_z(series.values, config.rolling_window)
        hot = np.abs(z) >= config.z_threshold
        runs: list[tuple[int, int]] = []
        start = None
        for i, flag in enumerate(hot):
            if flag and start is None:
                start = i
            elif not flag and start is not None:
                runs.append((start, i - 1))
                start = None
        if start is not None:
            runs.append((start, len(hot) - 1))
        # A run only qualifies with min_run consecutive hot samples;
        # qualifying runs separated by one calm sample become one alert.
        qualified = [(s, e) for s, e in runs if e - s + 1 >= config.min_run]
        merged: list[tuple[int, int]] = []
        for s, e in qualified:
            if merged and s - merged[-1][1] <= 2:
                merged[-1] = (merged[-1][0], e)
            else:
                merged.append((s, e))
        for s, e in merged:
            seg = z[s : e + 1]
            peak = float(seg[np.argmax(np.abs(seg))])
            alerts.append(
                AnomalyAlert(
                    key=key,
                    window=TimeWindow(
                        int(series.timestamps[s]), int(series.timestamps[e]) + store.step
                    ),
                    peak_z=peak,
                    direction="spike" if peak > 0 else "drop",
                )
            )
    alerts.sort(key=lambda a: (-abs(a.peak_z), a.key.clue_id, a.window.start))
    return AnomalyScan(tuple(alerts), tuple(skipped))


def link_incident_to_kpi(
    store: TelemetryStore, graph: KnowledgeGraph, incident: IncidentLog
) -> SeriesKey:
    """The zone KPI an incident should highlight.

    Resolves the concept that holds the incident's zone instance, then
    its attribute flagged ``primary_kpi`` (falling back to an attribute
    literally named ``incident_count``).
    """
    holder = None
    for concept in sorted(graph.concepts, key=lambda c: c.id):
        if store.has_instance(concept.id, incident.zone):
            holder = concept
            break
    if holder is None:
        raise NotFoundError(f"incident zone {incident.zone!r} is not a known instance")
    flagged = [a for a in holder.attributes if a.primary_kpi]
    if flagged:
        return SeriesKey(holder.id, incident.zone, flagged[0].id)
    for a in holder.attributes:
        if a.id == "incident_count":
            return SeriesKey(holder.id, incident.zone, a.id)
    raise NotFoundError(f"concept {holder.id!r} declares no primary KPI")


def open_investigation(
    store: TelemetryStore,
    graph: KnowledgeGraph,
    brush: BrushSelection,
    session_id: str | None = None,
) -> InvestigationSession:
    """Turn a brushed KPI range into a fresh investigation session.

    The brush is clipped to the dataset window first; a brush entirely
    outside the data is an invalid argument.
    """
    clipped = brush.window.require_nonempty().clip_to(store.window)
    clue = Clue(brush.key, clipped)
    return create_session(graph, store, clue, session_id)
