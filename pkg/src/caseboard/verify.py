"""Dataset verification: structural checks plus answer-key recovery.

Used by the command line to vet a dataset directory before serving it.
Structural checks confirm the graph document, the telemetry grid, and
the record table agree with each other; when the directory carries an
answer key, recovery checks confirm the detectors actually find the
injected cascade.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .changepoint import DetectorConfig, changepoints_for_clue
from .errors import CaseboardError
from .graph import KnowledgeGraph, parse_graph, validate_graph
from .monitor import MonitorConfig, detect_anomalies
from .store import Clue, TelemetryStore, load_dataset
from .windows import TimeWindow


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str

    def to_json(self) -> dict:
        return {"name": self.name, "ok": self.ok, "detail": self.detail}


@dataclass(frozen=True)
class VerificationReport:
    checks: tuple[Check, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def to_json(self) -> dict:
        return {"ok": self.ok, "checks": [c.to_json() for c in self.checks]}


def _grid_check(store: TelemetryStore) -> Check:
    expected = store.window.sample_count(store.step)
    grid = store.window.start + np.arange(expected, dtype=np.int64) * store.step
    bad = []
    n_series = 0
    for (concept, instance, attr), payload in store.payloads.items():
        meta = store.attributes[(concept, attr)]
        if not meta.kind.is_series:
            continue
        for item in payload:
            n_series += 1
            if len(item) != expected or not np.array_equal(item.timestamps, grid):
                bad.append(f"{concept}/{instance}/{attr}")
    if bad:
        return Check("series-grid", False, f"{len(bad)} series off the dataset grid: {bad[:3]}")
    return Check("series-grid", True, f"{n_series} series on a uniform {store.step}s grid")


def _records_check(store: TelemetryStore) -> Check:
    if store.records is None:
        return Check("records-mirror-incidents", True, "no record table present")
    n_rec, n_inc = len(store.records), len(store.incidents)
    if n_rec != n_inc:
        return Check(
            "records-mirror-incidents", False,
            f"{n_rec} records vs {n_inc} incidents",
        )
    cols = store.records.columns
    for i, inc in enumerate(store.incidents):
        row = (
            int(store.records.timestamps[i]), cols["zone"][i], cols["error_code"][i],
        )
        if row != (inc.timestamp, inc.zone, inc.error_code):
            return Check(
                "records-mirror-incidents", False,
                f"record {i} does not match its incident",
            )
    return Check("records-mirror-incidents", True, f"{n_rec} records mirror the incident log")


def _truth_checks(graph: KnowledgeGraph, store: TelemetryStore, detector: DetectorConfig) -> list[Check]:
    truth = store.ground_truth
    if truth is None:
        return [Check("answer-key", True, "no answer key present (nothing to recover)")]
    checks: list[Check] = []

    keys = [truth.cause.key, truth.anomaly] + [c.key for c in truth.cascade]
    missing = []
    for key in keys:
        try:
            store.query_clue(key, store.window)
        except CaseboardError as exc:
            missing.append(f"{key.clue_id}: {exc}")
    checks.append(
        Check("answer-key-resolves", not missing,
              f"{len(keys)} keys resolve" if not missing else "; ".join(missing[:3]))
    )

    inside = (
        store.window.start <= truth.incident_window.start
        and truth.incident_window.end <= store.window.end
    )
    checks.append(
        Check("incident-window-inside-span", inside, str(truth.incident_window.to_json()))
    )
    if not inside or missing:
        return checks

    bins = truth.incident_window.sample_count(store.step)
    burst = [
        r for r in store.incidents
        if truth.incident_window.contains(r.timestamp)
        and r.zone == truth.anomaly.instance
        and r.error_code == truth.injected_error_code
    ]
    rate = len(burst) / max(bins, 1)
    hot = rate >= truth.burst_per_bin / 2.0
    checks.append(
        Check(
            "burst-concentration", hot,
            f"{rate:.1f} injected-code incidents per bin in the anomaly window "
            f"(baseline {truth.baseline_per_bin:.1f})",
        )
    )

    lag_by_key = {c.key: c.lag_samples for c in truth.cascade}
    incident_lag = lag_by_key.get(truth.anomaly)
    if incident_lag is None:
        checks.append(Check("cause-change-detected", False, "anomaly key missing from cascade"))
        return checks
    t0 = truth.incident_window.start - incident_lag * store.step
    cpa = changepoints_for_clue(store, truth.cause, detector)
    hit = any(abs(p - t0) <= 3 * store.step for p in cpa.points)
    checks.append(
        Check(
            "cause-change-detected", hit,
            f"cause series has a change within 3 samples of {t0}" if hit
            else f"no change found near {t0} in {list(cpa.points)}",
        )
    )

    scan = detect_anomalies(store, [truth.anomaly], store.window, MonitorConfig())
    overlap = any(
        a.key == truth.anomaly and a.window.intersect(truth.incident_window) is not None
        for a in scan.alerts
    )
    checks.append(
        Check(
            "anomaly-alert-overlaps-burst", overlap,
            f"{len(scan.alerts)} alert(s) on the target KPI",
        )
    )
    return checks


def verify_dataset(path: str | Path, detector: DetectorConfig = DetectorConfig()) -> VerificationReport:
    """Run every check against a dataset directory."""
    root = Path(path)
    checks: list[Check] = []

    graph = None
    graph_path = root / "graph.json"
    if not graph_path.exists():
        checks.append(Check("graph-parses", False, f"missing {graph_path}"))
    else:
        try:
            graph = parse_graph(graph_path.read_bytes())
            report = validate_graph(graph)
            checks.append(
                Check("graph-parses", report.ok, f"version {graph.version}")
            )
        except CaseboardError as exc:
            checks.append(Check("graph-parses", False, str(exc)))

    try:
        store = load_dataset(root)
        checks.append(
            Check(
                "dataset-loads", True,
                f"{sum(len(v) for v in store.instances.values())} instances, "
                f"{len(store.incidents)} incidents",
            )
        )
    except CaseboardError as exc:
        checks.append(Check("dataset-loads", False, str(exc)))
        return VerificationReport(tuple(checks))

    checks.append(_grid_check(store))
    checks.append(_records_check(store))
    if graph is not None:
        unknown = [
            f"{concept}/{attr}"
            for concept, attr in store.attributes
            if not graph.has_concept(concept)
            or all(a.id != attr for a in graph.concept(concept).attributes)
        ]
        checks.append(
            Check(
                "attributes-declared-in-graph", not unknown,
                "store attributes all appear in the graph" if not unknown else f"undeclared: {unknown[:4]}",
            )
        )
        checks.extend(_truth_checks(graph, store, detector))
    return VerificationReport(tuple(checks))
