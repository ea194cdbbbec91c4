"""Telemetry store: typed access to series, events, incidents, and records.

A dataset on disk is a directory: ``manifest.json`` holds topology and the
payload index, ``series/*.csv`` and ``events/*.csv`` hold data,
``incidents.csv`` the incident log, ``records.csv`` the filterable record
table behind record-backed count attributes, ``ground_truth.json`` the
generator's answer key. All timestamps are integer epoch seconds on a
uniform grid.

The store doubles as the local query engine: filled query templates from
the knowledge graph parse as a small command language (``fetch``,
``traverse``, ``instances``) executed by :meth:`TelemetryStore.execute`.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError, NotFoundError, SchemaError
from .graph import DataKind
from .windows import TimeWindow


# ---------------------------------------------------------------------------
# Filter predicates


@dataclass(frozen=True)
class FilterClause:
    """One conjunct: the record's value for ``filter`` is one of ``options``."""

    filter: str
    options: tuple[str, ...]

    def __post_init__(self):
        if not self.options:
            raise InvalidArgumentError(f"filter clause {self.filter!r} has no options")
        object.__setattr__(self, "options", tuple(sorted(set(self.options))))


@dataclass(frozen=True)
class FilterPredicate:
    """Conjunction of clauses, at most one per filter, sorted by filter id."""

    clauses: tuple[FilterClause, ...]

    def __post_init__(self):
        ids = [c.filter for c in self.clauses]
        if len(set(ids)) != len(ids):
            raise InvalidArgumentError("predicate repeats a filter id")
        object.__setattr__(self, "clauses", tuple(sorted(self.clauses, key=lambda c: c.filter)))

    @property
    def canonical_key(self) -> tuple:
        """Sort key used for lexicographic tie-breaks between predicates."""
        return tuple((c.filter, c.options) for c in self.clauses)

    def to_json(self) -> dict:
        return {"clauses": [{"filter": c.filter, "options": list(c.options)} for c in self.clauses]}

    @classmethod
    def from_json(cls, obj: dict) -> "FilterPredicate":
        if not isinstance(obj, dict) or "clauses" not in obj:
            raise SchemaError("malformed filter predicate", "filter")
        return cls(
            tuple(
                FilterClause(c["filter"], tuple(c["options"]))
                for c in obj["clauses"]
            )
        )


def render_filter_clauses(predicate: FilterPredicate | None) -> str:
    """DSL text for the ``{filter_clauses}`` placeholder."""
    if predicate is None or not predicate.clauses:
        return ""
    return "; ".join(f"{c.filter} in [{'|'.join(c.options)}]" for c in predicate.clauses)


_CLAUSE_RE = re.compile(r"^\s*(\S+)\s+in\s+\[([^\]]*)\]\s*$")


def parse_filter_clauses(text: str) -> FilterPredicate | None:
    """Inverse of :func:`render_filter_clauses`."""
    text = text.strip()
    if not text:
        return None
    clauses = []
    for part in text.split(";"):
        m = _CLAUSE_RE.match(part)
        if not m:
            raise InvalidArgumentError(f"malformed filter clause {part.strip()!r}")
        options = tuple(o for o in m.group(2).split("|") if o)
        clauses.append(FilterClause(m.group(1), options))
    return FilterPredicate(tuple(clauses))


# ---------------------------------------------------------------------------
# Keys and payloads


@dataclass(frozen=True)
class SeriesKey:
    """Addresses one attribute of one entity instance, optionally filtered."""

    concept: str
    instance: str
    attribute: str
    filter: FilterPredicate | None = None

    @property
    def clue_id(self) -> str:
        suffix = ""
        if self.filter is not None and self.filter.clauses:
            suffix = "?" + render_filter_clauses(self.filter)
        return f"{self.concept}/{self.instance}/{self.attribute}{suffix}"

    def unfiltered(self) -> "SeriesKey":
        return SeriesKey(self.concept, self.instance, self.attribute)

    def to_json(self) -> dict:
        return {
            "concept": self.concept,
            "instance": self.instance,
            "attribute": self.attribute,
            "filter": None if self.filter is None else self.filter.to_json(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SeriesKey":
        try:
            flt = obj.get("filter")
            return cls(
                concept=obj["concept"],
                instance=obj["instance"],
                attribute=obj["attribute"],
                filter=None if flt is None else FilterPredicate.from_json(flt),
            )
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed series key: {exc}", "key")


def parse_clue_id(text: str) -> SeriesKey:
    """Inverse of :attr:`SeriesKey.clue_id`."""
    body, _, clause_text = text.partition("?")
    parts = body.split("/")
    if len(parts) != 3 or not all(parts):
        raise InvalidArgumentError(
            f"clue id {text!r} is not concept/instance/attribute[?clauses]"
        )
    return SeriesKey(parts[0], parts[1], parts[2], parse_filter_clauses(clause_text))


@dataclass(frozen=True)
class Clue:
    """A series key plus the analysis window it was observed in."""

    key: SeriesKey
    window: TimeWindow

    def to_json(self) -> dict:
        return {"key": self.key.to_json(), "window": self.window.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "Clue":
        if not isinstance(obj, dict) or "key" not in obj or "window" not in obj:
            raise SchemaError("malformed clue", "clue")
        return cls(SeriesKey.from_json(obj["key"]), TimeWindow.from_json(obj["window"]))


class TimeSeriesData:
    """Uniformly sampled numeric series. ``label`` tags bag sub-series."""

    __slots__ = ("timestamps", "values", "label")

    def __init__(self, timestamps, values, label: str = ""):
        self.timestamps = np.asarray(timestamps, dtype=np.int64)
        self.values = np.asarray(values, dtype=np.float64)
        self.label = label
        if self.timestamps.shape != self.values.shape or self.timestamps.ndim != 1:
            raise InvalidArgumentError("series timestamps and values must be 1-d and equal length")
        if len(self.timestamps) > 1 and not np.all(np.diff(self.timestamps) > 0):
            raise InvalidArgumentError("series timestamps must be strictly increasing")

    def __len__(self) -> int:
        return len(self.timestamps)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TimeSeriesData)
            and self.label == other.label
            and np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self) -> str:
        return f"TimeSeriesData(n={len(self)}, label={self.label!r})"

    def clip(self, window: TimeWindow) -> "TimeSeriesData":
        mask = (self.timestamps >= window.start) & (self.timestamps < window.end)
        return TimeSeriesData(self.timestamps[mask], self.values[mask], self.label)

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "timestamps": [int(t) for t in self.timestamps],
            "values": [float(v) for v in self.values],
        }


class EventSequenceData:
    """Labelled intervals, sorted and non-overlapping. ``label`` tags set members."""

    __slots__ = ("intervals", "label")

    def __init__(self, intervals, label: str = ""):
        ivs = tuple((int(s), int(e), str(lab)) for s, e, lab in intervals)
        for s, e, _ in ivs:
            if e <= s:
                raise InvalidArgumentError(f"event interval [{s}, {e}) is empty")
        for (_, e0, _), (s1, _, _) in zip(ivs, ivs[1:]):
            if s1 < e0:
                raise InvalidArgumentError("event intervals overlap or are unsorted")
        self.intervals = ivs
        self.label = label

    def __len__(self) -> int:
        return len(self.intervals)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, EventSequenceData)
            and self.label == other.label
            and self.intervals == other.intervals
        )

    def __repr__(self) -> str:
        return f"EventSequenceData(n={len(self)}, label={self.label!r})"

    def clip(self, window: TimeWindow) -> "EventSequenceData":
        out = []
        for s, e, lab in self.intervals:
            s2, e2 = max(s, window.start), min(e, window.end)
            if e2 > s2:
                out.append((s2, e2, lab))
        return EventSequenceData(out, self.label)

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "intervals": [[s, e, lab] for s, e, lab in self.intervals],
        }


@dataclass(frozen=True)
class ClueData:
    """Resolved payload of a clue: series for number/bag, events for string/set."""

    kind: DataKind
    series: tuple[TimeSeriesData, ...] = ()
    events: tuple[EventSequenceData, ...] = ()


@dataclass(frozen=True)
class IncidentLog:
    timestamp: int
    customer: str
    area: str
    zone: str
    cluster: str
    status: str
    error_code: str
    os_type: str
    vm_size: str
    requested_vm_count: int

    def to_json(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "customer": self.customer,
            "area": self.area,
            "zone": self.zone,
            "cluster": self.cluster,
            "status": self.status,
            "error_code": self.error_code,
            "os_type": self.os_type,
            "vm_size": self.vm_size,
            "requested_vm_count": self.requested_vm_count,
        }


class RecordTable:
    """Columnar table of categorical records with integer timestamps."""

    def __init__(self, timestamps, columns: dict[str, list | np.ndarray]):
        self.timestamps = np.asarray(timestamps, dtype=np.int64)
        self.columns = {name: np.asarray(vals, dtype=object) for name, vals in columns.items()}
        for name, vals in self.columns.items():
            if vals.shape != self.timestamps.shape:
                raise InvalidArgumentError(f"record column {name!r} length mismatch")
        self._option_masks: dict[tuple[str, str], np.ndarray] = {}

    def __len__(self) -> int:
        return len(self.timestamps)

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise NotFoundError(f"record table has no column {name!r}")
        return self.columns[name]

    def _option_mask(self, column: str, option: str) -> np.ndarray:
        key = (column, option)
        got = self._option_masks.get(key)
        if got is None:
            got = self.column(column) == option
            self._option_masks[key] = got
        return got

    def predicate_mask(self, predicate: FilterPredicate | None) -> np.ndarray:
        mask = np.ones(len(self), dtype=bool)
        if predicate is None:
            return mask
        for clause in predicate.clauses:
            clause_mask = np.zeros(len(self), dtype=bool)
            for opt in clause.options:
                clause_mask |= self._option_mask(clause.filter, opt)
            mask &= clause_mask
        return mask

    def distinct(self, column: str) -> tuple[str, ...]:
        return tuple(sorted({str(v) for v in self.column(column)}))


# ---------------------------------------------------------------------------
# Ground truth


@dataclass(frozen=True)
class CascadeEntry:
    key: SeriesKey
    lag_samples: int

    def to_json(self) -> dict:
        return {"key": self.key.to_json(), "lag_samples": self.lag_samples}


@dataclass(frozen=True)
class GroundTruth:
    """The generator's answer key for one synthetic scenario.

    ``baseline_per_bin`` is the ambient incident rate per zone and bin;
    ``burst_per_bin`` is the mean rate inside the anomaly window.
    """

    cause: Clue
    cascade: tuple[CascadeEntry, ...]
    anomaly: SeriesKey
    incident_window: TimeWindow
    injected_error_code: str
    baseline_per_bin: float
    burst_per_bin: float

    def to_json(self) -> dict:
        return {
            "cause": self.cause.to_json(),
            "cascade": [c.to_json() for c in self.cascade],
            "anomaly": self.anomaly.to_json(),
            "incident_window": self.incident_window.to_json(),
            "injected_error_code": self.injected_error_code,
            "baseline_per_bin": self.baseline_per_bin,
            "burst_per_bin": self.burst_per_bin,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GroundTruth":
        try:
            return cls(
                cause=Clue.from_json(obj["cause"]),
                cascade=tuple(
                    CascadeEntry(SeriesKey.from_json(c["key"]), int(c["lag_samples"]))
                    for c in obj["cascade"]
                ),
                anomaly=SeriesKey.from_json(obj["anomaly"]),
                incident_window=TimeWindow.from_json(obj["incident_window"]),
                injected_error_code=obj["injected_error_code"],
                baseline_per_bin=float(obj["baseline_per_bin"]),
                burst_per_bin=float(obj["burst_per_bin"]),
            )
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed ground truth: {exc}", "ground_truth")


# ---------------------------------------------------------------------------
# Store


@dataclass(frozen=True)
class AttributeMeta:
    kind: DataKind
    record_backed: bool = False
    instance_field: str | None = None


@dataclass(frozen=True)
class RelationTopology:
    source_concept: str
    target_concept: str
    hierarchy: str
    pairs: tuple[tuple[str, str], ...]


class TelemetryStore:
    """In-memory dataset with typed queries; the local query engine."""

    def __init__(
        self,
        window: TimeWindow,
        step: int,
        instances: dict[str, tuple[str, ...]],
        attributes: dict[tuple[str, str], AttributeMeta],
        payloads: dict[tuple[str, str, str], tuple],
        relations: dict[str, RelationTopology] | None = None,
        records: RecordTable | None = None,
        incidents: tuple[IncidentLog, ...] = (),
        ground_truth: GroundTruth | None = None,
    ):
        window.require_nonempty()
        self.window = window
        self.step = step
        self.instances = {c: tuple(sorted(ids)) for c, ids in instances.items()}
        self.attributes = dict(attributes)
        self.payloads = dict(payloads)
        self.relations = dict(relations or {})
        self.records = records
        self.incidents = tuple(sorted(incidents, key=lambda i: (i.timestamp, i.customer, i.cluster)))
        self.ground_truth = ground_truth
        self._instance_sets = {c: frozenset(ids) for c, ids in self.instances.items()}
        self._fwd: dict[str, dict[str, tuple[str, ...]]] = {}
        self._rev: dict[str, dict[str, tuple[str, ...]]] = {}
        for rid, topo in self.relations.items():
            fwd: dict[str, list[str]] = {}
            rev: dict[str, list[str]] = {}
            for a, b in topo.pairs:
                fwd.setdefault(a, []).append(b)
                rev.setdefault(b, []).append(a)
            self._fwd[rid] = {k: tuple(sorted(v)) for k, v in fwd.items()}
            self._rev[rid] = {k: tuple(sorted(v)) for k, v in rev.items()}

    # -- existence -----------------------------------------------------

    def has_instance(self, concept: str, instance: str) -> bool:
        return instance in self._instance_sets.get(concept, frozenset())

    def _require_instance(self, concept: str, instance: str):
        if concept not in self.instances:
            raise NotFoundError(f"unknown concept {concept!r}")
        if not self.has_instance(concept, instance):
            raise NotFoundError(f"concept {concept!r} has no instance {instance!r}")

    def attribute_meta(self, concept: str, attribute: str) -> AttributeMeta:
        meta = self.attributes.get((concept, attribute))
        if meta is None:
            raise NotFoundError(f"no attribute {attribute!r} on concept {concept!r}")
        return meta

    def concept_attributes(self, concept: str) -> tuple[str, ...]:
        return tuple(sorted(a for (c, a) in self.attributes if c == concept))

    # -- topology ------------------------------------------------------

    def list_instances(
        self, concept: str, window: TimeWindow | None = None, parent: str | None = None
    ) -> tuple[str, ...]:
        """Instance ids in stable lexicographic order.

        Topology is static over a dataset's span, so ``window`` does not
        narrow the answer; it is validated when given. ``parent``
        restricts to children of that instance under the ``contains``
        relation targeting this concept.
        """
        if concept not in self.instances:
            raise NotFoundError(f"unknown concept {concept!r}")
        if window is not None:
            window.require_nonempty().clip_to(self.window)
        if parent is None:
            return self.instances[concept]
        for rid, topo in sorted(self.relations.items()):
            if topo.hierarchy == "contains" and topo.target_concept == concept:
                if parent in self._fwd[rid]:
                    return self._fwd[rid].get(parent, ())
        raise NotFoundError(f"no parent instance {parent!r} above concept {concept!r}")

    def containment_of(self, concept: str, instance: str) -> tuple[str, str, str] | None:
        """(relation id, parent concept, parent instance) under ``contains``."""
        self._require_instance(concept, instance)
        for rid, topo in sorted(self.relations.items()):
            if topo.hierarchy == "contains" and topo.target_concept == concept:
                parents = self._rev[rid].get(instance, ())
                if parents:
                    return rid, topo.source_concept, parents[0]
        return None

    def parent_of(self, concept: str, instance: str) -> tuple[str, str] | None:
        """(parent concept, parent instance) under ``contains``, if any."""
        got = self.containment_of(concept, instance)
        if got is None:
            return None
        return got[1], got[2]

    def related_instances(self, relation_id: str, instance: str) -> tuple[str, ...]:
        """Other-endpoint instances for ``instance`` under one relation.

        Works from either side: the store figures out which endpoint the
        instance belongs to.
        """
        topo = self.relations.get(relation_id)
        if topo is None:
            raise NotFoundError(f"unknown relation {relation_id!r}")
        if self.has_instance(topo.source_concept, instance):
            return self._fwd[relation_id].get(instance, ())
        if self.has_instance(topo.target_concept, instance):
            return self._rev[relation_id].get(instance, ())
        raise NotFoundError(
            f"instance {instance!r} is on neither side of relation {relation_id!r}"
        )

    # -- payloads ------------------------------------------------------

    def query_clue(self, key: SeriesKey, window: TimeWindow) -> ClueData:
        """Resolve a key inside ``window`` (must lie within the dataset span).

        Record-backed attributes materialize as per-sample counts of
        matching records; filters are only legal on those. Restricting
        the result of a wide query to a narrower window equals querying
        the narrow window directly.
        """
        self._require_instance(key.concept, key.instance)
        meta = self.attribute_meta(key.concept, key.attribute)
        window.require_nonempty()
        if window.start < self.window.start or window.end > self.window.end:
            raise InvalidArgumentError(
                f"window [{window.start}, {window.end}) exceeds dataset span "
                f"[{self.window.start}, {self.window.end})"
            )
        if key.filter is not None and not meta.record_backed:
            raise InvalidArgumentError(
                f"attribute {key.attribute!r} is not record-backed; filters do not apply"
            )
        if meta.record_backed:
            series = self.bin_records(key, window, self.step)
            return ClueData(kind=meta.kind, series=(series,))
        payload = self.payloads.get((key.concept, key.instance, key.attribute))
        if payload is None:
            raise NotFoundError(f"no payload stored for {key.clue_id}")
        if meta.kind.is_series:
            return ClueData(kind=meta.kind, series=tuple(s.clip(window) for s in payload))
        return ClueData(kind=meta.kind, events=tuple(e.clip(window) for e in payload))

    def bin_records(self, key: SeriesKey, window: TimeWindow, bin_seconds: int) -> TimeSeriesData:
        """Per-bin row counts of records matching instance and filter."""
        meta = self.attribute_meta(key.concept, key.attribute)
        if not meta.record_backed:
            raise InvalidArgumentError(f"attribute {key.attribute!r} is not record-backed")
        if self.records is None:
            raise NotFoundError("dataset has no record table")
        if bin_seconds <= 0 or window.duration % bin_seconds != 0:
            raise InvalidArgumentError(
                f"bin {bin_seconds}s must divide window length {window.duration}s"
            )
        n_bins = window.duration // bin_seconds
        mask = self.records.predicate_mask(key.filter)
        mask &= self.records.column(meta.instance_field) == key.instance
        mask &= (self.records.timestamps >= window.start) & (self.records.timestamps < window.end)
        ts = self.records.timestamps[mask]
        idx = (ts - window.start) // bin_seconds
        counts = np.bincount(idx, minlength=n_bins).astype(np.float64)
        stamps = window.start + np.arange(n_bins, dtype=np.int64) * bin_seconds
        return TimeSeriesData(stamps, counts)

    def record_support(self, key: SeriesKey, window: TimeWindow) -> int:
        """How many records match the key's instance and filter in window."""
        meta = self.attribute_meta(key.concept, key.attribute)
        if not meta.record_backed or self.records is None:
            raise InvalidArgumentError(f"attribute {key.attribute!r} is not record-backed")
        mask = self.records.predicate_mask(key.filter)
        mask &= self.records.column(meta.instance_field) == key.instance
        mask &= (self.records.timestamps >= window.start) & (self.records.timestamps < window.end)
        return int(mask.sum())

    def query_incidents(
        self, window: TimeWindow, predicate: FilterPredicate | None = None
    ) -> tuple[IncidentLog, ...]:
        window.require_nonempty()
        out = []
        for inc in self.incidents:
            if not window.contains(inc.timestamp):
                continue
            if predicate is not None:
                row = inc.to_json()
                keep = True
                for clause in predicate.clauses:
                    if clause.filter not in row:
                        raise NotFoundError(f"incidents have no field {clause.filter!r}")
                    if str(row[clause.filter]) not in clause.options:
                        keep = False
                        break
                if not keep:
                    continue
            out.append(inc)
        return tuple(out)

    # -- query DSL -----------------------------------------------------

    def execute(self, query: str):
        """Run one filled query-template command.

        Forms: ``instances <concept> [parent=<id>]``,
        ``traverse <relation> from=<id>``, and
        ``fetch <concept>.<attr> instance=<id> start=<s> end=<e>
        [where <clauses>]``.
        """
        text = query.strip()
        head = text.split(None, 1)[0] if text else ""
        if head == "instances":
            return self._exec_instances(text)
        if head == "traverse":
            return self._exec_traverse(text)
        if head == "fetch":
            return self._exec_fetch(text)
        raise InvalidArgumentError(f"unknown query command {head!r}")

    def _exec_instances(self, text: str) -> tuple[str, ...]:
        m = re.match(r"^instances\s+(\S+)(?:\s+parent=(\S+))?\s*$", text)
        if not m:
            raise InvalidArgumentError(f"malformed instances query: {text!r}")
        return self.list_instances(m.group(1), parent=m.group(2))

    def _exec_traverse(self, text: str) -> tuple[str, ...]:
        m = re.match(r"^traverse\s+(\S+)\s+from=(\S+)\s*$", text)
        if not m:
            raise InvalidArgumentError(f"malformed traverse query: {text!r}")
        return self.related_instances(m.group(1), m.group(2))

    def _exec_fetch(self, text: str) -> ClueData:
        body, _, clause_text = text.partition(" where ")
        m = re.match(
            r"^fetch\s+(\S+)\.(\S+)\s+instance=(\S+)\s+start=(-?\d+)\s+end=(-?\d+)\s*$", body
        )
        if not m:
            raise InvalidArgumentError(f"malformed fetch query: {text!r}")
        predicate = parse_filter_clauses(clause_text) if clause_text.strip() else None
        key = SeriesKey(m.group(1), m.group(2), m.group(3), predicate)
        return self.query_clue(key, TimeWindow(int(m.group(4)), int(m.group(5))))


def fill_template(template: str, **values) -> str:
    """Substitute DSL placeholders; unknown tokens raise a schema error."""
    def repl(match):
        token = match.group(1)
        if token not in values:
            raise SchemaError(f"template placeholder {{{token}}} has no binding", token)
        return str(values[token])

    return re.sub(r"\{([^{}]*)\}", repl, template)


# ---------------------------------------------------------------------------
# Dataset loading


def _read_csv_rows(path: Path, expected_header: list[str]) -> list[list[str]]:
    if not path.exists():
        raise NotFoundError(f"dataset file missing: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("file is empty", str(path))
        if header != expected_header:
            raise SchemaError(
                f"expected header {expected_header}, got {header}", f"{path}:1"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(expected_header):
                raise SchemaError(f"expected {len(expected_header)} fields", f"{path}:{lineno}")
            rows.append(row)
        return rows


def _load_series_csv(path: Path, label: str, step: int) -> TimeSeriesData:
    rows = _read_csv_rows(path, ["timestamp", "value"])
    try:
        ts = np.array([int(r[0]) for r in rows], dtype=np.int64)
        vals = np.array([float(r[1]) for r in rows], dtype=np.float64)
    except ValueError as exc:
        raise SchemaError(f"malformed numeric field: {exc}", str(path))
    if len(ts) > 1 and not np.all(np.diff(ts) == step):
        raise SchemaError(f"series is not on the uniform {step}s grid", str(path))
    return TimeSeriesData(ts, vals, label)


def _load_events_csv(path: Path, label: str) -> EventSequenceData:
    rows = _read_csv_rows(path, ["start", "end", "label"])
    try:
        intervals = [(int(r[0]), int(r[1]), r[2]) for r in rows]
    except ValueError as exc:
        raise SchemaError(f"malformed interval bound: {exc}", str(path))
    return EventSequenceData(intervals, label)


def load_dataset(path: str | Path) -> TelemetryStore:
    """Load a dataset directory into a store, validating consistency."""
    root = Path(path)
    manifest_path = root / "manifest.json"
    if not manifest_path.exists():
        raise NotFoundError(f"dataset manifest not found: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"manifest is not valid JSON: {exc}", str(manifest_path))
    try:
        window = TimeWindow.from_json(manifest["window"])
        step = int(manifest["step_seconds"])
        instances = {c: tuple(ids) for c, ids in manifest["concepts"].items()}
        relations = {
            rid: RelationTopology(
                source_concept=r["source"],
                target_concept=r["target"],
                hierarchy=r["hierarchy"],
                pairs=tuple((a, b) for a, b in r["pairs"]),
            )
            for rid, r in manifest["relations"].items()
        }
        attr_meta = {}
        for key, meta in manifest["attributes"].items():
            concept, attr = key.split("/")
            attr_meta[(concept, attr)] = AttributeMeta(
                kind=DataKind(meta["kind"]),
                record_backed=bool(meta.get("record_backed", False)),
                instance_field=meta.get("instance_field"),
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed manifest: {exc}", str(manifest_path))

    payloads: dict[tuple[str, str, str], tuple] = {}
    for key, entries in manifest.get("payloads", {}).items():
        try:
            concept, instance, attr = key.split("/")
        except ValueError:
            raise SchemaError(f"payload key {key!r} is not concept/instance/attribute", str(manifest_path))
        meta = attr_meta.get((concept, attr))
        if meta is None:
            raise SchemaError(f"payload {key!r} references undeclared attribute", str(manifest_path))
        loaded = []
        for entry in entries:
            fname = entry["file"]
            label = entry.get("label", "")
            fpath = root / fname
            if not fpath.exists():
                raise NotFoundError(f"payload {key!r} references missing file {fname}")
            if meta.kind.is_series:
                loaded.append(_load_series_csv(fpath, label, step))
            else:
                loaded.append(_load_events_csv(fpath, label))
        payloads[(concept, instance, attr)] = tuple(loaded)

    incidents: tuple[IncidentLog, ...] = ()
    inc_path = root / "incidents.csv"
    if inc_path.exists():
        header = [
            "timestamp", "customer", "area", "zone", "cluster",
            "status", "error_code", "os_type", "vm_size", "requested_vm_count",
        ]
        rows = _read_csv_rows(inc_path, header)
        try:
            incidents = tuple(
                IncidentLog(
                    timestamp=int(r[0]), customer=r[1], area=r[2], zone=r[3], cluster=r[4],
                    status=r[5], error_code=r[6], os_type=r[7], vm_size=r[8],
                    requested_vm_count=int(r[9]),
                )
                for r in rows
            )
        except ValueError as exc:
            raise SchemaError(f"malformed incident row: {exc}", str(inc_path))

    records = None
    rec_path = root / "records.csv"
    if rec_path.exists():
        header = ["timestamp", "area", "zone", "cluster", "customer", "error_code", "os_type", "vm_size", "status"]
        rows = _read_csv_rows(rec_path, header)
        try:
            ts = [int(r[0]) for r in rows]
        except ValueError as exc:
            raise SchemaError(f"malformed record timestamp: {exc}", str(rec_path))
        cols = {name: [r[i + 1] for r in rows] for i, name in enumerate(header[1:])}
        records = RecordTable(ts, cols)

    ground_truth = None
    gt_path = root / "ground_truth.json"
    if gt_path.exists():
        try:
            ground_truth = GroundTruth.from_json(json.loads(gt_path.read_text()))
        except json.JSONDecodeError as exc:
            raise SchemaError(f"ground truth is not valid JSON: {exc}", str(gt_path))

    store = TelemetryStore(
        window=window,
        step=step,
        instances=instances,
        attributes=attr_meta,
        payloads=payloads,
        relations=relations,
        records=records,
        incidents=incidents,
        ground_truth=ground_truth,
    )
    _check_topology(store)
    return store


def _check_topology(store: TelemetryStore):
    """Referential checks: relation pairs and incidents use known instances."""
    for rid, topo in store.relations.items():
        for a, b in topo.pairs:
            if not store.has_instance(topo.source_concept, a):
                raise SchemaError(f"relation {rid!r} pair references unknown {a!r}", rid)
            if not store.has_instance(topo.target_concept, b):
                raise SchemaError(f"relation {rid!r} pair references unknown {b!r}", rid)
    containment: dict[str, set[tuple[str, str]]] = {}
    for topo in store.relations.values():
        if topo.hierarchy == "contains":
            containment.setdefault(topo.target_concept, set()).update(
                (b, a) for a, b in topo.pairs
            )
    for inc in store.incidents:
        zone_pairs = containment.get("zone", set())
        if zone_pairs and (inc.zone, inc.area) not in zone_pairs:
            raise SchemaError(
                f"incident at {inc.timestamp} places zone {inc.zone!r} outside area {inc.area!r}",
                "incidents.csv",
            )
