"""Synthetic cloud-capacity scenario generator.

Each scenario builds a small provider topology (areas containing zones
containing clusters, plus customers and allocation requests), lays down
noisy baseline telemetry, and injects one causal cascade: a build
version changes on one cluster, its reserved-but-unused VM count jumps
and its allocable node count drops one day later, and a burst of
allocation-failure incidents carrying one error code hits the owning
zone a day after that. The generator writes the answer key alongside
the data so recovery can be measured.

Everything is driven by one seeded generator in a fixed order, so equal
seed and spec produce byte-identical datasets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError
from .graph import (
    AttributeDef,
    CONTAINS,
    DataKind,
    EntityConcept,
    FilterDef,
    KnowledgeGraph,
    LATERAL,
    RelationDef,
    canonical_json,
    serialize_graph,
)
from .store import (
    AttributeMeta,
    CascadeEntry,
    Clue,
    EventSequenceData,
    GroundTruth,
    IncidentLog,
    RecordTable,
    RelationTopology,
    SeriesKey,
    TelemetryStore,
    TimeSeriesData,
)
from .windows import TimeWindow

ERROR_CODES = ("ConfigSyncFailure", "ImagePullTimeout", "NoRoomForAllocation", "QuotaExceeded")
OS_TYPES = ("Linux", "Windows")
VM_SIZES = ("Large", "Medium", "Small")
STATUSES = ("Failed/ComputeFailed", "Failed/Timeout")

INJECTED_ERROR_CODE = "NoRoomForAllocation"

_BASE_ERROR_WEIGHTS = (0.35, 0.30, 0.05, 0.30)


@dataclass(frozen=True)
class ScenarioSpec:
    areas: int = 2
    zones_per_area: int = 2
    clusters_per_zone: int = 3
    customers: int = 6
    allocations: int = 8
    days: int = 14
    step_seconds: int = 3600
    start: int = 1_700_000_000
    baseline_incident_rate: float = 9.0
    burst_incident_rate: float = 48.0
    onset_step_share: float = 0.85
    mix_drift_floor: float = 0.1
    burst_length: int = 30
    cause_lag: int = 24
    incident_lag: int = 48

    def __post_init__(self):
        if min(self.areas, self.zones_per_area, self.clusters_per_zone, self.customers, self.allocations) < 1:
            raise InvalidArgumentError("scenario sizes must be at least 1")
        if self.days < 5 or self.step_seconds <= 0:
            raise InvalidArgumentError("scenario needs at least 5 days and a positive step")
        if not 0.0 <= self.onset_step_share <= 1.0 or not 0.0 <= self.mix_drift_floor <= 1.0:
            raise InvalidArgumentError("onset_step_share and mix_drift_floor must be in [0, 1]")
        n = self.days * 24
        if self.incident_lag + self.burst_length + 24 >= n // 2:
            raise InvalidArgumentError("cascade does not fit inside the scenario span")

    @property
    def samples(self) -> int:
        return self.days * 24 * 3600 // self.step_seconds


def scenario_graph() -> KnowledgeGraph:
    """The scenario's knowledge graph: five concepts, nine relations."""

    def series_template(concept: str, attr: str) -> str:
        return f"fetch {concept}.{attr} instance={{instance}} start={{t_start}} end={{t_end}}"

    def record_template(concept: str, attr: str) -> str:
        return (
            f"fetch {concept}.{attr} instance={{instance}} "
            f"start={{t_start}} end={{t_end}} where {{filter_clauses}}"
        )

    # Zone and area refinement works over the two operational dimensions
    # of the use case; the customer concept carries the full set.
    core_filters = (
        FilterDef("error_code", "ErrorCode", ERROR_CODES),
        FilterDef("os_type", "OSType", OS_TYPES),
    )
    all_filters = core_filters + (
        FilterDef("status", "Status", STATUSES),
        FilterDef("vm_size", "VMSize", VM_SIZES),
    )
    concepts = (
        EntityConcept(
            id="area",
            name="Area",
            instance_query="instances area",
            attributes=(
                AttributeDef("build_version_count", "BuildVersionCount", DataKind.NUMBER, series_template("area", "build_version_count")),
                AttributeDef("incident_count", "IncidentCount", DataKind.NUMBER, record_template("area", "incident_count")),
                AttributeDef("unused_reserved_vms", "UnusedReservedVMs", DataKind.NUMBER, series_template("area", "unused_reserved_vms")),
            ),
            filters=core_filters,
        ),
        EntityConcept(
            id="zone",
            name="Zone",
            instance_query="instances zone",
            attributes=(
                AttributeDef("allocable_nodes", "AllocableNodes", DataKind.NUMBER, series_template("zone", "allocable_nodes")),
                AttributeDef("build_versions", "BuildVersions", DataKind.SET, series_template("zone", "build_versions")),
                AttributeDef("consumption_rate", "ConsumptionRate", DataKind.NUMBER, series_template("zone", "consumption_rate")),
                AttributeDef("error_code_count", "ErrorCodeCount", DataKind.BAG, series_template("zone", "error_code_count")),
                AttributeDef("incident_count", "IncidentCount", DataKind.NUMBER, record_template("zone", "incident_count"), primary_kpi=True),
                AttributeDef("total_normal_nodes", "TotalNormalNodes", DataKind.NUMBER, series_template("zone", "total_normal_nodes")),
                AttributeDef("unused_reserved_vms", "UnusedReservedVMs", DataKind.NUMBER, series_template("zone", "unused_reserved_vms")),
            ),
            filters=core_filters,
        ),
        EntityConcept(
            id="cluster",
            name="Cluster",
            instance_query="instances cluster",
            attributes=(
                AttributeDef("allocable_nodes", "AllocableNodes", DataKind.NUMBER, series_template("cluster", "allocable_nodes")),
                AttributeDef("build_version", "BuildVersion", DataKind.STRING, series_template("cluster", "build_version")),
                AttributeDef("stability", "Stability", DataKind.NUMBER, series_template("cluster", "stability")),
                AttributeDef("unused_reserved_vms", "UnusedReservedVMs", DataKind.NUMBER, series_template("cluster", "unused_reserved_vms")),
                AttributeDef("utilization", "Utilization", DataKind.NUMBER, series_template("cluster", "utilization")),
            ),
        ),
        EntityConcept(
            id="customer",
            name="Customer",
            instance_query="instances customer",
            attributes=(
                AttributeDef("incident_count", "IncidentCount", DataKind.NUMBER, record_template("customer", "incident_count")),
                AttributeDef("requested_vms", "RequestedVMs", DataKind.NUMBER, series_template("customer", "requested_vms")),
            ),
            filters=all_filters,
        ),
        EntityConcept(
            id="allocation",
            name="Allocation",
            instance_query="instances allocation",
            attributes=(
                AttributeDef("failure_rate", "FailureRate", DataKind.NUMBER, series_template("allocation", "failure_rate")),
                AttributeDef("request_count", "RequestCount", DataKind.NUMBER, series_template("allocation", "request_count")),
            ),
        ),
    )

    def rel(rid: str, source: str, target: str, semantic: str, hierarchy: str) -> RelationDef:
        return RelationDef(rid, source, target, semantic, hierarchy, f"traverse {rid} from={{instance}}")

    relations = (
        rel("area_contains_zone", "area", "zone", "contains", CONTAINS),
        rel("zone_contains_cluster", "zone", "cluster", "contains", CONTAINS),
        rel("customer_reserves_cluster", "customer", "cluster", "reserves capacity in", LATERAL),
        rel("customer_submits_allocation", "customer", "allocation", "submits", LATERAL),
        rel("allocation_targets_cluster", "allocation", "cluster", "targets", LATERAL),
        rel("allocation_requested_in_zone", "allocation", "zone", "is requested in", LATERAL),
        rel("customer_operates_in_area", "customer", "area", "operates in", LATERAL),
        rel("zone_serves_customer", "zone", "customer", "serves", LATERAL),
        rel("zone_peers_zone", "zone", "zone", "peers with", LATERAL),
    )
    return KnowledgeGraph(concepts=concepts, relations=relations)


def _noise_series(rng, n, mean, std):
    return mean + std * rng.standard_normal(n)


def generate_scenario(
    seed: int,
    spec: ScenarioSpec = ScenarioSpec(),
    out_dir: str | Path | None = None,
) -> tuple[KnowledgeGraph, TelemetryStore, GroundTruth]:
    """Build one scenario; optionally write it as a dataset directory."""
    rng = np.random.Generator(np.random.PCG64(seed))
    graph = scenario_graph()
    n = spec.samples
    step = spec.step_seconds
    window = TimeWindow(spec.start, spec.start + n * step)
    stamps = spec.start + np.arange(n, dtype=np.int64) * step

    areas = [f"Area{i + 1:02d}" for i in range(spec.areas)]
    zones = [f"Zone{i + 1:02d}" for i in range(spec.areas * spec.zones_per_area)]
    clusters = [f"Cluster{i + 1:02d}" for i in range(len(zones) * spec.clusters_per_zone)]
    customers = [f"Customer{i + 1:02d}" for i in range(spec.customers)]
    allocations = [f"Alloc{i + 1:02d}" for i in range(spec.allocations)]

    zone_area = {z: areas[i // spec.zones_per_area] for i, z in enumerate(zones)}
    cluster_zone = {c: zones[i // spec.clusters_per_zone] for i, c in enumerate(clusters)}
    cluster_area = {c: zone_area[cluster_zone[c]] for c in clusters}

    # -- cascade placement -------------------------------------------------
    t0 = int(rng.integers(int(n * 0.35), int(n * 0.55) + 1))
    t1 = t0 + spec.cause_lag
    t2 = t0 + spec.incident_lag
    t3 = min(t2 + spec.burst_length, n - 12)
    cause_cluster = clusters[int(rng.integers(len(clusters)))]
    cause_zone = cluster_zone[cause_cluster]
    cause_area = zone_area[cause_zone]

    # -- lateral topology --------------------------------------------------
    reserves: dict[str, list[str]] = {u: [] for u in customers}
    for u in customers:
        picks = rng.choice(len(clusters), size=min(len(clusters), int(rng.integers(1, 4))), replace=False)
        reserves[u] = sorted(clusters[int(i)] for i in picks)
    affected_customers = sorted(u for u in customers if cause_cluster in reserves[u])
    if not affected_customers:
        victim = customers[int(rng.integers(len(customers)))]
        reserves[victim] = sorted(set(reserves[victim]) | {cause_cluster})
        affected_customers = [victim]
    cause_customer = affected_customers[0]

    alloc_customer = {a: customers[i % len(customers)] for i, a in enumerate(allocations)}
    alloc_cluster = {}
    for i, a in enumerate(allocations):
        owned = reserves[alloc_customer[a]]
        alloc_cluster[a] = owned[int(rng.integers(len(owned)))]
    affected_allocs = sorted(a for a in allocations if alloc_cluster[a] == cause_cluster)
    if not affected_allocs:
        forced = sorted(a for a in allocations if alloc_customer[a] == cause_customer)[0]
        alloc_cluster[forced] = cause_cluster
        affected_allocs = [forced]

    relations = {
        "area_contains_zone": RelationTopology(
            "area", "zone", CONTAINS, tuple((zone_area[z], z) for z in zones)
        ),
        "zone_contains_cluster": RelationTopology(
            "zone", "cluster", CONTAINS, tuple((cluster_zone[c], c) for c in clusters)
        ),
        "customer_reserves_cluster": RelationTopology(
            "customer", "cluster", LATERAL,
            tuple((u, c) for u in customers for c in reserves[u]),
        ),
        "customer_submits_allocation": RelationTopology(
            "customer", "allocation", LATERAL,
            tuple(sorted((alloc_customer[a], a) for a in allocations)),
        ),
        "allocation_targets_cluster": RelationTopology(
            "allocation", "cluster", LATERAL, tuple((a, alloc_cluster[a]) for a in allocations)
        ),
        "allocation_requested_in_zone": RelationTopology(
            "allocation", "zone", LATERAL,
            tuple((a, cluster_zone[alloc_cluster[a]]) for a in allocations),
        ),
        "customer_operates_in_area": RelationTopology(
            "customer", "area", LATERAL,
            tuple((u, ar) for u in customers for ar in sorted({cluster_area[c] for c in reserves[u]})),
        ),
        "zone_serves_customer": RelationTopology(
            "zone", "customer", LATERAL,
            tuple(
                (z, u)
                for z in zones
                for u in customers
                if any(cluster_zone[c] == z for c in reserves[u])
            ),
        ),
        "zone_peers_zone": RelationTopology(
            "zone", "zone", LATERAL, tuple(zip(zones, zones[1:])),
        ),
    }

    # -- incidents ----------------------------------------------------------
    error_p = np.array(_BASE_ERROR_WEIGHTS)
    injected_idx = ERROR_CODES.index(INJECTED_ERROR_CODE)
    # In the affected zone the bad build rolls out between the cause time
    # and the end of the burst, shifting the failure mix: every other
    # error code decays toward a floor share while the injected code
    # absorbs the difference. Zone totals stay flat until the burst, so
    # the onset is the only jump, while inside the refinement window the
    # per-code baselines trend in opposite directions and any mixture
    # with a non-injected code scores a weaker trend than the pure one.
    progress = np.clip((np.arange(n) - t0) / max(t3 - t0, 1), 0.0, 1.0)
    drift = 1.0 - (1.0 - spec.mix_drift_floor) * progress
    cause_p = np.tile(error_p, (n, 1)) * drift[:, None]
    cause_p[:, injected_idx] = 0.0
    cause_p[:, injected_idx] = 1.0 - cause_p.sum(axis=1)
    rows: list[IncidentLog] = []
    for zi, z in enumerate(zones):
        zone_clusters = [c for c in clusters if cluster_zone[c] == z]
        counts = rng.poisson(np.full(n, spec.baseline_incident_rate))
        for i in range(n):
            p = cause_p[i] if z == cause_zone else error_p
            for _ in range(int(counts[i])):
                ts = int(stamps[i] + rng.integers(step))
                rows.append(
                    IncidentLog(
                        timestamp=ts,
                        customer=customers[int(rng.integers(len(customers)))],
                        area=zone_area[z],
                        zone=z,
                        cluster=zone_clusters[int(rng.integers(len(zone_clusters)))],
                        status=STATUSES[int(rng.integers(len(STATUSES)))],
                        error_code=str(rng.choice(ERROR_CODES, p=p)),
                        os_type=OS_TYPES[int(rng.integers(len(OS_TYPES)))],
                        vm_size=VM_SIZES[int(rng.integers(len(VM_SIZES)))],
                        requested_vm_count=int(rng.poisson(8)) + 1,
                    )
                )
    # The burst jumps straight to a large share of its peak (a rolling
    # monitor needs a clean break to alert on) and ramps the rest of the
    # way, keeping the injected slice trending upward while live. Its
    # counts carry narrow dispersion, not Poisson: a systemic capacity
    # failure rejects nearly every allocation that hits the bad cluster,
    # so per-bin counts track the smooth demand rate.
    ramp = (np.arange(t3 - t2, dtype=np.float64) + 1.0) / (t3 - t2)
    burst_shape = spec.onset_step_share + (1.0 - spec.onset_step_share) * ramp
    burst_rate = spec.burst_incident_rate * burst_shape
    burst_counts = np.maximum(
        np.rint(burst_rate * (1.0 + 0.08 * rng.standard_normal(t3 - t2))), 0.0
    ).astype(np.int64)
    for i in range(t2, t3):
        for _ in range(int(burst_counts[i - t2])):
            ts = int(stamps[i] + rng.integers(step))
            rows.append(
                IncidentLog(
                    timestamp=ts,
                    customer=cause_customer,
                    area=cause_area,
                    zone=cause_zone,
                    cluster=cause_cluster,
                    status="Failed/ComputeFailed",
                    error_code=INJECTED_ERROR_CODE,
                    os_type="Linux",
                    vm_size=str(rng.choice(VM_SIZES)),
                    requested_vm_count=int(rng.poisson(8)) + 1,
                )
            )
    rows.sort(key=lambda r: (r.timestamp, r.customer, r.cluster))
    incidents = tuple(rows)
    records = RecordTable(
        [r.timestamp for r in rows],
        {
            "area": [r.area for r in rows],
            "zone": [r.zone for r in rows],
            "cluster": [r.cluster for r in rows],
            "customer": [r.customer for r in rows],
            "error_code": [r.error_code for r in rows],
            "os_type": [r.os_type for r in rows],
            "vm_size": [r.vm_size for r in rows],
            "status": [r.status for r in rows],
        },
    )

    # -- series and event payloads ------------------------------------------
    payloads: dict[tuple[str, str, str], tuple] = {}

    def put_series(concept, instance, attr, values, label=""):
        payloads.setdefault((concept, instance, attr), ())
        payloads[(concept, instance, attr)] += (
            TimeSeriesData(stamps, np.asarray(values, dtype=np.float64), label),
        )

    cluster_unused: dict[str, np.ndarray] = {}
    cluster_allocable: dict[str, np.ndarray] = {}
    build_seqs: dict[str, EventSequenceData] = {}
    build_changes: dict[str, list[int]] = {}
    for c in clusters:
        unused = _noise_series(rng, n, 20.0, 1.5)
        allocable = _noise_series(rng, n, 120.0, 4.0)
        # The daily cycle stays well under the noise floor; a swing the
        # detector can segment would spray change points across every
        # cluster and drown the injected cascade in coincidences.
        utilization = 50.0 + 1.0 * np.sin(2.0 * np.pi * np.arange(n) / 24.0 + rng.uniform(0, 6.28)) + _noise_series(rng, n, 0.0, 3.0)
        stability = _noise_series(rng, n, 99.0, 0.3)
        changes: list[int] = []
        if c == cause_cluster:
            unused[t1:t3] += 35.0
            allocable[t1:t3] -= 60.0
            changes = [t0]
        elif rng.random() < 0.3:
            changes = [int(rng.integers(24, n - 24))]
        segments = []
        version = 1
        prev = 0
        for ch in changes:
            segments.append((int(stamps[prev]), int(stamps[ch]), f"v{version}.0"))
            version += 1
            prev = ch
        segments.append((int(stamps[prev]), int(window.end), f"v{version}.0"))
        build_seqs[c] = EventSequenceData(segments)
        build_changes[c] = changes
        cluster_unused[c] = unused
        cluster_allocable[c] = allocable
        put_series("cluster", c, "unused_reserved_vms", unused)
        put_series("cluster", c, "allocable_nodes", allocable)
        put_series("cluster", c, "utilization", utilization)
        put_series("cluster", c, "stability", stability)
        payloads[("cluster", c, "build_version")] = (build_seqs[c],)

    zone_incident_counts: dict[str, np.ndarray] = {}
    for z in zones:
        members = [c for c in clusters if cluster_zone[c] == z]
        put_series("zone", z, "unused_reserved_vms", sum(cluster_unused[c] for c in members))
        put_series("zone", z, "allocable_nodes", sum(cluster_allocable[c] for c in members))
        put_series("zone", z, "total_normal_nodes", _noise_series(rng, n, 800.0, 8.0))
        put_series("zone", z, "consumption_rate", _noise_series(rng, n, 0.6, 0.03))
        zone_rows = [r for r in rows if r.zone == z]
        zone_incident_counts[z] = np.bincount(
            [(r.timestamp - window.start) // step for r in zone_rows], minlength=n
        ).astype(float)
        for code in ERROR_CODES:
            code_counts = np.bincount(
                [(r.timestamp - window.start) // step for r in zone_rows if r.error_code == code],
                minlength=n,
            ).astype(float)
            put_series("zone", z, "error_code_count", code_counts, label=code)
        payloads[("zone", z, "build_versions")] = tuple(
            EventSequenceData(build_seqs[c].intervals, label=c) for c in members
        )

    for a in areas:
        member_zones = [z for z in zones if zone_area[z] == a]
        member_clusters = [c for c in clusters if cluster_area[c] == a]
        put_series(
            "area", a, "unused_reserved_vms",
            sum(cluster_unused[c] for c in member_clusters),
        )
        version_count = np.zeros(n)
        for i in range(n):
            t = int(stamps[i])
            active = set()
            for c in member_clusters:
                for s, e, lab in build_seqs[c].intervals:
                    if s <= t < e:
                        active.add(lab)
            version_count[i] = len(active)
        put_series("area", a, "build_version_count", version_count)

    for u in customers:
        requested = _noise_series(rng, n, 40.0, 5.0)
        if u == cause_customer:
            requested[t2:t3] += 30.0
        put_series("customer", u, "requested_vms", requested)

    for a in allocations:
        put_series("allocation", a, "request_count", rng.poisson(3.0, size=n).astype(float))
        failure = np.clip(_noise_series(rng, n, 0.05, 0.01), 0.0, 1.0)
        if a in affected_allocs:
            failure[t2:t3] = np.clip(failure[t2:t3] + 0.5, 0.0, 1.0)
        put_series("allocation", a, "failure_rate", failure)

    attributes = {
        ("area", "build_version_count"): AttributeMeta(DataKind.NUMBER),
        ("area", "incident_count"): AttributeMeta(DataKind.NUMBER, record_backed=True, instance_field="area"),
        ("area", "unused_reserved_vms"): AttributeMeta(DataKind.NUMBER),
        ("zone", "allocable_nodes"): AttributeMeta(DataKind.NUMBER),
        ("zone", "build_versions"): AttributeMeta(DataKind.SET),
        ("zone", "consumption_rate"): AttributeMeta(DataKind.NUMBER),
        ("zone", "error_code_count"): AttributeMeta(DataKind.BAG),
        ("zone", "incident_count"): AttributeMeta(DataKind.NUMBER, record_backed=True, instance_field="zone"),
        ("zone", "total_normal_nodes"): AttributeMeta(DataKind.NUMBER),
        ("zone", "unused_reserved_vms"): AttributeMeta(DataKind.NUMBER),
        ("cluster", "allocable_nodes"): AttributeMeta(DataKind.NUMBER),
        ("cluster", "build_version"): AttributeMeta(DataKind.STRING),
        ("cluster", "stability"): AttributeMeta(DataKind.NUMBER),
        ("cluster", "unused_reserved_vms"): AttributeMeta(DataKind.NUMBER),
        ("cluster", "utilization"): AttributeMeta(DataKind.NUMBER),
        ("customer", "incident_count"): AttributeMeta(DataKind.NUMBER, record_backed=True, instance_field="customer"),
        ("customer", "requested_vms"): AttributeMeta(DataKind.NUMBER),
        ("allocation", "failure_rate"): AttributeMeta(DataKind.NUMBER),
        ("allocation", "request_count"): AttributeMeta(DataKind.NUMBER),
    }

    truth = GroundTruth(
        cause=Clue(SeriesKey("cluster", cause_cluster, "build_version"), window),
        cascade=(
            CascadeEntry(SeriesKey("cluster", cause_cluster, "unused_reserved_vms"), spec.cause_lag),
            CascadeEntry(SeriesKey("cluster", cause_cluster, "allocable_nodes"), spec.cause_lag),
            CascadeEntry(SeriesKey("zone", cause_zone, "unused_reserved_vms"), spec.cause_lag),
            CascadeEntry(SeriesKey("zone", cause_zone, "allocable_nodes"), spec.cause_lag),
            CascadeEntry(SeriesKey("zone", cause_zone, "incident_count"), spec.incident_lag),
            CascadeEntry(SeriesKey("zone", cause_zone, "error_code_count"), spec.incident_lag),
            CascadeEntry(SeriesKey("customer", cause_customer, "incident_count"), spec.incident_lag),
        ),
        anomaly=SeriesKey("zone", cause_zone, "incident_count"),
        incident_window=TimeWindow(int(stamps[t2]), int(stamps[t3 - 1]) + step),
        injected_error_code=INJECTED_ERROR_CODE,
        baseline_per_bin=spec.baseline_incident_rate,
        burst_per_bin=float(
            spec.baseline_incident_rate + spec.burst_incident_rate * burst_shape.mean()
        ),
    )

    store = TelemetryStore(
        window=window,
        step=step,
        instances={
            "area": tuple(areas),
            "zone": tuple(zones),
            "cluster": tuple(clusters),
            "customer": tuple(customers),
            "allocation": tuple(allocations),
        },
        attributes=attributes,
        payloads=payloads,
        relations=relations,
        records=records,
        incidents=incidents,
        ground_truth=truth,
    )
    if out_dir is not None:
        write_dataset(Path(out_dir), graph, store, truth)
    return graph, store, truth


# ---------------------------------------------------------------------------
# Writing


def _series_filename(concept: str, instance: str, attr: str, label: str) -> str:
    safe = "".join(ch if ch.isalnum() else "-" for ch in label)
    suffix = f"__{safe}" if label else ""
    return f"{concept}__{instance}__{attr}{suffix}.csv"


def write_dataset(root: Path, graph: KnowledgeGraph, store: TelemetryStore, truth: GroundTruth | None):
    """Write a store as a dataset directory (deterministic bytes)."""
    root = Path(root)
    (root / "series").mkdir(parents=True, exist_ok=True)
    (root / "events").mkdir(parents=True, exist_ok=True)

    payload_index: dict[str, list[dict]] = {}
    for (concept, instance, attr), payload in sorted(store.payloads.items()):
        meta = store.attributes[(concept, attr)]
        entries = []
        for item in payload:
            fname = _series_filename(concept, instance, attr, item.label)
            if meta.kind.is_series:
                rel = f"series/{fname}"
                lines = ["timestamp,value"]
                lines += [f"{int(t)},{repr(float(v))}" for t, v in zip(item.timestamps, item.values)]
            else:
                rel = f"events/{fname}"
                lines = ["start,end,label"]
                lines += [f"{s},{e},{lab}" for s, e, lab in item.intervals]
            (root / rel).write_text("\n".join(lines) + "\n")
            entries.append({"file": rel, "label": item.label})
        payload_index[f"{concept}/{instance}/{attr}"] = entries

    manifest = {
        "window": store.window.to_json(),
        "step_seconds": store.step,
        "concepts": {c: list(ids) for c, ids in sorted(store.instances.items())},
        "relations": {
            rid: {
                "source": topo.source_concept,
                "target": topo.target_concept,
                "hierarchy": topo.hierarchy,
                "pairs": [list(p) for p in topo.pairs],
            }
            for rid, topo in sorted(store.relations.items())
        },
        "attributes": {
            f"{concept}/{attr}": {
                "kind": meta.kind.value,
                "record_backed": meta.record_backed,
                **({"instance_field": meta.instance_field} if meta.instance_field else {}),
            }
            for (concept, attr), meta in sorted(store.attributes.items())
        },
        "payloads": payload_index,
    }
    (root / "manifest.json").write_bytes(canonical_json(manifest) + b"\n")
    (root / "graph.json").write_bytes(serialize_graph(graph) + b"\n")

    inc_lines = ["timestamp,customer,area,zone,cluster,status,error_code,os_type,vm_size,requested_vm_count"]
    inc_lines += [
        f"{r.timestamp},{r.customer},{r.area},{r.zone},{r.cluster},{r.status},{r.error_code},{r.os_type},{r.vm_size},{r.requested_vm_count}"
        for r in store.incidents
    ]
    (root / "incidents.csv").write_text("\n".join(inc_lines) + "\n")

    rec_lines = ["timestamp,area,zone,cluster,customer,error_code,os_type,vm_size,status"]
    if store.records is not None:
        cols = store.records.columns
        for i in range(len(store.records)):
            rec_lines.append(
                f"{store.records.timestamps[i]},{cols['area'][i]},{cols['zone'][i]},{cols['cluster'][i]},"
                f"{cols['customer'][i]},{cols['error_code'][i]},{cols['os_type'][i]},{cols['vm_size'][i]},{cols['status'][i]}"
            )
    (root / "records.csv").write_text("\n".join(rec_lines) + "\n")

    if truth is not None:
        (root / "ground_truth.json").write_bytes(canonical_json(truth.to_json()) + b"\n")
