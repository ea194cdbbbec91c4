"""Seeded random builders for graphs, stores, and sessions.

Tests that sweep many random instances (round trips, layout geometry,
expansion equivalence) build them here so every module draws the same
shapes. All builders take a numpy Generator and are deterministic in
it.
"""

from __future__ import annotations

import numpy as np

from caseboard.board import apply_event, empty_session
from caseboard.graph import (
    CONTAINS,
    LATERAL,
    AttributeDef,
    DataKind,
    EntityConcept,
    FilterDef,
    KnowledgeGraph,
    RelationDef,
)
from caseboard.store import (
    AttributeMeta,
    Clue,
    EventSequenceData,
    RelationTopology,
    SeriesKey,
    TelemetryStore,
    TimeSeriesData,
)
from caseboard.windows import TimeWindow

_WORDS = (
    "alpha", "bravo", "cedar", "delta", "ember", "fjord",
    "gamma", "haze", "iris", "juno", "karst", "lumen",
)
_SEMANTICS = ("contains", "feeds", "serves", "peers with", "backs")
_LABELS = ("red", "green", "blue", "gold")


def random_graph(rng: np.random.Generator) -> KnowledgeGraph:
    """A structurally valid graph with random concepts and relations."""
    n_concepts = int(rng.integers(1, 7))
    concepts = []
    ids = [f"c{i}_{_WORDS[int(rng.integers(len(_WORDS)))]}" for i in range(n_concepts)]
    for cid in ids:
        attrs = tuple(
            AttributeDef(
                id=f"a{j}",
                name=f"Attr {j}",
                kind=DataKind.NUMBER if rng.random() < 0.8 else DataKind.STRING,
                query_template=f"fetch {cid}.a{j} instance={{instance}} start={{t_start}} end={{t_end}}",
                primary_kpi=bool(j == 0 and rng.random() < 0.3),
            )
            for j in range(int(rng.integers(1, 4)))
        )
        filters = tuple(
            FilterDef(
                id=f"f{j}",
                name=f"Filter {j}",
                options=tuple(_LABELS[: int(rng.integers(1, len(_LABELS) + 1))]),
            )
            for j in range(int(rng.integers(0, 3)))
        )
        concepts.append(
            EntityConcept(
                id=cid,
                name=cid.title(),
                instance_query=f"instances {cid}",
                attributes=attrs,
                filters=filters,
            )
        )
    relations = []
    # A containment tree over concept indexes keeps the hierarchy acyclic.
    for i in range(1, n_concepts):
        p = int(rng.integers(0, i))
        rid = f"r_contains_{i}"
        relations.append(
            RelationDef(
                id=rid,
                source=ids[p],
                target=ids[i],
                semantic="contains",
                hierarchy=CONTAINS,
                traversal_query=f"traverse {rid} from={{instance}}",
            )
        )
    for j in range(int(rng.integers(0, n_concepts))):
        a, b = rng.integers(0, n_concepts, size=2)
        if a == b:
            continue
        rid = f"r_lat_{j}"
        relations.append(
            RelationDef(
                id=rid,
                source=ids[int(a)],
                target=ids[int(b)],
                semantic=str(_SEMANTICS[int(rng.integers(1, len(_SEMANTICS)))]),
                hierarchy=LATERAL,
                traversal_query=f"traverse {rid} from={{instance}}",
            )
        )
    return KnowledgeGraph(concepts=tuple(concepts), relations=tuple(relations))


def random_series(rng: np.random.Generator, window: TimeWindow, step: int) -> TimeSeriesData:
    """Noise with 0..3 injected level shifts, sampled on the store grid."""
    n = window.sample_count(step)
    x = rng.normal(0.0, 1.0, n)
    for _ in range(int(rng.integers(0, 4))):
        at = int(rng.integers(1, n))
        x[at:] += float(rng.uniform(4.0, 9.0) * rng.choice((-1.0, 1.0)))
    stamps = window.start + np.arange(n, dtype=np.int64) * step
    return TimeSeriesData(stamps, x)


def random_events(rng: np.random.Generator, window: TimeWindow, step: int) -> EventSequenceData:
    """A labelled partition of the window with 1..3 label switches."""
    n = window.sample_count(step)
    cuts = sorted({int(v) for v in rng.integers(1, n, size=int(rng.integers(1, 4)))})
    bounds = [0, *cuts, n]
    intervals = []
    label = str(_LABELS[int(rng.integers(len(_LABELS)))])
    for lo, hi in zip(bounds, bounds[1:]):
        intervals.append((window.start + lo * step, window.start + hi * step, label))
        others = [l for l in _LABELS if l != label]
        label = str(others[int(rng.integers(len(others)))])
    return EventSequenceData(intervals)


def store_for_graph(
    rng: np.random.Generator,
    graph: KnowledgeGraph,
    instances_per_concept: tuple[int, int] = (2, 4),
    n_samples: int = 96,
    step: int = 60,
) -> TelemetryStore:
    """A synthetic store matching the graph: every instance has data for
    every attribute, and relation pairs respect the containment tree."""
    window = TimeWindow(0, n_samples * step)
    instances: dict[str, tuple[str, ...]] = {}
    for concept in graph.concepts:
        count = int(rng.integers(instances_per_concept[0], instances_per_concept[1] + 1))
        instances[concept.id] = tuple(f"{concept.id}_i{k}" for k in range(count))
    attributes = {}
    payloads = {}
    for concept in graph.concepts:
        for attr in concept.attributes:
            attributes[(concept.id, attr.id)] = AttributeMeta(kind=attr.kind)
            for inst in instances[concept.id]:
                if attr.kind is DataKind.NUMBER:
                    payloads[(concept.id, inst, attr.id)] = (random_series(rng, window, step),)
                elif attr.kind is DataKind.STRING:
                    payloads[(concept.id, inst, attr.id)] = (random_events(rng, window, step),)
    relations = {}
    for rel in graph.relations:
        pairs = []
        if rel.hierarchy == CONTAINS:
            parents = instances[rel.source]
            for child in instances[rel.target]:
                pairs.append((str(parents[int(rng.integers(len(parents)))]), child))
        else:
            for a in instances[rel.source]:
                for b in instances[rel.target]:
                    if rng.random() < 0.5:
                        pairs.append((a, b))
        relations[rel.id] = RelationTopology(rel.source, rel.target, rel.hierarchy, tuple(pairs))
    return TelemetryStore(
        window=window,
        step=step,
        instances=instances,
        attributes=attributes,
        payloads=payloads,
        relations=relations,
    )


def random_session(rng: np.random.Generator, graph: KnowledgeGraph, max_cards: int = 30):
    """An event-built session: a random forest of linked cards plus
    standalone ones, each with 1..3 attribute cards, some annotations."""
    window = TimeWindow(0, 3600 * 24)
    session = empty_session(f"s{int(rng.integers(1 << 30))}", graph.version, window)
    concept = graph.concepts[0]
    relation = next((r for r in graph.relations if r.hierarchy == CONTAINS), None)
    n_cards = int(rng.integers(1, max_cards + 1))
    card_instances: list[str] = []
    for i in range(n_cards):
        inst = f"node{i}"
        clue = Clue(SeriesKey(concept.id, inst, concept.attributes[0].id), window)
        payload = {"clue": clue.to_json()}
        if card_instances and relation is not None and rng.random() < 0.7:
            origin = card_instances[int(rng.integers(len(card_instances)))]
            direction = "up" if rng.random() < 0.5 else "down"
            payload["origin"] = f"card:{concept.id}/{origin}"
            payload["direction"] = direction
            # the hop reads parent-first, so an upward expansion puts the
            # new instance on the relation's source side
            src, tgt = (inst, origin) if direction == "up" else (origin, inst)
            payload["path"] = [
                {"relation": relation.id, "source_instance": src, "target_instance": tgt}
            ]
        session = apply_event(graph, session, "add_clue", payload)
        card_instances.append(inst)
        for j in range(1, int(rng.integers(1, min(4, len(concept.attributes) + 1)))):
            extra = Clue(SeriesKey(concept.id, inst, concept.attributes[j].id), window)
            session = apply_event(graph, session, "add_clue", {"clue": extra.to_json()})
    for _ in range(int(rng.integers(0, 4))):
        kind = ("circle", "rectangle", "arrow", "text")[int(rng.integers(4))]
        geometry = {
            "circle": [10.0, 20.0, 5.0],
            "rectangle": [0.0, 0.0, 40.0, 30.0],
            "arrow": [0.0, 0.0, 15.0, 25.0],
            "text": [12.0, 34.0],
        }[kind]
        payload = {
            "kind": kind,
            "color": ("amber", "red", "green", "blue")[int(rng.integers(4))],
            "geometry": geometry,
        }
        if kind == "text":
            payload["text"] = "note"
        session = apply_event(graph, session, "add_annotation", payload)
    return session
