"""Knowledge-graph model: validation rules, neighbors, round trips."""

from __future__ import annotations

import json

import numpy as np
import pytest

from caseboard.errors import NotFoundError, SchemaError
from caseboard.graph import (
    CONTAINS,
    LATERAL,
    AttributeDef,
    DataKind,
    Direction,
    EntityConcept,
    FilterDef,
    KnowledgeGraph,
    RelationDef,
    graph_to_dict,
    neighbors,
    parse_graph,
    serialize_graph,
    validate_graph,
)
from generators import random_graph


def tiny_graph(**overrides) -> KnowledgeGraph:
    concepts = overrides.pop(
        "concepts",
        (
            EntityConcept(
                id="zone",
                name="Zone",
                instance_query="instances zone",
                attributes=(
                    AttributeDef("incident_count", "IncidentCount", DataKind.NUMBER,
                                 "fetch zone.incident_count instance={instance} start={t_start} end={t_end}"),
                ),
                filters=(FilterDef("error_code", "ErrorCode", ("A", "B")),),
            ),
            EntityConcept(
                id="cluster",
                name="Cluster",
                instance_query="instances cluster",
                attributes=(
                    AttributeDef("utilization", "Utilization", DataKind.NUMBER,
                                 "fetch cluster.utilization instance={instance} start={t_start} end={t_end}"),
                ),
            ),
        ),
    )
    relations = overrides.pop(
        "relations",
        (
            RelationDef("zone_contains_cluster", "zone", "cluster", "contains",
                        CONTAINS, "traverse zone_contains_cluster from={instance}"),
        ),
    )
    return KnowledgeGraph(concepts=concepts, relations=relations, **overrides)


class TestValidation:
    def test_valid_graph_has_no_findings(self):
        assert validate_graph(tiny_graph()).ok

    def test_duplicate_concept_id(self):
        g = tiny_graph()
        dup = KnowledgeGraph(concepts=g.concepts + (g.concepts[0],), relations=g.relations)
        report = validate_graph(dup)
        assert any(f.rule == "duplicate-concept-id" for f in report.findings)

    def test_unknown_placeholder(self):
        bad = EntityConcept(
            id="x", name="X", instance_query="instances {nope}",
            attributes=(AttributeDef("a", "A", DataKind.NUMBER, "fetch x.a instance={instance} start={t_start} end={t_end}"),),
        )
        report = validate_graph(KnowledgeGraph(concepts=(bad,), relations=()))
        assert any(f.rule == "unknown-placeholder" for f in report.findings)

    def test_dangling_relation(self):
        rel = RelationDef("r", "zone", "ghost", "contains", CONTAINS, "traverse r from={instance}")
        g = tiny_graph()
        report = validate_graph(KnowledgeGraph(concepts=g.concepts, relations=g.relations + (rel,)))
        assert any(f.rule == "dangling-relation" for f in report.findings)

    def test_empty_semantic(self):
        rel = RelationDef("r2", "zone", "cluster", "", LATERAL, "traverse r2 from={instance}")
        g = tiny_graph()
        report = validate_graph(KnowledgeGraph(concepts=g.concepts, relations=g.relations + (rel,)))
        assert any(f.rule == "empty-semantic" for f in report.findings)

    def test_hierarchy_cycle(self):
        back = RelationDef("cluster_contains_zone", "cluster", "zone", "contains",
                           CONTAINS, "traverse cluster_contains_zone from={instance}")
        g = tiny_graph()
        report = validate_graph(KnowledgeGraph(concepts=g.concepts, relations=g.relations + (back,)))
        assert any(f.rule == "hierarchy-cycle" for f in report.findings)

    def test_duplicate_filter_option(self):
        bad = EntityConcept(
            id="y", name="Y", instance_query="instances y",
            attributes=(AttributeDef("a", "A", DataKind.NUMBER, "fetch y.a instance={instance} start={t_start} end={t_end}"),),
            filters=(FilterDef("f", "F", ("A", "A")),),
        )
        report = validate_graph(KnowledgeGraph(concepts=(bad,), relations=()))
        assert any(f.rule == "duplicate-filter-option" for f in report.findings)

    def test_parse_rejects_invalid_graph_with_rule_id(self):
        g = tiny_graph()
        doc = graph_to_dict(g)
        doc["relations"][0]["target"] = "ghost"
        with pytest.raises(SchemaError) as err:
            parse_graph(json.dumps(doc))
        assert "dangling-relation" in str(err.value)


class TestNeighbors:
    def test_up_reaches_containing_concept(self):
        g = tiny_graph()
        got = neighbors(g, "cluster", Direction.UP)
        assert [(r.id, c.id) for r, c in got] == [("zone_contains_cluster", "zone")]

    def test_down_reaches_contained_concept(self):
        g = tiny_graph()
        got = neighbors(g, "zone", Direction.DOWN)
        assert [(r.id, c.id) for r, c in got] == [("zone_contains_cluster", "cluster")]

    def test_right_follows_lateral_both_ways(self):
        lat = RelationDef("zone_peers", "zone", "cluster", "peers with", LATERAL,
                          "traverse zone_peers from={instance}")
        g = tiny_graph()
        g2 = KnowledgeGraph(concepts=g.concepts, relations=g.relations + (lat,))
        assert [(r.id, c.id) for r, c in neighbors(g2, "zone", Direction.RIGHT)] == [("zone_peers", "cluster")]
        assert [(r.id, c.id) for r, c in neighbors(g2, "cluster", Direction.RIGHT)] == [("zone_peers", "zone")]

    def test_left_and_in_have_no_graph_neighbors(self):
        g = tiny_graph()
        assert neighbors(g, "zone", Direction.LEFT) == []
        assert neighbors(g, "zone", Direction.IN) == []

    def test_unknown_concept_rejected(self):
        with pytest.raises(NotFoundError):
            neighbors(tiny_graph(), "ghost", Direction.UP)


class TestRoundTrip:
    def test_parse_serialize_identity_fixed(self):
        g = tiny_graph()
        assert parse_graph(serialize_graph(g)) == g

    def test_canonical_stability(self):
        g = tiny_graph()
        once = serialize_graph(g)
        assert serialize_graph(parse_graph(once)) == once

    def test_version_tracks_content(self):
        g = tiny_graph()
        g2 = KnowledgeGraph(concepts=g.concepts, relations=())
        assert g.version != g2.version
        assert parse_graph(serialize_graph(g)).version == g.version

    def test_round_trip_on_random_graphs(self):
        rng = np.random.Generator(np.random.PCG64(42))
        for _ in range(25):
            g = random_graph(rng)
            assert validate_graph(g).ok
            blob = serialize_graph(g)
            back = parse_graph(blob)
            assert back == g
            assert serialize_graph(back) == blob

    def test_concept_order_is_canonical(self):
        g = tiny_graph()
        swapped = KnowledgeGraph(concepts=tuple(reversed(g.concepts)), relations=g.relations)
        assert swapped == g
        assert serialize_graph(swapped) == serialize_graph(g)

    def test_parse_error_names_path(self):
        with pytest.raises(SchemaError):
            parse_graph("{\"concepts\": 5}")
        with pytest.raises(SchemaError):
            parse_graph("not json")
