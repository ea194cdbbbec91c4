"""Knowledge-graph model: entity concepts, attributes, filters, relations.

The graph is declarative configuration. It names what telemetry exists
(concept attributes and their data kinds), how concepts connect
(``contains`` hierarchy edges and ``lateral`` peer edges), and which
query templates resolve instances and payloads. Documents interchange as
canonical JSON: arrays sorted by id, compact separators, sorted keys, so
equal graphs serialize to identical bytes.
"""

from __future__ import annotations

import enum
import hashlib
import json
import re
from dataclasses import dataclass, field

from .errors import GraphInvalidError, NotFoundError, SchemaError

# Placeholders the query-template DSL accepts. Any other braced token in a
# template is rejected at validation time.
TEMPLATE_PLACEHOLDERS = frozenset(
    {"instance", "parent", "t_start", "t_end", "filter_clauses"}
)

_PLACEHOLDER_RE = re.compile(r"\{([^{}]*)\}")

CONTAINS = "contains"
LATERAL = "lateral"
_HIERARCHIES = (CONTAINS, LATERAL)


class DataKind(str, enum.Enum):
    """What an attribute's payload looks like.

    ``number`` and ``bag`` resolve to time series (one and many);
    ``string`` and ``set`` resolve to event sequences (one and many).
    """

    NUMBER = "number"
    STRING = "string"
    SET = "set"
    BAG = "bag"

    @property
    def is_series(self) -> bool:
        return self in (DataKind.NUMBER, DataKind.BAG)

    @property
    def is_events(self) -> bool:
        return not self.is_series

    @property
    def is_multi(self) -> bool:
        return self in (DataKind.SET, DataKind.BAG)


class Direction(str, enum.Enum):
    """The five expansion directions around a clue."""

    UP = "up"
    DOWN = "down"
    LEFT = "left"
    RIGHT = "right"
    IN = "in"


@dataclass(frozen=True)
class AttributeDef:
    id: str
    name: str
    kind: DataKind
    query_template: str
    primary_kpi: bool = False


@dataclass(frozen=True)
class FilterDef:
    id: str
    name: str
    options: tuple[str, ...]


@dataclass(frozen=True)
class EntityConcept:
    id: str
    name: str
    instance_query: str
    attributes: tuple[AttributeDef, ...] = ()
    filters: tuple[FilterDef, ...] = ()

    def __post_init__(self):
        # Canonical member order at construction, so graphs built in any
        # order compare equal and serialize identically.
        object.__setattr__(self, "attributes", tuple(sorted(self.attributes, key=lambda a: a.id)))
        object.__setattr__(self, "filters", tuple(sorted(self.filters, key=lambda f: f.id)))

    def attribute(self, attr_id: str) -> AttributeDef:
        for a in self.attributes:
            if a.id == attr_id:
                return a
        raise NotFoundError(f"concept {self.id!r} has no attribute {attr_id!r}")

    def filter(self, filter_id: str) -> FilterDef:
        for f in self.filters:
            if f.id == filter_id:
                return f
        raise NotFoundError(f"concept {self.id!r} has no filter {filter_id!r}")


@dataclass(frozen=True)
class RelationDef:
    id: str
    source: str
    target: str
    semantic: str
    hierarchy: str
    traversal_query: str


@dataclass(frozen=True)
class KnowledgeGraph:
    concepts: tuple[EntityConcept, ...] = ()
    relations: tuple[RelationDef, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "concepts", tuple(sorted(self.concepts, key=lambda c: c.id)))
        object.__setattr__(self, "relations", tuple(sorted(self.relations, key=lambda r: r.id)))

    def concept(self, concept_id: str) -> EntityConcept:
        for c in self.concepts:
            if c.id == concept_id:
                return c
        raise NotFoundError(f"unknown concept {concept_id!r}")

    def relation(self, relation_id: str) -> RelationDef:
        for r in self.relations:
            if r.id == relation_id:
                return r
        raise NotFoundError(f"unknown relation {relation_id!r}")

    def has_concept(self, concept_id: str) -> bool:
        return any(c.id == concept_id for c in self.concepts)

    @property
    def version(self) -> str:
        """Content hash of the canonical form; sessions pin this."""
        return hashlib.sha256(serialize_graph(self, validate=False)).hexdigest()[:16]


@dataclass(frozen=True)
class Finding:
    element: str
    rule: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.findings


def _template_findings(element: str, template: str) -> list[Finding]:
    out = []
    for token in _PLACEHOLDER_RE.findall(template):
        if token not in TEMPLATE_PLACEHOLDERS:
            out.append(
                Finding(
                    element,
                    "unknown-placeholder",
                    f"template placeholder {{{token}}} is not one of "
                    f"{sorted(TEMPLATE_PLACEHOLDERS)}",
                )
            )
    return out


def _contains_cycle(graph: KnowledgeGraph) -> list[str]:
    """Concept ids on a cycle of the ``contains`` subgraph, empty if acyclic."""
    succ: dict[str, list[str]] = {c.id: [] for c in graph.concepts}
    indeg = {c.id: 0 for c in graph.concepts}
    for r in graph.relations:
        if r.hierarchy != CONTAINS:
            continue
        if r.source not in succ or r.target not in succ:
            continue
        succ[r.source].append(r.target)
        indeg[r.target] += 1
    queue = sorted(cid for cid, d in indeg.items() if d == 0)
    seen = 0
    while queue:
        cid = queue.pop()
        seen += 1
        for nxt in succ[cid]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                queue.append(nxt)
    if seen == len(indeg):
        return []
    return sorted(cid for cid, d in indeg.items() if d > 0)


def validate_graph(graph: KnowledgeGraph) -> ValidationReport:
    """Check structural rules; returns every finding rather than the first.

    Rules: unique ids at each level, non-empty filter options, known
    hierarchy tags, relations pointing at declared concepts, non-empty
    semantic labels, template placeholders drawn from the DSL set, and an
    acyclic ``contains`` subgraph.
    """
    findings: list[Finding] = []
    seen_concepts: set[str] = set()
    for c in graph.concepts:
        if c.id in seen_concepts:
            findings.append(Finding(c.id, "duplicate-concept-id", f"concept id {c.id!r} repeats"))
        seen_concepts.add(c.id)
        if not c.id:
            findings.append(Finding(c.id, "empty-id", "concept id is empty"))
        findings.extend(_template_findings(f"{c.id}.instance_query", c.instance_query))
        seen_attrs: set[str] = set()
        for a in c.attributes:
            el = f"{c.id}.{a.id}"
            if a.id in seen_attrs:
                findings.append(Finding(el, "duplicate-attribute-id", f"attribute id {a.id!r} repeats"))
            seen_attrs.add(a.id)
            findings.extend(_template_findings(el, a.query_template))
        seen_filters: set[str] = set()
        for f in c.filters:
            el = f"{c.id}.{f.id}"
            if f.id in seen_filters:
                findings.append(Finding(el, "duplicate-filter-id", f"filter id {f.id!r} repeats"))
            seen_filters.add(f.id)
            if not f.options:
                findings.append(Finding(el, "empty-filter-options", "filter declares no options"))
            if len(set(f.options)) != len(f.options):
                findings.append(Finding(el, "duplicate-filter-option", "filter options repeat"))
    seen_relations: set[str] = set()
    for r in graph.relations:
        if r.id in seen_relations:
            findings.append(Finding(r.id, "duplicate-relation-id", f"relation id {r.id!r} repeats"))
        seen_relations.add(r.id)
        for endpoint in (r.source, r.target):
            if endpoint not in seen_concepts:
                findings.append(
                    Finding(r.id, "dangling-relation", f"relation endpoint {endpoint!r} is not a declared concept")
                )
        if r.hierarchy not in _HIERARCHIES:
            findings.append(
                Finding(r.id, "bad-hierarchy", f"hierarchy must be one of {_HIERARCHIES}, got {r.hierarchy!r}")
            )
        if not r.semantic.strip():
            findings.append(Finding(r.id, "empty-semantic", "relation semantic label is empty"))
        findings.extend(_template_findings(f"{r.id}.traversal_query", r.traversal_query))
    for cid in _contains_cycle(graph):
        findings.append(Finding(cid, "hierarchy-cycle", "concept participates in a contains cycle"))
    return ValidationReport(tuple(findings))


def neighbors(
    graph: KnowledgeGraph, concept_id: str, direction: Direction
) -> list[tuple[RelationDef, EntityConcept]]:
    """Adjacent concepts reachable one hop away in ``direction``.

    up: sources of incoming ``contains`` relations (the parents).
    down: targets of outgoing ``contains`` relations (the children).
    right: the other endpoint of any ``lateral`` relation touching the
    concept. Results are ordered by relation id so traversal is stable.
    ``left`` and ``in`` do not leave the concept and yield nothing here.
    """
    direction = Direction(direction)
    graph.concept(concept_id)
    out: list[tuple[RelationDef, EntityConcept]] = []
    for r in sorted(graph.relations, key=lambda r: r.id):
        if direction is Direction.UP and r.hierarchy == CONTAINS and r.target == concept_id:
            out.append((r, graph.concept(r.source)))
        elif direction is Direction.DOWN and r.hierarchy == CONTAINS and r.source == concept_id:
            out.append((r, graph.concept(r.target)))
        elif direction is Direction.RIGHT and r.hierarchy == LATERAL and concept_id in (r.source, r.target):
            other = r.target if r.source == concept_id else r.source
            out.append((r, graph.concept(other)))
    return out


# ---------------------------------------------------------------------------
# JSON interchange


def _expect(obj, typ, path: str, what: str):
    if not isinstance(obj, typ):
        raise SchemaError(f"expected {what}, got {type(obj).__name__}", path)
    return obj


def _expect_keys(obj: dict, path: str, required: set[str], optional: set[str] = frozenset()):
    missing = required - set(obj)
    if missing:
        raise SchemaError(f"missing field {sorted(missing)[0]!r}", path)
    unknown = set(obj) - required - optional
    if unknown:
        raise SchemaError(f"unknown field {sorted(unknown)[0]!r}", path)


def _parse_attribute(obj, path: str) -> AttributeDef:
    _expect(obj, dict, path, "object")
    _expect_keys(obj, path, {"id", "name", "kind", "query_template"}, {"primary_kpi"})
    kind_raw = _expect(obj["kind"], str, f"{path}.kind", "string")
    try:
        kind = DataKind(kind_raw)
    except ValueError:
        raise SchemaError(
            f"kind must be one of {[k.value for k in DataKind]}, got {kind_raw!r}", f"{path}.kind"
        )
    return AttributeDef(
        id=_expect(obj["id"], str, f"{path}.id", "string"),
        name=_expect(obj["name"], str, f"{path}.name", "string"),
        kind=kind,
        query_template=_expect(obj["query_template"], str, f"{path}.query_template", "string"),
        primary_kpi=_expect(obj.get("primary_kpi", False), bool, f"{path}.primary_kpi", "boolean"),
    )


def _parse_filter(obj, path: str) -> FilterDef:
    _expect(obj, dict, path, "object")
    _expect_keys(obj, path, {"id", "name", "options"})
    options = _expect(obj["options"], list, f"{path}.options", "array")
    return FilterDef(
        id=_expect(obj["id"], str, f"{path}.id", "string"),
        name=_expect(obj["name"], str, f"{path}.name", "string"),
        options=tuple(
            _expect(o, str, f"{path}.options[{i}]", "string") for i, o in enumerate(options)
        ),
    )


def _parse_concept(obj, path: str) -> EntityConcept:
    _expect(obj, dict, path, "object")
    _expect_keys(obj, path, {"id", "name", "instance_query"}, {"attributes", "filters"})
    attrs = _expect(obj.get("attributes", []), list, f"{path}.attributes", "array")
    filters = _expect(obj.get("filters", []), list, f"{path}.filters", "array")
    return EntityConcept(
        id=_expect(obj["id"], str, f"{path}.id", "string"),
        name=_expect(obj["name"], str, f"{path}.name", "string"),
        instance_query=_expect(obj["instance_query"], str, f"{path}.instance_query", "string"),
        attributes=tuple(_parse_attribute(a, f"{path}.attributes[{i}]") for i, a in enumerate(attrs)),
        filters=tuple(_parse_filter(f, f"{path}.filters[{i}]") for i, f in enumerate(filters)),
    )


def _parse_relation(obj, path: str) -> RelationDef:
    _expect(obj, dict, path, "object")
    _expect_keys(obj, path, {"id", "source", "target", "semantic", "hierarchy", "traversal_query"})
    hierarchy = _expect(obj["hierarchy"], str, f"{path}.hierarchy", "string")
    if hierarchy not in _HIERARCHIES:
        raise SchemaError(f"hierarchy must be one of {_HIERARCHIES}, got {hierarchy!r}", f"{path}.hierarchy")
    return RelationDef(
        id=_expect(obj["id"], str, f"{path}.id", "string"),
        source=_expect(obj["source"], str, f"{path}.source", "string"),
        target=_expect(obj["target"], str, f"{path}.target", "string"),
        semantic=_expect(obj["semantic"], str, f"{path}.semantic", "string"),
        hierarchy=hierarchy,
        traversal_query=_expect(obj["traversal_query"], str, f"{path}.traversal_query", "string"),
    )


def parse_graph(document: bytes | str) -> KnowledgeGraph:
    """Parse and validate a graph document.

    Structural problems and validation findings both raise ``SchemaError``
    naming the offending element, so a parsed graph is always usable.
    """
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        raw = json.loads(document)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"document is not valid JSON: {exc}", "$")
    _expect(raw, dict, "$", "object")
    _expect_keys(raw, "$", {"concepts", "relations"})
    concepts = _expect(raw["concepts"], list, "concepts", "array")
    relations = _expect(raw["relations"], list, "relations", "array")
    graph = KnowledgeGraph(
        concepts=tuple(_parse_concept(c, f"concepts[{i}]") for i, c in enumerate(concepts)),
        relations=tuple(_parse_relation(r, f"relations[{i}]") for i, r in enumerate(relations)),
    )
    report = validate_graph(graph)
    if not report.ok:
        first = report.findings[0]
        raise SchemaError(f"{first.message} [{first.rule}]", first.element)
    return graph


def graph_to_dict(graph: KnowledgeGraph) -> dict:
    """Canonical plain-dict form: every field present, arrays sorted by id."""
    return {
        "concepts": [
            {
                "id": c.id,
                "name": c.name,
                "instance_query": c.instance_query,
                "attributes": [
                    {
                        "id": a.id,
                        "name": a.name,
                        "kind": a.kind.value,
                        "query_template": a.query_template,
                        "primary_kpi": a.primary_kpi,
                    }
                    for a in sorted(c.attributes, key=lambda a: a.id)
                ],
                "filters": [
                    {"id": f.id, "name": f.name, "options": list(f.options)}
                    for f in sorted(c.filters, key=lambda f: f.id)
                ],
            }
            for c in sorted(graph.concepts, key=lambda c: c.id)
        ],
        "relations": [
            {
                "id": r.id,
                "source": r.source,
                "target": r.target,
                "semantic": r.semantic,
                "hierarchy": r.hierarchy,
                "traversal_query": r.traversal_query,
            }
            for r in sorted(graph.relations, key=lambda r: r.id)
        ],
    }


def canonical_json(obj) -> bytes:
    """Deterministic JSON bytes: sorted keys, compact separators, UTF-8."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def serialize_graph(graph: KnowledgeGraph, validate: bool = True) -> bytes:
    """Canonical bytes for a graph; refuses invalid graphs with the report."""
    if validate:
        report = validate_graph(graph)
        if not report.ok:
            raise GraphInvalidError(report)
    return canonical_json(graph_to_dict(graph))
