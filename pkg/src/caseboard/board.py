"""Event-sourced investigation board.

A session is an immutable value: entity cards (one per entity instance,
holding attribute cards for each clue), reasoning links annotated with
machine notes, and freehand annotations. All state changes flow through
:func:`apply_event`, which validates, appends the event to the
append-only history, and returns a new session; replaying the history
from an empty session reproduces the state bit for bit.

Validating a clue flips its card from ``clue`` to ``evidence``; on a
card that is already evidence it is a no-op that leaves the session
object untouched and records nothing. Adding a clue whose instance is
new to the board creates the entity card and, when the event carries an
origin and relation path, the reasoning link narrating how the clue was
found.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, replace

from .errors import AlreadyExistsError, InvalidArgumentError, NotFoundError, SchemaError
from .expand import PathHop
from .graph import DataKind, Direction, KnowledgeGraph, canonical_json
from .notes import render_collection_note
from .store import Clue, TelemetryStore
from .windows import TimeWindow

CHART_FOR_KIND = {
    DataKind.NUMBER: "line",
    DataKind.BAG: "line",
    DataKind.STRING: "gantt",
    DataKind.SET: "gantt",
}

CLUE = "clue"
EVIDENCE = "evidence"

LINK_DIRECTIONS = ("up", "down", "lateral")

# Expansion direction -> reasoning-link direction.
LINK_DIRECTION_FOR = {
    Direction.UP: "up",
    Direction.DOWN: "down",
    Direction.LEFT: "lateral",
    Direction.RIGHT: "lateral",
}

ANNOTATION_KINDS = {"circle": 3, "rectangle": 4, "arrow": 4, "text": 2}

# Fixed palette: each color carries a reading role in exports.
PALETTE = {
    "amber": "hypothesis",
    "red": "conclusion",
    "green": "mitigation",
    "blue": "note",
}

EVENT_KINDS = (
    "add_clue",
    "validate_clue",
    "remove_clue",
    "add_link",
    "add_annotation",
    "remove_annotation",
)


@dataclass(frozen=True)
class AttributeCard:
    id: str
    clue: Clue
    state: str
    chart: str

    def to_json(self) -> dict:
        return {"id": self.id, "clue": self.clue.to_json(), "state": self.state, "chart": self.chart}


@dataclass(frozen=True)
class EntityCard:
    id: str
    concept: str
    instance: str
    attributes: tuple[AttributeCard, ...]
    position: tuple[float, float] = (0.0, 0.0)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "concept": self.concept,
            "instance": self.instance,
            "attributes": [a.to_json() for a in self.attributes],
            "position": list(self.position),
        }


@dataclass(frozen=True)
class ReasoningLink:
    id: str
    source: str
    target: str
    direction: str
    path: tuple[PathHop, ...]
    note: str

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "source": self.source,
            "target": self.target,
            "direction": self.direction,
            "path": [h.to_json() for h in self.path],
            "note": self.note,
        }


@dataclass(frozen=True)
class Annotation:
    id: str
    kind: str
    geometry: tuple[float, ...]
    color: str
    text: str = ""

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "geometry": list(self.geometry),
            "color": self.color,
            "text": self.text,
        }


@dataclass(frozen=True)
class BoardEvent:
    seq: int
    kind: str
    payload: dict

    def to_json(self) -> dict:
        return {"seq": self.seq, "kind": self.kind, "payload": self.payload}


@dataclass(frozen=True)
class InvestigationSession:
    id: str
    graph_version: str
    window: TimeWindow
    cards: tuple[EntityCard, ...] = ()
    links: tuple[ReasoningLink, ...] = ()
    annotations: tuple[Annotation, ...] = ()
    history: tuple[BoardEvent, ...] = ()
    next_link: int = 1
    next_annotation: int = 1

    def card_for_instance(self, concept: str, instance: str) -> EntityCard | None:
        for c in self.cards:
            if c.concept == concept and c.instance == instance:
                return c
        return None

    def card(self, card_id: str) -> EntityCard:
        for c in self.cards:
            if c.id == card_id:
                return c
        raise NotFoundError(f"no entity card {card_id!r}")

    def find_attribute(self, attr_card_id: str) -> tuple[EntityCard, AttributeCard]:
        for c in self.cards:
            for a in c.attributes:
                if a.id == attr_card_id:
                    return c, a
        raise NotFoundError(f"no attribute card {attr_card_id!r}")

    def evidence_clues(self) -> list[Clue]:
        return [a.clue for c in self.cards for a in c.attributes if a.state == EVIDENCE]

    def resolve_card(self, ref: str) -> EntityCard:
        """Find an entity card by its id or by one of its clue ids."""
        for c in self.cards:
            if c.id == ref:
                return c
        for c in self.cards:
            for a in c.attributes:
                if a.id == ref:
                    return c
        raise NotFoundError(f"no card on the board matches {ref!r}")


def entity_card_id(concept: str, instance: str) -> str:
    return f"card:{concept}/{instance}"


def empty_session(session_id: str, graph_version: str, window: TimeWindow) -> InvestigationSession:
    return InvestigationSession(id=session_id, graph_version=graph_version, window=window)


def _normalize_payload(payload: dict) -> dict:
    """JSON round trip so replayed and imported payloads compare equal."""
    try:
        return json.loads(json.dumps(payload))
    except (TypeError, ValueError) as exc:
        raise InvalidArgumentError(f"event payload is not JSON-serializable: {exc}")


def _with_history(session: InvestigationSession, kind: str, payload: dict, **changes):
    event = BoardEvent(seq=len(session.history) + 1, kind=kind, payload=payload)
    return replace(session, history=session.history + (event,), **changes)


def _apply_add_clue(graph, session, payload):
    clue = Clue.from_json(payload.get("clue") or {})
    state = payload.get("state", CLUE)
    if state not in (CLUE, EVIDENCE):
        raise InvalidArgumentError(f"clue state must be clue or evidence, got {state!r}")
    concept = graph.concept(clue.key.concept)
    attr = concept.attribute(clue.key.attribute)
    attr_card = AttributeCard(
        id=clue.key.clue_id, clue=clue, state=state, chart=CHART_FOR_KIND[attr.kind]
    )
    for c in session.cards:
        for a in c.attributes:
            if a.id == attr_card.id:
                raise AlreadyExistsError(f"clue {attr_card.id} is already on the board")
    existing = session.card_for_instance(clue.key.concept, clue.key.instance)
    if existing is not None:
        cards = tuple(
            replace(c, attributes=c.attributes + (attr_card,)) if c.id == existing.id else c
            for c in session.cards
        )
        return session, cards, session.links, session.next_link
    card = EntityCard(
        id=entity_card_id(clue.key.concept, clue.key.instance),
        concept=clue.key.concept,
        instance=clue.key.instance,
        attributes=(attr_card,),
    )
    cards = session.cards + (card,)
    links = session.links
    next_link = session.next_link
    origin = payload.get("origin")
    path = tuple(PathHop.from_json(h) for h in payload.get("path") or ())
    if origin is not None and path:
        origin_card = session.resolve_card(origin)
        direction = payload.get("direction")
        link_dir = LINK_DIRECTION_FOR.get(Direction(direction), "lateral") if direction else "lateral"
        link = ReasoningLink(
            id=f"l{next_link}",
            source=origin_card.id,
            target=card.id,
            direction=link_dir,
            path=path,
            note=render_collection_note(graph, path),
        )
        links = links + (link,)
        next_link += 1
    return session, cards, links, next_link


def apply_event(
    graph: KnowledgeGraph, session: InvestigationSession, kind: str, payload: dict
) -> InvestigationSession:
    """Apply one event, returning the new session.

    Raises before touching anything when the event is invalid, so a
    failed apply leaves the session usable. The one silent case is
    validating a card that is already evidence: the same session object
    comes back and no history entry is recorded.
    """
    if kind not in EVENT_KINDS:
        raise InvalidArgumentError(f"unknown event kind {kind!r}")
    payload = _normalize_payload(payload)

    if kind == "add_clue":
        _, cards, links, next_link = _apply_add_clue(graph, session, payload)
        return _with_history(session, kind, payload, cards=cards, links=links, next_link=next_link)

    if kind == "validate_clue":
        card_id = payload.get("card", "")
        entity, attr = session.find_attribute(card_id)
        if attr.state == EVIDENCE:
            return session
        cards = tuple(
            replace(
                c,
                attributes=tuple(
                    replace(a, state=EVIDENCE) if a.id == card_id else a for a in c.attributes
                ),
            )
            if c.id == entity.id
            else c
            for c in session.cards
        )
        return _with_history(session, kind, payload, cards=cards)

    if kind == "remove_clue":
        card_id = payload.get("card", "")
        entity, attr = session.find_attribute(card_id)
        remaining = tuple(a for a in entity.attributes if a.id != card_id)
        if remaining:
            cards = tuple(
                replace(c, attributes=remaining) if c.id == entity.id else c for c in session.cards
            )
            links = session.links
        else:
            cards = tuple(c for c in session.cards if c.id != entity.id)
            links = tuple(
                l for l in session.links if l.source != entity.id and l.target != entity.id
            )
        return _with_history(session, kind, payload, cards=cards, links=links)

    if kind == "add_link":
        source = session.card(payload.get("source", "")).id
        target = session.card(payload.get("target", "")).id
        direction = payload.get("direction", "lateral")
        if direction not in LINK_DIRECTIONS:
            raise InvalidArgumentError(f"link direction must be one of {LINK_DIRECTIONS}")
        path = tuple(PathHop.from_json(h) for h in payload.get("path") or ())
        note = payload.get("note")
        if note is None:
            note = render_collection_note(graph, path) if path else ""
        link = ReasoningLink(
            id=f"l{session.next_link}",
            source=source,
            target=target,
            direction=direction,
            path=path,
            note=note,
        )
        return _with_history(
            session, kind, payload, links=session.links + (link,), next_link=session.next_link + 1
        )

    if kind == "add_annotation":
        akind = payload.get("kind", "")
        if akind not in ANNOTATION_KINDS:
            raise InvalidArgumentError(f"annotation kind must be one of {sorted(ANNOTATION_KINDS)}")
        color = payload.get("color", "")
        if color not in PALETTE:
            raise InvalidArgumentError(f"annotation color must be one of {sorted(PALETTE)}")
        geometry = payload.get("geometry") or []
        want = ANNOTATION_KINDS[akind]
        if len(geometry) != want or not all(isinstance(g, (int, float)) for g in geometry):
            raise InvalidArgumentError(f"{akind} annotations need {want} numeric geometry values")
        ann = Annotation(
            id=f"a{session.next_annotation}",
            kind=akind,
            geometry=tuple(float(g) for g in geometry),
            color=color,
            text=str(payload.get("text", "")),
        )
        return _with_history(
            session,
            kind,
            payload,
            annotations=session.annotations + (ann,),
            next_annotation=session.next_annotation + 1,
        )

    # remove_annotation
    ann_id = payload.get("id", "")
    if not any(a.id == ann_id for a in session.annotations):
        raise NotFoundError(f"no annotation {ann_id!r}")
    return _with_history(
        session, kind, payload, annotations=tuple(a for a in session.annotations if a.id != ann_id)
    )


def replay(
    graph: KnowledgeGraph,
    session_id: str,
    graph_version: str,
    window: TimeWindow,
    history: list[BoardEvent] | tuple[BoardEvent, ...],
) -> InvestigationSession:
    """Fold a history onto an empty session."""
    session = empty_session(session_id, graph_version, window)
    for event in history:
        session = apply_event(graph, session, event.kind, event.payload)
    return session


def create_session(
    graph: KnowledgeGraph,
    store: TelemetryStore,
    clue: Clue,
    session_id: str | None = None,
) -> InvestigationSession:
    """Open an investigation anchored on one anomalous clue.

    The clue must resolve against the store and its window must lie
    inside the dataset span (brushes are clipped by the caller). The
    anchor card starts as evidence: it is the observed anomaly, not a
    hypothesis.
    """
    store.query_clue(clue.key, clue.window)
    session = empty_session(session_id or uuid.uuid4().hex, graph.version, clue.window)
    return apply_event(
        graph, session, "add_clue", {"clue": clue.to_json(), "state": EVIDENCE}
    )


def apply_layout(session: InvestigationSession, positions: dict[str, tuple[float, float]]) -> InvestigationSession:
    """Store computed card positions; a derived cache, not an event."""
    cards = tuple(
        replace(c, position=tuple(map(float, positions[c.id]))) if c.id in positions else c
        for c in session.cards
    )
    return replace(session, cards=cards)


# ---------------------------------------------------------------------------
# Interchange


def session_to_dict(session: InvestigationSession) -> dict:
    return {
        "meta": {
            "id": session.id,
            "graph_version": session.graph_version,
            "window": session.window.to_json(),
            "counters": {"link": session.next_link, "annotation": session.next_annotation},
        },
        "cards": [c.to_json() for c in session.cards],
        "links": [l.to_json() for l in session.links],
        "annotations": [a.to_json() for a in session.annotations],
        "history": [e.to_json() for e in session.history],
    }


def export_session(session: InvestigationSession) -> bytes:
    """Canonical JSON bytes; equal sessions export identical bytes."""
    return canonical_json(session_to_dict(session))


def _parse_attribute_card(obj, path):
    try:
        return AttributeCard(
            id=obj["id"],
            clue=Clue.from_json(obj["clue"]),
            state=obj["state"],
            chart=obj["chart"],
        )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed attribute card: {exc}", path)


def import_session(data: bytes | str) -> InvestigationSession:
    """Parse an exported session, checking referential integrity.

    Links must point at cards present in the document; a dangling link
    is reported by id.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"session document is not valid JSON: {exc}", "$")
    try:
        cards = tuple(
            EntityCard(
                id=c["id"],
                concept=c["concept"],
                instance=c["instance"],
                attributes=tuple(
                    _parse_attribute_card(a, f"cards[{i}].attributes[{j}]")
                    for j, a in enumerate(c["attributes"])
                ),
                position=(float(c["position"][0]), float(c["position"][1])),
            )
            for i, c in enumerate(raw["cards"])
        )
        links = tuple(
            ReasoningLink(
                id=l["id"],
                source=l["source"],
                target=l["target"],
                direction=l["direction"],
                path=tuple(PathHop.from_json(h) for h in l["path"]),
                note=l["note"],
            )
            for l in raw["links"]
        )
        annotations = tuple(
            Annotation(
                id=a["id"],
                kind=a["kind"],
                geometry=tuple(float(g) for g in a["geometry"]),
                color=a["color"],
                text=a["text"],
            )
            for a in raw["annotations"]
        )
        history = tuple(
            BoardEvent(seq=e["seq"], kind=e["kind"], payload=e["payload"]) for e in raw["history"]
        )
        meta = raw["meta"]
        session = InvestigationSession(
            id=meta["id"],
            graph_version=meta["graph_version"],
            window=TimeWindow.from_json(meta["window"]),
            cards=cards,
            links=links,
            annotations=annotations,
            history=history,
            next_link=int(meta["counters"]["link"]),
            next_annotation=int(meta["counters"]["annotation"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed session document: {exc}", "$")
    card_ids = {c.id for c in session.cards}
    for link in session.links:
        for end in (link.source, link.target):
            if end not in card_ids:
                raise SchemaError(
                    f"link {link.id!r} references missing card {end!r}", f"links.{link.id}"
                )
    seqs = [e.seq for e in session.history]
    if seqs != list(range(1, len(seqs) + 1)):
        raise SchemaError("history sequence numbers are not contiguous from 1", "history")
    return session


def export_summary(session: InvestigationSession, graph: KnowledgeGraph | None = None) -> str:
    """Deterministic markdown digest of the board.

    An anchor-only board renders just the context block; every other
    section appears only when it has content. Evidence rows carry the
    machine notes of the links that brought them onto the board.
    """
    anchor = session.cards[0].attributes[0] if session.cards else None
    lines = [f"# Investigation {session.id}", ""]
    lines.append("## Context")
    lines.append(f"Window: [{session.window.start}, {session.window.end})")
    if anchor is not None:
        lines.append(f"Anomaly: {anchor.id}")
    notes_for: dict[str, list[str]] = {}
    for link in session.links:
        notes_for.setdefault(link.target, []).append(link.note)
    evidence = []
    clues = []
    for card in session.cards:
        for attr in card.attributes:
            if anchor is not None and attr.id == anchor.id:
                continue
            (evidence if attr.state == EVIDENCE else clues).append((card, attr))
    if evidence:
        lines.append("")
        lines.append("## Evidence")
        for card, attr in evidence:
            note = "; ".join(n for n in notes_for.get(card.id, ()) if n)
            lines.append(f"- {attr.id}" + (f" ({note})" if note else ""))
    if clues:
        lines.append("")
        lines.append("## Open clues")
        for card, attr in clues:
            lines.append(f"- {attr.id}")
    if session.links:
        lines.append("")
        lines.append("## Reasoning links")
        for link in session.links:
            note = f": {link.note}" if link.note else ""
            lines.append(f"- {link.source} -> {link.target} ({link.direction}){note}")
    for color, role in PALETTE.items():
        marked = [a for a in session.annotations if a.color == color]
        if not marked:
            continue
        lines.append("")
        lines.append(f"## {role.capitalize()} notes ({color})")
        for ann in marked:
            text = ann.text or f"({ann.kind})"
            lines.append(f"- {text}")
    lines.append("")
    return "\n".join(lines)
