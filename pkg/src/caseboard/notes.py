"""Machine-note templates for reasoning links and filter cards.

Collection notes narrate the relation path that brought a clue onto the
board: one segment per hop, each reading source concept, source
instance, the relation's semantic label, target concept, target
instance, e.g. ``Zone Zone02 contains Cluster Cluster25``. Hop instances
are aligned with the relation's declared source and target sides, not
with traversal order, so an upward hop still reads parent-first.

Filter notes read ``Filtered by`` plus clauses joined by ``; ``, each
clause rendering the filter's display name and its chosen options in
declared option order, clauses in filter id order.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from .errors import InvalidArgumentError, NotFoundError
from .graph import FilterDef, KnowledgeGraph


def render_collection_note(graph: KnowledgeGraph, path: Sequence) -> str:
    """Narrate a relation path of :class:`~caseboard.expand.PathHop` hops."""
    if not path:
        raise InvalidArgumentError("collection note needs a non-empty path")
    segments = []
    for hop in path:
        rel = graph.relation(hop.relation)
        src = graph.concept(rel.source)
        tgt = graph.concept(rel.target)
        segments.append(
            f"{src.name} {hop.source_instance} {rel.semantic} {tgt.name} {hop.target_instance}"
        )
    return "; ".join(segments)


def render_filter_note(filters: Sequence[FilterDef] | Mapping[str, FilterDef], predicate) -> str:
    """Render a filter predicate as its board-card machine note."""
    if predicate is None or not predicate.clauses:
        raise InvalidArgumentError("filter note needs a non-empty predicate")
    by_id: dict[str, FilterDef]
    if isinstance(filters, Mapping):
        by_id = dict(filters)
    else:
        by_id = {f.id: f for f in filters}
    parts = []
    for clause in sorted(predicate.clauses, key=lambda c: c.filter):
        fdef = by_id.get(clause.filter)
        if fdef is None:
            raise NotFoundError(f"no filter definition for {clause.filter!r}")
        chosen = set(clause.options)
        ordered = [opt for opt in fdef.options if opt in chosen]
        # Options outside the declared list keep sorted order at the end;
        # they can only come from hand-built predicates.
        ordered += sorted(chosen - set(fdef.options))
        parts.append(f"{fdef.name}: {', '.join(ordered)}")
    return "Filtered by " + "; ".join(parts)
