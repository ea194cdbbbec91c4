"""Two-step board layout.

Step one groups entity cards into connected components under the up and
down reasoning links and lays each group out as a layered DAG: layers
follow the longest path from the group's roots (parents always end up
strictly above children), cards inside a layer are ordered by the
barycenter of their parents' positions with ties broken by card id.
Step two packs the group bounding boxes left to right in group-creation
order with a fixed gutter. A card's final position is the sum of its
in-group coordinates and its group's offset.

The layout is a pure function of the session: repeated calls return
byte-identical positions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .board import EntityCard, InvestigationSession
from .errors import InvalidArgumentError


@dataclass(frozen=True)
class LayoutConfig:
    """Card geometry in abstract layout units."""

    card_width: float = 280.0
    header_height: float = 48.0
    attr_height: float = 90.0
    h_gap: float = 60.0
    v_gap: float = 80.0
    gutter: float = 120.0


def card_size(card: EntityCard, config: LayoutConfig = LayoutConfig()) -> tuple[float, float]:
    return config.card_width, config.header_height + config.attr_height * len(card.attributes)


def _components(session: InvestigationSession) -> list[list[str]]:
    """Connected components under up/down links, in group-creation order
    (the order the earliest member card joined the board)."""
    order = {c.id: i for i, c in enumerate(session.cards)}
    adj: dict[str, set[str]] = {c.id: set() for c in session.cards}
    for link in session.links:
        if link.direction not in ("up", "down"):
            continue
        adj[link.source].add(link.target)
        adj[link.target].add(link.source)
    seen: set[str] = set()
    components = []
    for card in session.cards:
        if card.id in seen:
            continue
        stack = [card.id]
        members = []
        seen.add(card.id)
        while stack:
            cur = stack.pop()
            members.append(cur)
            for nxt in sorted(adj[cur]):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        components.append(sorted(members, key=lambda cid: order[cid]))
    components.sort(key=lambda ms: min(order[m] for m in ms))
    return components


def _parent_edges(session: InvestigationSession, members: set[str]) -> dict[str, set[str]]:
    """parent -> children inside one component. An up link points from
    child to parent; a down link from parent to child."""
    edges: dict[str, set[str]] = {m: set() for m in members}
    for link in session.links:
        if link.source not in members or link.target not in members:
            continue
        if link.direction == "down":
            edges[link.source].add(link.target)
        elif link.direction == "up":
            edges[link.target].add(link.source)
    return edges


def _layer_assignment(members: list[str], edges: dict[str, set[str]]) -> dict[str, int]:
    """Longest-path layering via Kahn's algorithm.

    Up/down links cannot form cycles when they mirror an acyclic
    containment hierarchy; if hand-added links do close one, the node
    with the smallest card id is forced out first so layout still
    terminates deterministically.
    """
    indeg = {m: 0 for m in members}
    for parent, children in edges.items():
        for child in children:
            indeg[child] += 1
    layer = {m: 0 for m in members}
    ready = sorted(m for m in members if indeg[m] == 0)
    pending = set(members) - set(ready)
    placed = []
    while ready or pending:
        if not ready:
            forced = min(pending)
            pending.discard(forced)
            ready = [forced]
        cur = ready.pop(0)
        placed.append(cur)
        for child in sorted(edges[cur]):
            layer[child] = max(layer[child], layer[cur] + 1)
            if child in pending:
                indeg[child] -= 1
                if indeg[child] == 0:
                    pending.discard(child)
                    ready.append(child)
                    ready.sort()
    return layer


def _layout_component(
    session: InvestigationSession, members: list[str], config: LayoutConfig
) -> tuple[dict[str, tuple[float, float]], float, float]:
    """In-group coordinates plus the group's bounding width and height."""
    cards = {c.id: c for c in session.cards}
    member_set = set(members)
    edges = _parent_edges(session, member_set)
    parents: dict[str, set[str]] = {m: set() for m in members}
    for parent, children in edges.items():
        for child in children:
            parents[child].add(parent)
    layer = _layer_assignment(members, edges)
    n_layers = max(layer.values()) + 1 if members else 0
    by_layer: dict[int, list[str]] = {i: [] for i in range(n_layers)}
    for m in members:
        by_layer[layer[m]].append(m)

    pos: dict[str, tuple[float, float]] = {}
    x_center: dict[str, float] = {}
    y = 0.0
    width = 0.0
    for li in range(n_layers):
        row = by_layer[li]

        def sort_key(cid: str):
            ps = [x_center[p] for p in parents[cid] if p in x_center]
            bary = sum(ps) / len(ps) if ps else float("inf")
            return (bary, cid)

        row.sort(key=sort_key)
        x = 0.0
        row_height = 0.0
        for cid in row:
            w, h = card_size(cards[cid], config)
            pos[cid] = (x, y)
            x_center[cid] = x + w / 2.0
            x += w + config.h_gap
            row_height = max(row_height, h)
        width = max(width, x - config.h_gap if row else 0.0)
        y += row_height + config.v_gap
    height = y - config.v_gap if n_layers else 0.0
    return pos, width, height


def layout_board(
    session: InvestigationSession, config: LayoutConfig = LayoutConfig()
) -> dict[str, tuple[float, float]]:
    """Positions for every entity card; see the module docstring."""
    if config.card_width <= 0 or config.attr_height <= 0:
        raise InvalidArgumentError("layout config dimensions must be positive")
    positions: dict[str, tuple[float, float]] = {}
    offset_x = 0.0
    for members in _components(session):
        comp_pos, comp_width, _ = _layout_component(session, members, config)
        for cid, (x1, y1) in comp_pos.items():
            positions[cid] = (x1 + offset_x, y1 + 0.0)
        offset_x += comp_width + config.gutter
    return positions
