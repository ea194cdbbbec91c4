"""HTTP service around one dataset and its investigation sessions.

The app is a thin shell: every route parses arguments, takes the session
lock when state changes, and delegates to the engine modules. Engine
errors carry a machine code (``not_found``, ``invalid_argument``,
``conflict``, ``internal``) which maps onto the HTTP status, so clients
see one error shape everywhere.

Sessions are event-sourced and persisted to ``session_dir`` after every
accepted mutation; a restarted service reloads them from disk and ends
up bit-identical with the state it crashed with.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse, Response

from .board import (
    InvestigationSession,
    apply_event,
    apply_layout,
    export_session,
    export_summary,
    import_session,
    session_to_dict,
)
from .changepoint import DetectorConfig, changepoints_for_clue, sample_offsets
from .errors import CaseboardError, InvalidArgumentError, NotFoundError
from .expand import ExpandConfig, expand_directional, expand_inward
from .graph import Direction, KnowledgeGraph, graph_to_dict, parse_graph
from .layout import LayoutConfig, layout_board
from .monitor import BrushSelection, MonitorConfig, detect_anomalies, open_investigation
from .refine import RefineConfig, implicit_selection, refine_clue
from .store import (
    Clue,
    SeriesKey,
    TelemetryStore,
    load_dataset,
    parse_clue_id,
    parse_filter_clauses,
)
from .windows import TimeWindow

_STATUS_FOR_CODE = {
    "not_found": 404,
    "invalid_argument": 400,
    "conflict": 409,
    "internal": 500,
}


class SessionRegistry:
    """In-memory session table with optional on-disk persistence."""

    def __init__(self, session_dir: Path | None):
        self.session_dir = session_dir
        self._sessions: dict[str, InvestigationSession] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._table_lock = threading.Lock()
        if session_dir is not None:
            session_dir.mkdir(parents=True, exist_ok=True)
            for path in sorted(session_dir.glob("*.json")):
                session = import_session(path.read_bytes())
                self._sessions[session.id] = session
                self._locks[session.id] = threading.Lock()

    def ids(self) -> list[str]:
        with self._table_lock:
            return sorted(self._sessions)

    def get(self, session_id: str) -> InvestigationSession:
        with self._table_lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise NotFoundError(f"session {session_id!r} not found")
        return session

    def lock(self, session_id: str) -> threading.Lock:
        with self._table_lock:
            lock = self._locks.get(session_id)
        if lock is None:
            raise NotFoundError(f"session {session_id!r} not found")
        return lock

    def put(self, session: InvestigationSession):
        with self._table_lock:
            self._locks.setdefault(session.id, threading.Lock())
            self._sessions[session.id] = session
        self._persist(session)

    def _persist(self, session: InvestigationSession):
        if self.session_dir is None:
            return
        path = self.session_dir / f"{session.id}.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_bytes(export_session(session))
        tmp.replace(path)


def _window_from(obj, default: TimeWindow) -> TimeWindow:
    if obj is None:
        return default
    if not isinstance(obj, dict):
        raise InvalidArgumentError("window must be an object with start and end")
    return TimeWindow.from_json(obj)


def _query_window(start: int | None, end: int | None, default: TimeWindow) -> TimeWindow:
    if start is None and end is None:
        return default
    return TimeWindow(
        default.start if start is None else int(start),
        default.end if end is None else int(end),
    )


def _require(body, field: str):
    if not isinstance(body, dict) or field not in body:
        raise InvalidArgumentError(f"request body is missing {field!r}")
    return body[field]


def _clue_from(body, default_window: TimeWindow) -> Clue:
    raw = _require(body, "clue")
    if isinstance(raw, str):
        return Clue(parse_clue_id(raw), _window_from(body.get("window"), default_window))
    if isinstance(raw, dict) and "key" in raw:
        return Clue.from_json(raw)
    raise InvalidArgumentError("clue must be a clue id string or a {key, window} object")


def create_app(
    dataset_dir: str | Path | None = None,
    *,
    graph: KnowledgeGraph | None = None,
    store: TelemetryStore | None = None,
    session_dir: str | Path | None = None,
    detector: DetectorConfig = DetectorConfig(),
) -> FastAPI:
    """Build the web app for one dataset.

    Pass ``dataset_dir`` to load from disk (its ``graph.json`` is the
    initial graph), or inject ``graph`` and ``store`` directly.
    """
    if store is None:
        if dataset_dir is None:
            raise InvalidArgumentError("create_app needs a dataset directory or a store")
        dataset_dir = Path(dataset_dir)
        store = load_dataset(dataset_dir)
        if graph is None:
            graph_path = dataset_dir / "graph.json"
            if not graph_path.exists():
                raise NotFoundError(f"graph document not found: {graph_path}")
            graph = parse_graph(graph_path.read_bytes())
    if graph is None:
        raise InvalidArgumentError("create_app needs a knowledge graph")

    app = FastAPI(title="caseboard", docs_url=None, redoc_url=None)
    state = {"graph": graph}
    registry = SessionRegistry(None if session_dir is None else Path(session_dir))
    graph_lock = threading.Lock()

    @app.exception_handler(CaseboardError)
    async def _engine_error(_req: Request, exc: CaseboardError):
        payload = {"error": {"code": exc.code, "message": str(exc)}}
        return JSONResponse(payload, status_code=_STATUS_FOR_CODE.get(exc.code, 500))

    @app.get("/health")
    def health():
        return {"status": "ok", "sessions": len(registry.ids())}

    @app.get("/graph")
    def get_graph():
        return graph_to_dict(state["graph"])

    @app.put("/graph")
    def put_graph(body: dict):
        new_graph = parse_graph(json.dumps(body))
        with graph_lock:
            state["graph"] = new_graph
        return {"version": new_graph.version}

    @app.get("/datasets/current/meta")
    def dataset_meta():
        return {
            "window": store.window.to_json(),
            "step_seconds": store.step,
            "concepts": {
                concept: {
                    "instances": list(ids),
                    "attributes": [a for c, a in sorted(store.attributes) if c == concept],
                }
                for concept, ids in sorted(store.instances.items())
            },
            "graph_version": state["graph"].version,
        }

    @app.get("/incidents")
    def get_incidents(start: int | None = None, end: int | None = None, filters: str = ""):
        window = _query_window(start, end, store.window)
        predicate = parse_filter_clauses(filters)
        rows = store.query_incidents(window, predicate)
        return {"incidents": [r.to_json() for r in rows], "count": len(rows)}

    @app.get("/kpis")
    def get_kpis(keys: str, start: int | None = None, end: int | None = None):
        window = _query_window(start, end, store.window)
        out = []
        for raw in [k for k in keys.split(",") if k]:
            key = parse_clue_id(raw)
            data = store.query_clue(key, window)
            if data.series is not None:
                payload = [s.to_json() for s in data.series]
            else:
                payload = [s.to_json() for s in data.events]
            out.append({"key": raw, "kind": data.kind.value, "data": payload})
        return {"series": out}

    @app.get("/alerts")
    def get_alerts(start: int | None = None, end: int | None = None):
        window = _query_window(start, end, store.window)
        keys = [
            SeriesKey(concept, instance, attr)
            for (concept, attr), meta in sorted(store.attributes.items())
            if meta.record_backed
            for instance in store.instances[concept]
        ]
        scan = detect_anomalies(store, keys, window, MonitorConfig())
        return scan.to_json()

    @app.post("/sessions", status_code=201)
    def post_session(body: dict):
        key = parse_clue_id(_require(body, "key"))
        window = TimeWindow.from_json(_require(body, "window"))
        brush = BrushSelection(key, window)
        session = open_investigation(store, state["graph"], brush, body.get("session_id"))
        registry.put(session)
        return session_to_dict(session)

    @app.get("/sessions")
    def list_sessions():
        return {"sessions": registry.ids()}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return session_to_dict(registry.get(session_id))

    @app.post("/sessions/{session_id}/events")
    def post_event(session_id: str, body: dict):
        kind = _require(body, "kind")
        payload = _require(body, "payload")
        with registry.lock(session_id):
            session = registry.get(session_id)
            updated = apply_event(state["graph"], session, kind, payload)
            if updated is not session:
                registry.put(updated)
        return session_to_dict(updated)

    @app.post("/sessions/{session_id}/expand")
    def post_expand(session_id: str, body: dict):
        session = registry.get(session_id)
        clue = _clue_from(body, session.window)
        k = int(body.get("k", 5))
        budget_ms = body.get("budget_ms")
        budget_s = None if budget_ms is None else float(budget_ms) / 1000.0
        direction = Direction(_require(body, "direction"))
        config = ExpandConfig(detector=detector, global_siblings=bool(body.get("global_siblings", False)))
        if direction is Direction.IN:
            exclude = tuple(body.get("exclude", ()))
            result = expand_inward(store, state["graph"], clue, session.window, k, exclude, config)
        else:
            result = expand_directional(
                store, state["graph"], clue, direction, session.window, k, budget_s, config
            )
        return result.to_json()

    @app.post("/sessions/{session_id}/refine")
    def post_refine(session_id: str, body: dict):
        session = registry.get(session_id)
        clue = _clue_from(body, session.window)
        available = {
            f.id: f for f in implicit_selection(store, state["graph"], clue.key.concept)
        }
        selection_ids = body.get("selection")
        if selection_ids is None:
            selection = tuple(available.values())
        else:
            missing = [fid for fid in selection_ids if fid not in available]
            if missing:
                raise NotFoundError(f"no filter {missing[0]!r} on concept {clue.key.concept!r}")
            selection = tuple(available[fid] for fid in selection_ids)
        cfg = body.get("config", {})
        config = RefineConfig(
            min_support=int(cfg.get("min_support", RefineConfig.min_support)),
            max_iters=int(cfg.get("max_iters", RefineConfig.max_iters)),
            restarts=int(cfg.get("restarts", RefineConfig.restarts)),
            seed=int(cfg.get("seed", RefineConfig.seed)),
        )
        evidence = []
        for ev in session.evidence_clues():
            if ev.key == clue.key:
                continue
            cpa = changepoints_for_clue(store, Clue(ev.key, session.window), detector)
            evidence.append(sample_offsets(cpa, session.window, store.step))
        result = refine_clue(store, clue, selection, evidence, session.window, config, detector)
        return result.to_json()

    @app.get("/sessions/{session_id}/layout")
    def get_layout(session_id: str):
        config = LayoutConfig()
        with registry.lock(session_id):
            session = registry.get(session_id)
            positions = layout_board(session, config)
            registry.put(apply_layout(session, positions))
        width = max((x for x, _ in positions.values()), default=0.0) + config.card_width
        return {
            "positions": {cid: list(pos) for cid, pos in positions.items()},
            "card_width": config.card_width,
            "canvas_width": width,
        }

    @app.get("/sessions/{session_id}/export")
    def get_export(session_id: str):
        return Response(
            content=export_session(registry.get(session_id)),
            media_type="application/json",
        )

    @app.get("/sessions/{session_id}/summary")
    def get_summary(session_id: str):
        text = export_summary(registry.get(session_id), state["graph"])
        return PlainTextResponse(text, media_type="text/markdown")

    return app
