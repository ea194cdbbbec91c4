"""HTTP surface: routes, error mapping, persistence across restarts."""

from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from caseboard.graph import graph_to_dict
from caseboard.service import create_app
from caseboard.store import parse_clue_id
from caseboard.windows import TimeWindow


@pytest.fixture()
def client(scenario):
    graph, store, truth = scenario
    app = create_app(graph=graph, store=store)
    with TestClient(app) as c:
        c.truth = truth
        c.store = store
        c.graph = graph
        yield c


def open_session(client, window=None):
    truth = client.truth
    store = client.store
    if window is None:
        window = TimeWindow(
            truth.incident_window.start - 24 * store.step, truth.incident_window.end
        )
    resp = client.post(
        "/sessions",
        json={"key": truth.anomaly.clue_id, "window": window.to_json()},
    )
    assert resp.status_code == 201, resp.text
    return resp.json()


class TestReadRoutes:
    def test_health_reports_session_count(self, client):
        resp = client.get("/health")
        assert resp.status_code == 200
        body = resp.json()
        assert body["status"] == "ok"
        assert body["sessions"] == 0

    def test_graph_round_trip(self, client):
        doc = client.get("/graph").json()
        assert doc == graph_to_dict(client.graph)
        put = client.put("/graph", json=doc)
        assert put.status_code == 200
        assert put.json()["version"] == client.graph.version
        assert client.get("/graph").json() == doc

    def test_invalid_graph_rejected_with_400(self, client):
        doc = client.get("/graph").json()
        doc["relations"][0]["source"] = "no_such_concept"
        resp = client.put("/graph", json=doc)
        assert resp.status_code == 400
        assert resp.json()["error"]["code"] == "invalid_argument"

    def test_dataset_meta_shape(self, client):
        meta = client.get("/datasets/current/meta").json()
        assert meta["window"] == client.store.window.to_json()
        assert meta["step_seconds"] == client.store.step
        assert "zone" in meta["concepts"]
        assert "incident_count" in meta["concepts"]["zone"]["attributes"]
        assert meta["graph_version"] == client.graph.version

    def test_incidents_filtering_and_count(self, client):
        truth = client.truth
        all_rows = client.get("/incidents").json()
        assert all_rows["count"] == len(all_rows["incidents"])
        coded = client.get(
            "/incidents",
            params={"filters": f"error_code in [{truth.injected_error_code}]"},
        ).json()
        assert 0 < coded["count"] < all_rows["count"]
        assert all(
            r["error_code"] == truth.injected_error_code for r in coded["incidents"]
        )

    def test_incident_window_params(self, client):
        store = client.store
        w = client.truth.incident_window
        rows = client.get("/incidents", params={"start": w.start, "end": w.end}).json()
        assert all(w.start <= r["timestamp"] < w.end for r in rows["incidents"])

    def test_kpis_return_series_payload(self, client):
        truth = client.truth
        resp = client.get("/kpis", params={"keys": truth.anomaly.clue_id}).json()
        assert len(resp["series"]) == 1
        entry = resp["series"][0]
        assert entry["key"] == truth.anomaly.clue_id
        assert entry["kind"] == "number"
        assert entry["data"][0]["values"]

    def test_kpis_unknown_key_is_404(self, client):
        resp = client.get("/kpis", params={"keys": "zone/Nowhere/incident_count"})
        assert resp.status_code == 404
        assert resp.json()["error"]["code"] == "not_found"

    def test_alerts_cover_injection(self, client):
        truth = client.truth
        body = client.get("/alerts").json()
        assert body["alerts"]
        anomaly = truth.anomaly.to_json()
        hits = [a for a in body["alerts"] if a["key"] == anomaly]
        assert hits
        spans = [TimeWindow.from_json(a["window"]) for a in hits]
        assert any(s.intersect(truth.incident_window) is not None for s in spans)


class TestSessionRoutes:
    def test_session_crud_and_events(self, client):
        doc = open_session(client)
        sid = doc["meta"]["id"]
        assert client.get("/sessions").json()["sessions"] == [sid]
        fetched = client.get(f"/sessions/{sid}").json()
        assert fetched == doc

        anchor_card = doc["cards"][0]["id"]
        expand = client.post(
            f"/sessions/{sid}/expand",
            json={"clue": doc["cards"][0]["attributes"][0]["clue"], "direction": "up"},
        )
        assert expand.status_code == 200
        entries = expand.json()["entries"]
        assert entries
        entry = entries[0]
        event = client.post(
            f"/sessions/{sid}/events",
            json={
                "kind": "add_clue",
                "payload": {
                    "clue": entry["clue"],
                    "origin": anchor_card,
                    "path": entry["path"],
                    "direction": "up",
                },
            },
        )
        assert event.status_code == 200
        grown = event.json()
        assert len(grown["cards"]) == 2
        assert grown["links"][0]["direction"] == "up"
        assert grown["links"][0]["note"]

    def test_expand_unknown_session_404(self, client):
        resp = client.post(
            "/sessions/ghost/expand",
            json={"clue": client.truth.anomaly.clue_id, "direction": "up"},
        )
        assert resp.status_code == 404
        assert resp.json()["error"]["code"] == "not_found"

    def test_duplicate_clue_conflict_409(self, client):
        doc = open_session(client)
        sid = doc["meta"]["id"]
        resp = client.post(
            f"/sessions/{sid}/events",
            json={
                "kind": "add_clue",
                "payload": {"clue": doc["cards"][0]["attributes"][0]["clue"]},
            },
        )
        assert resp.status_code == 409
        assert resp.json()["error"]["code"] == "conflict"

    def test_bad_event_payload_400(self, client):
        doc = open_session(client)
        sid = doc["meta"]["id"]
        resp = client.post(f"/sessions/{sid}/events", json={"kind": "add_clue"})
        assert resp.status_code == 400
        assert resp.json()["error"]["code"] == "invalid_argument"

    def test_refine_with_implicit_selection(self, client):
        truth = client.truth
        doc = open_session(client)
        sid = doc["meta"]["id"]
        resp = client.post(
            f"/sessions/{sid}/refine",
            json={"clue": doc["cards"][0]["attributes"][0]["clue"]},
        )
        assert resp.status_code == 200
        body = resp.json()
        clauses = {c["filter"]: c["options"] for c in body["increasing"]["predicate"]["clauses"]}
        assert clauses["error_code"] == [truth.injected_error_code]
        assert body["increasing"]["trend"] > 0
        assert body["increasing"]["no_evidence"]
        assert body["note"].startswith("Filtered by ")

    def test_refine_with_explicit_selection_subset(self, client):
        doc = open_session(client)
        sid = doc["meta"]["id"]
        resp = client.post(
            f"/sessions/{sid}/refine",
            json={
                "clue": doc["cards"][0]["attributes"][0]["clue"],
                "selection": ["error_code"],
            },
        )
        assert resp.status_code == 200
        clauses = resp.json()["increasing"]["predicate"]["clauses"]
        assert [c["filter"] for c in clauses] == ["error_code"]

    def test_refine_unknown_filter_404(self, client):
        doc = open_session(client)
        sid = doc["meta"]["id"]
        resp = client.post(
            f"/sessions/{sid}/refine",
            json={
                "clue": doc["cards"][0]["attributes"][0]["clue"],
                "selection": ["no_such_filter"],
            },
        )
        assert resp.status_code == 404

    def test_layout_positions_every_card(self, client):
        doc = open_session(client)
        sid = doc["meta"]["id"]
        body = client.get(f"/sessions/{sid}/layout").json()
        assert set(body["positions"]) == {c["id"] for c in doc["cards"]}
        refetched = client.get(f"/sessions/{sid}").json()
        card = refetched["cards"][0]
        assert card["position"] == body["positions"][card["id"]]

    def test_export_and_summary(self, client):
        doc = open_session(client)
        sid = doc["meta"]["id"]
        export = client.get(f"/sessions/{sid}/export")
        assert export.status_code == 200
        parsed = json.loads(export.content)
        assert parsed["meta"]["id"] == sid
        summary = client.get(f"/sessions/{sid}/summary")
        assert summary.status_code == 200
        assert summary.text.startswith(f"# Investigation {sid}")

    def test_zero_length_brush_400(self, client):
        store = client.store
        start = store.window.start + 10 * store.step
        resp = client.post(
            "/sessions",
            json={
                "key": client.truth.anomaly.clue_id,
                "window": {"start": start, "end": start},
            },
        )
        assert resp.status_code == 400


class TestPersistence:
    def test_restart_restores_sessions_by_replay(self, scenario, tmp_path):
        graph, store, truth = scenario
        session_dir = tmp_path / "sessions"
        window = TimeWindow(
            truth.incident_window.start - 24 * store.step, truth.incident_window.end
        )

        app = create_app(graph=graph, store=store, session_dir=session_dir)
        with TestClient(app) as client:
            resp = client.post(
                "/sessions",
                json={"key": truth.anomaly.clue_id, "window": window.to_json()},
            )
            sid = resp.json()["meta"]["id"]
            doc = resp.json()
            expand = client.post(
                f"/sessions/{sid}/expand",
                json={"clue": doc["cards"][0]["attributes"][0]["clue"], "direction": "up"},
            ).json()
            entry = expand["entries"][0]
            client.post(
                f"/sessions/{sid}/events",
                json={
                    "kind": "add_clue",
                    "payload": {
                        "clue": entry["clue"],
                        "origin": doc["cards"][0]["id"],
                        "path": entry["path"],
                        "direction": "up",
                    },
                },
            )
            client.post(
                f"/sessions/{sid}/events",
                json={
                    "kind": "validate_clue",
                    "payload": {"card": entry["clue"]["key"]["concept"] + "/" +
                                entry["clue"]["key"]["instance"] + "/" +
                                entry["clue"]["key"]["attribute"]},
                },
            )
            client.post(
                f"/sessions/{sid}/events",
                json={
                    "kind": "add_annotation",
                    "payload": {"kind": "text", "geometry": [4, 8],
                                "color": "red", "text": "rollback"},
                },
            )
            client.post(
                f"/sessions/{sid}/events",
                json={"kind": "remove_annotation", "payload": {"id": "a1"}},
            )
            before = client.get(f"/sessions/{sid}/export").content

        restarted = create_app(graph=graph, store=store, session_dir=session_dir)
        with TestClient(restarted) as client:
            assert client.get("/sessions").json()["sessions"] == [sid]
            after = client.get(f"/sessions/{sid}/export").content
        assert after == before

    def test_missing_dataset_dir_fails_fast(self, tmp_path):
        from caseboard.errors import CaseboardError

        with pytest.raises(CaseboardError):
            create_app(tmp_path / "nowhere")

    def test_app_loads_generated_dataset_from_disk(self, dataset_dir):
        app = create_app(dataset_dir)
        with TestClient(app) as client:
            assert client.get("/health").json()["status"] == "ok"
            assert client.get("/incidents").json()["count"] > 0
