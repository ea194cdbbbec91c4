"""Record engine API responses as JSON fixtures for the webui contract tests.

Run from the repository root after installing the engine:

    python3 frontend/scripts/record_fixtures.py

Every fixture is a verbatim HTTP response body except graph_canonical,
which holds the canonical export bytes the building board must
reproduce, and expected_kpi, which pins the engine's incident-to-KPI
answer for the highlight test.
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from caseboard.monitor import link_incident_to_kpi
from caseboard.scenario import generate_scenario
from caseboard.service import create_app
from caseboard.windows import TimeWindow

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
SEED = 11


def dump(name: str, payload):
    OUT.joinpath(name).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"  {name}")


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    graph, store, truth = generate_scenario(SEED)
    client = TestClient(create_app(graph=graph, store=store))
    anomaly = truth.anomaly.clue_id
    incident = truth.incident_window

    doc = client.get("/graph").json()
    dump("graph.json", doc)
    canonical = json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    OUT.joinpath("graph_canonical.json").write_text(canonical)
    print("  graph_canonical.json")

    dump("meta.json", client.get("/datasets/current/meta").json())

    narrow = TimeWindow(incident.start, incident.start + 3 * store.step)
    incidents = client.get(
        "/incidents", params={"start": narrow.start, "end": narrow.end}
    ).json()
    dump("incidents.json", incidents)

    first = store.query_incidents(narrow, None)[0]
    linked = link_incident_to_kpi(store, graph, first)
    dump("expected_kpi.json", {"incident": first.to_json(), "key": linked.clue_id})

    kpi_keys = ",".join([anomaly, f"cluster/{truth.cause.key.instance}/build_version"])
    dump("kpis.json", client.get("/kpis", params={"keys": kpi_keys}).json())

    dump("alerts.json", client.get("/alerts").json())

    brush = TimeWindow(incident.start - 24 * store.step, incident.end)
    session = client.post(
        "/sessions",
        json={"key": anomaly, "window": brush.to_json(), "session_id": "fixture"},
    ).json()
    dump("session.json", session)

    for direction in ("up", "down", "left", "right", "in"):
        result = client.post(
            "/sessions/fixture/expand",
            json={"clue": anomaly, "direction": direction, "k": 3},
        ).json()
        dump(f"expansion_{direction}.json", result)

    down = json.loads(OUT.joinpath("expansion_down.json").read_text())
    best = down["down"]["entries"][0] if "down" in down else down["entries"][0]
    committed = client.post(
        "/sessions/fixture/events",
        json={
            "kind": "add_clue",
            "payload": {
                "clue": best["clue"],
                "origin": session["cards"][0]["id"],
                "direction": "down",
                "path": best["path"],
            },
        },
    ).json()
    committed = client.post(
        "/sessions/fixture/events",
        json={
            "kind": "add_annotation",
            "payload": {
                "kind": "text",
                "geometry": [24.0, 24.0],
                "color": "red",
                "text": "bad rollout on the cause cluster",
            },
        },
    ).json()
    dump("session_committed.json", committed)

    dump("layout.json", client.get("/sessions/fixture/layout").json())
    dump("refine.json", client.post("/sessions/fixture/refine", json={"clue": anomaly}).json())


if __name__ == "__main__":
    main()
