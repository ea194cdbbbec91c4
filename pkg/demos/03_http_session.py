"""Drive a full investigation through the HTTP API.

Boots the service in-process against a synthetic dataset, then walks the
same loop a UI would: list alerts, open a session from a brush, expand,
pin the best candidate to the board, lay the cards out, and export.
"""

import json

from fastapi.testclient import TestClient

from caseboard.scenario import generate_scenario
from caseboard.service import create_app
from caseboard.windows import TimeWindow

graph, store, truth = generate_scenario(seed=11)
app = create_app(graph=graph, store=store)
client = TestClient(app)

print("GET /alerts")
alerts = client.get("/alerts").json()["alerts"]
top = next(a for a in alerts if a["key"]["concept"] == "zone")
key = "/".join((top["key"]["concept"], top["key"]["instance"], top["key"]["attribute"]))
print(f"  {len(alerts)} alert(s); zone alert: {key} peak_z={top['peak_z']:.1f}")

brush = TimeWindow(top["window"]["start"] - 24 * store.step, top["window"]["end"])
print("POST /sessions")
doc = client.post(
    "/sessions",
    json={"key": key, "window": brush.to_json(), "session_id": "demo-http"},
).json()
sid = doc["meta"]["id"]
print(f"  opened {sid} with {len(doc['cards'])} card(s)")

print(f"POST /sessions/{sid}/expand")
expansion = client.post(
    f"/sessions/{sid}/expand", json={"clue": key, "direction": "down", "k": 3}
).json()
for entry in expansion["entries"]:
    print(f"  {entry['score']:.3f}  {entry['clue']['key']['concept']}/{entry['clue']['key']['instance']}/{entry['clue']['key']['attribute']}")

best = expansion["entries"][0]
print(f"POST /sessions/{sid}/events (pin the top candidate)")
doc = client.post(
    f"/sessions/{sid}/events",
    json={
        "kind": "add_clue",
        "payload": {
            "clue": best["clue"],
            "origin": doc["cards"][0]["id"],
            "direction": "down",
            "path": best["path"],
        },
    },
).json()
print(f"  board now has {len(doc['cards'])} cards and {len(doc['links'])} link(s)")

print(f"GET /sessions/{sid}/layout")
layout = client.get(f"/sessions/{sid}/layout").json()["positions"]
for card_id, pos in layout.items():
    print(f"  {card_id}: ({pos[0]:.0f}, {pos[1]:.0f})")

print(f"GET /sessions/{sid}/export")
exported = json.loads(client.get(f"/sessions/{sid}/export").content)
print(f"  export carries {len(exported['history'])} history events")
print(f"\nInjected cause was {truth.cause.key.clue_id}")
