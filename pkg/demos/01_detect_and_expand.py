"""Detect an incident-rate anomaly and look for its cause.

Generates a synthetic fleet with one injected fault, scans the zone
incident counters for anomalies, then expands outward from the alerted
series and prints the top-ranked related clues per direction.
"""

from caseboard.expand import expand_all
from caseboard.monitor import detect_anomalies
from caseboard.scenario import generate_scenario
from caseboard.store import Clue, SeriesKey

graph, store, truth = generate_scenario(seed=7)

print("Scanning zone incident counters...")
zone_keys = [
    SeriesKey("zone", zone, "incident_count") for zone in store.list_instances("zone")
]
scan = detect_anomalies(store, zone_keys)
for alert in scan.alerts:
    print(f"  alert {alert.key.clue_id}  window={alert.window.to_json()}  peak_z={alert.peak_z:.1f}")

top = scan.alerts[0]
print(f"\nExpanding from {top.key.clue_id} in every direction...")
clue = Clue(top.key, store.window)
results = expand_all(store, graph, clue, budget_s=None)
for direction, result in results.items():
    print(f"  {direction}:")
    for entry in result.entries[:3]:
        print(f"    {entry.score:.3f}  {entry.clue.key.clue_id}")

print(f"\nInjected cause was {truth.cause.key.clue_id}")
found = [
    direction
    for direction, result in results.items()
    if any(e.clue.key.clue_id == truth.cause.key.clue_id for e in result.entries)
]
print(f"Recovered in direction(s): {', '.join(found) if found else 'none'}")
