"""Narrow an anomaly down to the failing slice and write up the finding.

Starts from the known anomalous zone counter, searches its filter space
for the option combination with the steepest increase, then records the
investigation on a board and prints the exported markdown summary.
"""

from caseboard.board import apply_event, export_summary
from caseboard.monitor import BrushSelection, open_investigation
from caseboard.refine import implicit_selection, refine_clue
from caseboard.scenario import generate_scenario
from caseboard.store import Clue
from caseboard.windows import TimeWindow

graph, store, truth = generate_scenario(seed=3)

brush = TimeWindow(truth.incident_window.start - 24 * store.step, truth.incident_window.end)
print(f"Refining {truth.anomaly.clue_id} over the brushed window...")
selection = implicit_selection(store, graph, truth.anomaly.concept)
print(f"  filters in play: {', '.join(f.name for f in selection)}")
result = refine_clue(store, Clue(truth.anomaly, brush), selection)

for branch in (result.increasing, result.decreasing):
    label = "steepest increase" if branch.objective == "maximize" else "steepest decrease"
    if not branch.feasible:
        print(f"  {label}: no combination with enough supporting records")
        continue
    print(f"  {label}: trend={branch.trend:+.2f}  {branch.note}")

print("\nRecording the finding on a board...")
session = open_investigation(store, graph, BrushSelection(truth.anomaly, brush), "demo-refine")
session = apply_event(
    graph,
    session,
    "add_annotation",
    {
        "kind": "text",
        "geometry": [40.0, 40.0],
        "color": "red",
        "text": result.note or "no dominant slice found",
    },
)
session = apply_event(
    graph,
    session,
    "add_annotation",
    {
        "kind": "text",
        "geometry": [40.0, 80.0],
        "color": "green",
        "text": "roll back the suspect build and requeue failed allocations",
    },
)

print()
print(export_summary(session))
print(f"\nGround truth: error code {truth.injected_error_code!r} was injected.")
