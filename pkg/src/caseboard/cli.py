"""Command line entry points.

Exit codes follow the usual contract: 0 on success, 2 for usage errors
(click raises those itself), 1 when the engine rejects the request or a
verification fails.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .board import export_session, export_summary, import_session
from .changepoint import DetectorConfig, changepoints_for_clue
from .errors import CaseboardError, NotFoundError
from .expand import expand_all, expand_directional, expand_inward
from .graph import Direction, parse_graph
from .refine import RefineConfig, implicit_selection, refine_clue
from .scenario import ScenarioSpec, generate_scenario
from .store import Clue, load_dataset, parse_clue_id
from .verify import verify_dataset
from .windows import TimeWindow


def _fail(exc: CaseboardError):
    click.echo(f"error [{exc.code}]: {exc}", err=True)
    sys.exit(1)


def _load(dataset_dir: str):
    store = load_dataset(dataset_dir)
    graph = parse_graph((Path(dataset_dir) / "graph.json").read_bytes())
    return graph, store


def _window_option(store, start, end) -> TimeWindow:
    return TimeWindow(
        store.window.start if start is None else start,
        store.window.end if end is None else end,
    )


@click.group()
def main():
    """Interactive root-cause investigation over cloud telemetry."""


@main.command()
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), required=True, help="Dataset directory to write.")
@click.option("--areas", type=int, default=ScenarioSpec.areas, show_default=True)
@click.option("--zones-per-area", type=int, default=ScenarioSpec.zones_per_area, show_default=True)
@click.option("--clusters-per-zone", type=int, default=ScenarioSpec.clusters_per_zone, show_default=True)
@click.option("--customers", type=int, default=ScenarioSpec.customers, show_default=True)
@click.option("--days", type=int, default=ScenarioSpec.days, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Print the answer key as JSON.")
def generate(seed, out_dir, areas, zones_per_area, clusters_per_zone, customers, days, as_json):
    """Write a synthetic scenario dataset with a known injected cause."""
    try:
        spec = ScenarioSpec(
            areas=areas,
            zones_per_area=zones_per_area,
            clusters_per_zone=clusters_per_zone,
            customers=customers,
            days=days,
        )
        _, store, truth = generate_scenario(seed, spec, out_dir)
    except CaseboardError as exc:
        _fail(exc)
    if as_json:
        click.echo(json.dumps(truth.to_json(), indent=2, sort_keys=True))
    else:
        click.echo(f"dataset written to {out_dir}")
        click.echo(f"  window: [{store.window.start}, {store.window.end})  step: {store.step}s")
        click.echo(f"  incidents: {len(store.incidents)}")
        click.echo(f"  injected cause: {truth.cause.key.clue_id}")
        click.echo(f"  anomaly KPI: {truth.anomaly.clue_id}")


@main.command()
@click.argument("dataset_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8400, show_default=True)
@click.option("--session-dir", type=click.Path(), default=None, help="Directory for session persistence.")
def serve(dataset_dir, host, port, session_dir):
    """Serve the investigation API over HTTP."""
    import uvicorn

    from .service import create_app

    try:
        app = create_app(dataset_dir, session_dir=session_dir)
    except CaseboardError as exc:
        _fail(exc)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@click.argument("dataset_dir", type=click.Path(exists=True, file_okay=False))
@click.argument("clue_id")
@click.option("--start", type=int, default=None, help="Window start (epoch seconds).")
@click.option("--end", type=int, default=None, help="Window end (epoch seconds).")
@click.option("--json", "as_json", is_flag=True)
def detect(dataset_dir, clue_id, start, end, as_json):
    """Report change points for one clue."""
    try:
        _, store = _load(dataset_dir)
        key = parse_clue_id(clue_id)
        clue = Clue(key, _window_option(store, start, end))
        cpa = changepoints_for_clue(store, clue, DetectorConfig())
    except CaseboardError as exc:
        _fail(exc)
    if as_json:
        click.echo(json.dumps({"clue": clue_id, "changepoints": cpa.to_json()}))
    elif not cpa.points:
        click.echo("no change points")
    else:
        for p in cpa.points:
            click.echo(str(p))


@main.command()
@click.argument("dataset_dir", type=click.Path(exists=True, file_okay=False))
@click.argument("clue_id")
@click.option("--direction", type=click.Choice(["up", "down", "left", "right", "in", "all"]), default="all", show_default=True)
@click.option("--k", type=int, default=5, show_default=True)
@click.option("--budget-ms", type=int, default=2000, show_default=True)
@click.option("--start", type=int, default=None)
@click.option("--end", type=int, default=None)
@click.option("--json", "as_json", is_flag=True)
def expand(dataset_dir, clue_id, direction, k, budget_ms, start, end, as_json):
    """Score neighboring clues around one clue."""
    try:
        graph, store = _load(dataset_dir)
        window = _window_option(store, start, end)
        clue = Clue(parse_clue_id(clue_id), window)
        budget = budget_ms / 1000.0
        if direction == "all":
            results = expand_all(store, graph, clue, window, k, budget)
        elif direction == "in":
            results = {Direction.IN: expand_inward(store, graph, clue, window, k)}
        else:
            d = Direction(direction)
            results = {d: expand_directional(store, graph, clue, d, window, k, budget)}
    except CaseboardError as exc:
        _fail(exc)
    if as_json:
        click.echo(json.dumps({d.value: r.to_json() for d, r in results.items()}, indent=2))
        return
    for d, result in results.items():
        flag = " (budget hit)" if result.truncated_by_budget else ""
        click.echo(f"{d.value}: visited {result.visited}{flag}")
        for entry in result.entries:
            click.echo(f"  {entry.score:8.4f}  {entry.clue.key.clue_id}")


@main.command()
@click.argument("dataset_dir", type=click.Path(exists=True, file_okay=False))
@click.argument("clue_id")
@click.option("--filters", default=None, help="Comma-separated filter ids (default: all declared).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--start", type=int, default=None)
@click.option("--end", type=int, default=None)
@click.option("--json", "as_json", is_flag=True)
def refine(dataset_dir, clue_id, filters, seed, start, end, as_json):
    """Search filter combinations that best explain a clue's trend."""
    try:
        graph, store = _load(dataset_dir)
        window = _window_option(store, start, end)
        clue = Clue(parse_clue_id(clue_id), window)
        available = {f.id: f for f in implicit_selection(store, graph, clue.key.concept)}
        if filters is None:
            selection = tuple(available.values())
        else:
            wanted = [fid.strip() for fid in filters.split(",")]
            missing = [fid for fid in wanted if fid not in available]
            if missing:
                raise NotFoundError(
                    f"no filter {missing[0]!r} on concept {clue.key.concept!r}"
                )
            selection = tuple(available[fid] for fid in wanted)
        result = refine_clue(store, clue, selection, config=RefineConfig(seed=seed))
    except CaseboardError as exc:
        _fail(exc)
    if as_json:
        click.echo(json.dumps(result.to_json(), indent=2))
        return
    for branch in (result.increasing, result.decreasing):
        if not branch.feasible:
            click.echo(f"{branch.objective}: no feasible combination")
            continue
        click.echo(f"{branch.objective}: trend {branch.trend:.4f}  {branch.note}")


@main.command()
@click.argument("session_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--dataset", "dataset_dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="Dataset directory; enables graph-aware summary rendering.")
@click.option("--format", "fmt", type=click.Choice(["json", "summary"]), default="json", show_default=True)
def export(session_file, dataset_dir, fmt):
    """Re-export a saved session document (validates it on the way)."""
    try:
        session = import_session(Path(session_file).read_bytes())
        if fmt == "summary":
            graph = None
            if dataset_dir is not None:
                graph, _ = _load(dataset_dir)
            click.echo(export_summary(session, graph))
        else:
            click.echo(export_session(session).decode())
    except CaseboardError as exc:
        _fail(exc)


@main.command()
@click.argument("dataset_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--json", "as_json", is_flag=True)
def verify(dataset_dir, as_json):
    """Check a dataset directory for internal consistency."""
    try:
        report = verify_dataset(dataset_dir)
    except CaseboardError as exc:
        _fail(exc)
    if as_json:
        click.echo(json.dumps(report.to_json(), indent=2))
    else:
        for check in report.checks:
            mark = "ok " if check.ok else "FAIL"
            click.echo(f"[{mark}] {check.name}: {check.detail}")
    if not report.ok:
        sys.exit(1)


if __name__ == "__main__":
    main()
