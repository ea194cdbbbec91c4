"""Interactive root-cause investigation over cloud telemetry.

The package is organized around one loop: an alert on a KPI opens an
investigation session; change-point detection turns raw telemetry into
comparable clues; relevance scoring ranks candidate clues against the
evidence already on the board; directional expansion walks the entity
graph to find those candidates; filter refinement isolates which slice
of a record-backed counter carries a trend; and the session itself is
an event-sourced board that serializes canonically.
"""

from .board import (
    Annotation,
    AttributeCard,
    BoardEvent,
    EntityCard,
    InvestigationSession,
    ReasoningLink,
    apply_event,
    apply_layout,
    create_session,
    export_session,
    export_summary,
    import_session,
    replay,
    session_to_dict,
)
from .changepoint import (
    ChangePointArray,
    DetectorConfig,
    changepoints_for_clue,
    changepoints_for_data,
    detect_events,
    detect_series,
    pool_changepoints,
    run_length_low_mass,
    sample_offsets,
)
from .errors import (
    AlreadyExistsError,
    CaseboardError,
    GraphInvalidError,
    InvalidArgumentError,
    NotFoundError,
    SchemaError,
)
from .expand import (
    ClueScorer,
    ExpandConfig,
    ExpansionEntry,
    ExpansionResult,
    PathHop,
    expand_all,
    expand_directional,
    expand_inward,
)
from .graph import (
    AttributeDef,
    DataKind,
    Direction,
    EntityConcept,
    FilterDef,
    KnowledgeGraph,
    RelationDef,
    ValidationReport,
    canonical_json,
    graph_to_dict,
    neighbors,
    parse_graph,
    serialize_graph,
    validate_graph,
)
from .layout import LayoutConfig, layout_board
from .monitor import (
    AnomalyAlert,
    AnomalyScan,
    BrushSelection,
    MonitorConfig,
    detect_anomalies,
    link_incident_to_kpi,
    open_investigation,
)
from .notes import render_collection_note, render_filter_note
from .refine import (
    CombinationResult,
    RefineBranch,
    RefineConfig,
    RefineResult,
    anneal_combinations,
    implicit_selection,
    refine_clue,
    search_combinations,
    trend_score,
)
from .relevance import RankedCandidate, directed_distance, rank_candidates, relevance
from .scenario import ScenarioSpec, generate_scenario, scenario_graph, write_dataset
from .store import (
    Clue,
    ClueData,
    FilterClause,
    FilterPredicate,
    GroundTruth,
    IncidentLog,
    SeriesKey,
    TelemetryStore,
    TimeSeriesData,
    EventSequenceData,
    load_dataset,
    parse_clue_id,
    parse_filter_clauses,
    render_filter_clauses,
)
from .verify import VerificationReport, verify_dataset
from .windows import TimeWindow

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
