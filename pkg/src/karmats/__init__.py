"""Lag-indexed discrete-time structural causal processes.

Build graphs over mixed-kind variables, simulate them with seeded and
resumable noise streams, score estimated structures against truths,
generate benchmark suites, and serve the whole thing over HTTP.
"""

from .benchmarks import BenchError, SuiteConfig, build_suite, gen_benchmark_graph
from .formats import (
    EditEvent,
    FormatError,
    Suggestion,
    SuggestionSet,
    apply_edit,
    canonical_json_bytes,
    export_csv,
    from_document,
    graph_hash,
    import_csv,
    import_discovery,
    load_graph,
    load_series,
    replay,
    save_graph,
    save_series,
    series_meta,
    to_document,
)
from .functionals import (
    CategoricalTable,
    FunctionalError,
    Identity,
    LinearWindow,
    Mlp,
    NoiseSpec,
    Null,
    Threshold,
    eval_functional,
    random_mlp,
)
from .graph import DscpGraph, GraphError, LagEdge, PartitionGroup, Provenance, VariableSpec
from .metrics import (
    EvalReport,
    FidelityReport,
    correlation_matrix,
    evaluate,
    fidelity,
    match_f1,
    sid,
    sid_report,
    summary_f1,
)
from .simulation import (
    DoClamp,
    SeriesFrame,
    ShiftNoise,
    SimulationConfig,
    SimulationError,
    concat_frames,
    resume,
    simulate,
)

__version__ = "0.1.0"

__all__ = [
    "BenchError",
    "CategoricalTable",
    "DoClamp",
    "DscpGraph",
    "EditEvent",
    "EvalReport",
    "FidelityReport",
    "FormatError",
    "FunctionalError",
    "GraphError",
    "Identity",
    "LagEdge",
    "LinearWindow",
    "Mlp",
    "NoiseSpec",
    "Null",
    "PartitionGroup",
    "Provenance",
    "SeriesFrame",
    "ShiftNoise",
    "SimulationConfig",
    "SimulationError",
    "Suggestion",
    "SuggestionSet",
    "SuiteConfig",
    "Threshold",
    "VariableSpec",
    "apply_edit",
    "build_suite",
    "canonical_json_bytes",
    "concat_frames",
    "correlation_matrix",
    "evaluate",
    "eval_functional",
    "export_csv",
    "fidelity",
    "from_document",
    "gen_benchmark_graph",
    "graph_hash",
    "import_csv",
    "import_discovery",
    "load_graph",
    "load_series",
    "match_f1",
    "random_mlp",
    "replay",
    "resume",
    "save_graph",
    "save_series",
    "series_meta",
    "sid",
    "sid_report",
    "simulate",
    "summary_f1",
    "to_document",
]
