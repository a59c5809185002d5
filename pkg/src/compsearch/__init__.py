"""Progressive multi-objective search over model-compression schemes.

The package covers the whole pipeline: a compiled-in catalog of
compression strategies, a knowledge graph over them, relation-aware
strategy embeddings refined on recorded outcomes, a deterministic
simulated evaluator (plus a line-protocol client for external ones),
and a progressive search that grows scheme sequences along a predicted
Pareto front.
"""

from .catalog import (
    START,
    Catalog,
    ConfigurationError,
    MethodDef,
    Scheme,
    Strategy,
    build_catalog,
    make_canonical_id,
    scheme_children,
    space_size,
)
from .config import RunConfig, config_hash, load_config
from .embeddings import (
    EmbeddingStore,
    EmbeddingTable,
    ExperienceRegressor,
    fit_embedding_model,
    learn_embeddings,
    transr_score,
)
from .evaluation import (
    Evaluator,
    EvaluatorConfig,
    MetricsDelta,
    ModelState,
    SimulatedEvaluator,
    TaskFeatures,
    compute_metrics,
    evaluate_scheme,
    simulate_step,
)
from .experience import ExperienceRecord, load_records, save_records, synthesize_records
from .knowledge_graph import (
    KnowledgeGraph,
    SaturatedRelationError,
    Triple,
    build_kg,
    corrupt_triple,
    export_tsv,
)
from .pareto import (
    crowding_distance,
    dominates,
    hypervolume,
    pareto_front_indices,
    select_by_crowding,
)
from .protocol import (
    EVALUATOR_COMMAND_ENV,
    EvaluatorPool,
    EvaluatorTimeout,
    ExternalEvaluator,
    HandshakeError,
    ProtocolError,
)
from .reporting import cmd_oracle, cmd_report, cmd_search
from .search import (
    ParetoPoint,
    PredictorFmo,
    SearchResult,
    SearchSettings,
    exhaustive_evaluate,
    front_points,
    run_search,
)

__version__ = "0.1.0"

__all__ = [
    "START",
    "Catalog",
    "ConfigurationError",
    "EmbeddingStore",
    "EmbeddingTable",
    "Evaluator",
    "EvaluatorConfig",
    "EvaluatorPool",
    "EvaluatorTimeout",
    "EVALUATOR_COMMAND_ENV",
    "ExperienceRecord",
    "ExperienceRegressor",
    "ExternalEvaluator",
    "HandshakeError",
    "KnowledgeGraph",
    "MethodDef",
    "MetricsDelta",
    "ModelState",
    "ParetoPoint",
    "PredictorFmo",
    "ProtocolError",
    "RunConfig",
    "SaturatedRelationError",
    "Scheme",
    "SearchResult",
    "SearchSettings",
    "SimulatedEvaluator",
    "Strategy",
    "TaskFeatures",
    "Triple",
    "build_catalog",
    "build_kg",
    "cmd_oracle",
    "cmd_report",
    "cmd_search",
    "compute_metrics",
    "config_hash",
    "corrupt_triple",
    "crowding_distance",
    "dominates",
    "evaluate_scheme",
    "exhaustive_evaluate",
    "export_tsv",
    "fit_embedding_model",
    "front_points",
    "hypervolume",
    "learn_embeddings",
    "load_config",
    "load_records",
    "make_canonical_id",
    "pareto_front_indices",
    "run_search",
    "save_records",
    "scheme_children",
    "select_by_crowding",
    "simulate_step",
    "space_size",
    "synthesize_records",
]
