"""Fragment-level evaluation of LLM outputs.

Dissects each output into criterion-relevant fragments, labels the function
each fragment serves, rates every function positive or negative, aggregates
ratio-based holistic scores, and clusters functions across outputs into a
navigable two-level map.
"""

from .dataset import Dataset, DatasetError, load_criteria, load_dataset
from .evaluator import (
    EvaluationParseError,
    RecordEvaluation,
    evaluate_record,
    parse_evaluation_document,
    rating_baseline,
)
from .gateway import (
    CompletionRequest,
    EmbeddingVector,
    LLMGateway,
    MockBackend,
    Transcript,
)
from .hierarchy import (
    BaseCluster,
    ClusterHierarchy,
    NoiseSet,
    SuperCluster,
    build_hierarchy,
    build_super_clusters,
    label_base_cluster,
)
from .density import FlatClustering, hdbscan_cluster
from .kmeans import kmeans_cluster
from .metrics import (
    ExtractionScore,
    pairwise_accuracy,
    sentence_prf,
    split_sentences,
    token_iou,
    whitespace_tokenize,
)
from .analytics import ClusterStats, co_occurrence_matrix, filter_by_cluster
from .correction import CorrectionIssue, correction_success_rate
from .pipeline import compute_run_id, run_pipeline
from .projection import (
    MapPoint,
    ProjectionModel,
    ProjectionParams,
    fit_projection,
    transform_points,
)
from .spans import SpanResolution, normalize_ws, resolve_span
from .store import load_run, save_run
from .types import (
    Criterion,
    EvaluationRun,
    ExampleFunction,
    FunctionAssessment,
    OutputEvaluation,
    RatingResult,
    Record,
    WHOLE,
    holistic_score,
)

__version__ = "0.1.0"

__all__ = [
    "BaseCluster",
    "ClusterHierarchy",
    "ClusterStats",
    "CompletionRequest",
    "CorrectionIssue",
    "Criterion",
    "Dataset",
    "DatasetError",
    "EmbeddingVector",
    "EvaluationParseError",
    "EvaluationRun",
    "ExampleFunction",
    "ExtractionScore",
    "FlatClustering",
    "FunctionAssessment",
    "LLMGateway",
    "MapPoint",
    "MockBackend",
    "NoiseSet",
    "OutputEvaluation",
    "ProjectionModel",
    "ProjectionParams",
    "RatingResult",
    "Record",
    "RecordEvaluation",
    "SpanResolution",
    "SuperCluster",
    "Transcript",
    "WHOLE",
    "build_hierarchy",
    "build_super_clusters",
    "co_occurrence_matrix",
    "compute_run_id",
    "correction_success_rate",
    "evaluate_record",
    "filter_by_cluster",
    "fit_projection",
    "hdbscan_cluster",
    "holistic_score",
    "kmeans_cluster",
    "label_base_cluster",
    "load_criteria",
    "load_dataset",
    "load_run",
    "normalize_ws",
    "pairwise_accuracy",
    "parse_evaluation_document",
    "rating_baseline",
    "resolve_span",
    "run_pipeline",
    "save_run",
    "sentence_prf",
    "split_sentences",
    "token_iou",
    "transform_points",
    "whitespace_tokenize",
]
