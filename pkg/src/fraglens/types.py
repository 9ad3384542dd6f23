"""Domain types shared across the evaluation pipeline.

All types are immutable value objects after construction; mutation helpers
return new instances. Ratings use the closed vocabulary ``positive`` /
``negative``; a fragment equal to :data:`WHOLE` stands for the entire output.
"""

from __future__ import annotations

import hashlib
import uuid
from dataclasses import dataclass, field, replace

WHOLE = "$WHOLE$"

POSITIVE = "positive"
NEGATIVE = "negative"
RATINGS = (POSITIVE, NEGATIVE)

EXAMPLE_ROLES = ("positive", "negative", "excluded")


def new_id(prefix: str) -> str:
    return f"{prefix}-{uuid.uuid4().hex[:12]}"


def content_hash(*parts: str) -> str:
    h = hashlib.sha256()
    for part in parts:
        h.update(part.encode("utf-8"))
        h.update(b"\x1f")
    return h.hexdigest()


@dataclass(frozen=True, slots=True)
class Record:
    """One input/output pair produced by the model under evaluation."""

    record_id: str
    input: str
    output: str

    def __post_init__(self) -> None:
        if not self.output:
            raise ValueError(f"record {self.record_id!r}: output must be non-empty")


@dataclass(frozen=True, slots=True)
class ExampleFunction:
    """A few-shot correction example attached to a criterion."""

    example_id: str
    function_description: str
    fragment: str
    polarity_role: str
    origin: tuple[str, str] | None = None  # (record_id, criterion_id)

    def __post_init__(self) -> None:
        if not self.function_description:
            raise ValueError("example function_description must be non-empty")
        if self.polarity_role not in EXAMPLE_ROLES:
            raise ValueError(f"unknown polarity_role {self.polarity_role!r}")


@dataclass(frozen=True, slots=True)
class Criterion:
    """A named natural-language evaluation standard with example sets."""

    criterion_id: str
    name: str
    description: str
    positive_examples: tuple[ExampleFunction, ...] = ()
    negative_examples: tuple[ExampleFunction, ...] = ()
    excluded_examples: tuple[ExampleFunction, ...] = ()

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("criterion name must be non-empty")
        ids = [e.example_id for s in self.example_sets().values() for e in s]
        if len(ids) != len(set(ids)):
            raise ValueError(f"criterion {self.name!r}: example sets share example_ids")

    def example_sets(self) -> dict[str, tuple[ExampleFunction, ...]]:
        return {
            "positive": self.positive_examples,
            "negative": self.negative_examples,
            "excluded": self.excluded_examples,
        }

    def with_examples(self, role: str, examples: tuple[ExampleFunction, ...]) -> "Criterion":
        key = {"positive": "positive_examples", "negative": "negative_examples",
               "excluded": "excluded_examples"}[role]
        return replace(self, **{key: examples})


@dataclass(frozen=True, slots=True)
class FunctionAssessment:
    """One extracted fragment with its function label, rating, and analysis.

    ``span`` indexes into the owning record's output; it is absent when the
    fragment could not be located (the assessment is still stored and scored).
    ``span_ambiguous`` records that the fragment text occurs more than once
    and the first occurrence was chosen.
    """

    assessment_id: str
    record_id: str
    criterion_id: str
    fragment: str
    function_description: str
    rating: str
    excluded: bool = False
    analysis: str = ""
    span: tuple[int, int] | None = None
    span_ambiguous: bool = False

    def __post_init__(self) -> None:
        if self.rating not in RATINGS:
            raise ValueError(f"rating must be one of {RATINGS}, got {self.rating!r}")


@dataclass(frozen=True, slots=True)
class OutputEvaluation:
    """Evaluation of one (record, criterion) pair."""

    record_id: str
    criterion_id: str
    assessments: tuple[str, ...]  # assessment_ids, in document order
    holistic_score: float | None
    holistic_justification: str
    keyphrase: str


@dataclass(frozen=True, slots=True)
class RatingResult:
    """Holistic 1-5 rating used as a benchmark comparator."""

    record_id: str
    criterion_id: str
    score: int
    justification: str
    cited_fragments: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not 1 <= self.score <= 5:
            raise ValueError(f"rating score must be in 1..5, got {self.score}")


@dataclass(frozen=True, slots=True)
class EvaluationRun:
    """A completed evaluation: criteria snapshot, evaluations, assessments,
    and the optional per-criterion cluster hierarchy.

    The criteria snapshot is immutable after completion; corrections to
    example sets only affect future runs.
    """

    run_id: str
    dataset_id: str
    seed: int
    criteria: tuple[Criterion, ...]
    evaluations: tuple[OutputEvaluation, ...]
    assessments: dict[str, FunctionAssessment] = field(default_factory=dict)
    hierarchies: dict[str, "object"] = field(default_factory=dict)  # criterion_id -> ClusterHierarchy
    created_at: str = ""

    def assessments_for(self, evaluation: OutputEvaluation) -> list[FunctionAssessment]:
        return [self.assessments[a] for a in evaluation.assessments]

    def evaluations_by_criterion(self, criterion_id: str) -> list[OutputEvaluation]:
        return [e for e in self.evaluations if e.criterion_id == criterion_id]


def holistic_score(assessments: list[FunctionAssessment] | tuple[FunctionAssessment, ...]) -> float | None:
    """Ratio of positively rated, non-excluded assessments to all non-excluded ones.

    Returns None when every assessment is excluded (or the list is empty):
    there is nothing to score.
    """
    scored = [a for a in assessments if not a.excluded]
    if not scored:
        return None
    positives = sum(1 for a in scored if a.rating == POSITIVE)
    return positives / len(scored)
