"""Correction-success protocol.

Each issue names a fragment in one record's output that should, under a
refined criterion, either flip its rating or stop being extracted. Each
issue's record is re-evaluated ``runs_per_output`` times; a newly extracted
fragment matches the issue fragment when their token IoU exceeds 0.5.
A flip issue is corrected when a matching fragment carries the target
rating; an exclude issue is corrected when nothing matches at all.
"""

from __future__ import annotations

from dataclasses import dataclass

from .evaluator import evaluate_record
from .gateway import LLMGateway
from .metrics import token_iou
from .spans import resolve_span
from .types import Criterion, NEGATIVE, POSITIVE, Record

IOU_MATCH_THRESHOLD = 0.5

FLIP_TO_NEGATIVE = "flip_to_negative"
FLIP_TO_POSITIVE = "flip_to_positive"
EXCLUDE = "exclude"
ISSUE_KINDS = (FLIP_TO_NEGATIVE, FLIP_TO_POSITIVE, EXCLUDE)


@dataclass(frozen=True, slots=True)
class CorrectionIssue:
    issue_id: str
    kind: str
    issue_fragment: str
    record_ref: str

    def __post_init__(self) -> None:
        if self.kind not in ISSUE_KINDS:
            raise ValueError(f"unknown issue kind {self.kind!r}")
        if not self.issue_fragment:
            raise ValueError("issue_fragment must be non-empty")


def _target_rating(kind: str) -> str:
    return NEGATIVE if kind == FLIP_TO_NEGATIVE else POSITIVE


def issue_corrected(
    issue: CorrectionIssue,
    record: Record,
    extracted: list[tuple[tuple[int, int] | None, str, bool]],
) -> bool:
    """Decide one (issue, run) outcome from (span, rating, excluded) triples."""
    gold = resolve_span(record.output, issue.issue_fragment)
    if not gold.resolved:
        raise ValueError(
            f"issue {issue.issue_id}: fragment not resolvable in record {record.record_id}"
        )
    matches = [
        (rating, excluded)
        for span, rating, excluded in extracted
        if span is not None
        and token_iou([span], [gold.span], record.output) > IOU_MATCH_THRESHOLD
    ]
    if issue.kind == EXCLUDE:
        return not matches
    target = _target_rating(issue.kind)
    return any(rating == target and not excluded for rating, excluded in matches)


def correction_success_rate(
    issues: list[CorrectionIssue],
    records: dict[str, Record],
    refined_criterion: Criterion,
    gateway: LLMGateway,
    runs_per_output: int = 3,
) -> float:
    """Fraction of (issue, run) pairs corrected under the refined criterion."""
    if not issues:
        raise ValueError("at least one issue is required")
    corrected = 0
    for issue in issues:
        record = records[issue.record_ref]
        for _ in range(runs_per_output):
            result = evaluate_record(record, [refined_criterion], gateway)
            extracted = [
                (a.span, a.rating, a.excluded)
                for a in result.assessments.values()
                if a.criterion_id == refined_criterion.criterion_id
            ]
            if issue_corrected(issue, record, extracted):
                corrected += 1
    return corrected / (len(issues) * runs_per_output)
