"""Cross-output analytics: cluster filtering, co-occurrence, score aggregates."""

from __future__ import annotations

from dataclasses import dataclass

from .hierarchy import ClusterHierarchy
from .types import EvaluationRun, Record


class UnknownClusterError(KeyError):
    pass


@dataclass(frozen=True, slots=True)
class ClusterStats:
    base_id: str
    matching_record_count: int
    mean_holistic_score: dict[str, float | None]  # criterion_id -> mean over matching records
    co_occurring: tuple[tuple[str, int], ...]  # (base_id, shared record count), descending


def _cluster_record_sets(run: EvaluationRun, hierarchy: ClusterHierarchy) -> dict[str, set[str]]:
    out: dict[str, set[str]] = {}
    for base in hierarchy.base_clusters:
        out[base.base_id] = {
            run.assessments[a].record_id for a in base.member_assessment_ids
        }
    return out


def _find_hierarchy(run: EvaluationRun, base_id: str) -> ClusterHierarchy:
    for hierarchy in run.hierarchies.values():
        if any(b.base_id == base_id for b in hierarchy.base_clusters):
            return hierarchy
    raise UnknownClusterError(f"no base cluster {base_id!r} in this run")


def filter_by_cluster(
    run: EvaluationRun, base_id: str, records: dict[str, Record]
) -> tuple[list[Record], ClusterStats]:
    """Records whose assessments fall in the cluster, plus summary stats.

    Co-occurrence counts shared records with the other base clusters of the
    same criterion's hierarchy, sorted by count (descending, then id).
    """
    hierarchy = _find_hierarchy(run, base_id)
    record_sets = _cluster_record_sets(run, hierarchy)
    matching = record_sets[base_id]

    means: dict[str, float | None] = {}
    for criterion in run.criteria:
        scores = [
            e.holistic_score
            for e in run.evaluations
            if e.criterion_id == criterion.criterion_id
            and e.record_id in matching
            and e.holistic_score is not None
        ]
        means[criterion.criterion_id] = sum(scores) / len(scores) if scores else None

    co = [
        (other_id, len(matching & other_records))
        for other_id, other_records in record_sets.items()
        if other_id != base_id and matching & other_records
    ]
    co.sort(key=lambda pair: (-pair[1], pair[0]))

    stats = ClusterStats(
        base_id=base_id,
        matching_record_count=len(matching),
        mean_holistic_score=means,
        co_occurring=tuple(co),
    )
    ordered = [records[rid] for rid in sorted(matching)]
    return ordered, stats


def co_occurrence_matrix(run: EvaluationRun, criterion_id: str) -> dict[tuple[str, str], int]:
    """Symmetric shared-record counts between base clusters of one criterion."""
    hierarchy = run.hierarchies.get(criterion_id)
    if hierarchy is None:
        raise UnknownClusterError(f"no hierarchy for criterion {criterion_id!r}")
    record_sets = _cluster_record_sets(run, hierarchy)
    ids = sorted(record_sets)
    out: dict[tuple[str, str], int] = {}
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            count = len(record_sets[a] & record_sets[b])
            out[(a, b)] = count
            out[(b, a)] = count
    return out
