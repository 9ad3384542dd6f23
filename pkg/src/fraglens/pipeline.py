"""End-to-end pipeline: evaluate every record on every criterion, then build
the per-criterion cluster hierarchies.

The run id is a content hash of the inputs (dataset, criteria snapshot,
seed, template version), so re-running the same inputs against the same
transcript reproduces the run directory byte-for-byte (timestamps live only
in meta.json).
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

from .dataset import Dataset
from .evaluator import RecordEvaluation, evaluate_record
from .gateway import LLMGateway
from .hierarchy import build_hierarchy
from .projection import ProjectionParams
from .prompts import TEMPLATE_VERSION
from .store import criterion_to_doc
from .types import Criterion, EvaluationRun, content_hash

logger = logging.getLogger(__name__)


def compute_run_id(dataset: Dataset, criteria: tuple[Criterion, ...], seed: int) -> str:
    criteria_blob = json.dumps(
        [criterion_to_doc(c) for c in criteria], sort_keys=True, ensure_ascii=False
    )
    digest = content_hash(dataset.dataset_id, criteria_blob, str(seed), TEMPLATE_VERSION)
    return f"run-{digest[:16]}"


def run_pipeline(
    dataset: Dataset,
    criteria: tuple[Criterion, ...] | list[Criterion],
    gateway: LLMGateway,
    seed: int = 0,
    *,
    skip_clustering: bool = False,
    parallelism: int = 4,
    label_language: str | None = None,
    min_cluster_size: int | None = None,
    projection_params: ProjectionParams = ProjectionParams(),
    dedup_target: int | None = None,
    phase_cb=None,
) -> EvaluationRun:
    """Evaluate a dataset and (optionally) cluster the surfaced functions.

    Records may be evaluated concurrently up to ``parallelism``, but results
    are merged in dataset order. Replay/mock gateways force sequential
    execution so per-fingerprint transcript queues are consumed in recording
    order.
    """
    criteria = tuple(criteria)
    workers = 1 if gateway.deterministic else max(1, parallelism)

    def _notify(phase: str, completed: int = 0, total: int = 0) -> None:
        if phase_cb:
            phase_cb(phase, completed, total)

    total = len(dataset.records)
    _notify("evaluating", 0, total)
    results: list[RecordEvaluation] = []
    if workers == 1:
        for i, record in enumerate(dataset.records, start=1):
            results.append(evaluate_record(record, criteria, gateway, label_language=label_language))
            _notify("evaluating", i, total)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(evaluate_record, record, criteria, gateway, label_language=label_language)
                for record in dataset.records
            ]
            for i, future in enumerate(futures, start=1):
                results.append(future.result())
                _notify("evaluating", i, total)

    evaluations = []
    assessments = {}
    for result in results:
        evaluations.extend(result.evaluations)
        assessments.update(result.assessments)

    hierarchies = {}
    if not skip_clustering:
        for index, criterion in enumerate(criteria):
            subset = [
                assessments[aid]
                for e in evaluations
                if e.criterion_id == criterion.criterion_id
                for aid in e.assessments
            ]
            if len(subset) < 2:
                logger.warning(
                    "criterion %s has %d assessments; skipping its hierarchy",
                    criterion.criterion_id, len(subset),
                )
                continue
            hierarchies[criterion.criterion_id] = build_hierarchy(
                criterion.criterion_id,
                subset,
                gateway,
                seed=seed + index,
                min_cluster_size=min_cluster_size,
                projection_params=projection_params,
                dedup_target=dedup_target,
                phase_cb=lambda phase: _notify(phase, index, len(criteria)),
            )

    return EvaluationRun(
        run_id=compute_run_id(dataset, criteria, seed),
        dataset_id=dataset.dataset_id,
        seed=seed,
        criteria=criteria,
        evaluations=tuple(evaluations),
        assessments=assessments,
        hierarchies=hierarchies,
        created_at=datetime.now(timezone.utc).isoformat(),
    )
