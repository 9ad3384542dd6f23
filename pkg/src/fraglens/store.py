"""Line-delimited on-disk persistence for datasets, criteria, and runs.

A run directory holds dataset.jsonl, criteria.jsonl, evaluations.jsonl,
hierarchy.jsonl, meta.json, and transcript.json. Every file except
meta.json (which carries the creation timestamp) is a deterministic
function of the run's inputs, so identical runs produce identical bytes.

Writers take an exclusive lockfile per run directory; readers need nothing.
"""

from __future__ import annotations

import json
import os
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path

from .dataset import Dataset, criterion_from_doc
from .gateway import Transcript
from .hierarchy import ClusterHierarchy
from .prompts import TEMPLATE_VERSION
from .types import (
    Criterion,
    EvaluationRun,
    FunctionAssessment,
    OutputEvaluation,
    Record,
)


class StoreError(RuntimeError):
    pass


def _dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, ensure_ascii=False)


def _write_lines(path: Path, docs: list[dict]) -> None:
    path.write_text("".join(_dumps(d) + "\n" for d in docs), encoding="utf-8")


def _read_lines(path: Path) -> list[dict]:
    return [
        json.loads(line)
        for line in path.read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]


@contextmanager
def run_writer_lock(run_dir: Path):
    """Single writer per run directory; concurrent readers are unrestricted."""
    run_dir.mkdir(parents=True, exist_ok=True)
    lock_path = run_dir / ".write.lock"
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError as exc:
        raise StoreError(f"run directory {run_dir} already has an active writer") from exc
    try:
        os.write(fd, str(os.getpid()).encode())
        yield
    finally:
        os.close(fd)
        lock_path.unlink(missing_ok=True)


def criterion_to_doc(criterion: Criterion) -> dict:
    def examples(items) -> list[dict]:
        return [
            {
                "example_id": e.example_id,
                "function_description": e.function_description,
                "fragment": e.fragment,
                "origin": list(e.origin) if e.origin else None,
            }
            for e in items
        ]

    return {
        "criterion_id": criterion.criterion_id,
        "name": criterion.name,
        "description": criterion.description,
        "positive_examples": examples(criterion.positive_examples),
        "negative_examples": examples(criterion.negative_examples),
        "excluded_examples": examples(criterion.excluded_examples),
    }


def assessment_to_doc(a: FunctionAssessment) -> dict:
    return {
        "assessment_id": a.assessment_id,
        "record_id": a.record_id,
        "criterion_id": a.criterion_id,
        "fragment": a.fragment,
        "function_description": a.function_description,
        "rating": a.rating,
        "excluded": a.excluded,
        "analysis": a.analysis,
        "span": list(a.span) if a.span is not None else None,
        "span_ambiguous": a.span_ambiguous,
    }


def assessment_from_doc(doc: dict) -> FunctionAssessment:
    return FunctionAssessment(
        assessment_id=doc["assessment_id"],
        record_id=doc["record_id"],
        criterion_id=doc["criterion_id"],
        fragment=doc["fragment"],
        function_description=doc["function_description"],
        rating=doc["rating"],
        excluded=doc["excluded"],
        analysis=doc["analysis"],
        span=tuple(doc["span"]) if doc["span"] is not None else None,
        span_ambiguous=doc.get("span_ambiguous", False),
    )


def save_run(
    run_dir: str | Path,
    dataset: Dataset,
    run: EvaluationRun,
    transcript: Transcript | None = None,
) -> Path:
    run_dir = Path(run_dir)
    with run_writer_lock(run_dir):
        _write_lines(
            run_dir / "dataset.jsonl",
            [{"id": r.record_id, "input": r.input, "output": r.output} for r in dataset.records],
        )
        _write_lines(run_dir / "criteria.jsonl", [criterion_to_doc(c) for c in run.criteria])

        eval_docs = []
        for e in run.evaluations:
            eval_docs.append({
                "record_id": e.record_id,
                "criterion_id": e.criterion_id,
                "holistic_score": e.holistic_score,
                "holistic_justification": e.holistic_justification,
                "keyphrase": e.keyphrase,
                "assessments": [
                    assessment_to_doc(run.assessments[aid]) for aid in e.assessments
                ],
            })
        _write_lines(run_dir / "evaluations.jsonl", eval_docs)

        _write_lines(
            run_dir / "hierarchy.jsonl",
            [run.hierarchies[cid].to_doc() for cid in sorted(run.hierarchies)],
        )

        meta = {
            "run_id": run.run_id,
            "dataset_id": run.dataset_id,
            "seed": run.seed,
            "template_version": TEMPLATE_VERSION,
            "created_at": run.created_at or datetime.now(timezone.utc).isoformat(),
        }
        (run_dir / "meta.json").write_text(_dumps(meta) + "\n", encoding="utf-8")

        if transcript is not None:
            transcript.save(run_dir / "transcript.json")
    return run_dir


def load_run(run_dir: str | Path) -> tuple[Dataset, EvaluationRun]:
    run_dir = Path(run_dir)
    if not (run_dir / "meta.json").exists():
        raise StoreError(f"{run_dir} is not a run directory (no meta.json)")
    meta = json.loads((run_dir / "meta.json").read_text(encoding="utf-8"))

    records = tuple(
        Record(record_id=d["id"], input=d["input"], output=d["output"])
        for d in _read_lines(run_dir / "dataset.jsonl")
    )
    dataset = Dataset(dataset_id=meta["dataset_id"], records=records)

    criteria = tuple(
        criterion_from_doc(d, fallback_id=d["criterion_id"])
        for d in _read_lines(run_dir / "criteria.jsonl")
    )

    evaluations: list[OutputEvaluation] = []
    assessments: dict[str, FunctionAssessment] = {}
    for doc in _read_lines(run_dir / "evaluations.jsonl"):
        docs = doc["assessments"]
        for adoc in docs:
            a = assessment_from_doc(adoc)
            assessments[a.assessment_id] = a
        evaluations.append(OutputEvaluation(
            record_id=doc["record_id"],
            criterion_id=doc["criterion_id"],
            assessments=tuple(a["assessment_id"] for a in docs),
            holistic_score=doc["holistic_score"],
            holistic_justification=doc["holistic_justification"],
            keyphrase=doc["keyphrase"],
        ))

    hierarchies: dict[str, ClusterHierarchy] = {}
    hier_path = run_dir / "hierarchy.jsonl"
    if hier_path.exists():
        for doc in _read_lines(hier_path):
            hierarchies[doc["criterion_id"]] = ClusterHierarchy.from_doc(doc)

    run = EvaluationRun(
        run_id=meta["run_id"],
        dataset_id=meta["dataset_id"],
        seed=meta["seed"],
        criteria=criteria,
        evaluations=tuple(evaluations),
        assessments=assessments,
        hierarchies=hierarchies,
        created_at=meta["created_at"],
    )
    return dataset, run


def load_transcript(run_dir: str | Path) -> Transcript | None:
    path = Path(run_dir) / "transcript.json"
    return Transcript.load(path) if path.exists() else None
