"""Dataset and criteria ingestion.

Datasets are line-delimited JSON, one record per line with required
``input`` and ``output`` fields and an optional ``id``. Criteria files may
be either a JSON array or JSONL; both forms carry the same per-criterion
schema (name, description, and the three example sets).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .types import Criterion, ExampleFunction, Record, content_hash


class DatasetError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class Dataset:
    dataset_id: str
    records: tuple[Record, ...]

    def __len__(self) -> int:
        return len(self.records)

    def by_id(self) -> dict[str, Record]:
        return {r.record_id: r for r in self.records}


def load_dataset(path: str | Path) -> Dataset:
    """Load a JSONL dataset, assigning ``rec-NNNN`` ids to lines without one.

    Raises DatasetError naming the line for malformed documents, the id for
    duplicates, and the path for empty files.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    records: list[Record] = []
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{path.name}: malformed document on line {lineno}: {exc.msg}") from exc
        if not isinstance(doc, dict):
            raise DatasetError(f"{path.name}: line {lineno} is not an object")
        missing = [k for k in ("input", "output") if k not in doc]
        if missing:
            raise DatasetError(f"{path.name}: line {lineno} missing field(s) {', '.join(missing)}")
        record_id = str(doc.get("id") or f"rec-{lineno:04d}")
        if record_id in seen:
            raise DatasetError(f"{path.name}: duplicate record id {record_id!r} on line {lineno}")
        seen.add(record_id)
        try:
            records.append(Record(record_id=record_id, input=str(doc["input"]), output=str(doc["output"])))
        except ValueError as exc:
            raise DatasetError(f"{path.name}: line {lineno}: {exc}") from exc
    if not records:
        raise DatasetError(f"{path.name}: dataset is empty")
    dataset_id = content_hash(*(f"{r.record_id}\x00{r.input}\x00{r.output}" for r in records))[:16]
    return Dataset(dataset_id=dataset_id, records=tuple(records))


def _example_from_doc(doc: dict, role: str, criterion_name: str, index: int) -> ExampleFunction:
    origin = doc.get("origin")
    return ExampleFunction(
        example_id=str(doc.get("example_id") or f"ex-{criterion_name}-{role}-{index}"),
        function_description=str(doc.get("function_description", "")),
        fragment=str(doc.get("fragment", "")),
        polarity_role=role,
        origin=tuple(origin) if origin else None,
    )


def criterion_from_doc(doc: dict, fallback_id: str) -> Criterion:
    sets: dict[str, tuple[ExampleFunction, ...]] = {}
    name = str(doc.get("name", ""))
    for role in ("positive", "negative", "excluded"):
        raw = doc.get(f"{role}_examples", []) or []
        sets[role] = tuple(
            _example_from_doc(e, role, name, i) for i, e in enumerate(raw, start=1)
        )
    return Criterion(
        criterion_id=str(doc.get("criterion_id") or fallback_id),
        name=name,
        description=str(doc.get("description", "")),
        positive_examples=sets["positive"],
        negative_examples=sets["negative"],
        excluded_examples=sets["excluded"],
    )


def load_criteria(path: str | Path) -> tuple[Criterion, ...]:
    """Load criteria from a JSON array or JSONL file."""
    path = Path(path)
    text = path.read_text(encoding="utf-8").strip()
    if not text:
        raise DatasetError(f"{path.name}: criteria file is empty")
    if text.lstrip().startswith("["):
        docs = json.loads(text)
    else:
        docs = [json.loads(line) for line in text.splitlines() if line.strip()]
    criteria = []
    seen: set[str] = set()
    for i, doc in enumerate(docs, start=1):
        try:
            criterion = criterion_from_doc(doc, fallback_id=f"crit-{i:02d}")
        except ValueError as exc:
            raise DatasetError(f"{path.name}: criterion {i}: {exc}") from exc
        if criterion.criterion_id in seen:
            raise DatasetError(f"{path.name}: duplicate criterion id {criterion.criterion_id!r}")
        seen.add(criterion.criterion_id)
        criteria.append(criterion)
    return tuple(criteria)
