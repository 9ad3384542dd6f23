"""Benchmark harness: extraction quality against gold spans, and pairwise
preference accuracy, reported per method as structured data plus an aligned
text table.

Gold annotation files are JSONL: one document per record with ``id`` and
``annotations`` (a list of {criterion, spans} objects). Extraction metrics
are macro-averaged over records within each criterion.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .metrics import extraction_score, pairwise_accuracy
from .spans import resolve_span
from .types import EvaluationRun, RatingResult, Record

Span = tuple[int, int]
MethodSpans = dict[str, dict[str, list[Span]]]  # record_id -> criterion name -> spans


class AlignmentError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class GoldAnnotations:
    spans: dict[str, dict[str, list[Span]]]  # record_id -> criterion -> spans

    @property
    def criteria(self) -> list[str]:
        names: list[str] = []
        for per_record in self.spans.values():
            for name in per_record:
                if name not in names:
                    names.append(name)
        return names


def load_gold(path: str | Path) -> GoldAnnotations:
    spans: dict[str, dict[str, list[Span]]] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        doc = json.loads(line)
        record_id = str(doc["id"])
        per_criterion: dict[str, list[Span]] = {}
        for ann in doc.get("annotations", []):
            per_criterion[str(ann["criterion"])] = [
                (int(s), int(e)) for s, e in ann.get("spans", [])
            ]
        spans[record_id] = per_criterion
    if not spans:
        raise AlignmentError(f"{Path(path).name}: no gold annotations found")
    return GoldAnnotations(spans=spans)


def spans_from_run(run: EvaluationRun) -> MethodSpans:
    """Extracted spans per (record, criterion name) from a fragment-level run."""
    names = {c.criterion_id: c.name for c in run.criteria}
    out: MethodSpans = {}
    for evaluation in run.evaluations:
        crit_name = names[evaluation.criterion_id]
        spans = [
            a.span
            for a in (run.assessments[aid] for aid in evaluation.assessments)
            if a.span is not None
        ]
        out.setdefault(evaluation.record_id, {})[crit_name] = spans
    return out


def spans_from_ratings(
    results: list[RatingResult], records: dict[str, Record], criterion_names: dict[str, str]
) -> MethodSpans:
    """Spans for the holistic baseline, resolving each cited fragment."""
    out: MethodSpans = {}
    for result in results:
        record = records[result.record_id]
        spans = []
        for fragment in result.cited_fragments:
            resolution = resolve_span(record.output, fragment)
            if resolution.resolved:
                spans.append(resolution.span)
        name = criterion_names[result.criterion_id]
        out.setdefault(result.record_id, {})[name] = spans
    return out


def extraction_report(
    methods: dict[str, MethodSpans],
    gold: GoldAnnotations,
    texts: dict[str, str],
) -> dict:
    """Per-method, per-criterion mean IoU/P/R/F1 over gold-annotated records."""
    for method, spans in methods.items():
        missing = sorted(set(gold.spans) - set(spans))
        if missing:
            raise AlignmentError(
                f"method {method!r} lacks records for gold ids: {', '.join(missing)}"
            )
    missing_texts = sorted(set(gold.spans) - set(texts))
    if missing_texts:
        raise AlignmentError(f"missing output texts for gold ids: {', '.join(missing_texts)}")

    report: dict = {"criteria": gold.criteria, "methods": {}}
    for method, spans in methods.items():
        per_criterion: dict[str, dict[str, float]] = {}
        for criterion in gold.criteria:
            rows = []
            for record_id, annotations in gold.spans.items():
                if criterion not in annotations:
                    continue
                pred = spans[record_id].get(criterion, [])
                rows.append(extraction_score(pred, annotations[criterion], texts[record_id]))
            if rows:
                per_criterion[criterion] = {
                    "iou": sum(r.iou for r in rows) / len(rows),
                    "precision": sum(r.precision for r in rows) / len(rows),
                    "recall": sum(r.recall for r in rows) / len(rows),
                    "f1": sum(r.f1 for r in rows) / len(rows),
                    "n": len(rows),
                }
        values = list(per_criterion.values())
        overall = {
            key: sum(v[key] * v["n"] for v in values) / sum(v["n"] for v in values)
            for key in ("iou", "precision", "recall", "f1")
        } if values else {}
        report["methods"][method] = {"per_criterion": per_criterion, "overall": overall}
    return report


def preference_report(
    pairs_by_subset: dict[str, dict[str, list[tuple[float, float, str]]]],
) -> dict:
    """Pairwise accuracy per method and subset plus the pooled overall value."""
    report: dict = {"methods": {}}
    for method, subsets in pairs_by_subset.items():
        per_subset = {name: pairwise_accuracy(pairs) for name, pairs in subsets.items() if pairs}
        pooled = [pair for pairs in subsets.values() for pair in pairs]
        report["methods"][method] = {
            "per_subset": per_subset,
            "overall": pairwise_accuracy(pooled) if pooled else None,
        }
    return report


def format_table(rows: list[list[str]], header: list[str]) -> str:
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    def fmt(row: list[str]) -> str:
        return "  ".join(str(cell).ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
    lines = [fmt(header), fmt(["-" * w for w in widths])]
    lines.extend(fmt(row) for row in rows)
    return "\n".join(lines)


def extraction_table(report: dict) -> str:
    header = ["method", "criterion", "IoU", "P", "R", "F1", "n"]
    rows = []
    for method, data in report["methods"].items():
        for criterion, m in data["per_criterion"].items():
            rows.append([
                method, criterion,
                f"{m['iou']:.3f}", f"{m['precision']:.3f}",
                f"{m['recall']:.3f}", f"{m['f1']:.3f}", str(m["n"]),
            ])
        if data["overall"]:
            o = data["overall"]
            rows.append([
                method, "(overall)",
                f"{o['iou']:.3f}", f"{o['precision']:.3f}",
                f"{o['recall']:.3f}", f"{o['f1']:.3f}", "",
            ])
    return format_table(rows, header)


def preference_table(report: dict) -> str:
    header = ["method", "subset", "accuracy"]
    rows = []
    for method, data in report["methods"].items():
        for subset, acc in data["per_subset"].items():
            rows.append([method, subset, f"{acc:.3f}"])
        if data["overall"] is not None:
            rows.append([method, "(overall)", f"{data['overall']:.3f}"])
    return format_table(rows, header)
