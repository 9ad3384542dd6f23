"""Turn completions into structured evaluations.

The evaluator sends one prompt per record covering all criteria, parses the
fenced YAML document it gets back, and materializes one FunctionAssessment
per feature block plus one OutputEvaluation per criterion. A malformed
completion earns exactly one re-ask with a corrective instruction appended
before the failure is surfaced.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import yaml

from . import prompts
from .gateway import BENCHMARK_TEMPERATURE, CompletionRequest, LLMGateway, PIPELINE_TEMPERATURE
from .spans import resolve_span
from .types import (
    Criterion,
    FunctionAssessment,
    OutputEvaluation,
    RatingResult,
    Record,
    holistic_score,
)

_FENCE = re.compile(r"```(?:yaml|yml)?[ \t]*\n(.*?)```", re.DOTALL)
_OPEN_FENCE = re.compile(r"```(?:yaml|yml)?[ \t]*\n")

REASK_INSTRUCTION = (
    "Your previous response could not be parsed. Respond again, emitting only a "
    "single fenced ```yaml block that follows the required output format exactly."
)


class EvaluationParseError(ValueError):
    """Base for structured-output failures; ``location`` names the offender."""

    def __init__(self, message: str, location: str = "") -> None:
        super().__init__(f"{message} (at {location})" if location else message)
        self.location = location


class MissingFencedBlockError(EvaluationParseError):
    pass


class StructuralError(EvaluationParseError):
    pass


class DanglingFragmentError(EvaluationParseError):
    pass


class IllegalAlignmentError(EvaluationParseError):
    pass


@dataclass(frozen=True, slots=True)
class RawFragment:
    id: int
    text: str


@dataclass(frozen=True, slots=True)
class RawFeature:
    fragment_id: int
    analysis: str
    feature: str
    is_excluded: bool
    alignment: str


@dataclass(frozen=True, slots=True)
class CriterionBlock:
    criterion_name: str
    reading: str
    fragments: tuple[RawFragment, ...]
    features: tuple[RawFeature, ...]
    overall_justification: str
    keyphrase: str


@dataclass(frozen=True, slots=True)
class RawEvaluationDocument:
    blocks: tuple[CriterionBlock, ...]

    def block_for(self, criterion_name: str) -> CriterionBlock | None:
        for block in self.blocks:
            if block.criterion_name == criterion_name:
                return block
        return None


def extract_fenced_block(text: str) -> str:
    match = _FENCE.search(text)
    if match is None:
        if _OPEN_FENCE.search(text):
            raise MissingFencedBlockError(
                "fenced block is unterminated (completion likely truncated)"
            )
        raise MissingFencedBlockError("no fenced code block found in completion")
    return match.group(1)


def _as_bool(value, location: str) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.strip().lower() in ("true", "false"):
        return value.strip().lower() == "true"
    raise StructuralError(f"is_excluded must be true/false, got {value!r}", location)


def _as_text(value) -> str:
    return "" if value is None else str(value)


def parse_evaluation_document(text: str) -> RawEvaluationDocument:
    """Parse a raw completion into a validated document.

    Distinct error types: MissingFencedBlockError, StructuralError (YAML or
    shape problems), DanglingFragmentError, IllegalAlignmentError.
    """
    body = extract_fenced_block(text)
    try:
        doc = yaml.safe_load(body)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f"line {mark.line + 1}" if mark else "document"
        raise StructuralError(f"invalid YAML: {exc}", loc) from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("evaluations"), list):
        raise StructuralError("document must be a mapping with an 'evaluations' list", "document")

    blocks: list[CriterionBlock] = []
    for b_idx, raw in enumerate(doc["evaluations"]):
        loc = f"evaluations[{b_idx}]"
        if not isinstance(raw, dict):
            raise StructuralError("criterion block must be a mapping", loc)
        name = _as_text(raw.get("criterion_name")).strip()
        if not name:
            raise StructuralError("criterion_name missing or empty", loc)

        fragments: list[RawFragment] = []
        frag_ids: set[int] = set()
        for f_idx, frag in enumerate(raw.get("fragments") or []):
            floc = f"{loc}.fragments[{f_idx}]"
            if not isinstance(frag, dict) or "id" not in frag:
                raise StructuralError("fragment entry needs an 'id'", floc)
            try:
                fid = int(frag["id"])
            except (TypeError, ValueError):
                raise StructuralError(f"fragment id {frag['id']!r} is not an integer", floc)
            fragments.append(RawFragment(id=fid, text=_as_text(frag.get("fragment"))))
            frag_ids.add(fid)

        features: list[RawFeature] = []
        for f_idx, feat in enumerate(raw.get("features") or []):
            floc = f"{loc}.features[{f_idx}]"
            if not isinstance(feat, dict) or "fragment_id" not in feat:
                raise StructuralError("feature entry needs a 'fragment_id'", floc)
            try:
                fid = int(feat["fragment_id"])
            except (TypeError, ValueError):
                raise StructuralError(f"fragment_id {feat['fragment_id']!r} is not an integer", floc)
            if fid not in frag_ids:
                raise DanglingFragmentError(
                    f"feature references fragment_id {fid} but listed ids are "
                    f"{sorted(frag_ids)}", floc,
                )
            alignment = _as_text(feat.get("alignment")).strip().lower()
            if alignment not in ("positive", "negative"):
                raise IllegalAlignmentError(f"alignment {alignment!r} not in positive/negative", floc)
            features.append(RawFeature(
                fragment_id=fid,
                analysis=_as_text(feat.get("analysis")).strip(),
                feature=_as_text(feat.get("feature")).strip(),
                is_excluded=_as_bool(feat.get("is_excluded", False), floc),
                alignment=alignment,
            ))

        blocks.append(CriterionBlock(
            criterion_name=name,
            reading=_as_text(raw.get("reading")),
            fragments=tuple(fragments),
            features=tuple(features),
            overall_justification=_as_text(raw.get("overall_justification")).strip(),
            keyphrase=_as_text(raw.get("keyphrase")).strip(),
        ))
    return RawEvaluationDocument(blocks=tuple(blocks))


@dataclass(slots=True)
class RecordEvaluation:
    """Everything produced by one evaluator call on one record."""

    record_id: str
    evaluations: list[OutputEvaluation] = field(default_factory=list)
    assessments: dict[str, FunctionAssessment] = field(default_factory=dict)
    retry_count: int = 0


def _materialize_block(
    record: Record, criterion: Criterion, block: CriterionBlock
) -> tuple[OutputEvaluation, list[FunctionAssessment]]:
    frag_text = {f.id: f.text.strip() for f in block.fragments}
    assessments: list[FunctionAssessment] = []
    for seq, feat in enumerate(block.features, start=1):
        fragment = frag_text[feat.fragment_id]
        resolution = resolve_span(record.output, fragment) if fragment else None
        assessments.append(FunctionAssessment(
            assessment_id=f"as-{record.record_id}-{criterion.criterion_id}-{seq:03d}",
            record_id=record.record_id,
            criterion_id=criterion.criterion_id,
            fragment=fragment,
            function_description=feat.feature,
            rating=feat.alignment,
            excluded=feat.is_excluded,
            analysis=feat.analysis,
            span=resolution.span if resolution else None,
            span_ambiguous=resolution.ambiguous if resolution else False,
        ))
    evaluation = OutputEvaluation(
        record_id=record.record_id,
        criterion_id=criterion.criterion_id,
        assessments=tuple(a.assessment_id for a in assessments),
        holistic_score=holistic_score(assessments),
        holistic_justification=block.overall_justification,
        keyphrase=block.keyphrase,
    )
    return evaluation, assessments


def evaluate_record(
    record: Record,
    criteria: list[Criterion] | tuple[Criterion, ...],
    gateway: LLMGateway,
    *,
    temperature: float = PIPELINE_TEMPERATURE,
    label_language: str | None = None,
) -> RecordEvaluation:
    """Evaluate one record on every criterion with a single completion.

    The multi-criterion response is split into independent OutputEvaluations
    keyed by criterion name; unknown names in the response are an error, as
    is a criterion the response failed to cover.
    """
    system, user = prompts.build_evaluation_prompt(
        record, criteria, label_language=label_language
    )
    result = RecordEvaluation(record_id=record.record_id)
    req = CompletionRequest(
        system_prompt=system, user_prompt=user,
        temperature=temperature, tag=f"evaluate:{record.record_id}",
    )
    try:
        document = parse_evaluation_document(gateway.complete(req))
    except EvaluationParseError:
        result.retry_count = 1
        reask = CompletionRequest(
            system_prompt=system,
            user_prompt=f"{user}\n\n{REASK_INSTRUCTION}",
            temperature=temperature,
            tag=f"evaluate-retry:{record.record_id}",
        )
        document = parse_evaluation_document(gateway.complete(reask))

    known = {c.name: c for c in criteria}
    for block in document.blocks:
        if block.criterion_name not in known:
            raise StructuralError(
                f"response contains unknown criterion {block.criterion_name!r}",
                f"record {record.record_id}",
            )
    for criterion in criteria:
        block = document.block_for(criterion.name)
        if block is None:
            raise StructuralError(
                f"response is missing criterion {criterion.name!r}",
                f"record {record.record_id}",
            )
        evaluation, assessments = _materialize_block(record, criterion, block)
        result.evaluations.append(evaluation)
        for a in assessments:
            result.assessments[a.assessment_id] = a
    return result


class RatingParseError(ValueError):
    pass


def rating_baseline(
    record: Record,
    criterion: Criterion,
    gateway: LLMGateway,
    *,
    temperature: float = BENCHMARK_TEMPERATURE,
) -> RatingResult:
    """Holistic 1-5 scoring comparator: reason, score, cite fragments."""
    system, user = prompts.build_rating_prompt(record, criterion)
    req = CompletionRequest(
        system_prompt=system, user_prompt=user,
        temperature=temperature, tag=f"rating:{record.record_id}",
    )
    text = gateway.complete(req)
    try:
        body = extract_fenced_block(text)
        doc = yaml.safe_load(body)
    except (EvaluationParseError, yaml.YAMLError) as exc:
        raise RatingParseError(f"rating completion unparseable: {exc}") from exc
    if not isinstance(doc, dict) or "score" not in doc:
        raise RatingParseError("rating completion has no score field")
    try:
        score = int(doc["score"])
    except (TypeError, ValueError) as exc:
        raise RatingParseError(f"rating score {doc['score']!r} is not an integer") from exc
    if not 1 <= score <= 5:
        raise RatingParseError(f"rating score {score} out of range 1..5")
    fragments = tuple(
        str(f).strip() for f in (doc.get("fragments") or []) if str(f).strip()
    )
    return RatingResult(
        record_id=record.record_id,
        criterion_id=criterion.criterion_id,
        score=score,
        justification=str(doc.get("explanation", "")).strip(),
        cited_fragments=fragments,
    )
