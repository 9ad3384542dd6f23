import pytest

from fraglens.evaluator import (
    REASK_INSTRUCTION,
    RatingParseError,
    StructuralError,
    evaluate_record,
    rating_baseline,
)
from fraglens.gateway import (
    BENCHMARK_TEMPERATURE,
    CompletionRequest,
    LLMGateway,
    MockBackend,
    RetriesExhaustedError,
)
from fraglens.prompts import build_evaluation_prompt, build_rating_prompt
from fraglens.types import Criterion, Record

from conftest import eval_document_yaml, mock_backend_for, yaml_block


def gateway_for(pairs, **kwargs):
    return LLMGateway(mock_backend_for(pairs, **kwargs), sleep=lambda _s: None)


def eval_request(record, criteria, suffix: str = "") -> CompletionRequest:
    system, user = build_evaluation_prompt(record, criteria)
    if suffix:
        user = f"{user}\n\n{suffix}"
    return CompletionRequest(system_prompt=system, user_prompt=user)


STORY_DOC = [{
    "criterion_name": "Horror Atmosphere",
    "fragments": [
        (1, "I heard a sigh behind the coats."),
        (2, "Two eyes caught the light and blinked out of sync."),
        (3, "the room went quiet"),
        (4, "Something exhaled against my neck."),
    ],
    "features": [
        {"fragment_id": 1, "feature": "Implied threat through sound", "alignment": "positive"},
        {"fragment_id": 2, "feature": "Uncanny body detail", "alignment": "positive"},
        {"fragment_id": 3, "feature": "Silence as dread", "alignment": "positive"},
        {"fragment_id": 4, "feature": "Direct physical contact reveal", "alignment": "negative"},
    ],
    "overall_justification": "Mostly implicit dread; the final reveal is explicit.",
    "keyphrase": "implicit dread",
}]


class TestEvaluateRecord:
    def test_story_fixture_counts_and_score(self, horror_record, horror_criterion):
        gw = gateway_for([(eval_request(horror_record, [horror_criterion]),
                           eval_document_yaml(STORY_DOC))])
        result = evaluate_record(horror_record, [horror_criterion], gw)
        assert len(result.evaluations) == 1
        evaluation = result.evaluations[0]
        assert len(evaluation.assessments) == 4
        assert evaluation.holistic_score == 0.75
        assert evaluation.keyphrase == "implicit dread"
        assert result.retry_count == 0
        # spans resolved into the output text
        spans = [result.assessments[a].span for a in evaluation.assessments]
        assert all(s is not None for s in spans)

    def test_excluded_feature_stored_but_not_scored(self, horror_record, horror_criterion):
        doc = [dict(STORY_DOC[0])]
        doc[0]["features"] = [
            {"fragment_id": 1, "feature": "Implied threat through sound", "alignment": "positive"},
            {"fragment_id": 2, "feature": "Uncanny body detail", "alignment": "positive",
             "is_excluded": True},
        ]
        gw = gateway_for([(eval_request(horror_record, [horror_criterion]),
                           eval_document_yaml(doc))])
        result = evaluate_record(horror_record, [horror_criterion], gw)
        evaluation = result.evaluations[0]
        assessments = [result.assessments[a] for a in evaluation.assessments]
        assert len(assessments) == 2
        assert assessments[1].excluded
        assert evaluation.holistic_score == 1.0  # excluded one never counted

    def test_malformed_then_valid_on_reask(self, horror_record, horror_criterion):
        good = eval_document_yaml(STORY_DOC)
        gw = gateway_for([
            (eval_request(horror_record, [horror_criterion]), "no fenced block, sorry"),
            (eval_request(horror_record, [horror_criterion], REASK_INSTRUCTION), good),
        ])
        result = evaluate_record(horror_record, [horror_criterion], gw)
        assert result.retry_count == 1
        assert len(result.evaluations[0].assessments) == 4

    def test_malformed_twice_fails(self, horror_record, horror_criterion):
        gw = gateway_for([
            (eval_request(horror_record, [horror_criterion]), "junk"),
            (eval_request(horror_record, [horror_criterion], REASK_INSTRUCTION), "junk again"),
        ])
        with pytest.raises(Exception):
            evaluate_record(horror_record, [horror_criterion], gw)

    def test_unknown_criterion_name_rejected(self, horror_record, horror_criterion):
        doc = [dict(STORY_DOC[0], criterion_name="Surprise Twist")]
        gw = gateway_for([(eval_request(horror_record, [horror_criterion]),
                           eval_document_yaml(doc))])
        with pytest.raises(StructuralError, match="Surprise Twist"):
            evaluate_record(horror_record, [horror_criterion], gw)

    def test_missing_criterion_block_rejected(self, horror_record, horror_criterion):
        other = Criterion(criterion_id="crit-2", name="Pacing", description="story pacing")
        gw = gateway_for([(eval_request(horror_record, [horror_criterion, other]),
                           eval_document_yaml(STORY_DOC))])
        with pytest.raises(StructuralError, match="Pacing"):
            evaluate_record(horror_record, [horror_criterion, other], gw)

    def test_multi_criterion_completion_split(self, horror_record, horror_criterion):
        other = Criterion(criterion_id="crit-2", name="Pacing", description="story pacing")
        two_blocks = STORY_DOC + [{
            "criterion_name": "Pacing",
            "fragments": [(1, "I reached for the handle and the room went quiet.")],
            "features": [
                {"fragment_id": 1, "feature": "Beat of stillness before reveal", "alignment": "positive"},
            ],
            "overall_justification": "One effective pause.",
            "keyphrase": "measured pause",
        }]
        gw = gateway_for([(eval_request(horror_record, [horror_criterion, other]),
                           eval_document_yaml(two_blocks))])
        result = evaluate_record(horror_record, [horror_criterion, other], gw)
        assert [e.criterion_id for e in result.evaluations] == ["crit-horror", "crit-2"]
        assert result.evaluations[1].holistic_score == 1.0

    def test_replay_yields_identical_evaluations(self, horror_record, horror_criterion):
        pairs = [(eval_request(horror_record, [horror_criterion]), eval_document_yaml(STORY_DOC))]
        first = evaluate_record(horror_record, [horror_criterion], gateway_for(pairs))
        second = evaluate_record(horror_record, [horror_criterion], gateway_for(pairs))
        assert first.evaluations == second.evaluations
        assert first.assessments == second.assessments


def rating_request(record, criterion) -> CompletionRequest:
    system, user = build_rating_prompt(record, criterion)
    return CompletionRequest(
        system_prompt=system, user_prompt=user, temperature=BENCHMARK_TEMPERATURE
    )


def rating_yaml(score, fragments=()) -> str:
    lines = ["explanation: |", "  holistic reasoning here", f"score: {score}"]
    if fragments:
        lines.append("fragments:")
        for f in fragments:
            lines.append("  - |")
            lines.append(f"    {f}")
    else:
        lines.append("fragments: []")
    return yaml_block("\n".join(lines) + "\n")


class TestRatingBaseline:
    def test_score_and_fragments_parsed(self, horror_record, horror_criterion):
        gw = gateway_for([(rating_request(horror_record, horror_criterion),
                           rating_yaml(4, ["Two eyes caught the light", "a sigh behind the coats"]))])
        result = rating_baseline(horror_record, horror_criterion, gw)
        assert result.score == 4
        assert len(result.cited_fragments) == 2

    def test_out_of_range_score(self, horror_record, horror_criterion):
        gw = gateway_for([(rating_request(horror_record, horror_criterion), rating_yaml(7))])
        with pytest.raises(RatingParseError, match="out of range"):
            rating_baseline(horror_record, horror_criterion, gw)

    def test_unparseable_score(self, horror_record, horror_criterion):
        gw = gateway_for([(rating_request(horror_record, horror_criterion),
                           yaml_block("score: great\nfragments: []\n"))])
        with pytest.raises(RatingParseError):
            rating_baseline(horror_record, horror_criterion, gw)

    def test_empty_fragment_list_allowed(self, horror_record, horror_criterion):
        gw = gateway_for([(rating_request(horror_record, horror_criterion), rating_yaml(2))])
        result = rating_baseline(horror_record, horror_criterion, gw)
        assert result.score == 2
        assert result.cited_fragments == ()
