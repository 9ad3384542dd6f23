"""Evaluate one model output at the fragment level.

Builds the evaluation prompt for a record, replays a hand-written
completion through the gateway, and walks the parsed result: fragments,
their spans in the output, function labels, ratings, and the ratio-based
holistic score. Shows how an excluded fragment is stored but never scored.
"""

from fraglens import CompletionRequest, LLMGateway, MockBackend, Transcript
from fraglens import Criterion, ExampleFunction, Record, evaluate_record
from fraglens.prompts import build_evaluation_prompt

record = Record(
    record_id="story-demo",
    input="Write a short horror story about a house sitter.",
    output=(
        "The key turned before she touched it. "
        "Upstairs, a chair settled as if someone had just stood. "
        "The family photo by the stairs now faced the wall. "
        "It was a dark and stormy night."
    ),
)

criterion = Criterion(
    criterion_id="c-dread",
    name="Horror Atmosphere",
    description="Creates immersive fear through implication rather than statement.",
    positive_examples=(
        ExampleFunction(
            example_id="ex-1",
            function_description="Implied presence through object state",
            fragment="the kettle was still warm",
            polarity_role="positive",
        ),
    ),
)

# A canned evaluator completion in the required output format. In a live
# setup the gateway would call a configured provider instead.
completion = """\
```yaml
evaluations:
  - criterion_name: Horror Atmosphere
    reading: |
      The story leans on small wrongnesses rather than monsters.
    fragments:
      - id: 1
        fragment: |
          The key turned before she touched it.
      - id: 2
        fragment: |
          a chair settled as if someone had just stood
      - id: 3
        fragment: |
          The family photo by the stairs now faced the wall.
      - id: 4
        fragment: |
          It was a dark and stormy night.
    features:
      - fragment_id: 1
        analysis: |
          The house acts on its own; agency without a visible agent unsettles.
        feature: |
          Implied agency of the setting
        is_excluded: false
        alignment: positive
      - fragment_id: 2
        analysis: |
          Just-missed presence is a classic implication device.
        feature: |
          Implied presence through object state
        is_excluded: false
        alignment: positive
      - fragment_id: 3
        analysis: |
          The turned photo implies observation and deliberate interference.
        feature: |
          Household objects rearranged by unseen hands
        is_excluded: false
        alignment: positive
      - fragment_id: 4
        analysis: |
          Weather-as-mood is stock dressing; it names the mood outright.
        feature: |
          Stock weather cliche
        is_excluded: true
        alignment: negative
    overall_justification: Three strong implicit devices; one cliche flagged out of scope.
    keyphrase: the house moved first
```
"""

system, user = build_evaluation_prompt(record, [criterion])
transcript = Transcript()
transcript.record_completion(
    CompletionRequest(system_prompt=system, user_prompt=user).fingerprint(), completion
)
gateway = LLMGateway(MockBackend(transcript))

result = evaluate_record(record, [criterion], gateway)
evaluation = result.evaluations[0]

print(f"record {record.record_id} on criterion {criterion.name!r}")
print(f"holistic score: {evaluation.holistic_score:.2f}  (positives / non-excluded)")
print(f"keyphrase: {evaluation.keyphrase}")
print(f"justification: {evaluation.holistic_justification}\n")

for aid in evaluation.assessments:
    a = result.assessments[aid]
    mark = "excluded" if a.excluded else a.rating
    where = f"chars {a.span[0]}..{a.span[1]}" if a.span else "unresolved"
    print(f"  [{mark:>8}] {a.function_description}")
    print(f"             fragment ({where}): {a.fragment!r}")

# The excluded cliche is stored (visible above) but the score only counts
# the three non-excluded positives: 3/3 = 1.0.
assert evaluation.holistic_score == 1.0
