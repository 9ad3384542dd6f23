"""Prompt construction from the versioned text templates in prompt_assets/.

Templates are shipped verbatim as package data; the version string below is
recorded in run metadata so transcripts and templates can be matched up.
"""

from __future__ import annotations

from importlib import resources

from .types import Criterion, ExampleFunction, Record

TEMPLATE_VERSION = "eval-templates/1"


def _asset(name: str) -> str:
    return resources.files("fraglens.prompt_assets").joinpath(name).read_text(encoding="utf-8")


EVALUATION_SYSTEM = _asset("evaluation_system.txt")
BASE_CLUSTER_SYSTEM = _asset("base_cluster_system.txt")
SUPER_CLUSTER_SYSTEM = _asset("super_cluster_system.txt")
DEDUP_SYSTEM = _asset("dedup_system.txt")
REASSIGN_SYSTEM = _asset("reassign_system.txt")
RATING_SYSTEM = _asset("rating_system.txt")

EMPTY_SECTION = "(none)"


def _render_examples(examples: tuple[ExampleFunction, ...]) -> str:
    if not examples:
        return EMPTY_SECTION
    lines = []
    for ex in examples:
        lines.append(f'- Function: {ex.function_description}')
        if ex.fragment:
            lines.append(f'  Fragment: "{ex.fragment}"')
    return "\n".join(lines)


def render_criterion_block(criterion: Criterion) -> str:
    return (
        f"### {criterion.name}\n"
        f"\n"
        f"**Description**: {criterion.description}\n"
        f"\n"
        f"**Positive Examples**\n"
        f"{_render_examples(criterion.positive_examples)}\n"
        f"\n"
        f"**Negative Examples**\n"
        f"{_render_examples(criterion.negative_examples)}\n"
        f"\n"
        f"**Excluded Examples**\n"
        f"{_render_examples(criterion.excluded_examples)}"
    )


def build_evaluation_prompt(
    record: Record,
    criteria: list[Criterion] | tuple[Criterion, ...],
    *,
    label_language: str | None = None,
) -> tuple[str, str]:
    """Compose the fragmentation/evaluation prompt pair for one record.

    The system prompt is the six-step template, optionally extended with a
    single output-language instruction line; the user prompt carries the
    instruction, the response, and every criterion block in input order.
    """
    if not criteria:
        raise ValueError("at least one criterion is required")
    system = EVALUATION_SYSTEM
    if label_language:
        system = (
            system.rstrip("\n")
            + f"\n\nReturn all function labels and justifications in {label_language}.\n"
        )
    blocks = "\n\n".join(render_criterion_block(c) for c in criteria)
    user = (
        f"## User's Instruction\n"
        f"\n"
        f"{record.input}\n"
        f"\n"
        f"## AI Assistant's Response\n"
        f"\n"
        f"{record.output}\n"
        f"\n"
        f"## Evaluation Criteria\n"
        f"\n"
        f"{blocks}"
    )
    return system, user


def build_base_cluster_prompt(member_descriptions: list[str]) -> tuple[str, str]:
    if not member_descriptions:
        raise ValueError("a cluster needs at least one member to label")
    lines = "\n".join(f"- {d}" for d in member_descriptions)
    return BASE_CLUSTER_SYSTEM, f"### Sentences\n\n{lines}"


def _cluster_lines(clusters: list[tuple[str, str]], *, numbered: bool = False) -> str:
    if numbered:
        return "\n".join(f"{i}. {name}: {desc}" for i, (name, desc) in enumerate(clusters, start=1))
    return "\n".join(f"- {name}: {desc}" for name, desc in clusters)


def build_super_cluster_prompt(clusters: list[tuple[str, str]]) -> tuple[str, str]:
    return SUPER_CLUSTER_SYSTEM, f"### Clusters\n\n{_cluster_lines(clusters)}"


def build_dedup_prompt(clusters: list[tuple[str, str]], target_length: int) -> tuple[str, str]:
    user = (
        f"### Clusters\n\n{_cluster_lines(clusters)}\n\n"
        f"Target length: {target_length}"
    )
    return DEDUP_SYSTEM, user


def build_reassign_prompt(
    target: tuple[str, str], higher: list[tuple[str, str]]
) -> tuple[str, str]:
    user = (
        f"### Target Cluster\n\n- {target[0]}: {target[1]}\n\n"
        f"### Higher Cluster\n{_cluster_lines(higher, numbered=True)}"
    )
    return REASSIGN_SYSTEM, user


def build_rating_prompt(record: Record, criterion: Criterion) -> tuple[str, str]:
    user = (
        f"## User's Instruction\n"
        f"\n"
        f"{record.input}\n"
        f"\n"
        f"## AI Assistant's Response\n"
        f"\n"
        f"{record.output}\n"
        f"\n"
        f"## Evaluation Criterion\n"
        f"\n"
        f"### {criterion.name}\n"
        f"\n"
        f"**Description**: {criterion.description}"
    )
    return RATING_SYSTEM, user
