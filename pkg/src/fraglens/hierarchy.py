"""Two-level cluster hierarchy over fragment-level functions.

Base clusters come from density clustering of the 2D map; an LLM names each
one. Super clusters group base-cluster labels: embed the label names, KMeans
them, label each group, deduplicate the labels, then reassign every base
cluster to its best super cluster and drop any supers left empty.
"""

from __future__ import annotations

import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import prompts
from .density import FlatClustering, default_min_cluster_size, hdbscan_cluster
from .gateway import CompletionRequest, LLMGateway
from .kmeans import kmeans_cluster
from .projection import MapPoint, ProjectionModel, ProjectionParams, fit_projection
from .types import NEGATIVE, POSITIVE, FunctionAssessment

logger = logging.getLogger(__name__)

_JSON_BLOCK = re.compile(r"\{.*\}", re.DOTALL)

JSON_REASK_INSTRUCTION = (
    "Your previous response could not be parsed. Respond again with only a "
    "valid JSON object in the specified response format."
)

UNCLUSTERED_LABEL = "Unclustered"


class LabelingError(RuntimeError):
    pass


@dataclass(frozen=True, slots=True)
class BaseCluster:
    base_id: str
    member_assessment_ids: tuple[str, ...]
    name: str
    description: str
    positive_count: int
    negative_count: int

    def __post_init__(self) -> None:
        if not self.member_assessment_ids:
            raise ValueError("base cluster must have members")


@dataclass(frozen=True, slots=True)
class SuperCluster:
    super_id: str
    member_base_ids: tuple[str, ...]
    name: str
    description: str


@dataclass(frozen=True, slots=True)
class NoiseSet:
    assessment_ids: tuple[str, ...]


@dataclass(slots=True)
class ClusterHierarchy:
    criterion_id: str
    points: list[MapPoint]
    base_clusters: list[BaseCluster]
    super_clusters: list[SuperCluster]
    noise: NoiseSet
    seed: int
    min_cluster_size: int
    template_version: str = prompts.TEMPLATE_VERSION
    projection: ProjectionModel | None = field(default=None, repr=False)

    def to_doc(self) -> dict:
        return {
            "criterion_id": self.criterion_id,
            "seed": self.seed,
            "min_cluster_size": self.min_cluster_size,
            "template_version": self.template_version,
            "points": [
                {
                    "function_ref": p.function_ref,
                    "x": p.x,
                    "y": p.y,
                    "rating": p.rating,
                    "is_example_overlay": p.is_example_overlay,
                }
                for p in self.points
            ],
            "base_clusters": [
                {
                    "base_id": b.base_id,
                    "members": list(b.member_assessment_ids),
                    "name": b.name,
                    "description": b.description,
                    "positive_count": b.positive_count,
                    "negative_count": b.negative_count,
                }
                for b in self.base_clusters
            ],
            "super_clusters": [
                {
                    "super_id": s.super_id,
                    "members": list(s.member_base_ids),
                    "name": s.name,
                    "description": s.description,
                }
                for s in self.super_clusters
            ],
            "noise": list(self.noise.assessment_ids),
            "projection": self.projection.to_doc() if self.projection else None,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "ClusterHierarchy":
        return cls(
            criterion_id=doc["criterion_id"],
            points=[MapPoint(**p) for p in doc["points"]],
            base_clusters=[
                BaseCluster(
                    base_id=b["base_id"],
                    member_assessment_ids=tuple(b["members"]),
                    name=b["name"],
                    description=b["description"],
                    positive_count=b["positive_count"],
                    negative_count=b["negative_count"],
                )
                for b in doc["base_clusters"]
            ],
            super_clusters=[
                SuperCluster(
                    super_id=s["super_id"],
                    member_base_ids=tuple(s["members"]),
                    name=s["name"],
                    description=s["description"],
                )
                for s in doc["super_clusters"]
            ],
            noise=NoiseSet(assessment_ids=tuple(doc["noise"])),
            seed=doc["seed"],
            min_cluster_size=doc["min_cluster_size"],
            template_version=doc.get("template_version", prompts.TEMPLATE_VERSION),
            projection=ProjectionModel.from_doc(doc["projection"]) if doc.get("projection") else None,
        )


def parse_json_response(text: str) -> dict:
    """Parse a JSON object from a completion, tolerating surrounding prose."""
    try:
        doc = json.loads(text)
        if isinstance(doc, dict):
            return doc
    except json.JSONDecodeError:
        pass
    match = _JSON_BLOCK.search(text)
    if match:
        doc = json.loads(match.group(0))
        if isinstance(doc, dict):
            return doc
    raise LabelingError("completion contains no JSON object")


def _complete_json(gateway: LLMGateway, system: str, user: str, tag: str) -> dict:
    req = CompletionRequest(system_prompt=system, user_prompt=user, tag=tag)
    try:
        return parse_json_response(gateway.complete(req))
    except (LabelingError, json.JSONDecodeError):
        reask = CompletionRequest(
            system_prompt=system,
            user_prompt=f"{user}\n\n{JSON_REASK_INSTRUCTION}",
            tag=f"{tag}-retry",
        )
        try:
            return parse_json_response(gateway.complete(reask))
        except (LabelingError, json.JSONDecodeError) as exc:
            raise LabelingError(f"{tag}: malformed response after one re-ask: {exc}") from exc


def label_base_cluster(member_descriptions: list[str], gateway: LLMGateway) -> tuple[str, str]:
    """Name and one-sentence summary for a group of function descriptions."""
    system, user = prompts.build_base_cluster_prompt(member_descriptions)
    doc = _complete_json(gateway, system, user, "label-base")
    if "name" not in doc or "summary" not in doc:
        raise LabelingError("base-cluster label response missing name/summary")
    return str(doc["name"]).strip(), str(doc["summary"]).strip()


def _label_super_group(cluster_labels: list[tuple[str, str]], gateway: LLMGateway) -> tuple[str, str]:
    system, user = prompts.build_super_cluster_prompt(cluster_labels)
    doc = _complete_json(gateway, system, user, "label-super")
    if "name" not in doc or "description" not in doc:
        raise LabelingError("super-cluster label response missing name/description")
    return str(doc["name"]).strip(), str(doc["description"]).strip()


def _dedup_supers(
    labels: list[tuple[str, str]], target_length: int, gateway: LLMGateway
) -> list[tuple[str, str]]:
    system, user = prompts.build_dedup_prompt(labels, target_length)
    doc = _complete_json(gateway, system, user, "dedup-super")
    finals = doc.get("finals")
    if not isinstance(finals, list) or not finals:
        raise LabelingError("dedup response has no finals list")
    out = []
    for item in finals:
        if not isinstance(item, dict) or "name" not in item:
            raise LabelingError("dedup finals entry missing name")
        out.append((str(item["name"]).strip(), str(item.get("description", "")).strip()))
    return out


def _reassign_base(
    base: BaseCluster, supers: list[tuple[str, str]], gateway: LLMGateway
) -> int:
    system, user = prompts.build_reassign_prompt((base.name, base.description), supers)
    doc = _complete_json(gateway, system, user, f"reassign:{base.base_id}")
    try:
        index = int(doc.get("cluster"))
    except (TypeError, ValueError) as exc:
        raise LabelingError(f"reassignment for {base.base_id} returned no usable index") from exc
    if not 1 <= index <= len(supers):
        raise LabelingError(
            f"reassignment index {index} out of range 1..{len(supers)} "
            f"for base cluster {base.base_id}"
        )
    return index - 1


def super_cluster_count(n_base: int) -> int:
    if n_base <= 1:
        return n_base
    return int(np.clip(round(np.sqrt(n_base / 2)), 2, 12))


def build_super_clusters(
    base_clusters: list[BaseCluster],
    gateway: LLMGateway,
    seed: int = 0,
    *,
    dedup_target: int | None = None,
) -> list[SuperCluster]:
    """Group base clusters into labeled, deduplicated super clusters.

    Every base cluster ends up in exactly one super cluster; supers left
    empty after reassignment are dropped.
    """
    if not base_clusters:
        raise ValueError("at least one base cluster is required")
    b = len(base_clusters)
    k = super_cluster_count(b)

    if b == 1:
        name, description = _label_super_group(
            [(base_clusters[0].name, base_clusters[0].description)], gateway
        )
        return [SuperCluster(
            super_id="sc-01",
            member_base_ids=(base_clusters[0].base_id,),
            name=name,
            description=description,
        )]

    label_vectors = gateway.embed([c.name for c in base_clusters])
    assignments = kmeans_cluster(label_vectors, k, seed)

    group_labels: list[tuple[str, str]] = []
    for g in range(k):
        members = [c for c, a in zip(base_clusters, assignments) if a == g]
        if not members:
            continue
        group_labels.append(_label_super_group([(m.name, m.description) for m in members], gateway))

    target = dedup_target if dedup_target is not None else len(group_labels)
    if len(group_labels) > 1:
        final_labels = _dedup_supers(group_labels, target, gateway)
    else:
        final_labels = group_labels

    members_by_super: dict[int, list[str]] = {i: [] for i in range(len(final_labels))}
    for base in base_clusters:
        idx = _reassign_base(base, final_labels, gateway)
        members_by_super[idx].append(base.base_id)

    supers = []
    seq = 0
    for i, (name, description) in enumerate(final_labels):
        if not members_by_super[i]:
            continue  # empty after reassignment
        seq += 1
        supers.append(SuperCluster(
            super_id=f"sc-{seq:02d}",
            member_base_ids=tuple(members_by_super[i]),
            name=name,
            description=description,
        ))
    return supers


def build_hierarchy(
    criterion_id: str,
    assessments: list[FunctionAssessment],
    gateway: LLMGateway,
    seed: int = 0,
    *,
    min_cluster_size: int | None = None,
    projection_params: ProjectionParams = ProjectionParams(),
    max_label_workers: int = 4,
    dedup_target: int | None = None,
    phase_cb=None,
) -> ClusterHierarchy:
    """Full clustering stage for one criterion: embed, project, cluster, label.

    Deterministic given (assessments, seed, transcript): geometry is seeded
    and single-threaded; labeling runs sequentially whenever the gateway
    backend is a deterministic replay.
    """
    if len(assessments) < 2:
        raise ValueError("clustering needs at least 2 assessments")
    if phase_cb:
        phase_cb("embedding")
    descriptions = [a.function_description for a in assessments]
    vectors = gateway.embed(descriptions)
    refs = [a.assessment_id for a in assessments]
    ratings = [a.rating for a in assessments]
    model, points = fit_projection(
        vectors, projection_params, seed, refs=refs, ratings=ratings
    )

    if phase_cb:
        phase_cb("clustering")
    coords = np.array([[p.x, p.y] for p in points])
    mcs = min_cluster_size if min_cluster_size is not None else default_min_cluster_size(len(points))
    flat: FlatClustering = hdbscan_cluster(coords, mcs)

    if phase_cb:
        phase_cb("labeling")
    by_id = {a.assessment_id: a for a in assessments}
    bases: list[BaseCluster] = []
    member_lists = [tuple(refs[i] for i in cluster) for cluster in flat.clusters]

    workers = 1 if gateway.deterministic else max(1, max_label_workers)
    def _label(members: tuple[str, ...]) -> tuple[str, str]:
        return label_base_cluster([by_id[m].function_description for m in members], gateway)

    if workers == 1:
        labels = [_label(m) for m in member_lists]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            labels = list(pool.map(_label, member_lists))

    for i, (members, (name, description)) in enumerate(zip(member_lists, labels), start=1):
        scored = [by_id[m] for m in members if not by_id[m].excluded]
        bases.append(BaseCluster(
            base_id=f"bc-{i:02d}",
            member_assessment_ids=members,
            name=name,
            description=description,
            positive_count=sum(1 for a in scored if a.rating == POSITIVE),
            negative_count=sum(1 for a in scored if a.rating == NEGATIVE),
        ))

    supers = build_super_clusters(bases, gateway, seed, dedup_target=dedup_target) if bases else []
    noise = NoiseSet(assessment_ids=tuple(refs[i] for i in flat.noise))
    return ClusterHierarchy(
        criterion_id=criterion_id,
        points=points,
        base_clusters=bases,
        super_clusters=supers,
        noise=noise,
        seed=seed,
        min_cluster_size=mcs,
        projection=model,
    )
