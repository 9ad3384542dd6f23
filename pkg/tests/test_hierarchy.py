import json

import numpy as np
import pytest

from fraglens.gateway import LLMGateway, MockBackend, CompletionRequest, Transcript
from fraglens.hierarchy import (
    BaseCluster,
    ClusterHierarchy,
    LabelingError,
    build_hierarchy,
    build_super_clusters,
    label_base_cluster,
    parse_json_response,
    super_cluster_count,
    JSON_REASK_INSTRUCTION,
)
from fraglens.kmeans import kmeans_cluster
from fraglens.prompts import (
    build_base_cluster_prompt,
    build_dedup_prompt,
    build_reassign_prompt,
    build_super_cluster_prompt,
)
from fraglens.types import FunctionAssessment

from conftest import FUNCTION_STEMS, ScriptedBackend, SpyBackend, transcript_for


def gw(backend, **kwargs):
    return LLMGateway(backend, sleep=lambda _s: None, **kwargs)


def request_for(prompt_pair, suffix: str = "") -> CompletionRequest:
    system, user = prompt_pair
    if suffix:
        user = f"{user}\n\n{suffix}"
    return CompletionRequest(system_prompt=system, user_prompt=user)


def make_base(i: int, name: str, members=None) -> BaseCluster:
    return BaseCluster(
        base_id=f"bc-{i:02d}",
        member_assessment_ids=tuple(members or (f"as-{i}-1", f"as-{i}-2")),
        name=name,
        description=f"functions about {name.lower()}",
        positive_count=1,
        negative_count=1,
    )


class TestLabelBaseCluster:
    def test_plain_json(self):
        pairs = [(request_for(build_base_cluster_prompt(["m1", "m2"])),
                  json.dumps({"summary": "things about m", "name": "M things"}))]
        name, summary = label_base_cluster(["m1", "m2"], gw(MockBackend(transcript_for(pairs))))
        assert (name, summary) == ("M things", "things about m")

    def test_json_embedded_in_prose(self):
        response = 'Sure! Here you go:\n{"summary": "s", "name": "N"}\nHope that helps.'
        pairs = [(request_for(build_base_cluster_prompt(["m"])), response)]
        name, summary = label_base_cluster(["m"], gw(MockBackend(transcript_for(pairs))))
        assert (name, summary) == ("N", "s")

    def test_empty_members_rejected(self):
        with pytest.raises(ValueError):
            label_base_cluster([], gw(MockBackend()))

    def test_malformed_after_reask_fails(self):
        prompt = build_base_cluster_prompt(["m"])
        pairs = [
            (request_for(prompt), "not json at all"),
            (request_for(prompt, JSON_REASK_INSTRUCTION), "still not json"),
        ]
        with pytest.raises(LabelingError, match="re-ask"):
            label_base_cluster(["m"], gw(MockBackend(transcript_for(pairs))))

    def test_reask_recovers(self):
        prompt = build_base_cluster_prompt(["m"])
        pairs = [
            (request_for(prompt), "oops"),
            (request_for(prompt, JSON_REASK_INSTRUCTION), '{"summary": "s", "name": "N"}'),
        ]
        assert label_base_cluster(["m"], gw(MockBackend(transcript_for(pairs)))) == ("N", "s")


def test_parse_json_response_rejects_non_object():
    with pytest.raises(LabelingError):
        parse_json_response("[1, 2, 3] no object here")


def test_super_cluster_count_heuristic():
    assert super_cluster_count(1) == 1
    assert super_cluster_count(2) == 2     # clamp floor
    assert super_cluster_count(8) == 2     # round(sqrt(4))
    assert super_cluster_count(50) == 5    # round(sqrt(25))
    assert super_cluster_count(2000) == 12  # clamp ceiling


class TestBuildSuperClusters:
    def test_single_base_cluster_no_dedup(self):
        base = make_base(1, "Implied dread")
        prompt = build_super_cluster_prompt([(base.name, base.description)])
        pairs = [(request_for(prompt), json.dumps({"description": "d", "name": "Dread"}))]
        backend = SpyBackend(MockBackend(transcript_for(pairs)))
        supers = build_super_clusters([base], gw(backend))
        assert len(supers) == 1
        assert supers[0].member_base_ids == (base.base_id,)
        assert supers[0].name == "Dread"
        assert backend.completion_count == 1  # exactly the one labeling call

    def test_eight_base_clusters_full_stage_sequence(self):
        names = [f"Group {c}" for c in "ABCDEFGH"]
        bases = [make_base(i + 1, name) for i, name in enumerate(names)]
        # fixture embeddings: first four near e1, last four near e2
        vectors = {}
        for i, name in enumerate(names):
            v = np.zeros(4)
            v[0 if i < 4 else 1] = 1.0
            v[2] = 0.01 * i
            vectors[name] = list(v / np.linalg.norm(v))

        seed = 5
        assert super_cluster_count(len(bases)) == 2
        assignments = kmeans_cluster([np.array(vectors[n]) for n in names], 2, seed)
        groups = [[b for b, a in zip(bases, assignments) if a == g] for g in range(2)]
        assert sorted(len(g) for g in groups) == [4, 4]

        pairs = []
        group_labels = []
        for g, members in enumerate(groups):
            prompt = build_super_cluster_prompt([(m.name, m.description) for m in members])
            label = (f"Super {g}", f"theme {g}")
            group_labels.append(label)
            pairs.append((request_for(prompt), json.dumps(
                {"description": label[1], "name": label[0]})))
        dedup_prompt = build_dedup_prompt(group_labels, 2)
        finals = [{"name": n, "description": d} for n, d in group_labels]
        pairs.append((request_for(dedup_prompt),
                      json.dumps({"justification": "all distinct", "finals": finals})))
        for base, assignment in zip(bases, assignments):
            prompt = build_reassign_prompt((base.name, base.description), group_labels)
            pairs.append((request_for(prompt),
                          json.dumps({"justification": "fits", "cluster": int(assignment) + 1})))

        backend = MockBackend(transcript_for(pairs), fixture_vectors=vectors)
        supers = build_super_clusters(bases, gw(backend), seed)
        assert len(supers) == 2
        assigned = [bid for s in supers for bid in s.member_base_ids]
        assert sorted(assigned) == sorted(b.base_id for b in bases)  # partition intact
        sizes = sorted(len(s.member_base_ids) for s in supers)
        assert sizes == [4, 4]
        assert "Target length: 2" in dedup_prompt[1]

    def test_reassignment_index_out_of_range(self):
        bases = [make_base(1, "Group A")]
        prompt = build_super_cluster_prompt([(bases[0].name, bases[0].description)])
        # single base path has no reassignment; use two bases to reach it
        bases = [make_base(1, "Group A"), make_base(2, "Group B")]
        vectors = {"Group A": [1.0, 0.0], "Group B": [0.0, 1.0]}
        assignments = kmeans_cluster([np.array(vectors[b.name]) for b in bases], 2, 0)
        pairs = []
        labels = []
        groups = [[b for b, a in zip(bases, assignments) if a == g] for g in range(2)]
        for g, members in enumerate(groups):
            p = build_super_cluster_prompt([(m.name, m.description) for m in members])
            labels.append((f"S{g}", f"d{g}"))
            pairs.append((request_for(p), json.dumps({"description": f"d{g}", "name": f"S{g}"})))
        pairs.append((request_for(build_dedup_prompt(labels, 2)),
                      json.dumps({"justification": "", "finals": [
                          {"name": n, "description": d} for n, d in labels]})))
        pairs.append((request_for(build_reassign_prompt(
            (bases[0].name, bases[0].description), labels)),
            json.dumps({"justification": "", "cluster": 99})))
        backend = MockBackend(transcript_for(pairs), fixture_vectors=vectors)
        with pytest.raises(LabelingError, match="bc-01"):
            build_super_clusters(bases, gw(backend), 0)

    def test_empty_supers_dropped_after_reassignment(self):
        bases = [make_base(1, "Group A"), make_base(2, "Group B")]
        vectors = {"Group A": [1.0, 0.0], "Group B": [0.0, 1.0]}
        assignments = kmeans_cluster([np.array(vectors[b.name]) for b in bases], 2, 0)
        groups = [[b for b, a in zip(bases, assignments) if a == g] for g in range(2)]
        pairs = []
        labels = []
        for g, members in enumerate(groups):
            p = build_super_cluster_prompt([(m.name, m.description) for m in members])
            labels.append((f"S{g}", f"d{g}"))
            pairs.append((request_for(p), json.dumps({"description": f"d{g}", "name": f"S{g}"})))
        pairs.append((request_for(build_dedup_prompt(labels, 2)),
                      json.dumps({"justification": "", "finals": [
                          {"name": n, "description": d} for n, d in labels]})))
        for base in bases:  # everything reassigned into super 1
            pairs.append((request_for(build_reassign_prompt(
                (base.name, base.description), labels)),
                json.dumps({"justification": "", "cluster": 1})))
        backend = MockBackend(transcript_for(pairs), fixture_vectors=vectors)
        supers = build_super_clusters(bases, gw(backend), 0)
        assert len(supers) == 1
        assert sorted(supers[0].member_base_ids) == ["bc-01", "bc-02"]


def scripted_assessments(n_per_stem: int = 6, stems=None) -> list[FunctionAssessment]:
    stems = stems if stems is not None else FUNCTION_STEMS
    out = []
    seq = 0
    for stem_idx, stem in enumerate(stems):
        for j in range(n_per_stem):
            seq += 1
            out.append(FunctionAssessment(
                assessment_id=f"as-r{seq:03d}-c1-001",
                record_id=f"r{seq:03d}",
                criterion_id="c1",
                fragment=f"fragment {seq}",
                function_description=f"{stem} (variant {j})",
                rating="positive" if (seq % 3) else "negative",
                excluded=(seq % 7) == 0,
            ))
    return out


class TestBuildHierarchy:
    def test_full_stage_invariants(self):
        assessments = scripted_assessments()
        gateway = gw(ScriptedBackend())
        hierarchy = build_hierarchy("c1", assessments, gateway, seed=4, min_cluster_size=5)

        # partition: every assessment in exactly one base cluster or the noise set
        all_ids = [a.assessment_id for a in assessments]
        seen = list(hierarchy.noise.assessment_ids)
        for base in hierarchy.base_clusters:
            seen.extend(base.member_assessment_ids)
        assert sorted(seen) == sorted(all_ids)

        # bases partition across supers
        assert hierarchy.base_clusters, "expected at least one base cluster"
        in_supers = [bid for s in hierarchy.super_clusters for bid in s.member_base_ids]
        assert sorted(in_supers) == sorted(b.base_id for b in hierarchy.base_clusters)

        # counts match a brute-force recount
        by_id = {a.assessment_id: a for a in assessments}
        for base in hierarchy.base_clusters:
            scored = [by_id[m] for m in base.member_assessment_ids if not by_id[m].excluded]
            assert base.positive_count == sum(1 for a in scored if a.rating == "positive")
            assert base.negative_count == sum(1 for a in scored if a.rating == "negative")
            assert base.positive_count + base.negative_count == len(scored)

        # map points carry every assessment with its rating
        assert len(hierarchy.points) == len(assessments)
        ratings = {a.assessment_id: a.rating for a in assessments}
        for p in hierarchy.points:
            assert p.rating == ratings[p.function_ref]

    def test_deterministic_given_seed_and_backend(self):
        assessments = scripted_assessments()
        first = build_hierarchy("c1", assessments, gw(ScriptedBackend()), seed=4,
                                min_cluster_size=5)
        second = build_hierarchy("c1", assessments, gw(ScriptedBackend()), seed=4,
                                 min_cluster_size=5)
        assert first.to_doc() == second.to_doc()

    def test_doc_round_trip(self):
        assessments = scripted_assessments(n_per_stem=4)
        hierarchy = build_hierarchy("c1", assessments, gw(ScriptedBackend()), seed=2,
                                    min_cluster_size=4)
        clone = ClusterHierarchy.from_doc(json.loads(json.dumps(hierarchy.to_doc())))
        assert clone.to_doc() == hierarchy.to_doc()

    def test_too_few_assessments_rejected(self):
        with pytest.raises(ValueError):
            build_hierarchy("c1", scripted_assessments(n_per_stem=1, stems=["Fear by omission"]),
                            gw(ScriptedBackend()), seed=0)
