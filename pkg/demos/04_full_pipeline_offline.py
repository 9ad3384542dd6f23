"""The whole pipeline, offline: evaluate, project, cluster, label, persist.

Drives run_pipeline with the demos' deterministic offline backend, prints
the resulting hierarchy, filters records by a cluster, and shows that the
recorded transcript replays to an identical run.
"""

import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))
from _offline_backend import OfflineBackend

from fraglens import (
    Criterion,
    Dataset,
    LLMGateway,
    MockBackend,
    Record,
    Transcript,
    filter_by_cluster,
    load_run,
    run_pipeline,
    save_run,
)

SENTENCES = [
    "The hallway lights flickered twice before settling.",
    "Something moved behind the frosted glass.",
    "She counted four coats but heard five breaths.",
    "The basement door was open again.",
    "A cold draft carried a whisper of her name.",
    "The mirror showed the room a half-second late.",
    "He found his own footprints leading out of the house.",
    "Every photo on the mantel had its eyes closed.",
]

records = tuple(
    Record(
        record_id=f"story-{i:02d}",
        input=f"Write a short horror story ({i}).",
        output=" ".join(SENTENCES[(i + j) % len(SENTENCES)] for j in range(5)),
    )
    for i in range(12)
)
dataset = Dataset(dataset_id="demo-stories", records=records)
criteria = (
    Criterion(criterion_id="c-dread", name="Horror Atmosphere",
              description="Implied, building fear."),
)

recorded = Transcript()
gateway = LLMGateway(OfflineBackend(), record_to=recorded)
run = run_pipeline(dataset, criteria, gateway, seed=3, min_cluster_size=5)

print(f"run {run.run_id}: {len(run.evaluations)} evaluations, "
      f"{sum(len(e.assessments) for e in run.evaluations)} assessments")
hierarchy = run.hierarchies["c-dread"]
print(f"\nhierarchy for Horror Atmosphere "
      f"({len(hierarchy.base_clusters)} base / {len(hierarchy.super_clusters)} super, "
      f"{len(hierarchy.noise.assessment_ids)} noise):")
for super_cluster in hierarchy.super_clusters:
    print(f"  {super_cluster.name}: {super_cluster.description}")
    for base_id in super_cluster.member_base_ids:
        base = next(b for b in hierarchy.base_clusters if b.base_id == base_id)
        print(f"    - {base.name} ({base.positive_count}+ / {base.negative_count}-)")

base = hierarchy.base_clusters[0]
matched, stats = filter_by_cluster(run, base.base_id, dataset.by_id())
print(f"\nrecords with a function in {base.name!r}: "
      f"{[r.record_id for r in matched]}")
print(f"mean holistic score among them: "
      f"{stats.mean_holistic_score['c-dread']:.2f}")
if stats.co_occurring:
    other, count = stats.co_occurring[0]
    print(f"most co-occurring cluster: {other} (shares {count} records)")

with tempfile.TemporaryDirectory() as tmp:
    run_dir = Path(tmp) / "run"
    save_run(run_dir, dataset, run, recorded)
    print(f"\npersisted to {sorted(p.name for p in run_dir.iterdir())}")

    # replay the recorded transcript: byte-identical evaluations
    replay_gateway = LLMGateway(MockBackend(Transcript.load(run_dir / "transcript.json")))
    replayed = run_pipeline(dataset, criteria, replay_gateway, seed=3, min_cluster_size=5)
    _, stored = load_run(run_dir)
    assert replayed.evaluations == stored.evaluations
    assert replayed.hierarchies["c-dread"].to_doc() == stored.hierarchies["c-dread"].to_doc()
    print("replay from the recorded transcript matches the stored run")
