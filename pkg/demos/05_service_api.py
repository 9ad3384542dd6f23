"""Drive the HTTP API end to end against an in-process service.

Uploads a dataset, defines a criterion, queues an evaluation job, polls it
to completion, then reads evaluations, the hierarchy, cluster filters, and
performs an example-set correction - the same surface the browser client
uses.
"""

import json
import sys
import tempfile
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))
from _offline_backend import OfflineBackend

from fastapi.testclient import TestClient

from fraglens import LLMGateway, Transcript, load_criteria, load_dataset, run_pipeline
from fraglens.config import AppConfig
from fraglens.dataset import Dataset, criterion_from_doc
from fraglens.service import create_app
from fraglens.types import Record

SENTENCES = [
    "The elevator opened on a floor that wasn't listed.",
    "Her phone showed a missed call from her own number.",
    "The plants leaned toward the locked door.",
    "All the clocks agreed, which had never happened before.",
    "The welcome mat was facing the inside.",
    "A neighbor waved from a window that was bricked up last year.",
]

records = [
    {"id": f"apt-{i:02d}", "input": f"Write a short horror story ({i}).",
     "output": " ".join(SENTENCES[(i + j) % len(SENTENCES)] for j in range(4))}
    for i in range(10)
]
criterion_doc = {
    "criterion_id": "c-unease",
    "name": "Horror Atmosphere",
    "description": "Builds unease through small impossibilities.",
}

with tempfile.TemporaryDirectory() as tmp:
    config = AppConfig(store_path=str(Path(tmp) / "store"), embedding_dim=12, seed=3)
    client = TestClient(create_app(config))

    dataset_id = client.post("/api/v1/datasets", json={"records": records}).json()["dataset_id"]
    client.post("/api/v1/criteria", json=criterion_doc)
    print(f"uploaded dataset {dataset_id} and one criterion")

    # record an offline transcript matching the store's exact state, then
    # hand it to the job so the whole run replays without a provider
    dataset = Dataset(dataset_id=dataset_id, records=tuple(
        Record(record_id=r["id"], input=r["input"], output=r["output"]) for r in records
    ))
    criteria = tuple(
        criterion_from_doc(doc, fallback_id=doc["criterion_id"])
        for doc in client.get("/api/v1/criteria").json()
    )
    recorded = Transcript()
    run_pipeline(dataset, criteria, LLMGateway(OfflineBackend(), record_to=recorded),
                 3, min_cluster_size=4)
    transcript_path = Path(tmp) / "transcript.json"
    recorded.save(transcript_path)

    job_id = client.post("/api/v1/runs", json={
        "dataset_id": dataset_id, "seed": 3,
        "mock_transcript": str(transcript_path),
    }).json()["job_id"]

    while True:
        status = client.get(f"/api/v1/jobs/{job_id}").json()
        print(f"  job phase: {status['phase']}")
        if status["phase"] in ("done", "failed"):
            break
        time.sleep(0.2)
    assert status["phase"] == "done", status
    run_id = status["run_id"]

    evaluations = client.get(f"/api/v1/runs/{run_id}/evaluations",
                             params={"record_id": "apt-00"}).json()
    first = evaluations[0]
    print(f"\napt-00 scored {first['holistic_score']} with "
          f"{len(first['assessments'])} assessed fragments")

    hierarchy = client.get(f"/api/v1/runs/{run_id}/hierarchy/c-unease").json()
    print(f"hierarchy: {len(hierarchy['base_clusters'])} base clusters, "
          f"{len(hierarchy['super_clusters'])} super clusters, "
          f"{len(hierarchy['noise'])} noise points")

    base_id = hierarchy["base_clusters"][0]["base_id"]
    filtered = client.get(f"/api/v1/runs/{run_id}/clusters/{base_id}/filter").json()
    print(f"cluster {base_id} matches {filtered['stats']['matching_record_count']} records")

    # correction: push one assessed function into the excluded example set
    target = first["assessments"][0]
    updated = client.post("/api/v1/criteria/c-unease/examples", json={
        "add": [{"role": "excluded", "run_id": run_id,
                 "assessment_id": target["assessment_id"]}],
    }).json()
    print(f"excluded examples now: "
          f"{[e['function_description'] for e in updated['excluded_examples']]}")
    print("existing run untouched by the mutation (snapshot rule):",
          client.get(f"/api/v1/runs/{run_id}/evaluations",
                     params={"record_id": "apt-00"}).json() == evaluations)
