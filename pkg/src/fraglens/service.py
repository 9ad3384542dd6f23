"""HTTP service: datasets, criteria, runs, hierarchy, analytics, corrections.

A thin layer over the library: handlers validate, read the store, and queue
pipeline jobs; they never block on LLM calls. All payloads mirror the
domain types one-to-one under the /api/v1 prefix.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

from fastapi import Body, FastAPI, HTTPException, Query
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .analytics import UnknownClusterError, filter_by_cluster
from .benchmark import AlignmentError, extraction_report, extraction_table, load_gold, spans_from_run
from .config import AppConfig, build_gateway
from .dataset import Dataset, DatasetError, criterion_from_doc
from .gateway import Transcript
from .jobs import JobQueue
from .pipeline import run_pipeline
from .projection import transform_points
from .store import (
    StoreError,
    assessment_to_doc,
    criterion_to_doc,
    load_run,
    save_run,
)
from .types import Criterion, ExampleFunction, Record, content_hash

logger = logging.getLogger(__name__)

API = "/api/v1"


class ServiceState:
    def __init__(self, config: AppConfig) -> None:
        self.config = config
        self.root = Path(config.store_path)
        try:
            (self.root / "datasets").mkdir(parents=True, exist_ok=True)
            (self.root / "runs").mkdir(parents=True, exist_ok=True)
            probe = self.root / ".write-probe"
            probe.write_text("ok", encoding="utf-8")
            probe.unlink()
        except OSError as exc:
            raise StoreError(f"store path {self.root} is not writable: {exc}") from exc
        self.jobs = JobQueue()
        self._run_cache: dict[str, tuple[Dataset, object]] = {}

    # -- datasets -------------------------------------------------------------

    def dataset_path(self, dataset_id: str) -> Path:
        return self.root / "datasets" / f"{dataset_id}.jsonl"

    def save_dataset(self, records: list[Record]) -> Dataset:
        dataset_id = content_hash(
            *(f"{r.record_id}\x00{r.input}\x00{r.output}" for r in records)
        )[:16]
        dataset = Dataset(dataset_id=dataset_id, records=tuple(records))
        lines = [
            json.dumps({"id": r.record_id, "input": r.input, "output": r.output},
                       sort_keys=True, ensure_ascii=False)
            for r in records
        ]
        self.dataset_path(dataset_id).write_text("\n".join(lines) + "\n", encoding="utf-8")
        return dataset

    def load_dataset(self, dataset_id: str) -> Dataset:
        path = self.dataset_path(dataset_id)
        if not path.exists():
            raise KeyError(dataset_id)
        records = tuple(
            Record(record_id=d["id"], input=d["input"], output=d["output"])
            for d in map(json.loads, path.read_text(encoding="utf-8").splitlines())
            if d
        )
        return Dataset(dataset_id=dataset_id, records=records)

    def list_datasets(self) -> list[dict]:
        out = []
        for path in sorted((self.root / "datasets").glob("*.jsonl")):
            n = sum(1 for line in path.read_text(encoding="utf-8").splitlines() if line.strip())
            out.append({"dataset_id": path.stem, "n_records": n})
        return out

    # -- criteria ---------------------------------------------------------------

    @property
    def criteria_path(self) -> Path:
        return self.root / "criteria.jsonl"

    def load_criteria(self) -> list[Criterion]:
        if not self.criteria_path.exists():
            return []
        return [
            criterion_from_doc(json.loads(line), fallback_id=f"crit-{i}")
            for i, line in enumerate(
                self.criteria_path.read_text(encoding="utf-8").splitlines(), start=1
            )
            if line.strip()
        ]

    def save_criteria(self, criteria: list[Criterion]) -> None:
        lines = [
            json.dumps(criterion_to_doc(c), sort_keys=True, ensure_ascii=False)
            for c in criteria
        ]
        self.criteria_path.write_text(
            "".join(line + "\n" for line in lines), encoding="utf-8"
        )

    # -- runs ---------------------------------------------------------------------

    def run_dir(self, run_id: str) -> Path:
        return self.root / "runs" / run_id

    def get_run(self, run_id: str):
        if run_id not in self._run_cache:
            run_dir = self.run_dir(run_id)
            if not run_dir.exists():
                raise KeyError(run_id)
            self._run_cache[run_id] = load_run(run_dir)
        return self._run_cache[run_id]

    def list_runs(self) -> list[dict]:
        out = []
        for run_dir in sorted((self.root / "runs").iterdir()):
            meta_path = run_dir / "meta.json"
            if meta_path.exists():
                out.append(json.loads(meta_path.read_text(encoding="utf-8")))
        return out

def _http_error(status: int, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail=message)

def create_app(config: AppConfig | None = None) -> FastAPI:
    state = ServiceState(config or AppConfig())
    app = FastAPI(title="fraglens", version="0.1.0")
    app.state.service = state

    # ---- datasets ----

    @app.get(f"{API}/datasets")
    def list_datasets():
        return state.list_datasets()

    @app.post(f"{API}/datasets", status_code=201)
    def upload_dataset(payload: dict = Body(...)):
        raw = payload.get("records")
        if not isinstance(raw, list) or not raw:
            raise _http_error(422, "payload must carry a non-empty 'records' list")
        records = []
        seen = set()
        for i, doc in enumerate(raw, start=1):
            if "input" not in doc or "output" not in doc:
                raise _http_error(422, f"record {i} missing input/output")
            record_id = str(doc.get("id") or f"rec-{i:04d}")
            if record_id in seen:
                raise _http_error(422, f"duplicate record id {record_id!r}")
            seen.add(record_id)
            try:
                records.append(Record(record_id=record_id, input=str(doc["input"]),
                                      output=str(doc["output"])))
            except ValueError as exc:
                raise _http_error(422, f"record {i}: {exc}")
        dataset = state.save_dataset(records)
        return {"dataset_id": dataset.dataset_id, "n_records": len(dataset.records)}

    @app.get(f"{API}/datasets/{{dataset_id}}")
    def get_dataset(dataset_id: str):
        try:
            dataset = state.load_dataset(dataset_id)
        except KeyError:
            raise _http_error(404, f"unknown dataset {dataset_id!r}")
        return {
            "dataset_id": dataset.dataset_id,
            "records": [
                {"id": r.record_id, "input": r.input, "output": r.output}
                for r in dataset.records
            ],
        }

    # ---- criteria ----

    @app.get(f"{API}/criteria")
    def list_criteria():
        return [criterion_to_doc(c) for c in state.load_criteria()]

    @app.post(f"{API}/criteria", status_code=201)
    def create_criterion(payload: dict = Body(...)):
        criteria = state.load_criteria()
        taken = {c.criterion_id for c in criteria}
        fallback = f"crit-{len(criteria) + 1:02d}"
        while fallback in taken:
            fallback = f"{fallback}x"
        try:
            criterion = criterion_from_doc(payload, fallback_id=fallback)
        except (ValueError, DatasetError) as exc:
            raise _http_error(422, str(exc))
        if criterion.criterion_id in taken:
            raise _http_error(409, f"criterion {criterion.criterion_id!r} already exists")
        state.save_criteria(criteria + [criterion])
        return criterion_to_doc(criterion)

    @app.put(f"{API}/criteria/{{criterion_id}}")
    def update_criterion(criterion_id: str, payload: dict = Body(...)):
        criteria = state.load_criteria()
        for i, criterion in enumerate(criteria):
            if criterion.criterion_id == criterion_id:
                doc = criterion_to_doc(criterion)
                doc.update({k: v for k, v in payload.items() if k in ("name", "description")})
                try:
                    criteria[i] = criterion_from_doc(doc, fallback_id=criterion_id)
                except ValueError as exc:
                    raise _http_error(422, str(exc))
                state.save_criteria(criteria)
                return criterion_to_doc(criteria[i])
        raise _http_error(404, f"unknown criterion {criterion_id!r}")

    @app.delete(f"{API}/criteria/{{criterion_id}}", status_code=204)
    def delete_criterion(criterion_id: str):
        criteria = state.load_criteria()
        kept = [c for c in criteria if c.criterion_id != criterion_id]
        if len(kept) == len(criteria):
            raise _http_error(404, f"unknown criterion {criterion_id!r}")
        state.save_criteria(kept)

    # ---- example-set mutations ----

    @app.post(f"{API}/criteria/{{criterion_id}}/examples")
    def mutate_example_sets(criterion_id: str, payload: dict = Body(...)):
        criteria = state.load_criteria()
        index = next(
            (i for i, c in enumerate(criteria) if c.criterion_id == criterion_id), None
        )
        if index is None:
            raise _http_error(404, f"unknown criterion {criterion_id!r}")
        criterion = criteria[index]
        warnings: list[str] = []

        for add in payload.get("add", []):
            role = add.get("role")
            if role not in ("positive", "negative", "excluded"):
                raise _http_error(422, f"bad role {role!r}")
            if "assessment_id" in add:
                run_id = add.get("run_id", "")
                try:
                    _, run = state.get_run(run_id)
                except KeyError:
                    raise _http_error(404, f"unknown run {run_id!r}")
                assessment = run.assessments.get(add["assessment_id"])
                if assessment is None:
                    raise _http_error(404, f"unknown assessment {add['assessment_id']!r}")
                description = assessment.function_description
                fragment = assessment.fragment
                origin = (assessment.record_id, assessment.criterion_id)
            else:
                description = str(add.get("function_description", ""))
                fragment = str(add.get("fragment", ""))
                origin = None
            if not description:
                raise _http_error(422, "example needs a function_description")
            example_id = f"ex-{content_hash(description, fragment, role)[:12]}"
            current = criterion.example_sets()[role]
            if any(e.example_id == example_id for e in current):
                warnings.append(f"{example_id} already present; add ignored")
                continue
            example = ExampleFunction(
                example_id=example_id,
                function_description=description,
                fragment=fragment,
                polarity_role=role,
                origin=origin,
            )
            criterion = criterion.with_examples(role, current + (example,))

        for example_id in payload.get("remove", []):
            removed = False
            for role, examples in criterion.example_sets().items():
                kept = tuple(e for e in examples if e.example_id != example_id)
                if len(kept) != len(examples):
                    criterion = criterion.with_examples(role, kept)
                    removed = True
            if not removed:
                warnings.append(f"{example_id} not in any example set; remove ignored")

        criteria[index] = criterion
        state.save_criteria(criteria)
        doc = criterion_to_doc(criterion)
        doc["warnings"] = warnings
        return doc

    # ---- runs and jobs ----

    @app.post(f"{API}/runs", status_code=202)
    def start_run(payload: dict = Body(...)):
        dataset_id = payload.get("dataset_id", "")
        try:
            dataset = state.load_dataset(dataset_id)
        except KeyError:
            raise _http_error(404, f"unknown dataset {dataset_id!r}")
        criteria = state.load_criteria()
        wanted = payload.get("criteria_ids")
        if wanted:
            criteria = [c for c in criteria if c.criterion_id in set(wanted)]
        if not criteria:
            raise _http_error(422, "no criteria defined")
        seed = int(payload.get("seed", state.config.seed))
        skip_clustering = bool(payload.get("skip_clustering", False))
        snapshot = tuple(criteria)  # mutations after submit never affect this run

        def work(update) -> str:
            recorded = Transcript()
            transcript_path = payload.get("mock_transcript")
            replay = Transcript.load(transcript_path) if transcript_path else None
            gateway = build_gateway(state.config, transcript=replay, record_to=recorded)
            run = run_pipeline(
                dataset, snapshot, gateway, seed,
                skip_clustering=skip_clustering,
                parallelism=state.config.parallelism,
                label_language=state.config.label_language,
                min_cluster_size=state.config.min_cluster_size,
                dedup_target=state.config.dedup_target,
                phase_cb=update,
            )
            save_run(state.run_dir(run.run_id), dataset, run, recorded)
            return run.run_id

        job_id = state.jobs.submit(dataset_id, work)
        return {"job_id": job_id}

    @app.get(f"{API}/jobs/{{job_id}}")
    def job_status(job_id: str):
        try:
            return state.jobs.status(job_id).to_doc()
        except KeyError:
            raise _http_error(404, f"unknown job {job_id!r}")

    @app.get(f"{API}/runs")
    def list_runs():
        return state.list_runs()

    @app.get(f"{API}/runs/{{run_id}}/evaluations")
    def run_evaluations(run_id: str, record_id: str | None = None,
                        criterion_id: str | None = None):
        try:
            _, run = state.get_run(run_id)
        except KeyError:
            raise _http_error(404, f"unknown run {run_id!r}")
        out = []
        for e in run.evaluations:
            if record_id and e.record_id != record_id:
                continue
            if criterion_id and e.criterion_id != criterion_id:
                continue
            out.append({
                "record_id": e.record_id,
                "criterion_id": e.criterion_id,
                "holistic_score": e.holistic_score,
                "holistic_justification": e.holistic_justification,
                "keyphrase": e.keyphrase,
                "assessments": [assessment_to_doc(run.assessments[a]) for a in e.assessments],
            })
        return out

    @app.get(f"{API}/runs/{{run_id}}/hierarchy/{{criterion_id}}")
    def run_hierarchy(run_id: str, criterion_id: str):
        try:
            _, run = state.get_run(run_id)
        except KeyError:
            raise _http_error(404, f"unknown run {run_id!r}")
        hierarchy = run.hierarchies.get(criterion_id)
        if hierarchy is None:
            raise _http_error(404, f"run has no hierarchy for criterion {criterion_id!r}")
        doc = hierarchy.to_doc()
        doc.pop("projection", None)  # geometry internals stay server-side
        return doc

    @app.get(f"{API}/runs/{{run_id}}/clusters/{{base_id}}/filter")
    def cluster_filter(run_id: str, base_id: str):
        try:
            dataset, run = state.get_run(run_id)
        except KeyError:
            raise _http_error(404, f"unknown run {run_id!r}")
        try:
            records, stats = filter_by_cluster(run, base_id, dataset.by_id())
        except UnknownClusterError as exc:
            raise _http_error(404, str(exc))
        return {
            "records": [
                {"id": r.record_id, "input": r.input, "output": r.output} for r in records
            ],
            "stats": {
                "base_id": stats.base_id,
                "matching_record_count": stats.matching_record_count,
                "mean_holistic_score": stats.mean_holistic_score,
                "co_occurring": [list(pair) for pair in stats.co_occurring],
            },
        }

    @app.get(f"{API}/runs/{{run_id}}/overlay/{{criterion_id}}")
    def example_overlay(run_id: str, criterion_id: str):
        try:
            _, run = state.get_run(run_id)
        except KeyError:
            raise _http_error(404, f"unknown run {run_id!r}")
        hierarchy = run.hierarchies.get(criterion_id)
        if hierarchy is None or hierarchy.projection is None:
            raise _http_error(404, f"run has no fitted projection for {criterion_id!r}")
        criterion = next(
            (c for c in state.load_criteria() if c.criterion_id == criterion_id), None
        )
        if criterion is None:
            raise _http_error(404, f"unknown criterion {criterion_id!r}")
        examples = [
            (e, role)
            for role, examples in criterion.example_sets().items()
            for e in examples
        ]
        if not examples:
            return []
        gateway = build_gateway(state.config)
        vectors = gateway.embed([e.function_description for e, _ in examples])
        points = transform_points(
            hierarchy.projection,
            vectors,
            refs=[e.example_id for e, _ in examples],
            ratings=["negative" if role == "negative" else "positive" for _, role in examples],
        )
        return [
            {
                "function_ref": p.function_ref,
                "x": p.x,
                "y": p.y,
                "rating": p.rating,
                "is_example_overlay": p.is_example_overlay,
                "role": role,
            }
            for p, (_, role) in zip(points, examples)
        ]

    @app.get(f"{API}/reports/benchmark")
    def benchmark(ours: str = Query(...), baseline: str | None = None,
                  gold: str = Query(...)):
        gold_path = state.root / gold
        if not gold_path.exists():
            raise _http_error(404, f"gold file {gold!r} not found in store")
        try:
            gold_annotations = load_gold(gold_path)
            methods = {}
            texts = {}
            for label, run_id in (("ours", ours), ("baseline", baseline)):
                if run_id is None:
                    continue
                try:
                    dataset, run = state.get_run(run_id)
                except KeyError:
                    raise _http_error(404, f"unknown run {run_id!r}")
                methods[label] = spans_from_run(run)
                texts.update({r.record_id: r.output for r in dataset.records})
            report = extraction_report(methods, gold_annotations, texts)
        except AlignmentError as exc:
            raise _http_error(422, str(exc))
        return JSONResponse({"report": report, "table": extraction_table(report)})

    frontend = Path(state.config.extra.get("frontend_dir", "frontend"))
    if (frontend / "index.html").is_file():
        app.mount("/", StaticFiles(directory=frontend, html=True), name="ui")

    return app

def serve(config: AppConfig) -> None:
    """Run the HTTP service until interrupted (bind errors surface at start)."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
