import threading
import time

import pytest

from fraglens.jobs import PHASES, JobQueue, JobStatus


def test_phases_progress_monotonically_to_done():
    queue = JobQueue()
    observed = []

    def work(update):
        for phase in ("evaluating", "embedding", "clustering", "labeling"):
            update(phase)
            observed.append(phase)
        return "run-abc"

    job_id = queue.submit("ds1", work)
    status = queue.wait(job_id, timeout=10)
    assert status.phase == "done"
    assert status.run_id == "run-abc"
    order = {p: i for i, p in enumerate(PHASES)}
    indices = [order[p] for p in observed]
    assert indices == sorted(indices)


def test_late_earlier_phase_callback_never_regresses():
    queue = JobQueue()
    ready = threading.Event()
    seen = {}
    job_holder = {}

    def work(update):
        ready.wait(5)
        update("labeling")
        update("embedding")  # per-criterion loop re-enters an earlier stage
        seen["mid"] = queue.status(job_holder["id"]).phase
        return "r"

    job_holder["id"] = queue.submit("ds1", work)
    ready.set()
    status = queue.wait(job_holder["id"], timeout=10)
    assert status.phase == "done"
    assert seen["mid"] == "labeling"


def test_failure_is_terminal_with_error():
    queue = JobQueue()

    def work(update):
        update("evaluating")
        raise RuntimeError("backend exploded")

    job_id = queue.submit("ds1", work)
    status = queue.wait(job_id, timeout=10)
    assert status.phase == "failed"
    assert "backend exploded" in status.error


def test_same_dataset_jobs_serialize():
    queue = JobQueue()
    release = threading.Event()
    started_second = threading.Event()

    def slow(update):
        update("evaluating")
        release.wait(10)
        return "first"

    def fast(update):
        started_second.set()
        return "second"

    first = queue.submit("ds1", slow)
    second = queue.submit("ds1", fast)
    time.sleep(0.2)
    assert queue.status(second).phase == "queued"  # waiting behind the writer
    assert not started_second.is_set()
    release.set()
    assert queue.wait(first, timeout=10).phase == "done"
    assert queue.wait(second, timeout=10).phase == "done"


def test_different_datasets_run_concurrently():
    queue = JobQueue()
    release = threading.Event()

    def slow(update):
        release.wait(10)
        return "slow"

    def fast(update):
        return "fast"

    blocked = queue.submit("ds-a", slow)
    quick = queue.submit("ds-b", fast)
    status = queue.wait(quick, timeout=10)
    assert status.phase == "done"  # finished while ds-a is still blocked
    assert queue.status(blocked).phase in ("queued", "evaluating")
    release.set()
    queue.wait(blocked, timeout=10)


def test_unknown_job_raises():
    with pytest.raises(KeyError):
        JobQueue().status("job-nope")


def test_status_doc_shape():
    status = JobStatus(job_id="j", dataset_id="d", phase="evaluating",
                       completed=3, total=9)
    doc = status.to_doc()
    assert doc["progress"] == {"completed": 3, "total": 9}
    assert doc["phase"] == "evaluating"
