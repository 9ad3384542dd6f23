"""Background job queue for pipeline runs.

One worker thread per dataset serializes that dataset's jobs (single writer
per dataset); jobs for different datasets run independently. Job phases
move monotonically through queued → evaluating → embedding → clustering →
labeling → done, with failed as the terminal error state; late callbacks
from an earlier phase never move the status backwards.
"""

from __future__ import annotations

import logging
import threading
import uuid
from collections import deque
from dataclasses import dataclass, replace

logger = logging.getLogger(__name__)

PHASES = ("queued", "evaluating", "embedding", "clustering", "labeling", "done", "failed")
_ORDER = {phase: i for i, phase in enumerate(PHASES)}


@dataclass(frozen=True, slots=True)
class JobStatus:
    job_id: str
    dataset_id: str
    phase: str = "queued"
    completed: int = 0
    total: int = 0
    error: str | None = None
    run_id: str | None = None

    def to_doc(self) -> dict:
        return {
            "job_id": self.job_id,
            "dataset_id": self.dataset_id,
            "phase": self.phase,
            "progress": {"completed": self.completed, "total": self.total},
            "error": self.error,
            "run_id": self.run_id,
        }


class JobQueue:
    """Submit work keyed by dataset; read status anytime, from any thread."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._jobs: dict[str, JobStatus] = {}
        self._queues: dict[str, deque] = {}
        self._workers: dict[str, threading.Thread] = {}
        self._events: dict[str, threading.Event] = {}

    def submit(self, dataset_id: str, work) -> str:
        """Queue ``work(update)`` for the dataset; returns the job id.

        ``work`` receives an ``update(phase, completed=0, total=0)`` callable
        and returns the finished run_id.
        """
        job_id = f"job-{uuid.uuid4().hex[:12]}"
        status = JobStatus(job_id=job_id, dataset_id=dataset_id)
        with self._lock:
            self._jobs[job_id] = status
            self._events[job_id] = threading.Event()
            queue = self._queues.setdefault(dataset_id, deque())
            queue.append((job_id, work))
            if dataset_id not in self._workers or not self._workers[dataset_id].is_alive():
                worker = threading.Thread(
                    target=self._drain, args=(dataset_id,), daemon=True,
                    name=f"fraglens-jobs-{dataset_id[:8]}",
                )
                self._workers[dataset_id] = worker
                worker.start()
        return job_id

    def status(self, job_id: str) -> JobStatus:
        with self._lock:
            if job_id not in self._jobs:
                raise KeyError(f"unknown job {job_id!r}")
            return self._jobs[job_id]

    def wait(self, job_id: str, timeout: float = 60.0) -> JobStatus:
        event = self._events[job_id]
        event.wait(timeout)
        return self.status(job_id)

    def _advance(self, job_id: str, phase: str, completed: int = 0, total: int = 0) -> None:
        with self._lock:
            current = self._jobs[job_id]
            if current.phase == "failed":
                return
            if _ORDER[phase] < _ORDER[current.phase]:
                phase = current.phase  # never move backwards
            self._jobs[job_id] = replace(
                current, phase=phase, completed=completed, total=total
            )

    def _finish(self, job_id: str, *, run_id: str | None = None, error: str | None = None) -> None:
        with self._lock:
            current = self._jobs[job_id]
            if error is not None:
                self._jobs[job_id] = replace(current, phase="failed", error=error)
            else:
                self._jobs[job_id] = replace(current, phase="done", run_id=run_id)
        self._events[job_id].set()

    def _drain(self, dataset_id: str) -> None:
        while True:
            with self._lock:
                queue = self._queues[dataset_id]
                if not queue:
                    return
                job_id, work = queue.popleft()

            def update(phase: str, completed: int = 0, total: int = 0, _jid=job_id) -> None:
                self._advance(_jid, phase, completed, total)

            try:
                run_id = work(update)
            except Exception as exc:  # noqa: BLE001 - job errors become status
                logger.exception("job %s failed", job_id)
                self._finish(job_id, error=f"{type(exc).__name__}: {exc}")
            else:
                self._finish(job_id, run_id=run_id)
