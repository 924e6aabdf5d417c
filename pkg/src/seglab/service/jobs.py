"""In-process background job queue for model builds.

One build executes at a time per workspace; later submissions wait in FIFO
order. Job state only moves forward: queued -> running -> ready | failed.
"""

from __future__ import annotations

import queue
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable

_STATE_ORDER = {"queued": 0, "running": 1, "ready": 2, "failed": 2}


@dataclass
class Job:
    job_id: str
    state: str = "queued"
    progress: str = "waiting for worker"
    version_id: int | None = None
    error: dict | None = None
    created_at: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat().replace("+00:00", "Z")
    )

    def advance(self, state: str, **updates) -> None:
        if _STATE_ORDER[state] < _STATE_ORDER[self.state]:
            raise RuntimeError(f"illegal job transition {self.state} -> {state}")
        self.state = state
        for key, value in updates.items():
            setattr(self, key, value)

    def to_doc(self) -> dict:
        return {
            "job_id": self.job_id,
            "state": self.state,
            "progress": self.progress,
            "version_id": self.version_id,
            "error": self.error,
            "created_at": self.created_at,
        }


class JobQueue:
    """Single daemon worker draining a FIFO of build callables."""

    def __init__(self):
        self._queue: queue.Queue = queue.Queue()
        self._jobs: dict[str, Job] = {}
        self._lock = threading.Lock()
        self._counter = 0
        self._worker = threading.Thread(target=self._run, daemon=True)
        self._worker.start()

    def _next_id(self) -> str:
        self._counter += 1
        return f"job-{self._counter}"

    def create_failed(self, error: dict) -> Job:
        """Immediate failed status for requests that do not validate."""
        with self._lock:
            job = Job(job_id=self._next_id())
            job.advance("failed", error=error, progress="request validation failed")
            self._jobs[job.job_id] = job
            return job

    def submit(self, work: Callable[[Job], int]) -> Job:
        """Enqueue ``work``; it receives the job (for progress notes) and
        returns the resulting version id."""
        with self._lock:
            job = Job(job_id=self._next_id())
            self._jobs[job.job_id] = job
        self._queue.put((job, work))
        return job

    def get(self, job_id: str) -> Job | None:
        with self._lock:
            return self._jobs.get(job_id)

    def _run(self) -> None:
        while True:
            job, work = self._queue.get()
            try:
                job.advance("running", progress="starting build")
                version_id = work(job)
                job.advance("ready", version_id=version_id, progress="done")
            except Exception as exc:  # surface as failed status, keep serving
                detail = getattr(exc, "field", None)
                job.advance(
                    "failed",
                    error={
                        "message": str(exc),
                        "fields": [{"field": detail, "message": str(exc)}] if detail else [],
                    },
                    progress="build failed",
                )
            finally:
                self._queue.task_done()

    def wait_idle(self, timeout: float | None = None) -> None:
        """Block until every queued job finished (used by tests and the CLI)."""
        if timeout is None:
            self._queue.join()
            return
        deadline = threading.Event()
        timer = threading.Timer(timeout, deadline.set)
        timer.start()
        try:
            while not deadline.is_set():
                if self._queue.unfinished_tasks == 0:
                    return
                threading.Event().wait(0.01)
            raise TimeoutError("job queue did not drain in time")
        finally:
            timer.cancel()
