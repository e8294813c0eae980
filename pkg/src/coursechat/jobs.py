"""Background ingestion jobs with per-course serialization.

Index builds are slow relative to request timeouts, so uploads return a
job id immediately. Builds for the same course never overlap; different
courses may build in parallel.
"""

from __future__ import annotations

import threading
import uuid
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

from .errors import CourseChatError, JobNotFound

QUEUED = "queued"
BUILDING = "building"
DONE = "done"
FAILED = "failed"


@dataclass
class Job:
    job_id: str
    course_id: str
    status: str = QUEUED
    manifest_version: int | None = None
    error: str | None = None
    done_event: threading.Event = field(default_factory=threading.Event)

    def snapshot(self) -> dict:
        data = {
            "job_id": self.job_id,
            "course_id": self.course_id,
            "status": self.status,
        }
        if self.manifest_version is not None:
            data["manifest_version"] = self.manifest_version
        if self.error is not None:
            data["error"] = self.error
        return data


class JobQueue:
    def __init__(self, max_workers: int = 2):
        self._executor = ThreadPoolExecutor(
            max_workers=max_workers, thread_name_prefix="ingest"
        )
        self._jobs: dict[str, Job] = {}
        self._course_locks: dict[str, threading.Lock] = defaultdict(
            threading.Lock
        )
        self._registry_lock = threading.Lock()

    def submit(self, course_id: str, build: Callable[[], int]) -> Job:
        """Queue a build; `build` returns the new manifest version."""
        job = Job(job_id=uuid.uuid4().hex, course_id=course_id)
        with self._registry_lock:
            self._jobs[job.job_id] = job
            course_lock = self._course_locks[course_id]
        self._executor.submit(self._run, job, course_lock, build)
        return job

    def _run(self, job: Job, course_lock: threading.Lock,
             build: Callable[[], int]) -> None:
        with course_lock:
            job.status = BUILDING
            try:
                job.manifest_version = build()
                job.status = DONE
            except CourseChatError as exc:
                job.status = FAILED
                job.error = f"{exc.code}: {exc.message}"
            except Exception as exc:  # keep the worker alive
                job.status = FAILED
                job.error = str(exc)
        job.done_event.set()

    def get(self, job_id: str) -> Job:
        with self._registry_lock:
            job = self._jobs.get(job_id)
        if job is None:
            raise JobNotFound(f"no job {job_id!r}")
        return job

    def wait(self, job_id: str, timeout: float = 30.0) -> Job:
        job = self.get(job_id)
        job.done_event.wait(timeout)
        return job

    def shutdown(self) -> None:
        self._executor.shutdown(wait=True)
