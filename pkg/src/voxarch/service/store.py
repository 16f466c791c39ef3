"""Content-addressed blob store plus an append-only JSONL journal.

Every model and job mutation is one journal line; restart replays the
journal, so queued or in-flight jobs survive a crash and are re-queued.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

__all__ = ["ModelRecord", "JobRecord", "Store", "new_id", "JOB_KINDS"]

JOB_KINDS = (
    "generate",
    "complete",
    "plan_complete",
    "interpolate",
    "vary",
    "detailise",
    "metrics",
)

_STATES = ("queued", "running", "done", "failed")
# legal state moves: queued -> running -> {done, failed}
_TRANSITIONS = {
    "queued": {"queued", "running"},
    "running": {"running", "done", "failed"},
    "done": set(),
    "failed": set(),
}


def new_id() -> str:
    """Random 128-bit hex id."""
    return uuid.uuid4().hex


@dataclass
class ModelRecord:
    id: str
    resolution: int
    voxel_size: float
    path: str  # blob path relative to the store root
    tokens: list | None = None
    lineage: dict = field(default_factory=lambda: {"parents": [], "op": "upload"})
    created: float = 0.0

    def summary(self) -> dict:
        d = dataclasses.asdict(self)
        d["has_tokens"] = self.tokens is not None
        del d["tokens"]
        return d


@dataclass
class JobRecord:
    id: str
    kind: str
    params: dict
    state: str = "queued"
    progress: float = 0.0
    result_ids: list = field(default_factory=list)
    result: dict | None = None
    error: str | None = None
    created: float = 0.0

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


class Store:
    """Thread-safe model/job registry backed by one journal file."""

    def __init__(self, root):
        self.root = Path(root)
        (self.root / "blobs").mkdir(parents=True, exist_ok=True)
        self.journal_path = self.root / "journal.jsonl"
        self._lock = threading.Lock()
        self.models: dict[str, ModelRecord] = {}
        self.jobs: dict[str, JobRecord] = {}
        self._replay()

    # -- journal ---------------------------------------------------------

    def _append(self, kind: str, data: dict) -> None:
        line = json.dumps({"kind": kind, "data": data}, sort_keys=True)
        with open(self.journal_path, "a") as fh:
            fh.write(line + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def _replay(self) -> None:
        if not self.journal_path.exists():
            return
        for line in self.journal_path.read_text().splitlines():
            if not line.strip():
                continue
            entry = json.loads(line)
            data = entry["data"]
            if entry["kind"] == "model":
                self.models[data["id"]] = ModelRecord(**data)
            elif entry["kind"] == "job":
                self.jobs[data["id"]] = JobRecord(**data)
        # anything not finished when the process died runs again
        for job in self.jobs.values():
            if job.state in ("queued", "running"):
                job.state = "queued"

    # -- blobs -----------------------------------------------------------

    def put_blob(self, data: bytes) -> str:
        digest = hashlib.sha256(data).hexdigest()
        rel = f"blobs/{digest}.vxg"
        path = self.root / rel
        if not path.exists():
            tmp = path.with_suffix(".tmp")
            tmp.write_bytes(data)
            os.replace(tmp, path)
        return rel

    def blob_bytes(self, record: ModelRecord) -> bytes:
        return (self.root / record.path).read_bytes()

    # -- models ----------------------------------------------------------

    def add_model(self, data: bytes, resolution: int, voxel_size: float,
                  tokens=None, lineage=None) -> ModelRecord:
        record = ModelRecord(
            id=new_id(),
            resolution=int(resolution),
            voxel_size=float(voxel_size),
            path=self.put_blob(data),
            tokens=list(tokens) if tokens is not None else None,
            lineage=lineage or {"parents": [], "op": "upload"},
            created=time.time(),
        )
        with self._lock:
            self.models[record.id] = record
            self._append("model", dataclasses.asdict(record))
        return record

    def get_model(self, model_id: str) -> ModelRecord | None:
        return self.models.get(model_id)

    # -- jobs ------------------------------------------------------------

    def add_job(self, kind: str, params: dict) -> JobRecord:
        job = JobRecord(id=new_id(), kind=kind, params=params, created=time.time())
        with self._lock:
            self.jobs[job.id] = job
            self._append("job", job.to_json())
        return job

    def get_job(self, job_id: str) -> JobRecord | None:
        return self.jobs.get(job_id)

    def set_progress(self, job_id: str, fraction: float) -> None:
        job = self.jobs[job_id]
        job.progress = max(job.progress, min(1.0, float(fraction)))

    def transition(self, job_id: str, state: str, result_ids=None,
                   result=None, error=None) -> JobRecord:
        if state not in _STATES:
            raise ValueError(f"unknown job state {state!r}")
        with self._lock:
            job = self.jobs[job_id]
            if state not in _TRANSITIONS[job.state]:
                raise ValueError(f"illegal transition {job.state} -> {state}")
            job.state = state
            if result_ids is not None:
                job.result_ids = list(result_ids)
            if result is not None:
                job.result = result
            if error is not None:
                job.error = str(error)
            if state == "done":
                job.progress = 1.0
            self._append("job", job.to_json())
        return job

    def pending_jobs(self) -> list:
        return [j for j in self.jobs.values() if j.state == "queued"]
