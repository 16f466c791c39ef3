"""HTTP service: blob-backed model store, persistent job queue, REST API."""

from .app import create_app
from .jobs import CheckpointHub, JobError, JobRunner, decode_known_mask, decode_plan
from .store import JOB_KINDS, JobRecord, ModelRecord, Store, new_id

__all__ = [
    "CheckpointHub",
    "JOB_KINDS",
    "JobError",
    "JobRecord",
    "JobRunner",
    "ModelRecord",
    "Store",
    "create_app",
    "decode_known_mask",
    "decode_plan",
    "new_id",
]
