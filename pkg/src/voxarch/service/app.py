"""HTTP facade: model storage, job queue and artifact retrieval."""

from __future__ import annotations

import os
from contextlib import asynccontextmanager
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..grids import GridFormatError, parse_vxg1
from .jobs import CheckpointHub, JobError, JobRunner, decode_known_mask, decode_plan, required_checkpoints
from .store import JOB_KINDS, Store

__all__ = ["create_app"]

DEFAULT_MAX_UPLOAD = 64 * 1024 * 1024
OBJ_RESOLUTION = 64


class GenerateParams(BaseModel):
    model_config = ConfigDict(extra="forbid")
    count: int = Field(default=1, ge=1, le=64)
    top_k: int | None = Field(default=None, ge=1)
    temperature: float = Field(default=1.0, gt=0)
    seed: int = 0


class CompleteParams(BaseModel):
    model_config = ConfigDict(extra="forbid", protected_namespaces=())
    model_id: str
    half: str | None = Field(default=None, pattern=r"^[xyz][+-]$")
    known_mask: str | None = None
    k: int = Field(default=1, ge=1, le=16)
    top_k: int | None = Field(default=None, ge=1)
    temperature: float = Field(default=1.0, gt=0)
    seed: int = 0


class PlanCompleteParams(BaseModel):
    model_config = ConfigDict(extra="forbid")
    plan: str
    k: int = Field(default=1, ge=1, le=16)
    top_k: int | None = Field(default=None, ge=1)
    temperature: float = Field(default=1.0, gt=0)
    seed: int = 0


class InterpolateParams(BaseModel):
    model_config = ConfigDict(extra="forbid")
    a_id: str
    b_id: str
    seed: int = 0


class VaryParams(BaseModel):
    model_config = ConfigDict(extra="forbid", protected_namespaces=())
    model_id: str
    n: int = Field(default=1, ge=1, le=16)
    n_swaps: int | None = Field(default=None, ge=0)
    seed: int = 0


class DetailiseParams(BaseModel):
    model_config = ConfigDict(extra="forbid", protected_namespaces=())
    model_id: str
    target_level: int = Field(default=1, ge=1, le=3)
    ddim_steps: int = Field(default=50, ge=1)
    batch_size: int = Field(default=8, ge=1)
    seed: int = 0


class MetricsParams(BaseModel):
    model_config = ConfigDict(extra="forbid")
    generated_ids: list[str] = Field(min_length=1)
    reference_ids: list[str] = Field(min_length=1)


PARAM_MODELS = {
    "generate": GenerateParams,
    "complete": CompleteParams,
    "plan_complete": PlanCompleteParams,
    "interpolate": InterpolateParams,
    "vary": VaryParams,
    "detailise": DetailiseParams,
    "metrics": MetricsParams,
}


class JobRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    kind: str
    params: dict = Field(default_factory=dict)


def _referenced_ids(kind: str, params: dict) -> list:
    if kind == "complete" or kind == "vary" or kind == "detailise":
        return [params["model_id"]]
    if kind == "interpolate":
        return [params["a_id"], params["b_id"]]
    if kind == "metrics":
        return list(params["generated_ids"]) + list(params["reference_ids"])
    return []


def _voxelize_obj(data: bytes):
    from ..dataprep import filter_parts, read_obj, voxelize

    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ValueError(f"payload is neither VXG1 nor OBJ text: {exc}") from exc
    mesh = filter_parts(read_obj(text))
    lo = mesh.triangles.reshape(-1, 3).min(axis=0)
    hi = mesh.triangles.reshape(-1, 3).max(axis=0)
    extent = float((hi - lo).max()) * 1.02 + 1e-6
    voxel_size = extent / OBJ_RESOLUTION
    return voxelize(mesh, OBJ_RESOLUTION, origin=tuple(lo), voxel_size=voxel_size, solid="flood")


def create_app(data_dir=None, ckpt_dir=None, workers=None, max_upload=None) -> FastAPI:
    data_dir = Path(data_dir or os.environ.get("ARCH_DATA_DIR", "arch-data"))
    ckpt_dir = Path(ckpt_dir or os.environ.get("ARCH_CKPT_DIR", "checkpoints"))
    if workers is None:
        workers = int(os.environ.get("ARCH_WORKERS", "2"))
    if max_upload is None:
        max_upload = int(os.environ.get("ARCH_MAX_UPLOAD", str(DEFAULT_MAX_UPLOAD)))

    store = Store(data_dir)
    hub = CheckpointHub(ckpt_dir)
    runner = JobRunner(store, hub, workers=workers)

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        runner.stop()

    app = FastAPI(title="voxarch service", version="0.1.0", lifespan=lifespan)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store
    app.state.hub = hub
    app.state.runner = runner

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "models": len(store.models), "jobs": len(store.jobs)}

    @app.post("/models", status_code=201)
    async def upload_model(request: Request) -> dict:
        data = await request.body()
        if len(data) > max_upload:
            raise HTTPException(413, f"payload exceeds {max_upload} bytes")
        if not data:
            raise HTTPException(400, "empty payload")
        tokens = None
        try:
            grid = parse_vxg1(data)
            vxg_bytes = data
        except GridFormatError as vxg_err:
            if data[:4] == b"VXG1":
                raise HTTPException(400, f"malformed VXG1: {vxg_err}") from vxg_err
            try:
                grid = _voxelize_obj(data)
            except ValueError as obj_err:
                raise HTTPException(400, str(obj_err)) from obj_err
            from ..grids import dump_vxg1

            vxg_bytes = dump_vxg1(grid)
        record = store.add_model(vxg_bytes, grid.resolution, grid.voxel_size, tokens=tokens)
        return record.summary()

    @app.get("/models")
    def list_models() -> list:
        return [m.summary() for m in store.models.values()]

    @app.get("/models/{model_id}")
    def get_model(model_id: str) -> dict:
        record = store.get_model(model_id)
        if record is None:
            raise HTTPException(404, f"unknown model {model_id}")
        summary = record.summary()
        summary["tokens"] = record.tokens
        return summary

    @app.get("/models/{model_id}/voxels")
    def get_voxels(model_id: str) -> Response:
        record = store.get_model(model_id)
        if record is None:
            raise HTTPException(404, f"unknown model {model_id}")
        return Response(content=store.blob_bytes(record),
                        media_type="application/octet-stream")

    @app.post("/jobs", status_code=201)
    def submit_job(body: JobRequest) -> dict:
        if body.kind not in JOB_KINDS:
            raise HTTPException(422, f"unknown job kind {body.kind!r}")
        try:
            params = PARAM_MODELS[body.kind].model_validate(body.params).model_dump()
        except ValidationError as exc:
            raise HTTPException(422, str(exc)) from exc

        for model_id in _referenced_ids(body.kind, params):
            if store.get_model(model_id) is None:
                raise HTTPException(404, f"unknown model {model_id}")
        for name in required_checkpoints(body.kind, params):
            if not hub.has(name):
                raise HTTPException(409, f"missing checkpoint {name}")

        # payloads that need checkpoint metadata are validated up front so
        # the client gets a 422 instead of a failed job
        try:
            if body.kind == "plan_complete":
                decode_plan(params["plan"], hub.vqgan().config.resolution)
            if body.kind == "complete":
                if not params.get("half") and not params.get("known_mask"):
                    raise JobError("complete needs either half or known_mask")
                if params.get("known_mask"):
                    decode_known_mask(params["known_mask"],
                                      hub.vqgan().config.latent_resolution)
            if body.kind in ("interpolate", "vary"):
                r = hub.vqgan().config.resolution
                for model_id in _referenced_ids(body.kind, params):
                    entry = store.get_model(model_id)
                    if entry.tokens is None and entry.resolution != r:
                        raise JobError(f"model {model_id} has no token sequence and "
                                       f"is not at stage-1 resolution {r}")
        except JobError as exc:
            raise HTTPException(422, str(exc)) from exc

        job = store.add_job(body.kind, params)
        runner.submit(job)
        return job.to_json()

    @app.get("/jobs")
    def list_jobs() -> list:
        return [j.to_json() for j in store.jobs.values()]

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str) -> dict:
        job = store.get_job(job_id)
        if job is None:
            raise HTTPException(404, f"unknown job {job_id}")
        return job.to_json()

    return app
