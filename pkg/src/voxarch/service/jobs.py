"""Job execution: checkpoint hub, per-kind handlers and the worker pool."""

from __future__ import annotations

import base64
import binascii
import queue
import threading
from pathlib import Path

import numpy as np

from ..config import SCENE_EXTENT
from ..genetics import crossover, mutate
from ..grids import dump_vxg1, parse_vxg1
from .store import JobRecord, Store

__all__ = ["CheckpointHub", "JobError", "JobRunner", "required_checkpoints"]


class JobError(ValueError):
    """Invalid job parameters discovered while executing."""


class CheckpointHub:
    """Loads each checkpoint at most once and shares it read-only."""

    def __init__(self, ckpt_dir):
        self.root = Path(ckpt_dir)
        self._lock = threading.Lock()
        self._cache: dict = {}

    def path(self, name: str) -> Path:
        return self.root / name

    def has(self, name: str) -> bool:
        return self.path(name).exists()

    def vqgan(self):
        from ..vqgan.train import load_vqgan

        with self._lock:
            if "vqgan" not in self._cache:
                self._cache["vqgan"] = load_vqgan(self.path("vqgan.pt"))
            return self._cache["vqgan"]

    def prior(self):
        from ..prior.train import load_prior

        with self._lock:
            if "prior" not in self._cache:
                self._cache["prior"] = load_prior(self.path("prior.pt"))
            return self._cache["prior"]

    def level(self, level: int):
        from ..upsampler import checkpoint_name, load_level

        key = f"level{level}"
        with self._lock:
            if key not in self._cache:
                model, schedule, _ = load_level(self.path(checkpoint_name(level)))
                self._cache[key] = (model, schedule)
            return self._cache[key]


def required_checkpoints(kind: str, params: dict) -> list:
    from ..upsampler import checkpoint_name

    if kind in ("generate", "complete", "plan_complete"):
        return ["vqgan.pt", "prior.pt"]
    if kind in ("interpolate", "vary"):
        return ["vqgan.pt"]
    if kind == "detailise":
        return [checkpoint_name(level) for level in range(1, int(params["target_level"]) + 1)]
    return []


def _decode_b64(raw: str, what: str) -> bytes:
    try:
        return base64.b64decode(raw, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise JobError(f"{what} is not valid base64: {exc}") from exc


def decode_plan(raw: str, resolution: int) -> np.ndarray:
    """Plan bitmaps travel as base64 of R*R bytes, x-fastest within a row."""
    data = _decode_b64(raw, "plan")
    if len(data) != resolution * resolution:
        raise JobError(f"plan must be {resolution}x{resolution} = "
                       f"{resolution * resolution} bytes, got {len(data)}")
    return np.frombuffer(data, dtype=np.uint8).reshape(resolution, resolution).astype(bool)


def decode_known_mask(raw: str, r: int) -> np.ndarray:
    data = _decode_b64(raw, "known_mask")
    if len(data) != r ** 3:
        raise JobError(f"known_mask must be {r}^3 = {r ** 3} bytes, got {len(data)}")
    return np.frombuffer(data, dtype=np.uint8).reshape(r, r, r).astype(bool)


def _store_grid(store: Store, grid, tokens, parents, op: str):
    return store.add_model(
        dump_vxg1(grid),
        resolution=grid.resolution,
        voxel_size=grid.voxel_size,
        tokens=None if tokens is None else np.asarray(tokens).tolist(),
        lineage={"parents": list(parents), "op": op},
    )


def _model_grid(store: Store, model_id: str):
    entry = store.get_model(model_id)
    if entry is None:
        raise JobError(f"unknown model {model_id}")
    return entry, parse_vxg1(store.blob_bytes(entry))


def _tokens_for(store: Store, hub: CheckpointHub, model_id: str) -> np.ndarray:
    """Stored token sequence, or re-encode when at stage-1 resolution."""
    from ..prior import tokenize

    entry, grid = _model_grid(store, model_id)
    if entry.tokens is not None:
        return np.asarray(entry.tokens, dtype=np.int64)
    vqgan = hub.vqgan()
    if entry.resolution != vqgan.config.resolution:
        raise JobError(f"model {model_id} has no token sequence and is not at "
                       f"stage-1 resolution {vqgan.config.resolution}")
    return tokenize(vqgan.index_map(grid))


def _decode(hub: CheckpointHub, tokens):
    from ..prior.sample import decode_sequence

    vqgan = hub.vqgan()
    return decode_sequence(vqgan, tokens, voxel_size=SCENE_EXTENT / vqgan.config.resolution)


def _run_generate(store, hub, job, set_progress):
    from ..prior import sample_tokens

    p = job.params
    prior = hub.prior()
    count = int(p["count"])
    length = prior.config.sequence_length
    ids = []
    for i in range(count):
        tokens = sample_tokens(
            prior,
            top_k=p.get("top_k"),
            temperature=p.get("temperature", 1.0),
            seed=int(p.get("seed", 0)) + i,
            progress=lambda done, total, _i=i: set_progress((_i + done / total) / count),
        )
        ids.append(_store_grid(store, _decode(hub, tokens), tokens, [], "generate").id)
    return ids, None


def _run_complete(store, hub, job, set_progress):
    from ..prior import complete, half_known_mask

    p = job.params
    vqgan = hub.vqgan()
    prior = hub.prior()
    entry, grid = _model_grid(store, p["model_id"])
    r = vqgan.config.latent_resolution
    if p.get("half"):
        known = half_known_mask(r, p["half"])
    elif p.get("known_mask"):
        known = decode_known_mask(p["known_mask"], r)
    else:
        raise JobError("complete needs either half or known_mask")
    k = int(p.get("k", 1))
    sequences = complete(
        prior, vqgan, grid, known, k=k,
        top_k=p.get("top_k"), temperature=p.get("temperature", 1.0),
        seed=int(p.get("seed", 0)),
    )
    ids = []
    for i, tokens in enumerate(sequences):
        ids.append(_store_grid(store, _decode(hub, tokens), tokens, [entry.id], "complete").id)
        set_progress((i + 1) / k)
    return ids, None


def _run_plan_complete(store, hub, job, set_progress):
    from ..prior import plan_complete

    p = job.params
    vqgan = hub.vqgan()
    prior = hub.prior()
    plan = decode_plan(p["plan"], vqgan.config.resolution)
    k = int(p.get("k", 1))
    sequences = plan_complete(
        prior, vqgan, plan, k=k,
        top_k=p.get("top_k"), temperature=p.get("temperature", 1.0),
        seed=int(p.get("seed", 0)),
    )
    ids = []
    for i, tokens in enumerate(sequences):
        ids.append(_store_grid(store, _decode(hub, tokens), tokens, [], "plan_complete").id)
        set_progress((i + 1) / k)
    return ids, None


def _run_interpolate(store, hub, job, set_progress):
    p = job.params
    tokens_a = _tokens_for(store, hub, p["a_id"])
    tokens_b = _tokens_for(store, hub, p["b_id"])
    if tokens_a.shape != tokens_b.shape:
        raise JobError("parents have different sequence lengths")
    child = crossover(tokens_a, tokens_b, seed=int(p.get("seed", 0)))
    record = _store_grid(store, _decode(hub, child), child,
                         [p["a_id"], p["b_id"]], "interpolate")
    return [record.id], None


def _run_vary(store, hub, job, set_progress):
    p = job.params
    base = _tokens_for(store, hub, p["model_id"])
    n = int(p.get("n", 1))
    ids = []
    for i in range(n):
        child = mutate(base, n_swaps=p.get("n_swaps"), seed=int(p.get("seed", 0)) + i)
        ids.append(_store_grid(store, _decode(hub, child), child, [p["model_id"]], "vary").id)
        set_progress((i + 1) / n)
    return ids, None


def _run_detailise(store, hub, job, set_progress):
    from ..upsampler import detailise

    p = job.params
    target = int(p["target_level"])
    entry, grid = _model_grid(store, p["model_id"])
    models = {level: hub.level(level) for level in range(1, target + 1)}
    out = detailise(
        grid, target, models,
        batch_size=int(p.get("batch_size", 8)),
        ddim_steps=int(p.get("ddim_steps", 50)),
        seed=int(p.get("seed", 0)),
        progress=lambda level, done, total: set_progress((level - 1 + done / total) / target),
    )
    record = _store_grid(store, out, None, [entry.id], "detailise")
    return [record.id], None


def _run_metrics(store, hub, job, set_progress):
    from ..metrics import cov_mmd_1nna, grid_to_points

    p = job.params

    def points(ids):
        return [grid_to_points(_model_grid(store, mid)[1]) for mid in ids]

    cov, mmd, one_nna = cov_mmd_1nna(points(p["generated_ids"]), points(p["reference_ids"]))
    return [], {"cov": cov, "mmd": mmd, "one_nna": one_nna}


HANDLERS = {
    "generate": _run_generate,
    "complete": _run_complete,
    "plan_complete": _run_plan_complete,
    "interpolate": _run_interpolate,
    "vary": _run_vary,
    "detailise": _run_detailise,
    "metrics": _run_metrics,
}


class JobRunner:
    """Bounded pool of worker threads consuming a FIFO job queue.

    With ``workers=0`` nothing runs in the background; tests drive the
    queue synchronously through :meth:`drain`.
    """

    def __init__(self, store: Store, hub: CheckpointHub, workers: int = 2):
        self.store = store
        self.hub = hub
        self.queue: queue.Queue = queue.Queue()
        self._threads = []
        self._stop = threading.Event()
        for job in store.pending_jobs():
            self.queue.put(job.id)
        for _ in range(max(0, workers)):
            t = threading.Thread(target=self._worker, daemon=True)
            t.start()
            self._threads.append(t)

    def submit(self, job: JobRecord) -> None:
        self.queue.put(job.id)

    def _execute(self, job_id: str) -> None:
        job = self.store.get_job(job_id)
        if job is None or job.state != "queued":
            return
        self.store.transition(job_id, "running")
        try:
            handler = HANDLERS[job.kind]
            result_ids, result = handler(
                self.store, self.hub, job,
                lambda frac: self.store.set_progress(job_id, frac),
            )
            self.store.transition(job_id, "done", result_ids=result_ids, result=result)
        except Exception as exc:  # noqa: BLE001 - job isolation boundary
            self.store.transition(job_id, "failed", error=exc)

    def _worker(self) -> None:
        while not self._stop.is_set():
            try:
                job_id = self.queue.get(timeout=0.2)
            except queue.Empty:
                continue
            self._execute(job_id)
            self.queue.task_done()

    def drain(self) -> None:
        """Run every queued job on the calling thread."""
        while True:
            try:
                job_id = self.queue.get_nowait()
            except queue.Empty:
                return
            self._execute(job_id)
            self.queue.task_done()

    def stop(self) -> None:
        self._stop.set()
        for t in self._threads:
            t.join(timeout=2.0)
