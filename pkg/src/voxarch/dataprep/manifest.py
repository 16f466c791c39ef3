"""Dataset layout on disk and the end-to-end preparation driver.

A prepared dataset directory looks like::

    meshes/house_0000.obj        raw labelled meshes (ground, doors intact)
    models/house_0000.vxg        filtered stage-1 voxel grids
    chunks/house_0000/c000_r08.vxg ...   chunk hierarchy per sampled point
    manifest.json
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field

from ..grids import write_vxg1
from .mesh import filter_parts, read_obj, write_obj
from .sampling import CHUNK_RESOLUTIONS, crop_chunks
from .synth import synth_house
from .voxelize import voxelize

MANIFEST_VERSION = 1


@dataclass
class ModelEntry:
    model_id: str
    split: str
    mesh_path: str
    grid_path: str
    chunk_dir: str
    n_chunks: int
    sha256: str = ""

    def to_json(self) -> dict:
        return self.__dict__.copy()


@dataclass
class DatasetManifest:
    root: str
    resolution: int
    voxel_size: float
    chunk_resolutions: tuple = CHUNK_RESOLUTIONS
    models: list = field(default_factory=list)

    def save(self, path=None) -> str:
        path = path or os.path.join(self.root, "manifest.json")
        payload = {
            "version": MANIFEST_VERSION,
            "resolution": self.resolution,
            "voxel_size": self.voxel_size,
            "chunk_resolutions": list(self.chunk_resolutions),
            "models": [m.to_json() for m in self.models],
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)
        return path

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        with open(path) as fh:
            payload = json.load(fh)
        if payload.get("version") != MANIFEST_VERSION:
            raise ValueError(f"unsupported manifest version: {payload.get('version')}")
        m = cls(root=os.path.dirname(os.path.abspath(path)),
                resolution=payload["resolution"],
                voxel_size=payload["voxel_size"],
                chunk_resolutions=tuple(payload["chunk_resolutions"]))
        m.models = [ModelEntry(**e) for e in payload["models"]]
        return m

    def split(self, name: str):
        return [m for m in self.models if m.split == name]


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _assign_split(index: int, total: int, fractions=(0.8, 0.1, 0.1)) -> str:
    train_end = round(fractions[0] * total)
    val_end = train_end + round(fractions[1] * total)
    if index < train_end or total < 3:
        return "train"
    return "val" if index < val_end else "test"


def prep_dataset(out_dir: str, n_models: int = 8, seed: int = 0, resolution: int = 64,
                 extent: float = 48.0, chunks_per_model: int = 4,
                 chunk_resolutions=CHUNK_RESOLUTIONS, progress=None) -> DatasetManifest:
    """Generate, filter, voxelize and chunk a synthetic corpus.

    The mesh is written first and read back so grids always derive from the
    on-disk OBJ, never from generator internals.
    """
    for sub in ("meshes", "models", "chunks"):
        os.makedirs(os.path.join(out_dir, sub), exist_ok=True)
    manifest = DatasetManifest(root=out_dir, resolution=resolution,
                               voxel_size=extent / resolution,
                               chunk_resolutions=tuple(chunk_resolutions))
    for i in range(n_models):
        model_id = f"house_{i:04d}"
        mesh_path = os.path.join("meshes", f"{model_id}.obj")
        write_obj(os.path.join(out_dir, mesh_path), synth_house(seed + i, resolution, extent).mesh)
        mesh = filter_parts(read_obj(os.path.join(out_dir, mesh_path)))
        grid = voxelize(mesh, resolution, voxel_size=extent / resolution, solid="flood")
        grid_path = os.path.join("models", f"{model_id}.vxg")
        write_vxg1(os.path.join(out_dir, grid_path), grid)

        chunk_dir = os.path.join("chunks", model_id)
        os.makedirs(os.path.join(out_dir, chunk_dir), exist_ok=True)
        n_chunks = 0
        if chunks_per_model > 0:
            chunks, _ = crop_chunks(mesh, chunks_per_model, seed=seed + i,
                                    resolutions=chunk_resolutions)
            for c, chunk in enumerate(chunks):
                for res, cgrid in chunk.grids.items():
                    name = f"c{c:03d}_r{res:02d}.vxg"
                    write_vxg1(os.path.join(out_dir, chunk_dir, name), cgrid)
            n_chunks = len(chunks)

        manifest.models.append(ModelEntry(
            model_id=model_id,
            split=_assign_split(i, n_models),
            mesh_path=mesh_path,
            grid_path=grid_path,
            chunk_dir=chunk_dir,
            n_chunks=n_chunks,
            sha256=_sha256(os.path.join(out_dir, grid_path)),
        ))
        if progress is not None:
            progress(i + 1, n_models)
    manifest.save()
    return manifest
