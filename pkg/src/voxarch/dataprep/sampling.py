"""Surface point sampling and multi-resolution chunk extraction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..grids import VoxelGrid
from .mesh import HouseMesh
from .voxelize import voxelize

CHUNK_EDGE = 6.0
CHUNK_RESOLUTIONS = (8, 16, 32, 64)  # voxel sizes 0.75, 0.375, 0.1875, 0.09375 m
RADIUS_DECAY = 0.75


def _sample_on_triangles(mesh: HouseMesh, count: int, rng: np.random.Generator) -> np.ndarray:
    areas = mesh.surface_areas()
    total = areas.sum()
    if total <= 0:
        raise ValueError("mesh has no surface area to sample")
    probs = areas / total
    tri_idx = rng.choice(len(mesh), size=count, p=probs)
    u = rng.random(count)
    v = rng.random(count)
    flip = u + v > 1.0
    u[flip] = 1.0 - u[flip]
    v[flip] = 1.0 - v[flip]
    tris = mesh.triangles[tri_idx]
    return tris[:, 0] + u[:, None] * (tris[:, 1] - tris[:, 0]) + v[:, None] * (tris[:, 2] - tris[:, 0])


def poisson_sample_surface(mesh: HouseMesh, n: int, seed: int = 0):
    """Dart-throwing Poisson sampling on the mesh surface.

    Starts from radius sqrt(area / n); whenever a rejection streak exhausts the
    attempt budget the radius decays by 0.75 until exactly ``n`` darts stick.
    Returns (points (n, 3), final radius).
    """
    if n <= 0:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    radius = float(np.sqrt(mesh.surface_areas().sum() / n))
    accepted = np.empty((0, 3))
    budget = 64 * n
    attempts = 0
    while accepted.shape[0] < n:
        cand = _sample_on_triangles(mesh, 1, rng)[0]
        if accepted.shape[0] == 0:
            ok = True
        else:
            ok = np.min(np.linalg.norm(accepted - cand, axis=1)) >= radius
        if ok:
            accepted = np.vstack([accepted, cand])
            attempts = 0
        else:
            attempts += 1
            if attempts >= budget:
                radius *= RADIUS_DECAY
                attempts = 0
    return accepted, radius


@dataclass
class ChunkSet:
    """One chunk window voxelized at every resolution of the hierarchy."""

    center: np.ndarray
    edge: float = CHUNK_EDGE
    grids: dict = field(default_factory=dict)  # resolution -> VoxelGrid

    @property
    def origin(self) -> np.ndarray:
        return self.center - 0.5 * self.edge

    def resolutions(self):
        return sorted(self.grids)


def crop_chunk(mesh: HouseMesh, center, edge: float = CHUNK_EDGE,
               resolutions=CHUNK_RESOLUTIONS) -> ChunkSet:
    """Voxelize one cubic window at each resolution.

    Occupancy uses the same rule at every level: cube intersects geometry,
    with the per-element parity fill so solids cut by the window stay solid.
    """
    center = np.asarray(center, dtype=np.float64)
    origin = center - 0.5 * edge
    chunk = ChunkSet(center=center, edge=edge)
    for r in resolutions:
        chunk.grids[r] = voxelize(mesh, r, origin=origin, voxel_size=edge / r, solid="element")
    return chunk


def crop_chunks(mesh: HouseMesh, n: int, seed: int = 0, edge: float = CHUNK_EDGE,
                resolutions=CHUNK_RESOLUTIONS):
    """Poisson-sample n surface points and crop a chunk hierarchy at each."""
    points, radius = poisson_sample_surface(mesh, n, seed=seed)
    chunks = [crop_chunk(mesh, p, edge=edge, resolutions=resolutions) for p in points]
    return chunks, radius
