"""Set-level shape metrics over occupied-voxel point clouds.

All distances are computed on per-grid unit-cube normalised point sets so the
reported numbers are independent of physical voxel size. Chamfer uses squared
Euclidean nearest-neighbour terms; Hausdorff is unsquared. Point sets larger
than ``MAX_POINTS`` are subsampled with a seeded generator for tractability.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, asdict

import numpy as np
from scipy.spatial import cKDTree

from .grids import VoxelGrid

MAX_POINTS = 2048


def grid_to_points(grid: VoxelGrid, max_points: int = MAX_POINTS, seed: int = 0) -> np.ndarray:
    """One point per occupied voxel centre, mapped into [-0.5, 0.5]^3.

    Coordinates are divided by the grid's physical extent, so rescaling
    voxel_size leaves the point set unchanged.
    """
    idx = np.argwhere(grid.occupancy)
    if idx.shape[0] == 0:
        raise ValueError("cannot convert an empty grid to points")
    pts = (idx + 0.5) / grid.resolution - 0.5
    if pts.shape[0] > max_points:
        keep = np.random.default_rng(seed).choice(pts.shape[0], size=max_points, replace=False)
        pts = pts[np.sort(keep)]
    return pts.astype(np.float64)


def chamfer(p: np.ndarray, q: np.ndarray) -> float:
    """Symmetric squared-distance Chamfer: mean nn(p->q)^2 + mean nn(q->p)^2."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.size == 0 or q.size == 0:
        raise ValueError("chamfer needs two non-empty point sets")
    d_pq, _ = cKDTree(q).query(p)
    d_qp, _ = cKDTree(p).query(q)
    return float(np.mean(d_pq ** 2) + np.mean(d_qp ** 2))


def pairwise_chamfer(a: list, b: list) -> np.ndarray:
    """Dense |a| x |b| Chamfer matrix."""
    out = np.zeros((len(a), len(b)))
    trees_b = [cKDTree(q) for q in b]
    trees_a = [cKDTree(p) for p in a]
    for i, p in enumerate(a):
        for j, q in enumerate(b):
            d_pq, _ = trees_b[j].query(p)
            d_qp, _ = trees_a[i].query(q)
            out[i, j] = np.mean(d_pq ** 2) + np.mean(d_qp ** 2)
    return out


@dataclass
class MetricReport:
    cov: float | None = None
    mmd: float | None = None
    one_nna: float | None = None
    uhd: float | None = None
    tmd: float | None = None

    def to_json(self) -> str:
        return json.dumps({k: v for k, v in asdict(self).items() if v is not None}, indent=2)


def cov_mmd_1nna(generated: list, reference: list):
    """Coverage, minimum matching distance and 1-NN two-sample accuracy.

    COV: fraction of reference shapes that are the Chamfer-nearest reference
    of at least one generated shape. MMD: mean over reference of the minimum
    Chamfer distance to the generated set. 1-NNA: leave-one-out 1-NN
    classification accuracy over the labelled union (0.5 is ideal).
    Returns the plain ``(cov, mmd, one_nna)`` triple.
    """
    if not generated or not reference:
        raise ValueError("both shape lists must be non-empty")
    if len(generated) + len(reference) < 2:
        raise ValueError("1-NNA needs at least two shapes in the union")
    d_gr = pairwise_chamfer(generated, reference)

    nearest_ref = d_gr.argmin(axis=1)
    cov = len(set(nearest_ref.tolist())) / len(reference)
    mmd = float(d_gr.min(axis=0).mean())

    d_gg = pairwise_chamfer(generated, generated)
    d_rr = pairwise_chamfer(reference, reference)
    n_g, n_r = len(generated), len(reference)
    full = np.block([[d_gg, d_gr], [d_gr.T, d_rr]])
    np.fill_diagonal(full, np.inf)  # leave-one-out
    labels = np.concatenate([np.ones(n_g, dtype=bool), np.zeros(n_r, dtype=bool)])
    predicted = labels[full.argmin(axis=1)]
    one_nna = float((predicted == labels).mean())
    return cov, mmd, one_nna


def uhd(partial: np.ndarray, completions: list) -> float:
    """Mean over completions of the unsquared Hausdorff from the partial input.

    For each completion: max over partial points of the distance to its
    nearest completion point. Completions that contain the partial score 0.
    """
    partial = np.asarray(partial, dtype=np.float64)
    if partial.size == 0 or not completions:
        raise ValueError("uhd needs a partial point set and >= 1 completion")
    dists = []
    for comp in completions:
        d, _ = cKDTree(comp).query(partial)
        dists.append(float(d.max()))
    return float(np.mean(dists))


def tmd(completions: list) -> float:
    """Total mutual difference: sum over completions of mean Chamfer to the others."""
    k = len(completions)
    if k < 2:
        raise ValueError("tmd needs at least two completions")
    d = pairwise_chamfer(completions, completions)
    per_shape = (d.sum(axis=1)) / (k - 1)  # diagonal is zero
    return float(per_shape.sum())


def novelty_histogram(generated: list, training: list, top_n: int = 5, bins: int = 20):
    """Nearest training-set Chamfer distances for each generated shape.

    Returns ``(top_dists, hist_counts, hist_edges)`` where ``top_dists`` has
    one row per generated shape holding its ``top_n`` smallest distances
    (clamped to the training-set size), and the histogram bins the per-shape
    nearest distance.
    """
    if not generated or not training:
        raise ValueError("both shape lists must be non-empty")
    if top_n > len(training):
        warnings.warn(f"top_n={top_n} exceeds training-set size {len(training)}; clamping")
    n = min(top_n, len(training))
    d = pairwise_chamfer(generated, training)
    top = np.sort(d, axis=1)[:, :n]
    counts, edges = np.histogram(top[:, 0], bins=bins)
    return top, counts, edges


def write_novelty_csv(path, top_dists: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"nn_{i + 1}" for i in range(top_dists.shape[1])])
        for row in top_dists:
            writer.writerow([f"{v:.9g}" for v in row])


def report_to_csv(path, report: MetricReport) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        rows = [(k, v) for k, v in asdict(report).items() if v is not None]
        writer.writerow([k for k, _ in rows])
        writer.writerow([f"{v:.9g}" for _, v in rows])
