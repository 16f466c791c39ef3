"""Labelled triangle meshes of house models and their OBJ interchange.

Meshes are 1:1 scale (meters). Every triangle carries a part label and an
element id; one OBJ object (``o wall_01``) is one closed solid element whose
label is the leading alphabetic part of its name.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PART_LABELS = ("wall", "floor", "roof", "stair", "furniture", "door", "window", "ground", "other")
FILTERED_LABELS = frozenset({"door", "window", "ground"})


class MeshFormatError(ValueError):
    """Raised for unparsable OBJ input."""


@dataclass
class HouseMesh:
    """Triangle soup with per-triangle part labels and element grouping.

    ``triangles``: float array (N, 3, 3) of vertex coordinates in meters.
    ``labels``: length-N array of part labels. ``elements``: length-N integer
    ids; triangles sharing an id form one closed solid.
    """

    triangles: np.ndarray
    labels: np.ndarray
    elements: np.ndarray = field(default=None)

    def __post_init__(self):
        self.triangles = np.asarray(self.triangles, dtype=np.float64).reshape(-1, 3, 3)
        self.labels = np.asarray(self.labels, dtype=object).reshape(-1)
        if self.labels.shape[0] != self.triangles.shape[0]:
            raise ValueError("labels must match triangle count")
        unknown = set(self.labels) - set(PART_LABELS)
        if unknown:
            raise ValueError(f"unknown part labels: {sorted(unknown)}")
        if self.elements is None:
            self.elements = np.zeros(len(self.labels), dtype=np.int64)
        else:
            self.elements = np.asarray(self.elements, dtype=np.int64).reshape(-1)
        if not np.isfinite(self.triangles).all():
            raise ValueError("triangle coordinates must be finite")

    def __len__(self) -> int:
        return self.triangles.shape[0]

    def is_empty(self) -> bool:
        return len(self) == 0

    def surface_areas(self) -> np.ndarray:
        a = self.triangles[:, 1] - self.triangles[:, 0]
        b = self.triangles[:, 2] - self.triangles[:, 0]
        return 0.5 * np.linalg.norm(np.cross(a, b), axis=1)


def filter_parts(mesh: HouseMesh) -> HouseMesh:
    """Drop door, window and ground triangles; keep everything else.

    Idempotent; labels and element grouping of retained triangles survive.
    """
    keep = ~np.isin(mesh.labels.astype(str), list(FILTERED_LABELS))
    return HouseMesh(mesh.triangles[keep], mesh.labels[keep], mesh.elements[keep])


def _label_of(object_name: str) -> str:
    head = object_name.strip().split("_")[0].split(".")[0].lower()
    head = "".join(ch for ch in head if ch.isalpha())
    return head if head in PART_LABELS else "other"


def read_obj(path_or_text) -> HouseMesh:
    """Parse ASCII OBJ; object names carry part labels, faces are fan-triangulated."""
    if hasattr(path_or_text, "read"):
        text = path_or_text.read()
    elif isinstance(path_or_text, (str,)) and "\n" in path_or_text:
        text = path_or_text
    else:
        with open(path_or_text) as fh:
            text = fh.read()
    vertices: list = []
    triangles: list = []
    labels: list = []
    elements: list = []
    label = "other"
    element = -1
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "v":
            if len(parts) < 4:
                raise MeshFormatError(f"line {lineno}: vertex needs 3 coordinates")
            vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
        elif tag in ("o", "g"):
            label = _label_of(parts[1]) if len(parts) > 1 else "other"
            element += 1
        elif tag == "f":
            idx = []
            for token in parts[1:]:
                i = int(token.split("/")[0])
                idx.append(i - 1 if i > 0 else len(vertices) + i)
            if len(idx) < 3:
                raise MeshFormatError(f"line {lineno}: face needs >= 3 vertices")
            for k in range(1, len(idx) - 1):
                try:
                    tri = [vertices[idx[0]], vertices[idx[k]], vertices[idx[k + 1]]]
                except IndexError:
                    raise MeshFormatError(f"line {lineno}: vertex index out of range") from None
                triangles.append(tri)
                labels.append(label)
                elements.append(max(element, 0))
    if not triangles:
        return HouseMesh(np.zeros((0, 3, 3)), np.array([], dtype=object),
                         np.array([], dtype=np.int64))
    return HouseMesh(np.array(triangles), np.array(labels, dtype=object),
                     np.array(elements, dtype=np.int64))


def write_obj(path, mesh: HouseMesh) -> None:
    """Emit one OBJ object per element, named ``<label>_<element id>``."""
    lines = []
    vtotal = 0
    for eid in np.unique(mesh.elements):
        mask = mesh.elements == eid
        label = mesh.labels[mask][0]
        lines.append(f"o {label}_{int(eid):04d}")
        tris = mesh.triangles[mask]
        for tri in tris:
            for v in tri:
                lines.append(f"v {v[0]:.6f} {v[1]:.6f} {v[2]:.6f}")
        for t in range(tris.shape[0]):
            base = vtotal + 3 * t
            lines.append(f"f {base + 1} {base + 2} {base + 3}")
        vtotal += 3 * tris.shape[0]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def cuboid_mesh(lo, hi, label: str, element: int, shrink: float = 1e-4):
    """Triangles of an axis-aligned closed box, shrunk slightly per axis.

    The shrink keeps lattice-aligned faces strictly inside the voxels they are
    meant to occupy, avoiding double-marking under the inclusive
    cube-intersection rule.
    """
    lo = np.asarray(lo, dtype=np.float64) + shrink
    hi = np.asarray(hi, dtype=np.float64) - shrink
    x0, y0, z0 = lo
    x1, y1, z1 = hi
    corners = np.array([
        [x0, y0, z0], [x1, y0, z0], [x1, y1, z0], [x0, y1, z0],
        [x0, y0, z1], [x1, y0, z1], [x1, y1, z1], [x0, y1, z1],
    ])
    quads = [  # outward-facing, counter-clockwise from outside
        (0, 3, 2, 1), (4, 5, 6, 7),  # bottom, top
        (0, 1, 5, 4), (2, 3, 7, 6),  # front, back
        (1, 2, 6, 5), (3, 0, 4, 7),  # right, left
    ]
    tris = []
    for (a, b, c, d) in quads:
        tris.append([corners[a], corners[b], corners[c]])
        tris.append([corners[a], corners[c], corners[d]])
    tris = np.array(tris)
    labels = np.array([label] * 12, dtype=object)
    elements = np.full(12, element, dtype=np.int64)
    return tris, labels, elements


def merge_meshes(parts) -> HouseMesh:
    """Concatenate ``(triangles, labels, elements)`` part tuples into one mesh."""
    if not parts:
        return HouseMesh(np.zeros((0, 3, 3)), np.array([], dtype=object))
    tris = np.concatenate([p[0] for p in parts])
    labels = np.concatenate([p[1] for p in parts])
    elements = np.concatenate([p[2] for p in parts])
    return HouseMesh(tris, labels, elements)
