"""Closed triangulated surfaces for the rescaled inclusion.

Meshes live in the dimensionless coordinates of the unit-size inclusion;
the physical scale enters later through the volume fraction.
"""

from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InconsistentOrientation,
    InvertedOrientation,
    OpenSurface,
    ParseError,
    SubdivisionTooLarge,
)

MAX_SUBDIVISIONS = 6


@dataclass(frozen=True)
class SurfaceMesh:
    """Flat-panel surface with outward normals.

    Build instances with :func:`from_arrays`, :func:`icosphere` or
    :func:`load_mesh`; those run the closedness and orientation checks.
    """

    vertices: np.ndarray
    faces: np.ndarray
    panel_areas: np.ndarray
    panel_centroids: np.ndarray
    panel_normals: np.ndarray
    enclosed_volume: float
    name: str = field(default="mesh")

    @property
    def n_panels(self) -> int:
        return len(self.faces)

    @property
    def total_area(self) -> float:
        return float(self.panel_areas.sum())

    def max_panel_diameter(self) -> float:
        p = self.vertices[self.faces]
        edges = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2]], axis=1)
        return float(np.linalg.norm(edges, axis=2).max())

    def closure_defect(self) -> float:
        """``|sum_j A_j n_j|`` relative to the total area."""
        s = (self.panel_areas[:, None] * self.panel_normals).sum(axis=0)
        return float(np.linalg.norm(s) / self.total_area)

    def stats(self) -> dict:
        return {
            "name": self.name,
            "vertices": int(len(self.vertices)),
            "panels": int(self.n_panels),
            "total_area": self.total_area,
            "enclosed_volume": self.enclosed_volume,
            "max_panel_diameter": self.max_panel_diameter(),
            "closure_defect": self.closure_defect(),
        }


def _check_edges(faces: np.ndarray, source: str) -> None:
    directed = Counter()
    for a, b, c in faces:
        for e in ((a, b), (b, c), (c, a)):
            directed[e] += 1
    for (a, b), count in directed.items():
        if count > 1:
            raise InconsistentOrientation(f"{source}: edge ({a}, {b}) traversed {count} times in the same direction")
        if (b, a) not in directed:
            raise OpenSurface(f"{source}: boundary edge ({a}, {b}) belongs to a single face")


def from_arrays(vertices, faces, name: str = "mesh", auto_flip: bool = False) -> SurfaceMesh:
    """Validate a triangle soup and compute panel geometry.

    Parameters
    ----------
    vertices : array_like, shape (V, 3)
    faces : array_like of int, shape (F, 3)
        Counter-clockwise when seen from outside.
    auto_flip : bool
        Reverse every face instead of raising when the enclosed volume
        comes out negative.

    Raises
    ------
    OpenSurface, InconsistentOrientation, InvertedOrientation
    """
    vertices = np.asarray(vertices, dtype=float)
    faces = np.asarray(faces, dtype=int)
    if vertices.ndim != 2 or vertices.shape[1] != 3 or faces.ndim != 2 or faces.shape[1] != 3:
        raise ParseError(f"{name}: expected (V, 3) vertices and (F, 3) faces")
    if len(faces) == 0:
        raise OpenSurface(f"{name}: no faces")
    if faces.min() < 0 or faces.max() >= len(vertices):
        raise ParseError(f"{name}: face index out of range")
    _check_edges(faces, name)

    p = vertices[faces]
    cross = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    twice_area = np.linalg.norm(cross, axis=1)
    if np.any(twice_area <= 0):
        raise ParseError(f"{name}: degenerate (zero-area) face")
    areas = 0.5 * twice_area
    normals = cross / twice_area[:, None]
    centroids = p.mean(axis=1)
    volume = float(np.sum(np.einsum("ij,ij->i", centroids, normals) * areas) / 3.0)
    if volume <= 0:
        if not auto_flip:
            raise InvertedOrientation(f"{name}: enclosed volume {volume:.6g} <= 0, faces point inward")
        return from_arrays(vertices, faces[:, ::-1], name=name, auto_flip=False)

    mesh = SurfaceMesh(vertices, faces, areas, centroids, normals, volume, name)
    if mesh.closure_defect() > 1e-10:
        raise OpenSurface(f"{name}: sum of A_j n_j does not vanish ({mesh.closure_defect():.2e})")
    for arr in (vertices, faces, areas, centroids, normals):
        arr.flags.writeable = False
    return mesh


_ICOSAHEDRON_FACES = [
    [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
    [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
    [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
    [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
]


def _icosahedron():
    t = (1.0 + np.sqrt(5.0)) / 2.0
    v = np.array(
        [[-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
         [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
         [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]],
        dtype=float,
    )
    return v / np.linalg.norm(v, axis=1)[:, None], np.array(_ICOSAHEDRON_FACES)


def icosphere(subdivisions: int = 3, radius: float = 1.0) -> SurfaceMesh:
    """Subdivided icosahedron with ``20 * 4**subdivisions`` faces.

    New vertices are projected onto the sphere after every refinement.
    """
    if not 0 <= subdivisions <= MAX_SUBDIVISIONS:
        raise SubdivisionTooLarge(f"subdivisions must lie in [0, {MAX_SUBDIVISIONS}], got {subdivisions}")
    if radius <= 0:
        raise ValueError("radius must be positive")
    verts, faces = _icosahedron()
    for _ in range(subdivisions):
        verts, faces = _subdivide(verts, faces)
    return from_arrays(radius * verts, faces, name=f"icosphere-s{subdivisions}")


def _subdivide(verts, faces):
    verts = list(verts)
    cache: dict[tuple[int, int], int] = {}

    def midpoint(a, b):
        key = (a, b) if a < b else (b, a)
        if key not in cache:
            m = verts[a] + verts[b]
            verts.append(m / np.linalg.norm(m))
            cache[key] = len(verts) - 1
        return cache[key]

    out = []
    for a, b, c in faces:
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        out += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
    return np.array(verts), np.array(out)


def ellipsoid(semi_axes, subdivisions: int = 3) -> SurfaceMesh:
    """Axis-aligned ellipsoid obtained by stretching a unit icosphere."""
    semi_axes = np.asarray(semi_axes, dtype=float)
    if semi_axes.shape != (3,) or np.any(semi_axes <= 0):
        raise ValueError("semi_axes must be three positive numbers")
    base = icosphere(subdivisions)
    label = "x".join(f"{s:g}" for s in semi_axes)
    return from_arrays(base.vertices * semi_axes, base.faces, name=f"ellipsoid-{label}-s{subdivisions}")


def _tokens(path):
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].split()
            if line:
                yield lineno, line


def load_mesh(path, auto_flip: bool = False) -> SurfaceMesh:
    """Read a triangle mesh in OFF format.

    Raises
    ------
    ParseError
        Malformed file; the message carries the path and line number.
    OpenSurface, InconsistentOrientation, InvertedOrientation
        Topology or orientation problems.
    """
    path = os.fspath(path)
    lines = _tokens(path)
    try:
        lineno, head = next(lines)
        if head[0] != "OFF":
            raise ParseError(f"{path}:{lineno}: expected 'OFF' header, got {head[0]!r}")
        head = head[1:] or next(lines)[1]
        nv, nf = int(head[0]), int(head[1])
        vertices = []
        for _ in range(nv):
            lineno, tok = next(lines)
            if len(tok) < 3:
                raise ParseError(f"{path}:{lineno}: vertex needs three coordinates")
            vertices.append([float(x) for x in tok[:3]])
        faces = []
        for _ in range(nf):
            lineno, tok = next(lines)
            if int(tok[0]) != 3 or len(tok) < 4:
                raise ParseError(f"{path}:{lineno}: only triangular faces '3 i j k' are supported")
            faces.append([int(x) for x in tok[1:4]])
    except StopIteration:
        raise ParseError(f"{path}: unexpected end of file") from None
    except (ValueError, IndexError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"{path}:{lineno}: {exc}") from None
    name = os.path.splitext(os.path.basename(path))[0]
    try:
        return from_arrays(vertices, faces, name=name, auto_flip=auto_flip)
    except (OpenSurface, InconsistentOrientation, InvertedOrientation, ParseError) as exc:
        msg = str(exc).replace(f"{name}:", f"{path}:", 1)
        raise type(exc)(msg) from None


def write_off(mesh: SurfaceMesh, path) -> None:
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{len(mesh.vertices)} {mesh.n_panels} 0\n")
        for x, y, z in mesh.vertices:
            fh.write(f"{float(x)!r} {float(y)!r} {float(z)!r}\n")
        for a, b, c in mesh.faces:
            fh.write(f"3 {a} {b} {c}\n")
