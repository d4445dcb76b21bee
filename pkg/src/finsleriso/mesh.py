"""Triangulated 2-spheres: icosphere construction, connectivity, OFF files."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import sparse

__all__ = ["SphereMesh", "build_icosphere", "read_off", "write_off", "MeshError"]

MAX_SUBDIVISIONS = 7


class MeshError(ValueError):
    pass


def _icosahedron() -> tuple[np.ndarray, list[tuple[int, int, int]]]:
    # poles on the z axis, two staggered rings of five
    z = 1.0 / math.sqrt(5.0)
    r = 2.0 / math.sqrt(5.0)
    verts = [(0.0, 0.0, 1.0)]
    verts += [(r * math.cos(2 * math.pi * k / 5), r * math.sin(2 * math.pi * k / 5), z) for k in range(5)]
    verts += [(r * math.cos(2 * math.pi * k / 5 + math.pi / 5), r * math.sin(2 * math.pi * k / 5 + math.pi / 5), -z)
              for k in range(5)]
    verts.append((0.0, 0.0, -1.0))
    up = [1 + k for k in range(5)]
    lo = [6 + k for k in range(5)]
    faces = []
    for k in range(5):
        k1 = (k + 1) % 5
        faces.append((0, up[k], up[k1]))
        faces.append((up[k], lo[k], up[k1]))
        faces.append((up[k1], lo[k], lo[k1]))
        faces.append((11, lo[k1], lo[k]))
    return np.array(verts), faces


def _orient_outward(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    p = vertices[faces]
    normal = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    flip = np.einsum("ij,ij->i", normal, p.mean(axis=1)) < 0
    faces = faces.copy()
    faces[flip] = faces[flip][:, [0, 2, 1]]
    return faces


@dataclass(frozen=True, eq=False)
class SphereMesh:
    """Closed genus-0 triangle mesh with vertices on the unit sphere.

    ``face_edges[f, j]`` is the edge joining ``faces[f, j]`` and
    ``faces[f, (j + 1) % 3]``; edges are stored with ``edges[e, 0] < edges[e, 1]``.
    """

    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        f = np.asarray(self.faces, dtype=np.int64)
        object.__setattr__(self, "vertices", v / np.linalg.norm(v, axis=1, keepdims=True))
        object.__setattr__(self, "faces", _orient_outward(v, f))
        self.validate()

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @cached_property
    def _edge_data(self):
        f = self.faces
        half = np.stack([f, np.roll(f, -1, axis=1)], axis=-1).reshape(-1, 2)
        key = np.sort(half, axis=1)
        edges, inverse, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
        return edges, inverse.reshape(-1, 3), counts

    @property
    def edges(self) -> np.ndarray:
        return self._edge_data[0]

    @property
    def face_edges(self) -> np.ndarray:
        return self._edge_data[1]

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_faces(self) -> np.ndarray:
        out = np.full((self.n_edges, 2), -1, dtype=np.int64)
        fe = self.face_edges.ravel()
        faces = np.repeat(np.arange(self.n_faces), 3)
        order = np.argsort(fe, kind="stable")
        out[:, 0] = faces[order][0::2]
        out[:, 1] = faces[order][1::2]
        return out

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    def validate(self) -> None:
        counts = self._edge_data[2]
        if np.any(counts != 2):
            raise MeshError("every edge must border exactly two triangles")
        if self.euler_characteristic() != 2:
            raise MeshError(f"mesh is not a sphere (Euler characteristic {self.euler_characteristic()})")

    @cached_property
    def adjacency(self) -> sparse.csr_matrix:
        e = self.edges
        n = self.n_vertices
        data = np.ones(2 * len(e))
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        return sparse.csr_matrix((data, (rows, cols)), shape=(n, n))

    def ring_pairs(self, k: int) -> np.ndarray:
        """Ordered vertex pairs ``(i, j)``, ``i != j``, at most ``k`` edges apart."""
        if k < 1:
            raise ValueError("ring radius must be >= 1")
        step = (self.adjacency + sparse.identity(self.n_vertices, format="csr")).astype(bool).astype(np.int32)
        reach = step
        for _ in range(k - 1):
            reach = (reach @ step).astype(bool).astype(np.int32)
        reach = sparse.coo_matrix(reach)
        keep = reach.row != reach.col
        pairs = np.stack([reach.row[keep], reach.col[keep]], axis=1)
        return pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]

    def face_areas(self) -> np.ndarray:
        p = self.vertices[self.faces]
        return 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)

    def face_centroids(self) -> np.ndarray:
        c = self.vertices[self.faces].mean(axis=1)
        return c / np.linalg.norm(c, axis=1, keepdims=True)

    def mean_edge_length(self) -> float:
        e = self.edges
        return float(np.mean(np.linalg.norm(self.vertices[e[:, 0]] - self.vertices[e[:, 1]], axis=1)))


def build_icosphere(subdivisions: int) -> SphereMesh:
    """Icosahedron split ``subdivisions`` times, projected to the unit sphere."""
    if not 0 <= subdivisions <= MAX_SUBDIVISIONS:
        raise MeshError(f"subdivisions must be in 0..{MAX_SUBDIVISIONS}")
    verts, faces = _icosahedron()
    verts = [tuple(v) for v in verts]
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(a: int, b: int) -> int:
            key = (a, b) if a < b else (b, a)
            idx = cache.get(key)
            if idx is None:
                m = np.add(verts[a], verts[b]) / 2.0
                m = m / np.linalg.norm(m)
                idx = len(verts)
                verts.append(tuple(m))
                cache[key] = idx
            return idx

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    return SphereMesh(np.array(verts), np.array(faces))


def read_off(path) -> SphereMesh:
    """Read a triangulated sphere from an OFF file (vertices are projected)."""
    tokens = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            tokens.extend(line.split())
    if not tokens or tokens[0] != "OFF":
        raise MeshError("missing OFF header")
    nv, nf = int(tokens[1]), int(tokens[2])
    pos = 4
    verts = np.array(tokens[pos:pos + 3 * nv], dtype=float).reshape(nv, 3)
    pos += 3 * nv
    faces = []
    for _ in range(nf):
        count = int(tokens[pos])
        if count != 3:
            raise MeshError("only triangle faces are supported")
        faces.append([int(t) for t in tokens[pos + 1:pos + 4]])
        pos += 4
    return SphereMesh(verts, np.array(faces))


def write_off(mesh: SphereMesh, path) -> None:
    lines = ["OFF", f"{mesh.n_vertices} {mesh.n_faces} {mesh.n_edges}"]
    lines += [" ".join(f"{x:.17g}" for x in v) for v in mesh.vertices]
    lines += ["3 " + " ".join(str(i) for i in f) for f in mesh.faces]
    Path(path).write_text("\n".join(lines) + "\n")
