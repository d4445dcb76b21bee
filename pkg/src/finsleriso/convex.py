"""Convex bodies containing the origin and their gauges (asymmetric norms).

Bodies live in dimension 1, 2 or 3. Polytopes are stored by their extreme
points together with the facet rows ``H`` such that ``B = {x : H x <= 1}``;
the rows of ``H`` are exactly the vertices of the polar body, which makes the
gauge of a polytope a single ``max(H @ v)``.

Three closed-form kinds bypass polytope arithmetic: Euclidean balls, sup-norm
cubes and ellipsoids ``{x : x^T M x <= 1}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import ConvexHull, cKDTree

__all__ = [
    "ConvexBody",
    "Gauge",
    "GeometryError",
    "gauge_eval",
    "body_volume",
    "polar_dual",
    "difference_body",
    "symmetrize_gauge",
    "support_function",
    "hausdorff_distance",
]

MAX_DIM = 3
DUP_TOL = 1e-10
SYM_TOL = 1e-12
# 2D polygon used when a round ball has to be mixed with polytopes.
DEFAULT_POLYGON_VERTICES = 64

POLYTOPE = "polytope"
EUCLIDEAN = "euclidean"
SUP = "sup"
ELLIPSOID = "ellipsoid"


class GeometryError(ValueError):
    """Raised for degenerate bodies or dimension mismatches."""


def _check_dim(dim: int) -> None:
    if not 1 <= dim <= MAX_DIM:
        raise GeometryError(f"dimension must be in 1..{MAX_DIM}, got {dim}")


def _dedupe(points: np.ndarray, tol: float = DUP_TOL) -> np.ndarray:
    """Drop points within ``tol`` (sup norm) of an earlier kept point."""
    near: dict[int, list[int]] = {}
    for i, j in cKDTree(points).query_pairs(tol, p=np.inf):
        near.setdefault(max(i, j), []).append(min(i, j))
    keep = np.ones(len(points), dtype=bool)
    for j in sorted(near):
        if any(keep[i] for i in near[j]):
            keep[j] = False
    return points[keep]


def _canonical_order(vertices: np.ndarray) -> np.ndarray:
    dim = vertices.shape[1]
    if dim == 1:
        return vertices[np.argsort(vertices[:, 0])]
    if dim == 2:
        angles = np.arctan2(vertices[:, 1], vertices[:, 0])
        return vertices[np.argsort(angles, kind="stable")]
    order = np.lexsort(vertices.T[::-1])
    return vertices[order]


def _hull_1d(points: np.ndarray):
    lo, hi = float(points[:, 0].min()), float(points[:, 0].max())
    if not (lo < 0.0 < hi):
        raise GeometryError("origin must lie in the interior of the segment")
    vertices = np.array([[lo], [hi]])
    rows = np.array([[1.0 / lo], [1.0 / hi]])
    return vertices, rows


def _hull_nd(points: np.ndarray):
    try:
        hull = ConvexHull(points)
    except Exception as exc:  # qhull raises its own error type
        raise GeometryError(f"degenerate body: {exc}") from exc
    normals = hull.equations[:, :-1]
    offsets = -hull.equations[:, -1]
    scale = np.max(np.linalg.norm(points, axis=1))
    if np.min(offsets) <= 1e-12 * scale:
        raise GeometryError("origin must lie in the interior of the body")
    rows = _dedupe(normals / offsets[:, None], tol=1e-9 * max(1.0, np.abs(normals / offsets[:, None]).max()))
    vertices = points[np.unique(hull.vertices)]
    return vertices, rows


def _symmetrize_rows(rows: np.ndarray) -> np.ndarray:
    """Pair every facet row with its negation so that H(-v) = -(H v) exactly."""
    out = rows.copy()
    used = np.zeros(len(rows), dtype=bool)
    _, partner = cKDTree(rows).query(-rows, p=np.inf)
    for i in range(len(rows)):
        if used[i]:
            continue
        j = int(partner[i])
        used[i] = used[j] = True
        avg = 0.5 * (rows[i] - rows[j])
        out[i], out[j] = avg, -avg
    return out


@dataclass(frozen=True, eq=False)
class ConvexBody:
    """A convex body with the origin in its interior.

    Use the constructors :meth:`polytope`, :meth:`euclidean_ball`,
    :meth:`sup_ball` and :meth:`ellipsoid` rather than the raw initializer.
    """

    dim: int
    kind: str
    vertices: Optional[np.ndarray] = None
    rows: Optional[np.ndarray] = None
    radius: float = 1.0
    matrix: Optional[np.ndarray] = None
    symmetric: bool = field(default=False)

    # -- constructors -------------------------------------------------
    @classmethod
    def polytope(cls, points) -> "ConvexBody":
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        dim = pts.shape[1]
        _check_dim(dim)
        if not np.all(np.isfinite(pts)):
            raise GeometryError("non-finite vertex coordinates")
        if dim == 1:
            vertices, rows = _hull_1d(pts)
        else:
            vertices, rows = _hull_nd(pts)
        vertices = _canonical_order(_dedupe(vertices))
        scale = np.max(np.abs(vertices))
        gap, _ = cKDTree(vertices).query(-vertices, p=np.inf)
        symmetric = bool(np.all(gap <= SYM_TOL * max(1.0, scale)))
        if symmetric:
            rows = _symmetrize_rows(rows)
        return cls(dim=dim, kind=POLYTOPE, vertices=vertices, rows=rows, symmetric=symmetric)

    @classmethod
    def euclidean_ball(cls, dim: int, radius: float = 1.0) -> "ConvexBody":
        _check_dim(dim)
        if not radius > 0:
            raise GeometryError("radius must be positive")
        return cls(dim=dim, kind=EUCLIDEAN, radius=float(radius), symmetric=True)

    @classmethod
    def sup_ball(cls, dim: int, radius: float = 1.0) -> "ConvexBody":
        """The cube ``radius * [-1, 1]^dim``."""
        _check_dim(dim)
        if not radius > 0:
            raise GeometryError("radius must be positive")
        return cls(dim=dim, kind=SUP, radius=float(radius), symmetric=True)

    @classmethod
    def ellipsoid(cls, matrix) -> "ConvexBody":
        m = np.atleast_2d(np.asarray(matrix, dtype=float))
        dim = m.shape[0]
        _check_dim(dim)
        if m.shape != (dim, dim) or not np.allclose(m, m.T, rtol=0, atol=1e-12 * np.abs(m).max()):
            raise GeometryError("ellipsoid matrix must be square and symmetric")
        if np.min(np.linalg.eigvalsh(m)) <= 0:
            raise GeometryError("ellipsoid matrix must be positive definite")
        return cls(dim=dim, kind=ELLIPSOID, matrix=0.5 * (m + m.T), symmetric=True)

    @classmethod
    def cross_polytope(cls, dim: int, radius: float = 1.0) -> "ConvexBody":
        eye = np.eye(dim) * radius
        return cls.polytope(np.vstack([eye, -eye]))

    # -- conversions --------------------------------------------------
    def as_polytope(self, n_vertices: int = DEFAULT_POLYGON_VERTICES) -> "ConvexBody":
        """Polytope version of the body (exact for cubes, inscribed for balls)."""
        if self.kind == POLYTOPE:
            return self
        if self.kind == SUP:
            corners = np.array(np.meshgrid(*[[-1.0, 1.0]] * self.dim)).reshape(self.dim, -1).T
            return ConvexBody.polytope(self.radius * corners)
        if self.dim == 1:
            r = 1.0 / math.sqrt(self._quadratic()[0, 0])
            return ConvexBody.polytope([[-r], [r]])
        if self.dim == 2:
            theta = 2 * np.pi * np.arange(n_vertices) / n_vertices
            circle = np.column_stack([np.cos(theta), np.sin(theta)])
        else:
            circle = _fibonacci_sphere(n_vertices)
        # map the unit sphere onto the ellipsoid boundary
        m = self._quadratic()
        w, q = np.linalg.eigh(m)
        a = q @ np.diag(1.0 / np.sqrt(w)) @ q.T
        return ConvexBody.polytope(circle @ a.T)

    def _quadratic(self) -> np.ndarray:
        if self.kind == ELLIPSOID:
            return self.matrix
        if self.kind == EUCLIDEAN:
            return np.eye(self.dim) / self.radius**2
        raise GeometryError(f"{self.kind} body has no quadratic form")

    def linear_image(self, a) -> "ConvexBody":
        """The body ``A B`` for an invertible matrix ``A``."""
        a = np.atleast_2d(np.asarray(a, dtype=float))
        if a.shape != (self.dim, self.dim):
            raise GeometryError("matrix dimension mismatch")
        if abs(np.linalg.det(a)) <= 1e-14:
            raise GeometryError("linear image must be invertible")
        if self.kind in (EUCLIDEAN, ELLIPSOID):
            inv = np.linalg.inv(a)
            return ConvexBody.ellipsoid(inv.T @ self._quadratic() @ inv)
        return ConvexBody.polytope(self.as_polytope().vertices @ a.T)

    def scaled(self, factor: float) -> "ConvexBody":
        if not factor > 0:
            raise GeometryError("scale factor must be positive")
        if self.kind in (EUCLIDEAN, SUP):
            return ConvexBody(dim=self.dim, kind=self.kind, radius=self.radius * factor, symmetric=True)
        if self.kind == ELLIPSOID:
            return ConvexBody.ellipsoid(self.matrix / factor**2)
        return ConvexBody.polytope(self.vertices * factor)

    def __repr__(self) -> str:
        if self.kind == POLYTOPE:
            return f"ConvexBody(polytope, dim={self.dim}, n_vertices={len(self.vertices)})"
        if self.kind == ELLIPSOID:
            return f"ConvexBody(ellipsoid, dim={self.dim})"
        return f"ConvexBody({self.kind}, dim={self.dim}, radius={self.radius})"


def _fibonacci_sphere(n: int) -> np.ndarray:
    i = np.arange(n) + 0.5
    z = 1 - 2 * i / n
    phi = np.pi * (1 + 5**0.5) * i
    r = np.sqrt(1 - z * z)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


@dataclass(frozen=True, eq=False)
class Gauge:
    """Asymmetric norm whose unit ball is ``body``."""

    body: ConvexBody

    @property
    def dim(self) -> int:
        return self.body.dim

    @property
    def reversible(self) -> bool:
        return self.body.symmetric

    def __call__(self, v) -> np.ndarray | float:
        return gauge_eval(self, v)

    @classmethod
    def euclidean(cls, dim: int, radius: float = 1.0) -> "Gauge":
        return cls(ConvexBody.euclidean_ball(dim, radius))

    @classmethod
    def sup(cls, dim: int, radius: float = 1.0) -> "Gauge":
        return cls(ConvexBody.sup_ball(dim, radius))

    @classmethod
    def from_vertices(cls, vertices) -> "Gauge":
        return cls(ConvexBody.polytope(vertices))


def gauge_eval(g: Gauge, v):
    """Evaluate ``inf{t > 0 : v / t in B}``.

    ``v`` may be a single vector or an array of shape ``(..., dim)``; the
    output has the leading shape of ``v``.
    """
    arr = np.asarray(v, dtype=float)
    if arr.shape[-1:] != (g.dim,):
        raise GeometryError(f"vector dimension {arr.shape[-1:]} does not match gauge dimension {g.dim}")
    b = g.body
    if b.kind == POLYTOPE:
        # max over facets; nonnegative because the origin is interior
        out = np.max(arr @ b.rows.T, axis=-1)
        out = np.maximum(out, 0.0)
    elif b.kind == SUP:
        out = np.max(np.abs(arr), axis=-1) / b.radius
    elif b.kind == EUCLIDEAN:
        out = np.sqrt(np.sum(arr * arr, axis=-1)) / b.radius
    else:
        out = np.sqrt(np.maximum(np.einsum("...i,ij,...j->...", arr, b.matrix, arr), 0.0))
    return float(out) if np.ndim(out) == 0 else out


def support_function(b: ConvexBody, direction) -> float:
    """``max_{x in B} <x, direction>``."""
    d = np.asarray(direction, dtype=float)
    if d.shape != (b.dim,):
        raise GeometryError("direction dimension mismatch")
    if not np.any(d):
        raise GeometryError("support function needs a nonzero direction")
    if b.kind == POLYTOPE:
        return float(np.max(b.vertices @ d))
    if b.kind == SUP:
        return float(b.radius * np.sum(np.abs(d)))
    if b.kind == EUCLIDEAN:
        return float(b.radius * np.linalg.norm(d))
    return float(math.sqrt(d @ np.linalg.solve(b.matrix, d)))


def _unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def body_volume(b: ConvexBody) -> float:
    """Lebesgue volume; polytopes by a fan of simplices from the origin."""
    n = b.dim
    if b.kind == SUP:
        return (2.0 * b.radius) ** n
    if b.kind == EUCLIDEAN:
        return _unit_ball_volume(n) * b.radius**n
    if b.kind == ELLIPSOID:
        return _unit_ball_volume(n) / math.sqrt(np.linalg.det(b.matrix))
    v = b.vertices
    if n == 1:
        vol = float(v[-1, 0] - v[0, 0])
    elif n == 2:
        x, y = v[:, 0], v[:, 1]
        vol = 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
    else:
        hull = ConvexHull(v)
        tets = v[hull.simplices]
        vol = float(np.sum(np.abs(np.linalg.det(tets)))) / 6.0
    if not vol > 0:
        raise GeometryError("degenerate (flat) body")
    return vol


def polar_dual(b: ConvexBody) -> ConvexBody:
    """``{u : <u, w> <= 1 for all w in B}``."""
    if b.kind == EUCLIDEAN:
        return ConvexBody.euclidean_ball(b.dim, 1.0 / b.radius)
    if b.kind == ELLIPSOID:
        return ConvexBody.ellipsoid(np.linalg.inv(b.matrix))
    if b.kind == SUP:
        return ConvexBody.cross_polytope(b.dim, 1.0 / b.radius)
    # facet rows of B are the vertices of B*
    return ConvexBody.polytope(b.rows)


def difference_body(b: ConvexBody) -> ConvexBody:
    """Minkowski sum ``B + (-B)``."""
    if b.symmetric:
        return b.scaled(2.0)
    v = b.vertices
    diffs = (v[:, None, :] - v[None, :, :]).reshape(-1, b.dim)
    return ConvexBody.polytope(diffs)


def symmetrize_gauge(g: Gauge) -> Gauge:
    """Gauge of ``u -> g(u) + g(-u)``.

    Its dual ball is the difference body of the dual ball of ``g``, which
    is how the polytope case is built.
    """
    b = g.body
    if b.symmetric:
        return Gauge(b.scaled(0.5))
    return Gauge(polar_dual(difference_body(polar_dual(b))))


def hausdorff_distance(a: ConvexBody, b: ConvexBody, n_directions: int = 4096) -> float:
    """Hausdorff distance via support functions over sampled unit directions."""
    if a.dim != b.dim:
        raise GeometryError("dimension mismatch")
    if a.dim == 1:
        dirs = np.array([[1.0], [-1.0]])
    elif a.dim == 2:
        t = 2 * np.pi * np.arange(n_directions) / n_directions
        dirs = np.column_stack([np.cos(t), np.sin(t)])
    else:
        dirs = _fibonacci_sphere(n_directions)
    return float(np.max(np.abs(_support_many(a, dirs) - _support_many(b, dirs))))


def _support_many(b: ConvexBody, dirs: np.ndarray) -> np.ndarray:
    if b.kind == POLYTOPE:
        return np.max(dirs @ b.vertices.T, axis=1)
    if b.kind == SUP:
        return b.radius * np.sum(np.abs(dirs), axis=1)
    if b.kind == EUCLIDEAN:
        return b.radius * np.linalg.norm(dirs, axis=1)
    return np.sqrt(np.einsum("ij,ij->i", dirs, np.linalg.solve(b.matrix, dirs.T).T))
