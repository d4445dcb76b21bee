"""Discretized Finsler metric fields on parallelotope grids.

A :class:`GridDomain` is the unit cube ``[0, 1]^n`` sampled at
``resolution + 1`` nodes per axis and carried onto a parallelotope by an
affine chart. All distances are measured in chart coordinates with the chart
matrix absorbed into the gauge, so the faces ``F_i`` (coordinate ``i == 0``)
and ``G_i`` (coordinate ``i == 1``) stay axis aligned.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import dijkstra

from .convex import ConvexBody, Gauge, GeometryError
from .volumes import VolumeKind, gauge_density

__all__ = [
    "GridDomain",
    "MetricField",
    "SmoothFunction",
    "Graph",
    "DistanceFieldResult",
    "build_graph",
    "curve_length",
    "distance_field",
    "directed_distance",
    "face_distances",
    "segment_oracle_distance",
    "random_polytope_gauge",
    "random_field",
]

DEFAULT_STENCIL = 3


@dataclass(frozen=True, eq=False)
class GridDomain:
    """Regular grid on ``[0, 1]^n`` mapped onto ``origin + chart @ [0, 1]^n``."""

    dim: int
    resolution: tuple[int, ...]
    chart: np.ndarray
    origin: np.ndarray

    @classmethod
    def unit_cube(cls, dim: int, resolution: int | Sequence[int], chart=None, origin=None) -> "GridDomain":
        if not 1 <= dim <= 3:
            raise ValueError("grid dimension must be 1, 2 or 3")
        res = (int(resolution),) * dim if np.isscalar(resolution) else tuple(int(r) for r in resolution)
        if len(res) != dim or min(res) < 1:
            raise ValueError("resolution must be >= 1 along every axis")
        chart = np.eye(dim) if chart is None else np.asarray(chart, dtype=float)
        if chart.shape != (dim, dim) or abs(np.linalg.det(chart)) < 1e-14:
            raise ValueError("chart must be an invertible dim x dim matrix")
        origin = np.zeros(dim) if origin is None else np.asarray(origin, dtype=float)
        return cls(dim, res, chart, origin)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(r + 1 for r in self.resolution)

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.shape))

    @property
    def spacing(self) -> np.ndarray:
        return 1.0 / np.array(self.resolution, dtype=float)

    def node_indices(self) -> np.ndarray:
        """Integer lattice coordinates of every node, in flat (C) order."""
        grids = np.meshgrid(*[np.arange(s) for s in self.shape], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def node_coords(self) -> np.ndarray:
        return self.node_indices() * self.spacing

    def flat_index(self, idx) -> np.ndarray:
        return np.ravel_multi_index(np.asarray(idx).T, self.shape)

    def face(self, axis: int, side: int) -> np.ndarray:
        """Flat node indices of ``F_axis`` (side 0) or ``G_axis`` (side 1)."""
        idx = self.node_indices()
        value = 0 if side == 0 else self.resolution[axis]
        return np.flatnonzero(idx[:, axis] == value)

    def cell_centers(self) -> np.ndarray:
        grids = np.meshgrid(*[(np.arange(r) + 0.5) / r for r in self.resolution], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def cell_volumes(self) -> np.ndarray:
        vol = abs(np.linalg.det(self.chart)) * float(np.prod(self.spacing))
        return np.full(int(np.prod(self.resolution)), vol)

    def refined(self, factor: int = 2) -> "GridDomain":
        return GridDomain(self.dim, tuple(r * factor for r in self.resolution), self.chart, self.origin)

    def physical(self, points) -> np.ndarray:
        return self.origin + np.asarray(points) @ self.chart.T


@dataclass(frozen=True)
class SmoothFunction:
    """``x -> amplitude * sin(2 pi <wave, x> + phase)``."""

    amplitude: float
    wave: tuple[float, ...]
    phase: float

    def __call__(self, points) -> np.ndarray:
        x = np.atleast_2d(points)
        return self.amplitude * np.sin(2 * np.pi * (x @ np.asarray(self.wave)) + self.phase)

    @classmethod
    def random(cls, rng: np.random.Generator, dim: int, amplitude: float) -> "SmoothFunction":
        return cls(
            float(rng.uniform(-amplitude, amplitude)),
            tuple(float(w) for w in rng.uniform(-1.5, 1.5, dim)),
            float(rng.uniform(0, 2 * np.pi)),
        )


def _rotation(dim: int, angle: np.ndarray, axis: Optional[np.ndarray] = None) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    if dim == 1:
        return np.ones(angle.shape + (1, 1))
    if dim == 2:
        return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    eye = np.eye(3)
    return eye + s[..., None, None] * kx + (1 - c)[..., None, None] * (kx @ kx)


@dataclass(frozen=True, eq=False)
class WarpSpec:
    """Smooth matrix field ``T(x) = R(angle(x)) diag(exp(stretch_i(x)))``."""

    angle: SmoothFunction
    stretch: tuple[SmoothFunction, ...]
    axis: Optional[tuple[float, ...]] = None

    def __call__(self, points) -> np.ndarray:
        x = np.atleast_2d(points)
        dim = x.shape[1]
        rot = _rotation(dim, self.angle(x), self.axis)
        diag = np.exp(np.stack([f(x) for f in self.stretch], axis=-1))
        return rot * diag[:, None, :]


@dataclass(frozen=True, eq=False)
class MetricField:
    """Finsler metric ``Phi_x(v) = exp(scale(x)) * base(T(x) @ chart @ v)`` on a grid.

    ``transform`` returns one ``(n, n)`` matrix per query point and ``scale``
    one log-factor; both default to the identity. Points are chart
    coordinates in ``[0, 1]^n`` and vectors are chart displacements.
    """

    domain: GridDomain
    base: Gauge
    transform: Optional[Callable] = None
    scale: Optional[Callable] = None
    name: str = "field"

    def __post_init__(self):
        if self.base.dim != self.domain.dim:
            raise GeometryError("gauge and domain dimensions differ")

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def reversible(self) -> bool:
        return self.base.reversible

    @property
    def is_constant(self) -> bool:
        return self.transform is None and self.scale is None

    def _factors(self, points):
        points = np.atleast_2d(points)
        t = None if self.transform is None else self.transform(points)
        s = None if self.scale is None else np.exp(self.scale(points))
        return t, s

    def norm(self, points, vectors) -> np.ndarray:
        """Gauge at each point applied to the matching chart vector."""
        vectors = np.atleast_2d(vectors) @ self.domain.chart.T
        t, s = self._factors(points)
        if t is not None:
            vectors = np.einsum("pij,pj->pi", t, vectors)
        out = np.asarray(self.base(vectors), dtype=float)
        return out if s is None else out * s

    def density(self, points, kind: VolumeKind) -> np.ndarray:
        """Volume per unit physical volume at each point."""
        points = np.atleast_2d(points)
        t, s = self._factors(points)
        factor = np.ones(len(points))
        if t is not None:
            factor = factor * np.abs(np.linalg.det(t))
        if s is not None:
            factor = factor * s**self.dim
        return gauge_density(self.base, kind) * factor

    def gauge_at(self, point) -> Gauge:
        """The norm at ``point`` acting on physical vectors."""
        t, s = self._factors(point)
        a = np.eye(self.dim) if t is None else t[0]
        if s is not None:
            a = a * s[0]
        # ball = a^{-1} B0
        return Gauge(self.base.body.linear_image(np.linalg.inv(a)))

    def scaled(self, factor: float) -> "MetricField":
        old = self.scale
        log_f = math.log(factor)
        scale = (lambda p: np.full(len(np.atleast_2d(p)), log_f)) if old is None else (lambda p: old(p) + log_f)
        return MetricField(self.domain, self.base, self.transform, scale, self.name)

    def on(self, domain: GridDomain) -> "MetricField":
        return MetricField(domain, self.base, self.transform, self.scale, self.name)

    def cell_centers(self) -> np.ndarray:
        return self.domain.cell_centers()

    def cell_volumes(self) -> np.ndarray:
        return self.domain.cell_volumes()


@dataclass(frozen=True, eq=False)
class Graph:
    """Directed stencil graph; ``matrix[u, v]`` is the cost of ``u -> v``."""

    matrix: sparse.csr_matrix
    src: np.ndarray
    dst: np.ndarray
    cost: np.ndarray
    domain: GridDomain
    k: int

    @property
    def n_nodes(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class DistanceFieldResult:
    sources: np.ndarray
    distance: np.ndarray
    predecessors: np.ndarray
    reverse: bool = False

    def path_to(self, node: int) -> list[int]:
        """Node sequence from the source set to ``node`` (reversed for reverse fields)."""
        path = [int(node)]
        while self.predecessors[path[-1]] >= 0:
            path.append(int(self.predecessors[path[-1]]))
        return path if self.reverse else path[::-1]


def stencil_offsets(dim: int, k: int) -> np.ndarray:
    offs = [o for o in itertools.product(range(-k, k + 1), repeat=dim) if any(o)]
    return np.array(offs, dtype=int)


def build_graph(field: MetricField, k: int = DEFAULT_STENCIL) -> Graph:
    """Connect every node to all nodes of its ``k``-ring.

    Edge cost ``u -> v`` is the gauge at the segment midpoint applied to
    ``v - u``.
    """
    dom = field.domain
    if k < 1:
        raise ValueError("stencil radius must be >= 1")
    if k > min(dom.resolution):
        raise ValueError(f"stencil radius {k} exceeds grid resolution {min(dom.resolution)}")
    idx = dom.node_indices()
    shape = np.array(dom.shape)
    h = dom.spacing
    src_list, dst_list, vec_list, mid_list = [], [], [], []
    for off in stencil_offsets(dom.dim, k):
        target = idx + off
        ok = np.all((target >= 0) & (target < shape), axis=1)
        s = np.flatnonzero(ok)
        d = np.ravel_multi_index(target[ok].T, dom.shape)
        src_list.append(s)
        dst_list.append(d)
        vec = off * h
        vec_list.append(np.broadcast_to(vec, (len(s), dom.dim)))
        mid_list.append((idx[ok] + 0.5 * off) * h)
    src = np.concatenate(src_list)
    dst = np.concatenate(dst_list)
    cost = field.norm(np.concatenate(mid_list), np.concatenate(vec_list))
    if np.any(cost <= 0) or not np.all(np.isfinite(cost)):
        raise GeometryError("edge costs must be positive and finite")
    n = dom.n_nodes
    matrix = sparse.csr_matrix((cost, (src, dst)), shape=(n, n))
    return Graph(matrix, src, dst, cost, dom, k)


def distance_field(graph: Graph, sources, reverse: bool = False) -> DistanceFieldResult:
    """Multi-source shortest paths; ``reverse`` gives distances *to* the sources."""
    sources = np.unique(np.asarray(sources, dtype=int))
    if len(sources) == 0:
        raise ValueError("empty source set")
    matrix = graph.matrix.T.tocsr() if reverse else graph.matrix
    dist, pred, _ = dijkstra(matrix, directed=True, indices=sources, min_only=True, return_predecessors=True)
    return DistanceFieldResult(sources, dist, pred, reverse)


def directed_distance(graph: Graph, sources, targets) -> tuple[float, list[int]]:
    """``d(sources -> targets)`` on the directed graph and one realizing path."""
    targets = np.asarray(targets, dtype=int)
    if len(targets) == 0:
        raise ValueError("empty target set")
    res = distance_field(graph, sources)
    dt = res.distance[targets]
    best = int(np.argmin(dt))
    if not np.isfinite(dt[best]):
        raise ValueError("target set unreachable from sources")
    return float(dt[best]), res.path_to(targets[best])


def face_distances(field: MetricField, k: int = DEFAULT_STENCIL, graph: Optional[Graph] = None):
    """Per axis, the pair ``(d(F_i -> G_i), d(G_i -> F_i))``."""
    graph = build_graph(field, k) if graph is None else graph
    dom = field.domain
    out = []
    for i in range(dom.dim):
        f, g = dom.face(i, 0), dom.face(i, 1)
        fwd, _ = directed_distance(graph, f, g)
        bwd, _ = directed_distance(graph, g, f)
        out.append((fwd, bwd))
    return out


def curve_length(field: MetricField, curve) -> float:
    """Length of a chart-coordinate polyline, gauge sampled at segment midpoints."""
    pts = np.atleast_2d(np.asarray(curve, dtype=float))
    if len(pts) < 2:
        return 0.0
    seg = np.diff(pts, axis=0)
    mid = 0.5 * (pts[1:] + pts[:-1])
    return float(np.sum(field.norm(mid, seg)))


def _box_minimize(f: Callable[[np.ndarray], np.ndarray], lo: np.ndarray, hi: np.ndarray, tol: float = 1e-13) -> float:
    """Minimum of a convex function over a box by repeated grid zooming."""
    free = np.flatnonzero(hi - lo > 0)
    base = lo.copy()
    if len(free) == 0:
        return float(f(base[None, :])[0])
    m = {1: 201, 2: 61, 3: 25}[len(free)]
    wlo, whi = lo[free].copy(), hi[free].copy()
    best = math.inf
    for _ in range(200):
        axes = [np.linspace(a, b, m) for a, b in zip(wlo, whi)]
        grid = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
        pts = np.repeat(base[None, :], len(grid), axis=0)
        pts[:, free] = grid
        vals = f(pts)
        j = int(np.argmin(vals))
        best = min(best, float(vals[j]))
        step = (whi - wlo) / (m - 1)
        if np.max(step) < tol:
            break
        centre = grid[j]
        wlo = np.maximum(lo[free], centre - 2 * step)
        whi = np.minimum(hi[free], centre + 2 * step)
    return best


def segment_oracle_distance(gauge: Gauge, domain: GridDomain, source_face: tuple[int, int], target_face: tuple[int, int]) -> float:
    """Exact face-to-face distance for a constant gauge on the (convex) domain.

    Faces are ``(axis, side)`` pairs. Straight segments are optimal, so the
    distance is the minimum of ``gauge(chart @ (y - x))`` over the box of
    displacements between the two faces.
    """
    n = domain.dim
    if gauge.dim != n:
        raise GeometryError("gauge and domain dimensions differ")

    def face_box(face):
        lo, hi = np.zeros(n), np.ones(n)
        axis, side = face
        lo[axis] = hi[axis] = float(side)
        return lo, hi

    s_lo, s_hi = face_box(source_face)
    t_lo, t_hi = face_box(target_face)
    lo, hi = t_lo - s_hi, t_hi - s_lo
    chart = domain.chart
    return _box_minimize(lambda d: np.atleast_1d(gauge(d @ chart.T)), lo, hi)


def random_polytope_gauge(rng: np.random.Generator, dim: int = 2, symmetric: bool = True,
                          n_vertices: Optional[int] = None, radii=(0.5, 1.5)) -> Gauge:
    """Random polytope gauge whose ball has vertices at radii in ``radii``."""
    while True:
        if dim == 1:
            a, b = rng.uniform(*radii, 2)
            pts = np.array([[-a], [a]]) if symmetric else np.array([[-a], [b]])
        else:
            if dim == 2:
                m = n_vertices or int(rng.integers(3, 7) if symmetric else rng.integers(3, 9))
                theta = np.sort(rng.uniform(0, 2 * np.pi if not symmetric else np.pi, m))
                dirs = np.column_stack([np.cos(theta), np.sin(theta)])
            else:
                m = n_vertices or int(rng.integers(4, 10))
                dirs = rng.normal(size=(m, 3))
                dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
            pts = dirs * rng.uniform(*radii, m)[:, None]
            if symmetric:
                pts = np.vstack([pts, -pts])
        try:
            g = Gauge(ConvexBody.polytope(pts))
        except GeometryError:
            continue
        # keep the origin comfortably interior
        if np.min(1.0 / np.linalg.norm(g.body.rows, axis=1)) > 0.1:
            return g


def random_field(rng: np.random.Generator, domain: GridDomain, reversible: bool = True,
                 amplitude: float = 0.35, base: Optional[Gauge] = None) -> MetricField:
    """Smoothly warped random polytope gauge field."""
    n = domain.dim
    base = random_polytope_gauge(rng, n, symmetric=reversible) if base is None else base
    angle = SmoothFunction.random(rng, n, math.pi / 4)
    stretch = tuple(SmoothFunction.random(rng, n, amplitude) for _ in range(n))
    axis = tuple(rng.normal(size=3)) if n == 3 else None
    warp = WarpSpec(angle, stretch, axis)
    scale = SmoothFunction.random(rng, n, amplitude)
    kind = "reversible" if reversible else "asymmetric"
    return MetricField(domain, base, warp, scale, name=f"random-{kind}")
