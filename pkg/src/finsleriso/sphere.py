"""Dividing curves on Riemannian and Finsler 2-spheres.

Curves are boundaries of vertex labelings: a vertex set ``inside`` together
with one point on every edge that joins an inside vertex to an outside one.
Each triangle with mixed labels carries exactly one segment, so such a
boundary is always a disjoint union of simple closed polylines; it is a
single dividing curve exactly when both label classes are edge-connected.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components, dijkstra

from .besicovitch import BoundReport
from .mesh import SphereMesh
from .volumes import BH, HT, RIEMANNIAN, VolumeKind, integrate_volume

__all__ = [
    "RoundMetric",
    "ConformalMetric",
    "SupLikeMetric",
    "SphereField",
    "MeshCurve",
    "SplitResult",
    "DivisionResult",
    "assign_metric",
    "mesh_area",
    "distance_from",
    "level_set_curves",
    "curve_split",
    "shorten_curve",
    "find_dividing_curve",
    "verify_division_bound",
    "division_bound",
    "coarea_check",
    "equator_probe",
    "suplike_ball_area",
    "suplike_dual_area",
    "write_curve_csv",
]

DEFAULT_RING = 3
DEFAULT_SEEDS = 20
DEFAULT_RADII = 64
DEFAULT_BOUND_TOLERANCE = 0.02


# -- metrics -------------------------------------------------------------

def _unit(points) -> np.ndarray:
    p = np.atleast_2d(points)
    return p / np.linalg.norm(p, axis=1, keepdims=True)


@dataclass(frozen=True)
class RoundMetric:
    """Round sphere of the given radius."""

    radius: float = 1.0
    name = "round"
    reversible = True
    is_riemannian = True

    def norm(self, points, vectors) -> np.ndarray:
        return self.radius * np.linalg.norm(np.atleast_2d(vectors), axis=1)

    def density(self, points, kind: VolumeKind) -> np.ndarray:
        n = len(np.atleast_2d(points))
        r2 = self.radius**2
        if kind.tag == "Custom":
            return np.full(n, kind.c * 4.0 / math.pi * r2)
        return np.full(n, r2)

    def scaled(self, factor: float) -> "RoundMetric":
        return RoundMetric(self.radius * factor)


@dataclass(frozen=True)
class ConformalMetric:
    """``radius * exp(phi) * |v|`` with a Gaussian bump ``phi``."""

    radius: float = 1.0
    amplitude: float = 0.5
    center: tuple[float, float, float] = (0.0, 0.6, 0.8)
    width: float = 0.7
    name = "conformal"
    reversible = True
    is_riemannian = True

    def log_factor(self, points) -> np.ndarray:
        d2 = np.sum((_unit(points) - np.asarray(self.center)) ** 2, axis=1)
        return self.amplitude * np.exp(-d2 / self.width**2)

    def norm(self, points, vectors) -> np.ndarray:
        return self.radius * np.exp(self.log_factor(points)) * np.linalg.norm(np.atleast_2d(vectors), axis=1)

    def density(self, points, kind: VolumeKind) -> np.ndarray:
        base = self.radius**2 * np.exp(2 * self.log_factor(points))
        return base * (kind.c * 4.0 / math.pi if kind.tag == "Custom" else 1.0)

    def scaled(self, factor: float) -> "ConformalMetric":
        return ConformalMetric(self.radius * factor, self.amplitude, self.center, self.width)


def suplike_ball_area(alpha) -> np.ndarray:
    """Area of the convex hull of the unit disk and the square with corners
    at distance ``1 / cos(alpha)`` on the diagonals."""
    alpha = np.asarray(alpha, dtype=float)
    return math.pi + 4.0 * (np.tan(alpha) - alpha)


def suplike_dual_area(alpha) -> np.ndarray:
    """Area of the polar body: the unit disk with four diagonal caps cut at ``cos(alpha)``."""
    alpha = np.asarray(alpha, dtype=float)
    return math.pi - 4.0 * (alpha - np.sin(alpha) * np.cos(alpha))


def _tangent_frame(points) -> tuple[np.ndarray, np.ndarray]:
    p = _unit(points)
    rho = np.hypot(p[:, 0], p[:, 1])
    safe = np.where(rho > 1e-12, rho, 1.0)
    east = np.column_stack([-p[:, 1] / safe, p[:, 0] / safe, np.zeros(len(p))])
    east[rho <= 1e-12] = (1.0, 0.0, 0.0)
    north = np.cross(p, east)
    return east, north


@dataclass(frozen=True)
class SupLikeMetric:
    """Round metric pushed toward the sup norm of the east/north frame.

    The unit ball at a point is the hull of the disk and a square whose
    corners sit at distance ``1 / cos(alpha)``; ``alpha = alpha_max * (1 - z^2)``
    interpolates between the round ball (``alpha = 0``, at the poles where the
    frame is singular) and the full sup-norm square (``alpha = pi / 4``).
    """

    alpha_max: float = math.pi / 4
    radius: float = 1.0
    name = "sup_like"
    reversible = True

    @property
    def is_riemannian(self) -> bool:
        return self.alpha_max == 0

    def alpha(self, points) -> np.ndarray:
        p = _unit(points)
        return self.alpha_max * (1.0 - p[:, 2] ** 2)

    def norm(self, points, vectors) -> np.ndarray:
        v = np.atleast_2d(vectors)
        east, north = _tangent_frame(points)
        theta = np.arctan2(np.einsum("ij,ij->i", v, north), np.einsum("ij,ij->i", v, east))
        off_diagonal = np.abs(np.mod(theta, math.pi / 2) - math.pi / 4)
        shrink = np.cos(np.maximum(self.alpha(points) - off_diagonal, 0.0))
        return self.radius * np.linalg.norm(v, axis=1) * shrink

    def density(self, points, kind: VolumeKind) -> np.ndarray:
        a = self.alpha(points)
        r2 = self.radius**2
        if kind.tag == "BH":
            return math.pi * r2 / suplike_ball_area(a)
        if kind.tag == "HT":
            return r2 * suplike_dual_area(a) / math.pi
        if kind.tag == "Custom":
            return kind.c * 4.0 * r2 / suplike_ball_area(a)
        if not self.is_riemannian:
            raise ValueError("sup-like metric is not Riemannian")
        return np.full(len(a), r2)

    def scaled(self, factor: float) -> "SupLikeMetric":
        return SupLikeMetric(self.alpha_max, self.radius * factor)


METRIC_CATALOG = {"round": RoundMetric, "conformal": ConformalMetric, "sup_like": SupLikeMetric}


@dataclass(eq=False)
class SphereField:
    """A metric on a sphere mesh plus its chord graph.

    Graph edges join vertices at most ``ring`` mesh edges apart; the cost of
    a chord is the metric at its (projected) midpoint applied to the chord.
    """

    mesh: SphereMesh
    metric: object
    ring: int = DEFAULT_RING
    _graph: Optional[sparse.csr_matrix] = field(default=None, repr=False)

    @property
    def reversible(self) -> bool:
        return self.metric.reversible

    @property
    def graph(self) -> sparse.csr_matrix:
        if self._graph is None:
            pairs = self.mesh.ring_pairs(self.ring)
            p = self.mesh.vertices[pairs[:, 0]]
            q = self.mesh.vertices[pairs[:, 1]]
            cost = self.metric.norm(_unit(p + q), q - p)
            n = self.mesh.n_vertices
            self._graph = sparse.csr_matrix((cost, (pairs[:, 0], pairs[:, 1])), shape=(n, n))
        return self._graph

    def norm(self, points, vectors) -> np.ndarray:
        return self.metric.norm(_unit(points), vectors)

    def cell_centers(self) -> np.ndarray:
        return self.mesh.face_centroids()

    def cell_volumes(self) -> np.ndarray:
        return self.mesh.face_areas()

    def density(self, points, kind: VolumeKind) -> np.ndarray:
        return self.metric.density(points, kind)

    def scaled(self, factor: float) -> "SphereField":
        return SphereField(self.mesh, self.metric.scaled(factor), self.ring)


def assign_metric(mesh: SphereMesh, spec, ring: int = DEFAULT_RING) -> SphereField:
    """Build a field from a catalog entry such as ``{"id": "round", "radius": 2}``."""
    if isinstance(spec, str):
        spec = {"id": spec}
    spec = dict(spec)
    key = spec.pop("id", None)
    if key not in METRIC_CATALOG:
        raise ValueError(f"unknown sphere metric {key!r}; known: {sorted(METRIC_CATALOG)}")
    if "center" in spec:
        spec["center"] = tuple(float(x) for x in spec["center"])
    return SphereField(mesh, METRIC_CATALOG[key](**spec), ring)


def mesh_area(field: SphereField, kind: VolumeKind = BH) -> float:
    return integrate_volume(field, kind)


def distance_from(field: SphereField, basepoint: int) -> np.ndarray:
    return dijkstra(field.graph, directed=True, indices=int(basepoint))


# -- labeled curves ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MeshCurve:
    """Closed polyline through points on mesh edges, in cyclic order.

    Point ``j`` sits at ``(1 - t) * v0 + t * v1`` on edge ``edges[j]`` with
    ``(v0, v1) = mesh.edges[edges[j]]``.
    """

    edges: np.ndarray
    t: np.ndarray

    def points(self, mesh: SphereMesh) -> np.ndarray:
        e = mesh.edges[self.edges]
        a, b = mesh.vertices[e[:, 0]], mesh.vertices[e[:, 1]]
        return (1 - self.t)[:, None] * a + self.t[:, None] * b

    def length(self, field: SphereField) -> float:
        p = self.points(field.mesh)
        q = np.roll(p, -1, axis=0)
        return float(np.sum(field.norm(0.5 * (p + q), q - p)))

    def __len__(self) -> int:
        return len(self.edges)


def _cut_mask(mesh: SphereMesh, inside: np.ndarray) -> np.ndarray:
    e = mesh.edges
    return inside[e[:, 0]] != inside[e[:, 1]]


def _edge_points(mesh: SphereMesh, frac: np.ndarray, ids: np.ndarray) -> np.ndarray:
    e = mesh.edges[ids]
    t = frac[ids][..., None]
    return (1 - t) * mesh.vertices[e[..., 0]] + t * mesh.vertices[e[..., 1]]


def _mixed_segments(mesh: SphereMesh, inside: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mixed triangles and their two cut edges, in face order."""
    cut = _cut_mask(mesh, inside)
    fe = mesh.face_edges
    fcut = cut[fe]
    mixed = np.flatnonzero(fcut.any(axis=1))
    pairs = fe[mixed][fcut[mixed]].reshape(-1, 2)
    return mixed, pairs


def labeled_length(field: SphereField, inside: np.ndarray, frac: np.ndarray) -> float:
    """Total length of the boundary of a labeling (all components)."""
    _, pairs = _mixed_segments(field.mesh, inside)
    if len(pairs) == 0:
        return 0.0
    p = _edge_points(field.mesh, frac, pairs[:, 0])
    q = _edge_points(field.mesh, frac, pairs[:, 1])
    return float(np.sum(field.norm(0.5 * (p + q), q - p)))


def _poly_area(points: np.ndarray) -> np.ndarray:
    """Flat area of planar polygons given as ``(n_poly, k, 3)`` fans."""
    area = np.zeros(len(points))
    for j in range(1, points.shape[1] - 1):
        area += 0.5 * np.linalg.norm(np.cross(points[:, j] - points[:, 0], points[:, j + 1] - points[:, 0]), axis=1)
    return area


def labeled_areas(field: SphereField, inside: np.ndarray, frac: np.ndarray, kind: VolumeKind,
                  density: Optional[np.ndarray] = None) -> tuple[float, float]:
    """Areas of the inside and outside regions, splitting crossed triangles."""
    mesh = field.mesh
    if density is None:
        density = field.density(mesh.face_centroids(), kind)
    flat = mesh.face_areas()
    lab = inside[mesh.faces]
    count = lab.sum(axis=1)
    inside_flat = np.where(count == 3, flat, 0.0)
    mixed = np.flatnonzero((count == 1) | (count == 2))
    if len(mixed):
        f = mesh.faces[mixed]
        fe = mesh.face_edges[mixed]
        lm = lab[mixed]
        # the lone vertex is the one whose label differs from the other two
        lone = np.where(count[mixed] == 1, np.argmax(lm, axis=1), np.argmin(lm, axis=1))
        rows = np.arange(len(mixed))
        apex = mesh.vertices[f[rows, lone]]
        # edges lone->next and prev->lone
        e_next = fe[rows, lone]
        e_prev = fe[rows, (lone + 2) % 3]
        tri = np.stack([apex, _edge_points(mesh, frac, e_next), _edge_points(mesh, frac, e_prev)], axis=1)
        corner = _poly_area(tri)
        inside_flat[mixed] = np.where(count[mixed] == 1, corner, flat[mixed] - corner)
    total = float(np.sum(density * flat))
    a_in = float(np.sum(density * inside_flat))
    return a_in, total - a_in


def _components(mesh: SphereMesh, mask: np.ndarray) -> tuple[int, np.ndarray]:
    idx = np.flatnonzero(mask)
    if len(idx) == 0:
        return 0, np.zeros(0, dtype=int)
    sub = mesh.adjacency[idx][:, idx]
    return connected_components(sub, directed=False)


def labels_divide(mesh: SphereMesh, inside: np.ndarray) -> bool:
    """True iff both label classes are nonempty and edge-connected."""
    n_in, _ = _components(mesh, inside)
    n_out, _ = _components(mesh, ~inside)
    return n_in == 1 and n_out == 1


def boundary_cycles(mesh: SphereMesh, inside: np.ndarray, frac: np.ndarray) -> list[MeshCurve]:
    """Chain the boundary of a labeling into closed curves."""
    _, pairs = _mixed_segments(mesh, inside)
    if len(pairs) == 0:
        return []
    nbrs: dict[int, list[int]] = {}
    for a, b in pairs:
        nbrs.setdefault(int(a), []).append(int(b))
        nbrs.setdefault(int(b), []).append(int(a))
    seen: set[int] = set()
    curves = []
    for start in sorted(nbrs):
        if start in seen:
            continue
        cycle = [start]
        seen.add(start)
        prev, cur = start, min(nbrs[start])
        while cur != start:
            cycle.append(cur)
            seen.add(cur)
            a, b = nbrs[cur]
            prev, cur = cur, (b if a == prev else a)
        ids = np.array(cycle)
        curves.append(MeshCurve(ids, frac[ids].copy()))
    return curves


def _level_frac(mesh: SphereMesh, values: np.ndarray, level: float) -> np.ndarray:
    e = mesh.edges
    a, b = values[e[:, 0]], values[e[:, 1]]
    denom = np.where(b != a, b - a, 1.0)
    return np.clip((level - a) / denom, 0.0, 1.0)


def level_set_curves(field: SphereField, basepoint: int, r: float, distance: Optional[np.ndarray] = None) -> list[MeshCurve]:
    """Components of ``{d(basepoint, .) = r}`` by linear interpolation on edges."""
    d = distance_from(field, basepoint) if distance is None else distance
    positive = d[d > 0]
    if len(positive) == 0 or r <= positive.min():
        return []
    inside = d < r
    if inside.all():
        return []
    return boundary_cycles(field.mesh, inside, _level_frac(field.mesh, d, r))


@dataclass
class SplitResult:
    inside: np.ndarray
    region1: np.ndarray
    region2: np.ndarray
    areas: tuple[float, float]


def curve_split(field: SphereField, curve: MeshCurve, kind: VolumeKind = BH) -> SplitResult:
    """Flood-fill the two sides of a closed curve and measure them.

    Regions are reported as triangle index sets (crossed triangles appear in
    both); ``areas[0] >= areas[1]``.
    """
    mesh = field.mesh
    blocked = np.zeros(mesh.n_edges, dtype=bool)
    blocked[curve.edges] = True
    e = mesh.edges[~blocked]
    n = mesh.n_vertices
    g = sparse.csr_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
    n_comp, comp = connected_components(g, directed=False)
    if n_comp != 2:
        raise ValueError(f"curve does not separate the mesh into two regions ({n_comp} components)")
    ends = mesh.edges[curve.edges]
    if np.any(comp[ends[:, 0]] == comp[ends[:, 1]]):
        raise ValueError("curve edges must join the two regions")
    inside = comp == comp[ends[0, 0]]
    if len(boundary_cycles(mesh, inside, np.zeros(mesh.n_edges))) != 1:
        raise ValueError("curve is not a single simple closed curve")
    frac = np.zeros(mesh.n_edges)
    frac[curve.edges] = curve.t
    a_in, a_out = labeled_areas(field, inside, frac, kind)
    lab = inside[mesh.faces]
    r_in = np.flatnonzero(lab.any(axis=1))
    r_out = np.flatnonzero((~lab).any(axis=1))
    if a_in >= a_out:
        return SplitResult(inside, r_in, r_out, (a_in, a_out))
    return SplitResult(~inside, r_out, r_in, (a_out, a_in))


# -- shortening ----------------------------------------------------------

@dataclass
class _State:
    inside: np.ndarray
    frac: np.ndarray
    length: float
    areas: tuple[float, float]


def _evaluate(field: SphereField, inside, frac, kind, density) -> Optional[_State]:
    if not labels_divide(field.mesh, inside):
        return None
    return _State(inside, frac, labeled_length(field, inside, frac), labeled_areas(field, inside, frac, kind, density))


def _relabel(mesh: SphereMesh, side_mask: np.ndarray, path: np.ndarray, arc_vertices: list[set], flip_arc: int):
    """Vertices cut off from ``side_mask`` by ``path`` on the side of ``arc_vertices[flip_arc]``."""
    rest = side_mask.copy()
    rest[path] = False
    n_comp, comp = _components(mesh, rest)
    idx = np.flatnonzero(rest)
    label_of = dict(zip(idx.tolist(), comp.tolist()))
    touch = [set(label_of[v] for v in arc if v in label_of) for arc in arc_vertices]
    drop = touch[flip_arc] - touch[1 - flip_arc]
    if not drop:
        return None
    return idx[np.isin(comp, list(drop))]


def shorten_curve(field: SphereField, curve: MeshCurve, area_floor: float, epsilon: float,
                  kind: VolumeKind = BH, trace: Optional[list] = None, **options) -> MeshCurve:
    """Remove shortcuts from a dividing curve while both areas stay >= ``area_floor``.

    A shortcut is a graph path inside one side joining two curve points that
    beats the shorter curve arc between them by more than ``epsilon``.
    Replacing an arc by the path (and moving the vertices it cuts off to the
    other side) is accepted when the result is again a single dividing curve,
    respects the floor and is shorter by more than ``epsilon``. The input is
    returned unchanged when no move is admissible.
    """
    mesh = field.mesh
    inside = curve_split(field, curve, kind).inside
    frac = np.full(mesh.n_edges, 0.5)
    frac[curve.edges] = curve.t
    inside, frac = _shorten_labels(field, inside, frac, area_floor, epsilon, kind, trace=trace, **options)
    return boundary_cycles(mesh, inside, frac)[0]


def _mesh_wall(sub_mesh: sparse.csr_matrix, chord_path: np.ndarray) -> Optional[np.ndarray]:
    """Replace each chord of a path by a mesh-edge path (local indices).

    Chords skip vertices, so they do not separate the vertex adjacency
    graph; an edge path does, since mesh edges cannot cross.
    """
    wall = [int(chord_path[0])]
    for u, v in zip(chord_path[:-1], chord_path[1:]):
        _, pred = dijkstra(sub_mesh, directed=False, indices=int(u), return_predecessors=True,
                           limit=4.0 * DEFAULT_RING)
        if pred[v] < 0:
            return None
        piece = [int(v)]
        while piece[-1] != u:
            piece.append(int(pred[piece[-1]]))
        wall.extend(reversed(piece[:-1]))
    return np.array(wall)


def _shortcut_options(saving: np.ndarray, arc: np.ndarray, total: float, epsilon: float) -> set:
    """Best target at a few arc scales, so local shortcuts are not hidden by global ones."""
    picks = set()
    for scale in (0.5, 0.25, 0.125):
        masked = np.where(arc <= scale * total, saving, -np.inf)
        j = int(np.argmax(masked))
        if masked[j] > epsilon:
            picks.add(j)
    return picks


def _shorten_labels(field: SphereField, inside: np.ndarray, frac: np.ndarray, area_floor: float,
                    epsilon: float, kind: VolumeKind, max_iter: int = 500, n_anchors: int = 24,
                    candidates_per_round: int = 24, trace: Optional[list] = None):
    mesh = field.mesh
    frac = frac.copy()
    density = field.density(mesh.face_centroids(), kind)
    state = _evaluate(field, inside, frac, kind, density)
    if state is None:
        raise ValueError("input labeling is not a dividing curve")
    graph = field.graph
    e = mesh.edges
    elen = np.linalg.norm(mesh.vertices[e[:, 0]] - mesh.vertices[e[:, 1]], axis=1)
    n = mesh.n_vertices
    mesh_w = sparse.csr_matrix((np.concatenate([elen, elen]),
                                (np.concatenate([e[:, 0], e[:, 1]]), np.concatenate([e[:, 1], e[:, 0]]))),
                               shape=(n, n))
    for _ in range(max_iter):
        curve = boundary_cycles(mesh, state.inside, state.frac)[0]
        pts = curve.points(mesh)
        nxt = np.roll(pts, -1, axis=0)
        seg = field.norm(0.5 * (pts + nxt), nxt - pts)
        s = np.concatenate([[0.0], np.cumsum(seg)[:-1]])
        total = float(np.sum(seg))
        m = len(curve)
        ends = mesh.edges[curve.edges]
        anchors = np.unique(np.searchsorted(s, np.linspace(0, total, n_anchors, endpoint=False)))
        anchors = anchors[anchors < m]
        options = []
        sides = {}
        for side in (True, False):
            mask = state.inside == side
            bv = np.where(mask[ends[:, 0]], ends[:, 0], ends[:, 1])
            idx = np.flatnonzero(mask)
            local = -np.ones(n, dtype=int)
            local[idx] = np.arange(len(idx))
            dist, pred = dijkstra(graph[idx][:, idx], directed=True, indices=local[bv[anchors]],
                                  return_predecessors=True, limit=total / 2 + epsilon)
            sides[side] = (bv, idx, local, pred, mesh_w[idx][:, idx])
            for row, a in enumerate(anchors):
                arc = np.abs(s - s[a])
                arc = np.minimum(arc, total - arc)
                saving = arc - dist[row, local[bv]]
                saving[~np.isfinite(saving)] = -np.inf
                for j in _shortcut_options(saving, arc, total, epsilon):
                    options.append((float(saving[j]), not side, int(a), j, row))
        if not options:
            break
        options.sort()
        options.sort(key=lambda o: -o[0])
        accepted = None
        for saving, flipped, a, j, row in options[:candidates_per_round]:
            side = not flipped
            bv, idx, local, pred, sub_mesh = sides[side]
            chord = [local[bv[j]]]
            while pred[row, chord[-1]] >= 0:
                chord.append(pred[row, chord[-1]])
            wall = _mesh_wall(sub_mesh, np.array(chord))
            if wall is None:
                continue
            path = idx[wall]
            lo, hi = sorted((a, j))
            arcs = [set(bv[lo + 1:hi].tolist()), set(bv[hi + 1:].tolist()) | set(bv[:lo].tolist())]
            mask = state.inside == side
            for flip_arc in (0, 1):
                drop = _relabel(mesh, mask, path, arcs, flip_arc)
                if drop is None:
                    continue
                new_inside = state.inside.copy()
                new_inside[drop] = not side
                new_frac = state.frac.copy()
                newly_cut = _cut_mask(mesh, new_inside) & ~_cut_mask(mesh, state.inside)
                new_frac[newly_cut] = 0.5
                cand = _evaluate(field, new_inside, new_frac, kind, density)
                if cand is None or min(cand.areas) < area_floor or cand.length >= state.length - epsilon:
                    continue
                if accepted is None or cand.length < accepted.length:
                    accepted = cand
            if accepted is not None:
                break
        if accepted is None:
            break
        if trace is not None:
            trace.append((state.length, accepted.length, min(accepted.areas)))
        state = accepted
    return state.inside, state.frac


# -- search --------------------------------------------------------------

@dataclass
class DivisionResult:
    curve: MeshCurve
    inside: np.ndarray
    length: float
    areas: tuple[float, float]
    total_area: float
    kind: VolumeKind
    seed: int
    radius: float
    n_candidates: int
    bounds: list = field(default_factory=list)

    def record(self, report: Optional[BoundReport] = None) -> dict:
        out = {"length": self.length, "area1": self.areas[0], "area2": self.areas[1]}
        if report is not None:
            out.update({"bound_id": report.inequality, "bound": report.bound, "slack": report.ratio,
                        "pass": report.passed})
        return out

    def to_json(self, report: Optional[BoundReport] = None) -> str:
        return json.dumps(self.record(report), sort_keys=True)


def farthest_point_seeds(field: SphereField, count: int, start: int = 0) -> list[int]:
    seeds = [int(start)]
    nearest = distance_from(field, start)
    while len(seeds) < min(count, field.mesh.n_vertices):
        nxt = int(np.argmax(nearest))
        seeds.append(nxt)
        nearest = np.minimum(nearest, distance_from(field, nxt))
    return seeds


def find_dividing_curve(field: SphereField, kind: VolumeKind = BH, epsilon: Optional[float] = None,
                        n_seeds: int = DEFAULT_SEEDS, n_radii: int = DEFAULT_RADII,
                        n_shorten: int = 3) -> DivisionResult:
    """Shortest curve found whose two sides both have area >= A / 4.

    Level sets of the distance from farthest-point-sampled basepoints give
    the candidates; the best few are then shortened with floor ``A / 4``.
    ``epsilon`` defaults to ``1e-3 * sqrt(A)``.
    """
    mesh = field.mesh
    total = mesh_area(field, kind)
    floor = total / 4.0
    eps = 1e-3 * math.sqrt(total) if epsilon is None else epsilon
    density = field.density(mesh.face_centroids(), kind)
    candidates = []
    for si, seed in enumerate(farthest_point_seeds(field, n_seeds)):
        d = distance_from(field, seed)
        radii = np.linspace(0.0, float(d.max()), n_radii + 2)[1:-1]
        for ri, r in enumerate(radii):
            inside = d < r
            frac = _level_frac(mesh, d, r)
            areas = labeled_areas(field, inside, frac, kind, density)
            if min(areas) < floor or not labels_divide(mesh, inside):
                continue
            candidates.append((labeled_length(field, inside, frac), si, ri, seed, float(r), inside, frac))
    if not candidates:
        raise ValueError("resolution insufficient: no level set splits the sphere into two admissible disks")
    candidates.sort(key=lambda c: c[:3])
    best = None
    for length, si, ri, seed, r, inside, frac in candidates[:n_shorten]:
        new_inside, new_frac = _shorten_labels(field, inside, frac, floor, eps, kind)
        new_len = labeled_length(field, new_inside, new_frac)
        key = (new_len, si, ri)
        if best is None or key < best[0]:
            best = (key, seed, r, new_inside, new_frac)
    (length, _, _), seed, r, inside, frac = best
    curve = boundary_cycles(mesh, inside, frac)[0]
    a_in, a_out = labeled_areas(field, inside, frac, kind, density)
    areas = (max(a_in, a_out), min(a_in, a_out))
    return DivisionResult(curve, inside, length, areas, total, kind, seed, r, len(candidates))


def division_bound(bound_id: str, area: float, c: Optional[float] = None) -> float:
    """Upper bound on the dividing-curve length for total area ``area``."""
    if bound_id == "coarea":
        return math.sqrt(6.0 * area)
    if bound_id == "pu":
        return math.sqrt(1.5 * math.pi * area)
    if bound_id == "finsler_bh":
        return 4.0 * math.sqrt(3.0 * area / math.pi)
    if bound_id == "finsler_ht":
        return math.sqrt(6.0 * math.pi * area)
    if bound_id == "finsler_c":
        if c is None or not c > 0:
            raise ValueError("finsler_c bound needs a positive constant c")
        return 2.0 * math.sqrt(3.0 * area / c)
    raise ValueError(f"unknown bound id {bound_id!r}")


def verify_division_bound(result: DivisionResult, bound_id: str, area: Optional[float] = None,
                          tolerance: float = DEFAULT_BOUND_TOLERANCE, c: Optional[float] = None) -> BoundReport:
    """Check ``length <= bound(A) * (1 + tolerance)``."""
    area = result.total_area if area is None else area
    bound = division_bound(bound_id, area, c)
    name = f"finsler_c({c:g})" if bound_id == "finsler_c" else bound_id
    meta = {"kind": str(result.kind), "total_area": area, "areas": list(result.areas),
            "n_points": len(result.curve)}
    report = BoundReport(name, result.length, bound, tolerance, "upper", [], meta)
    result.bounds.append(report)
    return report


def coarea_check(field: SphereField, basepoint: int, radius: float, n_levels: int = 200) -> dict:
    """Compare the integral of level-set lengths over ``(0, radius)`` with the disk area."""
    if not field.metric.is_riemannian:
        raise ValueError("coarea check needs a Riemannian field")
    mesh = field.mesh
    d = distance_from(field, basepoint)
    levels = np.linspace(0.0, radius, n_levels + 1)
    lengths = [0.0]
    for r in levels[1:]:
        lengths.append(labeled_length(field, d < r, _level_frac(mesh, d, r)))
    lengths = np.array(lengths)
    integral = float(np.sum(0.5 * (lengths[1:] + lengths[:-1]) * np.diff(levels)))
    area, _ = labeled_areas(field, d < radius, _level_frac(mesh, d, radius), RIEMANNIAN)
    return {"integral": integral, "area": area, "relative_error": abs(integral - area) / area,
            "levels": levels, "lengths": lengths}


def equator_probe(field: SphereField, kind: VolumeKind = BH) -> dict:
    """Length of the ``z = 0`` curve against ``sqrt(A)`` and the Pu constant."""
    mesh = field.mesh
    z = mesh.vertices[:, 2]
    inside = z < 0
    frac = _level_frac(mesh, z, 0.0)
    total = mesh_area(field, kind)
    length = labeled_length(field, inside, frac)
    ratio = length / math.sqrt(total)
    pu = math.sqrt(1.5 * math.pi)
    return {"length": length, "area": total, "ratio": ratio, "pu_constant": pu, "gap": pu - ratio}


def write_curve_csv(curve: MeshCurve, mesh: SphereMesh, path) -> None:
    """Write the curve's 3D points as ``x,y,z`` rows (closed: first point not repeated)."""
    rows = ["x,y,z"] + [",".join(f"{c:.12g}" for c in p) for p in curve.points(mesh)]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(rows) + "\n")
