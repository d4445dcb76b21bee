"""Besicovitch-type volume bounds on Finsler parallelotopes.

The distance map ``x -> (d(F_i, x))_i`` is 1-Lipschitz into the sup norm for
reversible metrics and covers the box of opposite-face distances, so any
monotone Finsler volume of the parallelotope dominates the volume of that
box under the flat sup norm. The verifiers below measure both sides on a
discretized field and report the ratio.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .convex import Gauge, GeometryError
from .field import (
    DEFAULT_STENCIL,
    GridDomain,
    MetricField,
    build_graph,
    distance_field,
    face_distances,
    segment_oracle_distance,
)
from .volumes import BH, HT, VolumeKind, ball_volume_bn, cube_density, gauge_density, integrate_volume

__all__ = [
    "BoundReport",
    "besicovitch_map",
    "shortness_violations",
    "surjectivity_check",
    "verify_reversible_bound",
    "verify_asymmetric_ht_bound",
    "asymmetric_ht_constant",
    "verify_flat_min_bounds",
    "counterexample_family",
    "counterexample_scan",
    "ScanResult",
    "SCAN_COLUMNS",
]

DEFAULT_TOLERANCE = 0.03
SCAN_COLUMNS = ("h", "v_bh", "d1_fwd", "d1_bwd", "d2_fwd", "d2_bwd", "d1_min", "d2_min", "ratio", "oracle_gap")


@dataclass
class BoundReport:
    """One checked instance of an inequality.

    ``ratio`` is oriented so that values >= 1 mean the inequality holds:
    ``measured / bound`` for lower bounds on volume and ``bound / measured``
    for upper bounds on length.
    """

    inequality: str
    measured: float
    bound: float
    tolerance: float
    sense: str = "lower"
    d_values: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        if self.sense == "lower":
            return self.measured / self.bound
        return self.bound / self.measured

    @property
    def passed(self) -> bool:
        if self.sense == "lower":
            return self.ratio >= 1.0 - self.tolerance
        return self.measured <= self.bound * (1.0 + self.tolerance)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["ratio"] = self.ratio
        out["pass"] = self.passed
        return out


def besicovitch_map(field: MetricField, k: int = DEFAULT_STENCIL, graph=None) -> np.ndarray:
    """Per node, the vector of graph distances from each face ``F_i``."""
    if not field.reversible:
        raise GeometryError("the Besicovitch map needs a reversible field")
    graph = build_graph(field, k) if graph is None else graph
    dom = field.domain
    cols = [distance_field(graph, dom.face(i, 0)).distance for i in range(dom.dim)]
    return np.stack(cols, axis=1)


def shortness_violations(fmap: np.ndarray, graph, tol: float = 1e-12) -> tuple[int, float]:
    """Count edges with ``max_i |f(u)_i - f(v)_i| > cost(u -> v) + tol``."""
    jump = np.max(np.abs(fmap[graph.src] - fmap[graph.dst]), axis=1)
    excess = jump - graph.cost
    return int(np.sum(excess > tol)), float(np.max(excess))


def surjectivity_check(fmap: np.ndarray, d_values: Sequence[float], graph, rng: np.random.Generator,
                       n_samples: int = 1000, shrink: float = 0.95) -> dict:
    """Spot-check that the map image covers ``prod (0, shrink * d_i)``.

    A target counts as covered when some node image lies within twice the
    mesh bound (largest sup-norm jump of ``f`` across a unit-offset edge).
    """
    dom = graph.domain
    offset = dom.node_indices()[graph.dst] - dom.node_indices()[graph.src]
    unit = np.max(np.abs(offset), axis=1) == 1
    mesh_bound = float(np.max(np.abs(fmap[graph.src[unit]] - fmap[graph.dst[unit]])))
    targets = rng.uniform(0, 1, (n_samples, fmap.shape[1])) * (shrink * np.asarray(d_values))
    gap, _ = cKDTree(fmap).query(targets, p=np.inf)
    return {
        "n_samples": n_samples,
        "mesh_bound": mesh_bound,
        "max_gap": float(np.max(gap)),
        "covered": int(np.sum(gap <= 2 * mesh_bound)),
    }


def _metadata(field: MetricField, k: int, kind: Optional[VolumeKind] = None) -> dict:
    meta = {"field": field.name, "dim": field.dim, "resolution": list(field.domain.resolution), "k": k}
    if kind is not None:
        meta["kind"] = str(kind)
    return meta


def verify_reversible_bound(field: MetricField, kind: VolumeKind = BH, k: int = DEFAULT_STENCIL,
                            tolerance: float = DEFAULT_TOLERANCE, graph=None) -> BoundReport:
    """``v(P) >= cube_density * prod d_i`` for a reversible field.

    With the Riemannian kind the field must be ellipsoidal and the classical
    bound ``prod d_i`` is used.
    """
    if not field.reversible:
        raise GeometryError("reversible bound needs a reversible field")
    volume = integrate_volume(field, kind)
    pairs = face_distances(field, k, graph)
    d = [min(fwd, bwd) for fwd, bwd in pairs]
    constant = 1.0 if kind.tag == "Riemannian" else cube_density(kind, field.dim)
    bound = constant * math.prod(d)
    return BoundReport(f"besicovitch[{kind}]", volume, bound, tolerance, "lower", d,
                       {**_metadata(field, k, kind), "cube_density": constant, "face_pairs": pairs})


def asymmetric_ht_constant(n: int) -> float:
    """``n! / (2n)! * 2^n / b_n``."""
    return math.factorial(n) / math.factorial(2 * n) * 2.0**n / ball_volume_bn(n)


def verify_asymmetric_ht_bound(field: MetricField, k: int = DEFAULT_STENCIL,
                               tolerance: float = DEFAULT_TOLERANCE, graph=None) -> BoundReport:
    """Holmes-Thompson bound with symmetrized face distances ``d(F,G) + d(G,F)``."""
    volume = integrate_volume(field, HT)
    pairs = face_distances(field, k, graph)
    sums = [fwd + bwd for fwd, bwd in pairs]
    constant = asymmetric_ht_constant(field.dim)
    return BoundReport("asymmetric_ht", volume, constant * math.prod(sums), tolerance, "lower", sums,
                       {**_metadata(field, k), "constant": constant, "face_pairs": pairs})


def _oracle_pairs(gauge: Gauge, domain: GridDomain) -> list[tuple[float, float]]:
    return [
        (segment_oracle_distance(gauge, domain, (i, 0), (i, 1)),
         segment_oracle_distance(gauge, domain, (i, 1), (i, 0)))
        for i in range(domain.dim)
    ]


def verify_flat_min_bounds(gauge: Gauge, n: Optional[int] = None, tolerance: float = 1e-9) -> tuple[BoundReport, BoundReport]:
    """Flat-metric bounds on the unit cube in terms of ``min_i d_i``.

    ``d_i`` is the smaller of the two one-way distances between ``F_i`` and
    ``G_i``, computed exactly by the segment oracle.
    """
    n = gauge.dim if n is None else n
    if n != gauge.dim:
        raise GeometryError("dimension mismatch")
    domain = GridDomain.unit_cube(n, 1)
    pairs = _oracle_pairs(gauge, domain)
    d = min(min(p) for p in pairs)
    meta = {"dim": n, "face_pairs": pairs, "d_min": d}
    bh = BoundReport("flat_min[BH]", gauge_density(gauge, BH), cube_density(BH, n) * d**n, tolerance, "lower", [d], meta)
    ht = BoundReport("flat_min[HT]", gauge_density(gauge, HT), cube_density(HT, n) * d**n, tolerance, "lower", [d], dict(meta))
    return bh, ht


def counterexample_family(h: float) -> Gauge:
    """Triangle ball with vertices ``a = (-1/2, 0)``, ``a + h (2/3, +-1)``."""
    if not h > 1.5:
        raise GeometryError("counterexample family needs h > 3/2")
    a = np.array([-0.5, 0.0])
    b = a + h * np.array([2.0 / 3.0, 1.0])
    c = a + h * np.array([2.0 / 3.0, -1.0])
    return Gauge.from_vertices([a, b, c])


@dataclass
class ScanResult:
    rows: list[dict]
    slope: float
    verdict: str

    def csv_rows(self) -> list[list[float]]:
        return [[row[c] for c in SCAN_COLUMNS] for row in self.rows]


def _scan_row(h: float, resolution: int, k: int) -> dict:
    gauge = counterexample_family(h)
    domain = GridDomain.unit_cube(2, resolution)
    field = MetricField(domain, gauge, name=f"triangle-h{h:g}")
    oracle = _oracle_pairs(gauge, domain)
    graph = face_distances(field, k)
    gaps = [abs(g - o) / o for gp, op in zip(graph, oracle) for g, o in zip(gp, op)]
    d1, d2 = min(oracle[0]), min(oracle[1])
    v = integrate_volume(field, BH)
    return {
        "h": float(h),
        "v_bh": v,
        "d1_fwd": oracle[0][0],
        "d1_bwd": oracle[0][1],
        "d2_fwd": oracle[1][0],
        "d2_bwd": oracle[1][1],
        "d1_min": d1,
        "d2_min": d2,
        "ratio": v / (d1 * d2),
        "oracle_gap": max(gaps),
        "graph_pairs": graph,
    }


def trend_verdict(hs: Sequence[float], ratios: Sequence[float]) -> tuple[float, str]:
    """Log-log slope of ``ratio`` against ``h`` and its reading."""
    if len(hs) < 2:
        return math.nan, "inconclusive"
    slope = float(np.polyfit(np.log(hs), np.log(ratios), 1)[0])
    if slope <= -0.5:
        return slope, "->0"
    if slope >= -0.1:
        return slope, "bounded"
    return slope, "inconclusive"


def counterexample_scan(hs: Sequence[float], k: int = DEFAULT_STENCIL, resolution: int = 64,
                        threads: int = 1) -> ScanResult:
    """Tabulate ``v_BH / (d_1 d_2)`` for the triangle-ball family.

    Distances in the table come from the segment oracle; ``oracle_gap`` is
    the worst relative disagreement of the graph distances with it.
    """
    hs = sorted(float(h) for h in hs)
    for h in hs:
        counterexample_family(h)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        rows = list(pool.map(lambda h: _scan_row(h, resolution, k), hs))
    slope, verdict = trend_verdict(hs, [r["ratio"] for r in rows])
    return ScanResult(rows, slope, verdict)
