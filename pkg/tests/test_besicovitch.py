"""Besicovitch map and parallelotope volume bounds."""
import math

import numpy as np
import pytest

from finsleriso.besicovitch import (
    SCAN_COLUMNS,
    BoundReport,
    asymmetric_ht_constant,
    besicovitch_map,
    counterexample_family,
    counterexample_scan,
    shortness_violations,
    surjectivity_check,
    trend_verdict,
    verify_asymmetric_ht_bound,
    verify_flat_min_bounds,
    verify_reversible_bound,
)
from finsleriso.convex import ConvexBody, Gauge, GeometryError, body_volume
from finsleriso.field import GridDomain, MetricField, build_graph, random_field
from finsleriso.volumes import BH, HT, RIEMANNIAN, VolumeKind, bh_density


def field_of(gauge, res=64):
    return MetricField(GridDomain.unit_cube(gauge.dim, res), gauge)


def test_report_orientation():
    low = BoundReport("x", measured=0.98, bound=1.0, tolerance=0.03)
    assert low.ratio == pytest.approx(0.98) and low.passed
    assert not BoundReport("x", 0.96, 1.0, 0.03).passed
    up = BoundReport("y", measured=5.0, bound=10.0, tolerance=0.02, sense="upper")
    assert up.ratio == 2.0 and up.passed
    assert not BoundReport("y", 10.3, 10.0, 0.02, sense="upper").passed
    d = low.to_dict()
    assert d["ratio"] == low.ratio and d["pass"] is True


# -- Besicovitch map -----------------------------------------------------------

def test_map_center_of_euclidean_square():
    f = field_of(Gauge.euclidean(2))
    fmap = besicovitch_map(f)
    center = f.domain.flat_index([32, 32])
    assert fmap[center] == pytest.approx([0.5, 0.5], rel=0.02)


def test_map_vanishes_on_source_faces(rng):
    f = random_field(rng, GridDomain.unit_cube(2, 24))
    fmap = besicovitch_map(f)
    for i in range(2):
        assert np.all(fmap[f.domain.face(i, 0), i] == 0.0)


def test_map_reaches_face_distance_on_far_face(rng):
    f = random_field(rng, GridDomain.unit_cube(2, 24))
    fmap = besicovitch_map(f)
    rep = verify_reversible_bound(f)
    for i, d in enumerate(rep.d_values):
        assert np.all(fmap[f.domain.face(i, 1), i] >= d - 1e-9)


def test_sup_map_is_identity():
    f = field_of(Gauge.sup(2))
    fmap = besicovitch_map(f)
    assert np.max(np.abs(fmap - f.domain.node_coords())) <= 1e-12


def test_map_rejects_asymmetric(rng):
    f = random_field(rng, GridDomain.unit_cube(2, 8), reversible=False)
    with pytest.raises(GeometryError):
        besicovitch_map(f)


@pytest.mark.parametrize("seed", range(5))
def test_shortness_and_surjectivity(seed):
    rng = np.random.default_rng(seed)
    f = random_field(rng, GridDomain.unit_cube(2, 32))
    graph = build_graph(f, 3)
    fmap = besicovitch_map(f, 3, graph)
    count, excess = shortness_violations(fmap, graph)
    assert count == 0 and excess <= 1e-12
    d = [min(p) for p in verify_reversible_bound(f, graph=graph).metadata["face_pairs"]]
    check = surjectivity_check(fmap, d, graph, rng, n_samples=1000)
    assert check["covered"] == check["n_samples"]


def test_shortness_in_three_dimensions(rng):
    f = random_field(rng, GridDomain.unit_cube(3, 10))
    graph = build_graph(f, 2)
    count, _ = shortness_violations(besicovitch_map(f, 2, graph), graph)
    assert count == 0


# -- reversible bound -----------------------------------------------------------

def test_sup_field_is_sharp():
    for kind in (BH, HT):
        rep = verify_reversible_bound(field_of(Gauge.sup(2)), kind)
        assert 1.0 <= rep.ratio <= 1.02


def test_euclidean_field_ratio():
    rep = verify_reversible_bound(field_of(Gauge.euclidean(2)), BH)
    assert rep.measured == pytest.approx(1.0, rel=1e-12)
    assert rep.ratio == pytest.approx(4 / math.pi, rel=0.01)


def test_riemannian_classical_bound():
    g = Gauge(ConvexBody.ellipsoid([[2.0, 0.0], [0.0, 0.5]]))
    rep = verify_reversible_bound(field_of(g), RIEMANNIAN)
    # v = 1/sqrt(det M) = 1, d = (sqrt 2, sqrt 0.5)
    assert rep.bound == pytest.approx(1.0, rel=0.01)
    assert rep.passed


def test_custom_kind_bound(rng):
    f = random_field(rng, GridDomain.unit_cube(2, 32))
    kind = VolumeKind("Custom", 0.7)
    rep = verify_reversible_bound(f, kind)
    assert rep.metadata["cube_density"] == 0.7
    assert rep.ratio >= 0.97


@pytest.mark.parametrize("seed", range(6))
def test_random_fields_satisfy_bound(seed):
    rng = np.random.default_rng(100 + seed)
    dim = 3 if seed == 5 else 2
    res = 12 if dim == 3 else 48
    f = random_field(rng, GridDomain.unit_cube(dim, res))
    rep = verify_reversible_bound(f, HT if seed % 2 else BH)
    assert rep.ratio >= 1.0 - 0.03


# -- asymmetric bound -------------------------------------------------------------

def test_asymmetric_constant():
    assert asymmetric_ht_constant(2) == pytest.approx(1 / (3 * math.pi), rel=1e-15)
    assert asymmetric_ht_constant(1) == pytest.approx(0.5, rel=1e-15)


def test_asymmetric_bound_on_sup_field():
    rep = verify_asymmetric_ht_bound(field_of(Gauge.sup(2)))
    assert rep.bound == pytest.approx(4 / (3 * math.pi), rel=0.01)
    assert rep.measured == pytest.approx(2 / math.pi, rel=1e-12)
    assert rep.passed


def test_asymmetric_bound_on_triangle_field():
    rep = verify_asymmetric_ht_bound(field_of(counterexample_family(10.0)))
    assert rep.passed and rep.ratio > 1


@pytest.mark.parametrize("seed", range(4))
def test_asymmetric_random_fields(seed):
    rng = np.random.default_rng(seed)
    rep = verify_asymmetric_ht_bound(random_field(rng, GridDomain.unit_cube(2, 48), reversible=False))
    assert rep.ratio >= 0.97


# -- flat min-distance bounds -------------------------------------------------------

def test_flat_sup_equality():
    bh, ht = verify_flat_min_bounds(Gauge.sup(2))
    assert bh.measured == pytest.approx(math.pi / 4, rel=1e-12)
    assert bh.ratio == pytest.approx(1.0, abs=1e-9)
    assert ht.ratio == pytest.approx(1.0, abs=1e-9)


def test_flat_euclidean():
    bh, ht = verify_flat_min_bounds(Gauge.euclidean(2))
    assert bh.bound == pytest.approx(math.pi / 4, rel=1e-9)
    assert bh.measured == pytest.approx(1.0) and bh.passed and ht.passed


@pytest.mark.parametrize("h", [2.0, 10.0, 50.0])
def test_flat_triangle(h):
    bh, ht = verify_flat_min_bounds(counterexample_family(h))
    assert bh.d_values[0] == pytest.approx(1 / h, rel=1e-9)
    assert bh.passed and ht.passed


def test_flat_bounds_in_three_dimensions():
    g = Gauge.from_vertices(np.vstack([np.eye(3), -0.5 * np.eye(3), [[0.4, 0.4, 0.4]]]))
    bh, ht = verify_flat_min_bounds(g)
    assert bh.passed and ht.passed


# -- counterexample family -------------------------------------------------------------

def test_family_vertices_and_area():
    g = counterexample_family(3.0)
    expected = {(-0.5, 0.0), (1.5, 3.0), (1.5, -3.0)}
    assert {tuple(np.round(v, 12) + 0.0) for v in g.body.vertices} == expected
    assert body_volume(g.body) == pytest.approx(6.0, rel=1e-12)
    assert bh_density(g) == pytest.approx(3 * math.pi / 18, rel=1e-12)


def test_family_domain():
    with pytest.raises(GeometryError):
        counterexample_family(1.5)


def test_family_diagonal_gets_cheap():
    values = [counterexample_family(h)(np.array([1.0, 1.0])) for h in (10, 100, 1000)]
    assert values[0] > values[1] > values[2]
    assert values[2] < 2e-3


def test_scan_table():
    scan = counterexample_scan([5, 2], k=3, resolution=32)
    assert [r["h"] for r in scan.rows] == [2.0, 5.0]
    row = scan.rows[0]
    assert row["v_bh"] == pytest.approx(3 * math.pi / 8, rel=1e-12)
    assert row["d2_min"] == pytest.approx(0.5, rel=1e-9)
    assert row["d1_fwd"] == pytest.approx(6 / 5, rel=1e-9)
    assert len(scan.csv_rows()[0]) == len(SCAN_COLUMNS)
    assert scan.verdict in ("->0", "bounded", "inconclusive")


def test_scan_is_thread_independent():
    a = counterexample_scan([2, 5, 10], resolution=24, threads=1)
    b = counterexample_scan([2, 5, 10], resolution=24, threads=3)
    assert a.csv_rows() == b.csv_rows()


def test_trend_verdicts():
    hs = np.array([2.0, 5.0, 10.0, 20.0])
    assert trend_verdict(hs, 1 / hs)[1] == "->0"
    assert trend_verdict(hs, np.full(4, 3.0))[1] == "bounded"
    assert trend_verdict(hs, hs**-0.3)[1] == "inconclusive"
