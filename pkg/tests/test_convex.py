"""Convex bodies, gauges, duality and difference bodies."""
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from finsleriso.convex import (
    ConvexBody,
    Gauge,
    GeometryError,
    body_volume,
    difference_body,
    gauge_eval,
    hausdorff_distance,
    polar_dual,
    support_function,
    symmetrize_gauge,
)
from finsleriso.field import random_polytope_gauge

from conftest import triangle_vertices


def ray_gauge_2d(vertices, v):
    """Oracle: intersect the ray ``t v`` with every edge of a CCW polygon."""
    v = np.asarray(v, float)
    best = math.inf
    n = len(vertices)
    for i in range(n):
        p, q = vertices[i], vertices[(i + 1) % n]
        # solve t v = p + s (q - p)
        m = np.column_stack([v, p - q])
        if abs(np.linalg.det(m)) < 1e-15:
            continue
        t, s = np.linalg.solve(m, p)
        if t > 0 and -1e-12 <= s <= 1 + 1e-12:
            best = min(best, 1.0 / t)
    return best


def shoelace(vertices):
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * abs(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def seeds():
    return st.integers(min_value=0, max_value=2**32 - 1)


# -- gauge_eval ------------------------------------------------------------

def test_sup_ball_corner():
    assert gauge_eval(Gauge.sup(2), [1.0, 1.0]) == 1.0


def test_euclidean_three_four_five():
    assert gauge_eval(Gauge.euclidean(2), [3.0, 4.0]) == pytest.approx(5.0, abs=1e-14)


@pytest.mark.parametrize("h", [2.0, 3.0, 10.0])
def test_triangle_vertical_gauge_matches_ray_oracle(h):
    verts = triangle_vertices(h)
    g = Gauge.from_vertices(verts)
    assert gauge_eval(g, [0.0, 1.0]) == pytest.approx(ray_gauge_2d(verts, [0.0, 1.0]), abs=1e-12)
    assert gauge_eval(g, [0.0, 1.0]) == pytest.approx(4 / 3, abs=1e-12)


def test_gauge_dimension_mismatch():
    with pytest.raises(GeometryError):
        gauge_eval(Gauge.sup(2), [1.0, 2.0, 3.0])


def test_origin_outside_rejected():
    with pytest.raises(GeometryError):
        ConvexBody.polytope([[1.0, 0.0], [2.0, 1.0], [2.0, -1.0]])


def test_vertex_list_is_extreme_set():
    pts = [[1, 1], [-1, 1], [-1, -1], [1, -1], [0, 0.5], [1, 1], [0.3, -0.2]]
    b = ConvexBody.polytope(pts)
    assert len(b.vertices) == 4
    assert b.symmetric


@given(seeds(), st.booleans())
def test_gauge_matches_ray_oracle(seed, symmetric):
    rng = np.random.default_rng(seed)
    g = random_polytope_gauge(rng, 2, symmetric=symmetric)
    for v in rng.normal(size=(5, 2)):
        assert gauge_eval(g, v) == pytest.approx(ray_gauge_2d(g.body.vertices, v), rel=1e-10)


@given(seeds(), st.integers(1, 3), st.booleans())
def test_homogeneity_and_subadditivity(seed, dim, symmetric):
    rng = np.random.default_rng(seed)
    g = random_polytope_gauge(rng, dim, symmetric=symmetric)
    u, v = rng.normal(size=(2, dim))
    t = rng.uniform(0, 10)
    assert gauge_eval(g, t * u) == pytest.approx(t * gauge_eval(g, u), rel=1e-12, abs=1e-12)
    assert gauge_eval(g, u + v) <= gauge_eval(g, u) + gauge_eval(g, v) + 1e-12
    assert gauge_eval(g, np.zeros(dim)) == 0.0
    assert gauge_eval(g, u) > 0


@given(seeds())
def test_reversible_flag_matches_symmetry(seed):
    rng = np.random.default_rng(seed)
    g = random_polytope_gauge(rng, 2, symmetric=True)
    assert g.reversible
    v = rng.normal(size=(100, 2))
    assert np.allclose(g(v), g(-v), rtol=1e-12, atol=1e-12)


# -- body_volume -------------------------------------------------------------

def test_cube_volume():
    assert body_volume(ConvexBody.sup_ball(3)) == 8.0
    corners = np.array(np.meshgrid([-1, 1], [-1, 1], [-1, 1])).reshape(3, -1).T
    assert body_volume(ConvexBody.polytope(corners)) == pytest.approx(8.0, rel=1e-12)


def test_triangle_area():
    b = ConvexBody.polytope(triangle_vertices(3.0))
    assert body_volume(b) == pytest.approx(6.0, rel=1e-12)
    assert body_volume(b) == pytest.approx(shoelace(triangle_vertices(3.0)), rel=1e-12)


def test_cross_polytope_area():
    assert body_volume(ConvexBody.cross_polytope(2)) == pytest.approx(2.0, rel=1e-12)


def test_flat_body_rejected():
    with pytest.raises(GeometryError):
        ConvexBody.polytope([[-1.0, 0.0], [1.0, 0.0], [0.0, 0.0]])


@given(seeds())
def test_polygon_volume_matches_monte_carlo(seed):
    rng = np.random.default_rng(seed)
    g = random_polytope_gauge(rng, 2, symmetric=False)
    lo, hi = g.body.vertices.min(axis=0), g.body.vertices.max(axis=0)
    pts = rng.uniform(lo, hi, size=(40000, 2))
    frac = np.mean(g(pts) <= 1.0)
    box = np.prod(hi - lo)
    # 6 sigma of a binomial proportion
    sigma = math.sqrt(frac * (1 - frac) / len(pts)) * box
    assert abs(frac * box - body_volume(g.body)) <= 6 * sigma + 1e-9


# -- polar_dual --------------------------------------------------------------

def test_cube_dual_is_cross_polytope():
    dual = polar_dual(ConvexBody.sup_ball(2).as_polytope())
    expected = {(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)}
    assert {tuple(np.round(v, 12) + 0.0) for v in dual.vertices} == expected


def test_ball_self_dual():
    d = polar_dual(ConvexBody.euclidean_ball(2))
    assert d.kind == "euclidean" and d.radius == 1.0


def test_triangle_dual_by_halfspace_oracle():
    verts = triangle_vertices(3.0)
    dual = polar_dual(ConvexBody.polytope(verts))
    assert len(dual.vertices) == 3
    # each dual vertex u is the facet normal of an edge: <u, w> = 1 on both endpoints
    for u in dual.vertices:
        dots = verts @ u
        assert np.max(dots) == pytest.approx(1.0, abs=1e-12)
        assert np.sum(np.isclose(dots, 1.0, atol=1e-12)) == 2


@given(seeds(), st.integers(2, 3))
def test_double_polar_is_identity(seed, dim):
    rng = np.random.default_rng(seed)
    b = random_polytope_gauge(rng, dim, symmetric=False).body
    bb = polar_dual(polar_dual(b))
    assert hausdorff_distance(b, bb) <= 1e-9


@given(seeds(), st.booleans())
def test_dual_gauge_is_support_function(seed, symmetric):
    rng = np.random.default_rng(seed)
    b = random_polytope_gauge(rng, 2, symmetric=symmetric).body
    dual = Gauge(polar_dual(b))
    for v in rng.normal(size=(20, 2)):
        assert dual(v) == pytest.approx(support_function(b, v), rel=1e-9, abs=1e-12)


# -- difference_body ---------------------------------------------------------

def test_one_dimensional_difference_body():
    b = ConvexBody.polytope([[-0.5], [1.0]])
    d = difference_body(b)
    assert d.vertices[:, 0].tolist() == pytest.approx([-1.5, 1.5], abs=1e-15)


def test_symmetric_body_doubles():
    b = ConvexBody.polytope([[1, 0], [0, 2], [-1, 0], [0, -2]])
    assert hausdorff_distance(difference_body(b), b.scaled(2.0)) <= 1e-12


def test_rogers_shepard_triangle():
    rng = np.random.default_rng(5)
    for _ in range(20):
        pts = rng.normal(size=(3, 2))
        pts -= pts.mean(axis=0)
        t = ConvexBody.polytope(pts)
        d = difference_body(t)
        assert len(d.vertices) == 6
        assert body_volume(d) / body_volume(t) == pytest.approx(6.0, rel=1e-9)


@given(seeds(), st.integers(2, 3))
def test_rogers_shepard_inequality(seed, dim):
    rng = np.random.default_rng(seed)
    b = random_polytope_gauge(rng, dim, symmetric=False).body
    ratio = body_volume(difference_body(b)) / body_volume(b)
    assert ratio <= math.comb(2 * dim, dim) + 1e-9
    assert ratio >= 2**dim - 1e-9  # Brunn-Minkowski lower bound


def test_tetrahedron_rogers_shepard_equality():
    pts = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], float)
    t = ConvexBody.polytope(pts)
    assert body_volume(difference_body(t)) / body_volume(t) == pytest.approx(20.0, rel=1e-9)


# -- symmetrize_gauge --------------------------------------------------------

def test_symmetrize_reversible_halves_ball():
    g = Gauge.from_vertices([[1, 0.5], [-1, 0.5], [-1, -0.5], [1, -0.5]])
    psi = symmetrize_gauge(g)
    v = np.array([0.3, -0.7])
    assert psi(v) == pytest.approx(2 * g(v), rel=1e-12)


def test_symmetrize_interval():
    psi = symmetrize_gauge(Gauge.from_vertices([[-0.5], [1.0]]))
    assert psi(np.array([1.0])) == pytest.approx(3.0, rel=1e-12)
    assert psi(np.array([-2.0])) == pytest.approx(6.0, rel=1e-12)
    assert sorted(psi.body.vertices[:, 0]) == pytest.approx([-1 / 3, 1 / 3], rel=1e-12)


@given(seeds())
def test_symmetrized_gauge_pointwise(seed):
    rng = np.random.default_rng(seed)
    g = random_polytope_gauge(rng, 2, symmetric=False)
    psi = symmetrize_gauge(g)
    assert psi.reversible
    v = rng.normal(size=(50, 2))
    assert np.allclose(psi(v), g(v) + g(-v), rtol=1e-9)
    assert np.all(psi(v) >= g(v) - 1e-12)


@given(seeds())
def test_dual_symmetrization_identity(seed):
    rng = np.random.default_rng(seed)
    g = random_polytope_gauge(rng, 2, symmetric=False)
    lhs = polar_dual(symmetrize_gauge(g).body)
    rhs = difference_body(polar_dual(g.body))
    assert hausdorff_distance(lhs, rhs) <= 1e-8


# -- support_function --------------------------------------------------------

def test_support_examples():
    assert support_function(ConvexBody.sup_ball(2), [1.0, 0.0]) == 1.0
    assert support_function(ConvexBody.cross_polytope(2), [1.0, 1.0]) == pytest.approx(1.0)
    assert support_function(ConvexBody.polytope(triangle_vertices(3.0)), [0.0, 1.0]) == pytest.approx(3.0)


def test_support_zero_direction():
    with pytest.raises(GeometryError):
        support_function(ConvexBody.sup_ball(2), [0.0, 0.0])


def test_closed_form_support_agrees_with_polytope():
    e = ConvexBody.ellipsoid([[2.0, 0.3], [0.3, 0.5]])
    p = e.as_polytope(2048)
    for d in np.random.default_rng(1).normal(size=(10, 2)):
        assert support_function(p, d) == pytest.approx(support_function(e, d), rel=2e-5)
