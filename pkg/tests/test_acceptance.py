"""Acceptance suite: one printed PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -s -v`` to see the lines. Each
test prints its verdict before asserting, so failures are still reported.
"""
import json
import math
import time

import numpy as np
import pytest

from finsleriso.besicovitch import (
    asymmetric_ht_constant,
    besicovitch_map,
    counterexample_scan,
    shortness_violations,
    verify_asymmetric_ht_bound,
    verify_reversible_bound,
)
from finsleriso.cli import main
from finsleriso.convex import ConvexBody, Gauge, body_volume, difference_body
from finsleriso.field import GridDomain, MetricField, build_graph, random_field
from finsleriso.mesh import build_icosphere
from finsleriso.sphere import (
    assign_metric,
    coarea_check,
    division_bound,
    equator_probe,
    find_dividing_curve,
    verify_division_bound,
)
from finsleriso.volumes import BH, HT, integrate_volume

RES, K = 64, 3
N_REVERSIBLE, N_ASYM = 100, 20
SCAN_H = (2, 5, 10, 20, 50)


def report(number: int, ok: bool, detail: str) -> None:
    print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'}: {detail}")


@pytest.fixture(scope="module")
def ico5():
    return build_icosphere(5)


@pytest.fixture(scope="module")
def reversible_runs():
    """Random reversible fields with their graphs, shared by criteria 2 and 3."""
    runs = []
    start = time.perf_counter()
    for i in range(N_REVERSIBLE):
        rng = np.random.default_rng(1000 + i)
        field = random_field(rng, GridDomain.unit_cube(2, RES))
        graph = build_graph(field, K)
        runs.append((field, graph, verify_reversible_bound(field, BH, K, graph=graph)))
    return runs, time.perf_counter() - start


def test_criterion_01_flat_sharpness():
    start = time.perf_counter()
    field = MetricField(GridDomain.unit_cube(2, RES), Gauge.sup(2))
    bh = verify_reversible_bound(field, BH, K)
    ht = verify_reversible_bound(field, HT, K)
    v_bh, v_ht = integrate_volume(field, BH), integrate_volume(field, HT)
    elapsed = time.perf_counter() - start
    checks = [
        1.0 <= bh.ratio <= 1.02,
        1.0 <= ht.ratio <= 1.02,
        abs(v_bh - math.pi / 4) <= 1e-12,
        abs(v_ht - 2 / math.pi) <= 1e-12,
        elapsed < 10,
    ]
    ok = all(checks)
    report(1, ok, f"BH ratio {bh.ratio:.15g}, HT ratio {ht.ratio:.15g}, "
                  f"|v_BH - pi/4| {abs(v_bh - math.pi / 4):.2e}, |v_HT - 2/pi| {abs(v_ht - 2 / math.pi):.2e}, "
                  f"{elapsed:.2f} s")
    assert ok


def test_criterion_02_reversible_property(reversible_runs):
    runs, elapsed = reversible_runs
    ratios = np.array([rep.ratio for _, _, rep in runs])
    n_above = int(np.sum(ratios >= 1.0))
    ok = bool(np.all(ratios >= 0.97)) and n_above >= 95 and elapsed < 120
    report(2, ok, f"{len(runs)} fields, min ratio {ratios.min():.6f}, {n_above} with ratio >= 1, {elapsed:.1f} s")
    assert ok


def test_criterion_03_shortness(reversible_runs):
    runs, _ = reversible_runs
    extra = [MetricField(GridDomain.unit_cube(2, RES), g) for g in (Gauge.sup(2), Gauge.euclidean(2))]
    extra.append(random_field(np.random.default_rng(7), GridDomain.unit_cube(3, 12)))
    fields = [(f, g) for f, g, _ in runs] + [(f, build_graph(f, K)) for f in extra]
    total, worst = 0, -math.inf
    for field, graph in fields:
        count, excess = shortness_violations(besicovitch_map(field, K, graph), graph, tol=1e-12)
        total += count
        worst = max(worst, excess)
    ok = total == 0
    report(3, ok, f"{len(fields)} fields, {total} violations at 1e-12, worst excess {worst:.2e}")
    assert ok


def test_criterion_04_rogers_shepard():
    rng = np.random.default_rng(4)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(20):
        while True:
            pts = rng.uniform(-1, 1, (3, 2))
            (ax, ay), (bx, by) = pts[1] - pts[0], pts[2] - pts[0]
            if abs(ax * by - ay * bx) > 1e-2:
                break
        tri = ConvexBody.polytope(pts - pts.mean(axis=0))
        worst = max(worst, abs(body_volume(difference_body(tri)) / (6 * body_volume(tri)) - 1))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 1
    report(4, ok, f"20 triangles, worst relative error {worst:.2e}, {elapsed:.3f} s")
    assert ok


def test_criterion_05_asymmetric_ht():
    constant = asymmetric_ht_constant(2)
    const_err = abs(constant - 1 / (3 * math.pi))
    ratios = []
    for i in range(N_ASYM):
        rng = np.random.default_rng(5000 + i)
        field = random_field(rng, GridDomain.unit_cube(2, RES), reversible=False)
        ratios.append(verify_asymmetric_ht_bound(field, K).ratio)
    ok = const_err <= 1e-12 and min(ratios) >= 0.97
    report(5, ok, f"constant error {const_err:.1e}, {N_ASYM} fields, min ratio {min(ratios):.6f}")
    assert ok


def test_criterion_06_counterexample_scan():
    start = time.perf_counter()
    scan = counterexample_scan(SCAN_H, k=K, resolution=RES, threads=4)
    elapsed = time.perf_counter() - start
    v_err = max(abs(r["v_bh"] - 3 * math.pi / (2 * r["h"] ** 2)) for r in scan.rows)
    gaps = [r["oracle_gap"] for r in scan.rows]
    checks = {
        "v_BH": v_err <= 1e-9,
        "graph/oracle 1%": max(gaps) <= 0.01,
        "verdict": scan.verdict in ("->0", "bounded", "inconclusive"),
        "runtime": elapsed < 60,
    }
    ok = all(checks.values())
    failed = [name for name, good in checks.items() if not good]
    report(6, ok, f"v_BH error {v_err:.1e}, graph/oracle gaps "
                  + "/".join(f"{100 * g:.1f}%" for g in gaps)
                  + ", ratios " + "/".join(f"{r['ratio']:.4f}" for r in scan.rows)
                  + f", verdict '{scan.verdict}' (slope {scan.slope:.3f}), {elapsed:.1f} s"
                  + (f"; failing: {', '.join(failed)}" if failed else ""))
    assert ok


def test_criterion_07_round_sphere(ico5):
    start = time.perf_counter()
    field = assign_metric(ico5, "round")
    result = find_dividing_curve(field, BH)
    reports = [verify_division_bound(result, b, tolerance=0.02) for b in ("coarea", "pu")]
    probe = equator_probe(field, BH)
    elapsed = time.perf_counter() - start
    checks = [
        min(result.areas) >= 3.11,
        result.length <= 2 * math.pi * 1.02,
        all(r.passed for r in reports),
        math.isfinite(probe["ratio"]),
        elapsed < 60,
    ]
    ok = all(checks)
    report(7, ok, f"length {result.length:.4f}, areas {result.areas[0]:.4f}/{result.areas[1]:.4f}, "
                  + ", ".join(f"{r.inequality} bound {r.bound:.4f}" for r in reports)
                  + f", equator ratio {probe['ratio']:.4f} (sqrt(pi) = {math.sqrt(math.pi):.4f}), {elapsed:.1f} s")
    assert ok


def test_criterion_08_finsler_sphere(ico5):
    start = time.perf_counter()
    field = assign_metric(ico5, "sup_like")
    lines, ok = [], True
    for kind, bound_id in ((BH, "finsler_bh"), (HT, "finsler_ht")):
        result = find_dividing_curve(field, kind)
        for bid in (bound_id, "pu"):
            rep = verify_division_bound(result, bid, tolerance=0.02)
            ok &= rep.passed
            lines.append(f"{kind}/{bid} {rep.measured:.4f} <= {rep.bound:.4f}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 120
    report(8, ok, ", ".join(lines) + f", {elapsed:.1f} s")
    assert ok


def test_criterion_09_coarea(ico5):
    field = assign_metric(ico5, "round")
    north = int(np.argmax(ico5.vertices[:, 2]))
    check = coarea_check(field, north, math.pi / 2)
    ok = check["relative_error"] <= 0.03
    report(9, ok, f"integral {check['integral']:.5f}, area {check['area']:.5f}, "
                  f"relative error {100 * check['relative_error']:.2f}%")
    assert ok


def test_criterion_10_determinism(tmp_path):
    scenarios = {
        "besicovitch.json": {"task": "besicovitch", "metric": "random", "count": 5, "resolution": 32, "seed": 9},
        "asym.json": {"task": "asym", "count": 3, "resolution": 32, "seed": 2},
        "scan.json": {"task": "counterexample", "h": list(SCAN_H), "resolution": 32},
        "sphere.json": {"task": "sphere", "subdivisions": 4, "metric": "sup_like", "kind": "HT", "seed": 1},
        "coarea.json": {"task": "coarea", "subdivisions": 4},
    }
    codes = []
    for name, sc in scenarios.items():
        path = tmp_path / name
        path.write_text(json.dumps(sc))
        for run in ("one", "two"):
            codes.append(main(["run", str(path), "--out", str(tmp_path / run)]))
    files = sorted(p.name for p in (tmp_path / "one").iterdir())
    differing = [f for f in files if (tmp_path / "one" / f).read_bytes() != (tmp_path / "two" / f).read_bytes()]
    ok = not differing and len(files) >= 3 * len(scenarios) and all(c in (0, 1) for c in codes)
    report(10, ok, f"{len(scenarios)} scenarios run twice, {len(files)} files compared, {len(differing)} differ")
    assert ok
