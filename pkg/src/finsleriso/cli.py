"""Batch front end: ``finsleriso run <scenario.json>``.

A scenario is a JSON object with a ``task`` key and task-specific options
(see ``TASK_KEYS``). Unknown keys are rejected. Reports are written next to
the scenario (or into ``--out``) as ``<stem>.report.json``,
``<stem>.table.csv`` and ``<stem>.plot.csv``.

Exit codes: 0 when every check passes, 1 when an inequality check fails
beyond tolerance, 2 for input or configuration errors.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import __version__
from .besicovitch import (
    BoundReport,
    besicovitch_map,
    counterexample_scan,
    shortness_violations,
    verify_asymmetric_ht_bound,
    verify_flat_min_bounds,
    verify_reversible_bound,
)
from .convex import ConvexBody, Gauge, GeometryError
from .field import GridDomain, MetricField, build_graph, random_field
from .mesh import MeshError, build_icosphere, read_off
from .sphere import (
    assign_metric,
    coarea_check,
    equator_probe,
    find_dividing_curve,
    verify_division_bound,
    write_curve_csv,
)
from .volumes import BH, VolumeKind, ball_volume_bn

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
SEED_ENV = "FINSLERISO_SEED"
SIG_DIGITS = 12

HEADER_NOTES = {
    "b_n": "b_n = pi^(n/2) / Gamma(n/2 + 1), the volume of the Euclidean unit n-ball",
    "typo_flags": [
        "unit-ball volume: the form with Gamma(n + 1/2) is a misprint; Gamma(n/2 + 1) is used",
        "Holmes-Thompson sharp-constant display carries a v_BH label; it is evaluated as v_HT",
        "triangle-ball family: the second face distance equals 1/h, not 1, so v_BH/(d1 d2) stays bounded",
    ],
}

COMMON_KEYS = {"task", "seed", "tolerance"}
TASK_KEYS = {
    "besicovitch": {"metric", "dim", "resolution", "k", "kind", "c", "count", "amplitude"},
    "asym": {"metric", "dim", "resolution", "k", "count", "amplitude"},
    "flat": {"metric", "dim"},
    "counterexample": {"h", "resolution", "k"},
    "sphere": {"metric", "subdivisions", "mesh", "kind", "c", "bounds", "epsilon", "seeds", "radii"},
    "coarea": {"metric", "subdivisions", "mesh", "basepoint", "radius", "levels"},
}
DEFAULT_TOLERANCE = {"besicovitch": 0.03, "asym": 0.03, "flat": 1e-9, "counterexample": 1e-9,
                     "sphere": 0.02, "coarea": 0.03}


class ScenarioError(ValueError):
    """Invalid scenario contents (exit code 2)."""


# -- formatting ----------------------------------------------------------

def fmt(x) -> str:
    """Fixed report formatting: 12 significant digits for floats."""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.{SIG_DIGITS}g}"


def _json_ready(obj: Any) -> Any:
    """Round floats to the report precision so JSON output is byte-stable."""
    if isinstance(obj, dict):
        return {str(k): _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _json_ready(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return float(fmt(x)) if math.isfinite(x) else fmt(x)
    return obj


def _write_csv(path: Path, comment: str, columns: list[str], rows: list[list]) -> None:
    lines = [f"# {comment}", ",".join(columns)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# -- scenario parsing ----------------------------------------------------

def load_scenario(path: Path) -> dict:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    task = data.get("task")
    if task not in TASK_KEYS:
        raise ScenarioError(f"unknown or missing task {task!r}; expected one of {sorted(TASK_KEYS)}")
    unknown = sorted(set(data) - COMMON_KEYS - TASK_KEYS[task])
    if unknown:
        raise ScenarioError(f"unknown key(s) for task {task!r}: {', '.join(unknown)}")
    return data


def _get(data: dict, key: str, kind, default=None):
    value = data.get(key, default)
    if value is None:
        return None
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ScenarioError(f"{key!r} must be an integer")
    elif kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ScenarioError(f"{key!r} must be a number")
        value = float(value)
    elif not isinstance(value, kind):
        raise ScenarioError(f"{key!r} has the wrong type")
    return value


def _metric_dict(spec, default: str) -> dict:
    if spec is None:
        spec = default
    if isinstance(spec, str):
        spec = {"id": spec}
    if not isinstance(spec, dict) or "id" not in spec and "vertices" not in spec:
        raise ScenarioError("metric must be a catalog id or an object with 'id' or 'vertices'")
    return dict(spec)


def _constant_gauge(spec: dict, dim: int) -> Gauge:
    """Catalog gauges: sup, euclidean, cross, or an inline vertex list."""
    allowed = {"id", "radius", "vertices"}
    unknown = set(spec) - allowed
    if unknown:
        raise ScenarioError(f"unknown metric key(s): {', '.join(sorted(unknown))}")
    radius = float(spec.get("radius", 1.0))
    if "vertices" in spec:
        try:
            return Gauge.from_vertices(np.asarray(spec["vertices"], dtype=float))
        except (GeometryError, ValueError) as exc:
            raise ScenarioError(f"bad polytope: {exc}") from exc
    key = spec["id"]
    if key == "sup":
        return Gauge.sup(dim, radius)
    if key == "euclidean":
        return Gauge.euclidean(dim, radius)
    if key == "cross":
        return Gauge(ConvexBody.cross_polytope(dim, radius))
    raise ScenarioError(f"unknown metric id {key!r}")


def _grid_fields(data: dict, seed: int, reversible: bool) -> list[MetricField]:
    dim = _get(data, "dim", int, 2)
    if not 1 <= dim <= 3:
        raise ScenarioError("dim must be 1, 2 or 3")
    res = data.get("resolution", 64)
    if isinstance(res, list):
        if len(res) != dim or not all(isinstance(r, int) and r >= 1 for r in res):
            raise ScenarioError("resolution list must have one positive integer per dimension")
    elif isinstance(res, bool) or not isinstance(res, int) or res < 1:
        raise ScenarioError("resolution must be a positive integer")
    domain = GridDomain.unit_cube(dim, res)
    spec = _metric_dict(data.get("metric"), "random" if not reversible else "sup")
    count = _get(data, "count", int, 1)
    if count < 1:
        raise ScenarioError("count must be >= 1")
    if spec.get("id") == "random":
        extra = set(spec) - {"id", "amplitude"}
        if extra:
            raise ScenarioError(f"unknown metric key(s): {', '.join(sorted(extra))}")
        amplitude = _get(data, "amplitude", float, spec.get("amplitude", 0.35))
        rng = np.random.default_rng(seed)
        return [random_field(rng, domain, reversible=reversible, amplitude=amplitude) for _ in range(count)]
    gauge = _constant_gauge(spec, dim)
    if gauge.dim != dim:
        raise ScenarioError("metric dimension does not match dim")
    if reversible and not gauge.reversible:
        raise ScenarioError("besicovitch task needs a reversible gauge")
    return [MetricField(domain, gauge, name=str(spec.get("id", "polytope")))]


def _sphere_field(data: dict):
    mesh_path = data.get("mesh")
    try:
        if mesh_path is not None:
            mesh = read_off(mesh_path)
        else:
            mesh = build_icosphere(_get(data, "subdivisions", int, 5))
        return assign_metric(mesh, _metric_dict(data.get("metric"), "round"))
    except (MeshError, OSError, TypeError) as exc:
        raise ScenarioError(str(exc)) from exc


def _kind(data: dict) -> VolumeKind:
    try:
        return VolumeKind.parse(_get(data, "kind", str, "BH"), _get(data, "c", float))
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc


# -- tasks ---------------------------------------------------------------

class Outcome:
    def __init__(self):
        self.results: list[dict] = []
        self.extra: dict = {}
        self.table: tuple[list[str], list[list]] = ([], [])
        self.plot: tuple[list[str], list[list]] = ([], [])
        self.passed = True
        self.files: dict[str, callable] = {}


def _ratio_plot(reports: list[BoundReport]) -> tuple[list[str], list[list]]:
    ratios = sorted(r.ratio for r in reports)
    n = len(ratios)
    return ["fraction", "ratio"], [[(i + 1) / n, r] for i, r in enumerate(ratios)]


def task_besicovitch(data, seed, tol, threads) -> Outcome:
    kind = _kind(data)
    if kind.tag == "Riemannian":
        raise ScenarioError("the sup-norm comparison cube has no Riemannian volume; use BH, HT or Custom")
    k = _get(data, "k", int, 3)
    out = Outcome()
    rows = []
    worst = 0
    try:
        fields = _grid_fields(data, seed, reversible=True)
        for i, field in enumerate(fields):
            graph = build_graph(field, k)
            rep = verify_reversible_bound(field, kind, k, tol, graph)
            count, _ = shortness_violations(besicovitch_map(field, k, graph), graph)
            worst = max(worst, count)
            out.results.append(rep.to_dict())
            rows.append([i, rep.measured, rep.bound, rep.ratio, rep.passed, count, *rep.d_values])
            out.passed &= rep.passed and count == 0
    except GeometryError as exc:
        raise ScenarioError(str(exc)) from exc
    dim = fields[0].dim
    reports = [BoundReport(**{k2: r[k2] for k2 in ("inequality", "measured", "bound", "tolerance", "sense")})
               for r in out.results]
    out.extra = {"n_fields": len(fields), "n_pass": sum(r["pass"] for r in out.results),
                 "min_ratio": min(r["ratio"] for r in out.results), "shortness_violations": worst}
    out.table = (["field", "volume", "bound", "ratio", "pass", "shortness_violations"]
                 + [f"d{i + 1}" for i in range(dim)], rows)
    out.plot = _ratio_plot(reports)
    return out


def task_asym(data, seed, tol, threads) -> Outcome:
    k = _get(data, "k", int, 3)
    out = Outcome()
    rows = []
    try:
        fields = _grid_fields(data, seed, reversible=False)
        for i, field in enumerate(fields):
            rep = verify_asymmetric_ht_bound(field, k, tol)
            out.results.append(rep.to_dict())
            rows.append([i, rep.measured, rep.bound, rep.ratio, rep.passed, *rep.d_values])
            out.passed &= rep.passed
    except GeometryError as exc:
        raise ScenarioError(str(exc)) from exc
    dim = fields[0].dim
    reports = [BoundReport(r["inequality"], r["measured"], r["bound"], r["tolerance"]) for r in out.results]
    out.extra = {"n_fields": len(fields), "n_pass": sum(r["pass"] for r in out.results),
                 "min_ratio": min(r["ratio"] for r in out.results),
                 "constant": out.results[0]["metadata"]["constant"]}
    out.table = (["field", "volume", "bound", "ratio", "pass"] + [f"s{i + 1}" for i in range(dim)], rows)
    out.plot = _ratio_plot(reports)
    return out


def task_flat(data, seed, tol, threads) -> Outcome:
    dim = _get(data, "dim", int, 2)
    spec = _metric_dict(data.get("metric"), "sup")
    try:
        gauge = _constant_gauge(spec, dim)
        reports = verify_flat_min_bounds(gauge, tolerance=tol)
    except GeometryError as exc:
        raise ScenarioError(str(exc)) from exc
    out = Outcome()
    out.results = [r.to_dict() for r in reports]
    out.passed = all(r.passed for r in reports)
    out.table = (["bound", "density", "bound_value", "ratio", "pass", "d_min"],
                 [[r.inequality, r.measured, r.bound, r.ratio, r.passed, r.d_values[0]] for r in reports])
    if gauge.dim == 2:
        theta = np.linspace(0.0, 2 * math.pi, 361)
        vals = np.atleast_1d(gauge(np.column_stack([np.cos(theta), np.sin(theta)])))
        out.plot = (["theta", "gauge"], [[t, v] for t, v in zip(theta, vals)])
    else:
        out.plot = (["index", "ratio"], [[i, r.ratio] for i, r in enumerate(reports)])
    return out


def task_counterexample(data, seed, tol, threads) -> Outcome:
    hs = data.get("h", [2, 5, 10, 20, 50])
    if not isinstance(hs, list) or not hs or not all(isinstance(h, (int, float)) and not isinstance(h, bool)
                                                     for h in hs):
        raise ScenarioError("'h' must be a non-empty list of numbers")
    try:
        scan = counterexample_scan(hs, _get(data, "k", int, 3), _get(data, "resolution", int, 64), threads)
    except GeometryError as exc:
        raise ScenarioError(str(exc)) from exc
    from .besicovitch import SCAN_COLUMNS

    out = Outcome()
    for row in scan.rows:
        expected = 3 * math.pi / (2 * row["h"] ** 2)
        err = abs(row["v_bh"] - expected) / expected
        ok = err <= tol
        out.passed &= ok
        out.results.append({"h": row["h"], "v_bh": row["v_bh"], "v_bh_expected": expected,
                            "v_bh_rel_error": err, "pass": ok, "oracle_gap": row["oracle_gap"],
                            "graph_pairs": row["graph_pairs"]})
    out.extra = {"slope": scan.slope, "verdict": scan.verdict, "max_oracle_gap": max(r["oracle_gap"] for r in scan.rows)}
    out.table = (list(SCAN_COLUMNS), scan.csv_rows())
    out.plot = (["h", "ratio"], [[r["h"], r["ratio"]] for r in scan.rows])
    return out


def _default_bounds(field, kind: VolumeKind) -> list[str]:
    if field.metric.is_riemannian:
        return ["coarea", "pu"]
    return {"BH": ["finsler_bh", "pu"], "HT": ["finsler_ht", "pu"], "Custom": ["finsler_c", "pu"]}[kind.tag]


def task_sphere(data, seed, tol, threads) -> Outcome:
    field = _sphere_field(data)
    kind = _kind(data)
    if kind.tag == "Riemannian" and not field.metric.is_riemannian:
        raise ScenarioError("Riemannian area needs a Riemannian sphere metric")
    bounds = data.get("bounds") or _default_bounds(field, kind)
    if not isinstance(bounds, list) or not all(isinstance(b, str) for b in bounds):
        raise ScenarioError("'bounds' must be a list of bound ids")
    try:
        result = find_dividing_curve(field, kind, _get(data, "epsilon", float),
                                     _get(data, "seeds", int, 20), _get(data, "radii", int, 64))
        reports = [verify_division_bound(result, b, tolerance=tol, c=kind.c) for b in bounds]
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc
    out = Outcome()
    out.results = [result.record(r) for r in reports]
    out.passed = all(r.passed for r in reports)
    out.extra = {"total_area": result.total_area, "kind": str(kind), "basepoint": result.seed,
                 "level": result.radius, "n_candidates": result.n_candidates, "n_points": len(result.curve)}
    if field.metric.name == "round":
        out.extra["equator_probe"] = equator_probe(field, kind)
    out.table = (["bound_id", "length", "area1", "area2", "bound", "slack", "pass"],
                 [[r.inequality, r.measured, result.areas[0], result.areas[1], r.bound, r.ratio, r.passed]
                  for r in reports])
    pts = result.curve.points(field.mesh)
    seg = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
    arc = np.concatenate([[0.0], np.cumsum(seg)[:-1]])
    out.plot = (["arc", "x", "y", "z"], [[a, *p] for a, p in zip(arc, pts)])
    out.files["curve.csv"] = lambda path: write_curve_csv(result.curve, field.mesh, path)
    return out


def task_coarea(data, seed, tol, threads) -> Outcome:
    field = _sphere_field(data)
    if not field.metric.is_riemannian:
        raise ScenarioError("coarea check needs a Riemannian sphere metric")
    base = data.get("basepoint", "north")
    if base == "north":
        base = int(np.argmax(field.mesh.vertices[:, 2]))
    elif isinstance(base, bool) or not isinstance(base, int) or not 0 <= base < field.mesh.n_vertices:
        raise ScenarioError("basepoint must be 'north' or a vertex index")
    radius = _get(data, "radius", float, math.pi / 2)
    check = coarea_check(field, base, radius, _get(data, "levels", int, 200))
    out = Outcome()
    ok = check["relative_error"] <= tol
    out.passed = ok
    out.results = [{"integral": check["integral"], "area": check["area"],
                    "relative_error": check["relative_error"], "tolerance": tol, "pass": ok}]
    out.extra = {"basepoint": base, "radius": radius}
    out.table = (["integral", "area", "relative_error", "pass"],
                 [[check["integral"], check["area"], check["relative_error"], ok]])
    out.plot = (["r", "length"], [[r, l] for r, l in zip(check["levels"], check["lengths"])])
    return out


TASKS = {"besicovitch": task_besicovitch, "asym": task_asym, "flat": task_flat,
         "counterexample": task_counterexample, "sphere": task_sphere, "coarea": task_coarea}


# -- driver --------------------------------------------------------------

def _seed(data: dict) -> int:
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError as exc:
            raise ScenarioError(f"{SEED_ENV} must be an integer") from exc
    return _get(data, "seed", int, 0)


def run_scenario(path, out_dir=None, threads: int = 1, tolerance: Optional[float] = None) -> int:
    """Run one scenario file and write its reports; returns the exit code."""
    path = Path(path)
    try:
        data = load_scenario(path)
        task = data["task"]
        seed = _seed(data)
        tol = tolerance if tolerance is not None else _get(data, "tolerance", float, DEFAULT_TOLERANCE[task])
        if tol < 0:
            raise ScenarioError("tolerance must be non-negative")
        outcome = TASKS[task](data, seed, tol, max(1, threads))
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    target = Path(out_dir) if out_dir is not None else path.parent
    stem = path.name[:-5] if path.name.endswith(".json") else path.name
    report = {
        "header": {"tool": "finsleriso", "version": __version__, **HEADER_NOTES,
                   "b_n_values": {str(n): ball_volume_bn(n) for n in (1, 2, 3)}},
        "task": task,
        "seed": seed,
        "tolerance": tol,
        "scenario": data,
        "pass": outcome.passed,
        "summary": outcome.extra,
        "results": outcome.results,
    }
    comment = f"finsleriso {__version__} task={task} seed={seed}"
    try:
        target.mkdir(parents=True, exist_ok=True)
        (target / f"{stem}.report.json").write_text(
            json.dumps(_json_ready(report), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        _write_csv(target / f"{stem}.table.csv", comment, *outcome.table)
        _write_csv(target / f"{stem}.plot.csv", comment, *outcome.plot)
        for suffix, writer in outcome.files.items():
            writer(target / f"{stem}.{suffix}")
    except OSError as exc:
        print(f"error: cannot write reports: {exc}", file=sys.stderr)
        return EXIT_INPUT
    status = "PASS" if outcome.passed else "FAIL"
    print(f"{task}: {status} (reports in {target})")
    return EXIT_OK if outcome.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="finsleriso", description="Finsler volume and dividing-curve checks")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a JSON scenario")
    run.add_argument("scenario", help="path to the scenario JSON file")
    run.add_argument("--out", default=None, help="directory for the reports (default: next to the scenario)")
    run.add_argument("--threads", type=int, default=1, help="worker threads for parallel tasks")
    run.add_argument("--tolerance", type=float, default=None, help="override the scenario tolerance")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    return run_scenario(args.scenario, args.out, args.threads, args.tolerance)


if __name__ == "__main__":
    sys.exit(main())
