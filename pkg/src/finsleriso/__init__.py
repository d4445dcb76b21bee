"""Finsler volumes, Besicovitch-type bounds and dividing curves on 2-spheres."""

__version__ = "0.1.0"

from .convex import (
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
from .volumes import BH, HT, RIEMANNIAN, VolumeKind, ball_volume_bn, cube_density, gauge_density, integrate_volume
from .field import GridDomain, MetricField, build_graph, distance_field, face_distances, segment_oracle_distance
from .besicovitch import (
    BoundReport,
    counterexample_scan,
    verify_asymmetric_ht_bound,
    verify_flat_min_bounds,
    verify_reversible_bound,
)
from .mesh import SphereMesh, build_icosphere
from .sphere import (
    assign_metric,
    coarea_check,
    curve_split,
    find_dividing_curve,
    level_set_curves,
    mesh_area,
    shorten_curve,
    verify_division_bound,
)
