"""Busemann-Hausdorff and Holmes-Thompson volume densities.

Densities are taken with respect to the Euclidean structure of the chart
coordinates, so ``|B_g| = b_n`` throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .convex import ELLIPSOID, EUCLIDEAN, SUP, Gauge, GeometryError, body_volume, polar_dual

__all__ = [
    "VolumeKind",
    "BH",
    "HT",
    "RIEMANNIAN",
    "ball_volume_bn",
    "bh_density",
    "ht_density",
    "custom_density",
    "gauge_density",
    "cube_density",
    "integrate_volume",
]


@dataclass(frozen=True)
class VolumeKind:
    """Choice of Finsler volume.

    ``Custom(c)`` is the Busemann-type volume rescaled so that the sup-norm
    cube has density ``c``, i.e. density ``c * 2^n / |B_Phi|``.
    """

    tag: str
    c: float | None = None

    def __post_init__(self):
        if self.tag not in ("BH", "HT", "Riemannian", "Custom"):
            raise ValueError(f"unknown volume kind {self.tag!r}")
        if self.tag == "Custom":
            if self.c is None or not self.c > 0:
                raise ValueError("Custom volume kind needs a positive constant c")

    @classmethod
    def parse(cls, text: str, c: float | None = None) -> "VolumeKind":
        key = text.strip().lower()
        table = {"bh": "BH", "ht": "HT", "riemannian": "Riemannian", "custom": "Custom"}
        if key not in table:
            raise ValueError(f"unknown volume kind {text!r}")
        return cls(table[key], c)

    def __str__(self) -> str:
        return f"Custom({self.c:g})" if self.tag == "Custom" else self.tag


BH = VolumeKind("BH")
HT = VolumeKind("HT")
RIEMANNIAN = VolumeKind("Riemannian")


def ball_volume_bn(n: int) -> float:
    """Volume of the Euclidean unit ball, ``pi^(n/2) / Gamma(n/2 + 1)``."""
    if not 1 <= n <= 3:
        raise ValueError(f"n must be in 1..3, got {n}")
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def bh_density(g: Gauge) -> float:
    return ball_volume_bn(g.dim) / body_volume(g.body)


def ht_density(g: Gauge) -> float:
    b = g.body
    if b.kind == SUP:
        # the dual cross-polytope has volume (2/r)^n / n!
        n = g.dim
        return 2.0**n / (math.factorial(n) * ball_volume_bn(n)) / b.radius**n
    return body_volume(polar_dual(b)) / ball_volume_bn(g.dim)


def custom_density(g: Gauge, c: float) -> float:
    return c * 2.0**g.dim / body_volume(g.body)


def gauge_density(g: Gauge, kind: VolumeKind) -> float:
    """Volume density of a single norm under ``kind``."""
    if kind.tag == "BH":
        return bh_density(g)
    if kind.tag == "HT":
        return ht_density(g)
    if kind.tag == "Custom":
        return custom_density(g, kind.c)
    if g.body.kind not in (EUCLIDEAN, ELLIPSOID):
        raise GeometryError("Riemannian volume needs an ellipsoidal gauge")
    return bh_density(g)


def cube_density(kind: VolumeKind, n: int) -> float:
    """Density of the flat sup-norm metric on ``R^n`` under ``kind``."""
    bn = ball_volume_bn(n)
    if kind.tag == "BH":
        return bn / 2.0**n
    if kind.tag == "HT":
        return 2.0**n / (math.factorial(n) * bn)
    if kind.tag == "Custom":
        return float(kind.c)
    raise ValueError("the sup-norm comparison cube has no Riemannian volume")


def integrate_volume(field, kind: VolumeKind) -> float:
    """Midpoint-rule volume of a metric field.

    ``field`` is anything exposing ``cell_centers()``, ``cell_volumes()`` and
    ``density(points, kind)`` (grid fields and sphere fields both do).
    """
    centers = field.cell_centers()
    if len(centers) == 0:
        raise ValueError("empty domain")
    dens = np.asarray(field.density(centers, kind), dtype=float)
    if not np.all(np.isfinite(dens)) or np.any(dens <= 0):
        raise ValueError("volume densities must be positive and finite")
    # correctly rounded, so constant fields reproduce their exact volume
    return math.fsum((dens * field.cell_volumes()).tolist())
