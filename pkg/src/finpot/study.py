"""Discrete Newtonian sphere experiments against closed-form electrostatics.

A conducting sphere of radius ``r`` has Newtonian capacity ``r`` and a
unit charge at distance ``d > r`` from its centre sweeps to total mass
``r / d`` (image charge).  The sphere is discretized by a Fibonacci
lattice and the kernel by :func:`build_riesz_kernel`.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .kernelspace import CellSelfEnergy, build_riesz_kernel, default_cell_size, fibonacci_sphere
from .sweep import balayage, equilibrium

COLUMNS = ("N", "capacity_sq", "swept_mass", "residual_a", "residual_b", "runtime_ms")


@dataclass(frozen=True)
class SphereScenario:
    sphere_radius: float = 1.0
    point_counts: tuple[int, ...] = (100, 200, 500)
    alpha: float = 2.0
    exterior_distance: float = 2.0

    def __post_init__(self):
        if self.sphere_radius <= 0:
            raise ValidationError("sphere_radius must be positive")
        if self.exterior_distance <= self.sphere_radius:
            raise ValidationError("exterior_distance must exceed sphere_radius")
        if not self.point_counts or min(self.point_counts) < 1:
            raise ValidationError("point_counts must be positive integers")
        object.__setattr__(self, "point_counts", tuple(int(n) for n in self.point_counts))


def sphere_kernel(n_points: int, radius: float = 1.0, alpha: float = 2.0,
                  exterior_distance: float | None = None):
    """Kernel on a Fibonacci sphere, plus one exterior site on the z axis if requested.

    Returns ``(K, sphere_indices, exterior_index)``; the cell size comes from
    the sphere points alone.
    """
    pts = fibonacci_sphere(n_points, radius)
    h = default_cell_size(pts) if n_points > 1 else radius
    rule = CellSelfEnergy(h)
    ext = None
    if exterior_distance is not None:
        pts = np.vstack([pts, [0.0, 0.0, float(exterior_distance)]])
        ext = n_points
    K = build_riesz_kernel(pts, alpha, rule)
    return K, np.arange(n_points), ext


def sphere_row(n_points: int, scenario: SphereScenario) -> dict:
    t0 = time.perf_counter()
    K, A, ext = sphere_kernel(n_points, scenario.sphere_radius, scenario.alpha,
                              scenario.exterior_distance)
    eq = equilibrium(K, A)
    omega = np.zeros(K.n)
    omega[ext] = 1.0
    sw = balayage(K, omega, A)
    runtime = (time.perf_counter() - t0) * 1e3
    return {
        "N": n_points,
        "capacity_sq": eq.c_value ** 2,
        "swept_mass": sw.mass,
        "residual_a": sw.residual_a,
        "residual_b": sw.residual_b,
        "runtime_ms": runtime,
    }


def emit_convergence_study(scenario: SphereScenario) -> list[dict]:
    return [sphere_row(n, scenario) for n in scenario.point_counts]
