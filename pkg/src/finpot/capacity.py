"""Energy capacity of fields and sets, dual capacity and G-capacity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LpFailure, NotStrictlyPositiveDefinite, SolverError
from .kernelspace import KernelLike, as_field, as_index_set, as_kernel, indicator
from .simplex import LPStatus, solve_lp
from .variational import DEFAULT_TOL, SolveReport, gauss_maximize, min_norm_dual


@dataclass(frozen=True)
class CapacityReport:
    c: float
    gamma: float
    capacitary_measure: np.ndarray
    duality_gap: float
    gcapa: float | None = None
    passed: bool = True
    tol: float = 1e-7

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "c_squared": self.c ** 2,
            "gamma": self.gamma,
            "gcapa": self.gcapa,
            "capacitary_measure": [float(x) for x in self.capacitary_measure],
            "duality_gap": self.duality_gap,
            "passed": self.passed,
            "tol": self.tol,
        }


def _require(report: SolveReport) -> SolveReport:
    if not report.converged:
        raise SolverError(f"solver stopped with status {report.status.value} "
                          f"after {report.iterations} iterations")
    return report


def _require_strict(K):
    if not K.is_strictly_pd:
        raise NotStrictlyPositiveDefinite(
            f"kernel has eigenvalue {K.eigenvalues[0]:.3g}; capacitary measure is not unique")


def capacity(K: KernelLike, f, tol: float = DEFAULT_TOL) -> float:
    """Energy capacity ``c(f)``: square root of the maximal Gauss integral."""
    rep = _require(gauss_maximize(K, f, tol=tol))
    return float(np.sqrt(max(rep.value, 0.0)))


def capacitary_measure(K: KernelLike, f, tol: float = DEFAULT_TOL) -> np.ndarray:
    K = as_kernel(K)
    _require_strict(K)
    return _require(gauss_maximize(K, f, tol=tol)).measure


def dual_capacity(K: KernelLike, f, tol: float = DEFAULT_TOL) -> float:
    return _require(min_norm_dual(K, f, tol=tol)).value


def set_capacity(K: KernelLike, A, tol: float = DEFAULT_TOL) -> float:
    K = as_kernel(K)
    return capacity(K, indicator(K, A), tol=tol)


def g_capacity_measure(K: KernelLike, A) -> tuple[float, np.ndarray]:
    """G-capacity of ``A`` with a maximizing measure restricted to ``A``.

    The LP maximizes ``nu(A)`` over all ``nu >= 0`` with ``G nu <= 1``
    everywhere; mass off ``A`` never helps, so dropping it keeps the
    value and feasibility.
    """
    K = as_kernel(K)
    idx = as_index_set(A, K.n)
    if idx.size == 0:
        return 0.0, np.zeros(K.n)
    objective = indicator(K, idx)
    res = solve_lp(objective, K.entries, np.ones(K.n))
    if res.status is not LPStatus.OPTIMAL:
        raise LpFailure(f"G-capacity LP returned {res.status.value}")
    nu = np.zeros(K.n)
    nu[idx] = res.x[idx]
    return float(res.value), nu


def g_capacity(K: KernelLike, A) -> float:
    return g_capacity_measure(K, A)[0]


def check_duality(K: KernelLike, f, tol: float = 1e-7, A=None) -> CapacityReport:
    """Compare the primal capacity with the dual (min-norm) capacity.

    Passing an index set ``A`` instead of ``f`` uses ``f = 1_A`` and also
    fills in the G-capacity.
    """
    K = as_kernel(K)
    _require_strict(K)
    gcapa = None
    if A is not None:
        f = indicator(K, A)
        gcapa = g_capacity(K, A)
    f = as_field(f, K.n)
    primal = _require(gauss_maximize(K, f))
    c = float(np.sqrt(max(primal.value, 0.0)))
    gamma = dual_capacity(K, f)
    gap = abs(c - gamma)
    return CapacityReport(c=c, gamma=gamma, capacitary_measure=primal.measure,
                          duality_gap=gap, gcapa=gcapa,
                          passed=gap <= tol * max(c, 1.0), tol=tol)
