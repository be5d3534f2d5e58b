"""Balayage (sweeping) of measures, equilibrium measures and lower envelopes.

On a finite space every set is its own quasiclosure, so outer balayage
and balayage coincide; reports carry both names.  Whether a sweep is
proper (``G omega^A <= G omega`` everywhere) or only a pseudobalayage is
a reported property of the same optimizer.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import EmptyFamily, NotStrictlyPositiveDefinite, PreconditionViolated, SolverError
from .kernelspace import (
    KernelLike,
    as_index_set,
    as_kernel,
    as_measure,
    indicator,
    restrict_field,
)
from .variational import SolveReport, gauss_maximize, min_norm_dual

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class SweepReport:
    """Result of sweeping a measure (or the constant 1) onto a set.

    ``residual_a`` measures ``G swept = target`` on ``A``, ``residual_b``
    the excess ``(G swept - target)^+`` over the whole space and
    ``energy_identity_gap`` the mutual energy identity.  ``dual_value``
    is the min-norm dual capacity of the same field.
    """

    swept: np.ndarray
    c_value: float
    residual_a: float
    residual_b: float
    energy_identity_gap: float
    is_proper: bool
    dual_value: float
    tol: float
    kind: str
    names: tuple[str, ...] = ()

    @property
    def dual_gap(self) -> float:
        return abs(self.c_value - self.dual_value)

    @property
    def mass(self) -> float:
        return float(np.sum(self.swept))

    def to_dict(self) -> dict:
        return {
            "swept": [float(x) for x in self.swept],
            "c_value": self.c_value,
            "residual_a": self.residual_a,
            "residual_b": self.residual_b,
            "energy_identity_gap": self.energy_identity_gap,
            "is_proper": self.is_proper,
            "dual_value": self.dual_value,
            "dual_gap": self.dual_gap,
            "mass": self.mass,
            "tol": self.tol,
            "kind": self.kind,
            "names": list(self.names),
        }


def _strict(K):
    if not K.is_strictly_pd:
        raise NotStrictlyPositiveDefinite(
            f"kernel has eigenvalue {K.eigenvalues[0]:.3g}; sweeping needs strict PD")


def _solve(K, f, A) -> SolveReport:
    rep = gauss_maximize(K, f, allowed=A)
    if not rep.converged:
        raise SolverError(f"Gauss maximization stopped with status {rep.status.value}")
    return rep


def balayage(K: KernelLike, omega, A, tol: float = DEFAULT_TOL) -> SweepReport:
    """Sweep ``omega`` onto ``A``.

    The swept measure maximizes the Gauss integral of ``1_A G omega``
    over measures carried by ``A``.  ``tol`` is scaled by ``max(G omega)``.
    """
    K = as_kernel(K)
    _strict(K)
    omega = as_measure(omega, K.n)
    idx = as_index_set(A, K.n)
    G = K.entries
    g_omega = G @ omega
    atol = tol * max(float(np.max(g_omega, initial=0.0)), 1.0)
    if idx.size == 0:
        zero = as_measure(np.zeros(K.n))
        return SweepReport(zero, 0.0, 0.0, 0.0, 0.0, True, 0.0, atol,
                           "balayage", ("balayage", "outer balayage"))
    f = restrict_field(g_omega, idx)
    rep = _solve(K, f, idx)
    swept = rep.measure
    g_swept = G @ swept
    residual_a = float(np.max(np.abs(g_swept[idx] - g_omega[idx])))
    residual_b = float(np.max(np.maximum(g_swept - g_omega, 0.0)))
    mutual = float(g_omega @ swept)
    energy = float(swept @ g_swept)
    gap = abs(mutual - energy)
    dual = min_norm_dual(K, g_omega, where=idx).value
    is_proper = residual_b <= atol
    if K.domination_verified and not is_proper:
        log.warning("domination-verified kernel gave residual_b=%.3g > %.3g", residual_b, atol)
    kind = "balayage" if is_proper else "pseudobalayage"
    names = ("balayage", "outer balayage") if is_proper else ("pseudobalayage", "outer pseudobalayage")
    return SweepReport(swept, float(np.sqrt(max(rep.value, 0.0))), residual_a, residual_b,
                       gap, is_proper, dual, atol, kind, names)


def equilibrium(K: KernelLike, A, tol: float = DEFAULT_TOL,
                maximum_principle: bool | None = None) -> SweepReport:
    """Capacitary measure of ``1_A`` carried by ``A``.

    Under the maximum principle this is the equilibrium measure and
    ``residual_a`` is two-sided; otherwise only ``G mu_A >= 1`` on ``A``
    is measured.  When ``maximum_principle`` is None the cached dilation
    constant of ``K`` decides.
    """
    K = as_kernel(K)
    _strict(K)
    idx = as_index_set(A, K.n)
    if maximum_principle is None:
        k = K.dilation_constant_k
        maximum_principle = k is not None and k <= 1 + 1e-9
    if idx.size == 0:
        zero = as_measure(np.zeros(K.n))
        return SweepReport(zero, 0.0, 0.0, 0.0, 0.0, True, 0.0, tol,
                           "equilibrium", ("equilibrium", "outer equilibrium"))
    ones = indicator(K, idx)
    rep = _solve(K, ones, idx)
    mu = rep.measure
    p = K.entries @ mu
    if maximum_principle:
        residual_a = float(np.max(np.abs(p[idx] - 1.0)))
    else:
        residual_a = float(np.max(np.maximum(1.0 - p[idx], 0.0)))
    residual_b = float(np.max(np.maximum(p - 1.0, 0.0)))
    mass = float(mu.sum())
    c_sq = max(rep.value, 0.0)
    energy = float(mu @ p)
    gap = max(abs(mass - energy), abs(mass - c_sq))
    dual = min_norm_dual(K, ones, where=idx).value
    is_proper = residual_b <= tol
    kind = "equilibrium" if is_proper else "capacitary"
    names = (kind, "outer " + kind)
    return SweepReport(mu, float(np.sqrt(c_sq)), residual_a, residual_b, gap, is_proper,
                       dual, tol, kind, names)


@dataclass(frozen=True)
class LowerEnvelope:
    measure: np.ndarray
    envelope: np.ndarray
    support_residual: float
    global_residual: float
    checked_globally: bool
    tol: float

    @property
    def passed(self) -> bool:
        ok = self.support_residual <= self.tol
        if self.checked_globally:
            ok = ok and self.global_residual <= self.tol
        return ok

    def to_dict(self) -> dict:
        return {
            "measure": [float(x) for x in self.measure],
            "envelope": [float(x) for x in self.envelope],
            "support_residual": self.support_residual,
            "global_residual": self.global_residual,
            "checked_globally": self.checked_globally,
            "passed": self.passed,
            "tol": self.tol,
        }


def lower_envelope(K: KernelLike, mus, tol: float = DEFAULT_TOL) -> LowerEnvelope:
    """Capacitary measure of the pointwise minimum of the potentials ``G mu_j``.

    ``support_residual`` is ``max |G mu - f|`` on the support of the result;
    ``global_residual`` is ``max (G mu - f)^+`` over the whole space and is
    only required to vanish on domination-verified kernels.
    """
    K = as_kernel(K)
    _strict(K)
    mus = [as_measure(m, K.n) for m in mus]
    if not mus:
        raise EmptyFamily("lower_envelope needs at least one measure")
    G = K.entries
    f = np.min(np.stack([G @ m for m in mus]), axis=0)
    rep = _solve(K, f, None)
    mu = rep.measure
    p = G @ mu
    supp = mu > 1e-12 * np.max(mu, initial=0.0)
    support_res = float(np.max(np.abs(p[supp] - f[supp]), initial=0.0))
    global_res = float(np.max(np.maximum(p - f, 0.0)))
    return LowerEnvelope(mu, as_measure(f), support_res, global_res,
                         bool(K.domination_verified), tol)


@dataclass(frozen=True)
class IteratedSweep:
    passed: bool
    max_deviation: float
    threshold: float

    def __bool__(self):
        return self.passed


def iterated_sweep_check(K: KernelLike, omega, A, B, tol: float = 1e-7) -> IteratedSweep:
    """Check ``(omega^A)^B = omega^A = (omega^B)^A`` for ``A`` inside ``B``."""
    K = as_kernel(K)
    idx_a = as_index_set(A, K.n)
    idx_b = as_index_set(B, K.n)
    if not set(idx_a.tolist()) <= set(idx_b.tolist()):
        raise PreconditionViolated("A must be a subset of B")
    if K.domination_verified is not True:
        raise PreconditionViolated("iterated sweeping needs a domination-verified kernel")
    omega = as_measure(omega, K.n)
    wa = balayage(K, omega, idx_a).swept
    wab = balayage(K, wa, idx_b).swept
    wb = balayage(K, omega, idx_b).swept
    wba = balayage(K, wb, idx_a).swept
    dev = float(max(np.max(np.abs(wab - wa)), np.max(np.abs(wba - wa))))
    threshold = tol * max(float(omega.sum()), 1.0)
    return IteratedSweep(dev <= threshold, dev, threshold)
