"""Gauss-integral maximization, min-norm dual solve and a brute-force oracle.

The Gauss integral of a measure ``nu`` for a field ``f`` is
``2 <f, nu> - nu @ G @ nu``.  Its maximizer over nonnegative measures
carried by an allowed index set is the capacitary measure of
``f * 1_allowed``; the maximal value is the squared energy capacity.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import (
    Infeasible,
    NotPositiveSemidefinite,
    NotStrictlyPositiveDefinite,
    TooLarge,
)
from .kernelspace import KernelLike, as_field, as_index_set, as_kernel, as_measure

DEFAULT_TOL = 1e-9
PIVOT_TOL = 1e-10
BRUTE_FORCE_MAX = 14


class Status(str, Enum):
    CONVERGED = "Converged"
    MAX_ITERATIONS = "MaxIterations"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class KKTReport:
    """Residuals of the optimality conditions of a capacitary measure.

    ``max_under_shoot`` is ``max (f - G mu)^+`` over the allowed sites,
    ``max_support_gap`` is ``max |G mu - f|`` over the support of ``mu``
    and ``complementarity_gap`` is ``|<f, mu> - mu @ G @ mu|``.
    """

    max_under_shoot: float
    max_support_gap: float
    complementarity_gap: float

    def worst(self) -> float:
        return max(self.max_under_shoot, self.max_support_gap, self.complementarity_gap)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SolveReport:
    measure: np.ndarray
    value: float
    kkt_residuals: KKTReport
    iterations: int
    status: Status
    tol: float
    method: str = "active-set"

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    def to_dict(self) -> dict:
        return {
            "measure": [float(x) for x in self.measure],
            "value": float(self.value),
            "residuals": self.kkt_residuals.to_dict(),
            "iterations": int(self.iterations),
            "status": self.status.value,
            "tol": float(self.tol),
            "method": self.method,
        }


def gauss_value(K: KernelLike, f, nu) -> float:
    G = as_kernel(K).entries
    nu = np.asarray(nu, dtype=float)
    return float(2.0 * (np.asarray(f) @ nu) - nu @ G @ nu)


def verify_kkt(K: KernelLike, f, mu, allowed=None, tol: float = DEFAULT_TOL) -> KKTReport:
    K = as_kernel(K)
    f = as_field(f, K.n)
    mu = as_measure(mu, K.n)
    A = as_index_set(allowed, K.n)
    p = K.entries @ mu
    under = float(np.max(np.maximum(f[A] - p[A], 0.0), initial=0.0))
    supp = mu > tol * np.max(mu, initial=0.0)
    gap = float(np.max(np.abs(p[supp] - f[supp]), initial=0.0))
    comp = abs(float(f @ mu) - float(mu @ p))
    return KKTReport(under, gap, comp)


def _factor(Gss):
    """Cholesky factor of a working-set block, or None when it is singular."""
    try:
        c, low = cho_factor(Gss, lower=True, check_finite=False)
    except LinAlgError:
        return None
    pivots = np.diag(c) ** 2
    if np.min(pivots) < PIVOT_TOL * np.max(np.diag(Gss)):
        return None
    return c, low


def _report(K, f, nu, A, atol, iterations, status, method):
    nu = as_measure(np.maximum(nu, 0.0))
    kkt = verify_kkt(K, f, nu, A, tol=DEFAULT_TOL)
    return SolveReport(nu, gauss_value(K, f, nu), kkt, iterations, status, atol, method)


def gauss_maximize(K: KernelLike, f, allowed=None, tol: float = DEFAULT_TOL,
                   initial_support=None, max_iter: int | None = None) -> SolveReport:
    """Maximize the Gauss integral over measures carried by ``allowed``.

    Primal active-set method: the working support ``S`` is grown by the
    most violated site of ``G nu >= f`` and shrunk by stepping back to the
    boundary of the cone whenever the working solve has nonpositive weights.
    Falls back to projected gradient if a working block is singular.

    Parameters
    ----------
    K : KernelMatrix
        Positive semidefinite kernel.
    f : array_like
        Nonnegative field.
    allowed : index set, optional
        Sites that may carry mass (default: all).
    tol : float
        Dual feasibility tolerance, scaled by ``max(max(f), 1)``.
    initial_support : index set, optional
        Starting working set.

    Returns
    -------
    SolveReport
    """
    K = as_kernel(K)
    f = as_field(f, K.n)
    A = as_index_set(allowed, K.n)
    if not K.is_psd:
        raise NotPositiveSemidefinite(
            f"kernel has eigenvalue {K.eigenvalues[0]:.3g} < 0")
    n = K.n
    G = K.entries
    atol = tol * max(float(np.max(f, initial=0.0)), 1.0)
    cap = 50 * n if max_iter is None else int(max_iter)
    nu = np.zeros(n)
    if A.size == 0 or not np.any(f[A] > 0):
        return _report(K, f, nu, A, atol, 0, Status.CONVERGED, "active-set")

    in_allowed = np.zeros(n, dtype=bool)
    in_allowed[A] = True
    S: list[int] = []
    if initial_support is not None:
        S = [int(i) for i in as_index_set(initial_support, n) if in_allowed[i]]
    skip: set[int] = set()
    just_added: int | None = None
    it = 0
    while True:
        while S:
            it += 1
            if it > cap:
                return _report(K, f, nu, A, atol, it - 1, Status.MAX_ITERATIONS, "active-set")
            idx = np.array(S)
            fac = _factor(G[np.ix_(idx, idx)])
            if fac is None:
                return _projected_gradient(K, f, nu, A, atol, it, cap)
            z = cho_solve(fac, f[idx], check_finite=False)
            if np.all(z > 0):
                nu[:] = 0.0
                nu[idx] = z
                skip.clear()
                break
            cur = nu[idx]
            if just_added is not None and z[S.index(just_added)] <= 0:
                # the new site cannot carry mass here; leave nu unchanged
                S.remove(just_added)
                skip.add(just_added)
                just_added = None
                continue
            blocked = np.flatnonzero(z <= 0)
            alphas = cur[blocked] / (cur[blocked] - z[blocked])
            # step to the last feasible point; drop the first blocking site
            order = np.lexsort((z[blocked], alphas))
            drop = int(idx[blocked[order[0]]])
            alpha = float(alphas[order[0]])
            new = np.maximum(cur + alpha * (z - cur), 0.0)
            nu[idx] = new
            nu[drop] = 0.0
            S.remove(drop)
            just_added = None
            if alpha > 0:
                skip.clear()
        if not S:
            nu[:] = 0.0
        just_added = None
        w = f - G @ nu
        cand = in_allowed.copy()
        cand[S] = False
        if skip:
            cand[list(skip)] = False
        cidx = np.flatnonzero(cand)
        if cidx.size == 0 or np.max(w[cidx]) <= atol:
            return _report(K, f, nu, A, atol, it, Status.CONVERGED, "active-set")
        j = int(cidx[np.argmax(w[cidx])])
        S.append(j)
        S.sort()
        just_added = j


def _projected_gradient(K, f, nu, A, atol, it0, cap, max_steps: int = 200_000) -> SolveReport:
    G = K.entries
    step = 1.0 / K.spectral_norm
    mask = np.zeros(K.n, dtype=bool)
    mask[A] = True
    nu = np.where(mask, nu, 0.0)
    for k in range(1, max_steps + 1):
        g = f - G @ nu
        nu = np.where(mask, np.maximum(nu + step * g, 0.0), 0.0)
        if k % 10 == 0:
            kkt = verify_kkt(K, f, nu, A)
            if kkt.max_under_shoot <= atol and kkt.max_support_gap <= atol:
                return _report(K, f, nu, A, atol, it0 + k, Status.CONVERGED, "projected-gradient")
    return _report(K, f, nu, A, atol, it0 + max_steps, Status.MAX_ITERATIONS, "projected-gradient")


def min_norm_dual(K: KernelLike, f, where=None, tol: float = DEFAULT_TOL) -> SolveReport:
    """Minimal energy norm of ``lam >= 0`` with ``G lam >= f`` on ``where``.

    Solved in potential space: with ``p = G lam`` and ``H = G^{-1}`` the
    problem becomes ``min p @ H @ p`` subject to the bounds ``p >= f`` on
    ``where``.  The bound multipliers are then exactly ``lam = H p`` and
    are nonnegative at the optimum.  A primal active-set method on the
    bounds starts with every bound tight and releases the site with the
    most negative multiplier.
    """
    K = as_kernel(K)
    f = as_field(f, K.n)
    W = as_index_set(where, K.n)
    if not K.is_strictly_pd:
        raise NotStrictlyPositiveDefinite(
            f"kernel has eigenvalue {K.eigenvalues[0]:.3g}; min-norm dual needs strict PD")
    n = K.n
    G = K.entries
    atol = tol * max(float(np.max(f, initial=0.0)), 1.0)
    bounded = W[f[W] > 0]
    if bounded.size == 0:
        return _report(K, f, np.zeros(n), W, atol, 0, Status.CONVERGED, "dual-bounds")
    H = cho_solve(cho_factor(G, lower=True), np.eye(n))
    H = 0.5 * (H + H.T)
    lb = np.full(n, -np.inf)
    lb[bounded] = f[bounded]

    tight = np.zeros(n, dtype=bool)
    tight[bounded] = True

    def free_solution(tight):
        p = np.where(tight, lb, 0.0)
        U = np.flatnonzero(~tight)
        if U.size:
            T = np.flatnonzero(tight)
            rhs = -H[np.ix_(U, T)] @ p[T]
            p[U] = cho_solve(cho_factor(H[np.ix_(U, U)], lower=True), rhs)
        return p

    p = free_solution(tight)
    cap = 50 * n + 10
    it = 0
    while True:
        it += 1
        if it > cap:
            break
        lam = H @ p
        T = np.flatnonzero(tight)
        ytol = tol * max(1.0, float(np.max(np.abs(lam))))
        if T.size == 0 or np.min(lam[T]) >= -ytol:
            break
        release = int(T[np.argmin(lam[T])])
        tight[release] = False
        while True:
            it += 1
            cand = free_solution(tight)
            viol = np.flatnonzero(~tight & (cand < lb))
            if viol.size == 0:
                p = cand
                break
            alphas = (p[viol] - lb[viol]) / (p[viol] - cand[viol])
            k = int(np.argmin(alphas))
            p = p + alphas[k] * (cand - p)
            tight[viol[k]] = True
            p[viol[k]] = lb[viol[k]]
    lam = np.maximum(H @ p, 0.0)
    status = Status.CONVERGED if it <= cap else Status.MAX_ITERATIONS
    # primal feasibility checked on the returned measure, not on p
    short = np.max(f[W] - G[W] @ lam, initial=0.0)
    if status is Status.CONVERGED and short > atol * 10:
        raise Infeasible(f"internal error: min-norm dual misses G lam >= f by {short:.3g}")
    lam = as_measure(lam)
    value = float(np.sqrt(max(lam @ G @ lam, 0.0)))
    kkt = verify_kkt(K, np.where(np.isin(np.arange(n), W), f, 0.0), lam, W)
    return SolveReport(lam, value, kkt, it, status, atol, "dual-bounds")


def brute_force_capacitary(K: KernelLike, f, allowed=None) -> SolveReport:
    """Exact capacitary measure by enumerating every support ``S``.

    Each ``S`` gives the candidate ``G[S, S] mu_S = f_S``; a candidate is
    accepted when it is nonnegative and ``G mu >= f`` on ``allowed``.  The
    accepted candidate with the largest Gauss integral is returned.
    """
    K = as_kernel(K)
    f = as_field(f, K.n)
    A = as_index_set(allowed, K.n)
    if A.size > BRUTE_FORCE_MAX:
        raise TooLarge(f"brute force limited to {BRUTE_FORCE_MAX} allowed sites, got {A.size}")
    G = K.entries
    scale = max(float(np.max(f, initial=0.0)), 1.0)
    best, best_val, count = None, -np.inf, 0
    for r in range(A.size + 1):
        for S in itertools.combinations(A.tolist(), r):
            count += 1
            mu = np.zeros(K.n)
            if S:
                idx = list(S)
                try:
                    mu[idx] = np.linalg.solve(G[np.ix_(idx, idx)], f[idx])
                except np.linalg.LinAlgError:
                    continue
                if np.min(mu[idx]) < -1e-12 * scale:
                    continue
            mu = np.maximum(mu, 0.0)
            if np.any(G[A] @ mu < f[A] - 1e-10 * scale):
                continue
            val = gauss_value(K, f, mu)
            if val > best_val:
                best, best_val = mu, val
    if best is None:
        return SolveReport(as_measure(np.zeros(K.n)), float("nan"),
                           KKTReport(np.inf, np.inf, np.inf), count, Status.INFEASIBLE, 1e-10,
                           "brute-force")
    return _report(K, f, best, A, 1e-10 * scale, count, Status.CONVERGED, "brute-force")
