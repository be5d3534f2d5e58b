"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Solves ``maximize c @ x  subject to  A @ x <= b,  x >= 0`` for the
small LPs arising in G-capacity, dilation-constant and domination
computations.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionMismatch, LpFailure, NonfiniteEntry

PIVOT_TOL = 1e-11
COST_TOL = 1e-12


class LPStatus(str, Enum):
    OPTIMAL = "Optimal"
    UNBOUNDED = "Unbounded"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray | None
    value: float | None
    status: LPStatus
    pivots: int = 0


def _pivot(T, basis, row, col):
    T[row] /= T[row, col]
    col_vals = T[:, col].copy()
    col_vals[row] = 0.0
    T -= np.outer(col_vals, T[row])
    basis[row] = col


def _run(T, basis, ncols, max_pivots):
    """Iterate on tableau ``T`` whose last row holds reduced costs.

    Only the first ``ncols`` columns may enter.  Returns (status, pivots).
    """
    m = T.shape[0] - 1
    scale = max(1.0, float(np.max(np.abs(T[-1, :ncols]), initial=0.0)))
    for it in range(max_pivots):
        costs = T[-1, :ncols]
        entering = np.flatnonzero(costs > COST_TOL * scale)
        if entering.size == 0:
            return LPStatus.OPTIMAL, it
        col = int(entering[0])
        column = T[:m, col]
        rows = np.flatnonzero(column > PIVOT_TOL)
        if rows.size == 0:
            return LPStatus.UNBOUNDED, it
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
        # Bland: among tied rows leave by the smallest basic variable index
        row = int(ties[np.argmin(np.asarray(basis)[ties])])
        _pivot(T, basis, row, col)
    raise LpFailure(f"simplex exceeded {max_pivots} pivots")


def solve_lp(objective, constraint_matrix, rhs, max_pivots: int = 100_000) -> LPResult:
    """Maximize ``objective @ x`` s.t. ``constraint_matrix @ x <= rhs``, ``x >= 0``.

    Returns an optimal vertex, or the status ``Unbounded``/``Infeasible``.
    """
    c = np.asarray(objective, dtype=float).reshape(-1)
    n = c.shape[0]
    A = np.asarray(constraint_matrix, dtype=float)
    if A.size == 0:
        A = A.reshape(0, n)
    b = np.asarray(rhs, dtype=float).reshape(-1)
    if A.ndim != 2 or A.shape[1] != n or A.shape[0] != b.shape[0]:
        raise DimensionMismatch(f"constraint matrix {A.shape}, rhs {b.shape}, objective {c.shape}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
        raise NonfiniteEntry("LP data must be finite")
    m = A.shape[0]

    neg = b < 0
    n_art = int(neg.sum())
    ncols = n + m + n_art
    T = np.zeros((m + 1, ncols + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[:m][neg] *= -1.0
    basis = list(range(n, n + m))
    pivots = 0
    if n_art:
        art_rows = np.flatnonzero(neg)
        for k, r in enumerate(art_rows):
            T[r, n + m + k] = 1.0
            basis[r] = n + m + k
        # phase 1: maximize -sum(artificials)
        T[-1, :] = T[art_rows, :].sum(axis=0)
        T[-1, n + m:n + m + n_art] = 0.0
        status, pivots = _run(T, basis, n + m, max_pivots)
        if -T[-1, -1] < -1e-9 * max(1.0, float(np.max(np.abs(b)))):
            return LPResult(None, None, LPStatus.INFEASIBLE, pivots)
        # drive artificial variables that stayed basic (at zero) out of the basis
        for r in range(m):
            if basis[r] >= n + m:
                candidates = np.flatnonzero(np.abs(T[r, :n + m]) > PIVOT_TOL)
                if candidates.size:
                    _pivot(T, basis, r, int(candidates[0]))
        keep = [r for r in range(m) if basis[r] < n + m]
        T = np.vstack([T[keep], T[-1:]])
        T = np.delete(T, np.s_[n + m:n + m + n_art], axis=1)
        basis = [basis[r] for r in keep]
        ncols = n + m
        m = len(keep)

    T[-1, :] = 0.0
    T[-1, :n] = c
    for r, j in enumerate(basis):
        if T[-1, j] != 0.0:
            T[-1, :] -= T[-1, j] * T[r, :]
    status, p2 = _run(T, basis, ncols, max_pivots)
    pivots += p2
    if status is LPStatus.UNBOUNDED:
        return LPResult(None, None, status, pivots)
    x = np.zeros(ncols)
    for r, j in enumerate(basis):
        x[j] = T[r, -1]
    x = np.maximum(x[:n], 0.0)
    return LPResult(x, float(c @ x), LPStatus.OPTIMAL, pivots)
