"""Deciders for the energy, maximum, dilated maximum and domination principles.

The maximum-type principles quantify over all measures; on a finite
space each support ``S`` and target site ``j`` gives a linear program,
so small kernels can be decided exhaustively.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import TooLarge
from .kernelspace import PSD_RTOL, KernelLike, as_kernel, as_measure
from .simplex import LPStatus, solve_lp
from .variational import gauss_maximize

EXHAUSTIVE_MAX = 12


class Principle(str, Enum):
    ENERGY = "Energy"
    MAXIMUM = "Maximum"
    DILATED_MAXIMUM = "DilatedMaximum"
    DOMINATION = "Domination"


class Method(str, Enum):
    EXHAUSTIVE = "Exhaustive"
    RANDOMIZED = "Randomized"


@dataclass(frozen=True)
class PrincipleReport:
    principle: Principle
    holds: bool
    method: Method
    k: float | None = None
    witness: dict | None = None
    seed: int | None = None
    checked: int = 0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        witness = None
        if self.witness is not None:
            witness = {key: ([float(x) for x in v] if isinstance(v, np.ndarray) else v)
                       for key, v in self.witness.items()}
        return {
            "principle": self.principle.value,
            "holds": self.holds,
            "method": self.method.value,
            "k": self.k,
            "witness": witness,
            "seed": self.seed,
            "checked": self.checked,
            **self.extra,
        }


@dataclass(frozen=True)
class PDCheck:
    psd: bool
    strict: bool
    min_eigenvalue: float
    witness: np.ndarray | None = None

    def __iter__(self):
        yield self.psd
        yield self.strict


def check_positive_definite(K: KernelLike) -> PDCheck:
    """Matrix-level check over all signed vectors (stronger than the cone check).

    A failing kernel comes with the eigenvector of its smallest eigenvalue.
    """
    K = as_kernel(K)
    w, V = np.linalg.eigh(K.entries)
    scale = float(np.max(np.abs(w)))
    psd = bool(w[0] >= -PSD_RTOL * scale)
    strict = bool(w[0] >= PSD_RTOL * scale)
    witness = None
    if not psd:
        v = V[:, 0]
        pivot = v[np.flatnonzero(np.abs(v) > 1e-12)[0]]
        witness = v * np.sign(pivot) / np.max(np.abs(v))
    return PDCheck(psd, strict, float(w[0]), witness)


def energy_principle(K: KernelLike) -> PrincipleReport:
    pd = check_positive_definite(K)
    witness = None if pd.strict else {"measure": pd.witness, "min_eigenvalue": pd.min_eigenvalue}
    return PrincipleReport(Principle.ENERGY, pd.strict, Method.EXHAUSTIVE, witness=witness)


def _supports(n: int, exhaustive: bool, trials: int, rng):
    if exhaustive:
        for r in range(1, n + 1):
            yield from itertools.combinations(range(n), r)
        return
    total = 2 ** n - 1
    seen: set[tuple[int, ...]] = set()
    target = min(trials, total)
    while len(seen) < target:
        size = int(rng.integers(1, n + 1))
        S = tuple(sorted(rng.choice(n, size=size, replace=False).tolist()))
        if S not in seen:
            seen.add(S)
            yield S


def dilation_constant(K: KernelLike, mode: str = "exhaustive", trials: int = 200,
                      seed: int = 0) -> PrincipleReport:
    """Smallest ``k`` with ``G mu <= 1`` on ``supp mu`` implying ``G mu <= k``.

    For a support ``S`` and a site ``j`` outside it, ``max (G mu)_j`` over
    ``mu >= 0`` on ``S`` with ``G mu <= 1`` on ``S`` is an LP.  ``mode`` is
    ``"exhaustive"`` (all supports, ``n <= 12``) or ``"randomized"``
    (``trials`` distinct random supports).  The report's ``holds`` answers
    the maximum principle, ``k <= 1 + 1e-9``.
    """
    K = as_kernel(K)
    n = K.n
    exhaustive = mode.lower() == "exhaustive"
    if exhaustive and n > EXHAUSTIVE_MAX:
        raise TooLarge(f"exhaustive dilation constant limited to n <= {EXHAUSTIVE_MAX}, got {n}")
    rng = np.random.default_rng(seed)
    G = K.entries
    k, witness, checked = 1.0, None, 0
    for S in _supports(n, exhaustive, trials, rng):
        S = list(S)
        A_ub = G[np.ix_(S, S)]
        ones = np.ones(len(S))
        for j in range(n):
            if j in S:
                continue
            res = solve_lp(G[j, S], A_ub, ones)
            checked += 1
            if res.status is LPStatus.OPTIMAL and res.value > k:
                mu = np.zeros(n)
                mu[S] = res.x
                k = float(res.value)
                witness = {"measure": mu, "violation_site": j, "violation_amount": k - 1.0}
    method = Method.EXHAUSTIVE if exhaustive else Method.RANDOMIZED
    if exhaustive:
        K.flags["dilation_constant_k"] = k
    holds = k <= 1.0 + 1e-9
    return PrincipleReport(Principle.MAXIMUM, holds, method, k=k,
                           witness=None if holds else witness,
                           seed=None if exhaustive else seed, checked=checked)


@dataclass(frozen=True)
class DominationPair:
    holds: bool
    hypothesis_met: bool
    max_violation: float

    def __bool__(self):
        return self.holds


def check_domination_pair(K: KernelLike, mu, omega, tol: float = 1e-9) -> DominationPair:
    """Test one pair: ``G mu <= G omega`` on ``supp mu`` must give it everywhere.

    When the hypothesis fails the pair says nothing; it is reported as
    holding with ``hypothesis_met=False``.
    """
    K = as_kernel(K)
    mu = as_measure(mu, K.n)
    omega = as_measure(omega, K.n)
    diff = K.entries @ mu - K.entries @ omega
    supp = mu > 0
    if np.any(diff[supp] > tol):
        return DominationPair(True, False, float(np.max(diff)))
    worst = float(np.max(diff, initial=0.0))
    return DominationPair(worst <= tol, True, worst)


def _domination_lp(G, S, j):
    """Max of ``(G mu - G omega)_j`` with ``G mu <= G omega`` on ``S``, total mass <= 1."""
    n = G.shape[0]
    s = len(S)
    A_ub = np.zeros((s + 1, s + n))
    A_ub[:s, :s] = G[np.ix_(S, S)]
    A_ub[:s, s:] = -G[S, :]
    A_ub[s, :] = 1.0
    b_ub = np.zeros(s + 1)
    b_ub[s] = 1.0
    c = np.concatenate([G[j, S], -G[j, :]])
    res = solve_lp(c, A_ub, b_ub)
    return res


def search_domination(K: KernelLike, trials: int = 200, tol: float = 1e-8, seed: int = 0,
                      exhaustive: bool | None = None) -> PrincipleReport:
    """Search for a pair violating the domination principle.

    Randomized phase: random ``omega`` and ``A``, with ``mu`` the
    capacitary measure of ``1_A G omega`` on ``A`` (it meets the
    hypothesis by construction), plus random rescaled pairs.  Exact
    phase: an LP per support ``S`` and site ``j`` outside it, either for
    every support (``exhaustive``, ``n <= 12``; the default when
    ``n <= 10``) or for singleton and pair supports when ``n <= 12``.
    Exhaustive success sets ``K.flags["domination_verified"] = True``.
    """
    K = as_kernel(K)
    n = K.n
    G = K.entries
    if exhaustive is None:
        exhaustive = n <= 10
    if exhaustive and n > EXHAUSTIVE_MAX:
        raise TooLarge(f"exhaustive domination search limited to n <= {EXHAUSTIVE_MAX}, got {n}")
    rng = np.random.default_rng(seed)
    checked = 0

    def fail(mu, omega, j, amount, method):
        K.flags["domination_verified"] = False
        witness = {"measure": np.asarray(mu), "omega": np.asarray(omega),
                   "violation_site": int(j), "violation_amount": float(amount)}
        return PrincipleReport(Principle.DOMINATION, False, method, witness=witness,
                               seed=seed, checked=checked)

    psd = K.is_psd
    for _ in range(trials):
        omega = rng.uniform(size=n)
        g_omega = G @ omega
        size = int(rng.integers(1, n + 1))
        A = np.sort(rng.choice(n, size=size, replace=False))
        if psd:
            f = np.zeros(n)
            f[A] = g_omega[A]
            mu = gauss_maximize(K, f, allowed=A).measure
        else:
            mu = np.zeros(n)
            mu[A] = rng.uniform(size=size)
        candidates = [mu]
        # rescale a random measure on A so the hypothesis holds with equality somewhere
        raw = np.zeros(n)
        raw[A] = rng.uniform(size=size)
        g_raw = G @ raw
        candidates.append(raw * np.min(g_omega[A] / g_raw[A]))
        for cand in candidates:
            checked += 1
            diff = G @ cand - g_omega
            supp = cand > 0
            scale = tol * max(float(np.max(g_omega)), 1e-300)
            if np.any(diff[supp] > scale):
                continue
            j = int(np.argmax(diff))
            if diff[j] > scale:
                return fail(cand, omega, j, diff[j], Method.RANDOMIZED)

    if exhaustive:
        supports = (S for r in range(1, n) for S in itertools.combinations(range(n), r))
    elif n <= EXHAUSTIVE_MAX:
        supports = (S for r in (1, 2) for S in itertools.combinations(range(n), r) if r < n)
    else:
        supports = iter(())
    lp_tol = tol * float(np.max(G))
    for S in supports:
        S = list(S)
        for j in range(n):
            if j in S:
                continue
            res = _domination_lp(G, S, j)
            checked += 1
            if res.status is LPStatus.OPTIMAL and res.value > lp_tol:
                mu = np.zeros(n)
                mu[S] = res.x[:len(S)]
                omega = res.x[len(S):]
                return fail(mu, omega, j, res.value,
                            Method.EXHAUSTIVE if exhaustive else Method.RANDOMIZED)
    if exhaustive:
        K.flags["domination_verified"] = True
    return PrincipleReport(Principle.DOMINATION, True,
                           Method.EXHAUSTIVE if exhaustive else Method.RANDOMIZED,
                           seed=seed, checked=checked)


def principle_summary(K: KernelLike, trials: int = 200, seed: int = 0, tol: float = 1e-8) -> list[PrincipleReport]:
    """Energy, maximum and domination reports for one kernel."""
    K = as_kernel(K)
    mode = "exhaustive" if K.n <= EXHAUSTIVE_MAX else "randomized"
    return [
        energy_principle(K),
        dilation_constant(K, mode=mode, trials=trials, seed=seed),
        search_domination(K, trials=trials, tol=tol, seed=seed),
    ]

