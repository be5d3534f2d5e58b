"""Finite spaces, kernels, measures and potentials.

A kernel on ``n`` sites is a symmetric ``n x n`` matrix of finite
nonnegative reals with a strictly positive diagonal.  Measures and
potential fields are nonnegative length-``n`` float arrays; they are
returned read-only so they can be shared freely between solvers.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import (
    AlphaOutOfRange,
    DimensionMismatch,
    DuplicatePoints,
    IndexOutOfRange,
    NegativeEntry,
    NonfiniteEntry,
    NonpositiveDiagonal,
    SymmetryViolation,
    ValidationError,
)

SYMMETRY_RTOL = 1e-12
# relative to the spectral norm
PSD_RTOL = 1e-10


@dataclass(frozen=True)
class Space:
    """A finite set of ``n`` sites, optionally embedded in R^d."""

    n: int
    coords: np.ndarray | None = None
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValidationError(f"a space needs at least one site, got n={self.n}")
        if self.coords is not None:
            pts = _as_points(self.coords)
            if pts.shape[0] != self.n:
                raise DimensionMismatch(f"{pts.shape[0]} coordinate rows for n={self.n}")
            _check_distinct(pts)
            pts.setflags(write=False)
            object.__setattr__(self, "coords", pts)
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != self.n:
                raise DimensionMismatch(f"{len(labels)} labels for n={self.n}")
            object.__setattr__(self, "labels", labels)


class KernelMatrix:
    """Validated symmetric kernel matrix.

    The entries are symmetrized as ``(G + G.T) / 2`` after validation.
    Spectral properties are computed lazily; ``flags`` holds results that
    other modules establish about the kernel (``dilation_constant_k`` and
    ``domination_verified``).
    """

    def __init__(self, entries):
        arr = np.array(entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise DimensionMismatch(f"kernel must be a nonempty square matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            i, j = np.argwhere(~np.isfinite(arr))[0]
            raise NonfiniteEntry(f"entry ({i}, {j}) is not finite")
        if np.any(arr < 0):
            i, j = np.argwhere(arr < 0)[0]
            raise NegativeEntry(f"entry ({i}, {j}) = {arr[i, j]!r} is negative")
        asym = np.max(np.abs(arr - arr.T))
        if asym > SYMMETRY_RTOL * np.max(arr):
            raise SymmetryViolation(f"max |G[i,j] - G[j,i]| = {asym:.3g}")
        diag = np.diag(arr)
        if np.any(diag <= 0):
            i = int(np.argmin(diag))
            raise NonpositiveDiagonal(f"diagonal entry {i} = {diag[i]!r} is not positive")
        arr = 0.5 * (arr + arr.T)
        arr.setflags(write=False)
        self._entries = arr
        self.flags: dict = {}

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def n(self) -> int:
        return self._entries.shape[0]

    @property
    def shape(self):
        return self._entries.shape

    def __len__(self):
        return self.n

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._entries
        return self._entries.astype(dtype)

    def __repr__(self):
        return f"KernelMatrix(n={self.n})"

    @property
    def is_symmetric(self) -> bool:
        return True

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self._entries)

    @cached_property
    def spectral_norm(self) -> float:
        return float(np.max(np.abs(self.eigenvalues)))

    @property
    def is_psd(self) -> bool:
        return bool(self.eigenvalues[0] >= -PSD_RTOL * self.spectral_norm)

    @property
    def is_strictly_pd(self) -> bool:
        return bool(self.eigenvalues[0] >= PSD_RTOL * self.spectral_norm)

    @property
    def dilation_constant_k(self) -> float | None:
        return self.flags.get("dilation_constant_k")

    @property
    def domination_verified(self) -> bool | None:
        """True (exhaustively verified), False (falsified) or None (unknown)."""
        return self.flags.get("domination_verified")


KernelLike = Union[KernelMatrix, np.ndarray, Sequence[Sequence[float]]]


def build_kernel_from_matrix(entries) -> KernelMatrix:
    return KernelMatrix(entries)


def as_kernel(K: KernelLike) -> KernelMatrix:
    return K if isinstance(K, KernelMatrix) else KernelMatrix(K)


@dataclass(frozen=True)
class Constant:
    """Diagonal rule: every diagonal entry equals ``value``."""

    value: float

    def diagonal(self, points, alpha):
        if not (np.isfinite(self.value) and self.value > 0):
            raise ValidationError(f"constant diagonal must be positive, got {self.value!r}")
        return float(self.value)


@dataclass(frozen=True)
class CellSelfEnergy:
    """Diagonal rule: ``h ** (alpha - d)`` for a nominal cell size ``h``.

    With ``h=None`` the cell size defaults to :func:`default_cell_size`.
    """

    h: float | None = None

    def diagonal(self, points, alpha):
        d = points.shape[1]
        h = default_cell_size(points) if self.h is None else float(self.h)
        if not (np.isfinite(h) and h > 0):
            raise ValidationError(f"cell size must be positive, got {h!r}")
        return float(h ** (alpha - d))


DiagRule = Union[Constant, CellSelfEnergy]


def _as_points(points) -> np.ndarray:
    pts = np.array(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise DimensionMismatch(f"points must be an n x d array, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise NonfiniteEntry("point coordinates must be finite")
    return pts


def pairwise_distances(points) -> np.ndarray:
    pts = _as_points(points)
    diff = pts[:, None, :] - pts[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def _check_distinct(pts: np.ndarray) -> np.ndarray:
    D = pairwise_distances(pts)
    off = D + np.diag(np.full(len(pts), np.inf))
    if len(pts) > 1 and np.min(off) == 0:
        i, j = np.argwhere(off == 0)[0]
        raise DuplicatePoints(f"points {i} and {j} coincide")
    return D


def mean_nearest_neighbor_distance(points) -> float:
    pts = _as_points(points)
    if len(pts) < 2:
        raise ValidationError("nearest-neighbor distance needs at least two points")
    D = pairwise_distances(pts)
    np.fill_diagonal(D, np.inf)
    return float(D.min(axis=1).mean())


def default_cell_size(points) -> float:
    """Half the mean nearest-neighbor distance, i.e. the radius of a cell.

    The full nearest-neighbor distance makes Newtonian kernels on dense
    surface clouds indefinite.  A single point gets cell size 1.
    """
    pts = _as_points(points)
    if len(pts) < 2:
        return 1.0
    return 0.5 * mean_nearest_neighbor_distance(pts)


def build_riesz_kernel(points, alpha: float, diag_rule: DiagRule | None = None) -> KernelMatrix:
    """Riesz kernel ``|x - y| ** (alpha - d)`` on a point cloud in R^d.

    The diagonal (infinite for the true kernel) is set by ``diag_rule``
    and every off-diagonal entry is clamped to that diagonal value.
    """
    pts = _as_points(points)
    d = pts.shape[1]
    alpha = float(alpha)
    if not (0 < alpha < d):
        raise AlphaOutOfRange(f"alpha must lie in (0, {d}), got {alpha!r}")
    D = _check_distinct(pts)
    rule = CellSelfEnergy() if diag_rule is None else diag_rule
    diag = rule.diagonal(pts, alpha)
    with np.errstate(divide="ignore"):
        G = D ** (alpha - d)
    G = np.minimum(G, diag)
    np.fill_diagonal(G, diag)
    return KernelMatrix(G)


def fibonacci_sphere(n: int, radius: float = 1.0, center=None) -> np.ndarray:
    """Quasi-uniform points on a sphere in R^3 (golden-angle spiral)."""
    if n < 1:
        raise ValidationError(f"need at least one point, got {n}")
    i = np.arange(n) + 0.5
    polar = np.arccos(1.0 - 2.0 * i / n)
    azimuth = np.pi * (1.0 + 5.0 ** 0.5) * i
    pts = np.column_stack([
        np.cos(azimuth) * np.sin(polar),
        np.sin(azimuth) * np.sin(polar),
        np.cos(polar),
    ]) * radius
    if center is not None:
        pts = pts + np.asarray(center, dtype=float)
    return pts


def _size(space) -> int:
    if isinstance(space, (Space, KernelMatrix)):
        return space.n
    return int(space)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def as_measure(weights, n: int | None = None) -> np.ndarray:
    """Validate a nonnegative weight vector; returns a read-only copy."""
    w = np.array(weights, dtype=float).reshape(-1)
    if n is not None and w.shape[0] != n:
        raise DimensionMismatch(f"expected length {n}, got {w.shape[0]}")
    if not np.all(np.isfinite(w)):
        raise NonfiniteEntry("weights must be finite")
    if np.any(w < 0):
        i = int(np.argmin(w))
        raise NegativeEntry(f"weight {i} = {w[i]!r} is negative")
    return _frozen(w)


as_field = as_measure


def support(mu, eps: float = 0.0) -> np.ndarray:
    return np.flatnonzero(np.asarray(mu) > eps)


def as_index_set(A: Iterable[int] | np.ndarray | None, n: int) -> np.ndarray:
    """Sorted unique site indices; ``None`` means the whole space."""
    if A is None:
        return np.arange(n)
    arr = np.asarray(A if isinstance(A, np.ndarray) else list(A))
    if arr.dtype == bool:
        if arr.shape != (n,):
            raise DimensionMismatch(f"mask of shape {arr.shape} for n={n}")
        return np.flatnonzero(arr)
    arr = arr.reshape(-1)
    if arr.size == 0:
        return np.zeros(0, dtype=np.intp)
    if arr.dtype.kind not in "iu":
        if arr.dtype.kind != "f" or not np.all(np.mod(arr, 1) == 0):
            raise ValidationError(f"site indices must be integers: {arr!r}")
    arr = arr.astype(np.intp)
    bad = arr[(arr < 0) | (arr >= n)]
    if bad.size:
        raise IndexOutOfRange(f"index {int(bad[0])} outside 0..{n - 1}")
    return np.unique(arr)


def _check_dims(K: KernelMatrix, *vectors):
    for v in vectors:
        if v.shape[0] != K.n:
            raise DimensionMismatch(f"vector of length {v.shape[0]} for kernel of size {K.n}")


def potential(K: KernelLike, mu) -> np.ndarray:
    K = as_kernel(K)
    mu = as_measure(mu)
    _check_dims(K, mu)
    return _frozen(K.entries @ mu)


def mutual_energy(K: KernelLike, mu, nu) -> float:
    K = as_kernel(K)
    mu, nu = as_measure(mu), as_measure(nu)
    _check_dims(K, mu, nu)
    # summed in both orders so the result is exactly symmetric
    return float(0.5 * (mu @ (K.entries @ nu)) + 0.5 * (nu @ (K.entries @ mu)))


def energy(K: KernelLike, mu) -> float:
    return mutual_energy(K, mu, mu)


def energy_norm(K: KernelLike, mu) -> float:
    return float(np.sqrt(max(energy(K, mu), 0.0)))


def indicator(space, A) -> np.ndarray:
    n = _size(space)
    idx = as_index_set(A, n)
    out = np.zeros(n)
    out[idx] = 1.0
    return _frozen(out)


def restrict_field(f, A) -> np.ndarray:
    f = as_field(f)
    idx = as_index_set(A, f.shape[0])
    out = np.zeros_like(f)
    out[idx] = f[idx]
    return _frozen(out)
