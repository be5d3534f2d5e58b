"""Seeded random kernels and measures for property sweeps."""

from __future__ import annotations

import numpy as np

from .kernelspace import KernelMatrix


def rng_from(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_spd_kernel(n: int, seed=None, eps: float = 0.1) -> KernelMatrix:
    """``B.T @ B + eps * I`` with ``B`` uniform on [0, 1]: strictly PD, nonnegative."""
    rng = rng_from(seed)
    B = rng.uniform(size=(n, n))
    return KernelMatrix(B.T @ B + eps * np.eye(n))


def random_measure(n: int, seed=None) -> np.ndarray:
    return rng_from(seed).uniform(size=n)


def random_subset(n: int, seed=None, min_size: int = 1) -> np.ndarray:
    rng = rng_from(seed)
    size = int(rng.integers(min_size, n + 1))
    return np.sort(rng.choice(n, size=size, replace=False))


def random_green_kernel(n: int, seed=None, density: float = 0.6) -> KernelMatrix:
    """Green kernel of a killed random walk on a random weighted graph.

    The inverse of ``L + diag(c)`` (graph Laplacian ``L``, killing rates
    ``c > 0``) is a symmetric inverse M-matrix, the usual source of
    kernels satisfying the domination and maximum principles.
    """
    rng = rng_from(seed)
    W = rng.uniform(size=(n, n)) * (rng.uniform(size=(n, n)) < density)
    W = np.triu(W, 1)
    W = W + W.T
    M = np.diag(W.sum(axis=1) + rng.uniform(0.1, 1.0, size=n)) - W
    G = np.linalg.inv(M)
    return KernelMatrix(np.maximum(0.5 * (G + G.T), 0.0))
