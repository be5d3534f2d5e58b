import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from finpot.capacity import (
    capacitary_measure,
    capacity,
    check_duality,
    dual_capacity,
    g_capacity,
    g_capacity_measure,
    set_capacity,
)
from finpot.errors import NotStrictlyPositiveDefinite
from finpot.generators import random_measure, random_spd_kernel, random_subset
from finpot.kernelspace import energy_norm, indicator, potential
from finpot.principles import dilation_constant

TWO = [[2.0, 1.0], [1.0, 2.0]]
SQRT_HALF = np.sqrt(0.5)


def test_two_point_capacity_values():
    assert capacity(TWO, [1, 0]) == pytest.approx(SQRT_HALF, abs=1e-12)
    assert capacity(TWO, [0, 0]) == 0.0
    assert set_capacity(TWO, [0, 1]) == pytest.approx(np.sqrt(2 / 3), abs=1e-12)
    assert set_capacity(TWO, []) == 0.0
    assert dual_capacity(TWO, [1, 0]) == pytest.approx(SQRT_HALF, abs=1e-12)
    assert dual_capacity(TWO, [0, 0]) == 0.0


def test_identity_set_capacity():
    assert set_capacity(np.eye(5), [0, 2, 3]) == pytest.approx(np.sqrt(3))
    assert g_capacity(np.eye(3), [0]) == pytest.approx(1.0)


def test_capacitary_measure_examples():
    np.testing.assert_allclose(capacitary_measure(TWO, [1, 1]), [1 / 3, 1 / 3], atol=1e-15)
    np.testing.assert_allclose(capacitary_measure(np.eye(3), [0.2, 0, 4]), [0.2, 0, 4])
    mu = capacitary_measure(TWO, [1, 0])
    np.testing.assert_allclose(mu, [0.5, 0], atol=1e-15)
    assert mu[1] == 0.0


def test_capacitary_measure_requires_strict():
    with pytest.raises(NotStrictlyPositiveDefinite):
        capacitary_measure([[1, 1], [1, 1]], [1, 1])


def test_g_capacity_two_point():
    value, nu = g_capacity_measure(TWO, [0, 1])
    assert value == pytest.approx(2 / 3, abs=1e-14)
    np.testing.assert_allclose(nu, [1 / 3, 1 / 3], atol=1e-14)
    assert g_capacity(TWO, []) == 0.0


@pytest.mark.parametrize("seed", range(20))
def test_g_capacity_matches_highs(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 10))
    K = random_spd_kernel(n, rng)
    A = random_subset(n, rng)
    ref = linprog(-indicator(n, A), A_ub=K.entries, b_ub=np.ones(n), bounds=(0, None), method="highs")
    assert g_capacity(K, A) == pytest.approx(-ref.fun, rel=1e-9)


def test_check_duality_examples():
    rep = check_duality(TWO, [1, 0])
    assert rep.duality_gap <= 1e-9
    assert rep.passed
    zero = check_duality(TWO, [0, 0])
    assert zero.duality_gap == 0.0
    with_set = check_duality(TWO, None, A=[0, 1])
    assert with_set.gcapa == pytest.approx(2 / 3)
    d = with_set.to_dict()
    assert set(d) >= {"c", "gamma", "gcapa", "capacitary_measure", "duality_gap"}


@pytest.mark.parametrize("seed", range(50))
def test_duality_on_8x8(seed):
    rng = np.random.default_rng(100 + seed)
    K = random_spd_kernel(8, rng)
    rep = check_duality(K, random_measure(8, rng))
    assert rep.duality_gap <= 1e-7 * max(rep.c, 1)


@pytest.mark.parametrize("seed", range(20))
def test_homogeneity_and_subadditivity(seed):
    rng = np.random.default_rng(200 + seed)
    n = int(rng.integers(2, 15))
    K = random_spd_kernel(n, rng)
    f1, f2 = random_measure(n, rng), random_measure(n, rng)
    c1, c2 = capacity(K, f1), capacity(K, f2)
    for t in (0.5, 2.0, 10.0):
        assert capacity(K, t * f1) == pytest.approx(t * c1, rel=1e-10)
    assert capacity(K, f1 + f2) <= c1 + c2 + 1e-9
    assert c1 <= capacity(K, f1 + f2) + 1e-10


@pytest.mark.parametrize("seed", range(20))
def test_capacity_of_potential(seed):
    rng = np.random.default_rng(300 + seed)
    n = int(rng.integers(2, 15))
    K = random_spd_kernel(n, rng)
    mu = random_measure(n, rng)
    norm = energy_norm(K, mu)
    assert abs(capacity(K, potential(K, mu)) - norm) <= 1e-7 * max(norm, 1)
    assert abs(dual_capacity(K, potential(K, mu)) - norm) <= 1e-7 * max(norm, 1)


@pytest.mark.parametrize("seed", range(15))
def test_normalized_capacitary_measure_attains_capacity(seed):
    rng = np.random.default_rng(400 + seed)
    n = int(rng.integers(2, 11))
    K = random_spd_kernel(n, rng)
    f = random_measure(n, rng)
    mu = capacitary_measure(K, f)
    nu = mu / energy_norm(K, mu)
    assert f @ nu == pytest.approx(capacity(K, f), abs=1e-8)


def test_normalized_measure_beats_sampled_unit_measures():
    rng = np.random.default_rng(7)
    K = random_spd_kernel(5, rng)
    f = random_measure(5, rng)
    c = capacity(K, f)
    for _ in range(2000):
        nu = rng.uniform(size=5) * (rng.uniform(size=5) < 0.6)
        if nu.any():
            assert f @ (nu / energy_norm(K, nu)) <= c + 1e-12


def test_order_continuity_from_below():
    rng = np.random.default_rng(11)
    K = random_spd_kernel(7, rng)
    f = random_measure(7, rng)
    g = rng.uniform(0.01, 1.0, size=7)
    prev = 0.0
    target = capacity(K, f)
    for m in itertools.count(1):
        fm = np.minimum(f, m * g)
        cm = capacity(K, fm)
        assert cm >= prev - 1e-10
        prev = cm
        if np.array_equal(fm, f):
            assert abs(cm - target) <= 1e-6
            break


@pytest.mark.parametrize("seed", range(10))
def test_gcapa_inequalities(seed):
    rng = np.random.default_rng(500 + seed)
    n = int(rng.integers(2, 7))
    K = random_spd_kernel(n, rng)
    k = dilation_constant(K).k
    A = random_subset(n, rng)
    c_sq = set_capacity(K, A) ** 2
    gc = g_capacity(K, A)
    assert c_sq >= gc - 1e-9
    assert c_sq <= 2 * k * gc + 1e-9
