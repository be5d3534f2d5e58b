import numpy as np
import pytest

from finpot.errors import TooLarge
from finpot.generators import random_green_kernel, random_spd_kernel
from finpot.kernelspace import Constant, KernelMatrix, build_riesz_kernel, pairwise_distances
from finpot.principles import (
    Method,
    Principle,
    check_domination_pair,
    check_positive_definite,
    dilation_constant,
    energy_principle,
    principle_summary,
    search_domination,
)

TWO = [[2.0, 1.0], [1.0, 2.0]]
SKEWED = [[1.0, 2.0], [2.0, 5.0]]


def test_positive_definite_examples():
    pd = check_positive_definite(TWO)
    assert tuple(pd) == (True, True)
    assert pd.min_eigenvalue == pytest.approx(1.0)
    bad = check_positive_definite([[1, 2], [2, 1]])
    assert not bad.psd and not bad.strict
    assert bad.min_eigenvalue == pytest.approx(-1.0)
    np.testing.assert_allclose(bad.witness, [1, -1])
    assert check_positive_definite(np.eye(4)).strict
    singular = check_positive_definite([[1, 1], [1, 1]])
    assert singular.psd and not singular.strict


def test_energy_principle_report():
    assert energy_principle(TWO).holds
    rep = energy_principle([[1, 2], [2, 1]])
    assert not rep.holds
    assert rep.to_dict()["witness"]["measure"] == pytest.approx([1, -1])


@pytest.mark.parametrize("K, k", [(TWO, 1.0), (np.eye(3), 1.0), (SKEWED, 2.0)])
def test_dilation_constant_examples(K, k):
    rep = dilation_constant(K)
    assert rep.k == pytest.approx(k, abs=1e-12)
    assert rep.holds == (k == 1.0)
    assert rep.principle is Principle.MAXIMUM
    assert rep.method is Method.EXHAUSTIVE


def test_dilation_witness_for_skewed_kernel():
    rep = dilation_constant(SKEWED)
    w = rep.witness
    np.testing.assert_allclose(w["measure"], [1, 0])
    assert w["violation_site"] == 1
    assert w["violation_amount"] == pytest.approx(1.0)


def test_dilation_caches_on_kernel():
    K = KernelMatrix(SKEWED)
    assert K.dilation_constant_k is None
    dilation_constant(K)
    assert K.dilation_constant_k == pytest.approx(2.0)


def test_exhaustive_size_limit():
    with pytest.raises(TooLarge):
        dilation_constant(np.eye(13))
    with pytest.raises(TooLarge):
        search_domination(np.eye(13), exhaustive=True)


@pytest.mark.parametrize("seed", range(12))
def test_randomized_and_exhaustive_agree(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    K = random_spd_kernel(n, rng)
    exact = dilation_constant(K).k
    full = dilation_constant(K, mode="randomized", trials=2 ** n, seed=seed)
    assert full.k == pytest.approx(exact, abs=1e-8)
    partial = dilation_constant(K, mode="randomized", trials=5, seed=seed)
    assert 1.0 <= partial.k <= exact + 1e-12
    assert partial.seed == seed


def test_maximum_principle_implies_psd():
    # random symmetric matrices, many of them indefinite
    rng = np.random.default_rng(2024)
    passing = indefinite = 0
    while passing < 100:
        W = np.triu(rng.uniform(size=(5, 5)) * rng.uniform(0, 1.2), 1)
        K = KernelMatrix(W + W.T + np.diag(rng.uniform(0.5, 1.5, size=5)))
        indefinite += not K.is_psd
        rep = dilation_constant(K)
        assert rep.k >= 1.0
        if rep.k <= 1 + 1e-9:
            passing += 1
            assert check_positive_definite(K).psd
    assert indefinite > 0


def test_domination_pair_examples():
    res = check_domination_pair(TWO, [0.5, 0], [0, 1])
    assert res.holds and res.hypothesis_met
    mu = [0.4, 0.9]
    assert check_domination_pair(TWO, mu, mu)
    res = check_domination_pair(SKEWED, [0, 0.4], [0.4, 0])
    assert res.hypothesis_met is False and res.holds


def test_domination_pair_violation():
    # G mu = (1, .5, .5) and G omega = (1, 2, 0): equal on supp mu, exceeded at site 2
    K = [[1.0, 0.5, 0.5], [0.5, 1.0, 0.0], [0.5, 0.0, 1.0]]
    res = check_domination_pair(K, [1.0, 0.0, 0.0], [0.0, 2.0, 0.0])
    assert res.hypothesis_met and not res.holds
    assert res.max_violation == pytest.approx(0.5)
    assert not search_domination(K).holds


@pytest.mark.parametrize("K", [TWO, np.eye(3), [[2, 1, 1], [1, 2, 1], [1, 1, 2]], SKEWED])
def test_domination_holds_on_small_kernels(K):
    rep = search_domination(K, trials=200)
    assert rep.holds
    assert rep.method is Method.EXHAUSTIVE


def test_skewed_kernel_ground_truth():
    # exhaustive LP oracle: domination holds, maximum principle fails
    K = KernelMatrix(SKEWED)
    assert search_domination(K, exhaustive=True).holds
    assert K.domination_verified is True
    assert not dilation_constant(K).holds


def test_random_spd_kernels_fail_domination_with_valid_witness():
    failures = 0
    for seed in range(10):
        K = random_spd_kernel(6, seed)
        rep = search_domination(K, seed=seed)
        if not rep.holds:
            failures += 1
            w = rep.witness
            pair = check_domination_pair(K, w["measure"], w["omega"], tol=1e-9)
            assert pair.hypothesis_met and not pair.holds
            assert K.domination_verified is False
    assert failures > 0


@pytest.mark.parametrize("seed", range(6))
def test_green_kernels_satisfy_both_principles(seed):
    K = random_green_kernel(4 + seed, seed)
    assert dilation_constant(K).holds
    assert search_domination(K).holds
    assert K.domination_verified is True


def test_randomized_mode_does_not_verify():
    K = random_green_kernel(11, 0)
    rep = search_domination(K, trials=30)
    assert rep.holds and rep.method is Method.RANDOMIZED
    assert K.domination_verified is None


def newtonian_set(seed, alpha, diag_factor):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 11))
    pts = rng.uniform(size=(n, 3))
    D = pairwise_distances(pts)
    off = D[~np.eye(n, dtype=bool)] ** (alpha - 3)
    return build_riesz_kernel(pts, alpha, Constant(diag_factor * off.max()))


@pytest.mark.parametrize("seed", range(10))
def test_newtonian_with_heavy_diagonal_satisfies_domination(seed):
    K = newtonian_set(seed, 2.0, 5.0)
    assert search_domination(K, trials=50, seed=seed, exhaustive=True).holds


@pytest.mark.parametrize("alpha", [2.0, 2.9])
def test_minimal_diagonal_clamp_violations_are_reproducible(alpha):
    for seed in range(5):
        a = search_domination(newtonian_set(seed, alpha, 1.0), trials=50, seed=seed)
        b = search_domination(newtonian_set(seed, alpha, 1.0), trials=50, seed=seed)
        assert not a.holds
        assert a.to_dict() == b.to_dict()
        K = newtonian_set(seed, alpha, 1.0)
        pair = check_domination_pair(K, a.witness["measure"], a.witness["omega"])
        assert pair.hypothesis_met and not pair.holds


def test_principle_summary():
    reports = principle_summary(TWO, trials=20)
    assert [r.principle for r in reports] == [Principle.ENERGY, Principle.MAXIMUM, Principle.DOMINATION]
    assert all(r.holds for r in reports)
    d = reports[1].to_dict()
    assert d["k"] == pytest.approx(1.0) and d["method"] == "Exhaustive"
