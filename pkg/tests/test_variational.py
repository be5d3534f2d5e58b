import numpy as np
import pytest
from scipy.linalg import cholesky, solve_triangular
from scipy.optimize import minimize, nnls

from finpot.errors import NotPositiveSemidefinite, NotStrictlyPositiveDefinite, TooLarge
from finpot.generators import random_measure, random_spd_kernel, random_subset
from finpot.variational import (
    Status,
    brute_force_capacitary,
    gauss_maximize,
    gauss_value,
    min_norm_dual,
    verify_kkt,
)

TWO = [[2.0, 1.0], [1.0, 2.0]]


def nnls_gauss(K, f, allowed=None):
    """Independent route: with K = L L^T the Gauss problem is an NNLS in L^T nu."""
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    idx = np.arange(n) if allowed is None else np.asarray(allowed)
    L = cholesky(K, lower=True)
    b = solve_triangular(L, np.asarray(f, dtype=float), lower=True)
    x, _ = nnls(L.T[:, idx], b)
    nu = np.zeros(n)
    nu[idx] = x
    return nu, 2 * f @ nu - nu @ K @ nu


def test_two_point_gauss():
    rep = gauss_maximize(TWO, [1, 0])
    assert rep.status is Status.CONVERGED
    np.testing.assert_allclose(rep.measure, [0.5, 0], atol=1e-15)
    assert rep.measure[1] == 0.0
    assert rep.value == pytest.approx(0.5, abs=1e-12)


def test_zero_field_short_circuit():
    rep = gauss_maximize(TWO, [0, 0])
    np.testing.assert_array_equal(rep.measure, [0, 0])
    assert rep.value == 0.0
    assert rep.iterations == 0


def test_potential_field_recovers_measure():
    # f = G delta_1 = (1, 2); the optimum is delta_1 with value ||delta_1||^2 = 2
    rep = gauss_maximize(TWO, [1, 2])
    np.testing.assert_allclose(rep.measure, [0, 1], atol=1e-14)
    assert rep.value == pytest.approx(2.0, abs=1e-12)
    assert brute_force_capacitary(TWO, [1, 2]).value == pytest.approx(2.0, abs=1e-12)


def test_identity_decoupled():
    rep = gauss_maximize(np.eye(3), [1, 1, 1])
    np.testing.assert_allclose(rep.measure, [1, 1, 1])
    assert rep.value == pytest.approx(3.0)
    rep = gauss_maximize(np.eye(4), [0.3, 2.0, 0.0, 1.5])
    np.testing.assert_allclose(rep.measure, [0.3, 2.0, 0.0, 1.5])


def test_allowed_restriction():
    rep = gauss_maximize(TWO, [1, 1], allowed=[1])
    np.testing.assert_allclose(rep.measure, [0, 0.5])
    assert rep.value == pytest.approx(0.5)


def test_rejects_indefinite():
    with pytest.raises(NotPositiveSemidefinite):
        gauss_maximize([[1, 2], [2, 1]], [1, 1])


def test_singular_psd_kernel_uses_fallback():
    # G nu = (s, s) with s = nu0 + nu1; the optimum has s = 1 and value 1
    rep = gauss_maximize([[1, 1], [1, 1]], [1, 1])
    assert rep.converged
    assert rep.value == pytest.approx(1.0, abs=1e-9)
    assert rep.measure.sum() == pytest.approx(1.0, abs=1e-9)


def test_singular_psd_larger():
    B = np.random.default_rng(3).uniform(size=(3, 6))
    K = B.T @ B  # rank 3, nonnegative
    f = np.random.default_rng(4).uniform(size=6)
    rep = gauss_maximize(K, f)
    assert rep.converged
    assert rep.kkt_residuals.worst() <= 1e-8 * max(f.max(), 1)
    # the value is unique even though the maximizer is not
    ref = minimize(lambda x: x @ K @ x - 2 * f @ x, np.zeros(6), jac=lambda x: 2 * (K @ x - f),
                   bounds=[(0, None)] * 6, method="L-BFGS-B", options={"ftol": 1e-15, "gtol": 1e-12})
    assert rep.value == pytest.approx(-ref.fun, rel=1e-7)
    assert rep.value == pytest.approx(gauss_value(K, f, rep.measure), abs=1e-12)


def test_verify_kkt_examples():
    exact = brute_force_capacitary(TWO, [1, 0]).measure
    assert verify_kkt(TWO, [1, 0], exact).worst() <= 1e-9
    assert verify_kkt(TWO, [0, 0], [0, 0]).worst() == 0.0
    rep = verify_kkt(TWO, [1, 0], [1, 0])
    assert rep.max_support_gap == pytest.approx(1.0)


def test_min_norm_dual_examples():
    rep = min_norm_dual(TWO, [1, 0])
    np.testing.assert_allclose(rep.measure, [0.5, 0], atol=1e-15)
    assert rep.value == pytest.approx(np.sqrt(0.5), abs=1e-12)
    assert min_norm_dual(TWO, [1, 1]).value == pytest.approx(np.sqrt(2 / 3), abs=1e-12)
    zero = min_norm_dual(TWO, [0, 0])
    assert zero.value == 0.0
    np.testing.assert_array_equal(zero.measure, [0, 0])


def test_min_norm_dual_requires_strict_pd():
    with pytest.raises(NotStrictlyPositiveDefinite):
        min_norm_dual([[1, 1], [1, 1]], [1, 1])


def test_brute_force_size_limit():
    with pytest.raises(TooLarge):
        brute_force_capacitary(np.eye(15), np.ones(15))


def test_brute_force_two_point():
    rep = brute_force_capacitary(TWO, [1, 0])
    np.testing.assert_allclose(rep.measure, [0.5, 0])
    assert rep.value == pytest.approx(0.5)


@pytest.mark.parametrize("seed", range(40))
def test_gauss_matches_nnls_route(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 25))
    K = random_spd_kernel(n, rng)
    f = random_measure(n, rng)
    A = random_subset(n, rng)
    rep = gauss_maximize(K, f, allowed=A)
    nu, value = nnls_gauss(K.entries, f, A)
    assert rep.value == pytest.approx(value, rel=1e-9, abs=1e-12)
    np.testing.assert_allclose(rep.measure, nu, atol=1e-7)


@pytest.mark.parametrize("seed", range(20))
def test_brute_force_matches_nnls_route(seed):
    rng = np.random.default_rng(1000 + seed)
    n = int(rng.integers(2, 9))
    K = random_spd_kernel(n, rng)
    f = random_measure(n, rng)
    _, value = nnls_gauss(K.entries, f)
    assert brute_force_capacitary(K, f).value == pytest.approx(value, rel=1e-9)


@pytest.mark.parametrize("seed", range(20))
def test_brute_force_six_site_self_consistency(seed):
    rng = np.random.default_rng(2000 + seed)
    K = random_spd_kernel(6, rng)
    f = random_measure(6, rng)
    a, b = gauss_maximize(K, f), brute_force_capacitary(K, f)
    assert abs(a.value - b.value) <= 1e-9
    np.testing.assert_allclose(a.measure, b.measure, atol=1e-8)


@pytest.mark.parametrize("seed", range(20))
def test_unique_from_different_starts(seed):
    rng = np.random.default_rng(3000 + seed)
    n = int(rng.integers(3, 15))
    K = random_spd_kernel(n, rng)
    f = random_measure(n, rng)
    a = gauss_maximize(K, f)
    b = gauss_maximize(K, f, initial_support=np.arange(n))
    c = gauss_maximize(K, f, initial_support=[n - 1])
    np.testing.assert_allclose(a.measure, b.measure, atol=1e-7)
    np.testing.assert_allclose(a.measure, c.measure, atol=1e-7)


@pytest.mark.parametrize("seed", range(20))
def test_value_monotone_in_field(seed):
    rng = np.random.default_rng(4000 + seed)
    n = int(rng.integers(2, 12))
    K = random_spd_kernel(n, rng)
    f1 = random_measure(n, rng)
    f2 = f1 + random_measure(n, rng) * (rng.uniform(size=n) < 0.5)
    v1, v2 = gauss_maximize(K, f1).value, gauss_maximize(K, f2).value
    assert v1 <= v2 + 1e-10
    assert np.isfinite(v2)


@pytest.mark.parametrize("seed", range(20))
def test_converged_reports_meet_tolerance(seed):
    rng = np.random.default_rng(5000 + seed)
    n = int(rng.integers(2, 30))
    K = random_spd_kernel(n, rng)
    f = 10 * random_measure(n, rng) * (rng.uniform(size=n) < 0.7)
    rep = gauss_maximize(K, f)
    assert rep.converged
    assert rep.kkt_residuals.worst() <= rep.tol
    assert rep.measure[f == 0].sum() == 0.0


@pytest.mark.parametrize("seed", range(20))
def test_primal_dual_consistency(seed):
    rng = np.random.default_rng(6000 + seed)
    n = int(rng.integers(2, 30))
    K = random_spd_kernel(n, rng)
    f = random_measure(n, rng)
    c = np.sqrt(gauss_maximize(K, f).value)
    assert min_norm_dual(K, f).value == pytest.approx(c, rel=1e-7)


def test_max_iterations_reported_not_raised():
    rng = np.random.default_rng(7)
    K = random_spd_kernel(12, rng)
    rep = gauss_maximize(K, random_measure(12, rng), max_iter=1)
    assert rep.status in (Status.MAX_ITERATIONS, Status.CONVERGED)
    assert rep.to_dict()["status"] == rep.status.value
