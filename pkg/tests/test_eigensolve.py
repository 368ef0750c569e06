import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rrbfpu.errors import ZeroFunctionValue
from rrbfpu.eigensolve import build_pencil, smallest_eigpair_dacg, smallest_eigpair_dense


def random_spd(n, seed, cond=10.0):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return (Q * np.geomspace(1.0, cond, n)) @ Q.T


def random_values(n, seed):
    rng = np.random.default_rng(seed + 1)
    return rng.uniform(0.5, 3.0, n) * rng.choice([-1, 1], n)


def oracle_pencil(A, f):
    """Explicit Lam and Theta built from the defining formulas."""
    s = f @ f
    D = np.diag(f)
    Ainv = np.linalg.inv(A)
    return D @ Ainv @ D / s + Ainv, D @ D / s + np.eye(len(f))


def power_iteration(A, iters=5000):
    v = np.ones(len(A))
    for _ in range(iters):
        v = A @ v
        v /= np.linalg.norm(v)
    return v


def test_identity_pencil():
    P = build_pencil(np.eye(2), [1.0, 1.0])
    lam, theta = P.dense()
    assert np.allclose(lam, 1.5 * np.eye(2))
    assert np.allclose(theta, 1.5 * np.eye(2))


def test_two_by_two_reduces_to_inverse_matrix():
    A = np.array([[1.0, 0.5], [0.5, 1.0]])
    res = smallest_eigpair_dense(build_pencil(A, [1.0, 1.0]))
    assert res.value == pytest.approx(2.0 / 3.0, abs=1e-14)
    assert abs(res.vector[0] - res.vector[1]) < 1e-14
    it = smallest_eigpair_dacg(build_pencil(A, [1.0, 1.0]))
    assert it.value == pytest.approx(2.0 / 3.0, abs=1e-8)


def test_identity_matrix_eigenvalue_one():
    f = np.array([1.0, -2.0, 0.5, 4.0])
    assert smallest_eigpair_dense(build_pencil(np.eye(4), f)).value == pytest.approx(1.0)


def test_operator_action_matches_dense_formation():
    A = random_spd(20, 0)
    f = random_values(20, 0)
    P = build_pencil(A, f)
    lam, theta = oracle_pencil(A, f)
    q = np.random.default_rng(9).standard_normal(20)
    assert np.allclose(P.apply_lambda(q), lam @ q, rtol=1e-10, atol=1e-12)
    assert np.allclose(P.apply_theta(q), theta @ q, rtol=1e-12)
    assert np.allclose(P.dense()[0], lam, rtol=1e-10, atol=1e-12)


def test_zero_value_rejected():
    with pytest.raises(ZeroFunctionValue):
        build_pencil(np.eye(3), [1.0, 0.0, 2.0])


def test_dense_rayleigh_quotient_on_30x30():
    A = random_spd(30, 4, cond=1e3)
    P = build_pencil(A, random_values(30, 4))
    res = smallest_eigpair_dense(P)
    q = res.vector
    assert (q @ P.apply_lambda(q)) / (q @ P.apply_theta(q)) == pytest.approx(res.value, rel=1e-12)
    lam, theta = oracle_pencil(A, random_values(30, 4))
    ref = np.min(np.linalg.eigvals(np.linalg.solve(theta, lam)).real)
    assert res.value == pytest.approx(ref, rel=1e-9)


def test_constant_values_give_dominant_eigenvector():
    A = random_spd(25, 5)
    res = smallest_eigpair_dacg(build_pencil(A, np.full(25, 2.0)))
    assert res.method == "dacg"
    v = power_iteration(A)
    cos = abs(res.vector @ v) / np.linalg.norm(res.vector)
    assert cos >= 1 - 1e-8
    assert res.value == pytest.approx(1.0 / np.linalg.eigvalsh(A)[-1], rel=1e-8)


def test_exact_start_vector_converges_immediately():
    A = random_spd(15, 6)
    P = build_pencil(A, random_values(15, 6))
    exact = smallest_eigpair_dense(P).vector
    assert smallest_eigpair_dacg(P, x0=exact).iterations <= 2


def test_fallback_when_iterations_run_out():
    A = random_spd(40, 7, cond=1e6)
    P = build_pencil(A, random_values(40, 7))
    res = smallest_eigpair_dacg(P, max_iter=3)
    assert res.method == "dense-fallback"
    assert res.value == pytest.approx(smallest_eigpair_dense(P).value, rel=1e-12)


def test_invalid_tolerance():
    with pytest.raises(ValueError):
        smallest_eigpair_dacg(build_pencil(np.eye(2), [1.0, 2.0]), tol=0.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 40), st.integers(0, 10 ** 6))
def test_dacg_agrees_with_dense(n, seed):
    A = random_spd(n, seed)
    P = build_pencil(A, random_values(n, seed))
    it = smallest_eigpair_dacg(P, tol=1e-8)
    ref = smallest_eigpair_dense(P)
    assert it.value > 0
    assert it.value == pytest.approx(ref.value, rel=1e-8)
    if it.method == "dacg":
        gap = np.diff(np.linalg.eigvalsh(P.dense()[0] / np.sqrt(P.theta_diag)[:, None]
                                         / np.sqrt(P.theta_diag)[None, :]))[0]
        if gap > 1e-3 * ref.value:
            assert abs(it.vector @ P.apply_theta(ref.vector)) >= 1 - 1e-6
    h = np.array(it.history)
    assert np.all(np.diff(h) <= 1e-12 * np.abs(h[:-1]))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 30), st.integers(0, 10 ** 6),
       st.floats(0.01, 100.0), st.booleans())
def test_eigenvalue_invariant_under_value_scaling(n, seed, s, flip):
    A = random_spd(n, seed, cond=100.0)
    f = random_values(n, seed)
    s = -s if flip else s
    a = smallest_eigpair_dense(build_pencil(A, f)).value
    b = smallest_eigpair_dense(build_pencil(A, s * f)).value
    assert b == pytest.approx(a, rel=1e-10)
    assert a > 0
