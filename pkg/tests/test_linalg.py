import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nomadic.errors import NonHermitian, NotPSD
from nomadic.linalg import (
    check_hermitian,
    eigvals_hermitian,
    gram,
    inv_small,
    logdet_fast,
    logdet_ipm,
    logdet_ipm_fast,
    svd,
)


def cn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def test_logdet_ipm_zero_and_diagonal():
    assert logdet_ipm(np.zeros((2, 2))) == 0.0
    assert logdet_ipm(np.diag([1.0, 3.0])) == pytest.approx(3.0, abs=1e-12)


def test_logdet_ipm_matches_eigen_oracle(rng):
    H = cn(rng, 3, 3)
    M = H @ H.conj().T
    oracle = np.sum(np.log2(1 + np.linalg.eigvals(M).real))
    assert logdet_ipm(M) == pytest.approx(oracle, abs=1e-9)


def test_logdet_ipm_errors():
    with pytest.raises(NonHermitian):
        logdet_ipm(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(NotPSD):
        logdet_ipm(np.diag([1.0, -1e-3]))
    # roundoff-sized negative eigenvalues are clipped, not rejected
    assert logdet_ipm(np.diag([1.0, -1e-12])) == pytest.approx(1.0)


def test_eigvals_examples(rng):
    assert np.allclose(eigvals_hermitian(np.eye(2)), [1, 1])
    assert np.allclose(eigvals_hermitian(np.diag([2.0, 5.0, 0.0])), [5, 2, 0])
    H = cn(rng, 2, 2)
    lam = eigvals_hermitian(H @ H.conj().T)
    assert np.sum(lam) == pytest.approx(np.linalg.norm(H) ** 2, abs=1e-9)
    assert np.all(np.diff(lam) <= 0)


def test_svd_examples(rng):
    _, s, _ = svd(np.eye(2))
    assert np.allclose(s, [1, 1])
    a, b = cn(rng, 3), cn(rng, 2)
    _, s, _ = svd(np.outer(a, b.conj()))
    assert s[0] == pytest.approx(np.linalg.norm(a) * np.linalg.norm(b), abs=1e-9)
    assert s[1] == pytest.approx(0.0, abs=1e-9)
    M = cn(rng, 3, 2)
    U, s, Vh = svd(M)
    S = np.zeros((3, 2))
    S[:2, :2] = np.diag(s)
    assert np.linalg.norm(M - U @ S @ Vh) < 1e-8 * np.linalg.norm(M)
    assert np.allclose(np.sort(s ** 2), np.sort(np.linalg.eigvalsh(M.conj().T @ M)), atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**31 - 1))
def test_sylvester_identity(r, t, seed):
    rng = np.random.default_rng(seed)
    A, B = cn(rng, r, t), cn(rng, t, r)
    A2 = A @ A.conj().T
    # det(I + A A*) = det(I + A* A), both Hermitian
    assert logdet_ipm(A2) == pytest.approx(logdet_ipm(A.conj().T @ A), abs=1e-8)
    lhs = np.linalg.slogdet(np.eye(r) + A @ B)[1]
    rhs = np.linalg.slogdet(np.eye(t) + B @ A)[1]
    assert lhs == pytest.approx(rhs, abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**31 - 1))
def test_monotone_in_psd_order(k, seed):
    rng = np.random.default_rng(seed)
    H = cn(rng, k, k)
    M = H @ H.conj().T
    v = cn(rng, k)
    assert logdet_ipm(M + np.outer(v, v.conj())) >= logdet_ipm(M) - 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**31 - 1))
def test_sum_of_eigenvalue_logs(k, seed):
    rng = np.random.default_rng(seed)
    H = cn(rng, k, k + 1)
    M = H @ H.conj().T
    lam = eigvals_hermitian(M)
    assert logdet_ipm(M) == pytest.approx(np.sum(np.log2(1 + lam)), abs=1e-8)


@pytest.mark.parametrize("k", [1, 2, 3, 4, 6])
def test_fast_kernels_agree(rng, k):
    H = cn(rng, 50, k, k)
    M = H @ np.conj(np.swapaxes(H, -1, -2))
    ref = np.linalg.slogdet(np.eye(k) + M)[1] / np.log(2)
    assert np.allclose(logdet_ipm_fast(M), ref, atol=1e-10)
    assert np.allclose(logdet_fast(np.eye(k) + M), ref, atol=1e-10)
    assert np.allclose(inv_small(np.eye(k) + M) @ (np.eye(k) + M), np.eye(k), atol=1e-9)


def test_logdet_fast_singular_is_minus_inf():
    assert logdet_fast(np.zeros((2, 2))) == -np.inf


def test_gram(rng):
    H = cn(rng, 4, 3, 2)
    p = np.array([2.0, 0.5])
    G = gram(H, p)
    ref = H @ np.diag(p) @ np.conj(np.swapaxes(H, -1, -2))
    assert np.allclose(G, ref)
    check_hermitian(G)
