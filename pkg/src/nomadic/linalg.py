"""Hermitian linear-algebra kernels.

All logarithms returned here are base 2. Functions accept a single matrix
or a stack of matrices with shape ``(..., k, k)``.
"""

from __future__ import annotations

import numpy as np

from .errors import NonHermitian, NotPSD

__all__ = [
    "HERMITIAN_TOL",
    "PSD_TOL",
    "check_hermitian",
    "logdet_ipm",
    "logdet_ipm_fast",
    "logdet_fast",
    "eigvals_hermitian",
    "svd",
    "gram",
    "inv_small",
]

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-9

_INV_LN2 = 1.0 / np.log(2.0)


def check_hermitian(M, tol=HERMITIAN_TOL):
    """Raise :class:`NonHermitian` unless ``M`` equals its conjugate transpose.

    Parameters
    ----------
    M : (..., k, k) array_like
    tol : float
        Elementwise absolute tolerance.

    Returns
    -------
    numpy.ndarray
        ``M`` as an array, with the Hermitian part taken to remove roundoff.
    """
    M = np.asarray(M)
    if M.ndim < 2 or M.shape[-1] != M.shape[-2]:
        raise NonHermitian(f"expected square matrices, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise NonHermitian("matrix has non-finite entries")
    MH = np.conj(np.swapaxes(M, -1, -2))
    if M.size and np.max(np.abs(M - MH)) > tol:
        raise NonHermitian("matrix is not Hermitian within tolerance")
    return 0.5 * (M + MH)


def eigvals_hermitian(M):
    """Real eigenvalues of a Hermitian matrix, sorted in descending order.

    Parameters
    ----------
    M : (..., k, k) array_like
        Hermitian matrix or stack.

    Returns
    -------
    (..., k) ndarray
    """
    M = check_hermitian(M)
    return np.linalg.eigvalsh(M)[..., ::-1]


def logdet_ipm(M):
    """Compute ``log2 det(I + M)`` for Hermitian positive semidefinite ``M``.

    Eigenvalues in ``[-1e-9, 0)`` are treated as roundoff and clipped to
    zero. The threshold scales with the largest eigenvalue when that
    exceeds one, so large-power Gram matrices are not rejected for
    relative roundoff.

    Parameters
    ----------
    M : (..., k, k) array_like

    Returns
    -------
    float or ndarray
        Nonnegative log-determinant in bits.

    Raises
    ------
    NonHermitian
        If ``M`` is not Hermitian.
    NotPSD
        If an eigenvalue lies below the tolerance.
    """
    lam = eigvals_hermitian(M)
    scale = np.maximum(1.0, lam[..., :1]) if lam.shape[-1] else 1.0
    if np.any(lam < -PSD_TOL * scale):
        raise NotPSD(f"smallest eigenvalue {np.min(lam):.3e} is negative")
    lam = np.clip(lam, 0.0, None)
    out = np.sum(np.log1p(lam), axis=-1) * _INV_LN2
    return float(out) if np.ndim(out) == 0 else out


def logdet_fast(M):
    """``log2 det(M)`` for a stack of Hermitian positive definite matrices.

    No validation is done. Sizes up to 3 use closed forms, larger sizes a
    Cholesky factorization. Singular inputs give ``-inf``.

    Parameters
    ----------
    M : (..., k, k) ndarray

    Returns
    -------
    (...) ndarray
    """
    k = M.shape[-1]
    if k == 0:
        return np.zeros(M.shape[:-2])
    if k == 1:
        d = M[..., 0, 0].real
    elif k == 2:
        d = (M[..., 0, 0].real * M[..., 1, 1].real
             - np.abs(M[..., 0, 1]) ** 2)
    elif k == 3:
        a, b, c = M[..., 0, 0].real, M[..., 1, 1].real, M[..., 2, 2].real
        x, y, z = M[..., 0, 1], M[..., 0, 2], M[..., 1, 2]
        d = (a * b * c + 2.0 * np.real(x * z * np.conj(y))
             - a * np.abs(z) ** 2 - b * np.abs(y) ** 2 - c * np.abs(x) ** 2)
    else:
        sign, ld = np.linalg.slogdet(M)
        out = ld * _INV_LN2
        return np.where(sign.real > 0, out, -np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(d > 0, np.log2(np.where(d > 0, d, 1.0)), -np.inf)


def logdet_ipm_fast(M):
    """``log2 det(I + M)`` for a stack of Hermitian PSD matrices, unchecked."""
    k = M.shape[-1]
    if k == 1:
        return np.log1p(np.maximum(M[..., 0, 0].real, 0.0)) * _INV_LN2
    if k == 2:
        a = M[..., 0, 0].real
        b = M[..., 1, 1].real
        d = a * b - np.abs(M[..., 0, 1]) ** 2
        # det(I+M) = 1 + tr + det, accurate when entries are small
        return np.log1p(np.maximum(a + b + d, 0.0)) * _INV_LN2
    return logdet_fast(M + np.eye(k))


def inv_small(M):
    """Inverse of a stack of small nonsingular matrices (closed form up to 2)."""
    k = M.shape[-1]
    if k == 1:
        return 1.0 / M
    if k == 2:
        a, b = M[..., 0, 0], M[..., 0, 1]
        c, d = M[..., 1, 0], M[..., 1, 1]
        det = a * d - b * c
        out = np.empty_like(M)
        out[..., 0, 0] = d / det
        out[..., 0, 1] = -b / det
        out[..., 1, 0] = -c / det
        out[..., 1, 1] = a / det
        return out
    return np.linalg.inv(M)


def svd(M):
    """Singular value decomposition ``M = U_left @ diag(s) @ U_right``.

    Parameters
    ----------
    M : (m, n) array_like

    Returns
    -------
    U_left : (m, m) ndarray
        Unitary.
    s : (min(m, n),) ndarray
        Singular values in descending order.
    U_right : (n, n) ndarray
        Unitary.
    """
    M = np.asarray(M, dtype=complex)
    U, s, Vh = np.linalg.svd(M, full_matrices=True)
    return U, s, Vh


def gram(H, Q=None):
    """Return ``H Q H*`` with ``Q`` diagonal (given as a vector) or identity.

    Parameters
    ----------
    H : (..., r, t) array_like
    Q : (..., t) array_like, optional
        Diagonal of the input covariance; identity when omitted.

    Returns
    -------
    (..., r, r) ndarray
        Hermitian by construction.
    """
    H = np.asarray(H)
    HQ = H if Q is None else H * np.asarray(Q)[..., None, :]
    G = HQ @ np.conj(np.swapaxes(H, -1, -2))
    return 0.5 * (G + np.conj(np.swapaxes(G, -1, -2)))
