"""Objective terms with analytic derivatives in the compression rates ``q``.

The central quantity is, for an agent subset ``S``,

    L_S(q) = log2 det(I + diag(1 - 2^-q)_S A_SS),

where ``A = H Q H*``. With ``x_i = 2^-q_i`` and ``B = A_SS (I + D A_SS)^-1``
(Hermitian), the derivatives are

    dL/dq_i        = x_i B_ii
    d2L/dq_i dq_j  = -ln2 (delta_ij x_i B_ii + x_i x_j |B_ij|^2),

so ``L_S`` is concave in ``q``.
"""

from __future__ import annotations

import numpy as np

from .linalg import inv_small, logdet_ipm_fast
from .solvers import all_subsets

LN2 = np.log(2.0)

__all__ = ["subset_logdet", "CeoTerms", "ceo_values"]


def _sub(A, S):
    S = list(S)
    return A[..., S, :][..., :, S]


def subset_logdet(A, q, S, derivs=False):
    """``L_S(q)`` for a stack of Gram matrices.

    Parameters
    ----------
    A : (k, r, r) ndarray
        Hermitian PSD.
    q : (k, r) ndarray
        Compression rates; only the ``S`` entries are used.
    S : tuple of int
        Nonempty subset.
    derivs : bool

    Returns
    -------
    value : (k,) ndarray
    grad : (k, |S|) ndarray, if ``derivs``
    hess : (k, |S|, |S|) ndarray, if ``derivs``
    """
    S = list(S)
    As = _sub(A, S)
    xs = np.exp2(-q[:, S])
    d = 1.0 - xs
    sd = np.sqrt(d)
    val = logdet_ipm_fast(sd[:, :, None] * As * sd[:, None, :])
    if not derivs:
        return val
    k = len(S)
    if k == 1:
        a = As[:, 0, 0].real
        b = a / (1.0 + d[:, 0] * a)
        grad = (xs[:, 0] * b)[:, None]
        hess = (-LN2 * (xs[:, 0] * b + (xs[:, 0] * b) ** 2))[:, None, None]
        return val, grad, hess
    M = np.eye(k) + d[:, :, None] * As
    B = As @ inv_small(M)
    Bd = np.real(np.diagonal(B, axis1=1, axis2=2))
    grad = xs * Bd
    hess = -LN2 * (xs[:, :, None] * xs[:, None, :] * np.abs(B) ** 2)
    hess[:, np.arange(k), np.arange(k)] -= LN2 * grad
    return val, grad, hess


class CeoTerms:
    """Min-over-subsets terms of the CEO objective.

    For each agent subset ``S`` (in :func:`all_subsets` order),

        g_S(q) = sum_{i not in S} (C_i - sum_{j in rows(i)} q_j) + L_{rows(S)}(q).

    With single-antenna agents ``rows(i) = {i}``; multi-antenna agents own
    several rows of ``A`` and one rate per row.

    Parameters
    ----------
    A : (n, R, R) ndarray
        Gram matrices ``H Q H*`` (``R`` rows in total).
    C : (r,) array_like
    average : bool
        If true, every problem shares ``q`` across all ``n`` samples and the
        terms are averaged over the ensemble. Otherwise problem ``j`` uses
        sample ``j`` only.
    subsets : sequence of tuple, optional
        Agent subsets to include; all of them by default.
    groups : sequence of sequence of int, optional
        Rows owned by each agent; singletons by default.
    """

    def __init__(self, A, C, average=False, subsets=None, groups=None):
        self.A = A
        self.C = np.asarray(C, dtype=float)
        self.r = self.C.size
        self.average = average
        self.subsets = all_subsets(self.r) if subsets is None else tuple(subsets)
        if groups is None:
            groups = [[i] for i in range(self.r)]
        self.groups = [list(g) for g in groups]
        self.dim = sum(len(g) for g in self.groups)
        self._rows = [sorted(j for i in S for j in self.groups[i]) for S in self.subsets]
        self._comp_rows = [sorted(j for i in range(self.r) if i not in S for j in self.groups[i])
                           for S in self.subsets]
        self._comp_cap = [float(sum(self.C[i] for i in range(self.r) if i not in S))
                          for S in self.subsets]

    def _gram(self, idx):
        return self.A if self.average else self.A[idx]

    def __call__(self, q, idx, derivs):
        k, d = q.shape
        A = self._gram(idx)
        if self.average:
            n = A.shape[0]
            qq = np.broadcast_to(q[:, None, :], (k, n, d)).reshape(k * n, d)
            AA = np.broadcast_to(A[None], (k,) + A.shape).reshape(k * n, d, d)
        else:
            qq, AA = q, A
        K = len(self.subsets)
        vals = np.empty((qq.shape[0], K))
        if derivs:
            G = np.zeros((qq.shape[0], K, d))
            H = np.zeros((qq.shape[0], K, d, d))
        for j in range(K):
            rows, comp = self._rows[j], self._comp_rows[j]
            link = self._comp_cap[j] - np.sum(qq[:, comp], axis=1)
            if rows:
                out = subset_logdet(AA, qq, rows, derivs)
                if derivs:
                    v, g, h = out
                    G[:, j, rows] = g
                    H[:, j, np.array(rows)[:, None], np.array(rows)[None, :]] = h
                else:
                    v = out
            else:
                v = 0.0
            vals[:, j] = link + v
            if derivs:
                G[:, j, comp] -= 1.0
        if self.average:
            vals = vals.reshape(k, -1, K).mean(axis=1)
            if derivs:
                G = G.reshape(k, -1, K, d).mean(axis=1)
                H = H.reshape(k, -1, K, d, d).mean(axis=1)
        return (vals, G, H) if derivs else vals


def ceo_values(A, q, C, subsets=None):
    """Per-sample subset terms ``g_S`` for per-sample ``q`` (no derivatives).

    Returns
    -------
    (n, K) ndarray
    """
    t = CeoTerms(A, C, average=False, subsets=subsets)
    return t(q, np.arange(q.shape[0]), False)
