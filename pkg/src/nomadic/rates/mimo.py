"""CEO compression with several receive antennas per agent.

Agent ``i`` rotates its observation by the left singular vectors of
``H_i = v_i Gamma_i u_i`` and quantizes the ``m_i = rank(Gamma_i)`` useful
components with noise covariance ``Lambda_i``. The rate is

    min_S E[ sum_{i not in S} (C_i - log2|I + Lambda_i^-1|)
             + log2|I + (P/t) diag((I + Lambda_i)^-1)_{i in S} G_S G_S*| ],

where ``G_S`` stacks the rows ``Gamma_i u_i`` of the agents in ``S``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .._terms import CeoTerms
from ..channel import ChannelEnsemble, CovarianceQ, SystemConfig
from ..errors import SingularLambda
from ..linalg import gram
from ..solvers import all_subsets, maxmin_box_batch, min_over_subsets
from ._types import RateReport

__all__ = ["rotated_rows", "mimo_agents_rate", "mimo_agents_optimize"]


def rotated_rows(config: SystemConfig, H):
    """Stack ``Gamma_i u_i`` for every agent and sample.

    Parameters
    ----------
    config : SystemConfig
    H : (n, rows, t) ndarray

    Returns
    -------
    G : (n, sum m_i, t) ndarray
    groups : list of list of int
        Rows of ``G`` owned by each agent.
    """
    blocks, groups, start = [], [], 0
    for sl in config.row_slices():
        Hi = H[:, sl, :]
        m = min(Hi.shape[1], config.t)
        U, s, Vh = np.linalg.svd(Hi, full_matrices=False)
        # v_i* H_i = Gamma_i u_i; keep the m leading components
        blocks.append(s[:, :m, None] * Vh[:, :m, :])
        groups.append(list(range(start, start + m)))
        start += m
    return np.concatenate(blocks, axis=1), groups


def _lambda_stack(Lam, n, m):
    L = np.asarray(Lam, dtype=complex)
    if L.ndim == 2:
        L = np.broadcast_to(L, (n, m, m))
    if L.shape != (n, m, m):
        raise SingularLambda(f"Lambda has shape {L.shape}, expected ({n}, {m}, {m})")
    if np.max(np.abs(L - np.conj(np.swapaxes(L, -1, -2)))) > 1e-10:
        raise SingularLambda("Lambda must be Hermitian")
    ev = np.linalg.eigvalsh(L)
    if np.any(ev <= 0):
        raise SingularLambda("Lambda must be positive definite (finite compression rate)")
    return L


def mimo_agents_rate(config: SystemConfig, ensemble: ChannelEnsemble,
                     Lam: Sequence) -> RateReport:
    """Evaluate the multi-antenna CEO rate at given quantization covariances.

    Parameters
    ----------
    config : SystemConfig
    ensemble : ChannelEnsemble
    Lam : sequence of array_like
        One entry per agent, shape ``(m_i, m_i)`` (same for every sample) or
        ``(n, m_i, m_i)``.

    Raises
    ------
    SingularLambda
        If some ``Lambda_i`` is not Hermitian positive definite.
    """
    ensemble.compatible(config)
    n = len(ensemble)
    G, groups = rotated_rows(config, ensemble.H)
    A = gram(G) * (config.P / config.t)
    r = config.r
    link_cost = np.empty((n, r))
    factors = []
    for i, g in enumerate(groups):
        L = _lambda_stack(Lam[i], n, len(g))
        eye = np.eye(len(g))
        _, ld = np.linalg.slogdet(eye + np.linalg.inv(L))
        link_cost[:, i] = ld.real / np.log(2.0)
        factors.append(np.linalg.inv(eye + L))
    C = config.C
    vals = {}
    for S in all_subsets(r):
        comp = [i for i in range(r) if i not in S]
        v = np.sum(C[comp]) - np.sum(link_cost[:, comp], axis=1)
        if S:
            rows = [j for i in S for j in groups[i]]
            Dm = np.zeros((n, len(rows), len(rows)), dtype=complex)
            pos = 0
            for i in S:
                m = len(groups[i])
                Dm[:, pos:pos + m, pos:pos + m] = factors[i]
                pos += m
            As = A[:, rows][:, :, rows]
            _, ld = np.linalg.slogdet(np.eye(len(rows)) + Dm @ As)
            v = v + ld.real / np.log(2.0)
        vals[S] = float(np.mean(v))
    best = min_over_subsets(lambda S: vals[S], r)
    return RateReport(rate=best.value, scheme="ceo_mimo", subset=best.argmin_subset,
                      q_mean=tuple(float(v) for v in link_cost.mean(axis=0)),
                      Q=CovarianceQ.isotropic(config.t, config.P).diag,
                      seed=ensemble.seed, n_samples=n,
                      diagnostics={"m": tuple(len(g) for g in groups)})


def mimo_agents_optimize(config: SystemConfig, ensemble: ChannelEnsemble):
    """Optimize channel-independent diagonal ``Lambda_i`` (in the rotated basis).

    Each diagonal entry is parametrized by a rate ``q = log2(1 + 1/lambda)``,
    which turns the problem into the concave max-min problem of the
    single-antenna case with one rate per useful component.

    Returns
    -------
    report : RateReport
        Re-evaluated with :func:`mimo_agents_rate` at the optimum.
    Lam : list of ndarray
        Optimal diagonal covariances.
    """
    ensemble.compatible(config)
    G, groups = rotated_rows(config, ensemble.H)
    A = gram(G) * (config.P / config.t)
    terms = CeoTerms(A, config.C, average=True, groups=groups)
    hi = np.concatenate([np.full(len(g), config.C[i] + 10.0) for i, g in enumerate(groups)])
    # keep q strictly positive so Lambda stays finite
    lo = np.full(terms.dim, 1e-9)
    x0 = np.minimum(hi, 0.5)[None, :]
    q, _ = maxmin_box_batch(terms, lo, hi, x0=x0)
    q = q[0]
    Lam = [np.diag(1.0 / np.expm1(q[g] * np.log(2.0))) for g in groups]
    rep = mimo_agents_rate(config, ensemble, Lam)
    rep.scheme = "ceo_mimo_optimized"
    rep.diagnostics["q_components"] = tuple(float(v) for v in q)
    return rep, Lam
