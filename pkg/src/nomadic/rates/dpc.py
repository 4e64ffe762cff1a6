"""Combined destination decoding and dirty-paper coding (evaluation only).

At given ``(perm, Q, B_i, q_i)`` the expression is

    min_S E{ sum_{i in S} (C_i - q_i)
             + log2|I + diag(1 - 2^-q)_{S^c} H_{S^c} (Q - sum_j B_j) H_{S^c}*|
             + sum_{i in S^c} log2( (1 + H_i K_i H_i*) / (1 + H_i (K_i - B_i) H_i*) ) },

with ``K_i = Q - sum of B_j over the agents encoded before i``. Agents
encoded first see every later private signal as noise. No maximization is
attempted.
"""

from __future__ import annotations

import numpy as np

from ..channel import ChannelEnsemble, SystemConfig
from ..solvers import all_subsets, min_over_subsets
from ._types import DpcParams, RateReport

__all__ = ["dpc_terms", "dpc_rate_eval"]


def _quad(H, M):
    """``h M h*`` for every row ``h`` of every sample: ``(n, r)``."""
    return np.real(np.einsum("nit,nts,nis->ni", H, M, np.conj(H))) if M.ndim == 3 else \
        np.real(np.einsum("nit,nits,nis->ni", H, M, np.conj(H)))


def dpc_terms(H, C, params: DpcParams):
    """Per-sample value of every subset term, shape ``(n, 2**r)``."""
    n, r, t = H.shape
    C = np.asarray(C, dtype=float)
    Q, B, q = params.Q, params.B, params.q
    common = Q - B.sum(axis=1)
    d = -np.expm1(-q * np.log(2.0))
    # per-agent DPC gain with the encoding order of perm
    K = np.empty((n, r, t, t), dtype=complex)
    running = Q.copy()
    for i in params.perm:
        K[:, i] = running
        running = running - B[:, i]
    num = 1.0 + _quad(H, K)
    den = 1.0 + _quad(H, K - B)
    priv = np.log2(num / den)
    Acom = H @ common @ np.conj(np.swapaxes(H, -1, -2))
    out = np.empty((n, 2 ** r))
    for j, S in enumerate(all_subsets(r)):
        Sc = [i for i in range(r) if i not in S]
        v = np.sum(C[list(S)] - q[:, list(S)], axis=1)
        if Sc:
            sd = np.sqrt(d[:, Sc])
            M = sd[:, :, None] * Acom[:, Sc][:, :, Sc] * sd[:, None, :]
            _, ld = np.linalg.slogdet(np.eye(len(Sc)) + M)
            v = v + ld.real / np.log(2.0) + priv[:, Sc].sum(axis=1)
        out[:, j] = v
    return out


def dpc_rate_eval(config: SystemConfig, ensemble: ChannelEnsemble,
                  params: DpcParams) -> RateReport:
    """Evaluate the DPC expression at user-supplied parameters.

    Raises
    ------
    InfeasibleCovariance
        Naming the first sample whose covariances are not admissible.
    """
    ensemble.compatible(config)
    params.check(config.P)
    vals = dpc_terms(ensemble.H, config.C, params).mean(axis=0)
    subsets = all_subsets(config.r)
    best = min_over_subsets(lambda S: vals[subsets.index(S)], config.r)
    return RateReport(rate=best.value, scheme="dpc", subset=best.argmin_subset,
                      q_mean=tuple(float(v) for v in params.q.mean(axis=0)),
                      Q=tuple(float(v) for v in np.mean(np.real(np.diagonal(params.Q, axis1=1, axis2=2)), axis=0)),
                      seed=ensemble.seed, n_samples=len(ensemble),
                      diagnostics={"perm": " ".join(str(i + 1) for i in params.perm)})
