"""CEO compression: quantization followed by binning across agents.

With ``A = H Q H*`` and per-sample rates ``q``, the scheme delivers

    R = min_S E[ sum_{i not in S} (C_i - q_i) + log2 det(I + diag(1 - 2^-q)_S A_SS) ].

The joint optimizer maximizes this over one ``q`` per (sample, agent) via
the Lagrangian dual: for weights ``lam`` on the subsets the inner problem
splits into independent concave problems, one per sample, and the outer
problem is a small convex program on the simplex.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize

from .._terms import CeoTerms, ceo_values, subset_logdet
from ..channel import ChannelEnsemble, CovarianceQ, SystemConfig
from ..errors import BadRange
from ..linalg import gram
from ..solvers import (
    all_subsets,
    golden_max,
    maximize_box_batch,
    maximize_simplex_batch,
    maxmin_box_batch,
    min_over_subsets,
)
from ._types import CompressionProfile, RateReport

__all__ = [
    "Q_HEADROOM",
    "ceo_subset_terms",
    "ceo_rate",
    "ceo_constant_q",
    "ceo_symmetric_constant_q",
    "ceo_optimize_joint",
    "ceo_per_sample_values",
    "ceo_optimize_per_channel",
    "ceo_outage_values",
    "ceo_outage",
    "ceo_asymptotic_limit",
]

Q_HEADROOM = 10.0  # bits above C_i allowed for q_i in the joint search


def _covariance(config, Q):
    if Q is None:
        return CovarianceQ.isotropic(config.t, config.P)
    return Q.check(config.P)


def ceo_subset_terms(config: SystemConfig, ensemble: ChannelEnsemble,
                     q: CompressionProfile, Q: CovarianceQ | None = None):
    """Ensemble-averaged CEO term for every subset, in :func:`all_subsets` order.

    Returns
    -------
    subsets : tuple
    values : (2**r,) ndarray
    """
    ensemble.compatible(config)
    Q = _covariance(config, Q)
    A = gram(ensemble.H, Q.array)
    qq = np.ascontiguousarray(q.broadcast(len(ensemble)))
    subsets = all_subsets(config.r)
    return subsets, ceo_values(A, qq, config.C, subsets).mean(axis=0)


def _report(config, ensemble, q, Q, scheme, **extra):
    subsets, vals = ceo_subset_terms(config, ensemble, q, Q)
    best = min_over_subsets(lambda S: vals[subsets.index(S)], config.r)
    qq = q.broadcast(len(ensemble))
    qm = qq.mean(axis=0)
    diags = {"negative_link": bool(np.any(qm > config.C + 1e-12))}
    diags.update(extra.pop("diagnostics", {}))
    return RateReport(rate=best.value, scheme=scheme, subset=best.argmin_subset,
                      q_mean=tuple(float(v) for v in qm), Q=Q.diag,
                      seed=ensemble.seed, n_samples=len(ensemble),
                      diagnostics=diags, profile=CompressionProfile(qq), **extra)


def ceo_rate(config: SystemConfig, ensemble: ChannelEnsemble, q: CompressionProfile,
             Q: CovarianceQ | None = None) -> RateReport:
    """CEO rate at given compression rates, with ``Q = (P/t) I`` by default.

    The report flags ``negative_link`` when some ``E q_i`` exceeds ``C_i``;
    the corresponding link terms are then negative but still evaluated.
    """
    ensemble.compatible(config)
    return _report(config, ensemble, q, _covariance(config, Q), "ceo")


def _constant_q(A, C, x0=None):
    r = C.size
    terms = CeoTerms(A, C, average=True)
    x0 = np.full((1, r), 0.5) * np.minimum(C, 2.0) if x0 is None else np.atleast_2d(x0)
    x, v = maxmin_box_batch(terms, np.zeros(r), C + Q_HEADROOM, x0=x0)
    return x[0], float(v[0])


def ceo_constant_q(config: SystemConfig, ensemble: ChannelEnsemble,
                   Q: CovarianceQ | None = None) -> RateReport:
    """CEO rate restricted to channel-independent rates ``q_i``.

    This is a concave max-min problem in ``r`` variables.
    """
    ensemble.compatible(config)
    Q = _covariance(config, Q)
    A = gram(ensemble.H, Q.array)
    q, _ = _constant_q(A, config.C)
    return _report(config, ensemble, CompressionProfile(q, len(ensemble)), Q,
                   "ceo_constant_q")


def ceo_symmetric_constant_q(config: SystemConfig, ensemble: ChannelEnsemble,
                             tol: float = 1e-9) -> RateReport:
    """Equal-rate CEO value for many exchangeable agents with equal links.

    With equal capacities and a common ``q``, the expected term of a subset
    depends only on its size ``k``. Each size is represented by the first
    ``k`` agents:

        R = max_q min_k [(r - k)(C - q) + E log2 det(I + (1 - 2^-q) A_k)].

    The eigenvalues of every leading block ``A_k`` are computed once, so the
    scalar search is cheap for large ``r``.

    Raises
    ------
    BadRange
        If the capacities differ.
    """
    ensemble.compatible(config)
    if not config.symmetric:
        raise BadRange("equal link capacities are required")
    r = config.r
    C = config.capacities[0]
    Q = CovarianceQ.isotropic(config.t, config.P)
    A = gram(ensemble.H, Q.array)
    eig = [np.clip(np.linalg.eigvalsh(A[:, :k, :k]), 0.0, None) for k in range(1, r + 1)]

    def terms(q):
        d = -np.expm1(-q * np.log(2.0))
        vals = [r * (C - q)]
        for k in range(1, r + 1):
            vals.append((r - k) * (C - q) + np.mean(np.sum(np.log2(1 + d * eig[k - 1]), axis=1)))
        return np.array(vals)

    q, v = golden_max(lambda q: float(np.min(terms(q))), 0.0, C + Q_HEADROOM, tol=tol)
    vals = terms(q)
    k = int(np.argmin(vals))
    return RateReport(rate=float(vals[k]), scheme="ceo_symmetric_constant_q",
                      subset=tuple(range(k)), q_mean=(float(q),) * r, Q=Q.diag,
                      seed=ensemble.seed, n_samples=len(ensemble),
                      diagnostics={"term_sizes": r + 1})


def ceo_optimize_joint(config: SystemConfig, ensemble: ChannelEnsemble,
                       Q: CovarianceQ | None = None, max_outer: int = 300
                       ) -> RateReport:
    """Maximize the CEO rate over one ``q_i`` per sample and agent.

    Parameters
    ----------
    config : SystemConfig
    ensemble : ChannelEnsemble
    Q : CovarianceQ, optional
        ``(P/t) I`` by default, which is optimal for this objective.
    max_outer : int
        Iteration cap of the outer simplex problem.

    Returns
    -------
    RateReport
        ``diagnostics`` holds the dual value, the primal-dual gap, the
        constant-``q`` value and which candidate won.

    Notes
    -----
    For subset weights ``lam`` the dual function is

        d(lam) = E max_q sum_S lam_S g_S(q, H),

    whose gradient is the vector of averaged terms at the inner maximizer.
    The inner problems are solved by projected Newton per sample, the outer
    problem by SLSQP. The reported rate is the primal objective
    ``min_S E g_S`` at the recovered ``q``, so it is always achievable; the
    constant-``q`` solution is kept if it is better.
    """
    ensemble.compatible(config)
    Q = _covariance(config, Q)
    r, n = config.r, len(ensemble)
    C = config.C
    if np.all(C == 0):
        return _report(config, ensemble, CompressionProfile(np.zeros((n, r))), Q,
                       "ceo_joint", diagnostics={"candidate": "zero"})
    A = gram(ensemble.H, Q.array)
    terms = CeoTerms(A, C)
    lo, hi = np.zeros(r), C + Q_HEADROOM
    qc, vc = _constant_q(A, C)
    K = len(terms.subsets)
    idx_all = np.arange(n)
    state = {"q": np.tile(qc, (n, 1)), "key": None, "out": None, "calls": 0}

    def inner(lam):
        key = lam.tobytes()
        if state["key"] == key:
            return state["out"]
        lam_c = np.clip(lam, 0.0, None)

        def fun(x, idx, derivs):
            if not derivs:
                return terms(x, idx, False) @ lam_c
            v, G, Hs = terms(x, idx, True)
            return v @ lam_c, np.einsum("kjn,j->kn", G, lam_c), np.einsum("kjab,j->kab", Hs, lam_c)

        q, _ = maximize_box_batch(fun, state["q"], lo, hi)
        state["q"] = q
        state["calls"] += 1
        Gbar = terms(q, idx_all, False).mean(axis=0)
        out = (float(lam_c @ Gbar), Gbar, q)
        state["key"], state["out"] = key, out
        return out

    cons = [{"type": "eq", "fun": lambda l: np.sum(l) - 1.0, "jac": lambda l: np.ones(K)}]
    res = minimize(lambda l: inner(l)[0], np.full(K, 1.0 / K), jac=lambda l: inner(l)[1],
                   method="SLSQP", bounds=[(0.0, 1.0)] * K, constraints=cons,
                   options={"ftol": 1e-13, "maxiter": max_outer})
    lam = np.clip(res.x, 0.0, None)
    lam /= lam.sum()
    dual, Gbar, q = inner(lam)
    primal = float(Gbar.min())
    if primal >= vc:
        profile, cand = CompressionProfile(q), "joint"
    else:
        profile, cand = CompressionProfile(qc, n), "constant_q"
    rep = _report(config, ensemble, profile, Q, "ceo_joint",
                  diagnostics={"dual": dual, "gap": dual - max(primal, vc),
                               "constant_q_rate": vc, "candidate": cand})
    rep.iterations = state["calls"]
    return rep


def ceo_per_sample_values(config: SystemConfig, H, p, C_box=None, x0=None,
                          mu_start: float = 1.0):
    """Per-sample ``max_q min_S g_S`` for given per-sample power vectors.

    Parameters
    ----------
    config : SystemConfig
    H : (n, r, t) ndarray
    p : (n, t) ndarray
        Diagonal of ``Q`` for each sample.
    C_box : (r,) array_like, optional
        Upper bound on ``q``; ``C + 10`` by default.
    x0 : (n, r) ndarray, optional
        Warm start.

    Returns
    -------
    values : (n,) ndarray
    q : (n, r) ndarray
    """
    C = config.C
    hi = C + Q_HEADROOM if C_box is None else np.asarray(C_box, dtype=float)
    A = gram(H, p)
    terms = CeoTerms(A, C)
    n = H.shape[0]
    if x0 is None:
        x0 = np.tile(0.5 * np.minimum(C, 2.0), (n, 1))
    q, v = maxmin_box_batch(terms, np.zeros(config.r), hi, x0=x0, mu_start=mu_start)
    return v, q


class _WarmSolver:
    """Per-sample solver that reuses the last maximizer as a start."""

    def __init__(self, config, H, C_box=None):
        self.config, self.H, self.C_box = config, H, C_box
        self.q = None
        self.calls = 0

    def __call__(self, p):
        mu = 1.0 if self.q is None else 1e-2
        v, q = ceo_per_sample_values(self.config, self.H, p, self.C_box, self.q, mu)
        self.q = q
        self.calls += 1
        return v, q


def ceo_optimize_per_channel(config: SystemConfig, ensemble: ChannelEnsemble,
                             Q: CovarianceQ | None = None, n_starts: int = 5
                             ) -> RateReport:
    """CEO rate with ``q`` optimized separately for every channel sample.

    A single diagonal ``Q`` is searched for the whole ensemble (unless
    given); for each candidate the per-sample max-min problems are solved
    and their values averaged.
    """
    ensemble.compatible(config)
    H = ensemble.H
    n, t = len(ensemble), config.t
    solver = _WarmSolver(config, H)
    if Q is None:
        def obj(p):
            return np.array([solver(np.tile(p[0], (n, 1)))[0].mean()])

        res = maximize_simplex_batch(obj, 1, t, config.P, n_starts=n_starts,
                                     seed=ensemble.seed)
        Q = CovarianceQ(res.p[0])
        start = int(res.start[0])
    else:
        Q.check(config.P)
        start = -1
    v, q = solver(np.tile(Q.array, (n, 1)))
    # per-sample objective; the subset is the most frequent per-sample minimizer
    vals = ceo_values(gram(H, Q.array), q, config.C)
    arg = np.argmin(vals, axis=1)
    subsets = all_subsets(config.r)
    common = subsets[int(np.bincount(arg, minlength=len(subsets)).argmax())]
    return RateReport(rate=float(np.mean(vals.min(axis=1))), scheme="ceo_per_channel",
                      subset=common, q_mean=tuple(float(x) for x in q.mean(axis=0)),
                      Q=Q.diag, iterations=solver.calls, seed=ensemble.seed,
                      n_samples=n, diagnostics={"Q_start": start},
                      profile=CompressionProfile(q))


def ceo_outage_values(config: SystemConfig, ensemble: ChannelEnsemble,
                      Q: CovarianceQ | None = None):
    """Per-sample ``max over (Q, q in [0, C]) of min_S`` CEO value.

    Returns
    -------
    (n,) ndarray
    """
    ensemble.compatible(config)
    H = ensemble.H
    n = len(ensemble)
    solver = _WarmSolver(config, H, C_box=config.C)
    if Q is not None:
        return solver(np.tile(Q.check(config.P).array, (n, 1)))[0]
    res = maximize_simplex_batch(lambda p: solver(p)[0], n, config.t, config.P,
                                 seed=ensemble.seed)
    return res.value


def ceo_outage(config: SystemConfig, ensemble: ChannelEnsemble, R: float,
               Q: CovarianceQ | None = None) -> float:
    """Fraction of samples whose best CEO value falls below ``R``."""
    return float(np.mean(ceo_outage_values(config, ensemble, Q) < R))


def ceo_asymptotic_limit(P: float, C_t: float) -> float:
    """Large-system CEO rate ``C_t P / (P + 1)``; same as elementary compression."""
    return float(C_t) * float(P) / (float(P) + 1.0)
