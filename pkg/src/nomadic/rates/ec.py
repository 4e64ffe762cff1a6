"""Elementary compression: each agent quantizes its observation on its own.

For a diagonal covariance ``Q`` and rates ``q`` the scheme delivers

    R = E log2 det(I + diag(1 - 2^-q) H Q H*)

subject to ``E log2((2^q_i - 1)(H_i Q H_i* + 1) + 1) <= C_i`` per agent.
"""

from __future__ import annotations

import numpy as np

from ..channel import ChannelEnsemble, CovarianceQ, SystemConfig
from ..errors import ConstraintViolated
from ..linalg import gram, logdet_ipm_fast
from ..solvers import bisect_batch, maximize_simplex_batch
from ._types import CompressionProfile, RateReport

__all__ = [
    "ec_constraint",
    "ec_rate",
    "ec_pinned_factor",
    "ec_constant_q",
    "ec_optimize",
    "ec_outage_values",
    "ec_outage",
    "ec_asymptotic_limit",
]

CONSTRAINT_TOL = 1e-6


def _rate_given_factor(A, d):
    sd = np.sqrt(d)
    return logdet_ipm_fast(sd[..., :, None] * A * sd[..., None, :])


def _agent_gains(H, p):
    """``H_i Q H_i*`` for every agent and sample, shape ``(n, r)``."""
    return np.einsum("nit,...t->ni", np.abs(H) ** 2, p) if np.ndim(p) == 1 else \
        np.sum(np.abs(H) ** 2 * p[:, None, :], axis=2)


def ec_constraint(gains, q):
    """Per-sample link usage ``log2((2^q - 1)(g + 1) + 1)`` in bits.

    Parameters
    ----------
    gains : (n, r) array_like
        ``H_i Q H_i*``.
    q : (n, r) or (r,) array_like
    """
    q = np.asarray(q, dtype=float)
    return np.log2(np.expm1(q * np.log(2.0)) * (np.asarray(gains) + 1.0) + 1.0)


def ec_rate(config: SystemConfig, ensemble: ChannelEnsemble, Q: CovarianceQ,
            q: CompressionProfile) -> RateReport:
    """Rate of elementary compression at given ``Q`` and ``q``.

    Raises
    ------
    ConstraintViolated
        If some agent's averaged link usage exceeds ``C_i + 1e-6``.
    """
    ensemble.compatible(config)
    Q.check(config.P)
    H = ensemble.H
    n = H.shape[0]
    qq = q.broadcast(n)
    p = Q.array
    usage = ec_constraint(_agent_gains(H, p), qq).mean(axis=0)
    slack = usage - config.C
    worst = int(np.argmax(slack))
    if slack[worst] > CONSTRAINT_TOL:
        raise ConstraintViolated(worst, slack[worst])
    A = gram(H, p)
    d = -np.expm1(-qq * np.log(2.0))
    rate = float(np.mean(_rate_given_factor(A, d)))
    return RateReport(rate=rate, scheme="ec", q_mean=tuple(float(v) for v in qq.mean(axis=0)),
                      Q=Q.diag, seed=ensemble.seed, n_samples=n,
                      diagnostics={"link_usage": tuple(float(u) for u in usage)},
                      profile=CompressionProfile(qq))


def ec_pinned_factor(gains, C):
    """Factor ``1 - 2^-q`` that meets each per-sample constraint with equality.

    Equals ``(2^C - 1) / (2^C + g)``.
    """
    c = np.exp2(np.asarray(C, dtype=float))
    return (c - 1.0) / (c + np.asarray(gains))


def ec_constant_q(gains, C):
    """Largest channel-independent ``q_i`` meeting each averaged constraint.

    Parameters
    ----------
    gains : (n, r) ndarray
    C : (r,) array_like

    Returns
    -------
    (r,) ndarray
    """
    C = np.asarray(C, dtype=float)
    # usage is increasing in q and at least q, so the root lies in [0, C]
    def resid(q):
        return ec_constraint(gains, q).mean(axis=0) - C
    q = bisect_batch(resid, np.zeros_like(C), C, n_iter=80)
    # step back onto the feasible side of the bracket
    over = resid(q) > 0
    while np.any(over):
        q = np.where(over, np.nextafter(q, -np.inf), q)
        q = np.maximum(q, 0.0)
        over = (resid(q) > 0) & (q > 0)
    return q


def _ec_value(H, p, C, mode="best"):
    """EC rate for one power vector; returns (rate, q per sample, label)."""
    n = H.shape[0]
    gains = _agent_gains(H, p)
    A = gram(H, p)
    d_pin = ec_pinned_factor(gains, C)
    r_pin = float(np.mean(_rate_given_factor(A, d_pin)))
    if mode == "pinned":
        return r_pin, -np.log2(1.0 - d_pin), "pinned"
    qc = ec_constant_q(gains, C)
    d_c = np.broadcast_to(-np.expm1(-qc * np.log(2.0)), (n, qc.size))
    r_c = float(np.mean(_rate_given_factor(A, d_c)))
    if mode == "constant" or r_c >= r_pin:
        return r_c, np.broadcast_to(qc, (n, qc.size)), "constant"
    return r_pin, -np.log2(1.0 - d_pin), "pinned"


def ec_optimize(config: SystemConfig, ensemble: ChannelEnsemble,
                Q: CovarianceQ | None = None, n_starts: int = 5) -> RateReport:
    """Best elementary-compression rate over ``Q`` and two families of ``q``.

    For each candidate ``Q`` two compression rules are tried: a constant
    ``q_i`` per agent, tightened by bisection until its averaged constraint
    is met, and ``q_i(H)`` pinned so each per-sample constraint holds with
    equality. The better one is kept.

    Parameters
    ----------
    config : SystemConfig
    ensemble : ChannelEnsemble
    Q : CovarianceQ, optional
        Fixed covariance. By default the diagonal covariance is searched on
        the full-power simplex.
    n_starts : int
        Starts for the covariance search when ``t >= 3``.

    Returns
    -------
    RateReport
        ``diagnostics["q_rule"]`` names the winning rule.
    """
    ensemble.compatible(config)
    H = ensemble.H
    C = config.C
    if np.all(C == 0):
        Qd = Q.diag if Q is not None else CovarianceQ.isotropic(config.t, config.P).diag
        return RateReport(0.0, "ec", q_mean=(0.0,) * config.r, Q=Qd,
                          seed=ensemble.seed, n_samples=len(ensemble),
                          profile=CompressionProfile(np.zeros((len(ensemble), config.r))))
    if Q is None:
        count = [0]

        def obj(p):
            count[0] += 1
            return np.array([_ec_value(H, p[0], C)[0]])

        res = maximize_simplex_batch(obj, 1, config.t, config.P, n_starts=n_starts,
                                     seed=ensemble.seed)
        p = res.p[0]
        start = int(res.start[0])
        iters = count[0]
    else:
        Q.check(config.P)
        p, start, iters = Q.array, -1, 1
    rate, q, rule = _ec_value(H, p, C)
    q = np.ascontiguousarray(np.maximum(q, 0.0))
    report = ec_rate(config, ensemble, CovarianceQ(p), CompressionProfile(q))
    report.iterations = iters
    report.diagnostics.update({"q_rule": rule, "Q_start": start})
    return report


def ec_outage_values(config: SystemConfig, ensemble: ChannelEnsemble,
                     Q: CovarianceQ | None = None):
    """Per-sample EC rate with pinned ``q``, maximized over ``Q`` per sample.

    Returns
    -------
    (n,) ndarray
    """
    ensemble.compatible(config)
    H = ensemble.H
    C = config.C

    def per_sample(p):
        gains = np.sum(np.abs(H) ** 2 * p[:, None, :], axis=2)
        A = gram(H, p)
        return _rate_given_factor(A, ec_pinned_factor(gains, C))

    if Q is not None:
        return per_sample(np.tile(Q.array, (len(ensemble), 1)))
    res = maximize_simplex_batch(per_sample, len(ensemble), config.t, config.P,
                                 seed=ensemble.seed)
    return res.value


def ec_outage(config: SystemConfig, ensemble: ChannelEnsemble, R: float,
              Q: CovarianceQ | None = None) -> float:
    """Fraction of samples whose best pinned-``q`` EC rate is below ``R``."""
    return float(np.mean(ec_outage_values(config, ensemble, Q) < R))


def ec_asymptotic_limit(P: float, C_t: float) -> float:
    """Large-system EC rate ``C_t P / (1 + P)`` for a total link budget ``C_t``."""
    return float(C_t) * float(P) / (1.0 + float(P))
