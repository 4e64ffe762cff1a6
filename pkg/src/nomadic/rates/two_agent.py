"""Closed-form CEO solution for two agents with equal links.

For a water level ``theta`` the per-sample rates ``q_1, q_2`` follow from
the stationarity conditions of ``log2 det(I + diag(1 - 2^-q) A) - theta (q_1 + q_2)``
with ``A = (P/t) H H*``. Writing

    D1 = det(I + A),  D2 = det(A),  D3 = D2 + A_11,  D4 = D2 + A_22,
    F(theta) = ((1 + 2 theta) - sqrt((1 + 2 theta)^2 - 4 theta (1 + theta) D1 D2 / (D3 D4)))
               / (2 (1 + theta)),

the interior solution is ``q_1 = -log2(D4 F / D2)`` and ``q_2 = -log2(D3 F / D2)``.
When ``F > D2 / D3`` the second agent is switched off and
``q_1 = -log2(theta/(1 + theta) (1 + A_11) / A_11)``, symmetrically for the
other agent. Negative values are clamped to zero. The level ``theta`` is
set so that the full-set term equals the all-links term ``2C - E[q_1 + q_2]``.
"""

from __future__ import annotations

import numpy as np

from ..channel import ChannelEnsemble, SystemConfig
from ..errors import BadRange, BracketFailure, NoSignChange
from ..linalg import gram
from ..solvers import bisect_scalar
from ._types import TwoAgentSolution

__all__ = ["THETA_BRACKET", "two_agent_determinants", "two_agent_q", "two_agent_solve"]

THETA_BRACKET = (1e-8, 1e8)


def two_agent_determinants(A):
    """Return ``a11, a22, D1, D2, D3, D4`` for a stack of 2x2 Gram matrices."""
    a11 = A[:, 0, 0].real
    a22 = A[:, 1, 1].real
    D2 = np.maximum(a11 * a22 - np.abs(A[:, 0, 1]) ** 2, 0.0)
    D1 = 1.0 + a11 + a22 + D2
    return a11, a22, D1, D2, D2 + a11, D2 + a22


def _F(theta, ratio):
    b = 1.0 + 2.0 * theta
    disc = np.maximum(b * b - 4.0 * theta * (1.0 + theta) * ratio, 0.0)
    return (b - np.sqrt(disc)) / (2.0 * (1.0 + theta))


def two_agent_q(A, theta):
    """Per-sample ``(q_1, q_2)`` at water level ``theta``.

    Parameters
    ----------
    A : (n, 2, 2) ndarray
        ``(P/t) H H*``.
    theta : float
        Positive.

    Returns
    -------
    q1, q2 : (n,) ndarray
        Nonnegative and nonincreasing in ``theta``.
    """
    a11, a22, D1, D2, D3, D4 = two_agent_determinants(A)
    F = _F(theta, D1 * D2 / (D3 * D4))
    lvl = theta / (1.0 + theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        solo1 = -np.log2(lvl * (1.0 + a11) / a11)
        solo2 = -np.log2(lvl * (1.0 + a22) / a22)
        joint1 = -np.log2(D4 * F / D2)
        joint2 = -np.log2(D3 * F / D2)
    q1 = np.where(F > D2 / D3, solo1, joint1)
    q2 = np.where(F > D2 / D4, solo2, joint2)
    q1 = np.where(np.isfinite(q1), q1, 0.0)
    q2 = np.where(np.isfinite(q2), q2, 0.0)
    return np.maximum(q1, 0.0), np.maximum(q2, 0.0)


def _full_logdet(A, q1, q2):
    d1 = -np.expm1(-q1 * np.log(2.0))
    d2 = -np.expm1(-q2 * np.log(2.0))
    a11, a22 = A[:, 0, 0].real, A[:, 1, 1].real
    det = (1 + d1 * a11) * (1 + d2 * a22) - d1 * d2 * np.abs(A[:, 0, 1]) ** 2
    return np.log2(det), det


def two_agent_solve(config: SystemConfig, ensemble: ChannelEnsemble,
                    tol: float = 1e-12) -> TwoAgentSolution:
    """Solve the symmetric two-agent CEO problem in closed form.

    Parameters
    ----------
    config : SystemConfig
        ``r = 2`` with equal capacities; any ``t``.
    ensemble : ChannelEnsemble
    tol : float
        Bisection tolerance on ``log(theta)``.

    Returns
    -------
    TwoAgentSolution
        The rate is reported as ``2C - E[q_1 + q_2]``; the two averages
        coincide in expectation but not exactly on a finite ensemble.

    Raises
    ------
    BracketFailure
        If the implicit equation has no sign change on ``[1e-8, 1e8]``.
    """
    ensemble.compatible(config)
    if config.r != 2 or not config.symmetric:
        raise BadRange("two_agent_solve needs r = 2 and equal capacities")
    C = config.capacities[0]
    A = gram(ensemble.H) * (config.P / config.t)

    def resid_theta(theta):
        q1, q2 = two_agent_q(A, theta)
        return float(np.mean(_full_logdet(A, q1, q2)[0]) - (2.0 * C - np.mean(q1 + q2)))

    lo, hi = np.log(THETA_BRACKET[0]), np.log(THETA_BRACKET[1])
    if C == 0.0:
        theta = THETA_BRACKET[1]
    else:
        try:
            theta = float(np.exp(bisect_scalar(lambda lt: resid_theta(np.exp(lt)), lo, hi,
                                               tol=tol)))
        except NoSignChange as exc:
            raise BracketFailure(str(exc)) from exc
    q1, q2 = two_agent_q(A, theta)
    _, det = _full_logdet(A, q1, q2)
    _, _, D1, D2, D3, D4 = two_agent_determinants(A)
    rate = 2.0 * C - float(np.mean(q1 + q2))
    return TwoAgentSolution(theta=theta, rate=max(rate, 0.0), q1=q1, q2=q2, delta=det,
                            delta1=D1, delta2=D2, delta3=D3, delta4=D4,
                            residual=resid_theta(theta), seed=ensemble.seed)
