"""Diversity-multiplexing tradeoff curves and empirical slope estimation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .errors import BadRange, ZeroOutage

__all__ = [
    "DEFAULT_LINK_MARGIN",
    "DmtCurve",
    "DiversityFit",
    "dmt_upper",
    "dmt_ceo",
    "dmt_ec",
    "dmt_link_capacity",
    "estimate_diversity",
    "fit_diversity",
    "horizontal_gap_db",
    "multiplexing_gain",
    "supported_rate",
]

DEFAULT_LINK_MARGIN = 0.5  # bits added to the scaled link capacities


@dataclass(frozen=True)
class DmtCurve:
    """Diversity order ``d`` against multiplexing gain ``m``.

    Attributes
    ----------
    m, d : ndarray
    scheme : str
        ``upper``, ``ceo`` or ``ec``.
    r, t : int
    """

    m: np.ndarray
    d: np.ndarray
    scheme: str
    r: int
    t: int

    @property
    def points(self) -> list:
        return [(float(a), float(b)) for a, b in zip(self.m, self.d)]

    def rows(self):
        """CSV rows ``(m, d, scheme)``."""
        return [(float(a), float(b), self.scheme) for a, b in zip(self.m, self.d)]


def _grid(r, t, m_grid):
    if r < 1 or t < 1:
        raise BadRange("r and t must be positive")
    m = np.atleast_1d(np.asarray(m_grid, dtype=float))
    top = min(r, t)
    if m.size == 0 or np.any(~np.isfinite(m)) or np.any(m < 0) or np.any(m > top + 1e-12):
        raise BadRange(f"multiplexing gains must lie in [0, {top}]")
    return np.minimum(m, top)


def dmt_upper(r: int, t: int, m_grid: Sequence[float]) -> DmtCurve:
    """Upper bound on the tradeoff.

    The minimum of the piecewise-linear curve through ``(k, (r-k)(t-k))``
    and the link-limited line ``t (1 - m/r)``.

    Raises
    ------
    BadRange
        If some gain lies outside ``[0, min(r, t)]``.
    """
    m = _grid(r, t, m_grid)
    k = np.arange(min(r, t) + 1)
    mimo = np.interp(m, k, (r - k) * (t - k))
    d = np.minimum(mimo, t * (1.0 - m / r))
    return DmtCurve(m=m, d=np.maximum(d, 0.0), scheme="upper", r=r, t=t)


def dmt_ceo(r: int, t: int, m_grid: Sequence[float]) -> DmtCurve:
    """Tradeoff achieved by CEO compression; equal to :func:`dmt_upper`."""
    up = dmt_upper(r, t, m_grid)
    return DmtCurve(m=up.m, d=up.d.copy(), scheme="ceo", r=r, t=t)


def dmt_ec(r: int, t: int, m_grid: Sequence[float]) -> DmtCurve:
    """Tradeoff of elementary compression.

    With several agents the diversity collapses to zero for every positive
    multiplexing gain. At ``m = 0`` the link-limited value ``t`` is
    reported. A single agent has no correlation to exploit and follows
    :func:`dmt_upper`.
    """
    up = dmt_upper(r, t, m_grid)
    if r == 1:
        return DmtCurve(m=up.m, d=up.d.copy(), scheme="ec", r=r, t=t)
    d = np.where(up.m > 0, 0.0, float(t))
    return DmtCurve(m=up.m, d=d, scheme="ec", r=r, t=t)


def dmt_link_capacity(m: float, r: int, P: float, margin: float = DEFAULT_LINK_MARGIN
                      ) -> float:
    """Link capacity ``(m/r) log2 P + margin`` used for tradeoff experiments."""
    return float(m) / r * float(np.log2(P)) + float(margin)


@dataclass(frozen=True)
class DiversityFit:
    """Least-squares fit of ``-log10(outage)`` against ``log10(P)``.

    Attributes
    ----------
    slope : float
        Estimated diversity order.
    intercept : float
    stderr : float
        Standard error of the slope from the binomial Monte Carlo error
        (zero when sample sizes are unknown and the fit is exact).
    ci : tuple of float
        95 % confidence interval of the slope.
    """

    slope: float
    intercept: float
    stderr: float
    ci: tuple

    def __float__(self):
        return self.slope


def fit_diversity(outage_fn: Callable, P_grid_dB: Sequence[float],
                  n_samples: int | None = None) -> DiversityFit:
    """Fit the high-power outage slope.

    Parameters
    ----------
    outage_fn : callable
        Maps a linear power ``P`` to an outage probability.
    P_grid_dB : sequence of float
        At least three powers.
    n_samples : int, optional
        Monte Carlo size behind each probability; enables weighting and a
        binomial error on the slope.

    Raises
    ------
    BadRange
        With fewer than three grid points.
    ZeroOutage
        If a grid point has no outage events.
    """
    Pdb = np.asarray(P_grid_dB, dtype=float)
    if Pdb.size < 3:
        raise BadRange("at least three powers are needed")
    p = np.array([float(outage_fn(10.0 ** (v / 10.0))) for v in Pdb])
    if np.any(p <= 0):
        bad = ", ".join(f"{v:g}" for v in Pdb[p <= 0])
        raise ZeroOutage(f"no outage events at P = {bad} dB; use a larger ensemble")
    x = Pdb / 10.0
    y = -np.log10(p)
    if n_samples is None:
        w = np.ones_like(x)
        res = stats.linregress(x, y)
        se = float(res.stderr) if np.isfinite(res.stderr) else 0.0
        slope, icpt = float(res.slope), float(res.intercept)
    else:
        # delta method: var(log10 p_hat) = (1 - p) / (n p ln(10)^2)
        var = (1.0 - p) / (n_samples * p * np.log(10.0) ** 2)
        w = 1.0 / np.maximum(var, 1e-300)
        X = np.column_stack([np.ones_like(x), x])
        XtW = X.T * w
        cov = np.linalg.inv(XtW @ X)
        icpt, slope = cov @ (XtW @ y)
        se = float(np.sqrt(cov[1, 1]))
        slope, icpt = float(slope), float(icpt)
    z = float(stats.norm.ppf(0.975))
    return DiversityFit(slope=slope, intercept=icpt, stderr=se,
                        ci=(slope - z * se, slope + z * se))


def estimate_diversity(outage_fn: Callable, P_grid_dB: Sequence[float],
                       n_samples: int | None = None) -> float:
    """Diversity order estimated as the slope of :func:`fit_diversity`."""
    return fit_diversity(outage_fn, P_grid_dB, n_samples).slope


def multiplexing_gain(rates: Sequence[float], P_grid_dB: Sequence[float]) -> float:
    """Least-squares slope of rate against ``log2 P``."""
    R = np.asarray(rates, dtype=float)
    x = np.asarray(P_grid_dB, dtype=float) / 10.0 * np.log2(10.0)
    if R.size < 2 or R.size != x.size:
        raise BadRange("need matching rate and power grids with two or more points")
    return float(np.polyfit(x, R, 1)[0])


def supported_rate(values, epsilon: float) -> float:
    """Largest rate whose empirical outage probability is at most ``epsilon``.

    Parameters
    ----------
    values : array_like
        Per-sample supported rates.
    epsilon : float
        Target outage probability in ``[0, 1)``.
    """
    v = np.sort(np.asarray(values, dtype=float).ravel())
    if not 0.0 <= epsilon < 1.0:
        raise BadRange("epsilon must lie in [0, 1)")
    if v.size == 0:
        raise BadRange("no samples")
    # outage(R) = #{v < R} / n <= eps holds up to R = v[k] with k = floor(eps n)
    k = int(np.floor(epsilon * v.size + 1e-12))
    return float(v[min(k, v.size - 1)])


def horizontal_gap_db(P_dB: Sequence[float], upper: Sequence[float],
                      P_lower_dB: Sequence[float], lower: Sequence[float]) -> np.ndarray:
    """Extra power the lower curve needs to reach the upper curve.

    For every point ``(P_dB[k], upper[k])`` the power at which the lower
    curve attains ``upper[k]`` is found by linear interpolation, and the
    difference in dB is returned.

    Parameters
    ----------
    P_dB, upper : array_like
        Upper curve samples.
    P_lower_dB, lower : array_like
        Lower curve samples; ``lower`` must be nondecreasing.

    Returns
    -------
    ndarray
        Gaps in dB; NaN where the value lies outside the range the lower
        curve covers on its grid.
    """
    Pl = np.asarray(P_lower_dB, dtype=float)
    lo = np.asarray(lower, dtype=float)
    if Pl.size < 2 or Pl.size != lo.size:
        raise BadRange("need matching lower-curve grids with two or more points")
    if np.any(np.diff(lo) < 0):
        raise BadRange("lower curve must be nondecreasing")
    u = np.asarray(upper, dtype=float)
    reach = np.interp(u, lo, Pl, left=np.nan, right=np.nan)
    return reach - np.asarray(P_dB, dtype=float)
