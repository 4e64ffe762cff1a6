"""Optimization primitives shared by the rate and bound routines.

Two families live here:

* scalar helpers and exhaustive enumerations that work on one problem at a
  time (``min_over_subsets``, ``maximize_concave_box``, ``bisect_scalar``...);
* batched solvers that handle many independent small problems at once,
  one per channel sample (``maximize_box_batch``, ``maxmin_box_batch``,
  ``maximize_simplex_batch``).

The batched max-min solver smooths ``min_k g_k`` by the soft minimum
``-mu log sum exp(-g_k / mu)``, which stays concave, and tracks the
maximizer while ``mu`` shrinks geometrically. Each stage is a projected
Newton ascent on the box. The value returned is always the exact
``min_k g_k`` at the final point.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import NoSignChange, NonFinite, TooManyAgents

__all__ = [
    "SubsetMinResult",
    "PartitionMinResult",
    "all_subsets",
    "all_families",
    "min_over_subsets",
    "min_over_partitions",
    "maximize_concave_box",
    "golden_max",
    "bisect_scalar",
    "bisect_batch",
    "maximize_box_batch",
    "maxmin_box_batch",
    "softmin",
    "SimplexResult",
    "maximize_simplex_batch",
    "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-6
MAX_SUBSET_AGENTS = 16
MAX_PARTITION_AGENTS = 8

_GOLD = (math.sqrt(5.0) - 1.0) / 2.0


# ---------------------------------------------------------------------------
# exhaustive enumeration


@lru_cache(maxsize=None)
def all_subsets(r: int) -> tuple:
    """All subsets of ``range(r)`` as sorted tuples.

    Ordered by cardinality, then lexicographically, so the first minimizer
    found in this order satisfies the package tie-break rule.
    """
    out = []
    for k in range(r + 1):
        out.extend(itertools.combinations(range(r), k))
    return tuple(out)


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [(first,)] + part
        for j in range(len(part)):
            yield part[:j] + [tuple(sorted((first,) + part[j]))] + part[j + 1:]


@lru_cache(maxsize=None)
def all_families(r: int) -> tuple:
    """All families of pairwise-disjoint nonempty blocks of ``range(r)``.

    The union of the blocks need not cover every agent. The empty family is
    included. Families are ordered by block count, then lexicographically
    on the sorted block list.
    """
    fams = set()
    for covered in all_subsets(r):
        for part in _set_partitions(list(covered)):
            fams.add(tuple(sorted(part)))
    return tuple(sorted(fams, key=lambda f: (len(f), f)))


@dataclass(frozen=True)
class SubsetMinResult:
    """Minimum of an objective over agent subsets.

    Attributes
    ----------
    value : float
    argmin_subset : tuple of int
        Zero-based agent indices.
    """

    value: float
    argmin_subset: tuple


@dataclass(frozen=True)
class PartitionMinResult:
    """Minimum of an objective over families of disjoint blocks."""

    value: float
    blocks: tuple


def min_over_subsets(objective: Callable[[tuple], float], r: int) -> SubsetMinResult:
    """Exhaustive minimum over all ``2**r`` subsets, the empty set included.

    Ties go to the smallest cardinality, then lexicographic order.

    Raises
    ------
    TooManyAgents
        If ``r > 16``.
    """
    if r > MAX_SUBSET_AGENTS:
        raise TooManyAgents(f"r={r} exceeds {MAX_SUBSET_AGENTS}")
    best, arg = math.inf, ()
    for S in all_subsets(r):
        v = float(objective(S))
        if math.isnan(v):
            raise NonFinite(f"objective is NaN at subset {S}")
        if v < best:
            best, arg = v, S
    return SubsetMinResult(best, arg)


def min_over_partitions(objective: Callable[[tuple], float], r: int) -> PartitionMinResult:
    """Exhaustive minimum over families of disjoint nonempty blocks.

    Ties go to the family with the fewest blocks.

    Raises
    ------
    TooManyAgents
        If ``r > 8``.
    """
    if r > MAX_PARTITION_AGENTS:
        raise TooManyAgents(f"r={r} exceeds {MAX_PARTITION_AGENTS}")
    best, arg = math.inf, ()
    for fam in all_families(r):
        v = float(objective(fam))
        if math.isnan(v):
            raise NonFinite(f"objective is NaN at family {fam}")
        if v < best:
            best, arg = v, fam
    return PartitionMinResult(best, arg)


# ---------------------------------------------------------------------------
# scalar routines


def _finite(v, where):
    v = float(v)
    if not math.isfinite(v):
        raise NonFinite(f"objective is {v} at {where}")
    return v


def golden_max(f: Callable[[float], float], lo: float, hi: float,
               tol: float = 1e-9, max_iter: int = 200):
    """Golden-section search for the maximum of a unimodal scalar function.

    The endpoints are compared against the interior result, so monotone
    functions return the correct endpoint.

    Returns
    -------
    x : float
    value : float
    """
    if hi <= lo:
        return lo, _finite(f(lo), lo)
    a, b = lo, hi
    c = b - _GOLD * (b - a)
    d = a + _GOLD * (b - a)
    fc, fd = _finite(f(c), c), _finite(f(d), d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLD * (b - a)
            fc = _finite(f(c), c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLD * (b - a)
            fd = _finite(f(d), d)
    x, fx = (c, fc) if fc >= fd else (d, fd)
    for e in (lo, hi):
        fe = _finite(f(e), e)
        if fe > fx:
            x, fx = e, fe
    return x, fx


def maximize_concave_box(f: Callable[[np.ndarray], float], lower, upper,
                         tol: float = DEFAULT_TOL, max_cycles: int = 200):
    """Maximize a concave function on a box by cyclic line searches.

    Each cycle runs a golden-section search along every coordinate and then
    along the net displacement of the cycle (a pattern move), which follows
    ridges of nonsmooth objectives such as a minimum of concave terms. When
    a cycle stalls, the pairwise directions ``e_i + e_j`` and ``e_i - e_j``
    and a batch of random directions (fixed seed) are tried before giving up.

    Parameters
    ----------
    f : callable
        Concave on the box; takes a 1-d array.
    lower, upper : array_like
        Box bounds, ``lower <= upper``.
    tol : float, default 1e-6
        Stop once a cycle improves the objective by less than this.

    Returns
    -------
    argmax : ndarray
    value : float

    Raises
    ------
    NonFinite
        If ``f`` returns NaN or Inf inside the box.
    """
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    if lo.shape != hi.shape or np.any(hi < lo):
        raise ValueError("empty box")
    x = 0.5 * (lo + hi)
    fx = _finite(f(x), x)
    n = x.size
    scale = max(1.0, float(np.max(hi - lo)) if n else 1.0)
    line_tol = max(tol * 1e-3, 1e-12) * scale
    eye = np.eye(n)
    pairs = [eye[i] + s * eye[j] for i in range(n) for j in range(i + 1, n) for s in (1.0, -1.0)]
    rng = np.random.default_rng(0)

    def search(d):
        nonlocal x, fx
        y, fy = _line_max(f, x, d, lo, hi, line_tol)
        if fy > fx:
            x, fx = y, fy

    for _ in range(max_cycles):
        start, x0 = fx, x.copy()
        for i in range(n):
            search(eye[i])
        if np.any(x != x0):
            search(x - x0)
        if fx - start < tol:
            before = fx
            for d in pairs + list(rng.standard_normal((8 * n, n))):
                search(d)
            if fx - before < tol:
                break
    return x, fx


def _line_max(f, x, d, lo, hi, tol):
    """Golden search for ``max f(x + s d)`` over the feasible segment."""
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(d > 0, (lo - x) / d, np.where(d < 0, (hi - x) / d, -np.inf))
        b = np.where(d > 0, (hi - x) / d, np.where(d < 0, (lo - x) / d, np.inf))
    s_lo, s_hi = float(np.max(a)), float(np.min(b))
    if not s_hi > s_lo:
        return x, -np.inf
    s, fs = golden_max(lambda s: f(np.clip(x + s * d, lo, hi)),
                       s_lo, s_hi, tol=tol / max(float(np.max(np.abs(d))), 1e-300))
    return np.clip(x + s * d, lo, hi), fs


def bisect_scalar(g: Callable[[float], float], lo: float, hi: float,
                  tol: float = 1e-12, max_iter: int = 200) -> float:
    """Root of a continuous scalar function by bisection.

    Stops when ``|g(x)| <= tol`` or the bracket is narrower than ``tol``.

    Raises
    ------
    NoSignChange
        If ``g(lo)`` and ``g(hi)`` have the same strict sign.
    """
    glo, ghi = float(g(lo)), float(g(hi))
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if np.sign(glo) == np.sign(ghi):
        raise NoSignChange(f"g({lo})={glo:.3g} and g({hi})={ghi:.3g} share a sign")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        gm = float(g(mid))
        if abs(gm) <= tol or hi - lo <= tol:
            return mid
        if np.sign(gm) == np.sign(glo):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bisect_batch(g: Callable[[np.ndarray], np.ndarray], lo, hi, n_iter: int = 60):
    """Vectorized bisection for many increasing scalar functions.

    ``g`` maps an array of points to residuals of the same shape and must be
    nondecreasing elementwise. Where ``g(lo) >= 0`` the result is ``lo``;
    where ``g(hi) <= 0`` it is ``hi``.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    lo, hi = np.broadcast_arrays(lo, hi)
    lo, hi = lo.copy(), hi.copy()
    pin_lo = g(lo) >= 0
    pin_hi = g(hi) <= 0
    a, b = lo.copy(), hi.copy()
    for _ in range(n_iter):
        mid = 0.5 * (a + b)
        pos = g(mid) > 0
        b = np.where(pos, mid, b)
        a = np.where(pos, a, mid)
    x = 0.5 * (a + b)
    x = np.where(pin_hi, hi, x)
    return np.where(pin_lo, lo, x)


# ---------------------------------------------------------------------------
# batched smooth solvers


DEC_TOL = 1e-13
LS_HALVINGS = 30


def _regularized_direction(g, H, fixed):
    """Newton ascent direction restricted to free coordinates."""
    m, n = g.shape
    eye = np.eye(n)
    gf = np.where(fixed, 0.0, g)
    Hm = np.where(fixed[:, :, None] | fixed[:, None, :], 0.0, H)
    Hm = Hm - eye * np.where(fixed, 1.0, 0.0)[:, :, None]
    scale = 1.0 + np.max(np.abs(np.diagonal(Hm, axis1=1, axis2=2)), axis=1)
    Hm = Hm - eye * (1e-12 * scale)[:, None, None]
    try:
        d = np.linalg.solve(Hm, -gf[..., None])[..., 0]
    except np.linalg.LinAlgError:
        d = gf.copy()
    bad = ~np.all(np.isfinite(d), axis=1) | (np.sum(d * gf, axis=1) <= 0)
    if np.any(bad):
        d[bad] = gf[bad]
    return d, gf


def maximize_box_batch(fun, x0, lower, upper, max_iter: int = 60,
                       gtol: float = 1e-11):
    """Projected Newton ascent for a batch of smooth concave problems.

    Parameters
    ----------
    fun : callable
        ``fun(x, idx, derivs)`` where ``x`` has shape ``(k, n)`` and
        ``idx`` selects which of the ``m`` problems the rows belong to.
        Returns ``f`` with shape ``(k,)`` and, if ``derivs``, also the
        gradient ``(k, n)`` and Hessian ``(k, n, n)``.
    x0 : (m, n) array_like
    lower, upper : (n,) array_like
        Shared box.

    Returns
    -------
    x : (m, n) ndarray
    f : (m,) ndarray
    """
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    x = np.clip(np.array(x0, dtype=float), lo, hi)
    m, n = x.shape
    width = np.maximum(hi - lo, 1e-300)
    degenerate = (hi - lo) <= 0
    f = np.empty(m)
    alive = np.arange(m)
    f_all, g_all, H_all = fun(x, alive, True)
    f[:] = f_all
    g, H = g_all, H_all
    for _ in range(max_iter):
        if alive.size == 0:
            break
        xa = x[alive]
        eps = 1e-12 * width
        fixed = (((xa <= lo + eps) & (g < 0)) | ((xa >= hi - eps) & (g > 0))
                 | degenerate)
        d, gf = _regularized_direction(g, H, fixed)
        # near-zero curvature gives huge steps; cap them at one box width
        reach = np.max(np.abs(d) / width, axis=1)
        d = d / np.maximum(reach, 1.0)[:, None]
        pg = np.max(np.abs(gf) * width, axis=1)
        # predicted gain of the full Newton step
        dec = np.sum(gf * d, axis=1)
        fa = f[alive]
        step = np.ones(alive.size)
        accepted = np.zeros(alive.size, dtype=bool)
        xnew = xa.copy()
        fnew = fa.copy()
        todo = np.flatnonzero(dec > DEC_TOL * (1.0 + np.abs(fa)))
        for _ls in range(LS_HALVINGS):
            if todo.size == 0:
                break
            cand = np.clip(xa[todo] + step[todo, None] * d[todo], lo, hi)
            fc = fun(cand, alive[todo], False)
            gain = np.sum(g[todo] * (cand - xa[todo]), axis=1)
            ok = np.isfinite(fc) & (fc >= fa[todo] + 1e-4 * np.maximum(gain, 0.0))
            ok &= fc >= fa[todo]
            idx = todo[ok]
            xnew[idx] = cand[ok]
            fnew[idx] = fc[ok]
            accepted[idx] = True
            todo = todo[~ok]
            step[todo] *= 0.5
        moved = np.max(np.abs(xnew - xa) / width, axis=1)
        improve = fnew - fa
        x[alive] = xnew
        f[alive] = fnew
        done = (~accepted) | (pg <= gtol) | ((improve <= 1e-15 * (1 + np.abs(fa)))
                                              & (moved <= 1e-13))
        keep = ~done
        alive = alive[keep]
        if alive.size == 0:
            break
        f_k, g, H = fun(x[alive], alive, True)
        f[alive] = f_k
    return x, f


def softmin(values, mu):
    """Soft minimum ``-mu log sum_k exp(-v_k / mu)`` along the last axis.

    Returns the value and the softmax weights.
    """
    vmin = np.min(values, axis=-1, keepdims=True)
    z = np.exp(-(values - vmin) / mu)
    s = np.sum(z, axis=-1, keepdims=True)
    w = z / s
    return vmin[..., 0] - mu * np.log(s[..., 0]), w


def maxmin_box_batch(terms, lower, upper, x0=None, mu_start: float = 1.0,
                     mu_end: float = 1e-10, mu_factor: float = 0.1,
                     max_iter: int = 60):
    """Maximize ``min_k g_k(x)`` over a box for a batch of concave problems.

    Parameters
    ----------
    terms : callable
        ``terms(x, idx, derivs)`` with ``x`` of shape ``(k, n)``; returns
        values ``(k, K)`` and, if ``derivs``, gradients ``(k, K, n)`` and
        Hessians ``(k, K, n, n)``. Every ``g_k`` must be concave.
    lower, upper : (n,) array_like
    x0 : (m, n) array_like, optional
        Starting points; the box midpoint by default. ``m`` is taken from
        ``x0``, so it is required unless ``terms`` accepts any batch size
        (then pass an array of midpoints).

    Returns
    -------
    x : (m, n) ndarray
        Maximizers.
    value : (m,) ndarray
        ``min_k g_k(x)`` evaluated exactly.
    """
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    if x0 is None:
        raise ValueError("x0 is required to fix the batch size")
    x = np.clip(np.array(x0, dtype=float), lo, hi)

    mu = mu_start
    while True:
        def smooth(xx, idx, derivs, mu=mu):
            if not derivs:
                v = terms(xx, idx, False)
                return softmin(v, mu)[0]
            v, G, Hs = terms(xx, idx, True)
            f, w = softmin(v, mu)
            grad = np.einsum("kj,kjn->kn", w, G)
            hess = np.einsum("kj,kjab->kab", w, Hs)
            outer = np.einsum("kj,kja,kjb->kab", w, G, G)
            hess = hess - (outer - grad[:, :, None] * grad[:, None, :]) / mu
            return f, grad, hess

        x, _ = maximize_box_batch(smooth, x, lo, hi, max_iter=max_iter)
        if mu <= mu_end:
            break
        mu = max(mu * mu_factor, mu_end)
    vals = terms(x, np.arange(x.shape[0]), False)
    return x, np.min(vals, axis=1)


# ---------------------------------------------------------------------------
# diagonal covariance search on the power simplex


@dataclass(frozen=True)
class SimplexResult:
    """Result of a batched search over ``{p >= 0, sum p = P}``.

    Attributes
    ----------
    p : (m, t) ndarray
        Best power vector per problem.
    value : (m,) ndarray
    start : (m,) ndarray of int
        Index of the start that produced the winner (0 is ``P/t`` each).
    """

    p: np.ndarray
    value: np.ndarray
    start: np.ndarray


def _golden_batch(f, a, b, n_iter):
    """Batched golden-section maximization of ``f(x)`` over ``[a, b]``."""
    c = b - _GOLD * (b - a)
    d = a + _GOLD * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(n_iter):
        left = fc >= fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        nc = np.where(left, b - _GOLD * (b - a), d)
        nd = np.where(left, c, a + _GOLD * (b - a))
        fnew = f(np.where(left, nc, nd))
        fc, fd = np.where(left, fnew, fd), np.where(left, fc, fnew)
        c, d = nc, nd
    use_c = fc >= fd
    return np.where(use_c, c, d), np.where(use_c, fc, fd)


def maximize_simplex_batch(obj, m: int, t: int, P: float, grid: int = 9,
                           n_golden: int = 24, n_starts: int = 5,
                           sweeps: int = 4, seed: int = 0,
                           n_refine: int = 12) -> SimplexResult:
    """Maximize ``obj(p)`` over diagonal covariances with ``sum p = P``.

    Parameters
    ----------
    obj : callable
        Maps ``(m, t)`` power vectors to ``(m,)`` values.
    m : int
        Batch size.
    t : int
    P : float
    grid : int, default 9
        Grid points for ``t = 2`` before golden refinement.
    n_golden : int
        Golden-section iterations per pairwise line search for ``t >= 3``.
    n_starts : int, default 5
        Starts for ``t >= 3``: ``P/t`` each, one vertex, and seeded
        Dirichlet draws.
    sweeps : int
        Pairwise-transfer sweeps for ``t >= 3``.
    n_refine : int, default 12
        Golden iterations refining the best grid cell for ``t = 2``.

    Notes
    -----
    The objective need not be concave in ``p``. For ``t = 2`` a grid over
    the split followed by a golden refinement around the best grid cell is
    used; for larger ``t`` coordinate ascent moves power between antenna
    pairs. Results are therefore local envelopes, and the start that won
    is reported.
    """
    if t == 1:
        p = np.full((m, 1), float(P))
        return SimplexResult(p, obj(p), np.zeros(m, dtype=int))
    if t == 2:
        fr = np.linspace(0.0, 1.0, grid)
        vals = np.empty((m, grid))
        # evaluate the isotropic point first so warm-started objectives begin there
        order = np.argsort(np.abs(fr - 0.5), kind="stable")
        for j in order:
            p = np.column_stack([np.full(m, fr[j] * P), np.full(m, (1 - fr[j]) * P)])
            vals[:, j] = obj(p)
        best = np.argmax(vals, axis=1)
        step = 1.0 / (grid - 1)
        a = np.clip(fr[best] - step, 0.0, 1.0) * P
        b = np.clip(fr[best] + step, 0.0, 1.0) * P

        def f(x):
            return obj(np.column_stack([x, P - x]))

        xg, fg = _golden_batch(f, a, b, n_refine)
        grid_best = vals[np.arange(m), best]
        use_g = fg > grid_best
        x1 = np.where(use_g, xg, fr[best] * P)
        p = np.column_stack([x1, P - x1])
        val = np.where(use_g, fg, grid_best)
        return SimplexResult(p, val, np.zeros(m, dtype=int))

    rng = np.random.default_rng(seed)
    starts = [np.full(t, P / t)]
    if n_starts > 1:
        v = np.zeros(t)
        v[0] = P
        starts.append(v)
    while len(starts) < n_starts:
        starts.append(rng.dirichlet(np.ones(t)) * P)
    best_p = None
    best_v = None
    best_s = None
    for s_idx, s in enumerate(starts):
        p = np.tile(s, (m, 1))
        v = obj(p)
        for _ in range(sweeps):
            v_start = v.copy()
            for k in range(t):
                for l in range(k + 1, t):
                    tot = p[:, k] + p[:, l]

                    def f(x, k=k, l=l, tot=tot, base=p):
                        pp = base.copy()
                        pp[:, k] = x
                        pp[:, l] = tot - x
                        return obj(pp)

                    xg, fg = _golden_batch(f, np.zeros(m), tot, n_golden)
                    better = fg > v
                    p = p.copy()
                    p[better, k] = xg[better]
                    p[better, l] = tot[better] - xg[better]
                    v = np.where(better, fg, v)
            if np.all(v - v_start < 1e-9):
                break
        if best_v is None:
            best_p, best_v, best_s = p, v, np.zeros(m, dtype=int)
        else:
            better = v > best_v
            best_p = np.where(better[:, None], p, best_p)
            best_v = np.where(better, v, best_v)
            best_s = np.where(better, s_idx, best_s)
    return SimplexResult(best_p, best_v, best_s)
