"""Upper bounds: cut-set and entropy-power-inequality (EPI) bounds.

For an agent block ``Z`` with ``m = min(t, |Z|)`` the EPI bound function is

    F(Z, q) = m log2( 2^{a/m} - 2^{b/m} ),
    a = E log2|I + H_Z Q H_Z*|,
    b = E log2|W_Z|,

with ``W_Z = diag(2^-q) H_Z Q H_Z*`` when ``|Z| <= t`` and
``W_Z = Q H_Z* diag(2^-q) H_Z`` otherwise, so that

    b = E log2|H_Z Q H_Z*| - sum_Z q_i                (|Z| <= t)
    b = log2|Q| + E log2|H_Z* diag(2^-q) H_Z|         (|Z| >  t).

The block-fading function ``G`` is the same expression evaluated on one
realization. ``b`` is convex in ``q`` and ``F`` is concave and
nonincreasing in ``b``, so ``F`` is concave in ``q`` and the bounds below
are concave max-min problems in ``q`` for a fixed input covariance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .channel import ChannelEnsemble, ChannelMatrix, CovarianceQ, SystemConfig
from .errors import BadRange, EmptySubset
from .linalg import gram
from .rates._types import format_family, format_subset
from .solvers import (
    all_families,
    all_subsets,
    bisect_scalar,
    maximize_simplex_batch,
    maxmin_box_batch,
)

LN2 = np.log(2.0)
W_FLOOR = 1e-300
_B_FLOOR = np.log2(W_FLOOR)

__all__ = [
    "W_FLOOR",
    "EpiTerm",
    "BoundReport",
    "EpiTerms",
    "cutset_values",
    "cutset_ergodic",
    "cutset_outage_values",
    "cutset_outage",
    "epi_F",
    "epi_G",
    "ub_fast",
    "ub_fast_partitioned",
    "ub_symmetric",
    "ub_outage_values",
    "ub_outage",
]


@dataclass(frozen=True)
class EpiTerm:
    """Value of the EPI bound function for one agent block.

    Attributes
    ----------
    subset : tuple of int
        Zero-based agent indices.
    q_S : tuple of float
    value : float
        Bits.
    m : int
        ``min(t, |subset|)``.
    """

    subset: tuple
    q_S: tuple
    value: float
    m: int


@dataclass
class BoundReport:
    """Result of an upper-bound evaluation.

    Attributes
    ----------
    bound : float
        Bits per channel use.
    kind : str
        ``cut-set``, ``epi-fast``, ``epi-partitioned`` or ``epi-symmetric``.
    subset : tuple of int, optional
        Minimizing subset ``S`` (the agents charged ``C_i - q_i``).
    partition : tuple of tuple, optional
        Minimizing block family for the partitioned bound.
    q : tuple of float
        Compression rates at the optimum.
    Q : tuple of float
        Diagonal input covariance.
    Q_mode : str
        ``search`` or ``fixed``.
    Q_start : int
        Start of the covariance search that won (``-1`` when fixed).
    """

    bound: float
    kind: str
    subset: tuple | None = None
    partition: tuple | None = None
    q: tuple = ()
    Q: tuple = ()
    Q_mode: str = "fixed"
    Q_start: int = -1
    seed: int | None = None
    n_samples: int | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def describe(self) -> str:
        """One-line human-readable summary."""
        where = ""
        if self.partition is not None:
            where = f" family={format_family(self.partition)}"
        elif self.subset is not None:
            where = f" S={format_subset(self.subset)}"
        return f"{self.kind}: {self.bound:.6f} bits{where} Q={self.Q_mode}"


# ---------------------------------------------------------------------------
# per-block statistics


class _Block:
    """Precomputed pieces of ``F`` for one block at a fixed covariance.

    ``H`` is ``(n, r, t)`` and ``p`` is the diagonal of ``Q``, either
    ``(t,)`` or ``(n, t)``.
    """

    def __init__(self, H, p, Z):
        self.Z = list(Z)
        n, _, t = H.shape
        k = len(self.Z)
        self.k = k
        self.m = min(t, k)
        self.wide = k > t
        HZ = H[:, self.Z, :]
        p = np.broadcast_to(np.asarray(p, dtype=float), (n, t))
        L = gram(HZ, p)
        self.a = _logdet2(np.eye(k) + L)
        if not self.wide:
            self.b0 = _logdet2(L)
        else:
            with np.errstate(divide="ignore"):
                self.logQ = np.sum(np.log2(p), axis=1)
            self.HZ = HZ

    def b(self, q, derivs):
        """Per-sample ``log2|W_Z|`` and its derivatives in ``q_Z``.

        ``q`` is ``(n, |Z|)``.
        """
        if not self.wide:
            b = self.b0 - q.sum(axis=1)
            if not derivs:
                return b
            n, k = q.shape
            return b, -np.ones((n, k)), np.zeros((n, k, k))
        x = np.exp2(-q)
        Hh = np.conj(np.swapaxes(self.HZ, -1, -2))
        K = Hh @ (x[:, :, None] * self.HZ)
        sign, ld = np.linalg.slogdet(K)
        with np.errstate(invalid="ignore"):
            b = self.logQ + np.where(sign.real > 0, ld / LN2, -np.inf)
        if not derivs:
            return b
        ok = np.isfinite(b)
        n, k = q.shape
        g = np.zeros((n, k))
        h = np.zeros((n, k, k))
        if np.any(ok):
            Kinv = np.linalg.inv(K[ok])
            M = self.HZ[ok] @ Kinv @ Hh[ok]
            c = np.real(np.diagonal(M, axis1=1, axis2=2))
            xo = x[ok]
            g[ok] = -xo * c
            hh = -LN2 * xo[:, :, None] * xo[:, None, :] * np.abs(M) ** 2
            hh[:, np.arange(k), np.arange(k)] += LN2 * xo * c
            h[ok] = hh
        return b, g, h


def _logdet2(M):
    sign, ld = np.linalg.slogdet(M)
    with np.errstate(invalid="ignore"):
        return np.where(sign.real > 0, ld / LN2, -np.inf)


def _epi_value(a, b, m, derivs=False, gb=None, hb=None):
    """``m log2(2^{a/m} - 2^{b/m})`` and its derivatives through ``b``.

    ``a, b`` broadcast together; ``gb, hb`` are the gradient and Hessian of
    ``b`` with a leading axis matching ``b``.
    """
    b = np.maximum(b, _B_FLOOR)
    alpha = np.exp2(a / m)
    u = np.exp2(b / m)
    gap = np.maximum(alpha - u, alpha * 1e-15)
    val = m * np.log2(gap)
    if not derivs:
        return val
    floored = b <= _B_FLOOR
    db = np.where(floored, 0.0, -u / gap)
    dbb = np.where(floored, 0.0, -(LN2 / m) * u * alpha / gap ** 2)
    grad = db[..., None] * gb
    hess = dbb[..., None, None] * gb[..., :, None] * gb[..., None, :] + db[..., None, None] * hb
    return val, grad, hess


# ---------------------------------------------------------------------------
# max-min terms


class EpiTerms:
    """Terms ``sum_j F(Z_j) + sum_{uncovered} (C_i - q_i)`` for block families.

    Parameters
    ----------
    H : (n, r, t) ndarray
    p : (t,) or (n, t) array_like
        Diagonal of ``Q``.
    C : (r,) array_like
    families : sequence of tuple of tuple
        Each family is a tuple of disjoint blocks.
    ergodic : bool
        If true, one ``q`` is shared by all samples and ``a, b`` are
        ensemble means (``F``); otherwise problem ``j`` uses sample ``j``
        (``G``).
    tied : bool
        Use one variable for all agents (``q_i = x``).
    """

    def __init__(self, H, p, C, families, ergodic=True, tied=False):
        self.n, self.r, self.t = H.shape
        self.C = np.asarray(C, dtype=float)
        self.families = tuple(tuple(tuple(Z) for Z in fam) for fam in families)
        self.ergodic = ergodic
        self.tied = tied
        self.dim = 1 if tied else self.r
        blocks = sorted({Z for fam in self.families for Z in fam}, key=lambda z: (len(z), z))
        self.blocks = {Z: _Block(H, p, Z) for Z in blocks}
        self._uncovered = []
        for fam in self.families:
            cov = {i for Z in fam for i in Z}
            self._uncovered.append([i for i in range(self.r) if i not in cov])

    def _block_terms(self, Z, q, idx, derivs):
        blk = self.blocks[Z]
        if self.ergodic:
            a = np.mean(blk.a)
            vals, grads, hesss = [], [], []
            for qk in q:
                qq = np.broadcast_to(qk[list(Z)], (self.n, len(Z)))
                if derivs:
                    b, gb, hb = blk.b(qq, True)
                    vals.append(b.mean())
                    grads.append(gb.mean(axis=0))
                    hesss.append(hb.mean(axis=0))
                else:
                    vals.append(blk.b(qq, False).mean())
            b = np.array(vals)
            if not derivs:
                return _epi_value(a, b, blk.m)
            return _epi_value(a, b, blk.m, True, np.array(grads), np.array(hesss))
        qq = q[:, list(Z)]
        sub = _Subsample(blk, idx)
        if not derivs:
            return _epi_value(sub.a, sub.b(qq, False), blk.m)
        b, gb, hb = sub.b(qq, True)
        return _epi_value(sub.a, b, blk.m, True, gb, hb)

    def __call__(self, x, idx, derivs):
        k = x.shape[0]
        q = np.repeat(x, self.r, axis=1) if self.tied else x
        cache = {Z: self._block_terms(Z, q, idx, derivs) for Z in self.blocks}
        K = len(self.families)
        vals = np.zeros((k, K))
        if derivs:
            G = np.zeros((k, K, self.r))
            Hs = np.zeros((k, K, self.r, self.r))
        for j, fam in enumerate(self.families):
            unc = self._uncovered[j]
            vals[:, j] = np.sum(self.C[unc]) - np.sum(q[:, unc], axis=1)
            if derivs:
                G[:, j, unc] -= 1.0
            for Z in fam:
                if derivs:
                    v, g, h = cache[Z]
                    zz = np.array(Z)
                    G[:, j, zz] += g
                    Hs[:, j, zz[:, None], zz[None, :]] += h
                else:
                    v = cache[Z]
                vals[:, j] += v
        if not derivs:
            return vals
        if self.tied:
            G = G.sum(axis=2, keepdims=True)
            Hs = Hs.sum(axis=(2, 3))[..., None, None]
        return vals, G, Hs


class _Subsample:
    """View of a :class:`_Block` restricted to some samples."""

    def __init__(self, blk, idx):
        self.blk, self.idx = blk, idx
        self.a = blk.a[idx]

    def b(self, q, derivs):
        blk = self.blk
        if not blk.wide:
            b = blk.b0[self.idx] - q.sum(axis=1)
            if not derivs:
                return b
            n, k = q.shape
            return b, -np.ones((n, k)), np.zeros((n, k, k))
        view = object.__new__(_Block)
        view.__dict__.update(blk.__dict__)
        view.HZ = blk.HZ[self.idx]
        view.logQ = blk.logQ[self.idx]
        return _Block.b(view, q, derivs)


# ---------------------------------------------------------------------------
# bound functions for a single block


def _block_inputs(config, H, subset, q_S, Q):
    S = tuple(sorted(int(i) for i in subset))
    if not S:
        raise EmptySubset("the EPI bound function needs a nonempty agent set")
    if len(set(S)) != len(S) or S[-1] >= config.r or S[0] < 0:
        raise BadRange(f"invalid agent subset {S}")
    q = np.asarray(q_S, dtype=float).reshape(-1)
    if q.size != len(S):
        raise BadRange(f"{q.size} rates given for a block of {len(S)} agents")
    if np.any(q < 0) or np.any(np.isnan(q)):
        raise BadRange("compression rates must be nonnegative")
    Q = CovarianceQ.isotropic(config.t, config.P) if Q is None else Q.check(config.P)
    return S, q, _Block(H, Q.array, S)


def epi_F(subset: Sequence[int], q_S, config: SystemConfig, ensemble: ChannelEnsemble,
          Q: CovarianceQ | None = None) -> EpiTerm:
    """Ergodic EPI bound function of one agent block.

    Parameters
    ----------
    subset : sequence of int
        Zero-based agents.
    q_S : array_like
        One nonnegative rate per agent of ``subset`` (in sorted order).
    config : SystemConfig
    ensemble : ChannelEnsemble
    Q : CovarianceQ, optional
        ``(P/t) I`` by default.

    Raises
    ------
    EmptySubset
    """
    ensemble.compatible(config)
    S, q, blk = _block_inputs(config, ensemble.H, subset, q_S, Q)
    b = np.mean(blk.b(np.broadcast_to(q, (len(ensemble), len(S))), False))
    val = float(_epi_value(np.mean(blk.a), b, blk.m))
    return EpiTerm(subset=S, q_S=tuple(float(v) for v in q), value=val, m=blk.m)


def epi_G(subset: Sequence[int], q_S, config: SystemConfig, H,
          Q: CovarianceQ | None = None) -> float:
    """Block-fading EPI bound function for one channel realization.

    Parameters
    ----------
    H : ChannelMatrix or (r, t) array_like

    Raises
    ------
    EmptySubset
    """
    Hm = np.asarray(H.array if isinstance(H, ChannelMatrix) else H, dtype=complex)
    if Hm.shape != (config.r, config.t):
        raise BadRange(f"channel shape {Hm.shape} does not match ({config.r}, {config.t})")
    S, q, blk = _block_inputs(config, Hm[None], subset, q_S, Q)
    b = blk.b(q[None], False)
    return float(_epi_value(blk.a, b, blk.m)[0])


# ---------------------------------------------------------------------------
# cut-set


def cutset_values(H, p, C):
    """Per-sample cut-set terms for every subset, shape ``(n, 2**r)``."""
    n, r, t = H.shape
    C = np.asarray(C, dtype=float)
    A = gram(H, p)
    out = np.empty((n, 2 ** r))
    for j, S in enumerate(all_subsets(r)):
        comp = [i for i in range(r) if i not in S]
        v = np.full(n, float(np.sum(C[comp])))
        if S:
            v = v + _logdet2(np.eye(len(S)) + A[:, list(S)][:, :, list(S)])
        out[:, j] = v
    return out


def cutset_ergodic(config: SystemConfig, ensemble: ChannelEnsemble,
                   Q: CovarianceQ | None = None) -> BoundReport:
    """Cut-set bound for fast fading, ``(P/t) I`` input by default."""
    ensemble.compatible(config)
    Q = CovarianceQ.isotropic(config.t, config.P) if Q is None else Q.check(config.P)
    vals = cutset_values(ensemble.H, Q.array, config.C).mean(axis=0)
    j = int(np.argmin(vals))
    S = all_subsets(config.r)[j]
    return BoundReport(bound=float(vals[j]), kind="cut-set", subset=S, Q=Q.diag,
                       seed=ensemble.seed, n_samples=len(ensemble))


def cutset_outage_values(config: SystemConfig, ensemble: ChannelEnsemble,
                         Q: CovarianceQ | None = None):
    """Per-sample cut-set value, maximized over diagonal ``Q`` unless given."""
    ensemble.compatible(config)
    H = ensemble.H
    n = len(ensemble)
    if Q is not None:
        return cutset_values(H, Q.check(config.P).array, config.C).min(axis=1)
    # the cut-set value for sample k only depends on row k of p
    def obj(p):
        return _cutset_rows(H, p, config.C)

    return maximize_simplex_batch(obj, n, config.t, config.P, seed=ensemble.seed).value


def _cutset_rows(H, p, C):
    A = gram(H, p)
    n, r, _ = H.shape
    best = np.full(n, np.inf)
    for S in all_subsets(r):
        comp = [i for i in range(r) if i not in S]
        v = np.full(n, float(np.sum(C[comp])))
        if S:
            v = v + _logdet2(np.eye(len(S)) + A[:, list(S)][:, :, list(S)])
        best = np.minimum(best, v)
    return best


def cutset_outage(config: SystemConfig, ensemble: ChannelEnsemble, R: float,
                  Q: CovarianceQ | None = None) -> float:
    """Fraction of samples whose best cut-set value falls below ``R``."""
    return float(np.mean(cutset_outage_values(config, ensemble, Q) < R))


# ---------------------------------------------------------------------------
# EPI max-min bounds


def _subset_families(r):
    """Families with at most one block; family ``j`` charges subset ``S_j``."""
    fams = []
    for S in all_subsets(r):
        comp = tuple(i for i in range(r) if i not in S)
        fams.append((comp,) if comp else ())
    return fams


def _resolve_Q(config, Q):
    if Q is None:
        return None
    if isinstance(Q, str):
        if Q == "fixed":
            return CovarianceQ.isotropic(config.t, config.P)
        if Q == "search":
            return None
        raise BadRange(f"unknown covariance mode {Q!r}")
    return Q.check(config.P)


class _WarmEpi:
    """Solve the q-problem for a covariance, warm-starting from the last one."""

    def __init__(self, config, H, families, ergodic, tied):
        self.config, self.H = config, H
        self.families, self.ergodic, self.tied = families, ergodic, tied
        self.x = None
        self.calls = 0

    def __call__(self, p):
        C = self.config.C
        terms = EpiTerms(self.H, p, C, self.families, self.ergodic, self.tied)
        hi = np.array([C.min()]) if self.tied else C.copy()
        m = 1 if self.ergodic else self.H.shape[0]
        if self.x is None:
            x0 = np.tile(0.5 * hi, (m, 1))
            mu = 1.0
        else:
            x0, mu = self.x, 1e-2
        x, v = maxmin_box_batch(terms, np.zeros(terms.dim), hi, x0=x0, mu_start=mu)
        self.x = x
        self.calls += 1
        return v, x, terms


def _epi_bound(config, ensemble, families, kind, Q, equal_q):
    ensemble.compatible(config)
    if equal_q and not config.symmetric:
        raise BadRange("equal compression rates need equal link capacities")
    Q = _resolve_Q(config, Q)
    H = ensemble.H
    solver = _WarmEpi(config, H, families, True, bool(equal_q))
    if Q is None:
        res = maximize_simplex_batch(lambda p: solver(p[0])[0], 1, config.t, config.P,
                                     seed=ensemble.seed)
        Q = CovarianceQ(res.p[0])
        mode, start = "search", int(res.start[0])
    else:
        mode, start = "fixed", -1
    v, x, terms = solver(Q.array)
    q = np.repeat(x[0], config.r) if equal_q else x[0]
    vals = terms(x, np.array([0]), False)[0]
    j = int(np.argmin(vals))
    fam = terms.families[j]
    covered = {i for Z in fam for i in Z}
    S = tuple(i for i in range(config.r) if i not in covered)
    return BoundReport(bound=float(max(vals[j], 0.0)), kind=kind, subset=S,
                       partition=fam if kind == "epi-partitioned" else None,
                       q=tuple(float(a) for a in q), Q=Q.diag, Q_mode=mode, Q_start=start,
                       seed=ensemble.seed, n_samples=len(ensemble),
                       diagnostics={"equal_q": bool(equal_q), "solves": solver.calls})


def ub_fast(config: SystemConfig, ensemble: ChannelEnsemble, Q=None,
            equal_q: bool = False) -> BoundReport:
    """Fast-fading EPI bound, max over ``(Q, q)`` of a min over subsets.

    The subset term is ``F(S^c, q_{S^c}) + sum_{i in S} (C_i - q_i)`` with
    ``q_i`` in ``[0, C_i]``.

    Parameters
    ----------
    Q : CovarianceQ or {"search", "fixed"}, optional
        A given covariance, a search over diagonal covariances with full
        power (default), or ``(P/t) I``.
    equal_q : bool, default False
        Restrict to one common rate (equal capacities only). In expectation
        the optimum has this form, but on a finite ensemble the agents are
        not exactly exchangeable and the restricted value can fall below an
        achievable rate, so it is off by default.
    """
    if config.r > 16:
        raise BadRange("ub_fast supports at most 16 agents")
    return _epi_bound(config, ensemble, _subset_families(config.r), "epi-fast", Q, equal_q)


def ub_fast_partitioned(config: SystemConfig, ensemble: ChannelEnsemble, Q=None,
                        equal_q: bool = False) -> BoundReport:
    """Fast-fading EPI bound minimized over families of disjoint blocks.

    The family term is ``sum_j F(Z_j, q_{Z_j}) + sum_{uncovered} (C_i - q_i)``.
    Single-block families are included, so the value never exceeds
    :func:`ub_fast` at the same covariance.
    """
    if config.r > 8:
        raise BadRange("ub_fast_partitioned supports at most 8 agents")
    return _epi_bound(config, ensemble, all_families(config.r), "epi-partitioned", Q,
                      equal_q)


def _symmetric_terms(H, p, C, r, t):
    """Per block size ``j``: the crossing value ``C - q_j*`` and ``q_j*``."""
    out = []
    for j in range(1, r + 1):
        blk = _Block(H, p, tuple(range(j)))
        a = float(np.mean(blk.a))
        if j <= t:
            B = float(np.mean(blk.b0)) / j
            Aj = a / j
            v = C + Aj - np.log2(np.exp2(C) + np.exp2(B))
            out.append(min(v, C))
            continue
        # no closed form: the crossing of F(j, q) / j with C - q by bisection
        n = H.shape[0]

        def resid(q, blk=blk, a=a, j=j):
            b = float(np.mean(blk.b(np.full((n, j), q), False)))
            return float(_epi_value(a, b, blk.m)) / j - (C - q)

        if resid(0.0) >= 0.0:
            out.append(C)
        else:
            out.append(C - bisect_scalar(resid, 0.0, C, tol=1e-12))
    return np.array(out)


def ub_symmetric(config: SystemConfig, ensemble: ChannelEnsemble, Q=None) -> BoundReport:
    """Closed-form EPI bound for equal link capacities.

    For block size ``j <= t`` the optimal common rate is eliminated
    analytically,

        r C + r [ (1/j) E log2|I + H_j Q H_j*| - log2(2^C + 2^{(1/j) E log2|H_j Q H_j*|}) ],

    with ``H_j`` the first ``j`` rows (agents are exchangeable). For
    ``j > t`` the crossing rate is found numerically. The bound is ``r``
    times the smallest per-size value, capped at ``r C``.

    Raises
    ------
    BadRange
        If the capacities differ.
    """
    ensemble.compatible(config)
    if not config.symmetric:
        raise BadRange("ub_symmetric needs equal link capacities")
    r, t = config.r, config.t
    C = float(config.capacities[0])
    H = ensemble.H
    Q = _resolve_Q(config, Q)
    if C == 0.0:
        return BoundReport(bound=0.0, kind="epi-symmetric", q=(0.0,) * r,
                           Q=CovarianceQ.isotropic(t, config.P).diag if Q is None else Q.diag,
                           Q_mode="fixed" if Q is not None else "search",
                           seed=ensemble.seed, n_samples=len(ensemble))

    def obj(p):
        return np.array([r * _symmetric_terms(H, p[0], C, r, t).min()])

    if Q is None:
        res = maximize_simplex_batch(obj, 1, t, config.P, seed=ensemble.seed)
        Q = CovarianceQ(res.p[0])
        mode, start = "search", int(res.start[0])
    else:
        mode, start = "fixed", -1
    per_size = _symmetric_terms(H, Q.array, C, r, t)
    j = int(np.argmin(per_size))
    qstar = C - per_size[j]
    return BoundReport(bound=float(max(r * per_size[j], 0.0)), kind="epi-symmetric",
                       subset=tuple(range(j + 1)), q=(float(qstar),) * r, Q=Q.diag,
                       Q_mode=mode, Q_start=start, seed=ensemble.seed,
                       n_samples=len(ensemble),
                       diagnostics={"block_size": j + 1})


def ub_outage_values(config: SystemConfig, ensemble: ChannelEnsemble,
                     partitioned: bool = True, Q=None):
    """Per-sample block-fading EPI bound value.

    Each sample gets its own ``(Q, q)`` maximizing the min over subsets (or
    over block families when ``partitioned``) of ``sum G + sum (C_i - q_i)``.

    Returns
    -------
    (n,) ndarray
    """
    ensemble.compatible(config)
    if partitioned and config.r > 8:
        raise BadRange("partitioned outage bound supports at most 8 agents")
    fams = all_families(config.r) if partitioned else _subset_families(config.r)
    solver = _WarmEpi(config, ensemble.H, fams, False, False)
    Q = _resolve_Q(config, Q)
    if Q is not None:
        return solver(np.tile(Q.array, (len(ensemble), 1)))[0]
    res = maximize_simplex_batch(lambda p: solver(p)[0], len(ensemble), config.t, config.P,
                                 seed=ensemble.seed)
    return res.value


def ub_outage(config: SystemConfig, ensemble: ChannelEnsemble, R: float,
              partitioned: bool = True, Q=None) -> float:
    """Lower bound on the outage probability at rate ``R``."""
    return float(np.mean(ub_outage_values(config, ensemble, partitioned, Q) < R))
