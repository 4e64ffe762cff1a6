"""Data containers shared by the rate routines."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Any

import numpy as np

from ..errors import BadRange, InfeasibleCovariance

__all__ = [
    "CompressionProfile",
    "RateReport",
    "TwoAgentSolution",
    "DpcParams",
    "format_subset",
    "format_family",
    "parse_subset",
]


def format_subset(S) -> str:
    """Render a zero-based subset with one-based labels, e.g. ``{1,2}``."""
    if S is None:
        return ""
    return "{" + ",".join(str(i + 1) for i in S) + "}"


def format_family(blocks) -> str:
    if blocks is None:
        return ""
    return "|".join(format_subset(b) for b in blocks) or "{}"


def parse_subset(text: str) -> tuple:
    text = text.strip()
    if not text:
        return ()
    inner = text.strip("{}")
    return tuple(int(v) - 1 for v in inner.split(",") if v.strip())


class CompressionProfile:
    """Compression rates ``q_i`` per agent and channel sample.

    Parameters
    ----------
    q : array_like
        Shape ``(n, r)`` for per-sample rates or ``(r,)`` for rates that do
        not depend on the channel.
    n : int, optional
        Number of samples to broadcast a constant profile to.

    Notes
    -----
    The quantization noise power follows ``1/(1 + P_D) = 1 - 2^-q``. A rate
    of zero maps to infinite noise power (nothing is forwarded).
    """

    __slots__ = ("_q",)

    def __init__(self, q, n: int | None = None):
        q = np.array(q, dtype=float)
        if q.ndim == 1:
            q = q[None, :] if n is None else np.tile(q, (int(n), 1))
        if q.ndim != 2:
            raise BadRange("q must have shape (r,) or (n, r)")
        if np.any(~np.isfinite(q)) or np.any(q < 0):
            raise BadRange("compression rates must be finite and nonnegative")
        q.setflags(write=False)
        self._q = q

    @classmethod
    def constant(cls, q, n: int):
        return cls(np.asarray(q, dtype=float), n)

    @classmethod
    def from_noise_powers(cls, PD):
        """Inverse of :attr:`noise_powers`."""
        PD = np.asarray(PD, dtype=float)
        if np.any(PD < 0):
            raise BadRange("noise powers must be nonnegative")
        with np.errstate(divide="ignore"):
            q = np.log2(1.0 + 1.0 / PD)
        return cls(q)

    @property
    def q(self) -> np.ndarray:
        return self._q

    @property
    def shape(self):
        return self._q.shape

    @property
    def r(self) -> int:
        return self._q.shape[1]

    def broadcast(self, n: int) -> np.ndarray:
        """Rates as an ``(n, r)`` array."""
        if self._q.shape[0] == n:
            return self._q
        if self._q.shape[0] == 1:
            return np.broadcast_to(self._q, (n, self.r))
        raise BadRange(f"profile has {self._q.shape[0]} samples, expected {n}")

    @property
    def factor(self) -> np.ndarray:
        """``1 - 2^-q``, the gain applied to each agent's observation."""
        return -np.expm1(-self._q * np.log(2.0))

    @property
    def noise_powers(self) -> np.ndarray:
        """``P_D = 1/(1 - 2^-q) - 1``; infinite where ``q = 0``."""
        with np.errstate(divide="ignore"):
            return 1.0 / np.expm1(self._q * np.log(2.0))

    def mean(self) -> np.ndarray:
        """Per-agent ensemble average of ``q``."""
        return self._q.mean(axis=0)

    def __repr__(self):
        return f"CompressionProfile(shape={self._q.shape}, mean={np.round(self.mean(), 4)})"


def _fmt(v: Any) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return " ".join(_fmt(x) for x in v)
    return str(v)


@dataclass
class RateReport:
    """Achievable rate or bound value with the arguments that produced it.

    Attributes
    ----------
    rate : float
        Bits per channel use.
    scheme : str
    subset : tuple or None
        Minimizing agent subset (zero-based).
    partition : tuple or None
        Minimizing family of blocks, for partition-based bounds.
    q_mean : tuple
        Per-agent ensemble average of ``q``.
    Q : tuple
        Diagonal of the transmit covariance.
    iterations : int
    seed : int or None
    n_samples : int
    diagnostics : dict
        Scheme-specific extras (dual gap, flags, ...).
    profile : CompressionProfile or None
        Per-sample rates, kept for re-evaluation; not serialized.
    """

    rate: float
    scheme: str
    subset: tuple | None = None
    partition: tuple | None = None
    q_mean: tuple = ()
    Q: tuple = ()
    iterations: int = 0
    seed: int | None = None
    n_samples: int = 0
    diagnostics: dict = field(default_factory=dict)
    profile: CompressionProfile | None = field(default=None, repr=False, compare=False)

    def to_record(self) -> str:
        """Flat ``key = value`` text, one pair per line."""
        lines = [
            f"scheme = {self.scheme}",
            f"rate = {self.rate!r}",
            f"subset = {format_subset(self.subset)}",
            f"partition = {format_family(self.partition) if self.partition is not None else ''}",
            f"q_mean = {_fmt(tuple(float(v) for v in self.q_mean))}",
            f"Q = {_fmt(tuple(float(v) for v in self.Q))}",
            f"iterations = {self.iterations}",
            f"seed = {'' if self.seed is None else self.seed}",
            f"n_samples = {self.n_samples}",
        ]
        for k in sorted(self.diagnostics):
            lines.append(f"diag.{k} = {_fmt(self.diagnostics[k])}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_record(cls, text: str) -> "RateReport":
        kv = {}
        for line in text.splitlines():
            if "=" in line:
                k, v = line.split("=", 1)
                kv[k.strip()] = v.strip()

        def floats(s):
            return tuple(float(x) for x in s.split()) if s else ()

        part = kv.get("partition", "")
        diags = {}
        for k, v in kv.items():
            if k.startswith("diag."):
                try:
                    diags[k[5:]] = float(v)
                except ValueError:
                    diags[k[5:]] = v
        return cls(
            rate=float(kv["rate"]),
            scheme=kv["scheme"],
            subset=parse_subset(kv["subset"]) if kv.get("subset") else None,
            partition=(tuple(parse_subset(b) for b in part.split("|") if b != "{}")
                       if part else None),
            q_mean=floats(kv.get("q_mean", "")),
            Q=floats(kv.get("Q", "")),
            iterations=int(kv.get("iterations", 0)),
            seed=int(kv["seed"]) if kv.get("seed") else None,
            n_samples=int(kv.get("n_samples", 0)),
            diagnostics=diags,
        )


@dataclass
class TwoAgentSolution:
    """Closed-form solution of the symmetric two-agent problem.

    Attributes
    ----------
    theta : float
        Water-filling parameter.
    rate : float
        ``2C - E[q_1 + q_2]``.
    q1, q2 : (n,) ndarray
    delta, delta1, delta2, delta3, delta4 : (n,) ndarray
        Determinant diagnostics (``delta`` uses the optimized ``q``).
    residual : float
        Left minus right side of the implicit equation at ``theta``.
    """

    theta: float
    rate: float
    q1: np.ndarray
    q2: np.ndarray
    delta: np.ndarray
    delta1: np.ndarray
    delta2: np.ndarray
    delta3: np.ndarray
    delta4: np.ndarray
    residual: float
    seed: int | None = None

    @property
    def profile(self) -> CompressionProfile:
        return CompressionProfile(np.column_stack([self.q1, self.q2]))


@dataclass
class DpcParams:
    """Parameters of the combined destination-decoding / DPC expression.

    Attributes
    ----------
    perm : tuple of int
        Encoding order of the agents (zero-based), constant over samples.
    Q : (n, t, t) ndarray
        Total transmit covariance per sample.
    B : (n, r, t, t) ndarray
        Private-message covariances per sample and agent.
    q : (n, r) ndarray
        Compression rates per sample.
    """

    perm: tuple
    Q: np.ndarray
    B: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        self.Q = np.asarray(self.Q, dtype=complex)
        self.B = np.asarray(self.B, dtype=complex)
        self.q = np.asarray(self.q, dtype=float)
        n, r = self.q.shape
        if sorted(self.perm) != list(range(r)):
            raise BadRange("perm must be a permutation of the agents")
        if self.Q.shape[0] != n or self.B.shape[:2] != (n, r):
            raise BadRange("inconsistent sample counts")
        if np.any(self.q < 0):
            raise BadRange("q must be nonnegative")

    def check(self, P: float, tol: float = 1e-9):
        """Raise :class:`InfeasibleCovariance` at the first bad sample."""
        herm = lambda M: np.max(np.abs(M - np.conj(np.swapaxes(M, -1, -2))))
        for k in range(self.q.shape[0]):
            mats = [self.Q[k]] + list(self.B[k]) + [self.Q[k] - self.B[k].sum(axis=0)]
            for M in mats:
                if herm(M) > 1e-10 or np.min(np.linalg.eigvalsh(M)) < -tol:
                    raise InfeasibleCovariance(k, "Q, B_i and Q - sum B_i must be PSD")
        if np.mean(np.trace(self.Q, axis1=1, axis2=2).real) > P + tol:
            raise InfeasibleCovariance(-1, "average trace of Q exceeds P")
        return self
