"""System configuration and seeded Rayleigh-fading channel ensembles.

Every sample of an ensemble is drawn from its own random stream, keyed by
``(seed, sample_index)``. Sample ``k`` is therefore the same whether the
ensemble is generated serially or split across workers.

File format
-----------
:func:`save_ensemble` writes one ASCII header line followed by the raw
channel entries::

    NOMADIC-ENSEMBLE 1 r=<r> t=<t> n=<n> seed=<seed> rows=<rows> antennas=<a1,a2,...>\\n
    <n * rows * t little-endian complex128 values, C order (sample, row, col)>

The header is the only metadata stored. Power and link capacities are not
part of an ensemble since the fading draws do not depend on them.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import BadRange, SpecError

__all__ = [
    "SystemConfig",
    "CovarianceQ",
    "ChannelMatrix",
    "ChannelEnsemble",
    "db_to_linear",
    "linear_to_db",
    "sample_stream",
    "sample_channel",
    "make_ensemble",
    "save_ensemble",
    "load_ensemble",
    "DEFAULT_ERGODIC_SAMPLES",
    "DEFAULT_OUTAGE_SAMPLES",
]

DEFAULT_ERGODIC_SAMPLES = 2000
DEFAULT_OUTAGE_SAMPLES = 10_000

_MAGIC = "NOMADIC-ENSEMBLE"
_FORMAT_VERSION = 1


def db_to_linear(p_db):
    """Convert a power in dB to linear scale."""
    return 10.0 ** (np.asarray(p_db, dtype=float) / 10.0)


def linear_to_db(p):
    """Convert a linear power to dB."""
    return 10.0 * np.log10(np.asarray(p, dtype=float))


@dataclass(frozen=True)
class SystemConfig:
    """Static description of the network.

    Parameters
    ----------
    r : int
        Number of agents.
    t : int
        Number of transmit antennas.
    P : float
        Total transmit power, linear scale.
    capacities : sequence of float
        Link capacity ``C_i`` of each agent in bits per channel use. A single
        number is broadcast to all agents.
    agent_antennas : sequence of int, optional
        Receive antennas per agent, all one by default.
    """

    r: int
    t: int
    P: float
    capacities: tuple = ()
    agent_antennas: tuple | None = None

    def __post_init__(self):
        r, t = int(self.r), int(self.t)
        if r < 1 or t < 1:
            raise SpecError("r and t must be at least 1")
        if not np.isfinite(self.P) or self.P <= 0:
            raise SpecError("P must be positive")
        caps = self.capacities
        if np.ndim(caps) == 0:
            caps = (float(caps),) * r
        caps = tuple(float(c) for c in caps)
        if len(caps) != r:
            raise SpecError(f"expected {r} capacities, got {len(caps)}")
        if any(c < 0 or not np.isfinite(c) for c in caps):
            raise SpecError("capacities must be finite and nonnegative")
        ant = self.agent_antennas
        if ant is not None:
            ant = tuple(int(a) for a in ant)
            if len(ant) != r or any(a < 1 for a in ant):
                raise SpecError("agent_antennas needs r entries, each >= 1")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "P", float(self.P))
        object.__setattr__(self, "capacities", caps)
        object.__setattr__(self, "agent_antennas", ant)

    @classmethod
    def from_db(cls, r, t, P_dB, C, agent_antennas=None):
        """Build a configuration with the power given in dB."""
        return cls(r, t, float(db_to_linear(P_dB)), C, agent_antennas)

    @property
    def C(self) -> np.ndarray:
        """Capacities as an array."""
        return np.array(self.capacities)

    @property
    def antennas(self) -> tuple:
        return self.agent_antennas or (1,) * self.r

    @property
    def rows(self) -> int:
        """Total number of receive antennas (rows of ``H``)."""
        return sum(self.antennas)

    @property
    def P_dB(self) -> float:
        return float(linear_to_db(self.P))

    @property
    def symmetric(self) -> bool:
        return len(set(self.capacities)) == 1

    def with_power(self, P):
        return SystemConfig(self.r, self.t, P, self.capacities, self.agent_antennas)

    def with_capacities(self, C):
        return SystemConfig(self.r, self.t, self.P, C, self.agent_antennas)

    def row_slices(self):
        """Row range of each agent inside the stacked channel matrix."""
        out, start = [], 0
        for a in self.antennas:
            out.append(slice(start, start + a))
            start += a
        return out


@dataclass(frozen=True)
class CovarianceQ:
    """Diagonal transmit covariance.

    Parameters
    ----------
    diag : sequence of float
        Per-antenna powers.
    """

    diag: tuple

    def __post_init__(self):
        d = tuple(float(x) for x in np.ravel(self.diag))
        if any(x < 0 or not np.isfinite(x) for x in d):
            raise BadRange("per-antenna powers must be finite and nonnegative")
        object.__setattr__(self, "diag", d)

    @classmethod
    def isotropic(cls, t, P):
        """``(P/t) I``."""
        return cls((P / t,) * t)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.diag)

    @property
    def total(self) -> float:
        return float(sum(self.diag))

    def check(self, P):
        """Raise :class:`BadRange` if the total power exceeds ``P``."""
        if self.total > P + 1e-9:
            raise BadRange(f"covariance uses power {self.total} > {P}")
        return self


class ChannelMatrix:
    """One fading realization with per-agent row access.

    Parameters
    ----------
    H : (rows, t) array_like
    antennas : sequence of int, optional
    """

    __slots__ = ("_H", "_slices")

    def __init__(self, H, antennas=None):
        H = np.array(H, dtype=complex)
        if H.ndim != 2:
            raise BadRange("channel matrix must be two-dimensional")
        if not np.all(np.isfinite(H)):
            raise BadRange("channel matrix has non-finite entries")
        H.setflags(write=False)
        self._H = H
        antennas = antennas or (1,) * H.shape[0]
        if sum(antennas) != H.shape[0]:
            raise BadRange("antenna counts do not match the row count")
        start, sl = 0, []
        for a in antennas:
            sl.append(slice(start, start + a))
            start += a
        self._slices = tuple(sl)

    @property
    def array(self) -> np.ndarray:
        return self._H

    @property
    def shape(self):
        return self._H.shape

    def agent(self, i) -> np.ndarray:
        """Rows ``H_i`` observed by agent ``i`` (zero-based)."""
        return self._H[self._slices[i]]

    def subset(self, S) -> np.ndarray:
        """Stacked rows ``H_S`` for a set of single-antenna agent indices."""
        return self._H[list(S)]

    def __array__(self, dtype=None, copy=None):
        return self._H if dtype is None else self._H.astype(dtype)

    def __repr__(self):
        return f"ChannelMatrix(shape={self._H.shape})"


def sample_stream(seed, index) -> np.random.Generator:
    """Random stream for sample ``index`` of the ensemble keyed by ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=(int(index),))
    return np.random.Generator(np.random.PCG64(ss))


def _draw(rng, rows, t):
    re = rng.standard_normal((rows, t))
    im = rng.standard_normal((rows, t))
    return (re + 1j * im) * np.sqrt(0.5)


def sample_channel(config: SystemConfig, stream: np.random.Generator) -> ChannelMatrix:
    """Draw one matrix of independent CN(0, 1) entries.

    Parameters
    ----------
    config : SystemConfig
    stream : numpy.random.Generator
        Advanced in place.

    Returns
    -------
    ChannelMatrix
        Shape ``(config.rows, config.t)``.
    """
    return ChannelMatrix(_draw(stream, config.rows, config.t), config.antennas)


class ChannelEnsemble:
    """Immutable, seeded list of channel realizations.

    Parameters
    ----------
    config : SystemConfig
        Supplies the shape; power and capacities are carried along for
        convenience but rate routines take their own configuration.
    seed : int
    H : (n, rows, t) ndarray
    """

    def __init__(self, config: SystemConfig, seed: int, H):
        H = np.array(H, dtype=np.complex128)
        if H.ndim != 3 or H.shape[1:] != (config.rows, config.t):
            raise BadRange(
                f"ensemble shape {H.shape} does not match ({config.rows}, {config.t})"
            )
        H.setflags(write=False)
        self.config = config
        self.seed = int(seed)
        self.H = H

    def __len__(self):
        return self.H.shape[0]

    @property
    def n_samples(self) -> int:
        return self.H.shape[0]

    def __getitem__(self, k) -> ChannelMatrix:
        return ChannelMatrix(self.H[k], self.config.antennas)

    def __iter__(self):
        for k in range(len(self)):
            yield self[k]

    @property
    def samples(self):
        return list(self)

    def compatible(self, config: SystemConfig):
        """Raise :class:`BadRange` unless ``config`` has this ensemble's shape."""
        if (config.rows, config.t) != self.H.shape[1:]:
            raise BadRange(
                f"config shape ({config.rows}, {config.t}) does not match "
                f"ensemble shape {self.H.shape[1:]}"
            )
        return self

    def subset(self, indices) -> "ChannelEnsemble":
        """Ensemble restricted to some sample indices (same seed)."""
        return ChannelEnsemble(self.config, self.seed, self.H[np.asarray(indices)])

    def __eq__(self, other):
        return (isinstance(other, ChannelEnsemble) and self.seed == other.seed
                and self.H.shape == other.H.shape
                and np.array_equal(self.H, other.H))

    __hash__ = None

    def __repr__(self):
        n, rows, t = self.H.shape
        return f"ChannelEnsemble(n={n}, rows={rows}, t={t}, seed={self.seed})"


def _block(seed, start, stop, rows, t):
    out = np.empty((stop - start, rows, t), dtype=np.complex128)
    for k in range(start, stop):
        out[k - start] = _draw(sample_stream(seed, k), rows, t)
    return out


def make_ensemble(config: SystemConfig, n_samples: int, seed: int,
                  workers: int = 1) -> ChannelEnsemble:
    """Generate a reproducible ensemble.

    Parameters
    ----------
    config : SystemConfig
    n_samples : int
        At least one.
    seed : int
    workers : int, default 1
        Number of threads. The result does not depend on it.

    Returns
    -------
    ChannelEnsemble
    """
    n_samples = int(n_samples)
    if n_samples < 1:
        raise BadRange("n_samples must be at least 1")
    rows, t = config.rows, config.t
    workers = max(1, int(workers))
    if workers == 1 or n_samples < 2 * workers:
        H = _block(seed, 0, n_samples, rows, t)
    else:
        edges = np.linspace(0, n_samples, workers + 1).astype(int)
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(lambda a: _block(seed, a[0], a[1], rows, t),
                                zip(edges[:-1], edges[1:])))
        H = np.concatenate(parts, axis=0)
    return ChannelEnsemble(config, seed, H)


def save_ensemble(ensemble: ChannelEnsemble, path) -> None:
    """Write an ensemble in the documented binary format."""
    cfg = ensemble.config
    n, rows, t = ensemble.H.shape
    ant = ",".join(str(a) for a in cfg.antennas)
    header = (f"{_MAGIC} {_FORMAT_VERSION} r={cfg.r} t={t} n={n} "
              f"seed={ensemble.seed} rows={rows} antennas={ant}\n")
    with open(Path(path), "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(ensemble.H.astype("<c16").tobytes(order="C"))


def load_ensemble(path, P: float = 1.0, capacities: Sequence[float] | float = 0.0
                  ) -> ChannelEnsemble:
    """Read an ensemble written by :func:`save_ensemble`.

    Parameters
    ----------
    path : path-like
    P, capacities
        Attached to the returned ensemble's configuration.
    """
    with open(Path(path), "rb") as fh:
        line = fh.readline().decode("ascii").split()
        if len(line) < 2 or line[0] != _MAGIC:
            raise SpecError(f"{path}: not an ensemble file")
        if int(line[1]) != _FORMAT_VERSION:
            raise SpecError(f"{path}: unsupported format version {line[1]}")
        meta = dict(item.split("=", 1) for item in line[2:])
        r, t, n, rows = (int(meta[k]) for k in ("r", "t", "n", "rows"))
        ant = tuple(int(a) for a in meta["antennas"].split(","))
        data = np.frombuffer(fh.read(), dtype="<c16")
    if data.size != n * rows * t:
        raise SpecError(f"{path}: expected {n * rows * t} entries, found {data.size}")
    cfg = SystemConfig(r, t, P, capacities, ant if any(a != 1 for a in ant) else None)
    return ChannelEnsemble(cfg, int(meta["seed"]), data.reshape(n, rows, t))
