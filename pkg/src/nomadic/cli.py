"""Command-line front end.

Usage::

    nomadic COMMAND [options]
    nomadic COMMAND --config experiment.cfg [options]

Commands write one CSV file (``--out``, stdout by default) and print a
one-line summary per sweep point on stderr. Options given on the command
line override the config file, which overrides the preset.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .analysis import dmt_ceo, dmt_ec, dmt_upper, supported_rate
from .bounds import (
    cutset_ergodic,
    cutset_outage_values,
    ub_fast,
    ub_fast_partitioned,
    ub_outage_values,
    ub_symmetric,
)
from .channel import ChannelEnsemble, SystemConfig, make_ensemble
from .errors import (
    BadRange,
    ConstraintViolated,
    EmptySubset,
    InfeasibleCovariance,
    NomadicError,
    SpecError,
    TooManyAgents,
)
from .rates import (
    ceo_constant_q,
    ceo_optimize_joint,
    ceo_optimize_per_channel,
    ceo_outage_values,
    ec_optimize,
    ec_outage_values,
    two_agent_q,
    two_agent_solve,
)
from .linalg import gram

__all__ = ["COMMANDS", "ExperimentSpec", "PRESETS", "parse_spec_text", "run", "main"]

COMMANDS = ("rates", "bounds", "outage", "dmt", "two-agent", "sweep")
EXIT_OK, EXIT_SPEC, EXIT_NUMERIC = 0, 2, 3

# errors caused by the request rather than by the numerics
_SPEC_ERRORS = (SpecError, BadRange, TooManyAgents, EmptySubset, ConstraintViolated,
                InfeasibleCovariance)


# ---------------------------------------------------------------------------
# experiment specification


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to reproduce one CLI run.

    Attributes
    ----------
    command : str
        One of :data:`COMMANDS`.
    r, t : int
    P_dB : tuple of float
        Power sweep.
    C : tuple of float
        One capacity for all agents or one per agent.
    n_samples, seed, workers : int
    out : str
        Output path; ``-`` for stdout.
    schemes, bounds : tuple of str
        Selectors; empty means the command default.
    epsilon : float
        Target outage probability.
    Q_mode : str
        ``search`` or ``fixed`` covariance for the EPI bounds.
    theta : tuple of float
        Water levels for a ``two-agent`` sweep; empty solves for the rate.
    m_grid : tuple of float
        Multiplexing gains for ``dmt``; empty means 11 points.
    preset : str
    """

    command: str = "rates"
    r: int = 2
    t: int = 2
    P_dB: tuple = (7.0,)
    C: tuple = (2.0,)
    n_samples: int = 1000
    seed: int = 0
    out: str = "-"
    schemes: tuple = ()
    bounds: tuple = ()
    epsilon: float = 0.01
    Q_mode: str = "search"
    theta: tuple = ()
    m_grid: tuple = ()
    workers: int = 1
    preset: str = ""

    def validate(self) -> "ExperimentSpec":
        """Raise :class:`SpecError` if the spec is inconsistent."""
        if self.command not in COMMANDS:
            raise SpecError(f"unknown command {self.command!r}; choose from {', '.join(COMMANDS)}")
        if self.r < 1 or self.t < 1:
            raise SpecError("r and t must be positive")
        if len(self.C) not in (1, self.r):
            raise SpecError(f"C needs 1 or {self.r} values, got {len(self.C)}")
        if any(c < 0 for c in self.C):
            raise SpecError("link capacities must be nonnegative")
        if not self.P_dB:
            raise SpecError("empty power sweep")
        if self.n_samples < 1:
            raise SpecError("n_samples must be positive")
        if not 0.0 < self.epsilon < 1.0:
            raise SpecError("epsilon must lie in (0, 1)")
        if self.Q_mode not in ("search", "fixed"):
            raise SpecError("Q_mode must be 'search' or 'fixed'")
        if self.workers < 1:
            raise SpecError("workers must be positive")
        if any(th <= 0 for th in self.theta):
            raise SpecError("theta values must be positive")
        for name in self.schemes + self.bounds:
            if name not in REGISTRY:
                raise SpecError(f"unknown scheme or bound {name!r}; choose from "
                                f"{', '.join(REGISTRY)}")
        allowed = _ALLOWED.get(self.command)
        if allowed is not None:
            for name in self.selected():
                if REGISTRY[name].kind not in allowed:
                    raise SpecError(f"{name!r} is not valid for the {self.command} command")
        return self

    def config(self, P_dB: float) -> SystemConfig:
        C = self.C if len(self.C) == self.r else self.C * self.r
        return SystemConfig.from_db(self.r, self.t, P_dB, C)

    def selected(self) -> tuple:
        """Scheme and bound names to evaluate, in output order."""
        names = self.schemes + self.bounds
        if names:
            return names
        return _DEFAULTS.get(self.command, ())

    def to_text(self) -> str:
        """Serialize as ``key = value`` lines under an ``[experiment]`` header."""
        lines = ["[experiment]"]
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ", ".join(_fmt(x) for x in v)
            else:
                v = _fmt(v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ExperimentSpec)}
_INT_FIELDS = {"r", "t", "n_samples", "seed", "workers"}
_FLOAT_FIELDS = {"epsilon"}
_FLOAT_LISTS = {"P_dB", "C", "theta", "m_grid"}
_NAME_LISTS = {"schemes", "bounds"}
_ALIASES = {"scheme": "schemes", "bound": "bounds", "p_db": "P_dB", "q_mode": "Q_mode",
            "n": "n_samples"}


def parse_float_list(text: str) -> tuple:
    """Parse ``"1, 2, 3"`` or an inclusive range ``"start:stop:step"``."""
    text = text.strip()
    if not text:
        return ()
    out = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            bits = part.split(":")
            if len(bits) != 3:
                raise SpecError(f"range {part!r} must be start:stop:step")
            a, b, s = (float(v) for v in bits)
            if s <= 0 or b < a:
                raise SpecError(f"bad range {part!r}")
            k = int(np.floor((b - a) / s + 1e-9))
            out.extend(float(round(a + i * s, 12)) for i in range(k + 1))
        else:
            out.append(float(part))
    return tuple(out)


def _coerce(key: str, value: str):
    try:
        if key in _INT_FIELDS:
            return int(value)
        if key in _FLOAT_FIELDS:
            return float(value)
        if key in _FLOAT_LISTS:
            return parse_float_list(value)
        if key in _NAME_LISTS:
            return tuple(v.strip() for v in value.split(",") if v.strip())
    except ValueError as exc:
        raise SpecError(f"bad value for {key}: {value!r}") from exc
    return value.strip()


def parse_spec_text(text: str) -> dict:
    """Parse a config file into a dict of spec fields.

    Blank lines, ``#`` comments and ``[section]`` headers are ignored.
    """
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line or (line.startswith("[") and line.endswith("]")):
            continue
        if "=" not in line:
            raise SpecError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key.lower(), key) if key not in _FIELD_TYPES else key
        if key not in _FIELD_TYPES:
            raise SpecError(f"line {lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def spec_from_text(text: str) -> ExperimentSpec:
    """Inverse of :meth:`ExperimentSpec.to_text`."""
    return ExperimentSpec(**parse_spec_text(text))


PRESETS = {
    "fig2": dict(command="two-agent", r=2, t=2, P_dB=(7.0,), C=(2.0,), n_samples=1000,
                 theta=tuple(float(round(0.05 * k, 12)) for k in range(1, 61))),
    "fig3": dict(command="sweep", r=2, t=2, P_dB=tuple(float(v) for v in range(0, 21, 2)),
                 C=(2.0,), n_samples=1500, epsilon=0.01,
                 schemes=("ec", "ceo", "ec_outage", "ceo_outage"),
                 bounds=("ub_symmetric", "ub_partitioned", "cutset", "ub_outage")),
}


# ---------------------------------------------------------------------------
# evaluators


@dataclass(frozen=True)
class Evaluator:
    kind: str  # rate | bound | outage-rate | outage-bound
    fn: Callable


def _vec(v) -> str:
    return ";".join(f"{float(x):.10g}" for x in v)


def _ec(cfg, ens, spec):
    rep = ec_optimize(cfg, ens)
    return rep.rate, rep.q_mean, rep.Q, "search"


def _ceo(cfg, ens, spec):
    rep = ceo_optimize_joint(cfg, ens)
    return rep.rate, rep.q_mean, rep.Q, "fixed"


def _ceo_pc(cfg, ens, spec):
    rep = ceo_optimize_per_channel(cfg, ens)
    return rep.rate, rep.q_mean, rep.Q, "search"


def _ceo_const(cfg, ens, spec):
    rep = ceo_constant_q(cfg, ens)
    return rep.rate, rep.q_mean, rep.Q, "fixed"


def _two(cfg, ens, spec):
    sol = two_agent_solve(cfg, ens)
    return sol.rate, (float(np.mean(sol.q1)), float(np.mean(sol.q2))), \
        (cfg.P / cfg.t,) * cfg.t, "fixed"


def _cut(cfg, ens, spec):
    rep = cutset_ergodic(cfg, ens)
    return rep.bound, (), rep.Q, "fixed"


def _bound(fn):
    def run(cfg, ens, spec):
        rep = fn(cfg, ens, Q=spec.Q_mode)
        return rep.bound, rep.q, rep.Q, rep.Q_mode
    return run


def _outage(fn):
    def run(cfg, ens, spec):
        vals = fn(cfg, ens)
        return supported_rate(vals, spec.epsilon), (), (), "search"
    return run


REGISTRY = {
    "ec": Evaluator("rate", _ec),
    "ceo": Evaluator("rate", _ceo),
    "ceo_per_channel": Evaluator("rate", _ceo_pc),
    "ceo_constant": Evaluator("rate", _ceo_const),
    "two_agent": Evaluator("rate", _two),
    "cutset": Evaluator("bound", _cut),
    "ub_fast": Evaluator("bound", _bound(ub_fast)),
    "ub_partitioned": Evaluator("bound", _bound(ub_fast_partitioned)),
    "ub_symmetric": Evaluator("bound", _bound(ub_symmetric)),
    "ec_outage": Evaluator("outage-rate", _outage(ec_outage_values)),
    "ceo_outage": Evaluator("outage-rate", _outage(ceo_outage_values)),
    "cutset_outage": Evaluator("outage-bound", _outage(cutset_outage_values)),
    "ub_outage": Evaluator("outage-bound",
                           _outage(lambda c, e: ub_outage_values(c, e, partitioned=True))),
    "ub_outage_subsets": Evaluator("outage-bound",
                                   _outage(lambda c, e: ub_outage_values(c, e, partitioned=False))),
}

_ALLOWED = {
    "rates": ("rate",),
    "bounds": ("bound",),
    "outage": ("outage-rate", "outage-bound"),
    "sweep": ("rate", "bound", "outage-rate", "outage-bound"),
}
_DEFAULTS = {
    "rates": ("ec", "ceo"),
    "bounds": ("cutset", "ub_fast", "ub_partitioned"),
    "outage": ("ec_outage", "ceo_outage", "ub_outage"),
    "sweep": ("ec", "ceo", "cutset", "ub_partitioned"),
}

SWEEP_COLUMNS = ("P_dB", "name", "kind", "bits", "epsilon", "q_star", "Q", "Q_mode",
                 "seed", "n_samples", "version")
TWO_AGENT_COLUMNS = ("P_dB", "mode", "theta", "q1_mean", "q2_mean", "mean_abs_q_diff",
                     "rate", "residual", "seed", "n_samples", "version")
DMT_COLUMNS = ("r", "t", "m", "d", "scheme", "seed", "n_samples", "version")


# ---------------------------------------------------------------------------
# command runners


def _map(fn, items, workers):
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(workers) as ex:
        return list(ex.map(fn, items))


def _ensemble(spec: ExperimentSpec) -> ChannelEnsemble:
    return make_ensemble(spec.config(spec.P_dB[0]), spec.n_samples, spec.seed,
                         workers=spec.workers)


def _run_sweep(spec, log):
    names = spec.selected()
    ens = _ensemble(spec)
    jobs = [(P, name) for P in spec.P_dB for name in names]

    def job(item):
        P, name = item
        cfg = spec.config(P)
        ev = REGISTRY[name]
        bits, q, Q, mode = ev.fn(cfg, ens, spec)
        eps = _fmt(spec.epsilon) if ev.kind.startswith("outage") else ""
        return (_fmt(float(P)), name, ev.kind, f"{float(bits):.10f}", eps, _vec(q), _vec(Q),
                mode, str(spec.seed), str(spec.n_samples), __version__)

    rows = _map(job, jobs, spec.workers)
    for row in rows:
        log(f"P={row[0]} dB {row[1]} ({row[2]}): {float(row[3]):.6f} bits")
    return SWEEP_COLUMNS, rows


def _run_two_agent(spec, log):
    if spec.r != 2 or len(set(spec.C)) != 1:
        raise SpecError("two-agent needs r = 2 and one common capacity")
    ens = _ensemble(spec)
    rows = []
    for P in spec.P_dB:
        cfg = spec.config(P)
        C = cfg.capacities[0]
        common = (str(spec.seed), str(spec.n_samples), __version__)
        if spec.theta:
            A = gram(ens.H) * (cfg.P / cfg.t)
            for th in spec.theta:
                q1, q2 = two_agent_q(A, th)
                rate = 2.0 * C - float(np.mean(q1 + q2))
                rows.append((_fmt(float(P)), "theta", _fmt(float(th)), f"{np.mean(q1):.10f}",
                             f"{np.mean(q2):.10f}", f"{np.mean(np.abs(q1 - q2)):.10f}",
                             f"{rate:.10f}", "") + common)
            log(f"P={P} dB: {len(spec.theta)} water levels")
        else:
            sol = two_agent_solve(cfg, ens)
            rows.append((_fmt(float(P)), "solve", f"{sol.theta:.10g}",
                         f"{np.mean(sol.q1):.10f}", f"{np.mean(sol.q2):.10f}",
                         f"{np.mean(np.abs(sol.q1 - sol.q2)):.10f}", f"{sol.rate:.10f}",
                         f"{sol.residual:.3e}") + common)
            log(f"P={P} dB: theta={sol.theta:.6g} rate={sol.rate:.6f} bits")
    return TWO_AGENT_COLUMNS, rows


def _run_dmt(spec, log):
    top = min(spec.r, spec.t)
    grid = spec.m_grid or tuple(float(round(v, 12)) for v in np.linspace(0.0, top, 11))
    rows = []
    for fn in (dmt_upper, dmt_ceo, dmt_ec):
        curve = fn(spec.r, spec.t, grid)
        for m, d, scheme in curve.rows():
            rows.append((str(spec.r), str(spec.t), _fmt(m), _fmt(d), scheme, str(spec.seed),
                         str(spec.n_samples), __version__))
        log(f"dmt {curve.scheme}: d(0)={curve.d[0]:g} d({grid[-1]:g})={curve.d[-1]:g}")
    return DMT_COLUMNS, rows


def run(spec: ExperimentSpec, log: Callable[[str], None] | None = None) -> str:
    """Execute a spec and return the CSV text (also written to ``spec.out``)."""
    spec.validate()
    log = log or (lambda s: print(s, file=sys.stderr))
    if spec.command == "dmt":
        cols, rows = _run_dmt(spec, log)
    elif spec.command == "two-agent":
        cols, rows = _run_two_agent(spec, log)
    else:
        cols, rows = _run_sweep(spec, log)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    w.writerows(rows)
    text = buf.getvalue()
    if spec.out and spec.out != "-":
        with open(spec.out, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return text


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nomadic",
        description="Rates, bounds, outage and DMT curves for a nomadic transmitter "
                    "received by distributed agents with finite-capacity links.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=_EPILOG)
    p.add_argument("command", nargs="?", choices=COMMANDS,
                   help="what to compute (may come from --preset or --config)")
    p.add_argument("--config", help="key = value experiment file; flags override it")
    p.add_argument("--preset", choices=sorted(PRESETS), help="figure-reproduction preset")
    p.add_argument("--r", type=int, help="number of agents")
    p.add_argument("--t", type=int, help="transmit antennas")
    p.add_argument("--P-dB", dest="P_dB", help="power sweep: '7', '0,10,20' or '0:20:2'")
    p.add_argument("--C", help="link capacity, or one per agent: '2' or '2,3'")
    p.add_argument("--n-samples", dest="n_samples", type=int, help="channel samples")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="CSV path ('-' for stdout)")
    p.add_argument("--scheme", help="comma-separated achievable schemes")
    p.add_argument("--bound", help="comma-separated bounds")
    p.add_argument("--epsilon", type=float, help="target outage probability")
    p.add_argument("--Q-mode", dest="Q_mode", choices=("search", "fixed"),
                   help="input covariance for EPI bounds")
    p.add_argument("--theta", help="water levels for a two-agent sweep")
    p.add_argument("--m-grid", dest="m_grid", help="multiplexing gains for dmt")
    p.add_argument("--workers", type=int, help="threads; results do not depend on it")
    p.add_argument("--print-spec", action="store_true",
                   help="print the resolved spec and exit")
    p.add_argument("--version", action="version", version=f"nomadic {__version__}")
    return p


_EPILOG = """\
schemes: ec, ceo, ceo_per_channel, ceo_constant, two_agent,
         ec_outage, ceo_outage (supported rate at --epsilon)
bounds:  cutset, ub_fast, ub_partitioned, ub_symmetric,
         cutset_outage, ub_outage, ub_outage_subsets

CSV columns
  rates, bounds, outage, sweep:
    P_dB, name, kind, bits, epsilon, q_star, Q, Q_mode, seed, n_samples, version
    (q_star and Q are ';'-separated per agent / per antenna)
  two-agent:
    P_dB, mode, theta, q1_mean, q2_mean, mean_abs_q_diff, rate, residual,
    seed, n_samples, version
  dmt:
    r, t, m, d, scheme, seed, n_samples, version

exit status: 0 success, 2 invalid spec, 3 numerical failure
"""


def resolve_spec(argv: Sequence[str] | None = None) -> ExperimentSpec:
    """Merge preset, config file and flags (in increasing priority)."""
    args = build_parser().parse_args(argv)
    fields = {}
    if args.preset:
        fields.update(PRESETS[args.preset])
        fields["preset"] = args.preset
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                fields.update(parse_spec_text(fh.read()))
        except OSError as exc:
            raise SpecError(f"cannot read config: {exc}") from exc
    if args.command:
        fields["command"] = args.command
    elif "command" not in fields:
        raise SpecError("no command given (positional, --preset or config file)")
    for key in ("r", "t", "n_samples", "seed", "out", "epsilon", "Q_mode", "workers"):
        v = getattr(args, key)
        if v is not None:
            fields[key] = v
    for key in ("P_dB", "C", "theta", "m_grid"):
        v = getattr(args, key)
        if v is not None:
            fields[key] = _coerce(key, v)
    if args.scheme is not None:
        fields["schemes"] = _coerce("schemes", args.scheme)
    if args.bound is not None:
        fields["bounds"] = _coerce("bounds", args.bound)
    spec = ExperimentSpec(**fields).validate()
    if args.print_spec:
        sys.stdout.write(spec.to_text())
        raise SystemExit(EXIT_OK)
    return spec


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point; returns the process exit status."""
    try:
        spec = resolve_spec(argv)
        run(spec)
    except _SPEC_ERRORS as exc:
        print(f"nomadic: invalid spec: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except NomadicError as exc:
        print(f"nomadic: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
