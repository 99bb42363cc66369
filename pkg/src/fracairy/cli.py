"""Command-line front end.

Subcommands: ``solve`` writes the solution grid as CSV, ``verify`` runs a
check battery and writes one JSON record per check, ``kernel`` and
``specfun`` evaluate kernels and special functions.

Exit status: 0 on success, 1 if a verification check failed, 2 on a
configuration error, 3 on a numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import contextlib
import csv
import json
import sys
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from fracairy.errors import ConfigError, FracAiryError, NumericalError
from fracairy.fractional_operators import as_order
from fracairy.kernels import Branch, KernelSpec, kernel_values
from fracairy.problems import REQUIRED_DATA, ProblemSetup, TimeData, sampled_time_data, solve, time_preset
from fracairy.special_functions import MLParams, WrightParams, f_wright, m_wright, mittag_leffler, wright_phi
from fracairy.verification import run_battery

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

RUN_KEYS = frozenset({
    "problem", "alpha", "t_max", "n_steps", "n_x", "length", "forcing",
    "battery", "t_list", "out", "report", "threads",
})
SECTIONS = frozenset({"run", "data"})


# {{{ configuration


@dataclass(frozen=True)
class RunConfig:
    """Validated settings of one invocation."""

    command: str
    problem: int = 2
    alpha: tuple[float, ...] = (0.5,)
    t_max: float = 1.0
    n_steps: int = 128
    n_x: int = 64
    length: float = 2.0
    forcing: str = "zero"
    data: dict[str, str] = field(default_factory=dict)
    battery: str = "lemmas"
    t_list: tuple[float, ...] = (0.25, 1.0)
    out: str | None = None
    report: str | None = None
    threads: int = 1

    def __post_init__(self) -> None:
        for a in self.alpha:
            as_order(a)
        if self.threads < 1:
            raise ConfigError(f"--threads must be at least 1, got {self.threads}")


def _floats(text: str, name: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in str(text).split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"{name} must be a comma separated list of numbers, got {text!r}") from exc


def _number(text, kind, name):
    try:
        return kind(text)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be {kind.__name__}, got {text!r}") from exc


def read_config_file(path: str) -> tuple[dict[str, str], dict[str, str]]:
    """Read ``[run]`` and ``[data]`` sections; any other section or run key is rejected."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    unknown = set(parser.sections()) - SECTIONS
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    run = dict(parser["run"]) if parser.has_section("run") else {}
    bad = set(run) - RUN_KEYS
    if bad:
        raise ConfigError(f"unknown config keys: {sorted(bad)}")
    data = dict(parser["data"]) if parser.has_section("data") else {}
    return run, data


def build_config(args: argparse.Namespace) -> RunConfig:
    run, data = read_config_file(args.config) if getattr(args, "config", None) else ({}, {})
    for item in getattr(args, "preset", None) or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--preset expects name=spec, got {item!r}")
        data[name.strip()] = value.strip()

    flags = {k: getattr(args, k, None) for k in RUN_KEYS}
    merged = {**run, **{k: v for k, v in flags.items() if v is not None}}

    kw = {"command": args.command, "data": data}
    if "problem" in merged:
        kw["problem"] = _number(merged["problem"], int, "problem")
    if "alpha" in merged:
        kw["alpha"] = _floats(merged["alpha"], "alpha")
    for key, kind in (("t_max", float), ("n_steps", int), ("n_x", int), ("length", float), ("threads", int)):
        if key in merged:
            kw[key] = _number(merged[key], kind, key)
    if "t_list" in merged:
        kw["t_list"] = _floats(merged["t_list"], "t_list")
    for key in ("forcing", "battery", "out", "report"):
        if key in merged:
            kw[key] = str(merged[key])
    return RunConfig(**kw)


def _time_data(name: str, value: str) -> TimeData:
    """A preset such as ``poly:2`` or a CSV file with columns ``t,value``."""
    if value.lower().endswith(".csv"):
        rows = read_csv(value)
        try:
            t = np.array([float(r["t"]) for r in rows])
            v = np.array([float(r["value"]) for r in rows])
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"sampled data {value!r} needs numeric columns t,value") from exc
        return sampled_time_data(name, t, v)
    return time_preset(value)


def setup_from_config(cfg: RunConfig) -> ProblemSetup:
    if len(cfg.alpha) != 1:
        raise ConfigError("solve takes a single alpha")
    if cfg.problem not in REQUIRED_DATA:
        raise ConfigError(f"problem must be 1, 2 or 3, got {cfg.problem}")
    data = {k: _time_data(k, v) for k, v in cfg.data.items()}
    return ProblemSetup(cfg.problem, cfg.alpha[0], data, cfg.forcing, cfg.t_max, cfg.n_steps, cfg.n_x, cfg.length)


# }}}


# {{{ io


def read_csv(path: str) -> list[dict[str, str]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return list(csv.DictReader(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read {path!r}: {exc}") from exc


@contextlib.contextmanager
def _sink(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def fmt(v: float) -> str:
    return f"{v:.12g}"


def write_grid_csv(fh, x: np.ndarray, t: np.ndarray, u: np.ndarray, header=("x", "t", "u")) -> None:
    """Rows ordered by ``t`` and then ``x``."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for n, tn in enumerate(t):
        for i, xi in enumerate(x):
            w.writerow((fmt(xi), fmt(tn), fmt(u[n, i])))


def write_report(fh, report) -> None:
    for rec in report.records():
        fh.write(json.dumps(rec, sort_keys=False) + "\n")
    for msg in report.rejected:
        fh.write(json.dumps({"rejected": msg}) + "\n")


# }}}


# {{{ commands


def cmd_solve(cfg: RunConfig) -> int:
    field_ = solve(setup_from_config(cfg))
    with _sink(cfg.out) as fh:
        write_grid_csv(fh, field_.x, field_.t, field_.u)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    report = run_battery(cfg.battery, cfg.alpha, cfg.t_list)
    with _sink(cfg.report or cfg.out) as fh:
        write_report(fh, report)
    for r in report.results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.id}", file=sys.stderr)
    return EXIT_OK if report.passed and not report.rejected else EXIT_CHECK_FAILED


def _grid(text: str, name: str) -> np.ndarray:
    vals = _floats(text, name)
    if len(vals) != 3 or int(vals[2]) != vals[2] or vals[2] < 1:
        raise ConfigError(f"{name} expects lo,hi,count, got {text!r}")
    return np.linspace(vals[0], vals[1], int(vals[2]))


def cmd_kernel(args: argparse.Namespace, cfg: RunConfig) -> int:
    a = as_order(cfg.alpha[0])
    mu = a.two_thirds if args.mu is None else args.mu
    spec = KernelSpec(Branch(args.branch), a, mu, args.dx)
    if args.action == "eval":
        xs, ts = np.array(_floats(args.x, "x")), np.array(_floats(args.t, "t"))
        if xs.size != ts.size:
            raise ConfigError("--x and --t need the same number of values")
    else:
        X, T = np.meshgrid(_grid(args.x, "x"), _grid(args.t, "t"))
        xs, ts = X.ravel(), T.ravel()
    if np.any(ts <= 0):
        raise ConfigError("kernels are evaluated at t>0")
    vals = [float(kernel_values(spec, x, t)) for x, t in zip(xs, ts)]
    with _sink(cfg.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("x", "t", "value"))
        for x, t, v in zip(xs, ts, vals):
            w.writerow((fmt(x), fmt(t), fmt(v)))
    return EXIT_OK


def cmd_specfun(args: argparse.Namespace, cfg: RunConfig) -> int:
    try:
        z = complex(args.z.replace(" ", ""))
    except ValueError as exc:
        raise ConfigError(f"--z must be a number such as 1.5 or -2+1j, got {args.z!r}") from exc
    name = args.function
    if name == "wright":
        res = wright_phi(WrightParams(args.rho, args.mu), z)
        value, err = complex(res.value), res.abs_error_estimate
    elif name in ("m_wright", "f_wright"):
        res = (m_wright if name == "m_wright" else f_wright)(args.nu, z)
        value, err = complex(res.value), res.abs_error_estimate
    else:
        if z.imag != 0:
            raise ConfigError("mittag_leffler takes a real argument")
        value, err = complex(mittag_leffler(MLParams(args.nu, args.mu), z.real)), float("nan")
    with _sink(cfg.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("function", "z", "re", "im", "abs_error"))
        w.writerow((name, str(z), fmt(value.real), fmt(value.imag), fmt(err)))
    return EXIT_OK


# }}}


# {{{ argument parsing


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI file with [run] and [data] sections")
    p.add_argument("--alpha", help="fractional order, or a comma separated list for verify")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--threads", type=int, help="cap on internal parallelism (computation is sequential)")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracairy", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a problem and write u on the grid as CSV")
    _common(p)
    p.add_argument("--problem", type=int)
    p.add_argument("--preset", action="append", metavar="NAME=SPEC",
                   help="boundary datum, e.g. psi1=poly:2, sin, bump:c,w or a t,value CSV path")
    p.add_argument("--forcing", help="forcing preset: zero, poly:k, sin, bump:c,w")
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--n-steps", dest="n_steps", type=int)
    p.add_argument("--n-x", dest="n_x", type=int)
    p.add_argument("--length", type=float, help="truncation length for the half-line problems")

    p = sub.add_parser("verify", help="run a verification battery")
    _common(p)
    p.add_argument("--battery", choices=("lemmas", "problems", "all"))
    p.add_argument("--t-list", dest="t_list", help="comma separated times for the kernel checks")
    p.add_argument("--report", help="report path, one JSON record per line (default stdout)")

    p = sub.add_parser("kernel", help="evaluate a kernel G or V")
    p.add_argument("action", choices=("eval", "table"))
    _common(p)
    p.add_argument("--branch", choices=("G", "V"), default="G")
    p.add_argument("--mu", type=float, help="weight (default 2 alpha/3)")
    p.add_argument("--dx", type=int, default=0, help="number of x-derivatives")
    p.add_argument("--x", required=True, help="points for eval, lo,hi,count for table")
    p.add_argument("--t", required=True, help="points for eval, lo,hi,count for table")

    p = sub.add_parser("specfun", help="evaluate a special function")
    p.add_argument("action", choices=("eval",))
    _common(p)
    p.add_argument("--function", choices=("wright", "m_wright", "f_wright", "mittag_leffler"), required=True)
    p.add_argument("--rho", type=float, default=-0.5)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--nu", type=float, default=0.5)
    p.add_argument("--z", required=True)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK

    try:
        cfg = build_config(args)
        if args.command == "solve":
            return cmd_solve(cfg)
        if args.command == "verify":
            return cmd_verify(cfg)
        if args.command == "kernel":
            return cmd_kernel(args, cfg)
        return cmd_specfun(args, cfg)
    except ConfigError as exc:
        print(f"fracairy: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"fracairy: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FracAiryError as exc:
        print(f"fracairy: {exc}", file=sys.stderr)
        return EXIT_CONFIG


# }}}
