"""Command line entry point: ``sihd-bench {diff,ode,sweep,verify-taylor}``.

Options can also come from a flat ``key=value`` config file (``--config``);
flags given on the command line override the file.

Exit codes: 0 success, 2 configuration error, 3 divergence, 4 property
violation.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .bench import OPTION_TYPES, execute, options, sweep, verify_taylor

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3
EXIT_VIOLATION = 4

_EXTRA_KEYS = {"out": str, "workers": int, "experiment": str}


class ConfigError(ValueError):
    pass


def _style(text: str, code: str, stream) -> str:
    if os.environ.get("NO_COLOR") or not getattr(stream, "isatty", lambda: False)():
        return text
    return f"\033[{code}m{text}\033[0m"


def read_config(path: str | os.PathLike) -> dict[str, Any]:
    """Parse a flat ``key=value`` file; ``#`` starts a comment line.

    Repeated ``grid`` lines accumulate.
    """
    cfg: dict[str, Any] = {}
    grids: list[str] = []
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{n}: expected key=value, got {raw!r}")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if key == "grid":
            grids.append(value)
        elif key in OPTION_TYPES or key in _EXTRA_KEYS:
            cfg[key] = value
        else:
            raise ConfigError(f"{path}:{n}: unknown key {key!r}")
    if grids:
        cfg["grid"] = grids
    return cfg


def _common(p: argparse.ArgumentParser, *, diff: bool = False, ode: bool = False) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--config", help="flat key=value file mirroring the flags")
    p.add_argument("--out", default=S, help="output CSV file (or directory for sweep)")
    g = p.add_argument_group("differentiator")
    for q in (1, 2, 3, 4):
        g.add_argument(f"--lambda{q}", type=float, default=S)
    g.add_argument("--alpha", type=float, default=S)
    g.add_argument("--mu", type=float, default=S)
    g.add_argument("--h", type=float, default=S, help="time step [s]")
    g.add_argument("--sd-mode", choices=["continuous", "paper"], default=S)
    if diff:
        s = p.add_argument_group("signal")
        s.add_argument("--eta0", type=float, default=S, help="uniform noise amplitude")
        s.add_argument("--seed", type=int, default=S)
        s.add_argument("--omega", type=float, default=S, help="angular frequency [rad/s]")
        s.add_argument("--amplitude", type=float, default=S)
        s.add_argument("--zero-mean", action="store_const", const=True, default=S)
        s.add_argument("--ic", choices=["analytic", "paper"], default=S)
        s.add_argument("--duration", type=float, default=S)
        s.add_argument("--t-skip", type=float, default=S)
    if ode:
        o = p.add_argument_group("ode")
        o.add_argument("--problem", choices=["ex1", "ex2", "ex3"], default=S)
        o.add_argument("--schemes", default=S, help="comma list of euler,rk4,nsfd_sihd")
        o.add_argument("--t-end", type=float, default=S)
        o.add_argument("--psi", choices=["linear", "exponential"], default=S)
        o.add_argument("--psi-rate", type=float, default=S)
        o.add_argument("--mode", choices=["taylor", "smoothed"], default=S)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sihd-bench", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("diff", help="differentiate a sampled sine")
    _common(d, diff=True)

    o = sub.add_parser("ode", help="compare integrators on a catalog problem")
    _common(o, ode=True)

    s = sub.add_parser("sweep", help="run an experiment over a parameter grid")
    _common(s, diff=True, ode=True)
    s.add_argument("--experiment", choices=["diff", "ode"], default=argparse.SUPPRESS)
    s.add_argument("--grid", action="append", default=argparse.SUPPRESS, metavar="KEY=V1,V2,...")
    s.add_argument("--workers", type=int, default=argparse.SUPPRESS)

    v = sub.add_parser("verify-taylor", help="check the corrected Taylor lines on random stacks")
    v.add_argument("--config")
    v.add_argument("--trials", type=int, default=argparse.SUPPRESS)
    v.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    return parser


def _merge(ns: argparse.Namespace) -> dict[str, Any]:
    given = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
    merged = read_config(ns.config) if ns.config else {}
    if "grid" in given and "grid" in merged:
        given["grid"] = merged["grid"] + given["grid"]
    merged.update(given)
    return merged


def _parse_grid(items: Sequence[str]) -> dict[str, list[Any]]:
    grid: dict[str, list[Any]] = {}
    for item in items:
        key, sep, values = item.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in OPTION_TYPES:
            raise ConfigError(f"bad grid entry {item!r}")
        conv = OPTION_TYPES[key]
        if key == "schemes":
            vals = [v for v in values.split(";") if v]
        else:
            vals = [conv(v) for v in values.split(",") if v.strip()]
        if not vals:
            raise ConfigError(f"empty grid entry {item!r}")
        grid[key] = vals
    return grid


def _print_metrics(title: str, metrics: dict[str, float]) -> None:
    print(title)
    for k, v in metrics.items():
        print(f"  {k:<28s} {v:.6e}")


def _run(args: argparse.Namespace) -> int:
    if args.command == "verify-taylor":
        merged = _merge(args)
        trials = int(merged.get("trials", 100))
        seed = int(merged.get("seed", 42))
        if trials < 1:
            raise ConfigError("--trials must be >= 1")
        report = verify_taylor(trials, seed)
        for f in report.failures:
            print(
                f"violation: line {f.line} residual={f.residual!r} expected={f.expected!r} "
                f"rel_err={f.rel_err:.3e} stack={f.stack}",
                file=sys.stderr,
            )
        status = _style(report.summary(), "32" if report.passed else "31", sys.stdout)
        print(status)
        return EXIT_OK if report.passed else EXIT_VIOLATION

    merged = _merge(args)
    out = merged.pop("out", None)
    workers = int(merged.pop("workers", 1))
    experiment = merged.pop("experiment", "diff")
    grid_items = merged.pop("grid", [])
    try:
        opts = options(merged)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc

    if args.command == "sweep":
        if not out:
            raise ConfigError("sweep needs --out DIR")
        if not grid_items:
            raise ConfigError("sweep needs at least one --grid KEY=V1,V2")
        index = sweep(_parse_grid(grid_items), experiment, out, base=opts, workers=workers)
        print(f"wrote {index}")
        return EXIT_OK

    try:
        record, metrics = execute(args.command, opts)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if out:
        if out == "-":
            record.write(sys.stdout)
        else:
            record.to_csv(out)
    stream = sys.stderr if out == "-" else sys.stdout
    title = "mean absolute errors" if args.command == "diff" else "error summary (terminal window = last 20%)"
    old, sys.stdout = sys.stdout, stream
    try:
        _print_metrics(title, metrics)
    finally:
        sys.stdout = old
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ArithmeticError as exc:
        t = getattr(exc, "t", None)
        where = f" at t={t!r}" if t is not None and not str(exc).startswith("t=") else ""
        print(f"divergence{where}: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
