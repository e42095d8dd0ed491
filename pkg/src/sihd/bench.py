"""Experiment harness: differentiation runs, ODE comparisons, sweeps.

Every experiment is driven by a flat options mapping (the same keys the CLI
and config files use), so a sweep point and a direct run with equal options
produce identical records.
"""

from __future__ import annotations

import csv
import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from . import __version__
from .core import DiffParams, DiffState, DivergenceError, step
from .ode import PsiRule, SihdSchemeConfig, get_problem, integrate
from .records import RunRecord
from .signals import DEFAULT_SEED, SignalSpec, SineSource
from .taylor import (
    LINE1_RESIDUAL,
    LINE2_RESIDUAL,
    TaylorStack,
    corrected_line1,
    corrected_line2,
    corrected_line3,
    multistep_predict,
)

__all__ = [
    "DEFAULTS",
    "ErrorSummary",
    "OPTION_TYPES",
    "TaylorFailure",
    "TaylorReport",
    "execute",
    "initial_state",
    "options",
    "run_diff",
    "run_ode",
    "summarize",
    "sweep",
    "terminal_window_mean",
    "verify_taylor",
]

SCHEME_COLUMN = {"euler": "euler", "rk4": "rk4", "nsfd_sihd": "sihd"}


def _bool(v: Any) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _schemes(v: Any) -> tuple[str, ...]:
    if isinstance(v, str):
        items = [s.strip() for s in v.split(",") if s.strip()]
    else:
        items = list(v)
    aliases = {"sihd": "nsfd_sihd", "nsfd": "nsfd_sihd"}
    out = tuple(aliases.get(s, s) for s in items)
    bad = [s for s in out if s not in SCHEME_COLUMN]
    if bad or not out:
        raise ValueError(f"unknown schemes {bad or items!r}")
    return out


def _meta(v: Any) -> str:
    return v if isinstance(v, str) else repr(v)


def _opt_float(v: Any) -> float | None:
    if v is None or (isinstance(v, str) and v.strip().lower() in ("", "none")):
        return None
    return float(v)


OPTION_TYPES = {
    "lambda1": float,
    "lambda2": float,
    "lambda3": float,
    "lambda4": float,
    "alpha": float,
    "mu": float,
    "h": float,
    "sd_mode": str,
    "eta0": float,
    "seed": int,
    "omega": float,
    "amplitude": float,
    "zero_mean": _bool,
    "ic": str,
    "duration": float,
    "t_skip": float,
    "problem": str,
    "schemes": _schemes,
    "t_end": _opt_float,
    "psi": str,
    "psi_rate": float,
    "mode": str,
    "trials": int,
}

DEFAULTS: dict[str, Any] = {
    "lambda1": 1e3,
    "lambda2": 1e6,
    "lambda3": 1e9,
    "lambda4": 1e9,
    "alpha": 0.95,
    "mu": 1.0,
    "h": 1e-3,
    "sd_mode": "continuous",
    "eta0": 0.0,
    "seed": DEFAULT_SEED,
    "omega": 2 * math.pi,
    "amplitude": 1.0,
    "zero_mean": False,
    "ic": "analytic",
    "duration": 10.0,
    "t_skip": 1.0,
    "problem": "ex1",
    "schemes": ("euler", "rk4", "nsfd_sihd"),
    "t_end": None,
    "psi": "linear",
    "psi_rate": 1.0,
    "mode": "taylor",
    "trials": 100,
}


def options(overrides: Mapping[str, Any] | None = None, **kw) -> dict[str, Any]:
    """Defaults merged with ``overrides``, every value coerced to its type.

    Keys may use dashes or underscores.
    """
    merged = dict(DEFAULTS)
    for src in (overrides or {}, kw):
        for k, v in src.items():
            key = k.replace("-", "_")
            if key not in OPTION_TYPES:
                raise KeyError(f"unknown option {k!r}")
            merged[key] = v
    return {k: (OPTION_TYPES[k](v) if v is not None else None) for k, v in merged.items()}


def diff_params(opts: Mapping[str, Any]) -> DiffParams:
    return DiffParams(
        lambda1=opts["lambda1"],
        lambda2=opts["lambda2"],
        lambda3=opts["lambda3"],
        lambda4=opts["lambda4"],
        alpha=opts["alpha"],
        mu=opts["mu"],
        h=opts["h"],
        sd_mode=opts["sd_mode"],
    )


def signal_spec(opts: Mapping[str, Any]) -> SignalSpec:
    return SignalSpec(
        amplitude=opts["amplitude"],
        angular_freq=opts["omega"],
        noise_eta0=opts["eta0"],
        seed=opts["seed"],
        zero_mean=opts["zero_mean"],
    )


def scheme_config(opts: Mapping[str, Any]) -> SihdSchemeConfig:
    return SihdSchemeConfig(
        diff_params=diff_params(opts),
        psi=PsiRule(opts["psi"], opts["psi_rate"]),
        mode=opts["mode"],
    )


# -- differentiation runs ------------------------------------------------------


@dataclass(frozen=True)
class ErrorSummary:
    """Mean absolute estimation errors over the window ``[t_skip, t_end]``."""

    mean_abs_e1: float
    mean_abs_e2: float
    mean_abs_e3: float
    mean_abs_e4: float
    t_skip: float
    t_end: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def initial_state(spec: SignalSpec, ic: str = "analytic", t0: float = 0.0) -> DiffState:
    """Starting estimates: the signal's true derivatives, or the fixed (0, 1, 0, -1)."""
    if ic == "analytic":
        src = SineSource(spec)
        return DiffState.from_derivatives(*src.derivatives(t0))
    if ic == "paper":
        return DiffState.from_derivatives(0.0, 1.0, 0.0, -1.0)
    raise ValueError(f"ic must be 'analytic' or 'paper', got {ic!r}")


def summarize(record: RunRecord, t_skip: float) -> ErrorSummary:
    t = record.t
    if not t_skip < t[-1]:
        raise ValueError(f"t_skip ({t_skip}) must precede the end of the run ({t[-1]})")
    h = t[1] - t[0] if len(t) > 1 else 1.0
    win = t >= t_skip - 1e-9 * h
    means = [float(np.mean(np.abs(record[f"e{i}"][win]))) for i in (1, 2, 3, 4)]
    return ErrorSummary(*means, t_skip=float(t_skip), t_end=float(t[-1]))


def run_diff(
    params: DiffParams,
    spec: SignalSpec,
    duration: float = 10.0,
    t_skip: float = 1.0,
    ic: str = "analytic",
    state: DiffState | None = None,
) -> tuple[RunRecord, ErrorSummary]:
    """Differentiate a sampled sine and record estimates against the truth.

    The signal is sampled at ``t_k = k h``.  Row ``k`` holds the sample
    ``x1``, the estimates ``z1..z4`` valid at ``t_k`` (produced from the
    previous sample), the errors ``e_i = d^(i-1)y(t_k) - z_i`` against the
    clean signal, and the domain flags of the step that produced them.
    """
    if not duration > t_skip >= 0:
        raise ValueError(f"need duration > t_skip >= 0, got {duration}, {t_skip}")
    h = params.h
    n = int(round(duration / h))
    src = SineSource(spec)
    z = state if state is not None else initial_state(spec, ic)

    t = np.arange(n + 1) * h
    tl = t.tolist()
    x = np.empty(n + 1)
    zs = np.empty((n + 1, 4))
    truth = np.empty((n + 1, 4))
    flags = np.empty((n + 1, 3), dtype=np.int8)
    for k in range(n + 1):
        tk = tl[k]
        xk = src.sample(tk)
        x[k] = xk
        zs[k] = (z.z1, z.z2, z.z3, z.z4)
        truth[k] = src.derivatives(tk)
        flags[k] = z.flags
        if k == n:
            break
        try:
            z = step(z, xk, params)
        except DivergenceError as exc:
            exc.t = tk
            raise

    cols = {"t": t, "x1": x}
    for i in range(4):
        cols[f"z{i + 1}"] = zs[:, i]
    for i in range(4):
        cols[f"e{i + 1}"] = truth[:, i] - zs[:, i]
    for i in range(3):
        cols[f"E{i + 1}"] = flags[:, i]
    meta = {
        "experiment": "diff",
        "version": __version__,
        **{k: _meta(v) for k, v in asdict(params).items()},
        "omega": repr(spec.angular_freq),
        "amplitude": repr(spec.amplitude),
        "eta0": repr(spec.noise_eta0),
        "zero_mean": str(spec.zero_mean),
        "seed": str(spec.seed),
        "rng": "numpy PCG64",
        "ic": ic,
        "duration": repr(duration),
        "t_skip": repr(t_skip),
    }
    record = RunRecord(cols, meta)
    return record, summarize(record, t_skip)


# -- ODE runs ------------------------------------------------------------------


def run_ode(
    problem_name: str,
    schemes: Iterable[str] = ("euler", "rk4", "nsfd_sihd"),
    h: float = 1e-3,
    cfg: SihdSchemeConfig | None = None,
    t_end: float | None = None,
) -> RunRecord:
    """Integrate one catalog problem with several schemes on a shared grid.

    Columns: ``t``, ``y_exact``, then ``y_<scheme>`` and ``err_<scheme>`` with
    ``sihd`` naming the NSFD-SIHD scheme.
    """
    p = get_problem(problem_name)
    schemes = _schemes(tuple(schemes))
    if "nsfd_sihd" in schemes and cfg is None:
        cfg = SihdSchemeConfig(diff_params=DiffParams(h=h))
    cols: dict[str, np.ndarray] = {}
    for s in schemes:
        rec = integrate(p, s, h, cfg if s == "nsfd_sihd" else None, t_end=t_end)
        if not cols:
            cols["t"] = rec.t
            cols["y_exact"] = rec["y_exact"]
        cols[f"y_{SCHEME_COLUMN[s]}"] = rec["y"]
        cols[f"err_{SCHEME_COLUMN[s]}"] = rec["err"]
    meta = {
        "experiment": "ode",
        "version": __version__,
        "problem": p.name,
        "y0": repr(p.y0),
        "t0": repr(p.t0),
        "t_end": repr(p.t_end if t_end is None else t_end),
        "h": repr(h),
        "schemes": ",".join(schemes),
    }
    if cfg is not None and "nsfd_sihd" in schemes:
        meta.update({k: _meta(v) for k, v in asdict(cfg.diff_params).items() if k != "h"})
        meta.update(psi=cfg.psi.kind, psi_rate=repr(cfg.psi.rate), mode=cfg.mode)
    return RunRecord(cols, meta)


def terminal_window_mean(record: RunRecord, column: str, fraction: float = 0.2) -> float:
    """Mean of ``column`` over the last ``fraction`` of the time horizon."""
    t = record.t
    start = t[0] + (1.0 - fraction) * (t[-1] - t[0])
    return float(np.mean(record[column][t >= start]))


# -- Taylor verification ---------------------------------------------------------


@dataclass(frozen=True)
class TaylorFailure:
    stack: TaylorStack
    line: int
    residual: float
    expected: float
    rel_err: float


@dataclass
class TaylorReport:
    trials: int
    seed: int | None  # None when the stacks were supplied by the caller
    tol: float
    max_rel_err: float = 0.0
    failures: list[TaylorFailure] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        head = "PASS" if self.passed else f"FAIL ({len(self.failures)} violations)"
        src = f"seed={self.seed}" if self.seed is not None else "given stacks"
        return f"verify-taylor: {head}; trials={self.trials} {src} max_rel_err={self.max_rel_err:.3e} tol={self.tol:.0e}"


def _rel(diff: float, *terms: float) -> float:
    scale = sum(abs(x) for x in terms)
    return abs(diff) / scale if scale > 0 else abs(diff)


def check_stack(t: TaylorStack) -> list[tuple[int, float, float, float]]:
    """``(line, residual, expected_residual, rel_err)`` for lines 3, 2, 1."""
    h, x5 = t.h, t.x5
    nxt = multistep_predict(t)
    out = []

    v3 = corrected_line3(t, nxt)
    r3 = nxt.x3 - v3
    out.append((3, r3, 0.0, _rel(r3, t.x3, h * nxt.x4, h**2 / 2 * nxt.x5, t.x3, h * t.x4, h**2 / 2 * x5)))

    v2, r2 = corrected_line2(t, nxt)
    e2 = LINE2_RESIDUAL * h**3 * x5
    out.append((2, r2.value, e2, _rel(v2 + e2 - nxt.x2, t.x2, h * nxt.x3, h**2 / 2 * nxt.x4, e2, h * t.x3, h**2 / 2 * t.x4)))

    v1, r1 = corrected_line1(t, nxt)
    e1 = LINE1_RESIDUAL * h**4 * x5
    out.append(
        (1, r1.value, e1, _rel(v1 + e1 - nxt.x1, t.x1, h * nxt.x2, h**2 / 2 * nxt.x3, h**3 / 6 * nxt.x4, e1, h * t.x2, h**2 / 2 * t.x3, h**3 / 6 * t.x4))
    )
    return out


def random_stacks(n: int, seed: int, h: float | None = None, x5: float | None = None) -> list[TaylorStack]:
    rng = np.random.default_rng(seed)
    stacks = []
    for _ in range(n):
        scale = 10.0 ** rng.uniform(-2, 2, size=5)
        vals = rng.standard_normal(5) * scale
        if x5 is not None:
            vals[4] = x5
        hh = h if h is not None else 10.0 ** rng.uniform(-4, 0)
        stacks.append(TaylorStack(*map(float, vals), h=float(hh)))
    return stacks


def verify_taylor(
    trials: int = 100,
    seed: int = DEFAULT_SEED,
    stacks: Iterable[TaylorStack] | None = None,
    tol: float = 1e-12,
) -> TaylorReport:
    """Check the corrected Taylor lines on random derivative stacks.

    Each line must be exact once its residual is added back, to relative
    ``tol``.
    """
    if stacks is None:
        if trials < 1:
            raise ValueError("trials must be >= 1")
        stacks = random_stacks(trials, seed)
    else:
        seed = None
    stacks = list(stacks)
    report = TaylorReport(trials=len(stacks), seed=seed, tol=tol)
    for st in stacks:
        for line, res, expected, rel in check_stack(st):
            report.max_rel_err = max(report.max_rel_err, rel)
            if not rel <= tol:
                report.failures.append(TaylorFailure(st, line, res, expected, rel))
    return report


# -- dispatch and sweeps -----------------------------------------------------------


def execute(experiment: str, opts: Mapping[str, Any]) -> tuple[RunRecord, dict[str, float]]:
    """Run one experiment from a full options mapping.

    Returns the record and a flat dict of summary metrics.
    """
    if experiment == "diff":
        rec, summ = run_diff(diff_params(opts), signal_spec(opts), opts["duration"], opts["t_skip"], opts["ic"])
        metrics = {k: v for k, v in summ.as_dict().items() if k.startswith("mean_abs")}
        return rec, metrics
    if experiment == "ode":
        cfg = scheme_config(opts) if "nsfd_sihd" in opts["schemes"] else None
        rec = run_ode(opts["problem"], opts["schemes"], opts["h"], cfg, opts["t_end"])
        metrics = {}
        for s in opts["schemes"]:
            col = f"err_{SCHEME_COLUMN[s]}"
            metrics[f"terminal_mean_{col}"] = terminal_window_mean(rec, col)
            metrics[f"max_{col}"] = float(np.max(rec[col]))
        return rec, metrics
    raise ValueError(f"unknown experiment {experiment!r}")


def _check_keys(keys: Iterable[str]) -> list[str]:
    keys = [k.replace("-", "_") for k in keys]
    for k in keys:
        if k not in OPTION_TYPES:
            raise KeyError(f"unknown grid option {k!r}")
    return keys


def expand_grid(grid: Mapping[str, Iterable[Any]] | Sequence[Mapping[str, Any]]) -> list[dict[str, Any]]:
    """Cartesian product of a ``{key: values}`` mapping.

    A sequence of point mappings is taken as an explicit list of points, for
    parameters that must move together.
    """
    if not isinstance(grid, Mapping):
        return [dict(zip(_check_keys(pt), pt.values())) for pt in grid]
    keys = _check_keys(grid)
    values = [list(v) for v in grid.values()]
    return [dict(zip(keys, combo)) for combo in itertools.product(*values)]


def _sweep_point(args):
    index, experiment, opts, path = args
    try:
        rec, metrics = execute(experiment, opts)
        rec.to_csv(path, timestamp=False)
        return index, "ok", metrics
    except Exception as exc:  # a failing point must not stop the sweep
        return index, f"error: {type(exc).__name__}: {exc}", {}


def sweep(
    param_grid: Mapping[str, Iterable[Any]] | Sequence[Mapping[str, Any]],
    experiment: str,
    out_dir: str | os.PathLike,
    base: Mapping[str, Any] | None = None,
    workers: int = 1,
) -> Path:
    """Run ``experiment`` at every grid point and write one CSV per point.

    Point ``i`` uses seed ``base.seed + i``.  Writes ``index.csv`` mapping the
    grid values to file names, status and summary metrics, and returns its path.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base_opts = options(base)
    points = expand_grid(param_grid)
    jobs = []
    for i, point in enumerate(points):
        opts = options({**base_opts, **point})
        opts["seed"] = base_opts["seed"] + i
        jobs.append((i, experiment, opts, str(out / f"run_{i:04d}.csv")))

    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(j) for j in jobs]
    results.sort(key=lambda r: r[0])

    keys: list[str] = []
    for pt in points:
        keys += [k for k in pt if k not in keys]
    metric_names: list[str] = []
    for _, _, m in results:
        metric_names += [k for k in m if k not in metric_names]
    index_path = out / "index.csv"
    with open(index_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "file", "status", "seed", *keys, *metric_names])
        for (i, status, metrics), (_, _, opts, path), point in zip(results, jobs, points):
            row = [i, Path(path).name, status, opts["seed"], *(point.get(k, "") for k in keys)]
            row += [format(metrics[m], ".17g") if m in metrics else "" for m in metric_names]
            w.writerow(row)
    return index_path
