"""Scalar ODE problems and fixed-step integrators.

Three integrators share one uniform grid ``t_k = t0 + k h``:

* ``euler``     explicit forward Euler,
* ``rk4``       classical four-stage Runge-Kutta,
* ``nsfd_sihd`` a nonstandard finite-difference scheme whose step size is
  replaced by a denominator function ``psi(h)`` and whose right-hand side is
  read through a SIHD-3 observer of the signal ``s_k = f(y_k, u_k)``.

In ``taylor`` mode the NSFD-SIHD update is a third-order Taylor step built
from the observer's estimates of ``f`` and its time derivatives at ``t_k``,
each derivative term gated by the observer's domain flags.  In ``smoothed``
mode only the filtered ``f`` is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import DiffParams, DiffState, DivergenceError, estimate, step
from .records import RunRecord

__all__ = [
    "IntegrationError",
    "MAX_SAMPLES",
    "OdeProblem",
    "PsiRule",
    "SCHEMES",
    "SihdSchemeConfig",
    "catalog",
    "euler_step",
    "get_problem",
    "integrate",
    "nsfd_sihd_step",
    "psi_eval",
    "reference_solution",
    "rk4_step",
    "warm_start",
]

SCHEMES = ("euler", "rk4", "nsfd_sihd")
MODES = ("taylor", "smoothed")
MAX_SAMPLES = 50_000_000


class IntegrationError(ArithmeticError):
    """Non-finite trajectory value."""

    def __init__(self, t: float, message: str):
        self.t = t
        super().__init__(f"t={t!r}: {message}")


def _zero_input(t: float) -> float:
    return 0.0


@dataclass(frozen=True)
class OdeProblem:
    """Scalar initial value problem ``y' = rhs(y, u(t), t)``."""

    name: str
    rhs: Callable[[float, float, float], float]
    y0: float
    t0: float
    t_end: float
    exact: Optional[Callable[[float], float]] = None
    input_u: Callable[[float], float] = _zero_input

    def __post_init__(self):
        if not self.t_end >= self.t0:
            raise ValueError(f"t_end ({self.t_end}) must not precede t0 ({self.t0})")

    def f(self, y: float, t: float) -> float:
        return self.rhs(y, self.input_u(t), t)


@dataclass(frozen=True)
class PsiRule:
    """Denominator function replacing the step size; ``psi(h) = h + O(h**2)``."""

    kind: str = "linear"
    rate: float = 1.0

    def __post_init__(self):
        if self.kind not in ("linear", "exponential"):
            raise ValueError(f"psi kind must be 'linear' or 'exponential', got {self.kind!r}")
        if not (math.isfinite(self.rate) and self.rate > 0):
            raise ValueError(f"psi rate must be positive, got {self.rate!r}")


def psi_eval(r: PsiRule, h: float) -> float:
    if not h > 0:
        raise ValueError(f"h must be positive, got {h!r}")
    if r.kind == "linear":
        return h
    return -math.expm1(-r.rate * h) / r.rate


@dataclass(frozen=True)
class SihdSchemeConfig:
    diff_params: DiffParams = DiffParams()
    psi: PsiRule = PsiRule()
    mode: str = "taylor"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")


def _finite(v: float, t: float, what: str) -> float:
    if not math.isfinite(v):
        raise IntegrationError(t, f"{what} is not finite ({v!r})")
    return v


def euler_step(p: OdeProblem, y: float, t: float, h: float) -> float:
    return y + h * _finite(p.f(y, t), t, "rhs")


def rk4_step(p: OdeProblem, y: float, t: float, h: float) -> float:
    k1 = _finite(p.f(y, t), t, "rhs")
    k2 = _finite(p.f(y + h / 2 * k1, t + h / 2), t, "rhs")
    k3 = _finite(p.f(y + h / 2 * k2, t + h / 2), t, "rhs")
    k4 = _finite(p.f(y + h * k3, t + h), t, "rhs")
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def warm_start(p: OdeProblem) -> DiffState:
    """Observer state with ``z1 = f(y0)`` and zero higher derivatives."""
    return DiffState(p.f(p.y0, p.t0), 0.0, 0.0, 0.0)


def nsfd_sihd_step(
    cfg: SihdSchemeConfig, diff_state: DiffState, p: OdeProblem, y: float, t: float
) -> tuple[float, DiffState]:
    """One NSFD-SIHD step.

    ``diff_state`` holds the observer's estimates of ``f`` and its first three
    time derivatives at ``t``.  The fresh sample ``f(y, t)`` then advances the
    observer to ``t + h``; the flags of that update decide which derivative
    terms are trusted in the Taylor step.
    """
    s = _finite(p.f(y, t), t, "rhs")
    f0, f1, f2, _ = estimate(diff_state)
    nxt = step(diff_state, s, cfg.diff_params)
    psi = psi_eval(cfg.psi, cfg.diff_params.h)
    if cfg.mode == "smoothed":
        return y + psi * f0, nxt
    e1, e2, _ = nxt.flags
    incr = f0 + e1 * (psi / 2) * f1 + (e1 and e2) * (psi * psi / 6) * f2
    return y + psi * incr, nxt


def integrate(
    p: OdeProblem,
    scheme: str,
    h: float,
    cfg: SihdSchemeConfig | None = None,
    t_end: float | None = None,
) -> RunRecord:
    """Integrate ``p`` on a uniform grid and record the trajectory.

    Columns are ``t`` and ``y``, plus ``y_exact`` and ``err`` (absolute error)
    when the problem has an exact solution.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    if (scheme == "nsfd_sihd") != (cfg is not None):
        raise ValueError("a SihdSchemeConfig is required for nsfd_sihd and only for it")
    if not h > 0:
        raise ValueError(f"h must be positive, got {h!r}")
    if cfg is not None and not math.isclose(cfg.diff_params.h, h, rel_tol=1e-12):
        raise ValueError(f"observer step {cfg.diff_params.h!r} differs from integration step {h!r}")
    t_end = p.t_end if t_end is None else t_end
    span = t_end - p.t0
    if span < 0:
        raise ValueError("t_end precedes t0")
    n = int(round(span / h))
    if n + 1 > MAX_SAMPLES:
        raise ValueError(f"{n + 1} samples exceed the budget of {MAX_SAMPLES}")

    t = p.t0 + h * np.arange(n + 1)
    tl = t.tolist()
    y = np.empty(n + 1)
    y[0] = p.y0
    yk = p.y0
    if scheme == "nsfd_sihd":
        z = warm_start(p)
        for k in range(n):
            try:
                yk, z = nsfd_sihd_step(cfg, z, p, yk, tl[k])
            except DivergenceError as exc:
                raise IntegrationError(tl[k], f"observer diverged: {exc}") from exc
            y[k + 1] = _finite(yk, tl[k + 1], "y")
    else:
        adv = euler_step if scheme == "euler" else rk4_step
        for k in range(n):
            yk = adv(p, yk, tl[k], h)
            y[k + 1] = _finite(yk, tl[k + 1], "y")

    cols = {"t": t, "y": y}
    if p.exact is not None:
        ye = np.array([p.exact(tk) for tk in tl])
        cols["y_exact"] = ye
        cols["err"] = np.abs(ye - y)
    return RunRecord(cols, {"problem": p.name, "scheme": scheme, "h": repr(h)})


def reference_solution(p: OdeProblem, h_ref: float = 1e-6, t_end: float | None = None, every: int = 1000):
    """Fine-step RK4 trajectory, subsampled every ``every`` steps.

    Returns ``(t, y)`` arrays.  Used as an oracle for closed-form solutions.
    """
    t_end = p.t_end if t_end is None else t_end
    n = int(round((t_end - p.t0) / h_ref))
    ts = [p.t0]
    ys = [p.y0]
    y = p.y0
    f = p.f
    for k in range(n):
        tk = p.t0 + k * h_ref
        k1 = f(y, tk)
        k2 = f(y + h_ref / 2 * k1, tk + h_ref / 2)
        k3 = f(y + h_ref / 2 * k2, tk + h_ref / 2)
        k4 = f(y + h_ref * k3, tk + h_ref)
        y = y + h_ref / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if (k + 1) % every == 0:
            ts.append(p.t0 + (k + 1) * h_ref)
            ys.append(y)
    return np.array(ts), np.array(ys)


# -- problem catalog ---------------------------------------------------------

_SQRT2 = math.sqrt(2.0)
_EX3_RATE = math.sqrt(200.0)


def _ex1(y0: float = 1e-2) -> OdeProblem:
    return OdeProblem(
        name="ex1",
        rhs=lambda y, u, t: -y + 1.0,
        y0=y0,
        t0=0.0,
        t_end=10.0,
        exact=lambda t: 1.0 + (y0 - 1.0) * math.exp(-t),
    )


def _ex2() -> OdeProblem:
    return OdeProblem(
        name="ex2",
        rhs=lambda y, u, t: 2.0 * y * (1.0 - y),
        y0=0.2,
        t0=10.0,
        t_end=20.0,
        exact=lambda t: 1.0 / (1.0 + 4.0 * math.exp(2.0 * (10.0 - t))),
    )


def _ex3(y0: float = 1e-2) -> OdeProblem:
    # Validated against reference_solution in the test suite.
    phase = math.atanh(y0 / _SQRT2)
    return OdeProblem(
        name="ex3",
        rhs=lambda y, u, t: -10.0 * y * y + 20.0,
        y0=y0,
        t0=0.0,
        t_end=1.0,
        exact=lambda t: _SQRT2 * math.tanh(_EX3_RATE * t + phase),
    )


def catalog() -> list[OdeProblem]:
    """The three benchmark problems: linear relaxation, logistic, water discharge."""
    return [_ex1(), _ex2(), _ex3()]


def get_problem(name: str) -> OdeProblem:
    for p in catalog():
        if p.name == name:
            return p
    raise KeyError(f"unknown problem {name!r}; expected one of ex1, ex2, ex3")
