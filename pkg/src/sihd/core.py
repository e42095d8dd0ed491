"""Third-order semi-implicit homogeneous differentiator (SIHD-3).

The differentiator keeps four estimates ``z1..z4`` of a sampled signal and its
first three derivatives.  Each step feeds the current sample ``x`` and
produces estimates valid one step ahead.  On every line the correction is a
homogeneous injection of the output error ``e1 = x - z1``, shaped by a
projector that is a scaled signed power inside a convergence domain and a
plain sign outside of it.  Lines above ``q`` are only switched on once line
``q`` has entered its domain.

Lines are evaluated top-down (z4 first), and each lower line uses the fresh
values of the lines above it, so the "implicit" references resolve by forward
substitution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .taylor import CORRECTIONS

__all__ = [
    "DiffParams",
    "DiffState",
    "Differentiator",
    "DivergenceError",
    "ProjectorResult",
    "SD_MODES",
    "estimate",
    "injection",
    "projector",
    "sd_bound",
    "signed_power",
    "step",
]

SD_MODES = ("continuous", "paper")


class DivergenceError(ArithmeticError):
    """A differentiator line produced a non-finite value."""

    def __init__(self, line: int, e1: float, sample: float, state: "DiffState"):
        self.line = line
        self.e1 = e1
        self.sample = sample
        self.state = state
        super().__init__(
            f"non-finite value on line {line} (e1={e1!r}, sample={sample!r}, "
            f"state z=({state.z1!r}, {state.z2!r}, {state.z3!r}, {state.z4!r}))"
        )


@dataclass(frozen=True)
class DiffParams:
    """Gains and discretisation of the differentiator.

    Parameters
    ----------
    lambda1, lambda2, lambda3, lambda4 : float
        Positive line gains.
    alpha : float
        Homogeneity exponent, strictly between 0 and 1.
    mu : float
        Positive scale applied to every gain.
    h : float
        Sampling step in seconds.
    sd_mode : {"continuous", "paper"}
        How the per-line convergence bound is built.  ``"continuous"`` uses
        ``(lambda_q (mu h)**q) ** (1/(q(1-alpha)))`` which makes the injection
        continuous across the bound; ``"paper"`` uses ``lambda1 mu h`` for every
        line.
    """

    lambda1: float = 1e3
    lambda2: float = 1e6
    lambda3: float = 1e9
    lambda4: float = 1e9
    alpha: float = 0.95
    mu: float = 1.0
    h: float = 1e-3
    sd_mode: str = "continuous"

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "lambda3", "lambda4", "mu", "h"):
            v = getattr(self, name)
            if not (0 < v < math.inf):
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if self.sd_mode not in SD_MODES:
            raise ValueError(f"sd_mode must be one of {SD_MODES}, got {self.sd_mode!r}")
        object.__setattr__(self, "_gains", (self.lambda1, self.lambda2, self.lambda3, self.lambda4))
        object.__setattr__(self, "_bounds", [None] * 4)

    @property
    def gains(self) -> tuple[float, float, float, float]:
        return self._gains

    def gain(self, q: int) -> float:
        return self._gains[q - 1]

    def bound(self, q: int) -> float:
        """Cached :func:`sd_bound` for line ``q``."""
        b = self._bounds[q - 1]
        if b is None:
            b = self._bounds[q - 1] = _bound(q, self)
        return b

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return tuple(self.bound(q) for q in (1, 2, 3, 4))


def _check_line(q: int) -> None:
    if q not in (1, 2, 3, 4):
        raise ValueError(f"line index q must be in 1..4, got {q!r}")


def signed_power(x: float, a: float) -> float:
    """``|x|**a * sign(x)``, with 0 mapped to 0."""
    if x == 0:
        return 0.0
    return math.copysign(abs(x) ** a, x)


def _sign(x: float) -> float:
    if x == 0:
        return 0.0
    return math.copysign(1.0, x)


def _bound(q: int, p: DiffParams) -> float:
    expo = 1.0 / (q * (1.0 - p.alpha))
    try:
        if p.sd_mode == "paper":
            return (p.lambda1 * p.mu * p.h) ** expo
        return (p.gain(q) * (p.mu * p.h) ** q) ** expo
    except OverflowError:
        return math.inf


def sd_bound(q: int, p: DiffParams) -> float:
    """Radius of the convergence domain of line ``q``."""
    _check_line(q)
    return p.bound(q)


class ProjectorResult(NamedTuple):
    n_value: float
    inside_sd: bool


def projector(q: int, eps1: float, p: DiffParams) -> ProjectorResult:
    """Line-``q`` projector evaluated at the output error ``eps1``."""
    _check_line(q)
    if abs(eps1) <= p.bound(q):
        n = signed_power(eps1, q * (1.0 - p.alpha)) / (p._gains[q - 1] * (p.mu * p.h) ** q)
        return ProjectorResult(n, True)
    return ProjectorResult(_sign(eps1), False)


def injection(q: int, e1: float, p: DiffParams) -> tuple[float, bool]:
    """Error injection ``lambda_q mu**q |e1|**(q alpha - q + 1) N_q`` of line ``q``.

    Returns the injection and the domain flag.  Inside the domain this equals
    ``e1 / h**q`` up to rounding.
    """
    pr = projector(q, e1, p)
    if e1 == 0:
        return 0.0, pr.inside_sd
    mag = p._gains[q - 1] * p.mu**q * abs(e1) ** (q * p.alpha - (q - 1))
    return mag * pr.n_value, pr.inside_sd


@dataclass(frozen=True)
class DiffState:
    """Estimates of the signal and its first three derivatives.

    ``flags`` holds the domain decisions (E1, E2, E3) of the step that
    produced this state.
    """

    z1: float = 0.0
    z2: float = 0.0
    z3: float = 0.0
    z4: float = 0.0
    flags: tuple[bool, bool, bool] = field(default=(True, True, True))

    @classmethod
    def from_derivatives(cls, y: float, dy: float = 0.0, d2y: float = 0.0, d3y: float = 0.0):
        return cls(float(y), float(dy), float(d2y), float(d3y))

    def __neg__(self) -> "DiffState":
        return DiffState(-self.z1, -self.z2, -self.z3, -self.z4, self.flags)


def step(s: DiffState, x1_sample: float, p: DiffParams) -> DiffState:
    """Advance the differentiator by one sample.

    Parameters
    ----------
    s : DiffState
        Current estimates.
    x1_sample : float
        Measured signal at the current instant.
    p : DiffParams

    Returns
    -------
    DiffState
        Estimates one step ahead, with the domain flags of this step.

    Raises
    ------
    DivergenceError
        If any line evaluates to a non-finite value.
    """
    h = p.h
    e1 = x1_sample - s.z1
    if not math.isfinite(e1):
        raise DivergenceError(1, e1, x1_sample, s)
    i1, E1 = injection(1, e1, p)
    i2, E2 = injection(2, e1, p)
    i3, E3 = injection(3, e1, p)
    i4, _ = injection(4, e1, p)
    c = CORRECTIONS

    z4 = s.z4 + (E1 and E2 and E3) * h * i4
    if not math.isfinite(z4):
        raise DivergenceError(4, e1, x1_sample, s)
    z3 = s.z3 + (E1 and E2) * h * (z4 + i3)
    if not math.isfinite(z3):
        raise DivergenceError(3, e1, x1_sample, s)
    z2 = s.z2 + E1 * h * (z3 + E3 * c.line2_z4 * h * z4 + i2)
    if not math.isfinite(z2):
        raise DivergenceError(2, e1, x1_sample, s)
    z1 = s.z1 + h * (z2 + E2 * c.line1_z3 * h * z3 + (E3 and E2) * c.line1_z4 * h * h * z4 + i1)
    if not math.isfinite(z1):
        raise DivergenceError(1, e1, x1_sample, s)
    return DiffState(z1, z2, z3, z4, (E1, E2, E3))


def estimate(s: DiffState) -> tuple[float, float, float, float]:
    return (s.z1, s.z2, s.z3, s.z4)


class Differentiator:
    """Stateful wrapper around :func:`step` for sample-by-sample use.

    >>> d = Differentiator(DiffParams())
    >>> d.update(0.0).z1
    0.0
    """

    def __init__(self, params: DiffParams, state: DiffState | None = None):
        self.params = params
        self.state = state if state is not None else DiffState()

    def update(self, sample: float) -> DiffState:
        self.state = step(self.state, sample, self.params)
        return self.state

    def estimate(self) -> tuple[float, float, float, float]:
        return estimate(self.state)

    @property
    def flags(self) -> tuple[bool, bool, bool]:
        return self.state.flags
