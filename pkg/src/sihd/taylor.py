"""Multi-step Taylor expansion and retro-propagated correction terms.

The differentiator's correction terms come from rewriting the Taylor lines of
a signal in terms of the *next-step* values of its higher derivatives.  This
module carries that algebra out on explicit derivative stacks so the
coefficients wired into :func:`sihd.core.step` can be checked for exactness
independently of any differentiator run.

All coefficients below are dimensionless multipliers of powers of ``h``:

* line 2:  x2+ = x2 + h*x3+ + LINE2_Z4*h**2*x4+            + R2
* line 1:  x1+ = x1 + h*x2+ + LINE1_Z3*h**2*x3+ + LINE1_Z4*h**3*x4+ + R1

with the residuals R2 = LINE2_RESIDUAL*h**3*x5 and R1 = LINE1_RESIDUAL*h**4*x5
for signals whose fifth derivative is constant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "CORRECTIONS",
    "Corrections",
    "LINE1_RESIDUAL",
    "LINE2_RESIDUAL",
    "Residual",
    "TaylorStack",
    "corrected_line1",
    "corrected_line2",
    "corrected_line3",
    "multistep_predict",
    "stack_from_polynomial",
]


class Corrections(NamedTuple):
    """Correction coefficients shared with the differentiator update."""

    line2_z4: float  # times h on z4+ inside line 2 (outer h gives h**2)
    line1_z3: float  # times h on z3+ inside line 1
    line1_z4: float  # times h**2 on z4+ inside line 1


CORRECTIONS = Corrections(line2_z4=-1.0 / 2.0, line1_z3=-1.0 / 2.0, line1_z4=1.0 / 6.0)

# Remainders for constant fifth derivative.  LINE1_RESIDUAL was obtained by
# brute-force expansion over random stacks (see tests/test_taylor.py).
LINE2_RESIDUAL = 1.0 / 6.0
LINE1_RESIDUAL = -1.0 / 24.0


@dataclass(frozen=True)
class TaylorStack:
    """Signal value and its first four derivatives at one instant."""

    x1: float
    x2: float
    x3: float
    x4: float
    x5: float
    h: float

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError(f"step h must be positive, got {self.h!r}")

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.x1, self.x2, self.x3, self.x4, self.x5)


@dataclass(frozen=True)
class Residual:
    """Remainder left by a corrected line; carries only fifth-order content."""

    value: float


def stack_from_polynomial(coeffs, t: float, h: float) -> TaylorStack:
    """Derivative stack of ``numpy.polynomial`` coefficients (low-to-high) at ``t``."""
    p = np.polynomial.Polynomial(coeffs)
    vals = [float(p.deriv(k)(t)) if k else float(p(t)) for k in range(5)]
    return TaylorStack(*vals, h=h)


def multistep_predict(t: TaylorStack) -> TaylorStack:
    """Advance a stack by one step assuming a constant fifth derivative."""
    h = t.h
    x1, x2, x3, x4, x5 = t.as_tuple()
    return TaylorStack(
        x1=x1 + h * x2 + h**2 / 2 * x3 + h**3 / 6 * x4 + h**4 / 24 * x5,
        x2=x2 + h * x3 + h**2 / 2 * x4 + h**3 / 6 * x5,
        x3=x3 + h * x4 + h**2 / 2 * x5,
        x4=x4 + h * x5,
        x5=x5,
        h=h,
    )


def corrected_line3(t: TaylorStack, nxt: TaylorStack) -> float:
    """Third line rewritten with the next-step fourth and fifth derivatives.

    Exact for signals with constant fifth derivative.
    """
    h = t.h
    return t.x3 + h * nxt.x4 - h**2 / 2 * nxt.x5


def corrected_line2(t: TaylorStack, nxt: TaylorStack) -> tuple[float, Residual]:
    h = t.h
    c = CORRECTIONS
    value = t.x2 + h * nxt.x3 + c.line2_z4 * h**2 * nxt.x4
    return value, Residual(nxt.x2 - value)


def corrected_line1(t: TaylorStack, nxt: TaylorStack) -> tuple[float, Residual]:
    """First line with both correction terms.

    Returns the corrected prediction and the residual ``nxt.x1 - value``,
    which equals ``LINE1_RESIDUAL * h**4 * x5`` for constant ``x5``.
    """
    h = t.h
    c = CORRECTIONS
    value = t.x1 + h * nxt.x2 + c.line1_z3 * h**2 * nxt.x3 + c.line1_z4 * h**3 * nxt.x4
    return value, Residual(nxt.x1 - value)
