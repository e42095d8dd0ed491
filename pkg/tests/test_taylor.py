import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sihd import core
from sihd.taylor import (
    CORRECTIONS,
    LINE1_RESIDUAL,
    LINE2_RESIDUAL,
    TaylorStack,
    corrected_line1,
    corrected_line2,
    corrected_line3,
    multistep_predict,
    stack_from_polynomial,
)

ZERO = TaylorStack(0.0, 0.0, 0.0, 0.0, 0.0, h=0.1)

small = st.floats(-100, 100)
steps = st.floats(1e-4, 1.0)


@st.composite
def stacks(draw):
    return TaylorStack(*(draw(small) for _ in range(5)), h=draw(steps))


def _close(a, b, *terms, rel=1e-12):
    scale = sum(abs(t) for t in terms) or 1.0
    return abs(a - b) <= rel * scale


# -- multistep_predict ---------------------------------------------------------------


def test_predict_zero_stack():
    assert multistep_predict(ZERO).as_tuple() == (0.0,) * 5


def test_predict_quartic_from_origin():
    # y = t**4 at t = 0: derivative stack (0, 0, 0, 0, 24); one step of h = 1
    nxt = multistep_predict(TaylorStack(0.0, 0.0, 0.0, 0.0, 24.0, h=1.0))
    assert nxt.as_tuple() == (1.0, 4.0, 12.0, 24.0, 24.0)


@given(st.floats(-3, 3), st.floats(1e-3, 1.0))
def test_predict_exact_on_quartic_polynomial(t, h):
    coeffs = [0.0, 1.0, 0.0, -2.0, 1.0]  # t**4 - 2 t**3 + t
    nxt = multistep_predict(stack_from_polynomial(coeffs, t, h))
    want = stack_from_polynomial(coeffs, t + h, h)
    for a, b in zip(nxt.as_tuple(), want.as_tuple()):
        assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


def test_stack_requires_positive_step():
    with pytest.raises(ValueError):
        TaylorStack(0, 0, 0, 0, 0, h=0.0)


# -- corrected lines ---------------------------------------------------------------------


def test_line3_zero_and_quartic():
    assert corrected_line3(ZERO, multistep_predict(ZERO)) == 0.0
    t = TaylorStack(0.0, 0.0, 0.0, 0.0, 24.0, h=1.0)
    assert corrected_line3(t, multistep_predict(t)) == pytest.approx(12.0, rel=1e-14)


@given(stacks())
def test_line3_without_fifth_order_is_plain_euler(s):
    s = TaylorStack(s.x1, s.x2, s.x3, s.x4, 0.0, h=s.h)
    nxt = multistep_predict(s)
    assert nxt.x4 == s.x4
    assert corrected_line3(s, nxt) == s.x3 + s.h * s.x4


@given(stacks())
def test_line3_exact(s):
    nxt = multistep_predict(s)
    v = corrected_line3(s, nxt)
    assert _close(v, nxt.x3, s.x3, s.h * s.x4, s.h**2 * s.x5)


def test_line2_zero():
    v, r = corrected_line2(ZERO, multistep_predict(ZERO))
    assert v == 0.0 and r.value == 0.0


@given(stacks())
def test_line2_without_fifth_order_is_exact(s):
    s = TaylorStack(s.x1, s.x2, s.x3, s.x4, 0.0, h=s.h)
    nxt = multistep_predict(s)
    v, r = corrected_line2(s, nxt)
    assert _close(v, nxt.x2, s.x2, s.h * s.x3, s.h**2 * s.x4)
    assert _close(r.value, 0.0, s.x2, s.h * s.x3, s.h**2 * s.x4)


def test_line2_residual_ratio_random():
    rng = np.random.default_rng(7)
    for _ in range(200):
        vals = rng.uniform(-1, 1, 5)
        vals[4] = rng.choice([-1, 1]) * rng.uniform(0.5, 2.0)
        s = TaylorStack(*vals, h=float(10 ** rng.uniform(-1, 0)))
        _, r = corrected_line2(s, multistep_predict(s))
        assert r.value / (s.h**3 * s.x5) == pytest.approx(1 / 6, rel=1e-10)


def test_line1_zero():
    v, r = corrected_line1(ZERO, multistep_predict(ZERO))
    assert v == 0.0 and r.value == 0.0


@given(stacks())
def test_line1_without_fifth_order_is_exact(s):
    s = TaylorStack(s.x1, s.x2, s.x3, s.x4, 0.0, h=s.h)
    nxt = multistep_predict(s)
    v, r = corrected_line1(s, nxt)
    terms = (s.x1, s.h * s.x2, s.h**2 * s.x3, s.h**3 * s.x4)
    assert _close(v, nxt.x1, *terms)


def _line1_residual_exact(vals, h):
    """Rational-arithmetic residual of corrected line 1; no floats involved."""
    x1, x2, x3, x4, x5 = vals
    n1 = x1 + h * x2 + h**2 / 2 * x3 + h**3 / 6 * x4 + h**4 / 24 * x5
    n2 = x2 + h * x3 + h**2 / 2 * x4 + h**3 / 6 * x5
    n3 = x3 + h * x4 + h**2 / 2 * x5
    n4 = x4 + h * x5
    return n1 - (x1 + h * n2 - h**2 / 2 * n3 + h**3 / 6 * n4)


def test_line1_residual_constant_by_brute_force():
    """Establishes the frozen LINE1_RESIDUAL: residual / (h**4 x5) over random stacks."""
    rng = np.random.default_rng(2024)
    ratios = set()
    for _ in range(150):
        vals = [Fraction(int(v), int(d)) for v, d in zip(rng.integers(-1000, 1000, 5), rng.integers(1, 50, 5))]
        if vals[4] == 0:
            vals[4] = Fraction(1)
        h = Fraction(int(rng.integers(1, 100)), int(rng.integers(1, 1000)))
        ratios.add(_line1_residual_exact(vals, h) / (h**4 * vals[4]))
    assert ratios == {Fraction(-1, 24)}
    assert LINE1_RESIDUAL == -1 / 24


def test_line1_residual_ratio_float():
    rng = np.random.default_rng(11)
    for _ in range(200):
        vals = rng.uniform(-1, 1, 5)
        vals[4] = rng.choice([-1, 1]) * rng.uniform(0.5, 2.0)
        s = TaylorStack(*vals, h=float(10 ** rng.uniform(-0.5, 0)))
        _, r = corrected_line1(s, multistep_predict(s))
        assert r.value / (s.h**4 * s.x5) == pytest.approx(LINE1_RESIDUAL, rel=1e-10)


@given(stacks())
def test_exactness_with_residuals(s):
    nxt = multistep_predict(s)
    h = s.h
    v2, _ = corrected_line2(s, nxt)
    e2 = LINE2_RESIDUAL * h**3 * s.x5
    assert _close(v2 + e2, nxt.x2, s.x2, h * nxt.x3, h**2 * nxt.x4, e2, h * s.x3, h**2 * s.x4)
    v1, _ = corrected_line1(s, nxt)
    e1 = LINE1_RESIDUAL * h**4 * s.x5
    assert _close(v1 + e1, nxt.x1, s.x1, h * nxt.x2, h**2 * nxt.x3, h**3 * nxt.x4, e1, h * s.x2, h**2 * s.x3, h**3 * s.x4)


# -- link to the differentiator ----------------------------------------------------------------


def test_core_uses_shared_correction_table():
    assert core.CORRECTIONS is CORRECTIONS
    assert CORRECTIONS.line2_z4 == -1 / 2
    assert CORRECTIONS.line1_z3 == -1 / 2
    assert CORRECTIONS.line1_z4 == 1 / 6


def test_in_domain_step_reproduces_corrected_line1():
    """With every line in its domain and e1 = 0, step() is the corrected Taylor system."""
    p = core.DiffParams(h=0.01)
    z = core.DiffState(1.0, 0.3, -0.2, 0.7)
    nxt = core.step(z, 1.0, p)  # e1 = 0: no injection, all flags set
    t = TaylorStack(1.0, 0.3, -0.2, 0.7, 0.0, h=0.01)
    pred = multistep_predict(t)
    v1, _ = corrected_line1(t, pred)
    v2, _ = corrected_line2(t, pred)
    assert nxt.flags == (True, True, True)
    assert nxt.z1 == pytest.approx(v1, rel=1e-15)
    assert nxt.z2 == pytest.approx(v2, rel=1e-15)
    assert nxt.z3 == pytest.approx(corrected_line3(t, pred), rel=1e-15)


def test_order_improvement_on_sine():
    """One-step error of corrected line 1 is O(h**4); the bare form is O(h**2)."""
    w = 2 * mpmath.pi
    t0 = mpmath.mpf("0.25")

    def stack(t, h):
        d = [mpmath.sin(w * t), w * mpmath.cos(w * t), -(w**2) * mpmath.sin(w * t), -(w**3) * mpmath.cos(w * t), w**4 * mpmath.sin(w * t)]
        return TaylorStack(*d, h=h)

    hs = [mpmath.mpf("1e-2"), mpmath.mpf("1e-3"), mpmath.mpf("1e-4")]
    corr, bare = [], []
    with mpmath.workdps(40):
        for h in hs:
            a, b = stack(t0, h), stack(t0 + h, h)
            v, _ = corrected_line1(a, b)
            corr.append(float(abs(b.x1 - v)))
            bare.append(float(abs(b.x1 - (a.x1 + h * b.x2))))
    logh = np.log10([float(h) for h in hs])
    slope_corr = np.polyfit(logh, np.log10(corr), 1)[0]
    slope_bare = np.polyfit(logh, np.log10(bare), 1)[0]
    assert abs(slope_corr - 4) <= 0.3
    assert abs(slope_bare - 2) <= 0.3
    assert math.isfinite(slope_corr)
