"""
Why the correction terms
========================

The differentiator's lower lines carry -h/2 and +h^2/6 terms built from
next-step predictions.  Here we check, on polynomial and sine data, what
they buy in local accuracy.
"""

import math

from sihd.bench import random_stacks, verify_taylor
from sihd.taylor import (
    CORRECTIONS,
    TaylorStack,
    corrected_line1,
    corrected_line2,
    multistep_predict,
)

print("correction table:", CORRECTIONS)

# a quartic is reproduced exactly once the fifth-order residual is added back
s = TaylorStack(0.3, -1.2, 0.5, 2.0, 24.0, h=0.1)
nxt = multistep_predict(s)
v1, r1 = corrected_line1(s, nxt)
v2, r2 = corrected_line2(s, nxt)
print("line 1 residual / (h^4 x5) = %.6f" % (r1.value / (s.h**4 * s.x5)))
print("line 2 residual / (h^3 x5) = %.6f" % (r2.value / (s.h**3 * s.x5)))

# one-step error on sin(2 pi t): corrected line 1 against the bare z1 + h z2+
w = 2 * math.pi


def stack(t, h):
    return TaylorStack(math.sin(w * t), w * math.cos(w * t), -(w**2) * math.sin(w * t), -(w**3) * math.cos(w * t), w**4 * math.sin(w * t), h=h)


print("%8s %12s %12s" % ("h", "corrected", "bare"))
for h in (1e-1, 3e-2, 1e-2, 3e-3):
    a, b = stack(0.25, h), stack(0.25 + h, h)
    v, _ = corrected_line1(a, b)
    print("%8.0e %12.3e %12.3e" % (h, abs(b.x1 - v), abs(b.x1 - (a.x1 + h * b.x2))))

# the same check the CLI's verify-taylor runs, including a harsh case
print(verify_taylor(trials=1000, seed=42).summary())
print(verify_taylor(stacks=random_stacks(100, seed=1, h=1.0, x5=1e6)).summary())
