"""
Differentiating a sampled sine
==============================

Feed a sine, sampled every millisecond, through the third-order
differentiator and compare its four estimates with the true derivatives.
"""

import math

import numpy as np

from sihd import DiffParams, DiffState, Differentiator, SignalSpec
from sihd.bench import run_diff

# default gains: lambda = 1e3, 1e6, 1e9, 1e9, alpha = 0.95, mu = 1, h = 1e-3
p = DiffParams()
print("domain bounds per line:", ["%.3g" % b for b in p.bounds])

# the incremental interface: one sample in, four estimates out
w = 2 * math.pi
d = Differentiator(p, DiffState.from_derivatives(0.0, w, 0.0, -(w**3)))
for k in range(2000):
    d.update(math.sin(w * k * p.h))
t = 2000 * p.h
print("t = %.3f" % t)
print("  estimates:", ["%+.6f" % v for v in d.estimate()])
print("  truth:    ", ["%+.6f" % v for v in (math.sin(w * t), w * math.cos(w * t), -w * w * math.sin(w * t), -(w**3) * math.cos(w * t))])

# the batch interface records every sample; errors are averaged over [1, 10] s
for eta0 in (0.0, 1e-6):
    rec, summ = run_diff(p, SignalSpec(noise_eta0=eta0), duration=10.0, t_skip=1.0)
    print("eta0 = %g" % eta0)
    for i in (1, 2, 3, 4):
        print("  mean|e%d| = %.3e" % (i, getattr(summ, "mean_abs_e%d" % i)))
    # each order costs roughly a factor 1/h
    print("  e2/e1 = %.0f  (1/h = %.0f)" % (summ.mean_abs_e2 / summ.mean_abs_e1, 1 / p.h))

# how often each line sat inside its convergence domain
print("fraction of samples with E1, E2, E3 set:", np.round([rec[f"E{i}"].mean() for i in (1, 2, 3)], 3))

# sin(t) instead of sin(2 pi t): a slower signal is tracked far more closely
rec, summ = run_diff(p, SignalSpec(angular_freq=1.0), 10.0, 1.0)
print("omega = 1: mean|e1| = %.2e, mean|e2| = %.2e" % (summ.mean_abs_e1, summ.mean_abs_e2))
