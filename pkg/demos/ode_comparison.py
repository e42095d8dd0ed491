"""
Observer-based ODE integration
==============================

Integrate the three scalar test problems with explicit Euler, RK4 and the
nonstandard finite-difference scheme whose right-hand side comes from the
differentiator, then compare errors near the end of each horizon.
"""

import numpy as np

from sihd.bench import run_ode, terminal_window_mean
from sihd.core import DiffParams
from sihd.ode import PsiRule, SihdSchemeConfig, catalog, integrate

h = 1e-3
for p in catalog():
    rec = run_ode(p.name, h=h)
    print("%s on [%g, %g], y0 = %g" % (p.name, p.t0, p.t_end, p.y0))
    for s in ("euler", "rk4", "sihd"):
        print("  %-5s terminal mean error %.3e   max error %.3e" % (s, terminal_window_mean(rec, "err_" + s), rec["err_" + s].max()))

# the denominator function psi(h) = h + O(h^2): linear or exponential
ex1 = catalog()[0]
for psi in (PsiRule("linear"), PsiRule("exponential", 1.0)):
    for mode in ("taylor", "smoothed"):
        cfg = SihdSchemeConfig(DiffParams(h=h), psi, mode)
        err = integrate(ex1, "nsfd_sihd", h, cfg)["err"]
        print("ex1 psi=%-11s mode=%-8s final error %.3e" % (psi.kind, mode, err[-1]))

# global error against step size: slopes give the orders
hs = np.array([1e-1, 1e-2, 1e-3])
for s in ("euler", "rk4"):
    errs = [integrate(ex1, s, hh)["err"].max() for hh in hs]
    print("%s order ~ %.2f" % (s, np.polyfit(np.log10(hs), np.log10(errs), 1)[0]))
