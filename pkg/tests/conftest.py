import mpmath
import pytest
from hypothesis import settings

from sihd.core import DiffParams

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")

REFERENCE_GAINS = dict(lambda1=1e3, lambda2=1e6, lambda3=1e9, lambda4=1e9, alpha=0.95, mu=1.0, h=1e-3)


@pytest.fixture
def reference_params():
    return DiffParams(**REFERENCE_GAINS)


def mp_step(z, x, lam, alpha, mu, h, sd_mode="continuous", dps=50, with_scales=False):
    """High-precision straight-line transcription of one differentiator step.

    Written independently of ``sihd.core``: lines are evaluated top-down with
    the bounds, projectors, gates and correction terms spelled out.
    """
    with mpmath.workdps(dps):
        z1, z2, z3, z4 = (mpmath.mpf(v) for v in z)
        lam = [mpmath.mpf(v) for v in lam]
        a, m, hh = mpmath.mpf(alpha), mpmath.mpf(mu), mpmath.mpf(h)
        e = mpmath.mpf(x) - z1

        inj, flag = [], []
        for q in (1, 2, 3, 4):
            if sd_mode == "paper":
                bound = (lam[0] * m * hh) ** (1 / (q * (1 - a)))
            else:
                bound = (lam[q - 1] * (m * hh) ** q) ** (1 / (q * (1 - a)))
            if abs(e) <= bound:
                spow = mpmath.sign(e) * abs(e) ** (q * (1 - a))
                n = spow / (lam[q - 1] * (m * hh) ** q)
                flag.append(1)
            else:
                n = mpmath.sign(e)
                flag.append(0)
            if e == 0:
                inj.append(mpmath.mpf(0))
            else:
                inj.append(lam[q - 1] * m**q * abs(e) ** (q * a - (q - 1)) * n)
        E1, E2, E3 = flag[:3]
        n4 = z4 + E1 * E2 * E3 * hh * inj[3]
        n3 = z3 + E1 * E2 * hh * (n4 + inj[2])
        n2 = z2 + E1 * hh * (n3 - E3 * hh * mpmath.mpf(1) / 2 * n4 + inj[1])
        n1 = z1 + hh * (n2 - E2 * hh / 2 * n3 + E3 * E2 * hh**2 / 6 * n4 + inj[0])
        if not with_scales:
            return (n1, n2, n3, n4), (bool(E1), bool(E2), bool(E3))
        # absolute sum of every term feeding each line, for rounding budgets
        s4 = abs(z4) + hh * abs(inj[3])
        s3 = abs(z3) + hh * (s4 + abs(inj[2]))
        s2 = abs(z2) + hh * (s3 + hh / 2 * s4 + abs(inj[1]))
        s1 = abs(z1) + hh * (s2 + hh / 2 * s3 + hh**2 / 6 * s4 + abs(inj[0]))
        return (n1, n2, n3, n4), (bool(E1), bool(E2), bool(E3)), (s1, s2, s3, s4)
