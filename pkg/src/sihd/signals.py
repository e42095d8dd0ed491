"""Sine test signal with analytic derivatives and seeded additive noise.

Noise is ``eta0 * U`` with ``U`` uniform on [0, 1), one draw per sample, from
numpy's PCG64 generator.  This is biased positive on purpose; set
``zero_mean=True`` to use ``eta0 * (U - 1/2)`` instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["DEFAULT_SEED", "SignalSpec", "SineSource", "derivatives", "sample"]

DEFAULT_SEED = 42


@dataclass(frozen=True)
class SignalSpec:
    kind: str = "sine"
    amplitude: float = 1.0
    angular_freq: float = 2 * math.pi
    noise_eta0: float = 0.0
    seed: int = DEFAULT_SEED
    zero_mean: bool = False

    def __post_init__(self):
        if self.kind != "sine":
            raise ValueError(f"unsupported signal kind {self.kind!r}")
        if not self.noise_eta0 >= 0:
            raise ValueError(f"noise_eta0 must be non-negative, got {self.noise_eta0!r}")


def derivatives(spec: SignalSpec, t: float, order: int) -> float:
    """``order``-th time derivative (0..3) of the clean sine at ``t``."""
    if order not in (0, 1, 2, 3):
        raise ValueError(f"derivative order must be in 0..3, got {order!r}")
    w = spec.angular_freq
    a = spec.amplitude
    # Explicit forms keep sin(0)/cos(0) exact; sin(x + k*pi/2) does not.
    phase = w * t
    if order == 0:
        return a * math.sin(phase)
    if order == 1:
        return a * w * math.cos(phase)
    if order == 2:
        return -a * w**2 * math.sin(phase)
    return -a * w**3 * math.cos(phase)


class SineSource:
    """Sequential sampler over one noise stream.

    Calls to :meth:`sample` consume one generator draw each, so the noise
    sequence depends only on the seed and the call order.
    """

    def __init__(self, spec: SignalSpec):
        self.spec = spec
        self._rng = np.random.Generator(np.random.PCG64(spec.seed))

    def noise(self) -> float:
        u = float(self._rng.random())
        if self.spec.zero_mean:
            u -= 0.5
        return self.spec.noise_eta0 * u

    def sample(self, t: float) -> float:
        clean = derivatives(self.spec, t, 0)
        if self.spec.noise_eta0 == 0:
            return clean
        return clean + self.noise()

    def derivatives(self, t: float) -> tuple[float, float, float, float]:
        return tuple(derivatives(self.spec, t, k) for k in range(4))


def sample(spec: SignalSpec, t: float, source: SineSource | None = None) -> float:
    """One sample at ``t``; noisy specs need a ``source`` carrying the stream."""
    if spec.noise_eta0 == 0:
        return derivatives(spec, t, 0)
    if source is None:
        raise ValueError("a SineSource is required to draw noise")
    return source.sample(t)
