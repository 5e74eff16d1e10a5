"""Two-level rotating-wave model of the resonant search."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RwaModel:
    n_size: int
    v0: float = 1.0

    def __post_init__(self):
        if self.n_size < 1:
            raise ValueError("n_size must be >= 1")
        if not self.v0 > 0:
            raise ValueError("v0 must be positive")

    @property
    def omega(self) -> float:
        """Rabi frequency v0 / sqrt(N)."""
        return self.v0 / math.sqrt(self.n_size)

    @property
    def tau(self) -> float:
        return optimal_time(self.n_size, self.v0)


def rwa_probabilities(model: RwaModel, t):
    """``(cos^2(omega t), sin^2(omega t))`` for the initial and searched levels."""
    p_searched = np.sin(model.omega * np.asarray(t, dtype=float)) ** 2
    p_initial = 1.0 - p_searched
    if np.ndim(p_searched) == 0:
        return float(p_initial), float(p_searched)
    return p_initial, p_searched


def optimal_time(n_size: int, v0: float = 1.0) -> float:
    """First time the searched level is fully populated: ``pi sqrt(N) / (2 v0)``."""
    if n_size < 1 or not v0 > 0:
        raise ValueError("need n_size >= 1 and v0 > 0")
    return math.pi * math.sqrt(n_size) / (2.0 * v0)


def detuned_peak_probability(n_size: int, delta):
    """Searched-level probability at the nominal optimal time, drive detuned by ``delta``.

    Unit coupling. Depends on ``delta`` only through ``delta**2 * N``.
    """
    if n_size < 1:
        raise ValueError("n_size must be >= 1")
    r = np.sqrt(1.0 + np.square(np.asarray(delta, dtype=float)) * n_size / 4.0)
    p = (np.sin(0.5 * math.pi * r) / r) ** 2
    return float(p) if np.ndim(p) == 0 else p


def resonance_width(n_size: int, rtol: float = 1e-10) -> float:
    """Positive detuning at which the peak probability halves, by bisection.

    The probability decreases monotonically from 1 to its first zero at
    ``delta = 2 sqrt(3 / N)``, which brackets the half-height point.
    """
    target = 0.5 * detuned_peak_probability(n_size, 0.0)
    lo, hi = 0.0, 2.0 * math.sqrt(3.0 / n_size)
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if detuned_peak_probability(n_size, mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class DetuningResult:
    delta: float
    p_peak: float
    width: float


def detuning_result(n_size: int, delta: float) -> DetuningResult:
    return DetuningResult(float(delta), detuned_peak_probability(n_size, delta), resonance_width(n_size))
