"""Choosing the complexity prior ``q_K(k) = exp(-gamma k)``.

The credal set of a nonincreasing contour has upper mean ``sum_{k>=1} q_K(k)``,
so ``gamma`` can be tuned until that upper mean hits a target such as ``2/p``.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .errors import DomainError
from .possibility import geometric_contour, upper_expectation_monotone
from .structure import PriorSpec

BRACKET = (1e-6, 50.0)


def upper_mean(p: int, gamma: float) -> float:
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    return upper_expectation_monotone(geometric_contour(p, gamma))


def upper_mean_curve(p: int, gammas: Iterable[float]) -> list[tuple[float, float]]:
    """``(gamma, upper mean)`` pairs for the geometric prior on {0..p}."""
    return [(float(g), upper_mean(p, g)) for g in gammas]


def solve_gamma(p: int, target_mean: float, tol: float = 1e-8) -> float:
    """Solve ``upper_mean(p, gamma) == target_mean`` by bisection.

    The upper mean falls strictly from ``p`` (as gamma -> 0) to 0, so any
    target in ``(0, p)`` has exactly one solution.  Bisection continues until
    the mean is within ``tol`` and the bracket has collapsed to rounding level.
    """
    if not 0 < target_mean < p:
        raise DomainError(f"target mean must lie strictly between 0 and p={p}")
    lo, hi = BRACKET
    while upper_mean(p, lo) < target_mean:
        lo /= 10.0
        if lo < 1e-300:
            raise DomainError("target mean too close to p")
    while upper_mean(p, hi) > target_mean:
        hi *= 2.0
        if hi > 1e6:
            raise DomainError("target mean too close to 0")
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if upper_mean(p, mid) > target_mean:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            break
    gamma = 0.5 * (lo + hi)
    if abs(upper_mean(p, gamma) - target_mean) > tol:
        raise ArithmeticError("bisection failed to reach the requested tolerance")
    return gamma


def shifted_prior(p: int, gamma: float, mode: int, *, enable: bool = False) -> PriorSpec:
    """Prior ``exp(-gamma |k - mode|)`` centred on a best guess for the complexity.

    Off unless ``enable=True``; the default analysis uses ``mode = 0``.  The
    resulting contour is not monotone, so the upper-mean helpers above do
    not apply to it.
    """
    if not enable:
        raise DomainError("shifted priors are experimental; pass enable=True to use one")
    return PriorSpec(gamma, p, mode)
