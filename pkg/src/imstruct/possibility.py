"""Possibility contours on finite domains.

A contour assigns every element of a finite domain a value in [0, 1], with
the largest value exactly 1.  The possibility of a hypothesis is the largest
contour value over it; marginalisation through a map takes maxima over
preimages.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import DomainError

MASS_TOL = 1e-12


def _as_values(values: Iterable[float]) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Contour:
    """Possibility contour over an ordered, finite domain.

    Parameters
    ----------
    domain : sequence of hashable
        Distinct domain elements, in display order.
    values : sequence of float
        Possibility value of each element.  Every value must lie in [0, 1]
        and the maximum must be exactly 1.
    """

    domain: tuple
    values: np.ndarray
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        domain = tuple(self.domain)
        values = _as_values(self.values)
        if values.ndim != 1 or len(domain) != values.size:
            raise DomainError("domain and values must have equal length")
        if not domain:
            raise DomainError("a contour needs a nonempty domain")
        if not np.all(np.isfinite(values)) or values.min() < 0.0 or values.max() > 1.0:
            raise DomainError("contour values must lie in [0, 1]")
        if values.max() != 1.0:
            raise DomainError(f"contour maximum is {values.max()!r}, not 1")
        index = {elem: i for i, elem in enumerate(domain)}
        if len(index) != len(domain):
            raise DomainError("contour domain has repeated elements")
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_index", index)

    def __len__(self):
        return len(self.domain)

    def __getitem__(self, element) -> float:
        try:
            return float(self.values[self._index[element]])
        except KeyError:
            raise DomainError(f"{element!r} is not in the contour domain") from None

    def __contains__(self, element) -> bool:
        return element in self._index

    def items(self):
        return zip(self.domain, self.values.tolist())

    def mode(self):
        """First domain element with value 1."""
        return self.domain[int(np.argmax(self.values == 1.0))]

    def as_dict(self) -> dict:
        return dict(self.items())


@dataclass(frozen=True, eq=False)
class MassFunction:
    """Probability mass function over an ordered, finite domain."""

    domain: tuple
    masses: np.ndarray
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        domain = tuple(self.domain)
        masses = _as_values(self.masses)
        if masses.ndim != 1 or len(domain) != masses.size or not domain:
            raise DomainError("domain and masses must be nonempty and of equal length")
        if not np.all(np.isfinite(masses)) or masses.min() < 0.0:
            raise DomainError("masses must be finite and nonnegative")
        total = masses.sum()
        if abs(total - 1.0) > MASS_TOL:
            raise DomainError(f"masses sum to {total!r}, not 1")
        index = {elem: i for i, elem in enumerate(domain)}
        if len(index) != len(domain):
            raise DomainError("mass function domain has repeated elements")
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "_index", index)

    def __len__(self):
        return len(self.domain)

    def __getitem__(self, element) -> float:
        try:
            return float(self.masses[self._index[element]])
        except KeyError:
            raise DomainError(f"{element!r} is not in the mass function domain") from None

    def items(self):
        return zip(self.domain, self.masses.tolist())

    def mean(self) -> float:
        """Expected value; the domain must be numeric."""
        return float(np.dot(np.asarray(self.domain, dtype=float), self.masses))


def possibility_of(contour: Contour, hypothesis: Iterable[Hashable]) -> float:
    """Possibility of a hypothesis: the largest contour value over its elements."""
    hypothesis = list(hypothesis)
    if not hypothesis:
        raise DomainError("hypothesis must be nonempty")
    return max(contour[h] for h in hypothesis)


def prob_to_poss(f: MassFunction) -> Contour:
    """Probability-to-possibility transform.

    The contour at ``theta`` is the total mass of all atoms whose mass does
    not exceed ``f(theta)``; equal-mass atoms all count.
    """
    masses = f.masses
    order = np.argsort(masses, kind="stable")
    sorted_masses = masses[order]
    cumulative = np.cumsum(sorted_masses)
    # last position holding a mass <= f(theta), ties included
    upto = np.searchsorted(sorted_masses, masses, side="right") - 1
    values = cumulative[upto] / cumulative[-1]
    values[masses == sorted_masses[-1]] = 1.0
    return Contour(f.domain, np.clip(values, 0.0, 1.0))


def extend(contour: Contour, g: Callable[[Any], Hashable] | Mapping) -> Contour:
    """Push a contour through the map ``g`` by maximising over preimages.

    The target domain is ordered by first appearance along the source domain.
    """
    mapper = g.__getitem__ if isinstance(g, Mapping) else g
    target: dict = {}
    for element, value in contour.items():
        key = mapper(element)
        if key not in target or value > target[key]:
            target[key] = value
    return Contour(tuple(target), list(target.values()))


def _check_monotone(q: Contour) -> np.ndarray:
    p = len(q) - 1
    if q.domain != tuple(range(p + 1)):
        raise DomainError("expected a contour over 0, 1, ..., p")
    v = q.values
    if v[0] != 1.0:
        raise DomainError("contour must equal 1 at 0")
    if np.any(np.diff(v) > 0.0):
        raise DomainError("contour must be nonincreasing; general Choquet integrals are not supported")
    return v


def upper_expectation_monotone(q: Contour) -> float:
    """Upper mean of ``K`` over the credal set of a nonincreasing contour on {0..p}.

    For a nonincreasing contour the Choquet integral reduces to the tail sum
    ``q(1) + ... + q(p)``, which is also the mean of :func:`most_diffuse`.
    """
    v = _check_monotone(q)
    return float(v[1:].sum())


def most_diffuse(q: Contour) -> MassFunction:
    """The mass function whose upper tails ``P(K >= k)`` reproduce ``q(k)``."""
    v = _check_monotone(q)
    masses = np.empty_like(v)
    masses[:-1] = v[:-1] - v[1:]
    masses[-1] = v[-1]
    return MassFunction(q.domain, masses)


def geometric_contour(p: int, gamma: float) -> Contour:
    """``k -> exp(-gamma * k)`` on {0, ..., p}."""
    if gamma < 0:
        raise DomainError("gamma must be nonnegative")
    k = np.arange(p + 1)
    return Contour(tuple(range(p + 1)), np.exp(-gamma * k))


def grid_contour(density: Callable[[np.ndarray], np.ndarray], grid: Sequence[float]) -> Contour:
    """Transform a density evaluated on an equally weighted grid into a contour.

    Continuous contours are approximated by treating each grid point as an atom
    with mass proportional to the density there.
    """
    grid = np.asarray(grid, dtype=float)
    dens = np.asarray(density(grid), dtype=float)
    if np.any(dens < 0) or not np.any(dens > 0):
        raise DomainError("density must be nonnegative and not identically zero")
    masses = dens / dens.sum()
    masses = masses / masses.sum()
    return prob_to_poss(MassFunction(tuple(grid.tolist()), masses))
