"""Gaussian linear-model engine.

Every model carries an intercept that is never counted in the structure's
complexity.  Designs passed around here hold covariate columns only; the
column of ones is added internally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DataError, DomainError, RankDeficiencyError
from .special import f_cdf, f_sf

__all__ = [
    "Dataset",
    "ModelStructure",
    "SubsetFit",
    "fit_subset",
    "log_relative_likelihood",
    "f_cdf",
    "profile_contour_fixed",
    "joint_contour_mc",
    "SubsetProjector",
]

# relative size of an R diagonal below which a column counts as collinear
RANK_TOL = 1e-10


@dataclass(frozen=True)
class Dataset:
    """Response vector plus covariate design (no intercept column)."""

    response: np.ndarray
    design: np.ndarray
    names: tuple = ()

    def __post_init__(self):
        y = np.array(self.response, dtype=float)
        x = np.array(self.design, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if y.ndim != 1 or x.ndim != 2 or x.shape[0] != y.size:
            raise DataError(f"response of length {y.size} does not match design of shape {x.shape}")
        names = tuple(self.names) if self.names else tuple(f"x{j + 1}" for j in range(x.shape[1]))
        if len(names) != x.shape[1]:
            raise DataError("one name per design column is required")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(x))):
            raise DataError("dataset contains non-finite entries")
        n, p = x.shape
        if n < p + 2:
            raise DataError(f"need n >= p + 2 observations, got n={n}, p={p}")
        y.setflags(write=False)
        x.setflags(write=False)
        object.__setattr__(self, "response", y)
        object.__setattr__(self, "design", x)
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.design.shape[0]

    @property
    def p(self) -> int:
        return self.design.shape[1]

    def full_design(self) -> np.ndarray:
        """Design with the leading column of ones."""
        return np.column_stack([np.ones(self.n), self.design])

    def standardized(self) -> "Dataset":
        """Copy with every covariate centred and scaled to unit sample sd."""
        x = self.design - self.design.mean(axis=0)
        sd = x.std(axis=0, ddof=1)
        if np.any(sd == 0):
            bad = [self.names[j] for j in np.flatnonzero(sd == 0)]
            raise DataError(f"cannot standardize constant column(s) {bad}")
        return Dataset(self.response, x / sd, self.names)


@dataclass(frozen=True, order=True)
class ModelStructure:
    """Subset of covariate columns, encoded as a bitmask.

    Bit ``j`` set means column ``j`` is included.  Structures sort by
    complexity, then by mask.
    """

    complexity: int = field(init=False)
    mask: int

    def __post_init__(self):
        if self.mask < 0:
            raise DomainError("mask must be nonnegative")
        object.__setattr__(self, "complexity", int(self.mask).bit_count())

    @classmethod
    def from_indices(cls, indices: Sequence[int]) -> "ModelStructure":
        mask = 0
        for j in indices:
            mask |= 1 << int(j)
        return cls(mask)

    @classmethod
    def from_names(cls, names: Sequence[str], all_names: Sequence[str]) -> "ModelStructure":
        lookup = {name: j for j, name in enumerate(all_names)}
        try:
            return cls.from_indices([lookup[name] for name in names])
        except KeyError as err:
            raise DomainError(f"unknown column {err.args[0]!r}") from None

    def indices(self) -> list[int]:
        m, j, out = self.mask, 0, []
        while m:
            if m & 1:
                out.append(j)
            m >>= 1
            j += 1
        return out

    def names(self, all_names: Sequence[str]) -> list[str]:
        return [all_names[j] for j in self.indices()]

    def issubset(self, other: "ModelStructure") -> bool:
        return self.mask & ~other.mask == 0

    def bits(self, p: int) -> list[int]:
        return [(self.mask >> j) & 1 for j in range(p)]


@dataclass(frozen=True, eq=False)
class SubsetFit:
    coefficients: np.ndarray  # intercept first, then selected covariates in column order
    rss: float
    lambda_hat: float
    dof: int


def _qr_checked(a: np.ndarray, labels: Sequence) -> tuple[np.ndarray, np.ndarray]:
    q, r = np.linalg.qr(a)
    if a.shape[1] == 0:
        return q, r
    diag = np.abs(np.diag(r))
    scale = np.linalg.norm(a, axis=0)
    scale[scale == 0] = 1.0
    bad = np.flatnonzero(diag <= RANK_TOL * scale)
    if bad.size:
        cols = [labels[j] for j in bad]
        raise RankDeficiencyError(f"design is rank deficient; collinear column(s): {cols}", cols)
    return q, r


def fit_subset(data: Dataset, s: ModelStructure) -> SubsetFit:
    """Least-squares fit of the response on the intercept and the columns of ``s``."""
    idx = s.indices()
    if idx and idx[-1] >= data.p:
        raise DomainError(f"structure mask {s.mask} refers to columns beyond p={data.p}")
    a = np.column_stack([np.ones(data.n), data.design[:, idx]])
    q, r = _qr_checked(a, ["(intercept)"] + [data.names[j] for j in idx])
    coef = solve_triangular(r, q.T @ data.response)
    resid = data.response - a @ coef
    rss = float(resid @ resid)
    return SubsetFit(coef, rss, rss / data.n, data.n - len(idx) - 1)


def _mle(data: Dataset) -> tuple[np.ndarray, float]:
    fit = fit_subset(data, ModelStructure((1 << data.p) - 1))
    return fit.coefficients, fit.lambda_hat


def log_relative_likelihood(data: Dataset, phi: Sequence[float], lam: float) -> float:
    """Twice the Gaussian log likelihood ratio against the MLE.

    Returns ``n log(lambda_hat / lam) - ||y - X phi||^2 / lam + n``, which is
    zero at the maximum likelihood estimate and negative elsewhere.
    """
    if not lam > 0:
        raise DomainError("variance must be positive")
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (data.p + 1,):
        raise DomainError(f"coefficient vector must have length p + 1 = {data.p + 1}")
    _, lam_hat = _mle(data)
    resid = data.response - data.full_design() @ phi
    return float(data.n * np.log(lam_hat / lam) - resid @ resid / lam + data.n)


def profile_contour_fixed(data: Dataset, phi: Sequence[float]) -> float:
    """Closed-form profile contour for the full coefficient vector.

    ``1 - F_{p+1, n-p-1}`` evaluated at the usual F statistic for testing
    ``phi``: the squared fitted-value distance over the residual sum of
    squares, scaled by ``(n - p - 1) / (p + 1)``.
    """
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (data.p + 1,):
        raise DomainError(f"coefficient vector must have length p + 1 = {data.p + 1}")
    phi_hat, lam_hat = _mle(data)
    x = data.full_design()
    diff = x @ (phi_hat - phi)
    rss = lam_hat * data.n
    d1, d2 = data.p + 1, data.n - data.p - 1
    stat = float(diff @ diff) / rss * d2 / d1
    if stat == 0.0:
        return 1.0
    return f_sf(stat, d1, d2)


def joint_contour_mc(
    data: Dataset,
    phi: Sequence[float],
    lam: float,
    mc_draws: int = 10_000,
    seed: int | None = 0,
) -> float:
    """Monte Carlo contour for ``(phi, lambda)`` jointly.

    Under ``P_{phi, lambda}`` the relative likelihood is a pivot: writing
    ``Y = X phi + sqrt(lambda) Z`` it depends on ``Z`` alone, so the contour is
    the fraction of simulated pivots not exceeding the observed value.
    """
    if mc_draws < 1000:
        raise DomainError("mc_draws must be at least 1000")
    observed = log_relative_likelihood(data, phi, lam)
    if observed == 0.0:
        return 1.0
    x = data.full_design()
    q, _ = _qr_checked(x, ["(intercept)", *data.names])
    rng = np.random.default_rng(seed)
    n = data.n
    out = np.empty(mc_draws)
    chunk = 10_000
    for start in range(0, mc_draws, chunk):
        z = rng.standard_normal((n, min(chunk, mc_draws - start)))
        total = np.einsum("ij,ij->j", z, z)
        proj = q.T @ z
        rss = total - np.einsum("ij,ij->j", proj, proj)
        out[start:start + z.shape[1]] = n * np.log(rss / n) - total + n
    return float(np.mean(out <= observed))


class SubsetProjector:
    """Batched residual sums of squares for many structures over one design.

    Structures are arranged in a tree in which each child adds one column to
    its parent.  With the intercept absorbed by centring, the explained sum
    of squares of a child is that of its parent plus the squared projection
    on one unit vector: the new column's residual against the parent's
    columns.  One matrix product with these vectors then yields the residual
    sums of squares of every structure for any number of responses.
    """

    def __init__(self, design: np.ndarray, structures: Sequence[ModelStructure], names=None):
        x = np.asarray(design, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        self.n, self.p = x.shape
        names = list(names) if names is not None else [f"x{j + 1}" for j in range(self.p)]
        self.structures = tuple(structures)
        self.sizes = np.array([s.complexity for s in self.structures], dtype=int)
        for s in self.structures:
            idx = s.indices()
            if idx and idx[-1] >= self.p:
                raise DomainError(f"structure mask {s.mask} refers to columns beyond p={self.p}")
            if idx:
                # rank is checked with the intercept present so collinearity with it is caught
                _qr_checked(np.column_stack([np.ones(self.n), x[:, idx]]),
                            ["(intercept)"] + [names[j] for j in idx])

        wanted = {s.mask for s in self.structures}
        parent: dict[int, tuple[int, int]] = {0: (-1, -1)}  # mask -> (parent mask, added column)

        def attach(mask):
            if mask in parent:
                return
            bits = ModelStructure(mask).indices()
            # prefer a parent that is itself requested, to avoid helper nodes
            for j in reversed(bits):
                if mask ^ (1 << j) in wanted:
                    attach(mask ^ (1 << j))
                    parent[mask] = (mask ^ (1 << j), j)
                    return
            j = bits[-1]
            attach(mask ^ (1 << j))
            parent[mask] = (mask ^ (1 << j), j)

        for s in self.structures:
            attach(s.mask)

        xc = x - x.mean(axis=0)
        nodes = sorted(m for m in parent if m)
        nodes.sort(key=lambda m: bin(m).count("1"))
        self._node_index = {0: 0}
        for k, m in enumerate(nodes, start=1):
            self._node_index[m] = k
        basis = np.empty((self.n, len(nodes)))
        self._parent = np.zeros(len(nodes) + 1, dtype=int)
        self._levels = []
        for k, m in enumerate(nodes, start=1):
            pm, j = parent[m]
            cols = ModelStructure(pm).indices() + [j]
            q, _ = np.linalg.qr(xc[:, cols])
            basis[:, k - 1] = q[:, -1]
            self._parent[k] = self._node_index[pm]
        sizes = np.array([0] + [bin(m).count("1") for m in nodes])
        for level in range(1, sizes.max() + 1 if nodes else 1):
            members = np.flatnonzero(sizes == level)
            self._levels.append(members)
        self.basis = basis
        self._out = np.array([self._node_index[s.mask] for s in self.structures], dtype=int)

    def rss(self, y: np.ndarray) -> np.ndarray:
        """Residual sums of squares, shape ``(len(structures),)`` or ``(len(structures), m)``."""
        y = np.asarray(y, dtype=float)
        single = y.ndim == 1
        if single:
            y = y[:, None]
        yc = y - y.mean(axis=0)
        total = np.einsum("ij,ij->j", yc, yc)
        ess = np.zeros((self.basis.shape[1] + 1, y.shape[1]))
        if self.basis.shape[1]:
            proj = self.basis.T @ yc
            proj *= proj
            ess[1:] = proj
            for members in self._levels:
                ess[members] += ess[self._parent[members]]
        out = total - ess[self._out]
        np.maximum(out, 0.0, out=out)
        return out[:, 0] if single else out


def all_structures(p: int) -> list[ModelStructure]:
    return [ModelStructure(m) for m in range(1 << p)]


def structures_of_size(p: int, k: int) -> list[ModelStructure]:
    return [ModelStructure.from_indices(c) for c in combinations(range(p), k)]
