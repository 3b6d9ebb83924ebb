"""Conjugate Bayesian comparator.

Each structure gets the normal--inverse-gamma prior

    Lambda ~ InvGamma(a0, b0),   Phi | Lambda = lam ~ N(0, v0 * lam * I),

on the intercept and its selected slopes.  Structures get prior mass
``Q_K(|s|) / #{structures of that size}``, where ``Q_K`` is the most diffuse
distribution compatible with the complexity contour.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular
from scipy.special import logsumexp

from .errors import DomainError
from .linreg import Dataset, ModelStructure, _qr_checked
from .possibility import MassFunction, most_diffuse
from .structure import PriorSpec, _as_universe


@dataclass(frozen=True)
class NIGHyper:
    a0: float = 0.01
    b0: float = 0.01
    v0: float = 100.0

    def __post_init__(self):
        if not (self.a0 > 0 and self.b0 > 0 and self.v0 > 0):
            raise DomainError("normal-inverse-gamma hyperparameters must be positive")


@dataclass(frozen=True)
class _Posterior:
    mean: np.ndarray
    chol: tuple  # Cholesky factor of the posterior precision (per unit variance)
    a_n: float
    b_n: float
    log_det_precision: float


def _design(data: Dataset, s: ModelStructure) -> np.ndarray:
    idx = s.indices()
    if idx and idx[-1] >= data.p:
        raise DomainError(f"structure mask {s.mask} refers to columns beyond p={data.p}")
    x = np.column_stack([np.ones(data.n), data.design[:, idx]])
    _qr_checked(x, ["(intercept)"] + [data.names[j] for j in idx])
    return x


def _posterior(x: np.ndarray, y: np.ndarray, hyper: NIGHyper) -> _Posterior:
    precision = x.T @ x + np.eye(x.shape[1]) / hyper.v0
    chol = cho_factor(precision, lower=True)
    mean = cho_solve(chol, x.T @ y)
    quad = float(y @ y - mean @ precision @ mean)
    a_n = hyper.a0 + 0.5 * y.size
    b_n = hyper.b0 + 0.5 * max(quad, 0.0)
    log_det = 2.0 * float(np.log(np.diag(chol[0])).sum())
    return _Posterior(mean, chol, a_n, b_n, log_det)


def log_marginal_likelihood(data: Dataset, s: ModelStructure, hyper: NIGHyper = NIGHyper()) -> float:
    """Log of the prior-predictive density of the response under structure ``s``."""
    x = _design(data, s)
    post = _posterior(x, data.response, hyper)
    n, d = x.shape
    return (
        -0.5 * n * math.log(2 * math.pi)
        - 0.5 * d * math.log(hyper.v0)
        - 0.5 * post.log_det_precision
        + hyper.a0 * math.log(hyper.b0)
        - math.lgamma(hyper.a0)
        + math.lgamma(post.a_n)
        - post.a_n * math.log(post.b_n)
    )


def structure_log_prior(prior: PriorSpec, universe: Sequence[ModelStructure]) -> np.ndarray:
    """Log prior mass of each structure: most-diffuse ``Q_K`` spread uniformly within each size."""
    q_k = most_diffuse(prior.contour())
    sizes = np.array([s.complexity for s in universe])
    counts = np.bincount(sizes, minlength=prior.p + 1)
    mass = np.array([q_k[int(k)] for k in sizes]) / counts[sizes]
    with np.errstate(divide="ignore"):
        return np.log(mass)


def model_posterior(
    data: Dataset,
    prior: PriorSpec,
    hyper: NIGHyper = NIGHyper(),
    universe=None,
) -> MassFunction:
    """Posterior probabilities of the structures in the universe."""
    universe = _as_universe(universe, data.p)
    log_post = structure_log_prior(prior, universe)
    log_post = log_post + np.array([log_marginal_likelihood(data, s, hyper) for s in universe])
    masses = np.exp(log_post - logsumexp(log_post))
    return MassFunction(universe, masses / masses.sum())


def credible_set(posterior: MassFunction, alpha: float) -> list[tuple[ModelStructure, float]]:
    """Smallest highest-mass set with total posterior mass at least ``1 - alpha``."""
    if not 0.0 <= alpha < 1.0:
        raise DomainError("alpha must lie in [0, 1)")
    ranked = sorted(posterior.items(), key=lambda sm: (-sm[1], sm[0].complexity, sm[0].mask))
    if alpha == 0.0:
        return [(s, m) for s, m in ranked if m > 0]
    out, total = [], 0.0
    for s, m in ranked:
        out.append((s, m))
        total += m
        if total >= 1.0 - alpha - 1e-12:
            break
    return out


def sample_posterior(
    data: Dataset,
    s: ModelStructure,
    draws: int,
    rng: np.random.Generator,
    hyper: NIGHyper = NIGHyper(),
) -> tuple[np.ndarray, np.ndarray]:
    """Joint posterior draws ``(phi, lambda)`` for a fixed structure."""
    x = _design(data, s)
    post = _posterior(x, data.response, hyper)
    lam = post.b_n / rng.gamma(post.a_n, size=draws)
    z = rng.standard_normal((x.shape[1], draws))
    # precision = L L^T, so L^{-T} z has covariance precision^{-1}
    dev = solve_triangular(post.chol[0], z, lower=True, trans="T")
    phi = post.mean[:, None] + np.sqrt(lam) * dev
    return phi.T, lam


def false_confidence_probability(
    data: Dataset,
    threshold: float = -1.0,
    draws: int = 10_000,
    seed: int | None = 0,
    hyper: NIGHyper = NIGHyper(),
) -> float:
    """Posterior probability that the root ``-phi0 / phi1`` of the mean line exceeds ``threshold``."""
    if data.p != 1:
        raise DomainError("false-confidence demo needs exactly one covariate")
    if draws < 10_000:
        raise DomainError("draws must be at least 10_000")
    rng = np.random.default_rng(seed)
    phi, _ = sample_posterior(data, ModelStructure(1), draws, rng, hyper)
    with np.errstate(divide="ignore", invalid="ignore"):
        root = -phi[:, 0] / phi[:, 1]
    return float(np.mean(root > threshold))
