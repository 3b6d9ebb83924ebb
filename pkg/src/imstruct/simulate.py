"""Simulation studies: coverage, validity and false confidence.

Data are drawn from joint laws compatible with the complexity prior: the
complexity ``K`` comes from the most diffuse distribution under ``q_K``, the
structure is uniform among those of size ``K``, and the active slopes are
read from a fixed coefficient pool.  The design matrix is generated once per
experiment and held fixed, so a single reference table serves every
replicate.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .bayes import NIGHyper, credible_set, false_confidence_probability, model_posterior
from .errors import DomainError
from .linreg import Dataset, ModelStructure
from .possibility import most_diffuse
from .structure import PriorSpec, build_reference_table, structure_contour

# spawn-key prefixes; reference tables use one-element keys (mask,)
_DESIGN_STREAM = 0
_REPLICATE_STREAM = 1

DEFAULT_ALPHAS = tuple(round(0.05 * k, 2) for k in range(1, 11))
VALIDITY_GRID = tuple(round(0.05 * k, 2) for k in range(1, 21))


@dataclass(frozen=True)
class CoverageConfig:
    """Knobs of the coverage experiment.

    Parameters
    ----------
    p, n : int
        Number of candidate covariates and sample size.
    gamma : float
        Complexity prior hyperparameter.
    coefficients : tuple of float
        Slope used for covariate ``j`` whenever it is active.
    intercept, variance : float
        True intercept and error variance.
    replications : int
        Number of simulated data sets (at least 100).
    alphas : tuple of float
        Levels in (0, 1) at which coverage is reported.
    B : int
        Reference draws per structure.
    seed : int
        Master seed; design, replicates and reference table all derive from it.
    """

    p: int = 3
    n: int = 25
    gamma: float = 1.0
    coefficients: tuple = (0.5, 1.0, 5.0)
    intercept: float = 0.0
    variance: float = 1.0
    replications: int = 2000
    alphas: tuple = DEFAULT_ALPHAS
    B: int = 5000
    seed: int = 0
    hyper: NIGHyper = field(default_factory=NIGHyper)

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if self.p < 1 or self.n < self.p + 2:
            raise DomainError("need p >= 1 and n >= p + 2")
        if len(self.coefficients) != self.p:
            raise DomainError(f"coefficient pool must have length p={self.p}")
        if not self.variance > 0:
            raise DomainError("variance must be positive")
        if self.replications < 100:
            raise DomainError("replications must be at least 100")
        if not self.alphas or not all(0.0 < a < 1.0 for a in self.alphas):
            raise DomainError("alphas must be a nonempty subset of (0, 1)")
        PriorSpec(self.gamma, self.p)

    @property
    def prior(self) -> PriorSpec:
        return PriorSpec(self.gamma, self.p)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["coefficients"] = list(self.coefficients)
        d["alphas"] = list(self.alphas)
        return d


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=key))


def fixed_design(config: CoverageConfig) -> np.ndarray:
    """Standard normal ``n x p`` design, drawn once from the master seed."""
    return _rng(config.seed, _DESIGN_STREAM).standard_normal((config.n, config.p))


def draw_prior_compatible_instance(
    config: CoverageConfig,
    replicate_index: int,
    design: np.ndarray | None = None,
) -> tuple[ModelStructure, np.ndarray]:
    """True structure and response for one replicate.

    The draw depends only on ``(config.seed, replicate_index)``.
    """
    if design is None:
        design = fixed_design(config)
    rng = _rng(config.seed, _REPLICATE_STREAM, int(replicate_index))
    q_k = most_diffuse(config.prior.contour()).masses
    k = int(rng.choice(config.p + 1, p=q_k))
    active = np.sort(rng.choice(config.p, size=k, replace=False))
    s = ModelStructure.from_indices(active.tolist())
    mean = config.intercept + design[:, active] @ np.asarray(config.coefficients)[active]
    y = mean + np.sqrt(config.variance) * rng.standard_normal(config.n)
    return s, y


@dataclass(frozen=True, eq=False)
class ReplicateResults:
    """Per-replicate quantities shared by the coverage and validity studies.

    ``possibility[i]`` is the IM contour at the true structure of replicate
    ``i``; ``bayes_covered[i, j]`` says whether the credible set at
    ``alphas[j]`` contains it.
    """

    config: CoverageConfig
    truth: tuple
    possibility: np.ndarray
    bayes_covered: np.ndarray


def run_replicates(config: CoverageConfig, n_jobs: int = 1) -> ReplicateResults:
    """Simulate every replicate once; reused by both experiments."""
    design = fixed_design(config)
    prior = config.prior
    table = build_reference_table(design, prior, B=config.B, master_seed=config.seed, n_jobs=n_jobs)

    def one(i):
        s, y = draw_prior_compatible_instance(config, i, design)
        data = Dataset(y, design)
        pi = structure_contour(data, prior, table)[s]
        post = model_posterior(data, prior, config.hyper)
        covered = [any(r == s for r, _ in credible_set(post, a)) for a in config.alphas]
        return s, pi, covered

    idx = range(config.replications)
    if n_jobs == 1:
        out = [one(i) for i in idx]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            out = list(pool.map(one, idx))
    truth, pis, covered = zip(*out)
    return ReplicateResults(config, tuple(truth), np.array(pis), np.array(covered, dtype=bool))


@dataclass(frozen=True)
class CoverageRecord:
    alpha: float
    im_coverage: float
    bayes_coverage: float
    mc_standard_error: float


@dataclass(frozen=True)
class CoverageReport:
    records: tuple
    replications: int
    config: CoverageConfig

    def to_records(self) -> list[dict]:
        return [asdict(r) for r in self.records]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=["alpha", "im_coverage", "bayes_coverage", "mc_standard_error"],
                                lineterminator="\n")
        writer.writeheader()
        writer.writerows(self.to_records())
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "replications": self.replications,
            "config": self.config.to_dict(),
            "credible_set_rule": "greedy highest posterior mass, ties by complexity then mask",
            "records": self.to_records(),
        }
        return json.dumps(doc, indent=2)


def coverage_experiment(
    config: CoverageConfig,
    results: ReplicateResults | None = None,
    n_jobs: int = 1,
) -> CoverageReport:
    """Empirical coverage of IM confidence sets and Bayes credible sets."""
    if results is None:
        results = run_replicates(config, n_jobs)
    reps = results.possibility.size
    records = []
    for j, a in enumerate(config.alphas):
        im = np.count_nonzero(results.possibility > a) / reps
        bayes = np.count_nonzero(results.bayes_covered[:, j]) / reps
        se = float(np.sqrt(im * (1 - im) / reps))
        records.append(CoverageRecord(a, float(im), float(bayes), se))
    return CoverageReport(tuple(records), reps, config)


def empirical_cdf(values: np.ndarray, grid: Sequence[float]) -> list[tuple[float, float]]:
    values = np.sort(np.asarray(values, dtype=float))
    grid = np.asarray(grid, dtype=float)
    counts = np.searchsorted(values, grid, side="right")
    return [(float(g), float(c / values.size)) for g, c in zip(grid, counts)]


def validity_experiment(
    config: CoverageConfig,
    results: ReplicateResults | None = None,
    grid: Sequence[float] = VALIDITY_GRID,
    n_jobs: int = 1,
) -> list[tuple[float, float]]:
    """Empirical CDF of the contour at the true structure, one row per level."""
    if results is None:
        results = run_replicates(config, n_jobs)
    return empirical_cdf(results.possibility, grid)


@dataclass(frozen=True, eq=False)
class FalseConfidenceReport:
    probabilities: np.ndarray
    design: np.ndarray
    cdf: list

    def exceedance(self, level: float) -> float:
        """Fraction of data sets whose posterior probability exceeds ``level``."""
        return float(np.mean(self.probabilities > level))


def false_confidence_experiment(
    n: int = 25,
    coeffs: Sequence[float] = (0.3, 0.1),
    variance: float = 1.0,
    datasets: int = 1000,
    posterior_draws: int = 10_000,
    seed: int = 0,
    threshold: float = -1.0,
    design: np.ndarray | None = None,
    grid: Sequence[float] | None = None,
) -> FalseConfidenceReport:
    """Sampling distribution of the posterior probability of ``{-phi0/phi1 > threshold}``.

    The single covariate is standard normal, drawn once from ``seed`` unless
    ``design`` is given, and held fixed across data sets.
    """
    phi0, phi1 = (float(c) for c in coeffs)
    if phi1 == 0:
        raise DomainError("slope must be nonzero")
    if not variance > 0:
        raise DomainError("variance must be positive")
    if design is None:
        design = _rng(seed, _DESIGN_STREAM).standard_normal(n)
    design = np.asarray(design, dtype=float).reshape(n, 1)
    probs = np.empty(datasets)
    for i in range(datasets):
        rng = _rng(seed, _REPLICATE_STREAM, i)
        y = phi0 + phi1 * design[:, 0] + np.sqrt(variance) * rng.standard_normal(n)
        draw_seed = np.random.SeedSequence(entropy=int(seed), spawn_key=(2, i))
        probs[i] = false_confidence_probability(Dataset(y, design), threshold, posterior_draws, draw_seed)
    if grid is None:
        grid = np.round(np.linspace(0.0, 1.0, 101), 2)
    return FalseConfidenceReport(probs, design, empirical_cdf(probs, grid))
