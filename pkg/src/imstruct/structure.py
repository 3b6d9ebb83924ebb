"""Possibilistic uncertainty quantification for the active-variable set.

Structures are ranked by a penalized relative profile likelihood

    eta(y, s) = L_y(s) q(|s|) / max_r L_y(r) q(|r|),   L_y(s) = (rss_s / n)^(-n/2),

and calibrated against reference distributions of ``eta(Z, r)`` simulated
with ``Z`` standard normal.  The contour of ``s`` is the integral over
``w in [0, 1]`` of the largest reference probability
``P{eta(Z, r) <= eta(y, s)}`` among structures ``r`` with ``q(r) > w``.
Because ``q`` only takes finitely many values the integrand is a step
function and the integral is a finite weighted sum.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.special import ndtr

from .errors import DomainError, StaleTableError
from .linreg import Dataset, ModelStructure, SubsetProjector, fit_subset
from .possibility import Contour, extend, geometric_contour

log = logging.getLogger(__name__)

MAX_ENUMERATION_P = 20
TABLE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class PriorSpec:
    """Geometric prior contour on model complexity, ``q_K(k) = exp(-gamma |k - mode|)``.

    ``mode`` is 0 unless a best prior guess for the complexity is supplied
    (see :func:`imstruct.elicit.shifted_prior`).
    """

    gamma: float
    p: int
    mode: int = 0

    def __post_init__(self):
        if not np.isfinite(self.gamma) or self.gamma < 0:
            raise DomainError("gamma must be a finite nonnegative number")
        if self.p < 0:
            raise DomainError("p must be nonnegative")
        if not 0 <= self.mode <= self.p:
            raise DomainError("prior mode must lie in 0..p")

    def log_q(self, k) -> np.ndarray:
        return -self.gamma * np.abs(np.asarray(k, dtype=float) - self.mode)

    def q(self, k) -> np.ndarray:
        return np.exp(self.log_q(k))

    @property
    def values(self) -> np.ndarray:
        return self.q(np.arange(self.p + 1))

    def contour(self) -> Contour:
        if self.mode == 0:
            return geometric_contour(self.p, self.gamma)
        return Contour(tuple(range(self.p + 1)), self.values)


def _as_universe(universe, p) -> tuple:
    if universe is None:
        if p > MAX_ENUMERATION_P:
            raise DomainError(f"refusing to enumerate 2^{p} structures (limit p <= {MAX_ENUMERATION_P})")
        return tuple(ModelStructure(m) for m in range(1 << p))
    universe = tuple(universe)
    if not universe:
        raise DomainError("structure universe is empty")
    if len({s.mask for s in universe}) != len(universe):
        raise DomainError("structure universe has duplicates")
    return universe


def enumerate_structures(p: int, constraint: Iterable[Sequence[int]] | None = None) -> list[ModelStructure]:
    """All structures over ``p`` columns, optionally obeying marginality.

    ``constraint`` lists ``(interaction, parent_a, parent_b)`` column
    indices; a structure containing the interaction column must contain both
    parents.
    """
    if p < 0 or p > MAX_ENUMERATION_P:
        raise DomainError(f"p must lie in 0..{MAX_ENUMERATION_P} for enumeration")
    rules = []
    for rule in constraint or ():
        rule = tuple(rule)
        if len(rule) != 3:
            raise DomainError(f"interaction rule {rule!r} must be (interaction, parent_a, parent_b)")
        inter, a, b = (int(v) for v in rule)
        if not all(0 <= v < p for v in (inter, a, b)) or inter in (a, b) or a == b:
            raise DomainError(f"malformed interaction rule {rule!r} for p={p}")
        rules.append((1 << inter, (1 << a) | (1 << b)))
    masks = np.arange(1 << p, dtype=np.int64)
    keep = np.ones(masks.size, dtype=bool)
    for inter_bit, parents in rules:
        has_inter = (masks & inter_bit) != 0
        has_parents = (masks & parents) == parents
        keep &= ~has_inter | has_parents
    return [ModelStructure(int(m)) for m in masks[keep]]


def _log_scores(rss: np.ndarray, n: int, log_q: np.ndarray) -> np.ndarray:
    # -(n/2) log(rss) + log q; the n^(n/2) constant cancels in every ratio
    rss = np.asarray(rss, dtype=float)
    lq = log_q if rss.ndim == 1 else log_q[:, None]
    with np.errstate(divide="ignore"):
        return -0.5 * n * np.log(rss) + lq


def log_penalized_profile_likelihoods(data: Dataset, prior: PriorSpec, universe=None) -> tuple[tuple, np.ndarray]:
    """``log eta(y, s)`` for every structure in the universe."""
    universe = _as_universe(universe, data.p)
    projector = SubsetProjector(data.design, universe, data.names)
    scores = _log_scores(projector.rss(data.response), data.n, prior.log_q(projector.sizes))
    return universe, scores - scores.max()


def penalized_profile_likelihood(data: Dataset, s: ModelStructure, prior: PriorSpec, universe=None) -> float:
    """Relative penalized profile likelihood of ``s``, a value in (0, 1]."""
    universe, log_eta = log_penalized_profile_likelihoods(data, prior, universe)
    for i, r in enumerate(universe):
        if r.mask == s.mask:
            return float(np.exp(log_eta[i]))
    raise DomainError(f"structure {s} is not in the universe")


def _argmax_structure(universe: Sequence[ModelStructure], log_eta: np.ndarray) -> int:
    best = np.flatnonzero(log_eta == log_eta.max())
    return int(min(best, key=lambda i: (universe[i].complexity, universe[i].mask)))


def map_structure(data: Dataset, prior: PriorSpec, universe=None) -> ModelStructure:
    """Structure maximising ``L_y(s) q(s)``; ties go to the least complex, then lowest mask."""
    universe, log_eta = log_penalized_profile_likelihoods(data, prior, universe)
    return universe[_argmax_structure(universe, log_eta)]


def design_digest(design: np.ndarray) -> str:
    x = np.ascontiguousarray(design, dtype=np.float64)
    h = hashlib.sha256()
    h.update(repr(x.shape).encode())
    h.update(x.tobytes())
    return h.hexdigest()


def _universe_digest(masks: Sequence[int]) -> str:
    return hashlib.sha256(",".join(str(m) for m in masks).encode()).hexdigest()


@dataclass(frozen=True, eq=False)
class ReferenceTable:
    """Sorted Monte Carlo draws of ``log eta(Z, r)`` for every structure ``r``.

    Row ``i`` belongs to ``masks[i]``.  Values are stored on the log scale
    (all ``<= 0``); :attr:`values` gives ``eta`` itself.
    """

    log_values: np.ndarray
    masks: tuple
    B: int
    seed: int
    gamma: float
    mode: int
    n: int
    p: int
    design_digest: str
    _row: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lv = np.asarray(self.log_values, dtype=float)
        if lv.shape != (len(self.masks), self.B):
            raise DomainError(f"table shape {lv.shape} does not match {len(self.masks)} structures x B={self.B}")
        lv.setflags(write=False)
        object.__setattr__(self, "log_values", lv)
        object.__setattr__(self, "masks", tuple(int(m) for m in self.masks))
        object.__setattr__(self, "_row", {m: i for i, m in enumerate(self.masks)})

    @property
    def values(self) -> np.ndarray:
        return np.exp(self.log_values)

    def fingerprint(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "design_digest": self.design_digest,
            "gamma": float(self.gamma),
            "mode": self.mode,
            "universe_digest": _universe_digest(self.masks),
            "B": self.B,
            "seed": self.seed,
        }

    def row(self, s: ModelStructure) -> np.ndarray:
        return self.log_values[self._row[s.mask]]

    def check_compatible(self, design: np.ndarray, prior: PriorSpec, universe: Sequence[ModelStructure]):
        problems = []
        if design_digest(design) != self.design_digest:
            problems.append("design")
        if float(prior.gamma) != float(self.gamma) or prior.mode != self.mode:
            problems.append("prior")
        if tuple(s.mask for s in universe) != self.masks:
            problems.append("universe")
        if problems:
            raise StaleTableError(f"reference table does not match the current {', '.join(problems)}")

    def save(self, path) -> Path:
        path = Path(path)
        meta = dict(self.fingerprint(), format_version=TABLE_FORMAT_VERSION)
        with open(path, "wb") as fh:
            np.savez(
                fh,
                log_values=self.log_values,
                masks=np.asarray(self.masks, dtype=np.int64),
                meta=np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8),
            )
        return path

    @classmethod
    def load(cls, path) -> "ReferenceTable":
        with np.load(Path(path), allow_pickle=False) as z:
            meta = json.loads(z["meta"].tobytes().decode())
            if meta.get("format_version") != TABLE_FORMAT_VERSION:
                raise StaleTableError(f"unsupported reference table format {meta.get('format_version')!r}")
            table = cls(
                log_values=z["log_values"].copy(),
                masks=tuple(int(m) for m in z["masks"]),
                B=int(meta["B"]),
                seed=int(meta["seed"]),
                gamma=float(meta["gamma"]),
                mode=int(meta["mode"]),
                n=int(meta["n"]),
                p=int(meta["p"]),
                design_digest=meta["design_digest"],
            )
        if table.fingerprint()["universe_digest"] != meta["universe_digest"]:
            raise StaleTableError("reference table file is corrupt (universe digest mismatch)")
        return table


def _structure_seed(master_seed: int, mask: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(mask),))


def _simulate_row(projector: SubsetProjector, log_q: np.ndarray, i: int, B: int, seed, chunk: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    out = np.empty(B)
    for start in range(0, B, chunk):
        m = min(chunk, B - start)
        z = rng.standard_normal((projector.n, m))
        scores = _log_scores(projector.rss(z), projector.n, log_q)
        out[start:start + m] = scores[i] - scores.max(axis=0)
    out.sort()
    return out


def build_reference_table(
    design: np.ndarray,
    prior: PriorSpec,
    universe=None,
    B: int = 5000,
    master_seed: int = 0,
    n_jobs: int = 1,
    chunk: int = 2000,
) -> ReferenceTable:
    """Simulate the null law of ``eta(Z, r)`` for every structure ``r``.

    Each structure draws ``B`` standard normal response vectors from its own
    stream, seeded from ``(master_seed, mask)``, so the table does not depend
    on ``n_jobs`` or on the order of the universe.
    """
    if B < 1000:
        raise DomainError("B must be at least 1000")
    design = np.asarray(design, dtype=float)
    if design.ndim == 1:
        design = design[:, None]
    n, p = design.shape
    universe = _as_universe(universe, p)
    projector = SubsetProjector(design, universe)
    log_q = prior.log_q(projector.sizes)

    def work(i):
        return _simulate_row(projector, log_q, i, B, _structure_seed(master_seed, universe[i].mask), chunk)

    if n_jobs == 1:
        rows = [work(i) for i in range(len(universe))]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            rows = list(pool.map(work, range(len(universe))))
    return ReferenceTable(
        log_values=np.vstack(rows),
        masks=tuple(s.mask for s in universe),
        B=B,
        seed=int(master_seed),
        gamma=float(prior.gamma),
        mode=prior.mode,
        n=n,
        p=p,
        design_digest=design_digest(design),
    )


def cached_reference_table(
    design: np.ndarray,
    prior: PriorSpec,
    universe=None,
    B: int = 5000,
    master_seed: int = 0,
    cache_dir=None,
    n_jobs: int = 1,
) -> ReferenceTable:
    """:func:`build_reference_table`, memoised on disk by its fingerprint."""
    if cache_dir is None:
        return build_reference_table(design, prior, universe, B, master_seed, n_jobs)
    design = np.asarray(design, dtype=float)
    if design.ndim == 1:
        design = design[:, None]
    universe = _as_universe(universe, design.shape[1])
    key = {
        "n": design.shape[0],
        "p": design.shape[1],
        "design_digest": design_digest(design),
        "gamma": float(prior.gamma),
        "mode": prior.mode,
        "universe_digest": _universe_digest([s.mask for s in universe]),
        "B": int(B),
        "seed": int(master_seed),
    }
    name = hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()[:32]
    path = Path(cache_dir) / f"reftable-{name}.npz"
    if path.exists():
        table = ReferenceTable.load(path)
        if table.fingerprint() == key:
            log.debug("reference table cache hit %s", path)
            return table
    table = build_reference_table(design, prior, universe, B, master_seed, n_jobs)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(f".tmp{os.getpid()}")
    table.save(tmp)
    os.replace(tmp, path)
    return table


@dataclass(frozen=True, eq=False)
class StructureContour:
    """Possibility contour over an admissible set of structures."""

    structures: tuple
    values: np.ndarray
    argmax: ModelStructure
    p: int
    names: tuple = ()
    gamma: float = float("nan")

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "structures", tuple(self.structures))

    @property
    def universe_masks(self) -> tuple:
        return tuple(s.mask for s in self.structures)

    def __getitem__(self, s: ModelStructure) -> float:
        return self.as_contour()[s]

    def as_contour(self) -> Contour:
        return Contour(self.structures, self.values)

    def ranked(self) -> list[tuple[ModelStructure, float]]:
        order = sorted(range(len(self.structures)),
                       key=lambda i: (-self.values[i], self.structures[i].complexity, self.structures[i].mask))
        return [(self.structures[i], float(self.values[i])) for i in order]


def _reference_probabilities(table: ReferenceTable, log_eta_obs: np.ndarray) -> np.ndarray:
    # P-hat[r, s] = #{b: log eta(Z_b, r) <= log eta(y, s)} / B
    counts = np.empty((table.log_values.shape[0], log_eta_obs.size))
    for i, row in enumerate(table.log_values):
        counts[i] = np.searchsorted(row, log_eta_obs, side="right")
    return counts / table.B


def _step_integral(q_levels: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """Integrate ``w -> max_{r: q(r) > w} probs[r]`` over ``w`` in [0, 1].

    ``q_levels[r]`` is the prior contour value of structure ``r``.  Levels are
    normalised so the largest is 1.
    """
    q = q_levels / q_levels.max()
    levels = np.unique(q)[::-1]  # distinct, descending; equal levels merge
    widths = levels - np.append(levels[1:], 0.0)
    total = np.zeros(probs.shape[1])
    running = np.zeros(probs.shape[1])
    for level, width in zip(levels, widths):
        running = np.maximum(running, probs[q >= level].max(axis=0))
        total += width * running
    return total


def structure_contour(data: Dataset, prior: PriorSpec, table: ReferenceTable, universe=None) -> StructureContour:
    """Possibility contour ``s -> pi_y(s)`` for every structure in the universe."""
    universe = _as_universe(universe, data.p)
    table.check_compatible(data.design, prior, universe)
    _, log_eta = log_penalized_profile_likelihoods(data, prior, universe)
    probs = _reference_probabilities(table, log_eta)
    sizes = np.array([s.complexity for s in universe])
    values = np.clip(_step_integral(prior.q(sizes), probs), 0.0, 1.0)
    best = _argmax_structure(universe, log_eta)
    values[best] = 1.0
    return StructureContour(universe, values, universe[best], data.p, data.names, float(prior.gamma))


def marginal_complexity_contour(sc: StructureContour) -> Contour:
    """Contour for the complexity ``|S|``: the largest structure contour value per size."""
    by_size = extend(sc.as_contour(), lambda s: s.complexity)
    ks = sorted(by_size.domain)
    return Contour(tuple(ks), [by_size[k] for k in ks])


def confidence_set(sc: StructureContour, alpha: float) -> list[tuple[ModelStructure, float]]:
    """Structures with possibility strictly above ``alpha``, most plausible first."""
    if not 0.0 <= alpha < 1.0:
        raise DomainError("alpha must lie in [0, 1)")
    return [(s, v) for s, v in sc.ranked() if v > alpha]


def event_a_correction(
    design: np.ndarray,
    s: ModelStructure,
    phi_s: Sequence[float],
    lam: float,
    universe=None,
) -> float:
    """Bound on the probability that simulating from ``(s, phi_s, lam)`` rather
    than from pure noise changes the comparison for some structure.

    Returns ``sum_{r != s} Phi(-||(I - H_r) x_s phi_s|| / (2 sqrt(lam)))`` where
    ``phi_s`` holds the intercept followed by the coefficients of ``s``'s
    columns.  Small values mean the noise-only reference law is conservative
    for this parameter.
    """
    if not lam > 0:
        raise DomainError("variance must be positive")
    design = np.asarray(design, dtype=float)
    if design.ndim == 1:
        design = design[:, None]
    n, p = design.shape
    universe = _as_universe(universe, p)
    phi_s = np.asarray(phi_s, dtype=float)
    idx = s.indices()
    if phi_s.shape != (len(idx) + 1,):
        raise DomainError(f"phi_s must hold an intercept plus {len(idx)} coefficients")
    mean = phi_s[0] + design[:, idx] @ phi_s[1:]
    total = 0.0
    for r in universe:
        if r.mask == s.mask:
            continue
        fit = fit_subset(Dataset(mean, design), r)
        total += float(ndtr(-np.sqrt(fit.rss) / (2.0 * np.sqrt(lam))))
    return total
