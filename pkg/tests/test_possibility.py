import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, optimize, stats
from scipy.optimize import linprog

from imstruct.errors import DomainError
from imstruct.possibility import (
    Contour,
    MassFunction,
    extend,
    geometric_contour,
    grid_contour,
    most_diffuse,
    possibility_of,
    prob_to_poss,
    upper_expectation_monotone,
)


def binom_pmf(size, prob):
    return [math.comb(size, k) * prob**k * (1 - prob) ** (size - k) for k in range(size + 1)]


def enumerate_transform(masses):
    """Oracle: pi(x) = sum of f(k) over atoms k with f(k) <= f(x), by double loop."""
    total = sum(masses)
    return [sum(m for m in masses if m <= fx) / total for fx in masses]


# frozen from enumerate_transform(binom_pmf(6, 0.2))
BINOM_6_02 = [0.606784, 1.0, 0.34464, 0.09888, 0.01696, 0.0016, 0.000064]


mass_vectors = st.lists(st.integers(min_value=0, max_value=20), min_size=1, max_size=8).filter(
    lambda v: sum(v) > 0
)


def as_mass(weights):
    w = np.asarray(weights, dtype=float)
    return MassFunction(tuple(range(w.size)), w / w.sum())


class TestContour:
    def test_requires_unit_maximum(self):
        with pytest.raises(DomainError):
            Contour(("a", "b"), [0.5, 0.9])

    def test_rejects_out_of_range(self):
        with pytest.raises(DomainError):
            Contour(("a", "b"), [1.0, 1.2])
        with pytest.raises(DomainError):
            Contour(("a", "b"), [1.0, -0.1])

    def test_rejects_repeated_domain(self):
        with pytest.raises(DomainError):
            Contour(("a", "a"), [1.0, 0.2])

    def test_lookup_and_mode(self):
        c = Contour(("a", "b", "c"), [0.3, 1.0, 0.2])
        assert c["a"] == 0.3
        assert c.mode() == "b"
        with pytest.raises(DomainError):
            c["z"]

    def test_possibility_is_sup(self):
        c = Contour(("a", "b", "c"), [0.3, 1.0, 0.2])
        assert possibility_of(c, ["a", "c"]) == 0.3
        assert possibility_of(c, ["a", "b"]) == 1.0
        with pytest.raises(DomainError):
            possibility_of(c, [])


class TestProbToPoss:
    def test_binomial_by_enumeration(self):
        pmf = binom_pmf(6, 0.2)
        c = prob_to_poss(MassFunction(tuple(range(7)), pmf))
        np.testing.assert_allclose(c.values, enumerate_transform(pmf), rtol=0, atol=1e-14)
        np.testing.assert_allclose(c.values, BINOM_6_02, rtol=1e-12, atol=0)
        assert c[1] == 1.0
        assert c[6] == pytest.approx(0.2**6, rel=1e-12)

    def test_ties_count_fully(self):
        c = prob_to_poss(MassFunction(("a", "b", "c"), [0.25, 0.25, 0.5]))
        assert c["a"] == c["b"] == 0.5
        assert c["c"] == 1.0

    def test_uniform_is_flat(self):
        c = prob_to_poss(MassFunction(tuple(range(5)), [0.2] * 5))
        assert np.all(c.values == 1.0)

    @given(mass_vectors)
    def test_matches_enumeration(self, weights):
        f = as_mass(weights)
        c = prob_to_poss(f)
        np.testing.assert_allclose(c.values, enumerate_transform(f.masses.tolist()), atol=1e-12)
        assert c.values.max() == 1.0

    @given(mass_vectors)
    def test_p_value_dominance(self, weights):
        # P{pi(T) <= alpha} <= alpha for every alpha, by exact enumeration over T ~ f
        f = as_mass(weights)
        c = prob_to_poss(f)
        for alpha in np.unique(np.append(c.values, np.linspace(0, 1, 21))):
            prob = sum(m for m, v in zip(f.masses, c.values) if v <= alpha)
            assert prob <= alpha + 1e-12

    @given(mass_vectors)
    def test_dominates_generating_mass(self, weights):
        f = as_mass(weights)
        c = prob_to_poss(f)
        atoms = list(f.domain)
        for r in range(1, len(atoms) + 1):
            for subset in itertools.combinations(atoms, r):
                assert sum(f[a] for a in subset) <= possibility_of(c, subset) + 1e-12


def gamma21_contour_oracle(t):
    """P{f(T) <= f(t)} for T ~ Gamma(2, 1) with f(u) = u exp(-u), by quadrature."""
    f = lambda u: u * np.exp(-u)
    level = f(t)
    if t == 1.0:
        return 1.0
    lo = optimize.brentq(lambda u: f(u) - level, 1e-300, 1.0) if level > 0 else 0.0
    hi = optimize.brentq(lambda u: f(u) - level, 1.0, 200.0)
    left, _ = integrate.quad(f, 0.0, lo)
    right, _ = integrate.quad(f, hi, np.inf)
    return left + right


class TestGridContour:
    def test_gamma_against_quadrature(self):
        grid = np.round(np.arange(0, 10.0001, 0.01), 10)
        c = grid_contour(lambda t: stats.gamma.pdf(t, 2.0), grid)
        assert c.mode() == 1.0
        for t in [0.1, 0.5, 0.8, 1.5, 2.0, 3.0, 5.0, 8.0]:
            assert c[t] == pytest.approx(gamma21_contour_oracle(t), abs=0.01)

    def test_rejects_bad_density(self):
        with pytest.raises(DomainError):
            grid_contour(lambda t: -np.ones_like(t), [0.0, 1.0])


class TestExtension:
    def test_max_over_preimages(self):
        c = Contour((0, 1, 2, 3), [0.2, 1.0, 0.6, 0.4])
        parity = extend(c, lambda k: k % 2)
        assert parity[0] == 0.6
        assert parity[1] == 1.0

    def test_mapping_argument(self):
        c = Contour(("a", "b"), [1.0, 0.5])
        assert extend(c, {"a": "x", "b": "x"}).as_dict() == {"x": 1.0}

    @given(
        st.lists(st.floats(0, 1), min_size=1, max_size=12),
        st.integers(1, 5),
        st.integers(1, 4),
    )
    def test_composition_law(self, raw, m1, m2):
        values = np.array(raw)
        values[int(np.argmax(values))] = 1.0
        c = Contour(tuple(range(values.size)), values)
        g = lambda x: x % m1
        h = lambda y: (y * 7) % m2
        two_step = extend(extend(c, g), h)
        one_step = extend(c, lambda x: h(g(x)))
        assert two_step.as_dict() == one_step.as_dict()


def credal_upper_mean_lp(q):
    """Oracle: max E[K] over all P on {0..p} with P(A) <= max_A q for every event A."""
    p = len(q) - 1
    a_ub, b_ub = [], []
    for r in range(1, p + 1):
        for subset in itertools.combinations(range(p + 1), r):
            row = np.zeros(p + 1)
            row[list(subset)] = 1.0
            a_ub.append(row)
            b_ub.append(max(q[k] for k in subset))
    res = linprog(-np.arange(p + 1.0), A_ub=np.array(a_ub), b_ub=b_ub,
                  A_eq=np.ones((1, p + 1)), b_eq=[1.0], bounds=[(0, 1)] * (p + 1), method="highs")
    assert res.success
    return -res.fun


class TestChoquet:
    def test_closed_form_gamma_one(self):
        # e^-1 + e^-2 + e^-3
        assert upper_expectation_monotone(geometric_contour(3, 1.0)) == pytest.approx(0.5530017928, abs=1e-9)

    @pytest.mark.parametrize("p,gamma", [(1, 0.3), (3, 1.0), (4, 0.5), (5, 2.0)])
    def test_against_linear_program(self, p, gamma):
        q = geometric_contour(p, gamma)
        assert upper_expectation_monotone(q) == pytest.approx(credal_upper_mean_lp(q.values), abs=1e-8)

    @given(st.lists(st.floats(0, 1), min_size=1, max_size=10))
    def test_most_diffuse_identity(self, raw):
        tail = sorted(raw, reverse=True)
        q = Contour(tuple(range(len(tail) + 1)), [1.0] + tail)
        md = most_diffuse(q)
        assert md.masses.sum() == pytest.approx(1.0, abs=1e-12)
        assert abs(md.mean() - upper_expectation_monotone(q)) <= 1e-12
        # tail probabilities reproduce the contour
        tails = np.cumsum(md.masses[::-1])[::-1]
        np.testing.assert_allclose(tails, q.values, atol=1e-12)

    def test_rejects_nonmonotone(self):
        with pytest.raises(DomainError):
            upper_expectation_monotone(Contour((0, 1, 2), [1.0, 0.2, 0.5]))

    def test_mass_function_sum(self):
        with pytest.raises(DomainError):
            MassFunction((0, 1), [0.5, 0.6])
