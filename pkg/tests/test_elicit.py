import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from imstruct.errors import DomainError
from imstruct.elicit import shifted_prior, solve_gamma, upper_mean, upper_mean_curve


def gamma_from_roots(p, target):
    """Oracle: the upper mean is r + r^2 + ... + r^p with r = exp(-gamma); solve the polynomial."""
    roots = np.roots([1.0] * p + [-target])
    r = [z.real for z in roots if abs(z.imag) < 1e-12 and 0 < z.real < 1][0]
    return -np.log(r)


def test_upper_mean_geometric_sum():
    assert upper_mean(3, 1.0) == pytest.approx(np.exp(-1) + np.exp(-2) + np.exp(-3), abs=1e-15)


@pytest.mark.parametrize("p,target,expected", [
    (3, 2 / 3, 0.8713541949893207),
    (3, 0.6667, 0.8713204641424749),
    (8, 0.25, 1.6094358643984483),
])
def test_solve_gamma_frozen(p, target, expected):
    assert solve_gamma(p, target) == pytest.approx(expected, abs=1e-9)


@given(st.integers(1, 12), st.floats(0.01, 0.99))
def test_solve_gamma_matches_roots(p, frac):
    target = frac * p
    assert solve_gamma(p, target) == pytest.approx(gamma_from_roots(p, target), abs=1e-7)


def test_upper_mean_decreasing_in_gamma():
    curve = upper_mean_curve(5, np.linspace(0.05, 5, 100))
    means = [m for _, m in curve]
    assert all(a > b for a, b in zip(means, means[1:]))


def test_target_out_of_range():
    with pytest.raises(DomainError):
        solve_gamma(3, 3.0)
    with pytest.raises(DomainError):
        solve_gamma(3, 0.0)


def test_gamma_must_be_positive():
    with pytest.raises(DomainError):
        upper_mean(3, 0.0)


def test_shifted_prior_is_opt_in():
    with pytest.raises(DomainError):
        shifted_prior(4, 1.0, 2)
    prior = shifted_prior(4, 1.0, 2, enable=True)
    np.testing.assert_allclose(prior.values, np.exp(-np.abs(np.arange(5) - 2)))
