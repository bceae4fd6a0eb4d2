import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from catconv.errors import NumericalError
from catconv.special import (
    _continued_fraction_q,
    _series_p,
    chi_squared_sf,
    regularized_gamma_p,
    regularized_gamma_q,
)

A_GRID = [0.5 * k for k in range(1, 51)]  # 0.5, 1, ..., 25
X_GRID = [0.0, 0.01, 0.1, 0.5, 1, 2, 3, 5, 7.5, 10, 13, 17, 20, 25, 30, 40, 50, 65, 80, 100]


def quad_p(a, x):
    """P(a, x) by tanh-sinh quadrature of the gamma density at 40 digits."""
    with mpmath.workdps(40):
        a, x = mpmath.mpf(a), mpmath.mpf(x)
        if x == 0:
            return 0.0
        dens = lambda t: t ** (a - 1) * mpmath.exp(-t)
        # split at the mode to keep the integrand smooth on each piece
        mode = max(a - 1, 0)
        points = [0, x] if not 0 < mode < x else [0, mode, x]
        return float(mpmath.quad(dens, points) / mpmath.gamma(a))


def test_p_at_zero():
    assert regularized_gamma_p(3.0, 0.0) == 0.0
    assert chi_squared_sf(4, 0.0) == 1.0


def test_p_closed_form_shape_one():
    assert regularized_gamma_p(1.0, math.log(2)) == pytest.approx(0.5, abs=1e-15)
    for x in (0.1, 1.0, 2.5, 10.0, 40.0):
        assert regularized_gamma_p(1.0, x) == pytest.approx(-math.expm1(-x), abs=1e-14)


def test_p_half_shape_quadrature_value():
    oracle = quad_p(0.5, 1.9207)
    assert oracle == pytest.approx(0.95, abs=1e-4)
    assert regularized_gamma_p(0.5, 1.9207) == pytest.approx(oracle, abs=1e-12)


def test_sf_two_df_is_exponential():
    assert chi_squared_sf(2, 5.991465) == pytest.approx(0.05, abs=1e-6)
    for x in np.linspace(0, 50, 101):
        assert chi_squared_sf(2, x) == pytest.approx(math.exp(-x / 2), abs=1e-12)


def test_sf_one_df_matches_normal_tail():
    assert chi_squared_sf(1, 3.841459) == pytest.approx(0.05, abs=1e-6)
    for x in np.linspace(0, 50, 101):
        assert chi_squared_sf(1, x) == pytest.approx(math.erfc(math.sqrt(x / 2)), abs=1e-12)


@pytest.mark.parametrize("a", A_GRID[::7])
def test_against_quadrature(a):
    for x in X_GRID:
        assert abs(regularized_gamma_p(a, x) - quad_p(a, x)) <= 1e-9


@pytest.mark.parametrize("a", A_GRID)
def test_complementarity(a):
    for x in X_GRID:
        assert regularized_gamma_p(a, x) + regularized_gamma_q(a, x) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("a", [0.5, 2.0, 7.5, 25.0])
def test_series_and_continued_fraction_agree_near_switch(a):
    for x in (a + 0.5, a + 1.0, a + 2.0, a + 5.0):
        assert _series_p(a, x) + _continued_fraction_q(a, x) == pytest.approx(1.0, abs=1e-12)


@given(
    st.floats(0.5, 60),
    st.floats(0, 200, allow_nan=False),
    st.floats(0, 200, allow_nan=False),
)
def test_sf_monotone(df, x1, x2):
    lo, hi = sorted((x1, x2))
    assert chi_squared_sf(df, lo) >= chi_squared_sf(df, hi)


@pytest.mark.parametrize("a, x", [(0.0, 1.0), (-1.0, 1.0), (1.0, -0.5)])
def test_domain_errors(a, x):
    with pytest.raises(ValueError):
        regularized_gamma_p(a, x)


def test_non_convergence_is_an_error():
    # the series needs far more than the iteration cap for a huge shape
    with pytest.raises(NumericalError):
        regularized_gamma_p(1e7, 1e7)
