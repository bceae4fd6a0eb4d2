"""Regularized incomplete gamma function and the chi-squared tail.

The lower function uses its power series below ``x = a + 1`` and the
complement is evaluated by a modified-Lentz continued fraction above it,
following the classical split that keeps both expansions rapidly
convergent.
"""

import math

from .errors import NumericalError

__all__ = ["regularized_gamma_p", "regularized_gamma_q", "chi_squared_sf"]

MAX_ITER = 500
EPS = 1e-15
TINY = 1e-300


def _check(a, x):
    if not a > 0:
        raise ValueError(f"shape a must be positive, got {a}")
    if not x >= 0:
        raise ValueError(f"x must be nonnegative, got {x}")


def _log_prefactor(a, x):
    return a * math.log(x) - x - math.lgamma(a)


def _series_p(a, x):
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * EPS:
            return total * math.exp(_log_prefactor(a, x))
    raise NumericalError(f"incomplete gamma series did not converge for a={a}, x={x}")


def _continued_fraction_q(a, x):
    b = x + 1.0 - a
    c = 1.0 / TINY
    d = 1.0 / b
    h = d
    for i in range(1, MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < TINY:
            d = TINY
        c = b + an / c
        if abs(c) < TINY:
            c = TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            return math.exp(_log_prefactor(a, x)) * h
    raise NumericalError(f"incomplete gamma continued fraction did not converge for a={a}, x={x}")


def regularized_gamma_p(a: float, x: float) -> float:
    """Regularized lower incomplete gamma ``P(a, x)``."""
    _check(a, x)
    if x == 0:
        return 0.0
    if x < a + 1.0:
        return min(1.0, _series_p(a, x))
    return max(0.0, 1.0 - _continued_fraction_q(a, x))


def regularized_gamma_q(a: float, x: float) -> float:
    """Regularized upper incomplete gamma ``Q(a, x) = 1 - P(a, x)``."""
    _check(a, x)
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _series_p(a, x))
    return min(1.0, _continued_fraction_q(a, x))


def chi_squared_sf(df: float, x: float) -> float:
    """Upper tail probability of a chi-squared variable with ``df`` degrees of freedom."""
    if not df > 0:
        raise ValueError(f"degrees of freedom must be positive, got {df}")
    return regularized_gamma_q(df / 2.0, x / 2.0)
