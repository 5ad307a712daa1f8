"""Closed-form special functions used for the Fock weights.

Gamma and log-gamma come from :mod:`math`. The lower incomplete gamma
function is evaluated with the usual split: power series below the turning
point ``x < a + 1``, modified-Lentz continued fraction for the upper
function above it.
"""

import math

_EPS = 1e-16
_TINY = 1e-300
_MAX_TERMS = 10_000


def gamma(a: float) -> float:
    return math.gamma(a)


def log_gamma(a: float) -> float:
    return math.lgamma(a)


def log_beta(a: float, b: float) -> float:
    if a <= 0 or b <= 0:
        raise ValueError(f"beta function needs positive arguments, got ({a}, {b})")
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def beta(a: float, b: float) -> float:
    if a <= 0 or b <= 0:
        raise ValueError(f"beta function needs positive arguments, got ({a}, {b})")
    if a + b < 171:
        return math.gamma(a) * math.gamma(b) / math.gamma(a + b)
    return math.exp(log_beta(a, b))


def _lower_series(a: float, x: float) -> float:
    """gamma(a, x) * exp(x) * x**-a as a power series (x < a + 1)."""
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_TERMS):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total
    raise ArithmeticError(f"incomplete gamma series did not converge (a={a}, x={x})")


def _upper_cf(a: float, x: float) -> float:
    """Gamma(a, x) * exp(x) * x**-a by continued fraction (x >= a + 1)."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_TERMS):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete gamma continued fraction did not converge (a={a}, x={x})")


def lower_incomplete_gamma(a: float, x: float) -> float:
    """Unregularized lower incomplete gamma ``int_0^x t**(a-1) exp(-t) dt``."""
    if a <= 0:
        raise ValueError(f"a must be positive, got {a}")
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x}")
    if x == 0:
        return 0.0
    log_prefactor = a * math.log(x) - x
    if x < a + 1.0:
        return math.exp(log_prefactor) * _lower_series(a, x)
    upper = math.exp(log_prefactor) * _upper_cf(a, x)
    return math.gamma(a) - upper


def regularized_lower_gamma(a: float, x: float) -> float:
    """P(a, x) = gamma(a, x) / Gamma(a)."""
    if x == 0:
        return 0.0
    log_prefactor = a * math.log(x) - x - math.lgamma(a)
    if x < a + 1.0:
        return math.exp(log_prefactor) * _lower_series(a, x)
    return 1.0 - math.exp(log_prefactor) * _upper_cf(a, x)
