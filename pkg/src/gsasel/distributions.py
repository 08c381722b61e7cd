"""Distribution functions used by the specification tests.

Only survival functions are provided; quantiles are never needed by the
selection algorithms.  The regularized incomplete gamma and beta functions
are evaluated by power series / modified-Lentz continued fractions, switching
at the usual mean-based threshold so both branches stay well conditioned.
"""

import math

__all__ = [
    "normal_cdf",
    "chi2_sf",
    "f_sf",
    "t_sf_two_sided",
    "gammainc_lower",
    "gammainc_upper",
    "betainc",
]

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 20000


def _check_finite(x, name="x"):
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"{name} must be finite, got {x!r}")
    return x


def _clip_p(p):
    if p < 0.0:
        return 0.0
    if p > 1.0:
        return 1.0
    return p


def normal_cdf(x):
    """Standard normal CDF, Phi(x)."""
    x = _check_finite(x)
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _gamma_series(a, x):
    # P(a, x) by its power series; converges quickly for x < a + 1
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cfrac(a, x):
    # Q(a, x) by Legendre's continued fraction (modified Lentz)
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
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
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gammainc_lower(a, x):
    """Regularized lower incomplete gamma P(a, x)."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0:
        return 0.0
    if x < a + 1.0:
        return _clip_p(_gamma_series(a, x))
    return _clip_p(1.0 - _gamma_cfrac(a, x))


def gammainc_upper(a, x):
    """Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x)."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return _clip_p(1.0 - _gamma_series(a, x))
    return _clip_p(_gamma_cfrac(a, x))


def _beta_cfrac(a, b, x):
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h


def betainc(a, b, x):
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return _clip_p(front * _beta_cfrac(a, b, x) / a)
    return _clip_p(1.0 - front * _beta_cfrac(b, a, 1.0 - x) / b)


def _check_df(k, name):
    if isinstance(k, float) and k.is_integer():
        k = int(k)
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise ValueError(f"{name} must be an integer >= 1, got {k!r}")
    return k


def chi2_sf(x, k):
    """Survival function of the chi-square distribution with k degrees of freedom."""
    x = _check_finite(x)
    k = _check_df(k, "k")
    if x < 0:
        raise ValueError(f"chi-square statistic must be >= 0, got {x}")
    return gammainc_upper(0.5 * k, 0.5 * x)


def f_sf(x, d1, d2):
    """Survival function of Fisher's F(d1, d2)."""
    x = _check_finite(x)
    d1 = _check_df(d1, "d1")
    d2 = _check_df(d2, "d2")
    if x < 0:
        raise ValueError(f"F statistic must be >= 0, got {x}")
    if x == 0:
        return 1.0
    return betainc(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * x))


def t_sf_two_sided(t, df):
    """Two-sided p-value of a t statistic, P(|T_df| >= |t|)."""
    t = _check_finite(t, "t")
    return f_sf(t * t, 1, df)
