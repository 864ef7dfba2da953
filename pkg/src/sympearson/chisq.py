"""Normal and (noncentral) chi-square distribution functions."""

from __future__ import annotations

import math

import numpy as np
from scipy import optimize
from scipy.special import erfc, gammainc, gammaincc, gammaln, pdtr, pdtrc

from .errors import InvalidArgumentError

SQRT2 = math.sqrt(2.0)
POISSON_TAIL = 1e-12


def norm_cdf(x):
    return 0.5 * erfc(-np.asarray(x, dtype=float) / SQRT2)


def norm_sf(x):
    return 0.5 * erfc(np.asarray(x, dtype=float) / SQRT2)


def norm_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def chi2_cdf(x: float, df: float) -> float:
    if x <= 0:
        return 0.0
    return float(gammainc(0.5 * df, 0.5 * x))


def chi2_sf(x: float, df: float) -> float:
    if x <= 0:
        return 1.0
    return float(gammaincc(0.5 * df, 0.5 * x))


def _poisson_window(mu: float) -> tuple[int, int]:
    """Index range holding all but ``POISSON_TAIL`` of the Poisson(mu) mass."""
    mode = int(math.floor(mu))
    width = int(10 + 10 * math.sqrt(mu))
    while True:
        lo, hi = max(0, mode - width), mode + width
        tail = (pdtr(lo - 1, mu) if lo > 0 else 0.0) + pdtrc(hi, mu)
        if tail < POISSON_TAIL:
            return lo, hi
        width *= 2


def _poisson_mixture(x: float, df: float, lambda2: float, upper: bool) -> float:
    mu = 0.5 * lambda2
    if mu == 0.0:  # subnormal lambda2
        return (chi2_sf if upper else chi2_cdf)(x, df)
    lo, hi = _poisson_window(mu)
    i = np.arange(lo, hi + 1, dtype=float)
    w = np.exp(-mu + i * math.log(mu) - gammaln(i + 1.0))
    terms = (gammaincc if upper else gammainc)(0.5 * df + i, 0.5 * x)
    return float(min(1.0, math.fsum(w * terms)))


def noncentral_chi2_cdf(x: float, df: float, lambda2: float) -> float:
    """CDF of the chi-square law with ``df`` degrees of freedom and noncentrality ``lambda2``.

    Poisson mixture ``sum_i Pois(i; lambda2/2) * F_central(x; df + 2i)``,
    truncated once the neglected Poisson mass is below 1e-12. At
    ``lambda2 == 0`` this is exactly the central CDF.
    """
    if df < 1:
        raise InvalidArgumentError(f"df must be at least 1, got {df}")
    if lambda2 < 0:
        raise InvalidArgumentError(f"noncentrality must be nonnegative, got {lambda2}")
    if x <= 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if lambda2 == 0:
        return chi2_cdf(x, df)
    return _poisson_mixture(x, df, lambda2, upper=False)


def noncentral_chi2_sf(x: float, df: float, lambda2: float) -> float:
    """Upper tail ``1 - F(x; df, lambda2)`` summed directly for accuracy near 0."""
    if df < 1:
        raise InvalidArgumentError(f"df must be at least 1, got {df}")
    if lambda2 < 0:
        raise InvalidArgumentError(f"noncentrality must be nonnegative, got {lambda2}")
    if x <= 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if lambda2 == 0:
        return chi2_sf(x, df)
    return _poisson_mixture(x, df, lambda2, upper=True)


def chi2_quantile(prob: float, df: float) -> float:
    """Inverse of the central chi-square CDF, by bracketing and Brent's method."""
    if not 0 < prob < 1:
        raise InvalidArgumentError(f"probability must lie in (0, 1), got {prob}")
    hi = max(1.0, float(df))
    while chi2_cdf(hi, df) < prob:
        hi *= 2.0
    return optimize.brentq(lambda x: chi2_cdf(x, df) - prob, 0.0, hi, xtol=1e-13, rtol=1e-14, maxiter=500)
