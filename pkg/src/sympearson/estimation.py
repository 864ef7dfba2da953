"""Estimation of the mean and AR coefficients, and residual computation.

The mean is estimated first; the coefficients are then fitted to the
centered series ``u_hat_t = y_t - mu_hat``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateScaleError, InvalidArgumentError, SingularDesignError
from .timeseries import SeriesSample

MAD_TO_SIGMA = 0.6745
SCALE_FLOOR = 1e-12


@dataclass(frozen=True)
class LeastSquares:
    name = "ls"

    def to_dict(self) -> dict:
        return {"estimator": "ls"}


@dataclass(frozen=True)
class HuberM:
    k: float = 1.345
    tol: float = 1e-10
    max_iter: int = 200
    name = "huber"

    def __post_init__(self):
        if not self.k > 0:
            raise InvalidArgumentError(f"Huber tuning constant must be positive, got {self.k}")

    def to_dict(self) -> dict:
        return {"estimator": "huber", "k": self.k}


EstimatorChoice = LeastSquares | HuberM


def estimator_from_name(name: str, k: float = 1.345) -> EstimatorChoice:
    name = name.lower()
    if name in ("ls", "leastsquares", "least_squares"):
        return LeastSquares()
    if name in ("huber", "huberm", "huber_m"):
        return HuberM(k)
    raise InvalidArgumentError(f"unknown estimator {name!r} (expected 'huber' or 'ls')")


@dataclass(frozen=True, eq=False)
class ResidualSet:
    residuals: np.ndarray
    mu_hat: float
    beta_hat: np.ndarray

    @property
    def n(self) -> int:
        return self.residuals.size

    def mad_scale(self) -> float:
        return mad_scale(self.residuals)


def mad_scale(x: np.ndarray) -> float:
    """Normal-consistent MAD about the median."""
    x = np.asarray(x, dtype=float)
    return float(np.median(np.abs(x - np.median(x)))) / MAD_TO_SIGMA


def huber_weights(r: np.ndarray, k: float) -> np.ndarray:
    a = np.abs(r)
    w = np.ones_like(a)
    big = a > k
    w[big] = k / a[big]
    return w


def estimate_mu(y: SeriesSample, choice: EstimatorChoice = HuberM()) -> float:
    """Location estimate from the sample part ``y_1, ..., y_n``.

    Huber's estimate uses the fixed scale MAD/0.6745 and the iteration
    ``mu <- mu + s * mean(psi((y - mu) / s))`` started at the median.
    """
    obs = y.y[y.p:]
    if isinstance(choice, LeastSquares):
        return float(np.mean(obs))
    s = mad_scale(obs)
    if s <= 0:
        raise DegenerateScaleError("MAD of the series is zero; Huber location is undefined")
    mu = float(np.median(obs))
    k = choice.k
    for _ in range(choice.max_iter * 5):
        step = s * float(np.mean(np.clip((obs - mu) / s, -k, k)))
        mu += step
        if abs(step) < choice.tol * max(1.0, abs(mu)):
            break
    return mu


def _lag_design(u: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    n = u.size - p
    X = np.column_stack([u[p - j : p - j + n] for j in range(1, p + 1)])
    return X, u[p:]


def _solve_normal_equations(X: np.ndarray, target: np.ndarray, w: np.ndarray | None = None) -> np.ndarray:
    Xw = X if w is None else X * w[:, None]
    gram = Xw.T @ X
    rhs = Xw.T @ target
    if not np.all(np.isfinite(gram)) or np.linalg.cond(gram) > 1e12:
        raise SingularDesignError("lagged design matrix is singular")
    return np.linalg.solve(gram, rhs)


def estimate_beta(y: SeriesSample, mu_hat: float, choice: EstimatorChoice = HuberM()) -> np.ndarray:
    """AR coefficients fitted to ``y - mu_hat``.

    Huber fitting is iteratively reweighted least squares started from the
    LS fit, with the residual scale re-estimated by MAD each sweep.
    """
    p = y.p
    if p == 0:
        return np.zeros(0)
    X, target = _lag_design(y.y - mu_hat, p)
    beta = _solve_normal_equations(X, target)
    if isinstance(choice, LeastSquares):
        return beta
    for _ in range(choice.max_iter):
        r = target - X @ beta
        s = max(mad_scale(r), SCALE_FLOOR)
        new = _solve_normal_equations(X, target, huber_weights(r / s, choice.k))
        done = np.max(np.abs(new - beta)) < choice.tol
        beta = new
        if done:
            break
    return beta


def residuals(y: SeriesSample, mu_hat: float, beta_hat) -> ResidualSet:
    """``eps_hat_t = u_hat_t - sum_j beta_hat_j u_hat_{t-j}`` for ``t = 1..n``."""
    beta_hat = np.asarray(beta_hat, dtype=float).ravel()
    if beta_hat.size != y.p:
        raise InvalidArgumentError(f"expected {y.p} coefficients, got {beta_hat.size}")
    u = y.y - mu_hat
    eps = u[y.p:].copy()
    for j, b in enumerate(beta_hat, start=1):
        eps -= b * u[y.p - j : y.p - j + y.n]
    return ResidualSet(eps, float(mu_hat), beta_hat)


def fit(y: SeriesSample, choice: EstimatorChoice = HuberM()) -> ResidualSet:
    mu_hat = estimate_mu(y, choice)
    return residuals(y, mu_hat, estimate_beta(y, mu_hat, choice))
