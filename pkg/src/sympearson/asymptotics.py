"""Limiting behaviour of the symmetrized test under local contamination.

An outlier ``xi`` at time ``t - j`` moves the residual at time ``t`` by
``-beta_j xi`` (with ``beta_0 = -1``), which shifts the residual e.d.f. by

    Delta(x) = sum_{j=0..p} [E G(x + beta_j xi) - G(x)],   G(x) = Phi(x / theta0).

The symmetrized shift ``Delta_S(x) = (Delta(x) - Delta(-x)) / 2`` gives the
cell drift ``delta_j = 2[Delta_S(x_j) - Delta_S(x_{j-1})]``; its component
orthogonal to the scale direction sets the noncentrality of the limiting
chi-square law on ``m - 2`` degrees of freedom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chisq import chi2_quantile, noncentral_chi2_cdf, noncentral_chi2_sf, norm_cdf
from .edf import Partition
from .errors import InvalidArgumentError, PrecisionError
from .laws import OutlierLaw
from .pearson import CellModel

TAIL_TOL = 1e-10
MAX_CUTOFF = 1e15

__all__ = [
    "ShiftContext",
    "NoncentralitySpec",
    "shift_delta",
    "shift_delta_sym",
    "cell_shift_vector",
    "noncentrality_spec",
    "noncentrality",
    "noncentral_chi2_cdf",
    "chi2_quantile",
    "asymptotic_level",
]


@dataclass(frozen=True)
class ShiftContext:
    beta: tuple[float, ...]
    theta0: float
    pi: OutlierLaw

    def __post_init__(self):
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        if not self.theta0 > 0:
            raise InvalidArgumentError(f"theta0 must be positive, got {self.theta0}")

    @property
    def lag_coefficients(self) -> tuple[float, ...]:
        """``(beta_0, beta_1, ..., beta_p)`` with ``beta_0 = -1``."""
        return (-1.0,) + self.beta

    def G(self, x: float) -> float:
        return float(norm_cdf(x / self.theta0))


def shift_delta(x: float, ctx: ShiftContext) -> float:
    g = ctx.G(x)
    total = 0.0
    for b in ctx.lag_coefficients:
        if b == 0.0:
            continue
        # G(x + b*xi) changes fastest where x + b*xi = 0
        eg = ctx.pi.expect(lambda xi, b=b: ctx.G(x + b * xi), breakpoints=(-x / b,))
        total += eg - g
    return total


def shift_delta_sym(x: float, ctx: ShiftContext) -> float:
    if x == 0:
        return 0.0
    return 0.5 * (shift_delta(x, ctx) - shift_delta(-x, ctx))


def tail_cutoff(ctx: ShiftContext) -> float:
    """A point beyond which ``|Delta_S|`` is below 1e-10.

    Starts at ``8 theta0`` plus the largest outlier displacement and doubles.
    """
    bound = max(abs(b) for b in ctx.lag_coefficients) * ctx.pi.spread
    x = 8.0 * ctx.theta0 + bound
    while True:
        val = abs(shift_delta_sym(x, ctx))
        if val < TAIL_TOL:
            return x
        if x > MAX_CUTOFF:
            raise PrecisionError("symmetrized shift does not vanish in the tail", val)
        x *= 2.0


def cell_shift_vector(part: Partition, ctx: ShiftContext) -> np.ndarray:
    """``delta_j = 2[Delta_S(x_j) - Delta_S(x_{j-1})]``; ``Delta_S(0) = Delta_S(inf) = 0``."""
    tail_cutoff(ctx)
    ds = np.array([0.0] + [shift_delta_sym(x, ctx) for x in part.interior] + [0.0])
    return 2.0 * np.diff(ds)


@dataclass(frozen=True, eq=False)
class NoncentralitySpec:
    p_vec: np.ndarray
    p_prime: np.ndarray
    delta: np.ndarray
    b: np.ndarray = field(init=False)
    alpha_vec: np.ndarray = field(init=False)

    def __post_init__(self):
        b = self.p_prime / np.sqrt(self.p_vec)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "alpha_vec", b / np.linalg.norm(b))

    @property
    def P(self) -> np.ndarray:
        return np.diag(self.p_vec)

    @property
    def projection(self) -> np.ndarray:
        """``E_m - alpha alpha^T``."""
        return np.eye(self.p_vec.size) - np.outer(self.alpha_vec, self.alpha_vec)

    @property
    def projected_shift(self) -> np.ndarray:
        return self.projection @ (self.delta / np.sqrt(self.p_vec))

    @property
    def unit_lambda2(self) -> float:
        """Noncentrality at ``gamma = 1``."""
        v = self.projected_shift
        return float(v @ v)

    def lambda2(self, gamma: float) -> float:
        if gamma < 0:
            raise InvalidArgumentError(f"gamma must be nonnegative, got {gamma}")
        return gamma * gamma * self.unit_lambda2


def noncentrality_spec(part: Partition, ctx: ShiftContext, delta: np.ndarray | None = None) -> NoncentralitySpec:
    model = CellModel(part)
    if delta is None:
        delta = cell_shift_vector(part, ctx)
    return NoncentralitySpec(model.p(ctx.theta0), model.p_prime(ctx.theta0), np.asarray(delta, dtype=float))


def noncentrality(gamma: float, part: Partition, ctx: ShiftContext) -> float:
    """``gamma^2 |(E_m - alpha alpha^T) P^{-1/2} delta|^2`` at the true scale."""
    if gamma == 0:
        return 0.0
    return noncentrality_spec(part, ctx).lambda2(gamma)


def level_from_lambda2(lambda2: float, alpha: float, df: int) -> float:
    if not 0 < alpha < 1:
        raise InvalidArgumentError(f"alpha must lie in (0, 1), got {alpha}")
    return noncentral_chi2_sf(chi2_quantile(1.0 - alpha, df), df, lambda2)


def asymptotic_level(gamma: float, alpha: float, part: Partition, ctx: ShiftContext) -> float:
    """``1 - F_{m-2}(chi2_{m-2}(1 - alpha), lambda2(gamma))``."""
    return level_from_lambda2(noncentrality(gamma, part, ctx), alpha, part.m - 2)
