"""Residual empirical d.f., its symmetrization, and symmetric cell counts."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import ndtri

from .errors import InvalidArgumentError


class Edf:
    """Right-continuous empirical d.f. ``G_n(x) = #{e_t <= x} / n``."""

    def __init__(self, sample):
        self.sorted = np.sort(np.asarray(sample, dtype=float).ravel())
        if self.sorted.size == 0:
            raise InvalidArgumentError("empirical d.f. of an empty sample")

    @property
    def n(self) -> int:
        return self.sorted.size

    def count_le(self, x):
        return np.searchsorted(self.sorted, x, side="right")

    def __call__(self, x):
        return self.count_le(x) / self.n

    def symmetrized(self, x):
        """``(G_n(x) + 1 - G_n(-x)) / 2``."""
        x = np.asarray(x, dtype=float)
        return (self.count_le(x) + self.n - self.count_le(-x)) / (2 * self.n)


def edf_eval(e: Edf, x):
    return e(x)


def symmetrized_eval(e: Edf, x):
    return e.symmetrized(x)


@dataclass(frozen=True)
class Partition:
    """Boundaries ``0 = x_0 < x_1 < ... < x_m = inf`` of the cells ``B_j^+ = (x_{j-1}, x_j]``.

    Only the finite interior boundaries ``x_1 .. x_{m-1}`` are stored.
    """

    interior: tuple[float, ...]
    data_driven: bool = field(default=False, compare=False)

    def __post_init__(self):
        xs = tuple(float(x) for x in self.interior)
        object.__setattr__(self, "interior", xs)
        if len(xs) < 2:
            raise InvalidArgumentError(f"need m > 2 cells, i.e. at least 2 finite boundaries, got {len(xs)}")
        if not all(math.isfinite(x) for x in xs):
            raise InvalidArgumentError("finite boundaries must be finite; x_m = inf is implicit")
        if xs[0] <= 0 or any(b <= a for a, b in zip(xs, xs[1:])):
            raise InvalidArgumentError(f"boundaries must be positive and strictly increasing, got {xs}")

    @property
    def m(self) -> int:
        return len(self.interior) + 1

    @property
    def boundaries(self) -> np.ndarray:
        return np.concatenate(([0.0], self.interior, [np.inf]))

    def scaled(self, c: float) -> Partition:
        if not c > 0:
            raise InvalidArgumentError(f"scale factor must be positive, got {c}")
        return Partition(tuple(c * x for x in self.interior), self.data_driven)

    @classmethod
    def normal_quantiles(cls, m: int = 6, scale: float = 1.0, data_driven: bool = False) -> Partition:
        """Cells equiprobable under N(0, scale^2): ``x_j = scale * Phi^{-1}(1/2 + j/(2m))``."""
        if m <= 2:
            raise InvalidArgumentError(f"need m > 2, got {m}")
        q = ndtri(0.5 + np.arange(1, m) / (2.0 * m))
        return cls(tuple(scale * q), data_driven)

    def to_json(self) -> str:
        return json.dumps(list(self.interior))

    @classmethod
    def from_json(cls, text: str) -> Partition:
        try:
            values = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidArgumentError(f"partition is not valid JSON: {exc}") from exc
        if not isinstance(values, list) or not all(isinstance(v, (int, float)) for v in values):
            raise InvalidArgumentError("partition must be a JSON array of finite boundaries")
        return cls(tuple(values))


def default_partition(m: int = 6) -> Partition:
    """Fixed partition at standard normal quantiles (unit scale)."""
    return Partition.normal_quantiles(m)


@dataclass(frozen=True, eq=False)
class CellCounts:
    """Residual counts in ``B_j^+`` and ``B_j^- = (-x_j, -x_{j-1}]``.

    ``n`` is the total number of residuals. ``scale_hint`` is a preliminary
    scale of the residuals, used to bracket the scale estimate.
    """

    nu_plus: np.ndarray
    nu_minus: np.ndarray
    n: int
    scale_hint: float | None = None

    @property
    def nu(self) -> np.ndarray:
        return self.nu_plus + self.nu_minus

    @property
    def m(self) -> int:
        return self.nu_plus.size

    @classmethod
    def from_nu(cls, nu: Sequence[float], n: float | None = None, scale_hint: float | None = None) -> CellCounts:
        """Counts given only through their symmetric totals ``nu_j``."""
        nu = np.asarray(nu, dtype=float)
        total = float(nu.sum()) if n is None else n
        return cls(nu, np.zeros_like(nu), total, scale_hint)


def cell_counts(residuals, part: Partition, scale_hint: float | None = None) -> CellCounts:
    """Count residuals in each ``B_j^+`` and ``B_j^-``.

    ``residuals`` is a :class:`ResidualSet` or an array. A residual exactly
    equal to zero lies in ``B_1^- = (-x_1, 0]``, so that
    ``nu_j = 2n[S_n(x_j) - S_n(x_{j-1})]`` holds for every sample.
    """
    e = np.asarray(getattr(residuals, "residuals", residuals), dtype=float).ravel()
    if scale_hint is None and hasattr(residuals, "mad_scale"):
        scale_hint = residuals.mad_scale()
    xs = part.boundaries
    m = part.m
    pos = e[e > 0]
    neg = -e[e <= 0]
    # x_{j-1} < e <= x_j  <=>  searchsorted(left) == j
    jp = np.searchsorted(xs, pos, side="left")
    # x_{j-1} <= -e < x_j  <=>  searchsorted(right) == j
    jm = np.searchsorted(xs, neg, side="right")
    nu_plus = np.bincount(jp, minlength=m + 1)[1:]
    nu_minus = np.bincount(jm, minlength=m + 1)[1:]
    return CellCounts(nu_plus, nu_minus, e.size, scale_hint)
