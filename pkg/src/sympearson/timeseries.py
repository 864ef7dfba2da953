"""Stationary AR(p) model with unknown mean and local gross-error contamination.

The clean process is ``v_t = mu + u_t`` with
``u_t = beta_1 u_{t-1} + ... + beta_p u_{t-p} + eps_t``; the observed
series is ``y_t = v_t + z_t xi_t`` where ``z_t`` is Bernoulli with
probability ``min(1, gamma / sqrt(n))`` and ``xi_t`` has outlier law ``pi``.
Samples are indexed ``t = 1 - p, ..., n``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import signal

from .errors import CsvParseError, InvalidArgumentError
from .laws import InnovationLaw, NormalInnovation, OutlierLaw, PointMass

STABILITY_TOL = 1e-8


def spectral_radius(beta: Sequence[float]) -> float:
    beta = np.asarray(beta, dtype=float)
    if beta.size == 0:
        return 0.0
    companion = np.zeros((beta.size, beta.size))
    companion[0, :] = beta
    companion[1:, :-1] = np.eye(beta.size - 1)
    return float(np.max(np.abs(np.linalg.eigvals(companion))))


def check_stationary(beta: Sequence[float], tol: float = STABILITY_TOL) -> bool:
    """True iff the companion matrix of ``beta`` has spectral radius below ``1 - tol``."""
    beta = np.asarray(beta, dtype=float).ravel()
    if not np.all(np.isfinite(beta)):
        raise InvalidArgumentError(f"AR coefficients must be finite, got {beta}")
    return spectral_radius(beta) < 1.0 - tol


@dataclass(frozen=True)
class ArModel:
    """AR(p) data-generating process with stationary mean ``mu``.

    The intercept of the usual form ``v_t = sum beta_j v_{t-j} + nu + eps_t``
    is available as :attr:`nu`.
    """

    beta: tuple[float, ...]
    mu: float = 0.0
    innovation: InnovationLaw = field(default_factory=NormalInnovation)

    def __post_init__(self):
        beta = tuple(float(b) for b in np.atleast_1d(np.asarray(self.beta, dtype=float)))
        object.__setattr__(self, "beta", beta)
        if not math.isfinite(self.mu):
            raise InvalidArgumentError(f"mu must be finite, got {self.mu}")
        if not check_stationary(beta):
            raise InvalidArgumentError(f"AR coefficients {beta} are not stationary")

    @property
    def p(self) -> int:
        return len(self.beta)

    @property
    def nu(self) -> float:
        return (1.0 - sum(self.beta)) * self.mu

    def to_dict(self) -> dict:
        return {"beta": list(self.beta), "mu": self.mu, "innovation": self.innovation.to_dict()}


@dataclass(frozen=True)
class ContaminationSpec:
    gamma: float = 0.0
    pi: OutlierLaw = field(default_factory=lambda: PointMass(0.0))

    def __post_init__(self):
        if not (self.gamma >= 0 and math.isfinite(self.gamma)):
            raise InvalidArgumentError(f"gamma must be a finite nonnegative number, got {self.gamma}")

    def intensity(self, n: int) -> float:
        """Effective outlier probability ``min(1, gamma / sqrt(n))``."""
        return min(1.0, self.gamma / math.sqrt(n))

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "pi": self.pi.to_dict()}


@dataclass(frozen=True, eq=False)
class SeriesSample:
    """Observed series ``y_{1-p}, ..., y_n``; the first ``p`` values are pre-sample.

    Simulated samples also carry the latent clean series ``v``, the
    innovations ``eps``, the contamination indicators ``z`` and the outlier
    draws ``xi``, all aligned with ``y``.
    """

    y: np.ndarray
    p: int = 0
    v: np.ndarray | None = None
    eps: np.ndarray | None = None
    z: np.ndarray | None = None
    xi: np.ndarray | None = None

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "y", y)
        if self.p < 0:
            raise InvalidArgumentError("p must be nonnegative")
        if y.ndim != 1 or y.size < self.p + 1:
            raise InvalidArgumentError(f"series needs at least p+1={self.p + 1} values, got {y.size}")
        for name in ("v", "eps", "z", "xi"):
            arr = getattr(self, name)
            if arr is not None and len(arr) != y.size:
                raise InvalidArgumentError(f"latent {name} has length {len(arr)}, expected {y.size}")

    @property
    def n(self) -> int:
        return self.y.size - self.p

    @property
    def t(self) -> np.ndarray:
        return np.arange(1 - self.p, self.n + 1)

    def with_order(self, p: int) -> SeriesSample:
        """Reinterpret the same values with ``p`` pre-sample observations."""
        return SeriesSample(self.y, p, self.v, self.eps, self.z, self.xi)

    def to_csv(self, path: str | Path | None = None) -> str:
        latent = self.v is not None and self.z is not None and self.xi is not None
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "y", "v", "z", "xi"] if latent else ["t", "y"])
        for i, t in enumerate(self.t):
            row = [int(t), repr(float(self.y[i]))]
            if latent:
                row += [repr(float(self.v[i])), int(self.z[i]), repr(float(self.xi[i]))]
            w.writerow(row)
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path: str | Path, p: int | None = None) -> SeriesSample:
        return cls.from_csv_text(Path(path).read_text(), p)

    @classmethod
    def from_csv_text(cls, text: str, p: int | None = None) -> SeriesSample:
        """Parse a series written by :meth:`to_csv` or a bare ``y`` column.

        The first ``p`` rows are the pre-sample values. When ``p`` is not
        given it is read off the ``t`` column (``p = 1 - t[0]``), or 0
        without one.
        """
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise CsvParseError("empty file", 1)
        header = [h.strip() for h in rows[0]]
        if "y" not in header:
            raise CsvParseError(f"header must contain a 'y' column, got {header}", 1)
        cols = {name: [] for name in header}
        for lineno, row in enumerate(rows[1:], start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise CsvParseError(f"expected {len(header)} fields, got {len(row)}", lineno)
            for name, cell in zip(header, row):
                try:
                    val = float(cell)
                except ValueError:
                    raise CsvParseError(f"non-numeric value {cell!r} in column {name!r}", lineno) from None
                if not math.isfinite(val):
                    raise CsvParseError(f"non-finite value in column {name!r}", lineno)
                cols[name].append(val)
        y = np.asarray(cols["y"])
        if "t" in cols and cols["t"]:
            t = np.asarray(cols["t"])
            if np.any(np.diff(t) != 1):
                bad = int(np.argmax(np.diff(t) != 1)) + 3
                raise CsvParseError("t column must increase in steps of 1", bad)
            if p is None:
                p = int(1 - t[0])
        p = 0 if p is None else p
        latent = {}
        if all(k in cols for k in ("v", "z", "xi")):
            latent = {"v": np.asarray(cols["v"]), "z": np.asarray(cols["z"]).astype(bool), "xi": np.asarray(cols["xi"])}
        return cls(y, p, **latent)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def burn_in(p: int) -> int:
    return 1000 + 50 * p


def simulate_clean(model: ArModel, n: int, seed=None) -> SeriesSample:
    """Draw ``v_{1-p}, ..., v_n`` from the stationary law of ``model``.

    The recursion starts at zero and the first ``1000 + 50 p`` values are
    discarded.
    """
    if n < 1:
        raise InvalidArgumentError(f"n must be at least 1, got {n}")
    if not check_stationary(model.beta):
        raise InvalidArgumentError(f"AR coefficients {model.beta} are not stationary")
    rng = _rng(seed)
    p = model.p
    keep = n + p
    eps = model.innovation.sample(rng, burn_in(p) + keep)
    if p:
        u = signal.lfilter([1.0], np.concatenate(([1.0], -np.asarray(model.beta))), eps)
    else:
        u = eps
    eps, u = eps[-keep:].copy(), u[-keep:]
    v = model.mu + u
    return SeriesSample(v.copy(), p, v=v, eps=eps)


def contaminate(clean: SeriesSample, spec: ContaminationSpec, seed=None) -> SeriesSample:
    """Add gross errors ``z_t xi_t`` independently at every index ``t = 1-p..n``."""
    rng = _rng(seed)
    size = clean.y.size
    z = rng.random(size) < spec.intensity(clean.n)
    xi = spec.pi.sample(rng, size)
    y = clean.y.copy()
    y[z] += xi[z]
    v = clean.v if clean.v is not None else clean.y
    return SeriesSample(y, clean.p, v=v, eps=clean.eps, z=z, xi=xi)
