"""Innovation and outlier distributions.

Innovation laws drive the autoregression and are all symmetric about zero.
Outlier laws describe the gross errors added to observations; besides
sampling they expose ``expect``, the expectation of a bounded function,
which the asymptotic shift formulas need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import InvalidArgumentError, PrecisionError

QUAD_TOL = 1e-9
CAUCHY_QUAD_TOL = 1e-7


# ---------------------------------------------------------------------------
# Innovation laws
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormalInnovation:
    theta: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.theta) and self.theta > 0):
            raise InvalidArgumentError(f"normal scale must be positive, got {self.theta}")

    @property
    def variance(self) -> float:
        return self.theta**2

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.theta * rng.standard_normal(size)

    def to_dict(self) -> dict:
        return {"law": "normal", "theta": self.theta}


@dataclass(frozen=True)
class LaplaceInnovation:
    scale: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise InvalidArgumentError(f"laplace scale must be positive, got {self.scale}")

    @property
    def variance(self) -> float:
        return 2.0 * self.scale**2

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.laplace(0.0, self.scale, size)

    def to_dict(self) -> dict:
        return {"law": "laplace", "scale": self.scale}


@dataclass(frozen=True)
class StudentTInnovation:
    df: float
    scale: float = 1.0

    def __post_init__(self):
        if not self.df > 2:
            raise InvalidArgumentError(f"student-t innovations need df > 2, got {self.df}")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise InvalidArgumentError(f"student-t scale must be positive, got {self.scale}")

    @property
    def variance(self) -> float:
        return self.scale**2 * self.df / (self.df - 2.0)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.scale * rng.standard_t(self.df, size)

    def to_dict(self) -> dict:
        return {"law": "student_t", "df": self.df, "scale": self.scale}


@dataclass(frozen=True)
class LogisticInnovation:
    scale: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise InvalidArgumentError(f"logistic scale must be positive, got {self.scale}")

    @property
    def variance(self) -> float:
        return (math.pi * self.scale) ** 2 / 3.0

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.logistic(0.0, self.scale, size)

    def to_dict(self) -> dict:
        return {"law": "logistic", "scale": self.scale}


InnovationLaw = NormalInnovation | LaplaceInnovation | StudentTInnovation | LogisticInnovation


def innovation_from_dict(d: dict) -> InnovationLaw:
    d = dict(d)
    law = d.pop("law", "normal").lower()
    cls = {
        "normal": NormalInnovation,
        "laplace": LaplaceInnovation,
        "student_t": StudentTInnovation,
        "t": StudentTInnovation,
        "logistic": LogisticInnovation,
    }.get(law)
    if cls is None:
        raise InvalidArgumentError(f"unknown innovation law {law!r}")
    return cls(**d)


# ---------------------------------------------------------------------------
# Outlier laws
# ---------------------------------------------------------------------------


def _checked_quad(func, a, b, points, tol, label):
    pts = sorted(p for p in points if a < p < b) or None
    val, err = integrate.quad(func, a, b, points=pts, epsabs=tol / 10, epsrel=0.0, limit=500)
    if not err <= tol:
        raise PrecisionError(f"quadrature for {label} did not converge", err)
    return val


@dataclass(frozen=True)
class PointMass:
    c: float

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.full(size, float(self.c))

    def expect(self, func: Callable[[float], float], breakpoints: Sequence[float] = ()) -> float:
        return float(func(self.c))

    @property
    def spread(self) -> float:
        return abs(self.c)

    def to_dict(self) -> dict:
        return {"law": "pointmass", "c": self.c}


@dataclass(frozen=True)
class NormalOutlier:
    mean: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise InvalidArgumentError(f"normal outlier scale must be positive, got {self.scale}")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.mean + self.scale * rng.standard_normal(size)

    def expect(self, func, breakpoints=()) -> float:
        # standardized variable; mass beyond |z| = 38 is below double precision
        zs = [(b - self.mean) / self.scale for b in breakpoints]

        def integrand(z):
            return func(self.mean + self.scale * z) * math.exp(-0.5 * z * z)

        val = _checked_quad(integrand, -38.0, 38.0, zs, QUAD_TOL * math.sqrt(2 * math.pi), "normal")
        return val / math.sqrt(2.0 * math.pi)

    @property
    def spread(self) -> float:
        return abs(self.mean) + 8.0 * self.scale

    def to_dict(self) -> dict:
        return {"law": "normal", "mean": self.mean, "scale": self.scale}


@dataclass(frozen=True)
class CauchyOutlier:
    location: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise InvalidArgumentError(f"cauchy scale must be positive, got {self.scale}")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.location + self.scale * rng.standard_cauchy(size)

    def expect(self, func, breakpoints=()) -> float:
        # xi = loc + scale*tan(pi*s) maps the uniform law on (-1/2, 1/2) onto the Cauchy law
        ss = [math.atan((b - self.location) / self.scale) / math.pi for b in breakpoints]
        half = 0.5 - 1e-15

        def integrand(s):
            return func(self.location + self.scale * math.tan(math.pi * s))

        return _checked_quad(integrand, -half, half, ss, CAUCHY_QUAD_TOL, "cauchy")

    @property
    def spread(self) -> float:
        return abs(self.location) + 8.0 * self.scale

    def to_dict(self) -> dict:
        return {"law": "cauchy", "location": self.location, "scale": self.scale}


@dataclass(frozen=True)
class UniformOutlier:
    a: float
    b: float

    def __post_init__(self):
        if not self.b > self.a:
            raise InvalidArgumentError(f"uniform outlier needs a < b, got ({self.a}, {self.b})")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(self.a, self.b, size)

    def expect(self, func, breakpoints=()) -> float:
        val = _checked_quad(func, self.a, self.b, breakpoints, QUAD_TOL * (self.b - self.a), "uniform")
        return val / (self.b - self.a)

    @property
    def spread(self) -> float:
        return max(abs(self.a), abs(self.b))

    def to_dict(self) -> dict:
        return {"law": "uniform", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class DiscreteOutlier:
    atoms: tuple[float, ...]
    probs: tuple[float, ...] = field(default=())

    def __post_init__(self):
        atoms = tuple(float(a) for a in self.atoms)
        probs = tuple(float(p) for p in self.probs)
        if len(atoms) == 0 or len(atoms) != len(probs):
            raise InvalidArgumentError("discrete outlier law needs matching atoms and probabilities")
        if any(p < 0 for p in probs) or abs(math.fsum(probs) - 1.0) > 1e-12:
            raise InvalidArgumentError(f"discrete probabilities must be nonnegative and sum to 1, got {probs}")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probs", probs)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        idx = rng.choice(len(self.atoms), size=size, p=np.asarray(self.probs))
        return np.asarray(self.atoms)[idx]

    def expect(self, func, breakpoints=()) -> float:
        return math.fsum(p * func(a) for a, p in zip(self.atoms, self.probs))

    @property
    def spread(self) -> float:
        return max(abs(a) for a in self.atoms)

    def to_dict(self) -> dict:
        return {"law": "discrete", "atoms": list(self.atoms), "probs": list(self.probs)}


OutlierLaw = PointMass | NormalOutlier | CauchyOutlier | UniformOutlier | DiscreteOutlier


def outlier_from_dict(d: dict) -> OutlierLaw:
    d = dict(d)
    law = d.pop("law").lower()
    if law == "discrete":
        return DiscreteOutlier(tuple(d["atoms"]), tuple(d["probs"]))
    cls = {
        "pointmass": PointMass,
        "normal": NormalOutlier,
        "cauchy": CauchyOutlier,
        "uniform": UniformOutlier,
    }.get(law)
    if cls is None:
        raise InvalidArgumentError(f"unknown outlier law {law!r}")
    return cls(**d)


def parse_outlier(text: str) -> OutlierLaw:
    """Parse the command-line form of an outlier law.

    Examples: ``pointmass:5``, ``normal:0,3``, ``cauchy:0,1``, ``uniform:-2,2``,
    ``discrete:-4@0.5,4@0.5``.
    """
    name, _, rest = text.strip().partition(":")
    name = name.lower()
    try:
        if name == "discrete":
            pairs = [item.split("@") for item in rest.split(",") if item]
            return DiscreteOutlier(tuple(float(a) for a, _ in pairs), tuple(float(p) for _, p in pairs))
        args = [float(v) for v in rest.split(",") if v.strip()]
        if name == "pointmass":
            return PointMass(*args)
        if name == "normal":
            return NormalOutlier(*args)
        if name == "cauchy":
            return CauchyOutlier(*args)
        if name == "uniform":
            return UniformOutlier(*args)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidArgumentError):
            raise
        raise InvalidArgumentError(f"cannot parse outlier law {text!r}: {exc}") from exc
    raise InvalidArgumentError(f"unknown outlier law {text!r}")
