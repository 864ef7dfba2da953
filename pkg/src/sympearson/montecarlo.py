"""Replicated experiments comparing finite-sample behaviour with the asymptotics.

Every replication draws from its own ``SeedSequence`` child of the
experiment seed, and results are merged in replication order, so serial
and parallel runs give identical output.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import estimation
from .asymptotics import ShiftContext, level_from_lambda2, noncentrality_spec, shift_delta_sym
from .chisq import noncentral_chi2_cdf
from .edf import Edf, Partition, default_partition
from .errors import InvalidArgumentError, StageError, SymPearsonError
from .estimation import EstimatorChoice, HuberM, LeastSquares
from .laws import NormalInnovation, OutlierLaw, innovation_from_dict, outlier_from_dict
from .pearson import run_test
from .timeseries import ArModel, ContaminationSpec, SeriesSample, contaminate, simulate_clean

FAILURE_LIMIT = 0.01


@dataclass(frozen=True)
class ExperimentSpec:
    model: ArModel
    contamination: ContaminationSpec = field(default_factory=ContaminationSpec)
    n: int = 2000
    replications: int = 1000
    estimator: EstimatorChoice = field(default_factory=HuberM)
    partition: Partition = field(default_factory=default_partition)
    alpha: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.replications < 1:
            raise InvalidArgumentError("replications must be at least 1")
        if self.n < 10 * (self.model.p + 1):
            raise InvalidArgumentError(f"n must be at least 10(p+1) = {10 * (self.model.p + 1)}")
        if not 0 < self.alpha < 1:
            raise InvalidArgumentError(f"alpha must lie in (0, 1), got {self.alpha}")

    def shift_context(self) -> ShiftContext | None:
        """Theory inputs; only defined for normal innovations."""
        inn = self.model.innovation
        if not isinstance(inn, NormalInnovation):
            return None
        return ShiftContext(self.model.beta, inn.theta, self.contamination.pi)

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "contamination": self.contamination.to_dict(),
            "n": self.n,
            "replications": self.replications,
            "estimator": self.estimator.to_dict(),
            "partition": list(self.partition.interior),
            "alpha": self.alpha,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentSpec:
        m = d["model"]
        model = ArModel(
            tuple(m.get("beta", ())),
            float(m.get("mu", 0.0)),
            innovation_from_dict(m.get("innovation", {"law": "normal", "theta": m.get("theta", 1.0)})),
        )
        c = d.get("contamination", {})
        contamination = ContaminationSpec(float(c.get("gamma", 0.0)), outlier_from_dict(c.get("pi", {"law": "pointmass", "c": 0.0})))
        est = d.get("estimator", {"estimator": "huber"})
        if isinstance(est, str):
            est = {"estimator": est}
        estimator = estimation.estimator_from_name(est["estimator"], est.get("k", 1.345))
        part = d.get("partition")
        if part is None:
            partition = default_partition(int(d.get("m", 6)))
        else:
            partition = Partition(tuple(part))
        return cls(
            model=model,
            contamination=contamination,
            n=int(d.get("n", 2000)),
            replications=int(d.get("replications", 1000)),
            estimator=estimator,
            partition=partition,
            alpha=float(d.get("alpha", 0.05)),
            seed=int(d.get("seed", 0)),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> ExperimentSpec:
        return cls.from_dict(load_config(path))


def load_config(path: str | Path) -> dict:
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:  # python < 3.11
            import tomli as tomllib
        return tomllib.loads(text)
    return json.loads(text)


# ---------------------------------------------------------------------------
# replication machinery
# ---------------------------------------------------------------------------

TestFn = Callable[[SeriesSample, ExperimentSpec, np.random.Generator], "tuple[float, bool]"]


def pipeline_test(sample: SeriesSample, spec: ExperimentSpec, rng: np.random.Generator) -> tuple[float, bool]:
    report = run_test(sample, spec.model.p, spec.estimator, spec.partition, spec.alpha)
    return report.statistic, report.reject


def draw_sample(spec: ExperimentSpec, seq: np.random.SeedSequence) -> tuple[SeriesSample, np.random.SeedSequence]:
    s_clean, s_cont, s_rest = seq.spawn(3)
    clean = simulate_clean(spec.model, spec.n, s_clean)
    return contaminate(clean, spec.contamination, s_cont), s_rest


def _level_chunk(args) -> list[tuple[float, float]]:
    spec, seqs, test_fn = args
    out = []
    for seq in seqs:
        sample, s_rest = draw_sample(spec, seq)
        try:
            stat, reject = test_fn(sample, spec, np.random.Generator(np.random.PCG64(s_rest)))
        except StageError:
            out.append((math.nan, math.nan))
            continue
        out.append((float(stat), float(reject)))
    return out


def _expansion_chunk(args) -> list[np.ndarray]:
    spec, seqs, (points, true_params) = args
    out = []
    for seq in seqs:
        sample, _ = draw_sample(spec, seq)
        try:
            if true_params:
                res = estimation.residuals(sample, spec.model.mu, spec.model.beta)
            else:
                res = estimation.fit(sample, spec.estimator)
        except (SymPearsonError, np.linalg.LinAlgError):
            out.append(np.full(points.size, np.nan))
            continue
        s_hat = Edf(res.residuals).symmetrized(points)
        s_true = Edf(sample.eps[sample.p:]).symmetrized(points)
        out.append(math.sqrt(spec.n) * (s_hat - s_true))
    return out


def _chunks(items: list, k: int) -> list[list]:
    size = math.ceil(len(items) / k)
    return [items[i : i + size] for i in range(0, len(items), size)]


def _run_replications(worker, spec: ExperimentSpec, extra, workers: int) -> list:
    seqs = np.random.SeedSequence(spec.seed).spawn(spec.replications)
    workers = max(1, min(workers, len(seqs)))
    if workers == 1:
        return worker((spec, seqs, extra))
    tasks = [(spec, chunk, extra) for chunk in _chunks(seqs, 4 * workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return [row for part in pool.map(worker, tasks) for row in part]


# ---------------------------------------------------------------------------
# level experiment
# ---------------------------------------------------------------------------


def ks_distance(samples: Sequence[float], cdf: Callable[[float], float]) -> float:
    """Kolmogorov distance ``sup_x |F_N(x) - F(x)|`` for a continuous ``F``."""
    x = np.sort(np.asarray(samples, dtype=float))
    N = x.size
    if N == 0:
        return math.nan
    F = np.array([cdf(v) for v in x])
    i = np.arange(1, N + 1)
    return float(max(np.max(i / N - F), np.max(F - (i - 1) / N)))


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    rejection_rate: float
    rejection_se: float
    statistic_samples: np.ndarray
    ks_distance_to_reference: float
    theory_level: float | None
    lambda2: float | None
    failures: int

    @property
    def unreliable(self) -> bool:
        return self.failures > FAILURE_LIMIT * self.spec.replications

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "rejection_rate": self.rejection_rate,
            "rejection_se": self.rejection_se,
            "ks_distance_to_reference": self.ks_distance_to_reference,
            "theory_level": self.theory_level,
            "lambda2": self.lambda2,
            "failures": self.failures,
            "unreliable": self.unreliable,
            "completed": int(self.statistic_samples.size),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def statistics_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["replication", "statistic"])
        for i, s in enumerate(self.statistic_samples):
            w.writerow([i, repr(float(s))])
        return buf.getvalue()


def run_level_experiment(spec: ExperimentSpec, workers: int = 1, test_fn: TestFn = pipeline_test) -> ExperimentResult:
    """Empirical rejection rate and null-law fit of the statistic over replications.

    The reference law is the noncentral chi-square on ``m - 2`` degrees of
    freedom with the theoretical noncentrality (central when the innovations
    are not normal, where no theory applies).
    """
    rows = _run_replications(_level_chunk, spec, test_fn, workers)
    stats = np.array([r[0] for r in rows])
    rejects = np.array([r[1] for r in rows])
    ok = ~np.isnan(rejects)
    failures = int(np.count_nonzero(~ok))
    stats, rejects = stats[ok], rejects[ok]
    done = rejects.size
    rate = float(rejects.mean()) if done else math.nan
    se = math.sqrt(rate * (1 - rate) / done) if done else math.nan

    ctx = spec.shift_context()
    df = spec.partition.m - 2
    lambda2 = theory = None
    if ctx is not None:
        lambda2 = noncentrality_spec(spec.partition, ctx).lambda2(spec.contamination.gamma) if spec.contamination.gamma else 0.0
        theory = level_from_lambda2(lambda2, spec.alpha, df)
    ref = lambda2 or 0.0
    ks = ks_distance(stats, lambda v: noncentral_chi2_cdf(v, df, ref))
    return ExperimentResult(spec, rate, se, stats, ks, theory, lambda2, failures)


# ---------------------------------------------------------------------------
# expansion check
# ---------------------------------------------------------------------------


@dataclass
class ExpansionTable:
    """Monte Carlo drift of ``sqrt(n)[S_hat_n - S_n]`` next to ``gamma * Delta_S``."""

    x: np.ndarray
    mean: np.ndarray
    se: np.ndarray
    theory: np.ndarray
    replications: int
    failures: int

    def within(self, k: float = 3.0) -> np.ndarray:
        return np.abs(self.mean - self.theory) <= k * self.se

    def rows(self) -> list[dict]:
        return [
            {"x": float(x), "mean": float(m), "se": float(s), "theory": float(t)}
            for x, m, s, t in zip(self.x, self.mean, self.se, self.theory)
        ]

    def to_dict(self) -> dict:
        return {"rows": self.rows(), "replications": self.replications, "failures": self.failures}


def run_expansion_check(
    spec: ExperimentSpec, x_grid: Sequence[float], workers: int = 1, true_params: bool = False
) -> ExpansionTable:
    """Per grid point, mean and standard error of ``sqrt(n)[S_hat_n(x) - S_n(x)]``.

    ``S_n`` is the symmetrized e.d.f. of the true innovations, which
    simulation keeps alongside the observed series. With ``true_params`` the
    residuals use the true mean and coefficients instead of estimates,
    isolating the outlier term from estimation effects.
    """
    x = np.asarray(x_grid, dtype=float)
    drifts = np.array(_run_replications(_expansion_chunk, spec, (x, true_params), workers)).reshape(-1, x.size)
    ok = ~np.isnan(drifts).any(axis=1)
    drifts = drifts[ok]
    k = drifts.shape[0]
    mean = drifts.mean(axis=0)
    se = drifts.std(axis=0, ddof=1) / math.sqrt(k) if k > 1 else np.full(x.size, np.nan)
    ctx = ShiftContext(spec.model.beta, _theta0(spec.model), spec.contamination.pi)
    gamma = spec.contamination.gamma
    theory = np.array([gamma * shift_delta_sym(v, ctx) if gamma else 0.0 for v in x])
    return ExpansionTable(x, mean, se, theory, k, int(np.count_nonzero(~ok)))


def cell_drift_check(spec: ExperimentSpec, workers: int = 1, true_params: bool = False) -> ExpansionTable:
    """Drift of the cell increments of ``sqrt(n) S_hat_n``; theory is ``gamma delta_j / 2``."""
    xs = np.array(spec.partition.interior)
    table = run_expansion_check(spec, xs, workers, true_params)
    pad = lambda a: np.concatenate(([0.0], a, [0.0]))  # noqa: E731  S(0)=1/2 and S(inf)=1 carry no drift
    mean = np.diff(pad(table.mean))
    # increments of adjacent grid points are correlated; the SE here is conservative (sum of variances bound)
    se = np.sqrt(pad(table.se)[1:] ** 2 + pad(table.se)[:-1] ** 2)
    theory = np.diff(pad(table.theory))
    cells = np.arange(1, spec.partition.m + 1, dtype=float)
    return ExpansionTable(cells, mean, se, theory, table.replications, table.failures)


def _theta0(model: ArModel) -> float:
    inn = model.innovation
    if isinstance(inn, NormalInnovation):
        return inn.theta
    raise InvalidArgumentError("theoretical shift needs normal innovations")


# ---------------------------------------------------------------------------
# robustness sweep
# ---------------------------------------------------------------------------


@dataclass
class SweepResult:
    gammas: np.ndarray
    pis: list[OutlierLaw]
    alpha: float
    lambda2: np.ndarray  # (len(gammas), len(pis))
    theory: np.ndarray
    empirical: np.ndarray | None = None

    @property
    def theory_max_deviation(self) -> np.ndarray:
        return np.max(np.abs(self.theory - self.alpha), axis=1)

    @property
    def empirical_max_deviation(self) -> np.ndarray | None:
        if self.empirical is None:
            return None
        return np.max(np.abs(self.empirical - self.alpha), axis=1)

    def to_dict(self) -> dict:
        emp = self.empirical_max_deviation
        return {
            "alpha": self.alpha,
            "gammas": self.gammas.tolist(),
            "pis": [p.to_dict() for p in self.pis],
            "lambda2": self.lambda2.tolist(),
            "theory_level": self.theory.tolist(),
            "empirical_level": None if self.empirical is None else self.empirical.tolist(),
            "theory_max_deviation": self.theory_max_deviation.tolist(),
            "empirical_max_deviation": None if emp is None else emp.tolist(),
        }

    def curve_csv(self) -> str:
        """Rows ``gamma, level`` of the worst-case theoretical level."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["gamma", "level"])
        worst = self.theory[np.arange(len(self.gammas)), np.argmax(np.abs(self.theory - self.alpha), axis=1)]
        for g, lv in zip(self.gammas, worst):
            w.writerow([repr(float(g)), repr(float(lv))])
        return buf.getvalue()


def robustness_sweep(
    base: ExperimentSpec,
    gammas: Sequence[float],
    pis: Sequence[OutlierLaw],
    workers: int = 1,
    empirical: bool = True,
) -> SweepResult:
    """Theoretical (and optionally simulated) level on a ``gamma x Pi`` grid."""
    gammas = np.asarray(gammas, dtype=float)
    pis = list(pis)
    theta0 = _theta0(base.model)
    df = base.partition.m - 2
    unit = np.array([noncentrality_spec(base.partition, ShiftContext(base.model.beta, theta0, pi)).unit_lambda2 for pi in pis])
    lambda2 = np.outer(gammas**2, unit)
    theory = np.vectorize(lambda l2: level_from_lambda2(l2, base.alpha, df))(lambda2)
    emp = None
    if empirical:
        emp = np.empty_like(theory)
        for i, g in enumerate(gammas):
            for j, pi in enumerate(pis):
                spec = replace(base, contamination=ContaminationSpec(float(g), pi))
                emp[i, j] = run_level_experiment(spec, workers).rejection_rate
    return SweepResult(gammas, pis, base.alpha, lambda2, theory, emp)


__all__ = [
    "ExperimentSpec",
    "ExperimentResult",
    "ExpansionTable",
    "SweepResult",
    "run_level_experiment",
    "run_expansion_check",
    "cell_drift_check",
    "robustness_sweep",
    "ks_distance",
    "load_config",
    "LeastSquares",
    "HuberM",
]
