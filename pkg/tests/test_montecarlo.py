import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sympearson.chisq import chi2_cdf
from sympearson.edf import Partition
from sympearson.errors import InvalidArgumentError, StageError
from sympearson.estimation import LeastSquares
from sympearson.laws import CauchyOutlier, NormalOutlier, PointMass
from sympearson.montecarlo import (
    ExperimentSpec,
    ks_distance,
    robustness_sweep,
    run_expansion_check,
    run_level_experiment,
)
from sympearson.timeseries import ArModel, ContaminationSpec


def ks_brute_force(samples, cdf):
    best = 0.0
    for x in samples:
        le = sum(1 for y in samples if y <= x) / len(samples)
        lt = sum(1 for y in samples if y < x) / len(samples)
        best = max(best, abs(le - cdf(x)), abs(lt - cdf(x)))
    return best


@given(st.lists(st.floats(0.0, 30.0), min_size=1, max_size=100))
def test_ks_distance_matches_brute_force(samples):
    cdf = lambda v: chi2_cdf(v, 4)  # noqa: E731
    assert ks_distance(samples, cdf) == pytest.approx(ks_brute_force(samples, cdf), abs=1e-12)


def bernoulli_oracle(sample, spec, rng):
    return 0.0, bool(rng.random() < spec.alpha)


def failing_test(sample, spec, rng):
    if rng.random() < 0.5:
        raise StageError("scale", RuntimeError("boom"))
    return 1.0, False


@pytest.fixture
def iid_spec():
    return ExperimentSpec(ArModel(()), n=10, replications=400, alpha=0.05, seed=0)


def test_binomial_coverage_of_oracle(iid_spec):
    covered = 0
    meta = 300
    for k in range(meta):
        spec = ExperimentSpec(iid_spec.model, n=10, replications=400, alpha=0.05, seed=1000 + k)
        r = run_level_experiment(spec, test_fn=bernoulli_oracle)
        covered += abs(r.rejection_rate - 0.05) <= 3 * r.rejection_se
    assert covered / meta >= 0.99


def test_single_replication(ar2_model):
    spec = ExperimentSpec(ar2_model, n=500, replications=1, seed=3)
    assert run_level_experiment(spec).rejection_rate in (0.0, 1.0)


def test_failures_flag_unreliable(iid_spec):
    r = run_level_experiment(iid_spec, test_fn=failing_test)
    assert 0 < r.failures < iid_spec.replications
    assert r.unreliable
    assert r.statistic_samples.size == iid_spec.replications - r.failures


def test_null_level_roughly_alpha(ar2_model):
    spec = ExperimentSpec(ar2_model, n=1000, replications=400, seed=5)
    r = run_level_experiment(spec)
    assert r.theory_level == pytest.approx(0.05, abs=1e-10)
    assert r.lambda2 == 0.0
    assert abs(r.rejection_rate - 0.05) < 3 * math.sqrt(0.05 * 0.95 / 400) + 0.01
    assert r.failures == 0


def test_same_seed_same_json_any_worker_count(ar2_model):
    spec = ExperimentSpec(ar2_model, ContaminationSpec(1.0, CauchyOutlier()), n=300, replications=24, seed=9)
    a = run_level_experiment(spec, workers=1)
    b = run_level_experiment(spec, workers=3)
    assert a.to_json() == b.to_json()
    assert a.statistics_csv() == b.statistics_csv()


def test_different_seed_differs(ar2_model):
    a = run_level_experiment(ExperimentSpec(ar2_model, n=300, replications=10, seed=1))
    b = run_level_experiment(ExperimentSpec(ar2_model, n=300, replications=10, seed=2))
    assert not np.array_equal(a.statistic_samples, b.statistic_samples)


def test_spec_validation(ar2_model):
    with pytest.raises(InvalidArgumentError):
        ExperimentSpec(ar2_model, n=20)
    with pytest.raises(InvalidArgumentError):
        ExperimentSpec(ar2_model, replications=0)


def test_spec_from_json_and_toml(tmp_path, ar2_model):
    cfg = {
        "model": {"beta": [0.5, -0.3], "mu": 1.0, "innovation": {"law": "normal", "theta": 1.0}},
        "contamination": {"gamma": 2.0, "pi": {"law": "pointmass", "c": 5.0}},
        "n": 2000,
        "replications": 50,
        "estimator": {"estimator": "ls"},
        "partition": [0.3, 0.8, 1.5],
        "alpha": 0.1,
        "seed": 4,
    }
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(cfg))
    spec = ExperimentSpec.from_file(path)
    assert spec.model == ar2_model
    assert spec.contamination == ContaminationSpec(2.0, PointMass(5.0))
    assert isinstance(spec.estimator, LeastSquares)
    assert spec.partition == Partition((0.3, 0.8, 1.5))
    assert ExperimentSpec.from_dict(spec.to_dict()) == spec

    toml = tmp_path / "exp.toml"
    toml.write_text(
        'n = 500\nreplications = 20\nseed = 3\n[model]\nbeta = [0.5]\nmu = 2.0\n'
        '[contamination]\ngamma = 1.0\npi = { law = "cauchy", location = 0.0, scale = 1.0 }\n'
    )
    spec = ExperimentSpec.from_file(toml)
    assert spec.model.beta == (0.5,) and spec.contamination.pi == CauchyOutlier(0.0, 1.0)


def test_expansion_check_null(ar2_model):
    spec = ExperimentSpec(ar2_model, n=2000, replications=300, seed=2)
    exact = run_expansion_check(spec, [0.0, 0.5, 1.0, 2.0], true_params=True)
    assert np.all(exact.mean == 0.0) and np.all(exact.theory == 0.0)
    table = run_expansion_check(spec, [0.0, 0.5, 1.0, 2.0])
    assert table.mean[0] == 0.0 and table.se[0] == 0.0
    # fitting p + 1 parameters shrinks residuals by O(1/n), i.e. O((p+1)/sqrt(n)) here
    slack = (ar2_model.p + 1) / np.sqrt(spec.n)
    assert np.all(np.abs(table.mean) <= 3 * table.se + slack)


class TestSweep:
    base = ExperimentSpec(ArModel((0.5, -0.3), mu=1.0), n=300, replications=20, seed=1)
    pis = [PointMass(3.0), CauchyOutlier(0.0, 1.0), NormalOutlier(0.0, 3.0)]

    def test_theory_grid(self):
        res = robustness_sweep(self.base, [1.0, 0.5, 0.25, 0.1, 0.0], self.pis, empirical=False)
        assert np.all(res.theory[-1] == pytest.approx(0.05, abs=1e-10))
        dev = res.theory_max_deviation
        assert all(b <= a for a, b in zip(dev, dev[1:]))
        assert res.empirical is None

    def test_doubling_gamma_quadruples_lambda2(self):
        res = robustness_sweep(self.base, [0.3, 0.6], self.pis, empirical=False)
        np.testing.assert_array_equal(res.lambda2[1], 4 * res.lambda2[0])

    def test_empirical_columns(self):
        res = robustness_sweep(self.base, [0.0, 1.0], self.pis[:1], empirical=True)
        assert res.empirical.shape == (2, 1)
        d = res.to_dict()
        assert json.loads(json.dumps(d)) == d
        assert res.curve_csv().splitlines()[0] == "gamma,level"
