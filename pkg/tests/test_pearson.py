import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sympearson.edf import CellCounts, Partition, cell_counts, default_partition
from sympearson.errors import IllPosedError, StageError, UnderflowError
from sympearson.estimation import HuberM, LeastSquares
from sympearson.pearson import CellModel, chi_square_stat, pearson_statistic, run_test, solve_theta
from sympearson.timeseries import ArModel, SeriesSample, simulate_clean


@pytest.fixture
def model():
    return CellModel(default_partition())


@pytest.mark.parametrize("theta", [0.5, 1.0, 2.0, 10.0])
def test_probabilities_sum_to_one(model, theta):
    assert abs(model.p(theta).sum() - 1.0) < 1e-12
    assert abs(model.p_prime(theta).sum()) < 1e-12
    assert np.all(model.p(theta) > 0)


@pytest.mark.parametrize("theta", [0.5, 1.0, 2.0, 10.0])
def test_derivative_matches_finite_difference(model, theta):
    h = 1e-6
    fd = (model.p(theta + h) - model.p(theta - h)) / (2 * h)
    np.testing.assert_allclose(model.p_prime(theta), fd, rtol=1e-6, atol=1e-10)


def test_equiprobable_default_cells(model):
    np.testing.assert_allclose(model.p(1.0), np.full(6, 1 / 6), rtol=1e-12)


def test_solve_theta_exact_counts(model):
    for theta0 in (0.3, 1.0, 2.0, 7.5):
        nu = CellCounts.from_nu(1000 * model.p(theta0), n=1000, scale_hint=1.0)
        assert solve_theta(nu, model) == pytest.approx(theta0, abs=1e-8)


def test_solve_theta_without_hint(model):
    nu = CellCounts.from_nu(500 * model.p(1.7), n=500)
    assert solve_theta(nu, model) == pytest.approx(1.7, abs=1e-8)


def test_solve_theta_normal_sample(model):
    e = 2.0 * np.random.default_rng(3).standard_normal(100_000)
    c = cell_counts(e, model.partition, scale_hint=2.0)
    assert abs(solve_theta(c, model) - 2.0) < 0.02


@given(st.floats(0.1, 20.0), st.floats(0.3, 3.0))
def test_solve_theta_scale_equivariance(c, theta0):
    part = default_partition()
    base = CellModel(part)
    nu = base.p(theta0) * 1000 + np.array([3.0, -1.0, 2.0, 0.0, -5.0, 1.0])
    t1 = solve_theta(CellCounts.from_nu(nu, 1000, theta0), base)
    t2 = solve_theta(CellCounts.from_nu(nu, 1000, c * theta0), CellModel(part.scaled(c)))
    assert t2 == pytest.approx(c * t1, rel=1e-9)


def test_solve_theta_ill_posed(model):
    with pytest.raises(IllPosedError):
        solve_theta(CellCounts.from_nu([10, 0, 0, 0, 0, 0]), model)
    with pytest.raises(IllPosedError):
        solve_theta(CellCounts.from_nu([0, 0, 0, 0, 0, 0], n=5), model)


def test_statistic_examples():
    assert pearson_statistic([40, 30, 30], 100, [0.4, 0.3, 0.3]) == 0.0
    expected = 100 * (0.1**2 / 0.4 + 0.05**2 / 0.3 + 0.05**2 / 0.3)
    assert pearson_statistic([50, 25, 25], 100, [0.4, 0.3, 0.3]) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(4.1667, abs=1e-4)


def test_statistic_zero_at_exact_counts(model):
    nu = CellCounts.from_nu(400 * model.p(1.3), n=400)
    assert chi_square_stat(nu, model, 1.3) == pytest.approx(0.0, abs=1e-20)


def test_statistic_uses_total_n(model):
    # counts summing below n (e.g. some residuals outside all cells) still use n
    nu = CellCounts(np.array([10, 10, 10, 10, 10, 10]), np.zeros(6), 100)
    p = model.p(1.0)
    assert chi_square_stat(nu, model, 1.0) == pytest.approx(pearson_statistic(nu.nu, 100, p))


def test_statistic_underflow(model):
    with pytest.raises(UnderflowError):
        chi_square_stat(CellCounts.from_nu([1, 1, 1, 1, 1, 1]), model, 1e-3)


def test_statistic_scale_invariance():
    e = np.random.default_rng(5).standard_normal(3000)
    part = default_partition()
    c1 = cell_counts(e, part, 1.0)
    c2 = cell_counts(e * 4.0, part.scaled(4.0), 4.0)
    np.testing.assert_array_equal(c1.nu, c2.nu)
    t1 = solve_theta(c1, CellModel(part))
    t2 = solve_theta(c2, CellModel(part.scaled(4.0)))
    assert t2 == pytest.approx(4 * t1, rel=1e-9)
    assert chi_square_stat(c2, CellModel(part.scaled(4.0)), t2) == pytest.approx(
        chi_square_stat(c1, CellModel(part), t1), rel=1e-8
    )


class TestRunTest:
    def test_report_invariants(self, ar2_model):
        s = simulate_clean(ar2_model, 2000, seed=1)
        r = run_test(s, 2, HuberM(), default_partition(), 0.05)
        assert r.df == 4
        assert r.reject == (r.statistic > r.critical_value)
        from sympearson.chisq import chi2_sf

        assert r.p_value == pytest.approx(chi2_sf(r.statistic, 4))
        assert r.critical_value == pytest.approx(9.487729036781154, rel=1e-12)
        assert not r.warnings

    def test_data_driven_partition_flagged(self, ar2_model):
        r = run_test(simulate_clean(ar2_model, 500, seed=2), 2)
        assert r.partition.data_driven and r.warnings

    def test_deterministic(self, ar2_model):
        s = simulate_clean(ar2_model, 800, seed=3)
        assert run_test(s, 2).to_json() == run_test(s, 2).to_json()

    def test_alpha_near_one_rejects(self, ar2_model):
        r = run_test(simulate_clean(ar2_model, 500, seed=4), 2, alpha=1 - 1e-12)
        assert r.critical_value < 1e-3 and r.statistic > 0 and r.reject

    def test_power_against_laplace(self):
        from sympearson.laws import LaplaceInnovation

        m = ArModel((0.5, -0.3), mu=1.0, innovation=LaplaceInnovation(1.0))
        rejects = [run_test(simulate_clean(m, 2000, seed=s), 2, HuberM(), default_partition()).reject for s in range(40)]
        assert np.mean(rejects) > 0.5

    def test_stage_labels(self):
        s = SeriesSample(np.full(30, 1.0), p=1)
        with pytest.raises(StageError) as info:
            run_test(s, 1, HuberM())
        assert info.value.stage == "estimation"

    def test_json_fields(self, ar2_model):
        import json

        d = json.loads(run_test(simulate_clean(ar2_model, 300, seed=5), 2, LeastSquares()).to_json())
        for key in ("theta_hat", "nu", "statistic", "df", "critical_value", "alpha", "reject", "p_value", "estimator", "partition", "warnings"):
            assert key in d
        assert sum(d["nu"]) == 300
