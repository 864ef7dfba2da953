"""Symmetrized Pearson chi-square test for normality of AR(p) innovations under outliers."""

from .asymptotics import (
    ShiftContext,
    asymptotic_level,
    cell_shift_vector,
    noncentrality,
    shift_delta,
    shift_delta_sym,
)
from .chisq import chi2_quantile, noncentral_chi2_cdf
from .edf import CellCounts, Edf, Partition, cell_counts, default_partition
from .estimation import HuberM, LeastSquares, ResidualSet, estimate_beta, estimate_mu, residuals
from .laws import (
    CauchyOutlier,
    DiscreteOutlier,
    LaplaceInnovation,
    LogisticInnovation,
    NormalInnovation,
    NormalOutlier,
    PointMass,
    StudentTInnovation,
    UniformOutlier,
)
from .montecarlo import ExperimentSpec, robustness_sweep, run_expansion_check, run_level_experiment
from .pearson import CellModel, TestReport, chi_square_stat, run_test, solve_theta
from .timeseries import ArModel, ContaminationSpec, SeriesSample, check_stationary, contaminate, simulate_clean

__version__ = "0.1.0"
