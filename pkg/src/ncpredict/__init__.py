"""Classical and non-commutative conditional expectation as prediction."""

from .algebra import ProjectorFamily, basis_family, build_family, decompose, synthesize
from .classical import FiniteSampleSpace, cond_expect, condition, expect
from .conditional import (
    ConditionalExpectation,
    OptimalityReport,
    conditional_expectation,
    least_squares_coeffs,
    optimality_report,
    posterior_expectation,
    predictor_mse,
    reduce_state,
)
from .operators import DensityOperator, dyad, expectation, tensor, uncertainty_check, variance

__version__ = "0.1.0"
