"""Conditional expectation onto a measurement algebra, and its diagnostics.

For a state ``W`` and an orthogonal projector family ``{B_j}`` the predictor
of an observable ``A`` is

    E_w[A | B] = sum_j  tr(W B_j A B_j) / tr(W B_j)  B_j

with branches of zero weight masked to 0. The residual functions below
measure how far this predictor satisfies the defining property on compound
projectors, the module property, and the best-predictor decomposition.
"""

from dataclasses import asdict, dataclass

import numpy as np

from .algebra import ProjectorFamily, synthesize
from .errors import AllWeightsZero, DimMismatch, NotProjector, ZeroProbabilityBranch
from .operators import (
    TOL,
    DensityOperator,
    _require_self_adjoint,
    as_density,
    as_operator,
    expectation,
    norm,
)


@dataclass(frozen=True, eq=False)
class ConditionalExpectation:
    """Coefficients of ``E_w[A | B]`` in the projector family.

    ``weights[j]`` is the Born weight ``w(B_j)``; ``weight_mask[j]`` is True
    iff it exceeds the tolerance. Masked coefficients are 0.
    """

    family: ProjectorFamily
    coeffs: np.ndarray
    weights: np.ndarray
    weight_mask: np.ndarray

    def operator(self):
        return synthesize(self.family, self.coeffs)


def _check_dims(W, A, family):
    if W.dim != A.shape[0] or family.dim != W.dim:
        raise DimMismatch(f"state dim {W.dim}, operator dim {A.shape[0]}, family dim {family.dim}")


def branch_weights(state, family):
    W = as_density(state).matrix
    return np.array([np.trace(b @ W @ b).real for b in family.projectors])


def _branch_values(W, A, family, tol=TOL):
    """Complex ``tr(W B_j A B_j) / tr(W B_j)`` for any (not necessarily self-adjoint) ``A``."""
    weights = branch_weights(W, family)
    mask = weights > tol
    if not mask.any():
        raise AllWeightsZero("every projector in the family has zero weight in this state")
    values = np.zeros(len(family), dtype=complex)
    for j, b in enumerate(family.projectors):
        if mask[j]:
            # tr((BWB)(BAB)): rounding scales with w(B), not with ||W||
            values[j] = np.einsum("ij,ji->", b @ W.matrix @ b, b @ A @ b) / weights[j]
    return values, weights, mask


def conditional_expectation(state, op, family, tol=TOL):
    W = as_density(state)
    A = _require_self_adjoint(op, "A")
    _check_dims(W, A, family)
    values, weights, mask = _branch_values(W, A, family, tol)
    coeffs = values.real.copy()
    for arr in (coeffs, weights, mask):
        arr.setflags(write=False)
    return ConditionalExpectation(family, coeffs, weights, mask)


def _require_projector(op, tol=TOL):
    B = as_operator(op)
    defect = max(norm(B - B.conj().T), norm(B @ B - B))
    if defect > tol:
        raise NotProjector(0, defect)
    return B


def reduce_state(state, projector, tol=TOL):
    """Lüders update ``B W B / tr(W B)`` after observing ``B``."""
    W = as_density(state)
    B = _require_projector(projector, tol)
    if B.shape[0] != W.dim:
        raise DimMismatch(f"projector dim {B.shape[0]} against state dim {W.dim}")
    bwb = B @ W.matrix @ B
    # second sandwich strips off-range rounding, which 1/p would amplify
    bwb = B @ bwb @ B
    p = np.trace(bwb).real
    if p <= tol:
        raise ZeroProbabilityBranch(f"branch has probability {p:.3g}")
    return DensityOperator(bwb / p)


def posterior_expectation(state, op, family, j, tol=TOL):
    """Expected value of ``A`` in the state reduced by ``B_j``."""
    A = as_operator(op)
    return expectation(reduce_state(state, family[j], tol), A).real


def defining_property_residual(state, op, family, subset):
    """``|w(B_S E B_S) - w(B_S A B_S)|`` with ``B_S = sum_{j in S} B_j``."""
    subset = list(subset)
    if not subset:
        raise ValueError("subset must be non-empty")
    W = as_density(state)
    E = conditional_expectation(W, op, family).operator()
    A = as_operator(op)
    bs = family.support(subset)
    return abs(expectation(W, bs @ E @ bs) - expectation(W, bs @ A @ bs))


def module_property_residual(state, op, family, coeffs):
    """Worst violation of ``E[AC] = E[A] C`` and ``E[CA] = C E[A]`` for ``C`` in the algebra."""
    W = as_density(state)
    A = _require_self_adjoint(op, "A")
    _check_dims(W, A, family)
    C = synthesize(family, coeffs)
    e_a = synthesize(family, _branch_values(W, A, family)[0])
    e_ac = synthesize(family, _branch_values(W, A @ C, family)[0])
    e_ca = synthesize(family, _branch_values(W, C @ A, family)[0])
    return max(norm(e_ac - e_a @ C), norm(e_ca - C @ e_a))


def projection_residual(state, op, family):
    """``|w(E_w[A|B]) - w(A)|``; equals ``|sum_{j != k} tr(W B_j A B_k)|`` for complete families."""
    W = as_density(state)
    E = conditional_expectation(W, op, family).operator()
    return abs(expectation(W, E) - expectation(W, op))


def predictor_mse(state, op, family, coeffs):
    """Mean squared prediction error ``tr(W (A - C)^2)`` of ``C = sum_j c_j B_j``."""
    W = as_density(state)
    A = as_operator(op)
    _check_dims(W, A, family)
    D = A - synthesize(family, coeffs)
    return expectation(W, D @ D).real


def least_squares_coeffs(state, op, family, tol=TOL):
    """Real coefficients minimizing :func:`predictor_mse`.

    The objective is a diagonal quadratic in ``c``; its stationary point is
    ``c_j = Re tr(W A B_j) / tr(W B_j)``. Zero-weight branches do not enter
    the objective and are set to 0.
    """
    W = as_density(state)
    A = _require_self_adjoint(op, "A")
    _check_dims(W, A, family)
    weights = branch_weights(W, family)
    mask = weights > tol
    if not mask.any():
        raise AllWeightsZero("every projector in the family has zero weight in this state")
    coeffs = np.zeros(len(family))
    for j, b in enumerate(family.projectors):
        if mask[j]:
            coeffs[j] = expectation(W, A @ b).real / weights[j]
    return coeffs


def pythagoras_residual(state, op, family, coeffs):
    """``|mse(c) - mse(E) - tr(W (E - C)^2)|`` where ``E`` is the conditional expectation."""
    W = as_density(state)
    ce = conditional_expectation(W, op, family)
    D = ce.operator() - synthesize(family, coeffs)
    return abs(
        predictor_mse(W, op, family, coeffs)
        - predictor_mse(W, op, family, ce.coeffs)
        - expectation(W, D @ D).real
    )


@dataclass(frozen=True)
class OptimalityReport:
    """Conditional-expectation predictor (``eq2_*`` fields) against least squares (``*_ls``)."""

    eq2_coeffs: list
    least_squares_coeffs: list
    mse_eq2: float
    mse_ls: float
    projection_residual: float
    pythagoras_residual: float

    def to_dict(self):
        return asdict(self)


def optimality_report(state, op, family, coeffs=None):
    """Compare the conditional expectation with the least-squares predictor.

    The Pythagoras residual is evaluated at ``coeffs`` (the least-squares
    coefficients when omitted).
    """
    W = as_density(state)
    cond = conditional_expectation(W, op, family).coeffs
    ls = least_squares_coeffs(W, op, family)
    if coeffs is None:
        coeffs = ls
    return OptimalityReport(
        eq2_coeffs=[float(c) for c in cond],
        least_squares_coeffs=[float(c) for c in ls],
        mse_eq2=predictor_mse(W, op, family, cond),
        mse_ls=predictor_mse(W, op, family, ls),
        projection_residual=projection_residual(W, op, family),
        pythagoras_residual=pythagoras_residual(W, op, family, coeffs),
    )
