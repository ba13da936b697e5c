import numpy as np
import pytest
from scipy.optimize import minimize

from ncpredict.algebra import basis_family, build_family, synthesize
from ncpredict.conditional import (
    conditional_expectation,
    defining_property_residual,
    least_squares_coeffs,
    module_property_residual,
    optimality_report,
    posterior_expectation,
    predictor_mse,
    projection_residual,
    pythagoras_residual,
    reduce_state,
)
from ncpredict.errors import AllWeightsZero, NotSelfAdjoint, ZeroProbabilityBranch
from ncpredict.operators import SIGMA_X, SIGMA_Z, DensityOperator, expectation
from ncpredict.randomized import (
    random_diagonal_state,
    random_family,
    random_hermitian,
    random_mixed_state,
    random_pure_state,
)

S = 1 / np.sqrt(2)
Z = basis_family(2)


def hermitian2(alpha, beta, gamma):
    return np.array([[alpha, gamma], [np.conj(gamma), beta]], dtype=complex)


def numeric_minimizer(W, A, fam):
    """Independent oracle: BFGS on tr(W (A - sum c_j B_j)^2) built from scratch."""
    Wm = W.matrix
    projs = list(fam.projectors)

    def mse(c):
        D = A - sum(cj * b for cj, b in zip(c, projs))
        return float(np.trace(Wm @ D @ D).real)

    res = minimize(mse, np.zeros(len(projs)), method="BFGS", options={"gtol": 1e-13})
    return res.x, res.fun


class TestConditionalExpectation:
    def test_pinching_independent_of_state(self, rng):
        A = random_hermitian(rng, 4)
        for _ in range(5):
            ce = conditional_expectation(random_pure_state(rng, 4), A, basis_family(4))
            np.testing.assert_allclose(ce.coeffs, np.diag(A).real, atol=1e-12)

    def test_zero_diagonal(self):
        W = DensityOperator.from_ket([S, S])
        np.testing.assert_allclose(conditional_expectation(W, SIGMA_X, Z).coeffs, [0, 0], atol=1e-15)

    def test_algebra_element_reproduces_itself(self, rng):
        W = random_mixed_state(rng, 2)
        np.testing.assert_allclose(conditional_expectation(W, SIGMA_Z, Z).coeffs, [1, -1], atol=1e-14)

    def test_masking(self):
        W = DensityOperator.from_ket([1, 0])
        ce = conditional_expectation(W, SIGMA_X + SIGMA_Z, Z)
        np.testing.assert_array_equal(ce.weight_mask, [True, False])
        assert ce.coeffs[1] == 0

    def test_all_weights_zero(self):
        W = DensityOperator.from_ket([0, 0, 1])
        fam = build_family([np.diag([1, 0, 0]), np.diag([0, 1, 0])])
        with pytest.raises(AllWeightsZero):
            conditional_expectation(W, np.eye(3), fam)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotSelfAdjoint):
            conditional_expectation(DensityOperator.maximally_mixed(2), [[0, 1], [0, 0]], Z)


class TestReduceState:
    def test_pure_collapse(self):
        W = DensityOperator.from_ket([0.6, 0.8j])
        np.testing.assert_allclose(reduce_state(W, Z[0]).matrix, np.diag([1, 0]), atol=1e-15)

    def test_identity(self, rng):
        W = random_mixed_state(rng, 3)
        np.testing.assert_allclose(reduce_state(W, np.eye(3)).matrix, W.matrix, atol=1e-15)

    def test_mixed(self):
        got = reduce_state(DensityOperator.maximally_mixed(2), Z[0])
        np.testing.assert_allclose(got.matrix, np.diag([1, 0]), atol=1e-15)

    def test_zero_branch(self):
        with pytest.raises(ZeroProbabilityBranch):
            reduce_state(DensityOperator.from_ket([1, 0]), Z[1])


class TestPosterior:
    def test_rank_one(self, rng):
        A = random_hermitian(rng, 3)
        W = random_pure_state(rng, 3)
        for j in range(3):
            assert posterior_expectation(W, A, basis_family(3), j) == pytest.approx(A[j, j].real, abs=1e-12)

    def test_equals_coefficients(self, rng):
        for dim in (2, 4, 8, 16):
            for _ in range(20):
                W, A, fam = random_pure_state(rng, dim), random_hermitian(rng, dim), random_family(rng, dim)
                ce = conditional_expectation(W, A, fam)
                for j in range(dim):
                    assert posterior_expectation(W, A, fam, j) == pytest.approx(ce.coeffs[j], abs=1e-12)

    def test_algebra_element(self, rng):
        fam = random_family(rng, 4, blocks=2)
        W = random_mixed_state(rng, 4)
        assert posterior_expectation(W, synthesize(fam, [3.0, -1.0]), fam, 1) == pytest.approx(-1.0, abs=1e-12)


class TestDefiningProperty:
    def test_singletons(self, rng):
        for _ in range(50):
            W, A, fam = random_pure_state(rng, 5), random_hermitian(rng, 5), random_family(rng, 5, blocks=3)
            for j in range(3):
                assert defining_property_residual(W, A, fam, [j]) <= 1e-12

    def test_compound_cross_term(self):
        W = DensityOperator.from_ket([S, S])
        # cross terms tr(W B_+ sx B_-) + tr(W B_- sx B_+) = 1/2 + 1/2
        assert defining_property_residual(W, SIGMA_X, Z, [0, 1]) == pytest.approx(1.0, abs=1e-15)

    def test_commuting_state(self, rng):
        for _ in range(50):
            W = random_diagonal_state(rng, 4)
            A = random_hermitian(rng, 4)
            for subset in ([0, 1], [1, 2, 3], [0, 1, 2, 3]):
                assert defining_property_residual(W, A, basis_family(4), subset) <= 1e-12

    def test_empty_subset(self):
        with pytest.raises(ValueError):
            defining_property_residual(DensityOperator.maximally_mixed(2), SIGMA_X, Z, [])


class TestModuleProperty:
    def test_projector_multiplier(self, rng):
        W, A = random_pure_state(rng, 3), random_hermitian(rng, 3)
        for k in range(3):
            assert module_property_residual(W, A, basis_family(3), np.eye(3)[k]) <= 1e-12

    def test_random_diagonal_multiplier(self, rng):
        for _ in range(100):
            dim = int(rng.integers(2, 9))
            W, A = random_pure_state(rng, dim), random_hermitian(rng, dim)
            assert module_property_residual(W, A, basis_family(dim), rng.normal(size=dim)) <= 1e-12

    def test_identity_multiplier(self, rng):
        fam = random_family(rng, 4, blocks=2)
        assert module_property_residual(random_pure_state(rng, 4), random_hermitian(rng, 4), fam, [1, 1]) <= 1e-12


class TestProjectionResidual:
    def test_commuting(self, rng):
        assert projection_residual(random_diagonal_state(rng, 3), random_hermitian(rng, 3), basis_family(3)) <= 1e-12

    def test_closed_form(self):
        W = DensityOperator.from_ket([S, S])
        # |2 Re(conj(a) b gamma)| with a = b = 1/sqrt2, gamma = 1/2
        assert projection_residual(W, hermitian2(0.3, -1.2, 0.5), Z) == pytest.approx(0.5, abs=1e-15)

    def test_complex_amplitudes(self, rng):
        a, b = 0.6, 0.8 * np.exp(0.7j)
        gamma = 0.4 - 0.9j
        want = abs(2 * (np.conj(a) * b * gamma).real)
        got = projection_residual(DensityOperator.from_ket([a, b]), hermitian2(1.0, 2.0, gamma), Z)
        assert got == pytest.approx(want, abs=1e-14)

    def test_algebra_element(self, rng):
        fam = random_family(rng, 4, blocks=2)
        assert projection_residual(random_pure_state(rng, 4), synthesize(fam, [1.5, -0.5]), fam) <= 1e-12


class TestLeastSquares:
    def test_algebra_element(self, rng):
        fam = random_family(rng, 4, blocks=2)
        got = least_squares_coeffs(random_pure_state(rng, 4), synthesize(fam, [2.0, -1.0]), fam)
        np.testing.assert_allclose(got, [2.0, -1.0], atol=1e-12)

    def test_diagonal_state_matches_conditional(self, rng):
        W, A = random_diagonal_state(rng, 5, floor=0.01), random_hermitian(rng, 5)
        fam = basis_family(5)
        np.testing.assert_allclose(least_squares_coeffs(W, A, fam), conditional_expectation(W, A, fam).coeffs, atol=1e-12)

    def test_superposition_closed_form(self):
        alpha, beta, gamma = 0.3, -1.1, 0.45
        W = DensityOperator.from_ket([S, S])
        A = hermitian2(alpha, beta, gamma)
        got = least_squares_coeffs(W, A, Z)
        np.testing.assert_allclose(got, [alpha + gamma, beta + gamma], atol=1e-15)
        oracle, _ = numeric_minimizer(W, A, Z)
        np.testing.assert_allclose(got, oracle, atol=1e-8)
        np.testing.assert_allclose(conditional_expectation(W, A, Z).coeffs, [alpha, beta], atol=1e-15)

    def test_against_numeric_minimizer(self, rng):
        for dim in (2, 3, 5):
            W, A, fam = random_pure_state(rng, dim), random_hermitian(rng, dim), random_family(rng, dim)
            oracle, fun = numeric_minimizer(W, A, fam)
            got = least_squares_coeffs(W, A, fam)
            np.testing.assert_allclose(got, oracle, atol=1e-8)
            assert predictor_mse(W, A, fam, got) <= fun + 1e-12


class TestMSE:
    def test_algebra_element(self, rng):
        fam = random_family(rng, 3)
        assert predictor_mse(random_pure_state(rng, 3), synthesize(fam, [1, 2, 3]), fam, [1, 2, 3]) == pytest.approx(0, abs=1e-12)

    def test_sigma_x_mixed(self):
        assert predictor_mse(DensityOperator.maximally_mixed(2), SIGMA_X, Z, [0, 0]) == pytest.approx(1.0, abs=1e-15)

    def test_least_squares_beats_conditional(self, rng):
        for _ in range(200):
            W, A, fam = random_pure_state(rng, 4), random_hermitian(rng, 4), random_family(rng, 4)
            ls = predictor_mse(W, A, fam, least_squares_coeffs(W, A, fam))
            assert ls <= predictor_mse(W, A, fam, conditional_expectation(W, A, fam).coeffs) + 1e-12
            assert ls >= -1e-12


class TestPythagoras:
    def test_diagonal_state(self, rng):
        for _ in range(50):
            W, A = random_diagonal_state(rng, 4), random_hermitian(rng, 4)
            assert pythagoras_residual(W, A, basis_family(4), rng.normal(size=4)) <= 1e-12

    def test_algebra_element(self, rng):
        fam = random_family(rng, 4, blocks=2)
        A = synthesize(fam, [0.5, 2.0])
        assert pythagoras_residual(random_pure_state(rng, 4), A, fam, rng.normal(size=2)) <= 1e-12

    def test_symmetric_superposition(self):
        W = DensityOperator.from_ket([S, S])
        assert predictor_mse(W, SIGMA_X, Z, [0, 0]) == pytest.approx(1.0)
        assert pythagoras_residual(W, SIGMA_X, Z, [0, 0]) == pytest.approx(0.0, abs=1e-15)

    def test_generic_superposition_reports_gap(self):
        # cross terms do not vanish: residual = |2 sum_j (e_j - c_j) Re tr(W B_j A B_k)| != 0
        W = DensityOperator.from_ket([S, S])
        A = hermitian2(0.0, 0.0, 0.5)
        assert pythagoras_residual(W, A, Z, [1.0, 1.0]) > 0.1


class TestOptimalityReport:
    def test_fields(self, rng):
        W, A = random_pure_state(rng, 3), random_hermitian(rng, 3)
        rep = optimality_report(W, A, basis_family(3))
        assert set(rep.to_dict()) == {
            "eq2_coeffs",
            "least_squares_coeffs",
            "mse_eq2",
            "mse_ls",
            "projection_residual",
            "pythagoras_residual",
        }
        assert rep.mse_ls <= rep.mse_eq2 + 1e-12
        assert rep.eq2_coeffs == pytest.approx(np.diag(A).real.tolist(), abs=1e-12)

    def test_commuting_regime(self, rng):
        rep = optimality_report(random_diagonal_state(rng, 3, floor=0.05), random_hermitian(rng, 3), basis_family(3))
        assert rep.least_squares_coeffs == pytest.approx(rep.eq2_coeffs, abs=1e-10)
        assert rep.projection_residual <= 1e-10
        assert rep.pythagoras_residual <= 1e-10
