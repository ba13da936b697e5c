"""Randomized property suites behind ``ncpredict verify``.

Every suite returns its worst observed value and the bound it was held to.
Two tolerance levels exist: ``tol`` for exact algebraic identities and
``100 * tol`` for identities whose two sides take different numerical routes.
"""

from dataclasses import dataclass

import numpy as np

from . import classical as cl
from .algebra import basis_family, decompose, synthesize
from .conditional import (
    conditional_expectation,
    defining_property_residual,
    least_squares_coeffs,
    module_property_residual,
    posterior_expectation,
    predictor_mse,
    projection_residual,
    pythagoras_residual,
)
from .operators import SIGMA_X, SIGMA_Y, dyad, expectation, eigen_residual, norm, uncertainty_check, variance
from .randomized import (
    random_diagonal_state,
    random_family,
    random_hermitian,
    random_ket,
    random_pmf,
    random_pure_state,
)


@dataclass(frozen=True)
class PropertyResult:
    name: str
    worst: float
    bound: float

    @property
    def passed(self):
        return bool(self.worst <= self.bound)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name:<28} worst={self.worst:.12g} bound={self.bound:.12g}"


def _dyad_suite(rng, dims, trials):
    worst = 0.0
    for d in dims:
        for _ in range(trials):
            p = dyad(random_ket(rng, d))
            worst = max(worst, norm(p @ p - p), norm(p - p.conj().T))
    return worst


def _expectation_reality(rng, dims, trials):
    worst = 0.0
    for d in dims:
        for _ in range(trials):
            worst = max(worst, abs(expectation(random_pure_state(rng, d), random_hermitian(rng, d)).imag))
    return worst


def _variance_suite(rng, dims, trials):
    """Largest violation of variance >= 0 and of variance == eigen_residual**2."""
    worst = 0.0
    for d in dims:
        for _ in range(trials):
            psi, A = random_ket(rng, d), random_hermitian(rng, d)
            v = variance(psi, A)
            worst = max(worst, -v, abs(v - eigen_residual(psi, A) ** 2))
            vals, vecs = np.linalg.eigh(A)
            worst = max(worst, variance(vecs[:, 0], A))
    return worst


def _uncertainty_suite(rng, dims, trials):
    worst = 0.0
    pairs = [(SIGMA_X, SIGMA_Y, 2)] + [(None, None, d) for d in dims]
    for a, b, d in pairs:
        for _ in range(trials):
            A = random_hermitian(rng, d) if a is None else a
            B = random_hermitian(rng, d) if b is None else b
            chk = uncertainty_check(random_ket(rng, d), A, B)
            worst = max(worst, chk.rhs - chk.lhs)
    return max(worst, 0.0)


def _pinching_suite(rng, dims, trials):
    worst = 0.0
    for d in dims:
        fam = basis_family(d)
        for _ in range(trials):
            A = random_hermitian(rng, d)
            W = random_pure_state(rng, d)
            worst = max(worst, float(np.max(np.abs(conditional_expectation(W, A, fam).coeffs - np.diag(A).real))))
    return worst


def _posterior_suite(rng, dims, trials):
    worst = 0.0
    for d in dims:
        for _ in range(trials):
            W, A, fam = random_pure_state(rng, d), random_hermitian(rng, d), random_family(rng, d)
            ce = conditional_expectation(W, A, fam)
            for j in np.flatnonzero(ce.weight_mask):
                worst = max(worst, abs(posterior_expectation(W, A, fam, j) - ce.coeffs[j]))
    return worst


def _singleton_suite(rng, dims, trials):
    worst = 0.0
    for d in dims:
        for _ in range(trials):
            W, A, fam = random_pure_state(rng, d), random_hermitian(rng, d), random_family(rng, d)
            worst = max(worst, max(defining_property_residual(W, A, fam, [j]) for j in range(len(fam))))
    return worst


def cross_term(state, op, family, subset):
    """``|sum_{j != k in S} tr(W B_j A B_k)|``."""
    total = 0j
    for j in subset:
        for k in subset:
            if j != k:
                total += expectation(state, family[j] @ op @ family[k])
    return abs(total)


def _compound_suite(rng, dims, trials):
    worst = 0.0
    for d in dims:
        for _ in range(trials):
            W, A, fam = random_pure_state(rng, d), random_hermitian(rng, d), random_family(rng, d)
            size = int(rng.integers(2, len(fam) + 1))
            subset = sorted(rng.choice(len(fam), size=size, replace=False))
            worst = max(worst, abs(defining_property_residual(W, A, fam, subset) - cross_term(W, A, fam, subset)))
    return worst


def _module_suite(rng, dims, trials):
    worst = 0.0
    for d in dims:
        for _ in range(trials):
            fam = basis_family(d) if rng.random() < 0.5 else random_family(rng, d)
            W, A = random_pure_state(rng, d), random_hermitian(rng, d)
            worst = max(worst, module_property_residual(W, A, fam, rng.normal(size=len(fam))))
    return worst


def _commuting_suite(rng, dims, trials):
    worst = 0.0
    for d in dims:
        fam = basis_family(d)
        for _ in range(trials):
            W, A = random_diagonal_state(rng, d, floor=0.01), random_hermitian(rng, d)
            cond = conditional_expectation(W, A, fam).coeffs
            ls = least_squares_coeffs(W, A, fam)
            worst = max(
                worst,
                float(np.max(np.abs(ls - cond))),
                projection_residual(W, A, fam),
                pythagoras_residual(W, A, fam, rng.normal(size=d)),
            )
    return worst


def _argmin_suite(rng, dims, trials):
    """Largest amount by which any random coefficient vector beats least squares."""
    worst = 0.0
    for d in dims:
        for _ in range(trials):
            W, A, fam = random_pure_state(rng, d), random_hermitian(rng, d), random_family(rng, d)
            best = predictor_mse(W, A, fam, least_squares_coeffs(W, A, fam))
            for _ in range(10):
                worst = max(worst, best - predictor_mse(W, A, fam, rng.normal(scale=2.0, size=len(fam))))
    return max(worst, 0.0)


def _roundtrip_suite(rng, dims, trials):
    worst = 0.0
    for d in dims:
        for _ in range(trials):
            fam = random_family(rng, d, blocks=int(rng.integers(1, d + 1)))
            c = rng.normal(size=len(fam)) + 1j * rng.normal(size=len(fam))
            worst = max(worst, float(np.max(np.abs(decompose(fam, synthesize(fam, c)) - c))))
    return worst


def _classical_suite(rng, trials):
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 9))
        sp = cl.FiniteSampleSpace(tuple(range(n)), random_pmf(rng, n))
        x = rng.normal(size=n)
        y = rng.integers(0, 3, size=n).astype(float)
        levels = np.unique(y)
        phi = {float(lv): float(rng.normal()) for lv in levels}
        g = {float(lv): float(rng.uniform(-1, 1)) for lv in levels}
        worst = max(worst, -cl.best_predictor_gap(sp, x, y, phi), cl.defining_property_check(sp, x, y, g))
        for lv in levels:
            if sp.prob(y == lv) > 0:
                worst = max(worst, cl.tower_check(sp, x, y, lv))
        pmf = random_pmf(rng, 4)
        spin = cl.spin_space(dict(zip(((1, 1), (1, -1), (-1, 1), (-1, -1)), pmf)))
        worst = max(worst, abs(cl.spin_example(spin) - 1.0))
    return worst


def run_verify(dims=(2, 4, 8), trials=100, seed=0, tol=1e-12):
    """Run every suite; results come back in a fixed order."""
    rng = np.random.default_rng(seed)
    loose = 100.0 * tol
    suites = [
        ("dyad-projector", lambda: _dyad_suite(rng, dims, trials), tol),
        ("expectation-real", lambda: _expectation_reality(rng, dims, trials), tol),
        ("variance", lambda: _variance_suite(rng, dims, trials), loose),
        ("uncertainty", lambda: _uncertainty_suite(rng, dims, trials), tol),
        ("pinching", lambda: _pinching_suite(rng, dims, trials), tol),
        ("posterior-tower", lambda: _posterior_suite(rng, dims, trials), tol),
        ("definition-singletons", lambda: _singleton_suite(rng, dims, trials), tol),
        ("definition-compound", lambda: _compound_suite(rng, dims, trials), loose),
        ("module-property", lambda: _module_suite(rng, dims, trials), tol),
        ("commuting-regime", lambda: _commuting_suite(rng, dims, trials), loose),
        ("least-squares-argmin", lambda: _argmin_suite(rng, dims, trials), tol),
        ("algebra-roundtrip", lambda: _roundtrip_suite(rng, dims, trials), tol),
        ("classical-identities", lambda: _classical_suite(rng, trials), tol),
    ]
    return [PropertyResult(name, float(run()), bound) for name, run, bound in suites]
