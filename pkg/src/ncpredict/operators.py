"""Small dense complex operators, kets and density operators.

Operators and kets are plain ``numpy`` arrays of dtype ``complex128``; only
density operators get their own type, because their invariants (self-adjoint,
positive, unit trace) are checked once at construction and relied on
everywhere else.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, InvalidDensityOperator, NotNormalized, NotSelfAdjoint

# validation predicates
TOL = 1e-10
# exact algebraic identities on small matrices
EXACT_TOL = 1e-12

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def as_operator(matrix):
    """Return ``matrix`` as a finite square complex array."""
    op = np.asarray(matrix, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1] or op.shape[0] < 1:
        raise DimMismatch(f"operator must be a non-empty square matrix, got shape {op.shape}")
    if not np.all(np.isfinite(op)):
        raise ValueError("operator entries must be finite")
    return op


def as_ket(vector):
    psi = np.asarray(vector, dtype=complex)
    if psi.ndim != 1 or psi.size < 1:
        raise DimMismatch(f"ket must be a non-empty vector, got shape {psi.shape}")
    if not np.all(np.isfinite(psi)):
        raise ValueError("ket entries must be finite")
    return psi


def norm(op):
    """Operator 2-norm (largest singular value)."""
    op = np.asarray(op, dtype=complex)
    if op.size == 0:
        return 0.0
    return float(np.linalg.norm(op, ord=2))


def is_normalized(psi, tol=TOL):
    psi = as_ket(psi)
    return abs(float(np.vdot(psi, psi).real) - 1.0) <= tol


def is_self_adjoint(op, tol=TOL):
    op = as_operator(op)
    return norm(op - op.conj().T) <= tol


def _require_normalized(psi, tol=TOL):
    psi = as_ket(psi)
    defect = abs(float(np.vdot(psi, psi).real) - 1.0)
    if defect > tol:
        raise NotNormalized(f"ket has squared norm off by {defect:.3g}")
    return psi


def _require_self_adjoint(op, name="operator", tol=TOL):
    op = as_operator(op)
    defect = norm(op - op.conj().T)
    if defect > tol:
        raise NotSelfAdjoint(f"{name} is not self-adjoint (||A - A*|| = {defect:.3g})")
    return op


def _require_same_dim(*ops):
    dims = {op.shape[0] for op in ops}
    if len(dims) != 1:
        raise DimMismatch(f"dimension mismatch: {sorted(dims)}")


class DensityOperator:
    """Positive, self-adjoint, unit-trace matrix ``W``.

    The state functional it induces is ``w(A) = tr(W A)``; see
    :func:`expectation`. Instances are immutable.
    """

    __slots__ = ("_matrix",)

    def __init__(self, matrix, tol=TOL):
        op = as_operator(matrix)
        herm_defect = norm(op - op.conj().T)
        if herm_defect > tol:
            raise InvalidDensityOperator(f"not self-adjoint (||W - W*|| = {herm_defect:.3g})")
        op = 0.5 * (op + op.conj().T)
        smallest = float(np.linalg.eigvalsh(op)[0])
        if smallest < -tol:
            raise InvalidDensityOperator(f"not positive (smallest eigenvalue {smallest:.3g})")
        trace = float(np.trace(op).real)
        if abs(trace - 1.0) > tol:
            raise InvalidDensityOperator(f"trace is {trace!r}, expected 1")
        op.setflags(write=False)
        self._matrix = op

    @classmethod
    def from_ket(cls, psi):
        return cls(dyad(psi))

    @classmethod
    def maximally_mixed(cls, dim):
        return cls(np.eye(dim, dtype=complex) / dim)

    @property
    def matrix(self):
        return self._matrix

    @property
    def dim(self):
        return self._matrix.shape[0]

    def expect(self, op):
        return expectation(self, op)

    def __eq__(self, other):
        if not isinstance(other, DensityOperator):
            return NotImplemented
        return np.array_equal(self._matrix, other._matrix)

    def __hash__(self):
        return hash(self._matrix.tobytes())

    def __repr__(self):
        return f"DensityOperator(dim={self.dim})"


def as_density(state):
    if isinstance(state, DensityOperator):
        return state
    return DensityOperator(state)


def dyad(psi, tol=TOL):
    """Return the rank-one projector ``|psi><psi|`` of a normalized ket."""
    psi = _require_normalized(psi, tol)
    return np.outer(psi, psi.conj())


def expectation(state, op):
    """State functional ``w(A) = tr(W A)``.

    Returns a complex number; its imaginary part is rounding noise whenever
    ``op`` is self-adjoint.
    """
    W = as_density(state).matrix
    A = as_operator(op)
    _require_same_dim(W, A)
    # tr(WA) = sum_ij W_ij A_ji
    return complex(np.einsum("ij,ji->", W, A))


def tensor(*ops):
    """Kronecker product, first factor is subsystem 1."""
    if not ops:
        raise ValueError("tensor needs at least one factor")
    out = as_operator(ops[0])
    for op in ops[1:]:
        out = np.kron(out, as_operator(op))
    return out


def commutator(a, b):
    a, b = as_operator(a), as_operator(b)
    return a @ b - b @ a


def variance(psi, op):
    """Predicted squared measurement error ``<psi, (A - <A>)^2 psi>``.

    Computed as ``||(A - <A>) psi||^2``, which is non-negative by
    construction and vanishes exactly when ``psi`` is an eigenvector.
    """
    psi = _require_normalized(psi)
    A = _require_self_adjoint(op)
    if A.shape[0] != psi.size:
        raise DimMismatch(f"ket of dim {psi.size} against operator of dim {A.shape[0]}")
    a_psi = A @ psi
    mean = np.vdot(psi, a_psi).real
    residual = a_psi - mean * psi
    return float(np.vdot(residual, residual).real)


def eigen_residual(psi, op):
    """``||A psi - <psi, A psi> psi||``: zero iff ``psi`` is an eigenvector."""
    psi = as_ket(psi)
    A = as_operator(op)
    a_psi = A @ psi
    return float(np.linalg.norm(a_psi - np.vdot(psi, a_psi) * psi))


@dataclass(frozen=True)
class UncertaintyCheck:
    lhs: float
    rhs: float
    satisfied: bool


def uncertainty_check(psi, a, b, tol=EXACT_TOL):
    """Robertson bound ``sigma(A) sigma(B) >= |<psi, C psi>| / 2``.

    ``C`` is ``-i[A, B]`` so that ``[A, B] = iC``.
    """
    psi = _require_normalized(psi)
    A = _require_self_adjoint(a, "A")
    B = _require_self_adjoint(b, "B")
    C = -1j * commutator(A, B)
    lhs = float(np.sqrt(variance(psi, A) * variance(psi, B)))
    rhs = 0.5 * abs(np.vdot(psi, C @ psi))
    return UncertaintyCheck(lhs=lhs, rhs=float(rhs), satisfied=bool(lhs >= rhs - tol))


def operator_to_dict(op):
    """Exchange format: ``{"dim": n, "entries": [[re, im], ...]}`` row-major."""
    op = as_operator(op)
    return {
        "dim": int(op.shape[0]),
        "entries": [[float(z.real), float(z.imag)] for z in op.ravel()],
    }


def operator_from_dict(data):
    dim = int(data["dim"])
    entries = data["entries"]
    if len(entries) != dim * dim:
        raise DimMismatch(f"expected {dim * dim} entries for dim {dim}, got {len(entries)}")
    flat = np.array([complex(re, im) for re, im in entries], dtype=complex)
    return as_operator(flat.reshape(dim, dim))


def ket_to_dict(psi):
    psi = as_ket(psi)
    return {"dim": int(psi.size), "entries": [[float(z.real), float(z.imag)] for z in psi]}


def ket_from_dict(data):
    dim = int(data["dim"])
    entries = data["entries"]
    if len(entries) != dim:
        raise DimMismatch(f"expected {dim} entries, got {len(entries)}")
    return as_ket([complex(re, im) for re, im in entries])
