"""Commutative measurement algebras generated by orthogonal projectors."""

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, NotInAlgebra, NotOrthogonal, NotProjector
from .operators import TOL, as_operator, norm, operator_from_dict, operator_to_dict


@dataclass(frozen=True, eq=False)
class ProjectorFamily:
    """Validated, ordered family of pairwise-orthogonal projectors.

    Build instances with :func:`build_family`. ``completeness_defect`` is
    ``||I - sum_j B_j||``; it is 0 for a resolution of the identity and 1 for
    any family that misses part of the space.
    """

    projectors: tuple
    completeness_defect: float
    labels: tuple = ()

    @property
    def dim(self):
        return self.projectors[0].shape[0]

    @property
    def complete(self):
        return self.completeness_defect <= TOL

    def __len__(self):
        return len(self.projectors)

    def __iter__(self):
        return iter(self.projectors)

    def __getitem__(self, j):
        return self.projectors[j]

    def support(self, indices=None):
        """Sum of the projectors in ``indices`` (all of them by default)."""
        if indices is None:
            indices = range(len(self))
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for j in indices:
            out = out + self.projectors[j]
        return out


def build_family(projectors, labels=None, tol=TOL):
    ops = [as_operator(p) for p in projectors]
    if not ops:
        raise ValueError("a projector family needs at least one projector")
    dim = ops[0].shape[0]
    for j, op in enumerate(ops):
        if op.shape[0] != dim:
            raise DimMismatch(f"projector {j} has dim {op.shape[0]}, expected {dim}")
        defect = max(norm(op - op.conj().T), norm(op @ op - op))
        if defect > tol:
            raise NotProjector(j, defect)
    for j in range(len(ops)):
        for k in range(j + 1, len(ops)):
            overlap = norm(ops[j] @ ops[k])
            if overlap > tol:
                raise NotOrthogonal(j, k, overlap)
    frozen = []
    for op in ops:
        op = op.copy()
        op.setflags(write=False)
        frozen.append(op)
    defect = norm(np.eye(dim) - sum(frozen))
    if labels is None:
        labels = tuple(str(j) for j in range(len(ops)))
    elif len(labels) != len(ops):
        raise ValueError("need one label per projector")
    return ProjectorFamily(tuple(frozen), defect, tuple(labels))


def basis_family(dim, labels=None):
    """Rank-one projectors onto the computational basis of ``C^dim``."""
    eye = np.eye(dim, dtype=complex)
    return build_family([np.outer(e, e) for e in eye], labels=labels)


def synthesize(family, coeffs):
    """Algebra element ``sum_j c_j B_j``."""
    c = np.asarray(coeffs, dtype=complex)
    if c.shape != (len(family),):
        raise DimMismatch(f"expected {len(family)} coefficients, got shape {c.shape}")
    out = np.zeros((family.dim, family.dim), dtype=complex)
    for cj, bj in zip(c, family.projectors):
        out = out + cj * bj
    return out


def pinch(family, op):
    """``sum_j B_j A B_j``."""
    A = as_operator(op)
    return sum(b @ A @ b for b in family.projectors)


def decompose(family, op, tol=TOL):
    """Coefficients of ``op`` in the algebra generated by ``family``.

    Raises :class:`NotInAlgebra` unless ``op`` equals its pinching and each
    block ``B_j A B_j`` is a scalar multiple of ``B_j``.
    """
    A = as_operator(op)
    if A.shape[0] != family.dim:
        raise DimMismatch(f"operator dim {A.shape[0]} against family dim {family.dim}")
    residual = norm(A - pinch(family, A))
    coeffs = np.zeros(len(family), dtype=complex)
    for j, b in enumerate(family.projectors):
        block = b @ A @ b
        coeffs[j] = np.trace(block) / np.trace(b).real
        residual = max(residual, norm(block - coeffs[j] * b))
    if residual > tol:
        raise NotInAlgebra(residual)
    return coeffs


def family_to_list(family):
    return [operator_to_dict(b) for b in family.projectors]


def family_from_list(data, labels=None):
    return build_family([operator_from_dict(d) for d in data], labels=labels)
