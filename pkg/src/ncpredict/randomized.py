"""Random test instances: kets, Hermitian matrices, states, families, pmfs."""

import numpy as np

from .algebra import build_family
from .operators import DensityOperator


def random_ket(rng, dim):
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)


def random_hermitian(rng, dim, scale=1.0):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * 0.5 * (m + m.conj().T)


def random_unitary(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_pure_state(rng, dim):
    return DensityOperator.from_ket(random_ket(rng, dim))


def random_mixed_state(rng, dim, rank=None):
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    w = g @ g.conj().T
    return DensityOperator(w / np.trace(w).real)


def random_diagonal_state(rng, dim, floor=0.0):
    """Diagonal density matrix with every entry at least ``floor``."""
    p = rng.dirichlet(np.ones(dim))
    p = floor + (1.0 - dim * floor) * p
    p = p / p.sum()
    return DensityOperator(np.diag(p).astype(complex))


def random_partition(rng, dim, blocks):
    """Split ``range(dim)`` into ``blocks`` non-empty contiguous index groups."""
    cuts = np.sort(rng.choice(np.arange(1, dim), size=blocks - 1, replace=False))
    return np.split(np.arange(dim), cuts)


def random_family(rng, dim, blocks=None, rotate=True):
    """Complete family of orthogonal projectors onto blocks of a random basis."""
    blocks = dim if blocks is None else blocks
    basis = random_unitary(rng, dim) if rotate else np.eye(dim, dtype=complex)
    projectors = []
    for idx in random_partition(rng, dim, blocks):
        v = basis[:, idx]
        projectors.append(v @ v.conj().T)
    return build_family(projectors)


def random_pmf(rng, n):
    p = rng.dirichlet(np.ones(n))
    p[-1] = 1.0 - p[:-1].sum()
    return np.clip(p, 0.0, None)
