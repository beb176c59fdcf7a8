"""The parametrized triple of mutually unbiased bases in dimension 4.

The first basis is computational; the second and third are the columns of two
parametrized complex Hadamard matrices.  Every pair of vectors from distinct
bases has |overlap|^2 = 1/4, which the constructor verifies at build time
(a row/column transposition slip would fail this check immediately).
"""

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError
from .linalg import check_unitary

UNBIASED_TOL = 1e-10


@dataclass(frozen=True)
class OrthonormalBasis:
    """Columns of `vectors` (dim x dim) form the basis."""

    vectors: np.ndarray

    @property
    def dim(self):
        return self.vectors.shape[0]

    def __post_init__(self):
        g = self.vectors.conj().T @ self.vectors
        if np.max(np.abs(g - np.eye(self.dim))) > UNBIASED_TOL:
            raise ContractViolationError("basis vectors are not orthonormal")


@dataclass(frozen=True)
class ProjectiveMeasurement:
    """Rank-1 projective measurement: one projector per outcome."""

    effects: tuple

    def __len__(self):
        return len(self.effects)

    @property
    def dim(self):
        return self.effects[0].shape[0]


@dataclass(frozen=True)
class MubTriple:
    x: float
    y: float
    z: float
    basis_a: OrthonormalBasis
    basis_b: OrthonormalBasis
    basis_c: OrthonormalBasis

    @property
    def bases(self):
        return (self.basis_a, self.basis_b, self.basis_c)


def hadamard_b(x):
    ex = np.exp(1j * x)
    return 0.5 * np.array(
        [
            [1, 1, 1, 1],
            [1, 1j * ex, -1, -1j * ex],
            [1, -1, 1, -1],
            [1, -1j * ex, -1, 1j * ex],
        ]
    )


def hadamard_c(y, z):
    ey, ez = np.exp(1j * y), np.exp(1j * z)
    return 0.5 * np.array(
        [
            [1, 1, 1, 1],
            [-ey, ez, ey, -ez],
            [1, -1, 1, -1],
            [ey, ez, -ey, -ez],
        ]
    )


def mub_triple(x, y, z):
    """Build the (x, y, z) triple; raises if the bases fail unbiasedness."""
    triple = MubTriple(
        x=x,
        y=y,
        z=z,
        basis_a=OrthonormalBasis(np.eye(4, dtype=complex)),
        basis_b=OrthonormalBasis(hadamard_b(x)),
        basis_c=OrthonormalBasis(hadamard_c(y, z)),
    )
    dev = unbiasedness_report(triple)
    if dev > UNBIASED_TOL:
        raise ContractViolationError(f"bases are not mutually unbiased (dev={dev:.2e})")
    return triple


def unbiasedness_report(triple):
    """Max over all 48 cross-basis pairs of | |<u|v>|^2 - 1/4 |."""
    bases = [b.vectors for b in triple.bases]
    worst = 0.0
    for i in range(3):
        for j in range(i + 1, 3):
            overlaps = np.abs(bases[i].conj().T @ bases[j]) ** 2
            worst = max(worst, float(np.max(np.abs(overlaps - 0.25))))
    return worst


def transform_triple(triple, u):
    """Apply a unitary to all three bases simultaneously; overlaps are preserved."""
    u = check_unitary(u)
    return MubTriple(
        x=triple.x,
        y=triple.y,
        z=triple.z,
        basis_a=OrthonormalBasis(u @ triple.basis_a.vectors),
        basis_b=OrthonormalBasis(u @ triple.basis_b.vectors),
        basis_c=OrthonormalBasis(u @ triple.basis_c.vectors),
    )


def measurement_of(basis):
    effects = tuple(
        np.outer(basis.vectors[:, j], basis.vectors[:, j].conj())
        for j in range(basis.dim)
    )
    return ProjectiveMeasurement(effects=effects)


def controlled_phase(phi):
    return np.diag([1, 1, 1, np.exp(1j * phi)]).astype(complex)


def haar_random_unitary(dim, rng):
    """Haar-distributed unitary: QR of a complex Gaussian matrix with the
    R-diagonal phases folded into Q."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))
