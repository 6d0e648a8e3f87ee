"""Dense linear algebra for the eigenbasis crossover.

Only two things are needed: a sample covariance and a symmetric
eigendecomposition. The decomposition is the classic cyclic Jacobi method;
its inner loops are compiled with numba because the optimizer runs one
decomposition per generation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DegenerateInputError, InvalidArgumentError, NumericalError

OFFDIAG_TOL = 1e-12
MAX_SWEEPS = 100


@dataclass(frozen=True)
class SymmetricMatrix:
    """Square matrix symmetrized as (A + A^T) / 2 at construction."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise InvalidArgumentError(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidArgumentError("matrix has non-finite entries")
        a = 0.5 * (a + a.T)
        a.flags.writeable = False
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class EigenDecomposition:
    """``C = eigenvectors @ diag(eigenvalues) @ eigenvectors.T``.

    Eigenvalues are sorted descending; each eigenvector column is signed so
    its first nonzero component is positive.
    """

    eigenvectors: np.ndarray
    eigenvalues: np.ndarray
    sweeps: int = 0

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def covariance(points) -> SymmetricMatrix:
    """Sample covariance (denominator n - 1) of the rows of ``points``."""
    x = np.asarray(points, dtype=float)
    if x.ndim != 2:
        raise InvalidArgumentError(f"points must be a 2-D array of row vectors, got shape {x.shape}")
    n = x.shape[0]
    if n < 2:
        raise DegenerateInputError(f"covariance needs at least 2 points, got {n}")
    centered = x - x.mean(axis=0)
    return SymmetricMatrix(centered.T @ centered / (n - 1))


@njit(cache=True)
def _jacobi(a, tol, max_sweeps):
    """Cyclic Jacobi on ``a`` in place. Returns (V, sweeps, converged)."""
    d = a.shape[0]
    v = np.eye(d)
    norm = 0.0
    for i in range(d):
        for j in range(d):
            norm += a[i, j] * a[i, j]
    threshold = tol * max(1.0, np.sqrt(norm))
    sweeps = 0
    while True:
        off = 0.0
        for i in range(d):
            for j in range(i + 1, d):
                off = max(off, abs(a[i, j]))
        if off < threshold:
            return v, sweeps, True
        if sweeps >= max_sweeps:
            return v, sweeps, False
        sweeps += 1
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = (1.0 if theta >= 0.0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J the (p, q) plane rotation; V <- V J
                for k in range(d):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(d):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(d):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq


def eigen_symmetric(c: SymmetricMatrix, tol: float = OFFDIAG_TOL,
                    max_sweeps: int = MAX_SWEEPS) -> EigenDecomposition:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps over all (p, q) pairs in row order until the largest off-diagonal
    magnitude drops below ``tol * max(1, ||C||_F)``; raises NumericalError
    after ``max_sweeps`` sweeps.
    """
    if not isinstance(c, SymmetricMatrix):
        c = SymmetricMatrix(c)
    a = np.array(c.entries, dtype=float)
    v, sweeps, converged = _jacobi(a, float(tol), int(max_sweeps))
    if not converged:
        off = np.abs(a - np.diag(np.diag(a))).max()
        raise NumericalError(
            f"Jacobi iteration did not converge in {max_sweeps} sweeps (max off-diagonal {off:.3e})"
        )
    values = np.diag(a).copy()
    order = np.argsort(-values, kind="stable")
    values = values[order]
    v = v[:, order]
    for j in range(v.shape[1]):
        nz = np.flatnonzero(np.abs(v[:, j]) > 1e-14)
        if nz.size and v[nz[0], j] < 0.0:
            v[:, j] = -v[:, j]
    return EigenDecomposition(v, values, int(sweeps))


def transform(m, x) -> np.ndarray:
    """Matrix-vector product ``m @ x`` with shape checking."""
    m = np.asarray(m, dtype=float)
    x = np.asarray(x, dtype=float)
    if m.ndim != 2 or x.ndim != 1 or m.shape[1] != x.shape[0]:
        raise InvalidArgumentError(f"cannot apply a {m.shape} matrix to a vector of shape {x.shape}")
    return m @ x
