"""Dense complex linear algebra shared by the rest of the package.

Thin contracts over LAPACK (through numpy): positive-definiteness checks,
numerical nullspaces with an explicit relative rank tolerance, and least
squares with the residual norm returned alongside the solution.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_RANK_TOL = 1e-8


class LinalgError(ValueError):
    pass


class NotPositiveDefinite(LinalgError):
    pass


class NotHermitian(LinalgError):
    pass


def as_matrix(M) -> np.ndarray:
    """Coerce to a finite 2-D complex array."""
    A = np.asarray(M, dtype=complex)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    if A.ndim != 2:
        raise LinalgError(f"expected a matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise LinalgError("matrix has non-finite entries")
    return A


def cholesky_pd(M, tol: float = 1e-12) -> np.ndarray:
    """Lower-triangular L with L @ L^* == M.

    Raises NotHermitian if M deviates from M^* by more than ``tol * ||M||``
    and NotPositiveDefinite if a pivot drops to ``tol * ||M||`` or below.
    """
    A = as_matrix(M)
    n, m = A.shape
    if n != m:
        raise LinalgError(f"matrix must be square, got {A.shape}")
    scale = max(np.abs(A).max(), np.finfo(float).tiny)
    if np.abs(A - A.conj().T).max() > tol * scale:
        raise NotHermitian("matrix is not Hermitian within tolerance")
    A = (A + A.conj().T) / 2
    L = np.zeros_like(A)
    for j in range(n):
        pivot = A[j, j].real - np.vdot(L[j, :j], L[j, :j]).real
        if pivot <= tol * scale:
            raise NotPositiveDefinite(f"pivot {j} is {pivot:.3e}")
        L[j, j] = np.sqrt(pivot)
        L[j + 1:, j] = (A[j + 1:, j] - L[j + 1:, :j] @ L[j, :j].conj()) / L[j, j]
    return L


def is_positive_definite(M, tol: float = 1e-12) -> bool:
    try:
        cholesky_pd(M, tol)
    except LinalgError:
        return False
    return True


@dataclass(frozen=True)
class NullspaceResult:
    basis: list[np.ndarray]
    singular_values: np.ndarray
    rank_tolerance: float
    rank: int = field(default=0)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def matrix(self) -> np.ndarray:
        """Basis vectors as the columns of an (ncols x dim) array."""
        if not self.basis:
            return np.zeros((0, 0), dtype=complex)
        return np.column_stack(self.basis)


def nullspace(M, rel_tol: float = DEFAULT_RANK_TOL) -> NullspaceResult:
    """Right-singular vectors whose singular value is at most rel_tol * sigma_max.

    Rows of a wide matrix that has fewer singular values than columns contribute
    the trailing right-singular vectors as exact zeros.
    """
    if not 0 < rel_tol < 1:
        raise LinalgError("rel_tol must lie in (0, 1)")
    A = as_matrix(M)
    if A.size == 0:
        raise LinalgError("empty matrix")
    ncols = A.shape[1]
    _, s, Vh = np.linalg.svd(A, full_matrices=True)
    smax = s[0] if s.size else 0.0
    cutoff = rel_tol * smax
    rank = int(np.sum(s > cutoff)) if smax > 0 else 0
    basis = [Vh[k].conj() for k in range(rank, ncols)]
    return NullspaceResult(basis=basis, singular_values=s, rank_tolerance=rel_tol, rank=rank)


def lstsq(A, b) -> tuple[np.ndarray, float]:
    """Minimise ||A x - b||; returns (x, ||A x - b||)."""
    A = as_matrix(A)
    b = np.asarray(b, dtype=complex).reshape(-1)
    if A.shape[0] != b.shape[0]:
        raise LinalgError(f"shape mismatch: A is {A.shape}, b has length {b.shape[0]}")
    x, *_ = np.linalg.lstsq(A, b, rcond=None)
    return x, float(np.linalg.norm(A @ x - b))


def span_residual(basis_vectors, v) -> float:
    """Relative distance of v from the span of the given vectors."""
    v = np.asarray(v, dtype=complex)
    nv = np.linalg.norm(v)
    if nv == 0:
        return 0.0
    A = np.column_stack([np.asarray(b, dtype=complex) for b in basis_vectors])
    _, res = lstsq(A, v)
    return res / nv
