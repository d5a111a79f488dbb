"""Dense complex linear algebra kernel.

Everything downstream (normal forms, tracking, slicing, lifting) funnels its
factorizations through these four operations: partial-pivoted LU solves,
Householder-QR least squares, QR-based nullspaces, and projective distance.
Ranks in this application are generic and structurally known, so no SVD is
used anywhere; nullspaces come from a pivoted QR of the conjugate transpose.

All complex square roots elsewhere in the package use the principal branch;
normal forms depend on that choice being consistent.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import RankDeficient, SingularMatrix, ZeroVector


@dataclass(frozen=True)
class Tolerances:
    """Shared numerical thresholds.

    singular_tol and rank_tol are relative: to max|A| for LU pivots and to
    |R_11| for QR diagonals.
    """

    singular_tol: float = 1e-12
    rank_tol: float = 1e-10
    witness_tol: float = 1e-7
    general_tol: float = 1e-10
    real_tol: float = 1e-6
    lift_tol: float = 1e-8
    distinct_tol: float = 1e-6


DEFAULT_TOLS = Tolerances()


def as_complex_matrix(a) -> np.ndarray:
    """Coerce to a contiguous complex128 2-D array."""
    m = np.ascontiguousarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={m.ndim}")
    return m


def lu_solve(a, b, tols: Tolerances = DEFAULT_TOLS) -> np.ndarray:
    """Solve A X = B by partially pivoted LU.

    Raises SingularMatrix when any U pivot is below singular_tol * max|A|.
    """
    a = as_complex_matrix(a)
    n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError("lu_solve needs a square matrix")
    b_arr = np.asarray(b, dtype=np.complex128)
    scale = np.abs(a).max()
    if scale == 0.0:
        raise SingularMatrix("zero matrix")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() < tols.singular_tol * scale:
        raise SingularMatrix(
            f"pivot {pivots.min():.3e} below {tols.singular_tol * scale:.3e}"
        )
    return scipy.linalg.lu_solve((lu, piv), b_arr, check_finite=False)


def lu_det(a, tols: Tolerances = DEFAULT_TOLS) -> complex:
    """Determinant via the same pivoted LU used by lu_solve."""
    a = as_complex_matrix(a)
    lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    sign = 1.0 if np.sum(piv != np.arange(a.shape[0])) % 2 == 0 else -1.0
    return sign * complex(np.prod(np.diag(lu)))


def qr_least_squares(a, b, tols: Tolerances = DEFAULT_TOLS) -> np.ndarray:
    """Minimize ||A x - b||_2 for tall A via column-pivoted Householder QR.

    Raises RankDeficient when the pivoted R diagonal drops below
    rank_tol * |R_11| (reported as a rank estimate by the factorization).
    """
    a = as_complex_matrix(a)
    m, n = a.shape
    if m < n:
        raise ValueError("qr_least_squares needs m >= n")
    b_arr = np.asarray(b, dtype=np.complex128)
    x, _, rank, _ = scipy.linalg.lstsq(
        a, b_arr, cond=tols.rank_tol, lapack_driver="gelsy", check_finite=False
    )
    if rank < n:
        raise RankDeficient(f"column rank {rank} below {n}")
    return x


def nullspace(a, tols: Tolerances = DEFAULT_TOLS) -> np.ndarray:
    """Orthonormal basis of {x : A x = 0} via pivoted QR of A^H.

    Returns an n x k matrix with unitary columns; k = n - numerical rank.
    k may be zero, in which case the result has shape (n, 0).
    """
    a = as_complex_matrix(a)
    m, n = a.shape
    q, r, _ = scipy.linalg.qr(
        a.conj().T, mode="full", pivoting=True, check_finite=False
    )
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        rank = 0
    else:
        rank = int(np.count_nonzero(diag > tols.rank_tol * diag[0]))
    return np.ascontiguousarray(q[:, rank:])


def numerical_rank(a, tols: Tolerances = DEFAULT_TOLS) -> int:
    """Numerical rank from the diagonal of a column-pivoted QR."""
    a = as_complex_matrix(a)
    _, r, _ = scipy.linalg.qr(a, mode="economic", pivoting=True, check_finite=False)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        return 0
    return int(np.count_nonzero(diag > tols.rank_tol * diag[0]))


def smallest_qr_diagonal(a) -> float:
    """Proxy for the smallest singular value: min |R_jj| of a pivoted QR."""
    a = as_complex_matrix(a)
    _, r, _ = scipy.linalg.qr(a, mode="economic", pivoting=True, check_finite=False)
    diag = np.abs(np.diag(r))
    return float(diag.min()) if diag.size else 0.0


def proj_distance(x, y) -> float:
    """sin of the Hermitian angle between the lines spanned by x and y.

    Zero iff x and y agree up to a nonzero complex scalar; 1 when orthogonal.
    """
    xv = np.asarray(x, dtype=np.complex128).ravel()
    yv = np.asarray(y, dtype=np.complex128).ravel()
    if xv.shape != yv.shape:
        raise ValueError("proj_distance needs vectors of equal length")
    nx = np.linalg.norm(xv)
    ny = np.linalg.norm(yv)
    if nx == 0.0 or ny == 0.0:
        raise ZeroVector("projective distance of a zero vector")
    c = abs(np.vdot(xv, yv)) / (nx * ny)
    return float(np.sqrt(max(0.0, 1.0 - c * c)))
