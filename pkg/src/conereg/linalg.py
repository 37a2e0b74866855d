"""Small dense linear algebra used by the estimators.

Matrices are plain 2-D ``numpy.ndarray`` objects of floats. The design
matrices in this package are at most ``2n x (3p + 2)`` so nothing here is
tuned for large problems.
"""

from __future__ import annotations

import numpy as np

from .exceptions import DomainError, SingularMatrixError

DEFAULT_RANK_TOL = 1e-10


def as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise DomainError(f"expected a 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DomainError("matrix entries must be finite")
    return A


def matmul(A, B) -> np.ndarray:
    A = as_matrix(A)
    B = as_matrix(B)
    if A.shape[1] != B.shape[0]:
        raise DomainError(f"cannot multiply {A.shape} by {B.shape}")
    return A @ B


def transpose(A) -> np.ndarray:
    return as_matrix(A).T.copy()


def cholesky(A) -> np.ndarray:
    """Lower triangular ``G`` with ``G @ G.T == A``.

    Raises
    ------
    SingularMatrixError
        On the first pivot that is not safely positive. The pivot threshold is
        relative to the largest diagonal entry so that rank deficiency hidden
        by rounding is still caught.
    """
    A = as_matrix(A)
    n = A.shape[0]
    if A.shape[1] != n:
        raise DomainError(f"expected a square matrix, got {A.shape}")
    if n and not np.allclose(A, A.T, rtol=1e-12, atol=1e-12 * np.abs(A).max()):
        raise SingularMatrixError("matrix is not symmetric", pivot=None)
    G = np.zeros_like(A)
    scale = np.abs(np.diag(A)).max() if n else 0.0
    floor = n * np.finfo(float).eps * scale
    for k in range(n):
        piv = A[k, k] - G[k, :k] @ G[k, :k]
        if not piv > floor:
            raise SingularMatrixError(
                f"matrix is not positive definite (pivot {k} = {piv:.3g})", pivot=k)
        G[k, k] = np.sqrt(piv)
        G[k + 1:, k] = (A[k + 1:, k] - G[k + 1:, :k] @ G[k, :k]) / G[k, k]
    return G


def _forward(G, b):
    y = np.empty_like(b)
    for i in range(G.shape[0]):
        y[i] = (b[i] - G[i, :i] @ y[:i]) / G[i, i]
    return y


def _backward(G, y):
    # Solves G.T x = y for lower triangular G.
    n = G.shape[0]
    x = np.empty_like(y)
    for i in range(n - 1, -1, -1):
        x[i] = (y[i] - G[i + 1:, i] @ x[i + 1:]) / G[i, i]
    return x


def cho_solve(G, b) -> np.ndarray:
    """Solve ``A x = b`` given the Cholesky factor of ``A``."""
    b = np.asarray(b, dtype=float)
    return _backward(G, _forward(G, b))


def solve_spd(A, b, refine: bool = True) -> np.ndarray:
    """Solve ``A x = b`` for symmetric positive definite ``A``.

    One step of iterative refinement is applied by default.
    """
    A = as_matrix(A)
    b = np.asarray(b, dtype=float)
    if b.shape[0] != A.shape[0]:
        raise DomainError(f"right-hand side has {b.shape[0]} rows, matrix has {A.shape[0]}")
    G = cholesky(A)
    x = cho_solve(G, b)
    if refine:
        x = x + cho_solve(G, b - A @ x)
    return x


def inverse_spd(A) -> np.ndarray:
    A = as_matrix(A)
    G = cholesky(A)
    inv = cho_solve(G, np.eye(A.shape[0]))
    return 0.5 * (inv + inv.T)


def condition_estimate(A, G=None) -> float:
    """1-norm condition number of SPD `A`, reusing its Cholesky factor `G` if given.

    The inverse is formed column by column from the factor; the matrices
    here are small enough that this costs little more than the solve.
    """
    A = as_matrix(A)
    if A.size == 0:
        return 1.0
    if G is None:
        G = cholesky(A)
    inv = cho_solve(G, np.eye(A.shape[0]))
    return float(np.abs(A).sum(axis=0).max() * np.abs(inv).sum(axis=0).max())


def pivots_complete(A) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian elimination with complete pivoting.

    Returns the absolute pivot magnitudes in elimination order and the
    column permutation (original column index of each pivot).
    """
    M = as_matrix(A).copy()
    m, n = M.shape
    cols = np.arange(n)
    piv = []
    for k in range(min(m, n)):
        sub = np.abs(M[k:, k:])
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        i += k
        j += k
        M[[k, i]] = M[[i, k]]
        M[:, [k, j]] = M[:, [j, k]]
        cols[[k, j]] = cols[[j, k]]
        p = M[k, k]
        piv.append(abs(p))
        if p == 0:
            break
        M[k + 1:, k:] -= np.outer(M[k + 1:, k] / p, M[k, k:])
    out = np.zeros(min(m, n))
    out[:len(piv)] = piv
    return out, cols


def rank_full(A, tolerance: float = DEFAULT_RANK_TOL) -> bool:
    """True iff every complete-pivoting pivot exceeds ``tolerance`` times the largest."""
    if tolerance <= 0:
        raise DomainError("tolerance must be positive")
    A = as_matrix(A)
    m, n = A.shape
    if m < n:
        return False
    if n == 0:
        return True
    piv, _ = pivots_complete(A)
    return bool(piv.max() > 0 and piv.min() > tolerance * piv.max())


def deficient_column(A, tolerance: float = DEFAULT_RANK_TOL) -> int | None:
    """Index of a column that is (numerically) dependent on the others, if any."""
    A = as_matrix(A)
    m, n = A.shape
    if n == 0:
        return None
    piv, cols = pivots_complete(A)
    if m < n:
        return int(cols[m])
    bad = np.flatnonzero(piv <= tolerance * piv.max())
    if bad.size == 0:
        return None
    return int(cols[bad[0]])
