"""Primal active-set solver for least squares with some nonnegative coordinates.

Solves ``min ||A x - b||^2`` subject to ``x[i] >= 0`` for ``i`` in a given
index set, all other coordinates free. The solver works on the normal
equations, which is adequate for the small well-posed designs used here.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, solve_spd


@dataclass(frozen=True)
class BoundedLstsqResult:
    x: np.ndarray
    active: tuple[int, ...]
    multipliers: np.ndarray
    iterations: int
    converged: bool


class ActiveSetWarning(RuntimeWarning):
    pass


def _solve_on(H, c, free):
    x = np.zeros(H.shape[0])
    if free.size:
        x[free] = solve_spd(H[np.ix_(free, free)], c[free])
    return x


def bounded_lstsq(A, b, bounded, max_iter=None, tol=None) -> BoundedLstsqResult:
    """Least squares with nonnegativity on the coordinates listed in `bounded`.

    Starts from the unconstrained solution, clamps violated bounds into the
    active set and alternates between re-solving the reduced problem and
    either stepping to the first blocking bound or releasing the bound with
    the most negative multiplier.

    Parameters
    ----------
    A : array_like, shape (m, n)
    b : array_like, shape (m,)
    bounded : sequence of int
        Coordinates constrained to be nonnegative.
    max_iter : int, optional
        Defaults to ``10 * len(bounded)``.
    tol : float, optional
        Multiplier tolerance; defaults to ``1e-10 * max(1, |A^T b|_inf)``.

    Returns
    -------
    BoundedLstsqResult
        ``multipliers`` holds the gradient ``A^T (A x - b)`` on the active set,
        nonnegative at an optimum.
    """
    A = as_matrix(A)
    b = np.asarray(b, dtype=float)
    n = A.shape[1]
    bounded = np.unique(np.asarray(bounded, dtype=int))
    H = A.T @ A
    c = A.T @ b
    if tol is None:
        tol = 1e-10 * max(1.0, float(np.abs(c).max(initial=0.0)))
    if max_iter is None:
        max_iter = max(10 * bounded.size, 1)

    x = solve_spd(H, c)
    if bounded.size == 0 or np.all(x[bounded] >= 0):
        return BoundedLstsqResult(x, (), np.zeros(0), 0, True)

    is_bounded = np.zeros(n, dtype=bool)
    is_bounded[bounded] = True
    active = np.zeros(n, dtype=bool)
    viol = is_bounded & (x < 0)
    active[viol] = True
    x[viol] = 0.0

    converged = False
    it = 0
    while it < max_iter:
        it += 1
        free = np.flatnonzero(~active)
        z = _solve_on(H, c, free)
        blocking = free[is_bounded[free] & (z[free] < 0)]
        if blocking.size == 0:
            x = z
            grad = H @ x - c
            act = np.flatnonzero(active)
            if act.size == 0 or grad[act].min() >= -tol:
                converged = True
                break
            active[act[np.argmin(grad[act])]] = False
            continue
        # Step from the feasible x towards z until the first bound blocks.
        ratios = x[blocking] / (x[blocking] - z[blocking])
        k = np.argmin(ratios)
        t = float(np.clip(ratios[k], 0.0, 1.0))
        x = x + t * (z - x)
        hit = blocking[k]
        x[hit] = 0.0
        active[hit] = True
        tiny = is_bounded & ~active & (x <= 0)
        active[tiny] = True
        x[tiny] = 0.0

    if not converged:
        warnings.warn(f"active-set solver stopped after {max_iter} iterations",
                      ActiveSetWarning, stacklevel=2)
    act = np.flatnonzero(active)
    x[act] = 0.0
    grad = H @ x - c
    return BoundedLstsqResult(x, tuple(int(i) for i in act), grad[act], it, converged)


def kkt_violation(A, b, x, bounded) -> float:
    """Largest KKT violation of `x` for the bounded problem, using the gradient
    of ``||A x - b||^2``.

    Free coordinates contribute ``|grad_i|``, coordinates sitting on their
    bound contribute ``max(-grad_i, 0)``, and infeasibility contributes
    ``max(-x_i, 0)``.
    """
    A = as_matrix(A)
    x = np.asarray(x, dtype=float)
    grad = 2.0 * (A.T @ (A @ x - np.asarray(b, dtype=float)))
    at_bound = np.zeros(x.size, dtype=bool)
    bounded = np.asarray(bounded, dtype=int)
    at_bound[bounded] = x[bounded] <= 0
    worst = 0.0
    if np.any(~at_bound):
        worst = float(np.abs(grad[~at_bound]).max())
    if np.any(at_bound):
        worst = max(worst, float(np.maximum(-grad[at_bound], 0).max()))
    if bounded.size:
        worst = max(worst, float(np.maximum(-x[bounded], 0).max()))
    return worst
