"""Least-squares estimation of the cone-affine interval regression model.

For ``p`` interval predictors the model is

    Y^L = sum_j (alpha_j X_j^L + beta_j X_j^U) + eta + e^L
    Y^U = sum_j ((alpha_j - gamma_j) X_j^L + (beta_j + gamma_j) X_j^U) + eta + theta + e^U

so that the outcome range is ``sum_j gamma_j X_j^R + theta + e^U - e^L``.
Coefficients are always ordered ``(eta, alpha_1, beta_1, ..., alpha_p,
beta_p, theta, gamma_1, ..., gamma_p)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy import stats

from . import linalg
from .activeset import bounded_lstsq
from .exceptions import DiagnosticsError, DomainError, SingularDesignError, SingularMatrixError
from .interval import Interval, IntervalDataset

ILL_CONDITIONED = 1e12


class ConditioningWarning(RuntimeWarning):
    """The normal equations are factorizable but badly conditioned."""


def n_coef(p: int) -> int:
    return 3 * p + 2


def coef_names(p: int) -> list[str]:
    names = ["eta"]
    for j in range(1, p + 1):
        names += [f"alpha_{j}", f"beta_{j}"]
    names.append("theta")
    names += [f"gamma_{j}" for j in range(1, p + 1)]
    return names


def range_indices(p: int) -> np.ndarray:
    """Positions of ``theta, gamma_1..gamma_p`` in the coefficient vector."""
    return np.arange(2 * p + 1, 3 * p + 2)


def pack(eta, alpha, beta, theta, gamma) -> np.ndarray:
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
    ab = np.column_stack([alpha, beta]).reshape(-1)
    return np.concatenate([[eta], ab, [theta], gamma])


def unpack(coef) -> dict:
    coef = np.asarray(coef, dtype=float)
    p = (coef.size - 2) // 3
    if coef.size != n_coef(p):
        raise DomainError(f"coefficient vector of length {coef.size} is not 3p + 2")
    return {
        "eta": float(coef[0]),
        "alpha": coef[1:2 * p + 1:2].copy(),
        "beta": coef[2:2 * p + 1:2].copy(),
        "theta": float(coef[2 * p + 1]),
        "gamma": coef[2 * p + 2:].copy(),
    }


@dataclass(frozen=True)
class DesignMatrices:
    """Blocks of the stacked system ``Y = X coef + e``.

    ``X1`` is ``[1, X_1^L, X_1^U, ..., X_p^L, X_p^U]``, ``X2`` is
    ``[1, X_1^R, ..., X_p^R]`` and ``X = [[X1, 0], [X1, X2]]`` with
    ``Y = [Y^L; Y^U]``.
    """

    X1: np.ndarray
    X2: np.ndarray
    X: np.ndarray
    Y: np.ndarray


def lower_design(x_lower, x_upper) -> np.ndarray:
    x_lower = np.atleast_2d(x_lower)
    n, p = x_lower.shape
    X1 = np.empty((n, 2 * p + 1))
    X1[:, 0] = 1.0
    X1[:, 1::2] = x_lower
    X1[:, 2::2] = x_upper
    return X1


def range_design(x_lower, x_upper) -> np.ndarray:
    x_lower = np.atleast_2d(x_lower)
    n = x_lower.shape[0]
    return np.column_stack([np.ones(n), np.atleast_2d(x_upper) - x_lower])


def stacked_design(x_lower, x_upper) -> np.ndarray:
    X1 = lower_design(x_lower, x_upper)
    X2 = range_design(x_lower, x_upper)
    n = X1.shape[0]
    X = np.zeros((2 * n, X1.shape[1] + X2.shape[1]))
    X[:n, :X1.shape[1]] = X1
    X[n:, :X1.shape[1]] = X1
    X[n:, X1.shape[1]:] = X2
    return X


def build_design(data: IntervalDataset) -> DesignMatrices:
    X1 = lower_design(data.x_lower, data.x_upper)
    X2 = range_design(data.x_lower, data.x_upper)
    X = stacked_design(data.x_lower, data.x_upper)
    Y = np.concatenate([data.y_lower, data.y_upper])
    return DesignMatrices(X1, X2, X, Y)


def predict_bounds(coef, x_lower, x_upper) -> tuple[np.ndarray, np.ndarray]:
    """Raw predicted bounds (no clamping) for arrays of predictor bounds."""
    parts = unpack(coef)
    x_lower = np.atleast_2d(x_lower)
    x_upper = np.atleast_2d(x_upper)
    lo = x_lower @ parts["alpha"] + x_upper @ parts["beta"] + parts["eta"]
    width = (x_upper - x_lower) @ parts["gamma"] + parts["theta"]
    return lo, lo + width


def lse_objective(data: IntervalDataset, coef) -> float:
    """Sum of squared lower-bound and upper-bound errors."""
    lo, up = predict_bounds(coef, data.x_lower, data.x_upper)
    return float(np.sum((data.y_lower - lo) ** 2) + np.sum((data.y_upper - up) ** 2))


@dataclass
class FittedModel:
    """Fitted coefficients with their estimated error variance and covariance.

    ``covariance`` is ``(X^T X)^{-1} * sigma2_hat`` and is materialized on
    first access. For constrained fits it is the unconstrained formula
    evaluated at the constrained ``sigma2_hat``; no separate theory backs it.
    """

    coef: np.ndarray
    sigma2_hat: float
    constrained: bool
    residuals_L: np.ndarray
    residuals_U: np.ndarray
    predictor_names: tuple[str, ...]
    xtx: np.ndarray = field(repr=False)
    dof: int = 0
    active: tuple[int, ...] = ()
    warnings: list[str] = field(default_factory=list)

    @property
    def p(self) -> int:
        return (self.coef.size - 2) // 3

    @property
    def eta(self) -> float:
        return float(self.coef[0])

    @property
    def alpha(self) -> np.ndarray:
        return self.coef[1:2 * self.p + 1:2]

    @property
    def beta(self) -> np.ndarray:
        return self.coef[2:2 * self.p + 1:2]

    @property
    def theta(self) -> float:
        return float(self.coef[2 * self.p + 1])

    @property
    def gamma(self) -> np.ndarray:
        return self.coef[2 * self.p + 2:]

    @cached_property
    def covariance(self) -> np.ndarray:
        return linalg.inverse_spd(self.xtx) * self.sigma2_hat

    @property
    def standard_errors(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    @property
    def rss(self) -> float:
        return float(self.residuals_L @ self.residuals_L + self.residuals_U @ self.residuals_U)

    @property
    def positive(self) -> bool:
        """Whether ``theta`` and every ``gamma_j`` are nonnegative."""
        return bool(self.theta >= 0 and np.all(self.gamma >= 0))

    def names(self) -> list[str]:
        return coef_names(self.p)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names(), map(float, self.coef)))


def _checked_design(data: IntervalDataset, rank_tol: float):
    p = data.p
    dof = 2 * data.n - n_coef(p)
    if data.n < 2:
        raise DomainError("need at least two observations")
    if dof < 1:
        raise DomainError(
            f"insufficient degrees of freedom: 2n - 3p - 2 = {dof} for n={data.n}, p={p}")
    design = build_design(data)
    col = linalg.deficient_column(design.X, rank_tol)
    if col is not None:
        name = coef_names(p)[col]
        raise SingularDesignError(
            f"design matrix is rank deficient; column for {name!r} is dependent on the others",
            column=name)
    return design, dof


def _factor(xtx, notes):
    try:
        G = linalg.cholesky(xtx)
    except SingularMatrixError as exc:
        raise SingularDesignError(str(exc), pivot=exc.pivot) from exc
    cond = linalg.condition_estimate(xtx, G)
    if cond > ILL_CONDITIONED:
        msg = f"normal equations are ill-conditioned (condition estimate {cond:.2e})"
        warnings.warn(msg, ConditioningWarning, stacklevel=3)
        notes.append(msg)
    return G


def _model(data, design, coef, dof, xtx, constrained, active=(), notes=None):
    resid = design.Y - design.X @ coef
    n = data.n
    rL, rU = resid[:n].copy(), resid[n:].copy()
    sigma2 = float(resid @ resid) / dof
    return FittedModel(coef=coef, sigma2_hat=sigma2, constrained=constrained,
                       residuals_L=rL, residuals_U=rU,
                       predictor_names=data.predictor_names, xtx=xtx, dof=dof,
                       active=tuple(active), warnings=list(notes or []))


def fit_unconstrained(data: IntervalDataset,
                      rank_tol: float = linalg.DEFAULT_RANK_TOL) -> FittedModel:
    """Closed-form least squares ``(X^T X)^{-1} X^T Y``.

    ``sigma2_hat`` divides the residual sum of squares by ``2n - 3p - 2``.
    Negative ``theta``/``gamma`` estimates are returned as they are.

    Raises
    ------
    SingularDesignError
        If the stacked design is rank deficient.
    DomainError
        If ``2n - 3p - 2 < 1``.
    """
    design, dof = _checked_design(data, rank_tol)
    notes: list[str] = []
    xtx = design.X.T @ design.X
    G = _factor(xtx, notes)
    rhs = design.X.T @ design.Y
    coef = linalg.cho_solve(G, rhs)
    coef = coef + linalg.cho_solve(G, rhs - xtx @ coef)
    return _model(data, design, coef, dof, xtx, constrained=False, notes=notes)


def fit_constrained(data: IntervalDataset,
                    rank_tol: float = linalg.DEFAULT_RANK_TOL) -> FittedModel:
    """Least squares subject to ``theta >= 0`` and ``gamma_j >= 0``.

    ``eta``, ``alpha_j`` and ``beta_j`` stay free. ``sigma2_hat`` keeps the
    unconstrained divisor ``2n - 3p - 2``.
    """
    design, dof = _checked_design(data, rank_tol)
    notes: list[str] = []
    xtx = design.X.T @ design.X
    _factor(xtx, notes)
    p = data.p
    res = bounded_lstsq(design.X, design.Y, range_indices(p), max_iter=10 * (p + 1))
    if not res.converged:
        notes.append("active-set solver hit its iteration cap")
    notes.append("sigma2_hat of a constrained fit reuses the unconstrained divisor 2n - 3p - 2")
    return _model(data, design, res.x, dof, xtx, constrained=True, active=res.active,
                  notes=notes)


def fit(data: IntervalDataset, constrained: str = "auto") -> FittedModel:
    """Fit with a positivity policy.

    ``"never"`` returns the closed-form fit, ``"always"`` the constrained fit,
    and ``"auto"`` the closed-form fit unless it has a negative ``theta`` or
    ``gamma_j``, in which case the constrained fit.
    """
    if constrained == "never":
        return fit_unconstrained(data)
    if constrained == "always":
        return fit_constrained(data)
    if constrained != "auto":
        raise DomainError(f"unknown constraint policy {constrained!r}")
    model = fit_unconstrained(data)
    if model.positive:
        return model
    return fit_constrained(data)


@dataclass(frozen=True)
class PositivityDiagnostics:
    """Range-based view of the ``theta``/``gamma`` estimates.

    ``range_cov_matrix[k, j]`` and ``range_cross_cov[k]`` are the 1/n sample
    covariances of predictor ranges among themselves and with the outcome
    range. ``negative_range_bound[i]`` is ``2 * sigma2_hat / (Y_i^R)**2``,
    an upper bound on the probability of a negative predicted range at row
    ``i`` (``inf`` where the observed range is zero).
    """

    range_cov_matrix: np.ndarray
    range_cross_cov: np.ndarray
    gamma_from_ranges: np.ndarray
    theta_from_ranges: float
    assumption1_ok: bool
    assumption2_ok: bool
    negative_range_bound: np.ndarray
    range_corr_pvalues: np.ndarray
    matches_fit: bool | None = None


def range_covariances(data: IntervalDataset) -> tuple[np.ndarray, np.ndarray]:
    """``(S, s)``: 1/n covariance matrix of predictor ranges and their
    covariances with the outcome range."""
    XR = data.x_range
    YR = data.y_range
    XRc = XR - XR.mean(axis=0)
    YRc = YR - YR.mean()
    n = data.n
    return XRc.T @ XRc / n, XRc.T @ YRc / n


def assumption2_holds(data: IntervalDataset) -> bool:
    """Every predictor range has positive sample covariance with the outcome range."""
    _, s = range_covariances(data)
    return bool(np.all(s > 0))


def _range_corr_pvalues(XR) -> np.ndarray:
    p = XR.shape[1]
    out = np.ones((p, p))
    for k in range(p):
        for j in range(k + 1, p):
            a, b = XR[:, k], XR[:, j]
            if np.ptp(a) == 0 or np.ptp(b) == 0 or XR.shape[0] < 3:
                pv = 1.0
            else:
                pv = float(stats.pearsonr(a, b).pvalue)
            out[k, j] = out[j, k] = pv
    return out


def positivity_diagnostics(data: IntervalDataset, fit: FittedModel | None = None,
                           alpha_level: float = 0.05,
                           atol: float = 1e-8) -> PositivityDiagnostics:
    """Solve the range covariance system for ``gamma`` and ``theta`` and check
    the two positivity assumptions.

    Predictor ranges count as mutually uncorrelated when every pairwise
    Pearson test has p-value above `alpha_level`. When `fit` is given its
    ``sigma2_hat`` feeds the negative-range bound and ``matches_fit`` records
    whether the closed-form ``theta``/``gamma`` agree with the range system to
    `atol` (only meaningful for unconstrained fits).

    Raises
    ------
    DiagnosticsError
        If the range covariance matrix is singular.
    """
    S, s = range_covariances(data)
    try:
        gamma = linalg.solve_spd(S, s)
    except SingularMatrixError as exc:
        raise DiagnosticsError(
            "predictor ranges are collinear; range covariance matrix is singular") from exc
    theta = float(data.y_range.mean() - data.x_range.mean(axis=0) @ gamma)
    pvals = _range_corr_pvalues(data.x_range)
    off = ~np.eye(data.p, dtype=bool)
    a1 = bool(np.all(pvals[off] > alpha_level)) if data.p > 1 else True
    a2 = bool(np.all(s > 0))

    if fit is not None:
        sigma2 = fit.sigma2_hat
        yr2 = data.y_range ** 2
        with np.errstate(divide="ignore"):
            bound = np.where(yr2 > 0, 2.0 * sigma2 / np.where(yr2 > 0, yr2, 1.0), np.inf)
        matches = None
        if not fit.constrained:
            scale = 1.0 + max(abs(theta), float(np.abs(gamma).max()))
            matches = bool(abs(fit.theta - theta) <= atol * scale
                           and np.all(np.abs(fit.gamma - gamma) <= atol * scale))
    else:
        bound = np.full(data.n, np.nan)
        matches = None
    return PositivityDiagnostics(S, s, gamma, theta, a1, a2, bound, pvals, matches)


@dataclass(frozen=True)
class Prediction:
    interval: Interval
    clamped: bool


def clamp_bounds(lo, up) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Collapse inverted predictions to their midpoint.

    Returns ``(lower, upper, clamped)``.
    """
    lo = np.asarray(lo, dtype=float)
    up = np.asarray(up, dtype=float)
    bad = up < lo
    mid = 0.5 * (lo + up)
    return np.where(bad, mid, lo), np.where(bad, mid, up), bad


def predict_arrays(fit: FittedModel, x_lower, x_upper):
    """Vectorized prediction: ``(lower, upper, clamped)`` arrays."""
    x_lower = np.atleast_2d(np.asarray(x_lower, dtype=float))
    if x_lower.shape[1] != fit.p:
        raise DomainError(f"model has {fit.p} predictors, got {x_lower.shape[1]}")
    lo, up = predict_bounds(fit.coef, x_lower, x_upper)
    return clamp_bounds(lo, up)


def predict(fit: FittedModel, predictors: Sequence[Interval]) -> Prediction:
    """Predicted outcome interval for one row of predictor intervals.

    A negative predicted range (only possible with negative ``theta`` or
    ``gamma`` estimates) is rounded up to zero at the predicted center and
    flagged.
    """
    predictors = list(predictors)
    if len(predictors) != fit.p:
        raise DomainError(f"model has {fit.p} predictors, got {len(predictors)}")
    xl = np.array([[iv.lower for iv in predictors]])
    xu = np.array([[iv.upper for iv in predictors]])
    lo, up, bad = predict_arrays(fit, xl, xu)
    return Prediction(Interval(lo[0], up[0]), bool(bad[0]))


def predict_dataset(fit: FittedModel, data: IntervalDataset):
    return predict_arrays(fit, data.x_lower, data.x_upper)


@dataclass(frozen=True)
class RangeBiasCheck:
    """Constrained-fit range RSS against the constant-range model RSS."""

    applicable: bool
    lhs: float
    rhs: float
    holds: bool
    gamma_hat: float
    gamma_constrained: float


def range_bias_check(data: IntervalDataset, atol: float = 1e-9) -> RangeBiasCheck:
    """When the univariate closed-form ``gamma`` is negative, any fit with
    ``gamma >= 0`` explains the outcome ranges no better than their mean.

    Returns ``applicable=False`` when the closed-form ``gamma`` is not negative.
    """
    if data.p != 1:
        raise DomainError("this check is defined for a single predictor only")
    free = fit_unconstrained(data)
    g_hat = float(free.gamma[0])
    if g_hat >= 0:
        return RangeBiasCheck(False, np.nan, np.nan, False, g_hat, np.nan)
    con = fit_constrained(data)
    yr = data.y_range
    fitted = con.gamma[0] * data.x_range[:, 0] + con.theta
    lhs = float(np.sum((yr - fitted) ** 2))
    rhs = float(np.sum((yr - yr.mean()) ** 2))
    return RangeBiasCheck(True, lhs, rhs, lhs >= rhs - atol, g_hat, float(con.gamma[0]))
