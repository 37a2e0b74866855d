"""Reference models: the constrained center and range method (CCRM) and the
univariate mid/spread M model.

Both regress outcome centers on predictor centers by ordinary least squares
and outcome ranges on predictor ranges with nonnegative coefficients. CCRM
maps into the cone-affine parameter space with ``alpha_j = beta_j + gamma_j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .activeset import bounded_lstsq
from .exceptions import DomainError, SingularDesignError
from .interval import Interval, IntervalDataset
from .regression import Prediction, clamp_bounds, pack


@dataclass(frozen=True)
class CcrmFit:
    beta0_C: float
    beta1_C: np.ndarray
    beta0_R: float
    beta1_R: np.ndarray
    resid_var_C: float
    resid_var_R: float
    predictor_names: tuple[str, ...] = ()

    @property
    def p(self) -> int:
        return self.beta1_C.size

    def to_cone(self) -> np.ndarray:
        """Equivalent coefficient vector ``(eta, alpha, beta, theta, gamma)``.

        Rewriting the center/range equations in lower/upper bounds gives
        ``eta = b0C - b0R/2``, ``alpha = (b1C + b1R)/2``, ``beta = (b1C - b1R)/2``,
        ``theta = b0R`` and ``gamma = b1R``.
        """
        beta = 0.5 * (self.beta1_C - self.beta1_R)
        # alpha = beta + gamma written literally so the reduced form holds bit for bit
        return pack(self.beta0_C - 0.5 * self.beta0_R, beta + self.beta1_R, beta,
                    self.beta0_R, self.beta1_R)


@dataclass(frozen=True)
class MModelFit:
    slope_C: float
    intercept_C: float
    abs_slope_R: float
    spr_eps_mean: float
    predictor_names: tuple[str, ...] = ()

    @property
    def p(self) -> int:
        return 1


def _design(cols):
    n = cols.shape[0]
    return np.column_stack([np.ones(n), cols])


def _require_full_rank(A, what):
    col = linalg.deficient_column(A)
    if col is not None:
        raise SingularDesignError(f"{what} design is rank deficient at column {col}", column=col)


def _ols(A, y):
    return linalg.solve_spd(A.T @ A, A.T @ y)


def _nonneg(A, y):
    return bounded_lstsq(A, y, np.arange(A.shape[1])).x


def fit_ccrm(data: IntervalDataset) -> CcrmFit:
    """Center equation by OLS, range equation by nonnegative least squares."""
    n, p = data.n, data.p
    if n < p + 2:
        raise DomainError(f"CCRM needs n >= p + 2, got n={n}, p={p}")
    Ac = _design(data.x_center)
    Ar = _design(data.x_range)
    _require_full_rank(Ac, "center")
    _require_full_rank(Ar, "range")
    bc = _ols(Ac, data.y_center)
    br = _nonneg(Ar, data.y_range)
    dof = n - p - 1
    rc = data.y_center - Ac @ bc
    rr = data.y_range - Ar @ br
    return CcrmFit(float(bc[0]), bc[1:], float(br[0]), br[1:],
                   float(rc @ rc) / dof, float(rr @ rr) / dof, data.predictor_names)


def fit_m_model(data: IntervalDataset) -> MModelFit:
    """Univariate mid/spread fit.

    The spread part is least squares of ``Y^R`` on ``X^R`` with slope and
    intercept both held nonnegative; the intercept estimates the mean spread
    of the error.
    """
    if data.p != 1:
        raise DomainError("the M model is defined for a single predictor only")
    if data.n < 3:
        raise DomainError("the M model needs at least three observations")
    Ac = _design(data.x_center)
    Ar = _design(data.x_range)
    _require_full_rank(Ac, "center")
    _require_full_rank(Ar, "range")
    bc = _ols(Ac, data.y_center)
    br = _nonneg(Ar, data.y_range)
    return MModelFit(float(bc[1]), float(bc[0]), float(br[1]), float(br[0]),
                     data.predictor_names)


def baseline_bounds(fit: CcrmFit | MModelFit, x_lower, x_upper):
    """Clamped predicted ``(lower, upper, clamped)`` arrays."""
    x_lower = np.atleast_2d(np.asarray(x_lower, dtype=float))
    x_upper = np.atleast_2d(np.asarray(x_upper, dtype=float))
    if x_lower.shape[1] != fit.p:
        raise DomainError(f"model has {fit.p} predictors, got {x_lower.shape[1]}")
    xc = 0.5 * (x_lower + x_upper)
    xr = x_upper - x_lower
    if isinstance(fit, CcrmFit):
        center = fit.beta0_C + xc @ fit.beta1_C
        rng = fit.beta0_R + xr @ fit.beta1_R
    else:
        center = fit.intercept_C + fit.slope_C * xc[:, 0]
        rng = fit.spr_eps_mean + fit.abs_slope_R * xr[:, 0]
    return clamp_bounds(center - 0.5 * rng, center + 0.5 * rng)


def predict_baseline(fit: CcrmFit | MModelFit, predictors: Sequence[Interval]) -> Prediction:
    predictors = list(predictors)
    if len(predictors) != fit.p:
        raise DomainError(f"model has {fit.p} predictors, got {len(predictors)}")
    lo, up, bad = baseline_bounds(fit, [[iv.lower for iv in predictors]],
                                  [[iv.upper for iv in predictors]])
    return Prediction(Interval(lo[0], up[0]), bool(bad[0]))
