"""Interval value type, the delta metric and collinearity predicates.

An interval ``[L, U]`` is identified with the point ``(L, U)`` of the cone
``{(x, y) : x <= y}``; all geometry in this package happens in that plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import DomainError

#: Inversions ``lower - upper`` up to this size are treated as float noise.
SNAP_TOLERANCE = 1e-12


def _check_bounds(lower, upper):
    """Return ``(lower, upper)`` after applying the snap rule."""
    lower = float(lower)
    upper = float(upper)
    if not (math.isfinite(lower) and math.isfinite(upper)):
        raise DomainError(f"interval bounds must be finite, got [{lower}, {upper}]")
    if lower > upper:
        if lower - upper <= SNAP_TOLERANCE:
            mid = 0.5 * (lower + upper)
            return mid, mid
        raise DomainError(f"lower bound {lower} exceeds upper bound {upper}")
    return lower, upper


@dataclass(frozen=True, slots=True)
class Interval:
    """Closed bounded interval ``[lower, upper]``.

    Construction snaps ``lower > upper`` to a point interval when the
    violation is at most :data:`SNAP_TOLERANCE`; larger violations raise
    :class:`~conereg.exceptions.DomainError`.
    """

    lower: float
    upper: float

    def __post_init__(self):
        lower, upper = _check_bounds(self.lower, self.upper)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def from_center_range(cls, center: float, range_: float) -> Interval:
        """Build ``[center - range/2, center + range/2]``."""
        if range_ < 0:
            raise DomainError(f"range must be nonnegative, got {range_}")
        half = 0.5 * float(range_)
        return cls(center - half, center + half)

    @property
    def center(self) -> float:
        return 0.5 * (self.upper + self.lower)

    @property
    def range(self) -> float:
        return self.upper - self.lower

    @property
    def radius(self) -> float:
        return 0.5 * (self.upper - self.lower)

    def as_point(self) -> tuple[float, float]:
        """The ``(L, U)`` representation in the cone."""
        return (self.lower, self.upper)

    def __iter__(self):
        yield self.lower
        yield self.upper

    def __str__(self):
        return f"[{self.lower:g}, {self.upper:g}]"


def from_center_range(center: float, range_: float) -> Interval:
    return Interval.from_center_range(center, range_)


def delta_metric(a: Interval, b: Interval) -> float:
    """Distance ``sqrt(((aL - bL)**2 + (aU - bU)**2) / 2)``.

    This is the Euclidean distance of the cone embedding scaled by
    ``1/sqrt(2)``, so it is a metric.
    """
    return math.sqrt(0.5 * (a.lower - b.lower) ** 2 + 0.5 * (a.upper - b.upper) ** 2)


@dataclass(frozen=True)
class Collinearity:
    """Outcome of :func:`is_collinear`.

    ``a, b`` describe ``U = a*L + b`` and ``c, d`` the equivalent
    ``R = c*C + d``. For a vertical ray (all lower bounds equal) ``a`` and
    ``b`` are ``None`` and ``c, d = 2, -2*L``. For ``a == -1`` (constant
    center) ``c`` and ``d`` are ``None``.
    """

    collinear: bool
    a: float | None
    b: float | None
    c: float | None
    d: float | None
    vertical: bool = False
    max_residual: float = 0.0
    side_conditions: bool = True
    notes: tuple[str, ...] = field(default_factory=tuple)


def lu_to_cr_line(a: float, b: float) -> tuple[float, float]:
    """Convert ``U = aL + b`` into ``R = cC + d``."""
    if a == -1:
        raise DomainError("a = -1 corresponds to a constant center, no (c, d) form")
    return 2.0 * (a - 1.0) / (a + 1.0), 2.0 * b / (a + 1.0)


def cr_to_lu_line(c: float, d: float) -> tuple[float, float]:
    """Convert ``R = cC + d`` into ``U = aL + b`` (inverse of :func:`lu_to_cr_line`)."""
    if c == 2:
        raise DomainError("c = 2 corresponds to a vertical ray, no (a, b) form")
    return (2.0 + c) / (2.0 - c), 2.0 * d / (2.0 - c)


def is_collinear(points: Sequence[Interval], tolerance: float = 1e-9) -> Collinearity:
    """Decide whether intervals lie on one ray of the cone.

    A least-squares line ``U = a*L + b`` is fitted to the ``(L, U)`` points;
    the set is collinear when every residual is at most `tolerance` and the
    points lie on the in-cone part of the line: ``L >= -b/(a-1)`` for
    ``a > 1``, ``L <= -b/(a-1)`` for ``a < 1`` and ``b >= 0`` for ``a == 1``.
    """
    if tolerance <= 0:
        raise DomainError("tolerance must be positive")
    if len(points) < 2:
        raise DomainError("collinearity needs at least two intervals")
    lo = np.array([p.lower for p in points], dtype=float)
    up = np.array([p.upper for p in points], dtype=float)

    spread = lo.max() - lo.min()
    if spread <= tolerance * max(1.0, np.abs(lo).max()):
        # Vertical ray L = const; in center/range terms R = 2C - 2L.
        l0 = float(lo.mean())
        resid = float(np.abs(lo - l0).max())
        return Collinearity(True, None, None, 2.0, -2.0 * l0, vertical=True,
                            max_residual=resid)

    A = np.column_stack([lo, np.ones_like(lo)])
    (a, b), *_ = np.linalg.lstsq(A, up, rcond=None)
    a, b = float(a), float(b)
    resid = float(np.abs(up - (a * lo + b)).max())

    slack = tolerance
    if abs(a - 1.0) <= tolerance:
        side = b >= -slack
    elif a > 1.0:
        side = bool(np.all(lo >= -b / (a - 1.0) - slack))
    else:
        side = bool(np.all(lo <= -b / (a - 1.0) + slack))

    if abs(a + 1.0) <= 1e-15:
        c = d = None
    else:
        c, d = lu_to_cr_line(a, b)
    return Collinearity(resid <= tolerance and side, a, b, c, d,
                        max_residual=resid, side_conditions=side)


@dataclass(frozen=True)
class IntervalDataset:
    """``n`` observations of ``p`` interval predictors and one interval outcome.

    Bounds are held as float arrays: ``x_lower``/``x_upper`` have shape
    ``(n, p)`` and ``y_lower``/``y_upper`` shape ``(n,)``. The arrays are
    made read-only on construction.
    """

    x_lower: np.ndarray
    x_upper: np.ndarray
    y_lower: np.ndarray
    y_upper: np.ndarray
    predictor_names: tuple[str, ...] = ()

    def __post_init__(self):
        xl = np.array(self.x_lower, dtype=float, ndmin=2)
        xu = np.array(self.x_upper, dtype=float, ndmin=2)
        yl = np.array(self.y_lower, dtype=float).reshape(-1)
        yu = np.array(self.y_upper, dtype=float).reshape(-1)
        if xl.shape != xu.shape:
            raise DomainError(f"predictor bound shapes differ: {xl.shape} vs {xu.shape}")
        if yl.shape != yu.shape:
            raise DomainError("outcome bound shapes differ")
        n, p = xl.shape
        if n < 1 or p < 1:
            raise DomainError(f"need n >= 1 and p >= 1, got n={n}, p={p}")
        if yl.shape[0] != n:
            raise DomainError(f"{n} predictor rows but {yl.shape[0]} outcomes")
        for arr in (xl, xu, yl, yu):
            if not np.all(np.isfinite(arr)):
                raise DomainError("interval bounds must be finite")
        xl, xu = _snap(xl, xu, "predictor")
        yl, yu = _snap(yl, yu, "outcome")
        names = tuple(self.predictor_names) or tuple(f"x{j + 1}" for j in range(p))
        if len(names) != p:
            raise DomainError(f"{len(names)} predictor names for {p} predictors")
        for name, arr in (("x_lower", xl), ("x_upper", xu), ("y_lower", yl), ("y_upper", yu)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "predictor_names", names)

    @classmethod
    def from_intervals(cls, predictors: Sequence[Sequence[Interval]],
                       outcome: Sequence[Interval],
                       predictor_names: Sequence[str] = ()) -> IntervalDataset:
        """Build from an ``n x p`` grid of predictor intervals and ``n`` outcomes."""
        rows = [list(r) for r in predictors]
        if not rows:
            raise DomainError("dataset needs at least one observation")
        p = len(rows[0])
        if any(len(r) != p for r in rows):
            raise DomainError("all rows must have the same number of predictors")
        xl = [[iv.lower for iv in r] for r in rows]
        xu = [[iv.upper for iv in r] for r in rows]
        return cls(xl, xu, [iv.lower for iv in outcome], [iv.upper for iv in outcome],
                   tuple(predictor_names))

    @property
    def n(self) -> int:
        return self.x_lower.shape[0]

    @property
    def p(self) -> int:
        return self.x_lower.shape[1]

    @property
    def x_center(self) -> np.ndarray:
        return 0.5 * (self.x_lower + self.x_upper)

    @property
    def x_range(self) -> np.ndarray:
        return self.x_upper - self.x_lower

    @property
    def y_center(self) -> np.ndarray:
        return 0.5 * (self.y_lower + self.y_upper)

    @property
    def y_range(self) -> np.ndarray:
        return self.y_upper - self.y_lower

    def predictor(self, i: int, j: int) -> Interval:
        return Interval(self.x_lower[i, j], self.x_upper[i, j])

    def outcome(self, i: int) -> Interval:
        return Interval(self.y_lower[i], self.y_upper[i])

    def row(self, i: int) -> list[Interval]:
        return [self.predictor(i, j) for j in range(self.p)]

    def subset(self, rows) -> IntervalDataset:
        return IntervalDataset(self.x_lower[rows], self.x_upper[rows], self.y_lower[rows],
                               self.y_upper[rows], self.predictor_names)


def _snap(lower, upper, what):
    gap = lower - upper
    bad = gap > SNAP_TOLERANCE
    if np.any(bad):
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise DomainError(f"{what} lower bound exceeds upper bound at index {idx}")
    noisy = gap > 0
    if np.any(noisy):
        lower = lower.copy()
        upper = upper.copy()
        mid = 0.5 * (lower[noisy] + upper[noisy])
        lower[noisy] = mid
        upper[noisy] = mid
    return lower, upper
