"""Cone-preserving affine operators on interval space."""

from __future__ import annotations

from dataclasses import dataclass

from .exceptions import DomainError, SingularRayError
from .interval import Interval


@dataclass(frozen=True)
class AffineOperator:
    """The map ``(x, y) -> (a*x + b*y + eta, (a-g)*x + (b+g)*y + eta + theta)``.

    Here ``a, b, g`` stand for `alpha`, `beta`, `gamma`. Requiring
    ``gamma >= 0`` and ``theta >= 0`` is exactly what makes the operator map
    the cone ``x <= y`` into itself.
    """

    alpha: float
    beta: float
    gamma: float
    eta: float
    theta: float

    def __post_init__(self):
        if self.gamma < 0 or self.theta < 0:
            raise DomainError(
                f"gamma and theta must be nonnegative, got gamma={self.gamma}, theta={self.theta}")

    def matrix(self):
        """Linear part as nested lists ``[[alpha, beta], [alpha-gamma, beta+gamma]]``."""
        return [[self.alpha, self.beta],
                [self.alpha - self.gamma, self.beta + self.gamma]]

    def offset(self):
        return [self.eta, self.eta + self.theta]

    def __call__(self, x: Interval) -> Interval:
        return apply(self, x)


def apply(op: AffineOperator, x: Interval) -> Interval:
    lower = op.alpha * x.lower + op.beta * x.upper + op.eta
    # Writing the upper bound as lower + range keeps upper >= lower exact in
    # floating point whenever gamma, theta >= 0.
    width = op.gamma * (x.upper - x.lower) + op.theta
    return Interval(lower, lower + width)


def map_ray(op: AffineOperator, a: float, b: float) -> tuple[float, float]:
    """Image of the ray ``U = a*L + b`` as ``(slope, intercept)``.

    Raises
    ------
    SingularRayError
        If ``alpha + beta*a == 0``; the image is then a vertical ray.
    """
    denom = op.alpha + op.beta * a
    if denom == 0:
        raise SingularRayError(
            f"alpha + beta*a = 0 for a={a}: the image ray is vertical")
    k = op.gamma * (a - 1.0) / denom
    return 1.0 + k, op.gamma * b + op.theta - k * (op.beta * b + op.eta)
