"""Holdout error measures for interval predictions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class IntervalErrors:
    """Mean squared errors of centers (MSEC), radii (MSER) and their sum (MSEI)."""

    msec: float
    mser: float

    @property
    def msei(self) -> float:
        return self.msec + self.mser

    def as_dict(self) -> dict[str, float]:
        return {"MSEC": self.msec, "MSER": self.mser, "MSEI": self.msei}


def interval_errors(pred_lower, pred_upper, true_lower, true_upper) -> IntervalErrors:
    pl, pu = np.asarray(pred_lower, float), np.asarray(pred_upper, float)
    tl, tu = np.asarray(true_lower, float), np.asarray(true_upper, float)
    msec = float(np.mean((0.5 * (pl + pu) - 0.5 * (tl + tu)) ** 2))
    mser = float(np.mean((0.5 * (pu - pl) - 0.5 * (tu - tl)) ** 2))
    return IntervalErrors(msec, mser)


def range_mse(pred_lower, pred_upper, true_lower, true_upper) -> float:
    """Mean squared error of full ranges; four times the radius MSE."""
    pr = np.asarray(pred_upper, float) - np.asarray(pred_lower, float)
    tr = np.asarray(true_upper, float) - np.asarray(true_lower, float)
    return float(np.mean((pr - tr) ** 2))
