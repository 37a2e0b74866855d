"""Regenerate the bundled CSV fixtures in src/conereg/data.

    python scripts/make_fixtures.py

``noiseless_p2.csv`` follows the model exactly for the parameters below;
``noisy_p2_train.csv``/``noisy_p2_test.csv`` add zero-mean uniform errors
drawn from a fixed seed.
"""

from pathlib import Path

import numpy as np

from conereg.interval import IntervalDataset
from conereg.io import write_interval_csv
from conereg.regression import pack, stacked_design

PARAMS = pack(1.5, [0.8, -0.4], [0.3, 0.6], 0.7, [1.2, 0.5])
SEED = 20240607
OUT = Path(__file__).resolve().parents[1] / "src" / "conereg" / "data"


def _predictors(rng, n):
    centers = np.round(rng.uniform(0.0, 10.0, (n, 2)), 4)
    ranges = np.round(rng.uniform(0.5, 4.0, (n, 2)), 4)
    return centers - ranges / 2, centers + ranges / 2


def _dataset(rng, n, noise):
    xl, xu = _predictors(rng, n)
    y = stacked_design(xl, xu) @ PARAMS
    if noise:
        y = y + rng.uniform(-noise, noise, 2 * n)
    yl, yu = np.minimum(y[:n], y[n:]), np.maximum(y[:n], y[n:])
    return IntervalDataset(xl, xu, yl, yu, ("x1", "x2"))


def main():
    rng = np.random.Generator(np.random.Philox(SEED))
    OUT.mkdir(parents=True, exist_ok=True)
    write_interval_csv(OUT / "noiseless_p2.csv", _dataset(rng, 40, 0.0))
    write_interval_csv(OUT / "noisy_p2_train.csv", _dataset(rng, 120, 1.0))
    write_interval_csv(OUT / "noisy_p2_test.csv", _dataset(rng, 30, 1.0))


if __name__ == "__main__":
    main()
