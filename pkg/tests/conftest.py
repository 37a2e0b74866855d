import numpy as np
import pytest

from conereg.interval import IntervalDataset
from conereg.regression import pack, stacked_design


def random_params(rng, p, positive=True):
    eta = rng.uniform(-3, 3)
    alpha = rng.uniform(-3, 3, p)
    beta = rng.uniform(-3, 3, p)
    if positive:
        theta, gamma = rng.uniform(0, 3), rng.uniform(0, 3, p)
    else:
        theta, gamma = rng.uniform(-2, 3), rng.uniform(-3, 3, p)
    return pack(eta, alpha, beta, theta, gamma)


def random_predictors(rng, n, p):
    centers = rng.uniform(-5, 10, (n, p))
    ranges = rng.uniform(0.2, 4, (n, p))
    return centers - ranges / 2, centers + ranges / 2


def make_dataset(rng, n, p, coef=None, noise=0.0):
    """Dataset from the cone model; bounds are swapped if noise inverts them."""
    coef = random_params(rng, p) if coef is None else np.asarray(coef, float)
    xl, xu = random_predictors(rng, n, p)
    y = stacked_design(xl, xu) @ coef
    if noise:
        y = y + rng.normal(0, noise, 2 * n)
    yl, yu = np.minimum(y[:n], y[n:]), np.maximum(y[:n], y[n:])
    return IntervalDataset(xl, xu, yl, yu), coef


def range_dataset(rng, n, slope, noise=0.5):
    """Univariate data whose outcome range depends on the predictor range with
    the given slope; centers are unrelated noise."""
    xc = rng.uniform(0, 10, n)
    xr = rng.uniform(0.5, 4, n)
    yr = np.abs(5 + slope * xr + rng.normal(0, noise, n))
    yc = 2 * xc + rng.normal(0, 1, n)
    return IntervalDataset((xc - xr / 2)[:, None], (xc + xr / 2)[:, None],
                           yc - yr / 2, yc + yr / 2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# One line per acceptance criterion, printed at the end of the run.
ACCEPTANCE: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key, ok, detail in sorted(ACCEPTANCE, key=lambda r: int(r[0].split("-")[1])):
        terminalreporter.write_line(f"{key}: {'PASS' if ok else 'FAIL'}  {detail}")
