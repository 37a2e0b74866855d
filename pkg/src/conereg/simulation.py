"""Monte Carlo harness for the three simulated model configurations.

Configurations I and II have one predictor, III has three. Per repetition
the coefficients are drawn uniformly (``eta, alpha_j, beta_j`` from the
configuration's range, ``theta, gamma_j`` from ``[1, 3]``), the error scale
``sigma`` from ``[2, 4]``, then predictors and errors.

Predictor law: each predictor interval has center ``Unif(0, 10)`` and range
``Unif(0.5, 4)``, independently across predictors and rows (both bounds are
configurable).

Error laws (``error_law``):

``"centered"`` (default)
    ``Unif(-sigma**2 / 2, sigma**2 / 2)``, variance ``sigma**4 / 12``.
``"matched"``
    zero-mean uniform with variance ``sigma**2``, i.e. ``Unif(-sqrt(3) sigma, sqrt(3) sigma)``.
``"literal"``
    ``Unif(0, sigma**2)``, variance ``sigma**4 / 12``; its nonzero mean is
    absorbed by ``eta`` and biases it by ``sigma**2 / 2``.

The "true" error variance used to score ``sigma2_hat`` is always the
variance of the law actually sampled. When noise pushes a generated lower
bound above the upper bound the two are swapped and the event is counted.

Every repetition draws from its own Philox stream keyed by ``(seed, rep)``,
so results do not depend on execution order or worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial

import numpy as np

from .baselines import baseline_bounds, fit_ccrm, fit_m_model
from .exceptions import ConeRegError, DomainError
from .interval import IntervalDataset
from .metrics import IntervalErrors, interval_errors
from .regression import (FittedModel, coef_names, fit_constrained, fit_unconstrained,
                         predict_arrays, range_covariances, stacked_design)

CONFIGS = {
    "I": (1, (0.0, 4.0)),
    "II": (1, (-4.0, 0.0)),
    "III": (3, (-4.0, 4.0)),
}
ERROR_LAWS = ("matched", "centered", "literal")
RANGE_COEF_BOUNDS = (1.0, 3.0)
SIGMA_BOUNDS = (2.0, 4.0)
TABLE3_SIZES = (60, 100, 200, 300)

# spawn_key prefixes keep the different uses of one seed apart
_STREAM_REP = 0
_STREAM_FIXED_MODEL = 1


@dataclass(frozen=True)
class SimulationConfig:
    config_id: str
    n: int
    reps: int = 500
    seed: int = 0
    error_law: str = "centered"
    center_bounds: tuple[float, float] = (0.0, 10.0)
    range_bounds: tuple[float, float] = (0.5, 4.0)
    sigma: float | None = None

    def __post_init__(self):
        if self.config_id not in CONFIGS:
            raise DomainError(f"unknown configuration {self.config_id!r}; use I, II or III")
        if self.n < 10:
            raise DomainError(f"n must be at least 10, got {self.n}")
        if self.reps < 1:
            raise DomainError(f"reps must be positive, got {self.reps}")
        if self.error_law not in ERROR_LAWS:
            raise DomainError(f"unknown error law {self.error_law!r}")
        if self.range_bounds[0] < 0:
            raise DomainError("predictor ranges must be nonnegative")
        if self.sigma is not None and self.sigma < 0:
            raise DomainError("sigma must be nonnegative")

    @property
    def p(self) -> int:
        return CONFIGS[self.config_id][0]


@dataclass(frozen=True)
class TrueModel:
    coef: np.ndarray
    sigma: float

    def error_variance(self, law: str) -> float:
        s2 = self.sigma ** 2
        return s2 if law == "matched" else s2 * s2 / 12.0


@dataclass(frozen=True)
class SimulatedData:
    dataset: IntervalDataset
    model: TrueModel
    sigma2: float
    n_swapped: int


@dataclass(frozen=True)
class RepetitionResult:
    true_params: np.ndarray
    estimate: np.ndarray
    sigma2_true: float
    sigma2_hat: float
    used_constrained: bool
    n_swapped: int = 0
    variances: np.ndarray | None = None


def _seed64(seed: int) -> int:
    return int(seed) & 0xFFFF_FFFF_FFFF_FFFF


def rep_rng(seed: int, rep: int, stream: int = _STREAM_REP) -> np.random.Generator:
    """Independent Philox generator for repetition `rep` of a run seeded with `seed`."""
    ss = np.random.SeedSequence(_seed64(seed), spawn_key=(stream, rep))
    return np.random.Generator(np.random.Philox(ss))


def draw_model(config: SimulationConfig, rng: np.random.Generator) -> TrueModel:
    p, (lo, hi) = CONFIGS[config.config_id]
    free = rng.uniform(lo, hi, 2 * p + 1)
    positive = rng.uniform(*RANGE_COEF_BOUNDS, p + 1)
    sigma = rng.uniform(*SIGMA_BOUNDS)
    if config.sigma is not None:
        sigma = config.sigma
    return TrueModel(np.concatenate([free, positive]), float(sigma))


def fixed_model(config: SimulationConfig) -> TrueModel:
    """One model drawn from `config` with a stream reserved for this purpose."""
    return draw_model(config, rep_rng(config.seed, 0, _STREAM_FIXED_MODEL))


def _errors(rng, law, sigma, size):
    if law == "matched":
        half = np.sqrt(3.0) * sigma
        return rng.uniform(-half, half, size)
    s2 = sigma * sigma
    if law == "centered":
        return rng.uniform(-0.5 * s2, 0.5 * s2, size)
    return rng.uniform(0.0, s2, size)


def generate_dataset(config: SimulationConfig, rng: np.random.Generator,
                     model: TrueModel | None = None, n: int | None = None) -> SimulatedData:
    """Draw one dataset; the model is drawn first unless given."""
    if model is None:
        model = draw_model(config, rng)
    n = config.n if n is None else n
    p = config.p
    centers = rng.uniform(*config.center_bounds, (n, p))
    ranges = rng.uniform(*config.range_bounds, (n, p))
    xl = centers - 0.5 * ranges
    xu = centers + 0.5 * ranges
    eps = _errors(rng, config.error_law, model.sigma, 2 * n)
    y = stacked_design(xl, xu) @ model.coef + eps
    yl, yu = y[:n], y[n:]
    inverted = yl > yu
    if np.any(inverted):
        yl, yu = np.minimum(yl, yu), np.maximum(yl, yu)
    data = IntervalDataset(xl, xu, yl, yu)
    return SimulatedData(data, model, model.error_variance(config.error_law),
                         int(inverted.sum()))


def fit_with_fallback(data: IntervalDataset) -> FittedModel:
    """Closed-form fit when every predictor range covaries positively with the
    outcome range, constrained fit otherwise."""
    _, s = range_covariances(data)
    if np.all(s > 0):
        return fit_unconstrained(data)
    return fit_constrained(data)


def default_workers() -> int:
    env = os.environ.get("CONE_REG_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _map_reps(func, reps, workers):
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or reps < 2 * workers:
        return [func(r) for r in range(reps)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, range(reps), chunksize=max(1, reps // (4 * workers))))


def _fit_rep(config, model, rep, with_variances=False):
    rng = rep_rng(config.seed, rep)
    sim = generate_dataset(config, rng, model=model)
    try:
        fit = fit_with_fallback(sim.dataset)
    except ConeRegError:
        return None
    var = np.diag(fit.covariance).copy() if with_variances else None
    return RepetitionResult(sim.model.coef, fit.coef, sim.sigma2, fit.sigma2_hat,
                            fit.constrained, sim.n_swapped, var)


@dataclass(frozen=True)
class Table1Summary:
    config_id: str
    n: int
    reps: int
    mre_beta: float
    mre_sigma2: float
    n_unconstrained: int
    n_constrained: int
    n_skipped: int = 0
    n_swapped: int = 0


def run_table1(config: SimulationConfig, workers: int | None = None) -> Table1Summary:
    """Mean relative errors of the coefficient vector and of ``sigma2_hat``.

    ``MRE(beta) = mean ||b_hat - b|| / ||b||`` and
    ``MRE(sigma2) = mean |s2_hat - s2| / s2`` over repetitions; the counts
    record how often the closed-form and the constrained fit were used.
    Repetitions with a singular design are skipped and counted.
    """
    results = _map_reps(partial(_fit_rep, config, None), config.reps, workers)
    done = [r for r in results if r is not None]
    rel_b = [np.linalg.norm(r.estimate - r.true_params) / np.linalg.norm(r.true_params)
             for r in done]
    rel_s = [abs(r.sigma2_hat - r.sigma2_true) / r.sigma2_true
             for r in done if r.sigma2_true > 0]
    n_con = sum(r.used_constrained for r in done)
    return Table1Summary(
        config.config_id, config.n, config.reps,
        float(np.mean(rel_b)) if rel_b else float("nan"),
        float(np.mean(rel_s)) if rel_s else float("nan"),
        len(done) - n_con, n_con, len(results) - len(done),
        sum(r.n_swapped for r in done))


@dataclass(frozen=True)
class Table2Row:
    parameter: str
    true_value: float
    mean_estimate: float
    mean_estimated_variance: float
    empirical_variance: float


@dataclass(frozen=True)
class Table2Result:
    rows: list[Table2Row]
    model: TrueModel
    estimates: np.ndarray = field(repr=False)
    n_constrained: int = 0
    n_swapped: int = 0

    @property
    def monte_carlo_se(self) -> np.ndarray:
        """Standard error of each mean estimate."""
        return np.sqrt(self.estimates.var(axis=0, ddof=1) / self.estimates.shape[0])


def run_table2(config: SimulationConfig, model: TrueModel | None = None,
               workers: int | None = None) -> Table2Result:
    """Repeat estimation for one fixed model.

    Reports per coefficient the mean estimate, the mean of the estimated
    variances (diagonal of ``sigma2_hat (X^T X)^{-1}``) and the empirical
    variance of the estimates across repetitions.
    """
    if model is None:
        model = fixed_model(config)
    results = _map_reps(partial(_fit_rep, config, model, with_variances=True),
                        config.reps, workers)
    done = [r for r in results if r is not None]
    est = np.array([r.estimate for r in done])
    var = np.array([r.variances for r in done])
    emp = est.var(axis=0, ddof=1) if len(done) > 1 else np.zeros(est.shape[1])
    rows = [Table2Row(name, float(t), float(m), float(v), float(e))
            for name, t, m, v, e in zip(coef_names(config.p), model.coef, est.mean(axis=0),
                                        var.mean(axis=0), emp)]
    return Table2Result(rows, model, est, sum(r.used_constrained for r in done),
                        sum(r.n_swapped for r in done))


@dataclass(frozen=True)
class Table3Result:
    config_id: str
    n: int
    reps: int
    errors: dict[str, IntervalErrors]
    n_skipped: int = 0


def methods_for(p: int) -> tuple[str, ...]:
    return ("m", "ccrm", "cone") if p == 1 else ("ccrm", "cone")


def _compare_rep(config, rep):
    rng = rep_rng(config.seed, rep)
    train = generate_dataset(config, rng)
    hold = generate_dataset(config, rng, model=train.model, n=config.n // 4).dataset
    out = {}
    try:
        ours = fit_with_fallback(train.dataset)
        lo, up, _ = predict_arrays(ours, hold.x_lower, hold.x_upper)
        out["cone"] = interval_errors(lo, up, hold.y_lower, hold.y_upper)
        lo, up, _ = baseline_bounds(fit_ccrm(train.dataset), hold.x_lower, hold.x_upper)
        out["ccrm"] = interval_errors(lo, up, hold.y_lower, hold.y_upper)
        if config.p == 1:
            lo, up, _ = baseline_bounds(fit_m_model(train.dataset), hold.x_lower, hold.x_upper)
            out["m"] = interval_errors(lo, up, hold.y_lower, hold.y_upper)
    except ConeRegError:
        return None
    return out


def run_table3(config: SimulationConfig, workers: int | None = None) -> Table3Result:
    """Holdout comparison of the cone model with CCRM (and the M model for one
    predictor). Each repetition trains on ``n`` rows and scores ``n/4`` fresh
    rows drawn from the same model."""
    if config.n < 20 or config.n % 4:
        raise DomainError(f"training size must be >= 20 and divisible by 4, got {config.n}")
    results = _map_reps(partial(_compare_rep, config), config.reps, workers)
    done = [r for r in results if r is not None]
    errors = {}
    for m in methods_for(config.p):
        errors[m] = IntervalErrors(float(np.mean([r[m].msec for r in done])),
                                   float(np.mean([r[m].mser for r in done])))
    return Table3Result(config.config_id, config.n, config.reps, errors,
                        len(results) - len(done))


def with_n(config: SimulationConfig, n: int) -> SimulationConfig:
    return replace(config, n=n)
