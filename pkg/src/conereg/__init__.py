"""Cone-affine linear regression for interval-valued data."""

from .affine import AffineOperator, apply, map_ray
from .baselines import CcrmFit, MModelFit, fit_ccrm, fit_m_model, predict_baseline
from .interval import Interval, IntervalDataset, delta_metric, from_center_range, is_collinear
from .regression import (FittedModel, PositivityDiagnostics, build_design, fit,
                         fit_constrained, fit_unconstrained, positivity_diagnostics, predict,
                         range_bias_check)
from .simulation import SimulationConfig, generate_dataset, run_table1, run_table2, run_table3

__all__ = [
    "AffineOperator", "CcrmFit", "FittedModel", "Interval", "IntervalDataset",
    "MModelFit", "PositivityDiagnostics", "SimulationConfig", "apply", "build_design",
    "delta_metric", "fit", "fit_ccrm", "fit_constrained", "fit_m_model",
    "fit_unconstrained", "from_center_range", "generate_dataset", "is_collinear", "map_ray",
    "positivity_diagnostics", "predict", "predict_baseline", "range_bias_check",
    "run_table1", "run_table2", "run_table3",
]

__version__ = "0.1.0"
