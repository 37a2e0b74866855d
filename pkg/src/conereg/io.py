"""CSV ingestion, model reports and table output.

Interval CSV files carry a header. Each variable is a column pair named
``<var>_lower,<var>_upper`` or ``<var>_center,<var>_range``; the outcome
variable is ``y``. One file uses one of the two schemas throughout.
Columns that match neither pattern are ignored.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baselines import CcrmFit, MModelFit, baseline_bounds
from .exceptions import DomainError, SchemaError
from .interval import SNAP_TOLERANCE, IntervalDataset
from .metrics import interval_errors
from .regression import (FittedModel, PositivityDiagnostics, clamp_bounds, coef_names,
                         predict_bounds)

OUTCOME = "y"
REPORT_FORMAT = "conereg-report/1"
_COLUMN = re.compile(r"^(?P<var>.+)_(?P<kind>lower|upper|center|range)$")
_PAIRS = {"lu": ("lower", "upper"), "cr": ("center", "range")}


def fmt(x) -> str:
    """17 significant digits, enough for a lossless float round trip."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class IntervalTable:
    """Parsed interval CSV. Outcome arrays are ``None`` when absent."""

    names: tuple[str, ...]
    x_lower: np.ndarray
    x_upper: np.ndarray
    y_lower: np.ndarray | None
    y_upper: np.ndarray | None
    schema: str

    def dataset(self) -> IntervalDataset:
        if self.y_lower is None:
            raise SchemaError(f"missing outcome columns {OUTCOME}_lower/{OUTCOME}_upper")
        return IntervalDataset(self.x_lower, self.x_upper, self.y_lower, self.y_upper,
                               self.names)


def _layout(header):
    groups: dict[str, dict[str, int]] = {}
    order = []
    for idx, col in enumerate(header):
        m = _COLUMN.match(col.strip())
        if not m:
            continue
        var, kind = m["var"], m["kind"]
        if var not in groups:
            groups[var] = {}
            order.append(var)
        if kind in groups[var]:
            raise SchemaError("duplicate column", column=col)
        groups[var][kind] = idx
    if not groups:
        raise SchemaError("no interval columns found in header", row=1)
    kinds = {k for g in groups.values() for k in g}
    has_lu = bool(kinds & {"lower", "upper"})
    has_cr = bool(kinds & {"center", "range"})
    if has_lu and has_cr:
        raise SchemaError("mixed lower/upper and center/range columns", row=1)
    schema = "lu" if has_lu else "cr"
    first, second = _PAIRS[schema]
    for var, g in groups.items():
        for kind in (first, second):
            if kind not in g:
                raise SchemaError("missing column", row=1, column=f"{var}_{kind}")
    return groups, order, schema


def _parse(text, col, line):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise SchemaError(f"cannot parse {text!r} as a number", row=line, column=col) from None
    if not math.isfinite(value):
        raise SchemaError(f"non-finite value {text!r}", row=line, column=col)
    return value


def parse_interval_csv(text: str, require_outcome: bool = True) -> IntervalTable:
    """Parse CSV text; row numbers in errors are file line numbers (header = 1)."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("empty file", row=1) from None
    groups, order, schema = _layout(header)
    first, second = _PAIRS[schema]
    predictors = [v for v in order if v != OUTCOME]
    if not predictors:
        raise SchemaError("no predictor columns found", row=1)
    if require_outcome and OUTCOME not in groups:
        raise SchemaError("missing outcome column", row=1, column=f"{OUTCOME}_{first}")

    pairs = {var: ([], []) for var in order}
    line = 1
    for line, record in enumerate(reader, start=2):
        if not record or all(not c.strip() for c in record):
            continue
        if len(record) < len(header):
            raise SchemaError(f"expected {len(header)} fields, found {len(record)}", row=line)
        for var in order:
            g = groups[var]
            a_col, b_col = f"{var}_{first}", f"{var}_{second}"
            a = _parse(record[g[first]], a_col, line)
            b = _parse(record[g[second]], b_col, line)
            if schema == "lu":
                if a - b > SNAP_TOLERANCE:
                    raise SchemaError(f"lower bound {a} exceeds upper bound {b}",
                                      row=line, column=a_col)
                lo, up = (a, b) if a <= b else ((a + b) / 2, (a + b) / 2)
            else:
                if b < 0:
                    raise SchemaError(f"negative range {b}", row=line, column=b_col)
                lo, up = a - b / 2, a + b / 2
            pairs[var][0].append(lo)
            pairs[var][1].append(up)
    n = len(pairs[predictors[0]][0])
    if n == 0:
        raise SchemaError("no data rows", row=line)
    xl = np.column_stack([pairs[v][0] for v in predictors])
    xu = np.column_stack([pairs[v][1] for v in predictors])
    yl = yu = None
    if OUTCOME in pairs:
        yl = np.array(pairs[OUTCOME][0])
        yu = np.array(pairs[OUTCOME][1])
    return IntervalTable(tuple(predictors), xl, xu, yl, yu, schema)


def read_interval_csv(path, require_outcome: bool = True) -> IntervalTable:
    return parse_interval_csv(Path(path).read_text(encoding="utf-8"), require_outcome)


def write_interval_csv(path, data: IntervalDataset):
    cols = [f"{name}_{k}" for name in data.predictor_names for k in ("lower", "upper")]
    cols += [f"{OUTCOME}_lower", f"{OUTCOME}_upper"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for i in range(data.n):
            row = []
            for j in range(data.p):
                row += [fmt(data.x_lower[i, j]), fmt(data.x_upper[i, j])]
            row += [fmt(data.y_lower[i]), fmt(data.y_upper[i])]
            w.writerow(row)


# -- reports -----------------------------------------------------------------

def _finite_or_none(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _metrics(lo, up, data):
    return interval_errors(lo, up, data.y_lower, data.y_upper).as_dict()


def cone_report(fit: FittedModel, data: IntervalDataset, diag: PositivityDiagnostics | None,
                policy: str) -> dict:
    names = coef_names(fit.p)
    lo, up = predict_bounds(fit.coef, data.x_lower, data.x_upper)
    lo, up, clamped = clamp_bounds(lo, up)
    diagnostics = {"constrained": fit.constrained}
    if diag is not None:
        bound = diag.negative_range_bound
        finite = bound[np.isfinite(bound)]
        diagnostics.update({
            "assumption1_ok": diag.assumption1_ok,
            "assumption2_ok": diag.assumption2_ok,
            "range_cross_cov": [float(v) for v in diag.range_cross_cov],
            "range_cov_matrix": [[float(v) for v in row] for row in diag.range_cov_matrix],
            "gamma_from_ranges": [float(v) for v in diag.gamma_from_ranges],
            "theta_from_ranges": float(diag.theta_from_ranges),
            "negative_range_bound": {
                "max": _finite_or_none(bound.max()),
                "mean": _finite_or_none(finite.mean()) if finite.size else None,
                "rows_zero_range": int(np.sum(~np.isfinite(bound))),
                "rows_above_0.05": int(np.sum(bound > 0.05)),
            },
        })
    return {
        "format": REPORT_FORMAT,
        "model": "cone",
        "predictors": list(fit.predictor_names),
        "n": data.n,
        "constraint_policy": policy,
        "fit_path": "constrained" if fit.constrained else "unconstrained",
        "coefficients": dict(zip(names, map(float, fit.coef))),
        "standard_errors": dict(zip(names, map(float, fit.standard_errors))),
        "sigma2_hat": float(fit.sigma2_hat),
        "diagnostics": diagnostics,
        "metrics": _metrics(lo, up, data),
        "clamped_rows": int(clamped.sum()),
        "warnings": list(fit.warnings),
    }


def ccrm_report(fit: CcrmFit, data: IntervalDataset) -> dict:
    coefs = {"beta0_C": fit.beta0_C}
    coefs.update({f"beta1_C_{n}": float(v) for n, v in zip(fit.predictor_names, fit.beta1_C)})
    coefs["beta0_R"] = fit.beta0_R
    coefs.update({f"beta1_R_{n}": float(v) for n, v in zip(fit.predictor_names, fit.beta1_R)})
    lo, up, clamped = baseline_bounds(fit, data.x_lower, data.x_upper)
    return {
        "format": REPORT_FORMAT,
        "model": "ccrm",
        "predictors": list(fit.predictor_names),
        "n": data.n,
        "coefficients": coefs,
        "resid_var_C": fit.resid_var_C,
        "resid_var_R": fit.resid_var_R,
        "cone_equivalent": dict(zip(coef_names(fit.p), map(float, fit.to_cone()))),
        "metrics": _metrics(lo, up, data),
        "clamped_rows": int(clamped.sum()),
        "warnings": [],
    }


def m_report(fit: MModelFit, data: IntervalDataset) -> dict:
    lo, up, clamped = baseline_bounds(fit, data.x_lower, data.x_upper)
    return {
        "format": REPORT_FORMAT,
        "model": "m",
        "predictors": list(fit.predictor_names),
        "n": data.n,
        "coefficients": {"slope_C": fit.slope_C, "intercept_C": fit.intercept_C,
                         "abs_slope_R": fit.abs_slope_R, "spr_eps_mean": fit.spr_eps_mean},
        "metrics": _metrics(lo, up, data),
        "clamped_rows": int(clamped.sum()),
        "warnings": [],
    }


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def load_report(path) -> dict:
    try:
        report = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"unreadable model report {path}: {exc}") from exc
    if not isinstance(report, dict) or report.get("format") != REPORT_FORMAT:
        raise SchemaError(f"{path} is not a {REPORT_FORMAT} model report")
    return report


def predict_from_report(report: dict, x_lower, x_upper):
    """Clamped ``(lower, upper, clamped)`` predictions from a loaded report."""
    names = report["predictors"]
    x_lower = np.atleast_2d(np.asarray(x_lower, dtype=float))
    if x_lower.shape[1] != len(names):
        raise DomainError(f"model has {len(names)} predictors, input has {x_lower.shape[1]}")
    c = report["coefficients"]
    kind = report["model"]
    if kind == "cone":
        coef = np.array([c[k] for k in coef_names(len(names))])
        lo, up = predict_bounds(coef, x_lower, x_upper)
        return clamp_bounds(lo, up)
    if kind == "ccrm":
        fit = CcrmFit(c["beta0_C"], np.array([c[f"beta1_C_{n}"] for n in names]),
                      c["beta0_R"], np.array([c[f"beta1_R_{n}"] for n in names]),
                      report["resid_var_C"], report["resid_var_R"], tuple(names))
    elif kind == "m":
        fit = MModelFit(c["slope_C"], c["intercept_C"], c["abs_slope_R"], c["spr_eps_mean"],
                        tuple(names))
    else:
        raise SchemaError(f"unknown model kind {kind!r}")
    return baseline_bounds(fit, x_lower, x_upper)


def text_report(report: dict) -> str:
    c = report["coefficients"]
    out = [f"model: {report['model']}   n = {report['n']}   "
           f"predictors: {', '.join(report['predictors'])}"]
    if report["model"] == "cone":
        p = len(report["predictors"])
        out.append(f"fit path: {report['fit_path']} (policy {report['constraint_policy']})")
        out.append("")
        se = report["standard_errors"]
        out.append(f"  {'parameter':<12}{'estimate':>14}{'std.err':>14}")
        for name in coef_names(p):
            out.append(f"  {name:<12}{c[name]:>14.4f}{se[name]:>14.4f}")
        out.append("")
        out.append(f"  sigma2_hat = {report['sigma2_hat']:.4f}")
        out.append("")
        out.append("fitted model:")
        lo_terms, up_terms = [f"{c['eta']:.4f}"], [f"{c['eta'] + c['theta']:.4f}"]
        for j, var in enumerate(report["predictors"], start=1):
            a, b, g = c[f"alpha_{j}"], c[f"beta_{j}"], c[f"gamma_{j}"]
            lo_terms += [f"{a:+.4f}*{var}_L", f"{b:+.4f}*{var}_U"]
            up_terms += [f"{a - g:+.4f}*{var}_L", f"{b + g:+.4f}*{var}_U"]
        out.append("  Y_L = " + " ".join(lo_terms))
        out.append("  Y_U = " + " ".join(up_terms))
        d = report["diagnostics"]
        if "assumption2_ok" in d:
            out.append("")
            out.append(f"ranges mutually uncorrelated: {d['assumption1_ok']}")
            out.append(f"ranges positively covary with outcome range: {d['assumption2_ok']}")
            nb = d["negative_range_bound"]
            if nb["max"] is not None:
                out.append(f"max bound on P(negative predicted range): {nb['max']:.4g}")
    else:
        out.append("")
        for k, v in c.items():
            out.append(f"  {k:<20}{v:>14.4f}")
    m = report["metrics"]
    out.append("")
    out.append(f"in-sample MSEC = {m['MSEC']:.4f}  MSER = {m['MSER']:.4f}  MSEI = {m['MSEI']:.4f}")
    for w in report.get("warnings", []):
        out.append(f"warning: {w}")
    return "\n".join(out) + "\n"


def write_predictions(path_or_buf, lower, upper, clamped):
    own = isinstance(path_or_buf, (str, Path))
    fh = open(path_or_buf, "w", newline="", encoding="utf-8") if own else path_or_buf
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["y_lower", "y_upper", "clamped"])
        for lo, up, c in zip(lower, upper, clamped):
            w.writerow([fmt(lo), fmt(up), "true" if c else "false"])
    finally:
        if own:
            fh.close()


# -- tables ------------------------------------------------------------------

def write_table(path_stem: Path, header: list[str], rows: list[list]):
    """Write ``<stem>.csv`` (full precision) and ``<stem>.txt`` (aligned, 4 decimals)."""
    with open(path_stem.with_suffix(".csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    shown = [[f"{v:.4f}" if isinstance(v, float) else str(v) for v in row] for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in shown)) for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in shown]
    path_stem.with_suffix(".txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
