"""Command line interface: ``conereg fit|predict|simulate|compare``.

Exit codes: 0 success, 2 usage, 3 data or schema problem, 4 numerical
failure (rank deficiency, singular matrices).
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

from . import io
from .baselines import baseline_bounds, fit_ccrm, fit_m_model
from .exceptions import (ConeRegError, DiagnosticsError, DomainError, SchemaError,
                         SingularMatrixError)
from .metrics import interval_errors
from .regression import ConditioningWarning, fit, positivity_diagnostics, predict_arrays
from .simulation import (TABLE3_SIZES, SimulationConfig, methods_for, run_table1, run_table2,
                         run_table3)

log = logging.getLogger("conereg")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
METHOD_LABELS = {"m": "M", "ccrm": "CCRM", "cone": "Cone"}


class UsageError(ConeRegError):
    pass


def _fit_cone(data, policy):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConditioningWarning)
        model = fit(data, policy)
    try:
        diag = positivity_diagnostics(data, model)
    except DiagnosticsError as exc:
        model.warnings.append(str(exc))
        diag = None
    if not model.constrained and not model.positive:
        model.warnings.append(
            "negative theta or gamma estimate; the range covariance diagnostics indicate the "
            "outcome range does not grow with every predictor range")
    return model, diag


def _report_for(data, model_kind, policy):
    if model_kind == "cone":
        model, diag = _fit_cone(data, policy)
        return io.cone_report(model, data, diag, policy)
    if model_kind == "ccrm":
        return io.ccrm_report(fit_ccrm(data), data)
    if data.p != 1:
        raise UsageError(f"the M model takes exactly one predictor, the input has {data.p}")
    return io.m_report(fit_m_model(data), data)


def cmd_fit(args) -> int:
    data = io.read_interval_csv(args.input).dataset()
    report = _report_for(data, args.model, args.constrained)
    text = io.dump_report(report)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    if args.text:
        Path(args.text).write_text(io.text_report(report), encoding="utf-8")
    if not args.quiet:
        sys.stdout.write(io.text_report(report))
    for w in report["warnings"]:
        log.warning(w)
    return EXIT_OK


def cmd_predict(args) -> int:
    report = io.load_report(args.report)
    table = io.read_interval_csv(args.input, require_outcome=False)
    if list(table.names) != list(report["predictors"]):
        raise DomainError(f"input predictors {list(table.names)} do not match the model's "
                          f"{report['predictors']}")
    lo, up, clamped = io.predict_from_report(report, table.x_lower, table.x_upper)
    io.write_predictions(args.out if args.out else sys.stdout, lo, up, clamped)
    return EXIT_OK


def _sim_config(args, n):
    return SimulationConfig(args.config, n, reps=args.reps, seed=args.seed,
                            error_law=args.error_law)


def cmd_simulate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = out / f"table{args.table}_config-{args.config}"
    if args.table == 1:
        sizes = args.n or [100, 200, 300, 400]
        rows = []
        for n in sizes:
            s = run_table1(_sim_config(args, n), workers=args.workers)
            rows.append([f"Model {s.config_id}", n, s.mre_beta, s.mre_sigma2,
                         s.n_unconstrained, s.n_constrained, s.n_skipped, s.n_swapped])
        io.write_table(stem, ["model", "n", "MRE(beta)", "MRE(sigma2)", "unconstrained",
                              "constrained", "skipped", "swapped_bounds"], rows)
    elif args.table == 2:
        if args.n and len(args.n) > 1:
            raise UsageError("table 2 takes a single --n")
        n = args.n[0] if args.n else 300
        res = run_table2(_sim_config(args, n), workers=args.workers)
        rows = [[r.parameter, r.true_value, r.mean_estimate, r.mean_estimated_variance,
                 r.empirical_variance] for r in res.rows]
        io.write_table(stem, ["parameter", "true_value", "mean_estimate",
                              "estimated_variance", "empirical_variance"], rows)
    else:
        sizes = args.n or list(TABLE3_SIZES)
        rows = []
        for n in sizes:
            res = run_table3(_sim_config(args, n), workers=args.workers)
            for m in methods_for(SimulationConfig(args.config, n).p):
                e = res.errors[m]
                rows.append([f"Model {args.config}", n, METHOD_LABELS[m], e.msec, e.mser,
                             e.msei])
        io.write_table(stem, ["model", "n", "method", "MSEC", "MSER", "MSEI"], rows)
    if not args.quiet:
        sys.stdout.write(stem.with_suffix(".txt").read_text(encoding="utf-8"))
    return EXIT_OK


def cmd_compare(args) -> int:
    train = io.read_interval_csv(args.train).dataset()
    test = io.read_interval_csv(args.test).dataset()
    if train.predictor_names != test.predictor_names:
        raise DomainError("training and validation files have different predictors")
    rows = []
    kinds = ["cone", "ccrm"] + (["m"] if train.p == 1 else [])
    for kind in kinds:
        if kind == "cone":
            model, _ = _fit_cone(train, args.constrained)
            lo, up, _ = predict_arrays(model, test.x_lower, test.x_upper)
        else:
            f = fit_ccrm(train) if kind == "ccrm" else fit_m_model(train)
            lo, up, _ = baseline_bounds(f, test.x_lower, test.x_upper)
        e = interval_errors(lo, up, test.y_lower, test.y_upper)
        rows.append([METHOD_LABELS[kind], e.msec, e.mser, e.msei])
    header = ["method", "MSEC", "MSER", "MSEI"]
    if args.out:
        io.write_table(Path(args.out), header, rows)
    if not args.quiet:
        for r in [header] + [[r[0]] + [f"{v:.4f}" for v in r[1:]] for r in rows]:
            sys.stdout.write("  ".join(f"{c:>10}" for c in r) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conereg",
                                     description="Cone-affine regression for interval data.")
    parser.add_argument("-q", "--quiet", action="store_true", help="suppress stdout summaries")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a model to an interval CSV file")
    p.add_argument("input")
    p.add_argument("--model", choices=["cone", "ccrm", "m"], default="cone")
    p.add_argument("--constrained", choices=["auto", "always", "never"], default="auto")
    p.add_argument("--out", help="JSON report path")
    p.add_argument("--text", help="plain-text report path")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict outcome intervals with a saved report")
    p.add_argument("report")
    p.add_argument("input")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("simulate", help="run a Monte Carlo table")
    p.add_argument("--config", choices=["I", "II", "III"], required=True)
    p.add_argument("--table", type=int, choices=[1, 2, 3], required=True)
    p.add_argument("--n", type=int, nargs="+", help="sample size(s)")
    p.add_argument("--reps", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--error-law", choices=["centered", "matched", "literal"],
                   default="centered")
    p.add_argument("--workers", type=int, help="worker processes (default CONE_REG_THREADS "
                                               "or the number of cores)")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="holdout comparison of cone, CCRM and M models")
    p.add_argument("train")
    p.add_argument("test")
    p.add_argument("--constrained", choices=["auto", "always", "never"], default="auto")
    p.add_argument("--out", help="output path stem for .csv/.txt tables")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(format="%(levelname)s: %(message)s", level=logging.WARNING)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        log.error("%s", exc)
        return EXIT_USAGE
    except SchemaError as exc:
        log.error("%s", exc)
        return EXIT_DATA
    except SingularMatrixError as exc:
        hint = f" (offending column: {exc.column})" if getattr(exc, "column", None) else ""
        log.error("%s%s", exc, hint)
        return EXIT_NUMERIC
    except DomainError as exc:
        log.error("%s", exc)
        return EXIT_DATA
    except ConeRegError as exc:
        log.error("%s", exc)
        return EXIT_NUMERIC
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
