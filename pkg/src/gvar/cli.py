"""Command-line entry point: ``gvar {ingest,calibrate,forecast,backtest,compare,pde-check}``.

Exit codes: 0 ok, 1 pde-check above tolerance, 2 usage/config, 3 data,
4 calibration failure.  Failures print one ``error: <Class>: <message>`` line
on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from gvar.backtest import summarize
from gvar.config import RunConfig, parse_grid, parse_span
from gvar.data import TABLE_COLUMNS, load_prices, log_returns, table_rows, write_report
from gvar.errors import CalibrationError, ConfigurationError, GVarError
from gvar.estimation import calibrate_w0
from gvar.forecast import MODEL_IDS, ModelSpec, g_var_forecast, rolling_forecast
from gvar.gnormal import GNormalParams
from gvar.pde_oracle import GridSpec, verify_closed_form

log = logging.getLogger("gvar")

DEFAULT_COMPARE = ["garch_n", "garch_st", "garch_st_evt", "g_var"]
LABELS = {
    "g_var": "G-VaR",
    "hs": "HS",
    "garch_n": "AR(1)-GARCH(1,1)-N",
    "garch_t": "AR(1)-GARCH(1,1)-t",
    "garch_st": "AR(1)-GARCH(1,1)-St",
    "garch_st_evt": "AR(1)-GARCH(1,1)-St-EVT",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_data_args(p, models=True, default_models=None):
    p.add_argument("--data", type=Path, required=True, help="CSV with header date,close")
    p.add_argument("--alpha", type=float, action="append", help="risk level (repeatable)")
    p.add_argument("--w", type=int, default=1000, help="historical window W")
    p.add_argument("--mode", choices=("raw", "ar1"), default="raw")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", type=Path, default=Path("out"))
    p.add_argument("--format", choices=("json", "csv"), default="json")
    if models:
        p.add_argument("--model", action="append", choices=MODEL_IDS, help="model id (repeatable)")
        p.add_argument("--tail-frac", type=float, default=0.10)
        p.add_argument("--refit-cadence", type=int, default=25)
        p.set_defaults(default_models=default_models or ["g_var"])


def _add_calibration_args(p):
    p.add_argument("--w0-grid", type=parse_grid, default=None, help="start:stop[:step] or a,b,c")
    p.add_argument("--span", type=parse_span, default=None, help="forecast positions start:stop")
    p.add_argument("--split", type=float, default=None, help="calibrate on the first fraction only")
    p.add_argument("--band", type=float, default=None, help="max |rate - alpha| (default alpha/2)")
    p.add_argument("--min-span", type=int, default=500)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gvar", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="validate a price file and print a summary")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("calibrate", help="search the adaptive estimation window W0")
    _add_data_args(p, models=False)
    _add_calibration_args(p)

    p = sub.add_parser("forecast", help="single-origin or rolling VaR forecasts")
    _add_data_args(p)
    p.add_argument("--w0", type=int, default=None)
    p.add_argument("--origin", type=int, default=None, help="single forecast origin (index into returns)")

    for name, models, helptext in (
        ("backtest", ["g_var"], "rolling forecasts plus backtest report"),
        ("compare", DEFAULT_COMPARE, "multi-model comparison table"),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_data_args(p, default_models=models)
        group = p.add_mutually_exclusive_group()
        group.add_argument("--w0", type=int, default=None)
        group.add_argument("--calibrate", action="store_true")
        _add_calibration_args(p)
        p.add_argument("--tail-start", type=int, default=3000)

    p = sub.add_parser("pde-check", help="compare the PDE solver with the closed-form distribution")
    p.add_argument("--sigma-lo", type=float, default=0.5)
    p.add_argument("--sigma-hi", type=float, default=1.0)
    p.add_argument("--dx", type=float, default=0.01)
    p.add_argument("--t-end", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--tol", type=float, default=5e-3)
    p.add_argument("--format", choices=("json", "text"), default="text")
    return parser


def _config(args) -> RunConfig:
    models = getattr(args, "model", None) or getattr(args, "default_models", ["g_var"])
    cfg = RunConfig(
        data=args.data,
        models=list(models),
        alphas=args.alpha or [0.01],
        W=args.w,
        W0=getattr(args, "w0", None),
        calibrate=getattr(args, "calibrate", False),
        w0_grid=getattr(args, "w0_grid", None),
        span=getattr(args, "span", None),
        split=getattr(args, "split", None),
        band=getattr(args, "band", None),
        min_span=getattr(args, "min_span", 500),
        mode=args.mode,
        tail_frac=getattr(args, "tail_frac", 0.10),
        refit_cadence=getattr(args, "refit_cadence", 25),
        seed=args.seed,
        out=args.out,
        format=args.format,
        tail_start=getattr(args, "tail_start", 3000),
    )
    return cfg.validate()


def _returns(path):
    prices = load_prices(path)
    return prices, log_returns(prices)


def _emit(payload, fmt: str, rows=None, header=None):
    if fmt == "csv" and rows is not None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        sys.stdout.write(buf.getvalue())
    else:
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def cmd_ingest(args) -> int:
    prices, rets = _returns(args.data)
    r = rets.values
    summary = {
        "n_prices": len(prices),
        "n_returns": len(rets),
        "first_date": prices.dates[0].isoformat(),
        "last_date": prices.dates[-1].isoformat(),
        "dropped_rows": prices.n_dropped,
        "duplicate_dates": prices.n_duplicates,
        "mean": float(r.mean()) if len(r) else None,
        "std": float(r.std()) if len(r) else None,
        "min": float(r.min()) if len(r) else None,
        "max": float(r.max()) if len(r) else None,
    }
    _emit(summary, args.format, [list(summary.values())], list(summary))
    return 0


def _calibrate_all(cfg: RunConfig, r: np.ndarray):
    results, failures = [], []
    for alpha in cfg.alphas:
        try:
            results.append(
                calibrate_w0(
                    r,
                    cfg.W,
                    alpha,
                    candidates=cfg.w0_grid,
                    span=cfg.span,
                    min_span=cfg.min_span,
                    band=cfg.band,
                    split=cfg.split,
                    mode=cfg.mode,
                )
            )
        except CalibrationError as exc:
            failures.append(exc)
            if exc.result is not None:
                results.append(exc.result)
    return results, failures


def cmd_calibrate(args) -> int:
    cfg = _config(argparse.Namespace(**{**vars(args), "calibrate": True}))
    _, rets = _returns(cfg.data)
    results, failures = _calibrate_all(cfg, rets.values)
    if results:
        write_report(results, cfg.out, extra=cfg.meta())
        rows = [[c.alpha_target, c.w0_star, c.deviation, c.accepted] for c in results]
        _emit(
            {"results": [{k: v for k, v in c.as_dict().items() if k != "grid"} for c in results]},
            cfg.format,
            rows,
            ["alpha", "w0_star", "deviation", "accepted"],
        )
    if failures:
        raise failures[0]
    return 0


def _spec(cfg: RunConfig, model: str, W0: int | None) -> ModelSpec:
    return ModelSpec(
        model_id=model,
        W0=W0,
        mode=cfg.mode,
        tail_frac=cfg.tail_frac,
        refit_cadence=cfg.refit_cadence,
        seed=cfg.seed or 0,
    )


def cmd_forecast(args) -> int:
    cfg = _config(args)
    _, rets = _returns(cfg.data)
    r = rets.values
    if args.origin is not None:
        if cfg.models != ["g_var"]:
            raise ConfigurationError("--origin is only supported for g_var")
        out = []
        for alpha in cfg.alphas:
            f = g_var_forecast(r, args.origin, cfg.W, cfg.W0, alpha, mode=cfg.mode)
            out.append(
                {
                    "t_index": f.t_index,
                    "date": rets.dates[f.t_index].isoformat(),
                    "alpha": alpha,
                    "var_value": f.var_value,
                    "sigma2_lo": f.params_snapshot.sigma2_lo,
                    "sigma2_hi": f.params_snapshot.sigma2_hi,
                    "ar1_coef": f.ar1_coef,
                }
            )
        _emit(out, cfg.format, [list(o.values()) for o in out], list(out[0]))
        return 0

    cfg.out.mkdir(parents=True, exist_ok=True)
    rows = []
    for model in cfg.models:
        for alpha in cfg.alphas:
            for f in rolling_forecast(r, cfg.W, alpha, _spec(cfg, model, cfg.W0)):
                rows.append([f.t_index, rets.dates[f.t_index].isoformat(), alpha, model, repr(f.var_value)])
    path = cfg.out / "forecasts.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t_index", "date", "alpha", "model", "var_value"])
        w.writerows(rows)
    _emit({"forecasts": len(rows), "path": str(path)}, "json")
    return 0


def run_backtests(cfg: RunConfig, r: np.ndarray):
    """Reports for every (model, alpha) cell, in declaration order."""
    w0_by_alpha = {}
    calibrations = []
    if "g_var" in cfg.models:
        if cfg.calibrate:
            results, failures = _calibrate_all(cfg, r)
            if failures:
                if results:
                    write_report(results, cfg.out / "calibration", extra=cfg.meta())
                raise failures[0]
            calibrations = results
            w0_by_alpha = {c.alpha_target: c.w0_star for c in results}
        else:
            w0_by_alpha = {a: cfg.W0 for a in cfg.alphas}

    reports = []
    for model in cfg.models:
        for alpha in cfg.alphas:
            W0 = w0_by_alpha.get(alpha) if model == "g_var" else None
            forecasts = rolling_forecast(r, cfg.W, alpha, _spec(cfg, model, W0))
            meta = {"model_id": model, "W": cfg.W, "W0": W0, **cfg.meta()}
            if model == "g_var" and cfg.calibrate:
                cal = next(c for c in calibrations if c.alpha_target == alpha)
                meta["calibration_span"] = list(cal.span)
            if model != "g_var":
                meta.pop("mode")
            reports.append(summarize(r, forecasts, alpha, meta, tail_start=cfg.tail_start, return_scale=100.0))
    return reports, calibrations


def format_table(reports) -> str:
    """Plain-text table laid out like the reference comparison tables."""
    lines = [f"{'Model':<26}{'100a':>7}{'%Viol':>8}{'LR_uc':>8}{'100VaR':>9}{'W0':>6}"]
    for r in reports:
        lines.append(
            f"{LABELS[r.model_id]:<26}{100 * r.alpha:>7.3g}{100 * r.viol_rate:>8.2f}"
            f"{r.p_value:>8.2f}{r.mean_var_x100:>9.2f}{'' if r.W0 is None else r.W0:>6}"
        )
    return "\n".join(lines) + "\n"


def cmd_backtest(args, compare=False) -> int:
    cfg = _config(args)
    _, rets = _returns(cfg.data)
    reports, calibrations = run_backtests(cfg, rets.values)
    write_report(reports, cfg.out, extra=cfg.meta())
    if calibrations:
        write_report(calibrations, cfg.out / "calibration", extra=cfg.meta())
    if compare:
        sys.stdout.write(format_table(reports))
    elif cfg.format == "csv":
        rows = table_rows(reports)
        _emit(None, "csv", [[row[c] for c in TABLE_COLUMNS] for row in rows], TABLE_COLUMNS)
    else:
        summary = [{k: v for k, v in r.as_dict().items() if k != "running_rate"} for r in reports]
        _emit(summary, "json")
    return 0


def cmd_pde_check(args) -> int:
    p = GNormalParams(args.sigma_lo, args.sigma_hi)
    grid = GridSpec.default_for(p, dx=args.dx, t_end=args.t_end)
    if args.dt is not None:
        grid = GridSpec(grid.x_min, grid.x_max, grid.dx, grid.t_end, dt=args.dt)
    report = verify_closed_form(p, grid)
    ok = report.max_abs_error <= args.tol
    if args.format == "json":
        _emit({**report.as_dict(), "tol": args.tol, "pass": ok}, "json")
    else:
        print(
            f"max-abs-error={report.max_abs_error:.6e} worst-x={report.worst_x:.4f} "
            f"dx={report.dx:g} dt={report.dt:.4e} steps={report.n_steps} "
            f"tol={args.tol:g} {'PASS' if ok else 'FAIL'}"
        )
    return 0 if ok else 1


COMMANDS = {
    "ingest": cmd_ingest,
    "calibrate": cmd_calibrate,
    "forecast": cmd_forecast,
    "backtest": cmd_backtest,
    "compare": lambda a: cmd_backtest(a, compare=True),
    "pde-check": cmd_pde_check,
}

_DATA_ERRORS = ("DataError", "IngestionError", "RangeError", "DegenerateInputError", "AlignmentError", "DomainError")


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (UsageError, ConfigurationError)):
        return 2
    if isinstance(exc, CalibrationError):
        return 4
    if isinstance(exc, GVarError):
        return 3 if type(exc).__name__ in _DATA_ERRORS or any(
            c.__name__ in _DATA_ERRORS for c in type(exc).__mro__
        ) else 1
    return 1


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except (UsageError, GVarError) as exc:
        name = "UsageError" if isinstance(exc, UsageError) else type(exc).__name__
        message = " ".join(str(exc).split())
        print(f"error: {name}: {message}", file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
