"""Rebuild the G-VaR rows of the reference comparison tables from local index data.

Expects ``date,close`` CSVs (default ``data/nasdaq.csv`` and ``data/sp500.csv``).
For every reference cell the raw and AR(1) G-VaR modes are run at the
reference W0 and printed next to the reference %Viol / LR_uc / 100*VaR.
With ``--calibrate`` the script also reports the W0 our own in-sample search
selects.  Missing files are reported and skipped.

    python scripts/reproduce_tables.py --out out/tables
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from gvar.backtest import summarize
from gvar.data import load_prices, log_returns
from gvar.errors import CalibrationError
from gvar.estimation import calibrate_w0
from gvar.forecast import ModelSpec, rolling_forecast

DATA = Path(__file__).resolve().parent.parent / "data"

# (index, W, alpha, W0, %Viol, LR_uc p-value, 100*VaR)
REFERENCE = [
    ("nasdaq", 1000, 0.01, 350, 0.99, 0.93, 2.78),
    ("nasdaq", 1000, 0.025, 650, 2.51, 0.96, 2.06),
    ("nasdaq", 1000, 0.05, 900, 5.03, 0.90, 1.52),
    ("nasdaq", 500, 0.003, 50, 0.30, 0.96, 4.71),
    ("nasdaq", 500, 0.005, 70, 0.49, 0.95, 4.00),
    ("nasdaq", 500, 0.01, 120, 1.05, 0.70, 3.11),
    ("nasdaq", 500, 0.025, 270, 2.54, 0.81, 2.14),
    ("nasdaq", 500, 0.05, 420, 5.00, 0.99, 1.60),
    ("nasdaq", 250, 0.003, 35, 0.30, 1.00, 4.29),
    ("nasdaq", 250, 0.005, 50, 0.52, 0.82, 3.67),
    ("nasdaq", 250, 0.01, 75, 1.02, 0.84, 2.98),
    ("nasdaq", 250, 0.025, 150, 2.49, 0.93, 2.12),
    ("nasdaq", 250, 0.05, 210, 5.05, 0.84, 1.61),
    ("sp500", 1000, 0.003, 90, 0.29, 0.91, 7.05),
    ("sp500", 1000, 0.005, 150, 0.52, 0.86, 5.77),
    ("sp500", 1000, 0.01, 250, 1.07, 0.68, 4.40),
    ("sp500", 1000, 0.025, 650, 2.49, 0.97, 2.91),
    ("sp500", 1000, 0.05, 1000, 4.87, 0.72, 1.94),
    ("sp500", 500, 0.003, 70, 0.33, 0.74, 5.50),
    ("sp500", 500, 0.005, 110, 0.51, 0.96, 4.58),
    ("sp500", 500, 0.01, 120, 0.96, 0.81, 4.08),
    ("sp500", 500, 0.025, 250, 2.48, 0.90, 2.79),
    ("sp500", 500, 0.05, 480, 5.08, 0.81, 1.90),
    ("sp500", 250, 0.003, 45, 0.29, 0.86, 4.73),
    ("sp500", 250, 0.005, 60, 0.48, 0.82, 4.16),
    ("sp500", 250, 0.01, 85, 0.98, 0.87, 3.46),
    ("sp500", 250, 0.025, 140, 2.55, 0.85, 2.57),
    ("sp500", 250, 0.05, 240, 4.95, 0.88, 1.83),
]

HEADER = [
    "index", "W", "alpha", "W0", "mode", "n", "viol_pct", "ref_viol_pct",
    "p_value", "ref_p_value", "var_pct", "ref_var_pct", "w0_star",
]


def run_cell(r, W, alpha, W0, mode):
    fc = rolling_forecast(r, W, alpha, ModelSpec("g_var", W0=min(W0, W), mode=mode))
    return summarize(r, fc, alpha, {"W": W, "W0": W0}, return_scale=100.0)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nasdaq", type=Path, default=DATA / "nasdaq.csv")
    ap.add_argument("--sp500", type=Path, default=DATA / "sp500.csv")
    ap.add_argument("--modes", nargs="+", default=["raw", "ar1"], choices=["raw", "ar1"])
    ap.add_argument("--calibrate", action="store_true", help="also report the in-sample W0 search result")
    ap.add_argument("--out", type=Path, default=Path("out/tables"))
    args = ap.parse_args(argv)

    files = {"nasdaq": args.nasdaq, "sp500": args.sp500}
    returns = {}
    for name, path in files.items():
        if path.exists():
            returns[name] = log_returns(load_prices(path)).values
            print(f"{name}: {len(returns[name])} returns from {path}")
        else:
            print(f"{name}: {path} not found, skipping", file=sys.stderr)
    if not returns:
        print("no index data available; supply date,close CSVs", file=sys.stderr)
        return 3

    rows = []
    print(f"{'index':<7}{'W':>5}{'100a':>6}{'W0':>6}{'mode':>5}{'%Viol':>8}{'ref':>6}{'LR_uc':>7}{'ref':>6}{'VaR':>7}{'ref':>6}")
    for name, W, alpha, W0, ref_v, ref_p, ref_var in REFERENCE:
        if name not in returns:
            continue
        r = returns[name]
        w0_star = ""
        if args.calibrate:
            try:
                w0_star = calibrate_w0(r, W, alpha).w0_star
            except CalibrationError as exc:
                w0_star = f"fail({exc.result.w0_star})" if exc.result else "fail"
        for mode in args.modes:
            rep = run_cell(r, W, alpha, W0, mode)
            row = [name, W, alpha, W0, mode, rep.n_forecasts, 100 * rep.viol_rate, ref_v,
                   rep.p_value, ref_p, rep.mean_var_x100, ref_var, w0_star]
            rows.append(row)
            print(
                f"{name:<7}{W:>5}{100 * alpha:>6.3g}{W0:>6}{mode:>5}{100 * rep.viol_rate:>8.2f}{ref_v:>6.2f}"
                f"{rep.p_value:>7.2f}{ref_p:>6.2f}{rep.mean_var_x100:>7.2f}{ref_var:>6.2f}"
            )

    args.out.mkdir(parents=True, exist_ok=True)
    with (args.out / "gvar_rows.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        w.writerows(rows)
    print(f"wrote {args.out / 'gvar_rows.csv'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
