"""Violation rate against the estimation window W0, in-sample and out-of-sample.

For one price file (or the seeded regime-switching series when ``--data`` is
omitted) this sweeps a W0 grid at fixed W and alpha and writes

* ``w0_sweep.csv``: ``w0, rate_full, rate_first_half, rate_second_half``
* ``running_rate.csv``: the running violation rate at the selected W0

The two half-sample columns show how much the look-ahead in full-sample
calibration matters: a W0 chosen on the first half can be checked on the second.

    python scripts/w0_diagnostics.py --w 500 --alpha 0.01 --out out/w0
"""

from __future__ import annotations

import argparse
import csv
from pathlib import Path

import numpy as np

from gvar.backtest import running_violation_rate
from gvar.config import parse_grid
from gvar.data import load_prices, log_returns
from gvar.estimation import default_candidates, violation_rate_path
from gvar.forecast import g_var_path
from gvar.synthetic import regime_switching_returns


def sweep(r: np.ndarray, W: int, alpha: float, grid, mode: str):
    n_fc = len(r) - W
    half = n_fc // 2
    rows = []
    for w0 in grid:
        path = g_var_path(r, W, w0, alpha, mode=mode)
        rows.append(
            (
                w0,
                violation_rate_path(r, path, W, (0, n_fc)),
                violation_rate_path(r, path, W, (0, half)),
                violation_rate_path(r, path, W, (half, n_fc)),
            )
        )
    return rows


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data", type=Path, default=None)
    ap.add_argument("--w", type=int, default=500)
    ap.add_argument("--alpha", type=float, default=0.01)
    ap.add_argument("--w0-grid", type=parse_grid, default=None)
    ap.add_argument("--mode", choices=("raw", "ar1"), default="raw")
    ap.add_argument("--seed", type=int, default=7, help="seed for the synthetic series")
    ap.add_argument("--out", type=Path, default=Path("out/w0"))
    args = ap.parse_args(argv)

    if args.data is None:
        r = regime_switching_returns(12_000, (0.5, 1.0), 250, seed=args.seed)
        source = f"regime-switching synthetic (seed {args.seed})"
    else:
        r = log_returns(load_prices(args.data)).values
        source = str(args.data)
    grid = args.w0_grid or default_candidates(args.w, args.alpha)
    rows = sweep(r, args.w, args.alpha, grid, args.mode)

    full = min(rows, key=lambda row: (abs(row[1] - args.alpha), row[0]))
    first = min(rows, key=lambda row: (abs(row[2] - args.alpha), row[0]))
    print(f"source: {source}, n={len(r)}, W={args.w}, alpha={args.alpha}, mode={args.mode}")
    print(f"full-sample choice  W0={full[0]:>4}  rate={full[1]:.4f}")
    print(f"first-half choice   W0={first[0]:>4}  rate on second half={first[3]:.4f}")

    args.out.mkdir(parents=True, exist_ok=True)
    with (args.out / "w0_sweep.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["w0", "rate_full", "rate_first_half", "rate_second_half"])
        w.writerows(rows)
    path = g_var_path(r, args.w, full[0], args.alpha, mode=args.mode)
    rates = running_violation_rate(r[args.w :] < -path)
    with (args.out / "running_rate.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "rate"])
        w.writerows((i + 1, float(v)) for i, v in enumerate(rates))
    print(f"wrote {args.out}/w0_sweep.csv and running_rate.csv")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
