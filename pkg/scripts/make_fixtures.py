"""Regenerate the bundled CSV fixtures under data/."""

import argparse
from pathlib import Path

from gvar.data import write_prices
from gvar.synthetic import prices_from_returns, regime_switching_returns, trend_prices


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data")
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    r = regime_switching_returns(2999, sigmas=(0.6, 1.0, 1.6, 1.0), block=250, seed=args.seed)
    write_prices(prices_from_returns(r), args.out / "synthetic_3000.csv")
    write_prices(trend_prices(1200), args.out / "trend.csv")
    print(f"wrote fixtures to {args.out}")


if __name__ == "__main__":
    main()
