"""Regenerate the bundled weekly price sample.

The sample is synthetic: 690 weekly prices for 106 assets, so 689 weekly
returns. Each asset has a drift between -0.27 and 1.42 percent per week
and a volatility that grows with the drift, so low-risk assets earn
little and a return target in 0.3..1.3 binds. A common market factor
correlates the assets. Every return column is standardized so its sample
mean and deviation are exactly the drift and volatility, and the returns
are compounded into prices rounded to four decimals.

Usage::

    python3 tools/make_sample.py [output.csv]
"""

import datetime as dt
import sys
from pathlib import Path

import numpy as np

from pdportfolio.dataio import PriceSeries, save_prices_csv, uniforms

SEED = 20240611
N_ASSETS = 106
N_DATES = 690
FACTOR_SHARE = 0.3


def normals(seed, count, offset):
    u = uniforms(seed, 2 * count, offset).reshape(count, 2)
    return np.sqrt(-2.0 * np.log(1.0 - u[:, 0])) * np.cos(2.0 * np.pi * u[:, 1])


def main(out):
    n, t = N_ASSETS, N_DATES - 1
    drift = np.linspace(-0.27, 1.42, n)
    jitter = uniforms(SEED, n)
    vol = 1.0 + 3.5 * (drift + 0.27) / 1.69 + 0.8 * jitter
    start = 10.0 + 190.0 * uniforms(SEED, n, offset=n)
    factor = normals(SEED, t, offset=2 * n)
    idio = normals(SEED, t * n, offset=2 * n + 2 * t).reshape(t, n)
    z = np.sqrt(FACTOR_SHARE) * factor[:, None] + np.sqrt(1.0 - FACTOR_SHARE) * idio
    z = (z - z.mean(axis=0)) / z.std(axis=0)
    r = drift + vol * z
    growth = np.vstack([np.ones(n), np.cumprod(1.0 + r / 100.0, axis=0)])
    prices = np.round(start * growth, 4)
    first = dt.date(2010, 1, 4)
    dates = tuple((first + dt.timedelta(weeks=k)).isoformat() for k in range(N_DATES))
    names = tuple(f"A{i + 1:03d}" for i in range(n))
    save_prices_csv(out, PriceSeries(dates, prices, names), fmt=lambda v: f"{v:.4f}")


if __name__ == "__main__":
    default = Path(__file__).resolve().parents[1] / "src" / "pdportfolio" / "data" / "sample_prices.csv"
    main(sys.argv[1] if len(sys.argv) > 1 else default)
