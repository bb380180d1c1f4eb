"""Reading and writing scenario data, synthetic generation, result output.

File formats
------------
Price CSV
    Header ``date,<name_1>,...,<name_N>``, then one row per date in strictly
    increasing order. Empty cells mark missing history; such assets are
    dropped with a warning.
Returns CSV
    Header ``[prob,]<name_1>,...,<name_N>``, then one row per scenario. The
    optional ``prob`` column gives scenario probabilities, otherwise they
    are uniform. Values are written with ``repr`` so a round trip is exact.
Solution document
    A JSON object; see :func:`solution_record` for the keys.
Frontier CSV
    ``mu_star,risk,status,iterations,w_1,...,w_N``.

Synthetic generator
-------------------
Uniform variates come from SplitMix64 evaluated in counter mode: the
``k``-th 64-bit output (``k = 0, 1, ...``) for seed ``s`` is
``mix(s + (k + 1) * 0x9E3779B97F4A7C15 mod 2^64)`` with::

    mix(z): z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
            z = (z ^ (z >> 27)) * 0x94D049BB133111EB
            return z ^ (z >> 31)

which is the usual sequential SplitMix64 stream. A uniform on ``[0, 1)`` is
``(out >> 11) * 2^-53``. Draws are consumed in this order:

* ``uniform(a, b)``: ``omega * n_assets`` variates in row-major order,
  ``r = a + (b - a) * u``.
* ``gaussian(mean_range, vol_range)``: ``n_assets`` means, then
  ``n_assets`` volatilities (each uniform on its range), then
  ``2 * omega * n_assets`` variates consumed in pairs ``(u1, u2)`` in
  row-major order, ``r = m + s * sqrt(-2 ln(1 - u1)) * cos(2 pi u2)``.

The uniform case is bit-exact everywhere; the Gaussian case depends on
``log`` and ``cos`` being correctly rounded to the last bit.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DataError, StructuralError
from .probspace import DiscreteSpace, ReturnsMatrix

__all__ = [
    "PriceSeries",
    "Uniform",
    "Gaussian",
    "SyntheticSpec",
    "load_prices_csv",
    "save_prices_csv",
    "prices_to_returns",
    "load_returns_csv",
    "save_returns_csv",
    "splitmix64",
    "uniforms",
    "gen_synthetic",
    "solution_record",
    "write_solution",
    "write_frontier_csv",
    "frontier_svg",
    "sample_path",
]

# ------------------------------------------------------------------- prices


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """Prices with one row per date and one column per asset."""

    dates: tuple
    prices: np.ndarray
    names: tuple = ()

    def __post_init__(self):
        P = np.array(self.prices, dtype=float)
        if P.ndim != 2:
            raise StructuralError("prices must be a 2-D array")
        if len(self.dates) != P.shape[0]:
            raise StructuralError(f"{len(self.dates)} dates for {P.shape[0]} price rows")
        names = tuple(self.names) if self.names else tuple(f"asset_{i + 1}" for i in range(P.shape[1]))
        if len(names) != P.shape[1]:
            raise StructuralError(f"{len(names)} names for {P.shape[1]} assets")
        dates = tuple(self.dates)
        for k in range(1, len(dates)):
            if not dates[k - 1] < dates[k]:
                raise DataError(f"dates are not strictly increasing at {dates[k]!r}", line=k + 2)
        P.setflags(write=False)
        object.__setattr__(self, "prices", P)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "dates", dates)


def prices_to_returns(series: PriceSeries) -> ReturnsMatrix:
    """Simple returns in percent, ``100 (P[t+1] - P[t]) / P[t]``, equally likely."""
    P = series.prices
    if P.shape[0] < 2:
        raise DataError("at least two price rows are needed to form a return")
    bad = np.argwhere(~(P > 0))
    if bad.size:
        row, col = bad[0]
        raise DataError(
            f"nonpositive price {float(P[row, col])!r} for asset {series.names[col]!r} on {series.dates[row]!r}",
            line=int(row) + 2,
        )
    R = 100.0 * (P[1:] - P[:-1]) / P[:-1]
    return ReturnsMatrix(R, DiscreteSpace.uniform(R.shape[0]), series.names)


def _parse_float(cell, lineno, what):
    try:
        return float(cell)
    except ValueError:
        raise DataError(f"non-numeric {what} {cell!r}", line=lineno) from None


def load_prices_csv(path) -> PriceSeries:
    """Read a price CSV; assets with any empty cell are dropped with a warning."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError("empty price file", line=1)
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[0].lower() != "date":
        raise DataError("price header must start with 'date' followed by asset names", line=1)
    names = header[1:]
    dates = []
    cells = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise DataError(f"expected {len(header)} fields, found {len(row)}", line=lineno)
        dates.append(row[0].strip())
        cells.append([c.strip() for c in row[1:]])
    missing = {j for r in cells for j, c in enumerate(r) if c == ""}
    if missing:
        dropped = [names[j] for j in sorted(missing)]
        warnings.warn(f"dropping {len(dropped)} asset(s) with missing history: {', '.join(dropped)}", stacklevel=2)
    keep = [j for j in range(len(names)) if j not in missing]
    if not keep:
        raise DataError("no asset has a complete price history")
    P = np.empty((len(cells), len(keep)))
    for i, r in enumerate(cells):
        for k, j in enumerate(keep):
            P[i, k] = _parse_float(r[j], i + 2, f"price for {names[j]!r}")
    return PriceSeries(tuple(dates), P, tuple(names[j] for j in keep))


def save_prices_csv(path, series: PriceSeries, fmt=repr):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("date",) + series.names)
        for d, row in zip(series.dates, series.prices):
            w.writerow([d] + [fmt(float(v)) for v in row])


# ------------------------------------------------------------------ returns


def load_returns_csv(path) -> ReturnsMatrix:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError("empty returns file", line=1)
    header = [h.strip() for h in rows[0]]
    has_prob = bool(header) and header[0].lower() == "prob"
    names = header[1:] if has_prob else header
    if not names or any(n == "" for n in names):
        raise DataError("header must name every asset column", line=1)
    probs = []
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise DataError(f"expected {len(header)} fields, found {len(row)}", line=lineno)
        nums = [_parse_float(c.strip(), lineno, "value") for c in row]
        if has_prob:
            if not (nums[0] >= 0.0 and math.isfinite(nums[0])):
                raise DataError(f"invalid probability {row[0]!r}", line=lineno)
            probs.append(nums[0])
            nums = nums[1:]
        if not all(math.isfinite(v) for v in nums):
            raise DataError("non-finite return", line=lineno)
        values.append(nums)
    if not values:
        raise DataError("no scenario rows", line=2)
    if has_prob:
        total = math.fsum(probs)
        if abs(total - 1.0) > 1e-12:
            raise DataError(f"probabilities sum to {total!r}, not 1", line=len(rows))
        space = DiscreteSpace(np.array(probs))
    else:
        space = DiscreteSpace.uniform(len(values))
    return ReturnsMatrix(np.array(values), space, tuple(names))


def save_returns_csv(path, returns: ReturnsMatrix, with_prob=None):
    """Write ``returns``; the ``prob`` column is included unless probabilities are uniform."""
    p = returns.space.probs
    if with_prob is None:
        with_prob = not np.all(p == p[0])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow((("prob",) if with_prob else ()) + returns.names)
        for pw, row in zip(p, returns.values):
            cells = [repr(float(v)) for v in row]
            w.writerow(([repr(float(pw))] if with_prob else []) + cells)


# ---------------------------------------------------------------- synthetic

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed, count, offset=0):
    """Outputs ``offset .. offset + count - 1`` of the SplitMix64 stream for ``seed``."""
    k = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed % 2**64) + k * _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def uniforms(seed, count, offset=0):
    """Doubles on ``[0, 1)`` with 53 random bits each."""
    return (splitmix64(seed, count, offset) >> np.uint64(11)).astype(np.float64) * 2.0**-53


@dataclass(frozen=True)
class Uniform:
    a: float = -1.0
    b: float = 1.0

    def __post_init__(self):
        if not self.a < self.b:
            raise ConfigurationError("uniform distribution needs a < b")


@dataclass(frozen=True)
class Gaussian:
    mean_range: tuple = (-0.2, 1.0)
    vol_range: tuple = (1.0, 4.0)

    def __post_init__(self):
        lo, hi = self.vol_range
        if not (0.0 <= lo <= hi) or not self.mean_range[0] <= self.mean_range[1]:
            raise ConfigurationError("gaussian ranges must be ordered with nonnegative volatility")


@dataclass(frozen=True)
class SyntheticSpec:
    seed: int
    omega: int
    n_assets: int
    distribution: Uniform | Gaussian = field(default_factory=Uniform)

    def __post_init__(self):
        if self.omega < 1 or self.n_assets < 1:
            raise ConfigurationError("omega and n_assets must be at least 1")
        if self.seed < 0:
            raise ConfigurationError("seed must be nonnegative")


def gen_synthetic(spec: SyntheticSpec) -> ReturnsMatrix:
    """Equally likely synthetic scenarios; see the module docstring for the exact recipe."""
    m, n = spec.omega, spec.n_assets
    dist = spec.distribution
    if isinstance(dist, Uniform):
        u = uniforms(spec.seed, m * n).reshape(m, n)
        R = dist.a + (dist.b - dist.a) * u
    else:
        head = uniforms(spec.seed, 2 * n)
        lo, hi = dist.mean_range
        means = lo + (hi - lo) * head[:n]
        lo, hi = dist.vol_range
        vols = lo + (hi - lo) * head[n:]
        pairs = uniforms(spec.seed, 2 * m * n, offset=2 * n).reshape(m * n, 2)
        z = np.sqrt(-2.0 * np.log(1.0 - pairs[:, 0])) * np.cos(2.0 * np.pi * pairs[:, 1])
        R = means + vols * z.reshape(m, n)
    return ReturnsMatrix(R, DiscreteSpace.uniform(m))


# ----------------------------------------------------------------- results


def solution_record(result, problem, preset=None):
    """Plain-data summary of a :class:`~.portfolio.PortfolioSolution`.

    Keys: ``formulation``, ``risk_measure``, ``mu_star``, ``status``,
    ``iterations``, ``objective``, ``lambda`` (null outside the OCE
    formulation), ``weights`` and ``raw_weights`` (asset name to value),
    ``residual_primal``, ``residual_dual``, ``feasibility_residual``,
    ``tau``, ``preset``, ``wall_time_s``.
    """
    names = problem.returns.names
    sol = result.solution
    return {
        "formulation": problem.formulation,
        "risk_measure": problem.label(),
        "mu_star": problem.mu_star,
        "status": sol.status.value,
        "iterations": sol.iterations,
        "objective": result.risk,
        "lambda": result.lam,
        "weights": {k: float(v) for k, v in zip(names, result.weights)},
        "raw_weights": {k: float(v) for k, v in zip(names, result.raw_weights)},
        "residual_primal": sol.residual_primal,
        "residual_dual": sol.residual_dual,
        "feasibility_residual": result.feasibility,
        "tau": result.split.tau,
        "preset": result.split.preset if preset is None else preset,
        "wall_time_s": result.wall_time,
    }


def write_solution(path, record):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2, allow_nan=True)
        fh.write("\n")


def write_frontier_csv(path, points):
    n = len(points[0].weights) if points else 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["mu_star", "risk", "status", "iterations"] + [f"w_{i + 1}" for i in range(n)])
        for pt in points:
            w.writerow(
                [repr(pt.mu_star), repr(float(pt.risk_value)), pt.status.value, pt.iterations]
                + [repr(float(v)) for v in pt.weights]
            )


def frontier_svg(points, width=640, height=420, title="Efficient frontier"):
    """Self-contained SVG line chart of risk against required return.

    Only points with a finite risk are drawn; converged points are filled,
    others hollow.
    """
    pts = [p for p in points if math.isfinite(p.risk_value)]
    pad_l, pad_r, pad_t, pad_b = 70, 20, 40, 50
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="22" text-anchor="middle" font-size="15">{title}</text>',
    ]
    if not pts:
        out.append(f'<text x="{width / 2}" y="{height / 2}" text-anchor="middle">no finite points</text>')
        out.append("</svg>")
        return "\n".join(out)
    xs = [p.mu_star for p in pts]
    ys = [p.risk_value for p in pts]

    def span(vals):
        lo, hi = min(vals), max(vals)
        if hi - lo < 1e-12:
            lo, hi = lo - 0.5, hi + 0.5
        return lo, hi

    x0, x1 = span(xs)
    y0, y1 = span(ys)
    pw = width - pad_l - pad_r
    ph = height - pad_t - pad_b

    def sx(v):
        return pad_l + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return pad_t + ph - (v - y0) / (y1 - y0) * ph

    out.append(
        f'<path d="M{pad_l},{pad_t} V{pad_t + ph} H{pad_l + pw}" fill="none" stroke="black"/>'
    )
    for k in range(5):
        fx = x0 + (x1 - x0) * k / 4
        fy = y0 + (y1 - y0) * k / 4
        out.append(f'<text x="{sx(fx):.1f}" y="{pad_t + ph + 18}" text-anchor="middle">{fx:.3g}</text>')
        out.append(f'<text x="{pad_l - 6}" y="{sy(fy) + 4:.1f}" text-anchor="end">{fy:.3g}</text>')
    out.append(
        f'<text x="{pad_l + pw / 2}" y="{height - 10}" text-anchor="middle">required return mu*</text>'
    )
    out.append(
        f'<text x="16" y="{pad_t + ph / 2}" text-anchor="middle" '
        f'transform="rotate(-90 16 {pad_t + ph / 2})">risk</text>'
    )
    path = " ".join(f"{'M' if i == 0 else 'L'}{sx(x):.2f},{sy(y):.2f}" for i, (x, y) in enumerate(zip(xs, ys)))
    out.append(f'<path d="{path}" fill="none" stroke="#1f5fa8" stroke-width="2"/>')
    for p in pts:
        fill = "#1f5fa8" if p.converged else "white"
        out.append(
            f'<circle cx="{sx(p.mu_star):.2f}" cy="{sy(p.risk_value):.2f}" r="4" '
            f'fill="{fill}" stroke="#1f5fa8"/>'
        )
    out.append("</svg>")
    return "\n".join(out)


def sample_path() -> Path:
    """Location of the bundled weekly price sample (690 dates, 106 assets)."""
    return Path(str(resources.files("pdportfolio") / "data" / "sample_prices.csv"))
