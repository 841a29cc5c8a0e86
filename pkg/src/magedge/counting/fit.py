"""Gaussian accumulation fit and the counting report."""

from dataclasses import dataclass, field
import math

import numpy as np

from ..errors import PreconditionError

MIN_POINTS = 4
MIN_DECADES = 6.0


@dataclass(frozen=True)
class GaussianFit:
    slope: float
    intercept: float
    residual: float  # RMS deviation of N from the fitted line
    n_points: int


def gaussian_fit(lams, counts, min_decades=MIN_DECADES):
    """Least-squares N(lambda) ~ slope * sqrt|ln lambda| + intercept."""
    lams = np.asarray(lams, dtype=np.float64)
    counts = np.asarray(counts, dtype=np.float64)
    usable = np.isfinite(counts) & (lams > 0) & (lams < 1)
    lams, counts = lams[usable], counts[usable]
    if lams.size < MIN_POINTS:
        raise PreconditionError(f"{lams.size} usable points; the fit needs at least {MIN_POINTS}")
    span = math.log10(lams.max() / lams.min())
    if span < min_decades:
        raise PreconditionError(f"lambda grid spans {span:.2f} decades; at least {min_decades:g} required")
    x = np.sqrt(np.abs(np.log(lams)))
    design = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(design, counts, rcond=None)
    resid = float(np.sqrt(np.mean((design @ coef - counts) ** 2)))
    return GaussianFit(float(coef[0]), float(coef[1]), resid, int(lams.size))


@dataclass
class CountingReport:
    """Counts per method on a lambda grid, the fitted slope and the limit sandwich."""

    lams: list
    counts: dict = field(default_factory=dict)  # method name -> list of ints
    fit: GaussianFit = None
    sandwich: tuple = None  # (lower, upper)
    meta: dict = field(default_factory=dict)

    METHODS = ("G2", "M1", "nu_lo", "nu_hi", "oracle")

    def csv_rows(self):
        header = ["lambda"] + [f"N_{m}" for m in self.METHODS]
        rows = [header]
        for i, lam in enumerate(self.lams):
            row = [repr(float(lam))]
            for m in self.METHODS:
                vals = self.counts.get(m)
                row.append("" if vals is None else str(int(vals[i])))
            rows.append(row)
        return rows

    def summary(self):
        out = {"lambdas": [float(x) for x in self.lams], "counts": self.counts, **self.meta}
        if self.fit is not None:
            out["fit"] = {
                "slope": self.fit.slope,
                "intercept": self.fit.intercept,
                "residual": self.fit.residual,
                "n_points": self.fit.n_points,
            }
        if self.sandwich is not None:
            lo, hi = self.sandwich
            out["sandwich"] = {"lower": lo, "upper": hi}
            if self.fit is not None:
                out["slope_within_sandwich"] = bool(lo <= self.fit.slope <= hi)
        return out
