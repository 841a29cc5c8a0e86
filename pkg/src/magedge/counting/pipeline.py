"""One-call counting sweep used by the CLI and the acceptance suite."""

import math

from .effective import EffectiveModel, M1Operator, nu_bounds, sandwich_bounds, stable_G2_counts
from .fit import CountingReport, gaussian_fit
from .oracle import BirmanSchwinger


def run_counting(bands, j, V, lams, methods=("G2", "nu"), fit=True, m1_order=(16, 16), oracle_order=(12, 12)):
    """Counts on ``lams`` for the requested methods: "G2", "M1", "nu", "oracle"."""
    lams = [float(x) for x in lams]
    model = EffectiveModel.from_bands(bands, j)
    report = CountingReport(lams)
    g2, L = stable_G2_counts(model, V, lams)
    report.counts["G2"] = g2
    report.meta.update(
        {
            "band": j,
            "lattice_cutoff": L,
            "maxima": [{"k": s.k, "mu": s.mu} for s in model.states],
            "edge": model.e_max,
        }
    )
    if "M1" in methods:
        op = M1Operator(model, V, L, m1_order)
        report.counts["M1"] = [op.count(lam) for lam in lams]
    if "nu" in methods:
        nu = nu_bounds(model, V, min(lams))
        report.counts["nu_lo"] = [nu.count_lower(2.0 * math.sqrt(lam)) for lam in lams]
        report.counts["nu_hi"] = [nu.count_upper(2.0 * math.sqrt(lam)) for lam in lams]
        ratios_lo = [nu.count_lower(math.sqrt(lam)) / math.sqrt(abs(math.log(lam))) for lam in lams]
        ratios_hi = [nu.count_upper(math.sqrt(lam)) / math.sqrt(abs(math.log(lam))) for lam in lams]
        report.meta["nu_ratio_lower"] = ratios_lo
        report.meta["nu_ratio_upper"] = ratios_hi
        report.meta["L_q"] = nu.L_q
    if "oracle" in methods:
        bs = BirmanSchwinger(bands, j, V, min(lams), order=oracle_order)
        report.counts["oracle"] = [bs.count(lam) for lam in lams]
    lower, upper = sandwich_bounds(model, V)
    report.sandwich = (lower, upper)
    if fit:
        report.fit = gaussian_fit(lams, g2)
    return report
