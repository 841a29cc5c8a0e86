"""Command-line entry point: ``magedge <subcommand> --config run.json``."""

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import bands as bands_mod
from . import eigenfield, semiclassics
from .bands import BandStructure
from .cache import BandCache
from .config import load_config
from .counting import BirmanSchwinger, run_counting
from .counting.effective import EffectiveModel, stable_G2_counts
from .errors import ConfigError, ConstantBandError, ConvergenceError, MagEdgeError
from .fiber import converge
from .potential import gap_condition

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERICS = 0, 1, 2, 3
SUBCOMMANDS = ("bands", "gaps", "extrema", "semiclassics", "decay", "count", "oracle", "fitlaw")


def _fmt(x):
    return repr(float(x))


def write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)


def write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


class Context:
    def __init__(self, cfg, args):
        self.cfg = cfg
        self.args = args
        self.out = args.out or cfg.output_dir
        os.makedirs(self.out, exist_ok=True)
        self.cache = None if args.no_cache else BandCache(os.path.join(self.out, ".magedge-cache"))
        self._bands = {}

    def basis_size(self, n_bands):
        cfg = self.cfg
        if cfg.N == "auto":
            return converge(cfg.potential, cfg.b, n_bands, eps=cfg.eps_conv, n_max=cfg.N_max)
        return int(cfg.N)

    def bands(self, n_bands=None):
        n_bands = n_bands or self.cfg.j_max + 1
        if n_bands not in self._bands:
            size = self.basis_size(n_bands)
            self._bands[n_bands] = BandStructure(self.cfg.potential, self.cfg.b, size, self.cfg.Q, n_bands)
        return self._bands[n_bands]

    def sweep(self, bands):
        k = bands_mod.k_grid(bands, self.cfg.k_grid)
        if self.cache is None:
            return k, bands.sweep(k, threads=self.args.threads)
        return k, self.cache.sweep(bands, k, threads=self.args.threads)

    def meta(self):
        return {"seed": self.args.seed, "b": self.cfg.b, "period": self.cfg.potential.period}

    def path(self, name):
        return os.path.join(self.out, name)


def cmd_bands(ctx):
    b = ctx.bands()
    k, (energies, _) = ctx.sweep(b)
    header = ["k"] + [f"E_{j}" for j in range(1, b.n_bands + 1)]
    rows = [header] + [[_fmt(kk)] + [_fmt(e) for e in row] for kk, row in zip(k, energies)]
    write_csv(ctx.path("bands.csv"), rows)


def _analyses(ctx):
    b = ctx.bands()
    k, sweep = ctx.sweep(b)
    return b, bands_mod.band_edges_and_gaps(b, ctx.cfg.j_max, grid=ctx.cfg.k_grid, sweep=sweep)


def cmd_gaps(ctx):
    _, analyses = _analyses(ctx)
    doc = {
        **ctx.meta(),
        "gap_condition": gap_condition(ctx.cfg.potential, ctx.cfg.b),
        "bands": [
            {
                "j": a.j,
                "e_min": a.e_min,
                "e_max": a.e_max,
                "width": a.width,
                "constant": a.constant,
                "gap_above": list(a.gap_above) if a.gap_above else None,
                "gap_width": (a.gap_above[1] - a.gap_above[0]) if a.gap_above else None,
            }
            for a in analyses
        ],
    }
    write_json(ctx.path("gaps.json"), doc)


def _points(points):
    return [
        {"k": p.k, "value": p.value, "second_derivative": p.second_derivative, "mu": p.mu, "degenerate": p.degenerate}
        for p in points
    ]


def cmd_extrema(ctx):
    _, analyses = _analyses(ctx)
    doc = {**ctx.meta(), "bands": []}
    for a in analyses:
        entry = {"j": a.j, "constant": a.constant}
        if a.constant:
            entry["error"] = f"band {a.j} is constant in k; extremum set undefined"
        else:
            entry.update({"minima": _points(a.minima), "maxima": _points(a.maxima), "A_plus": len(a.maxima)})
        doc["bands"].append(entry)
    write_json(ctx.path("extrema.json"), doc)


def cmd_semiclassics(ctx):
    cfg = ctx.cfg
    W = cfg.potential
    sc = cfg.semiclassics
    js = sc.get("bands", [1, 2])
    x0s = sc.get("x0", [0.25, -0.25, 0.0, 0.5])
    b = ctx.bands(max(max(js), 2))
    k_grid = np.arange(sc.get("k_points", 32)) * (b.tau / sc.get("k_points", 32))
    report = {**ctx.meta(), "bands": [], "kkp_drift": None}
    for j in js:
        c = semiclassics.constants(j, W)
        entry = {"constants": c.as_dict(), "thresholds": []}
        for x0 in x0s:
            item = {"x0": x0}
            for name, fn in (("b0", c.b0), ("b1", c.b1)):
                try:
                    item[name] = fn(W, x0)
                except MagEdgeError as exc:
                    item[name] = None
                    item[f"{name}_error"] = str(exc)
            entry["thresholds"].append(item)
        try:
            first = semiclassics.verify_first_bound(W, j, cfg.b, k_grid, bands=b, consts=c)
            second = semiclassics.verify_second_bound(W, j, cfg.b, k_grid, bands=b, consts=c)
            entry["first_bound"] = {"residual": first.residual, "bound": first.bound, "pass": first.passed()}
            entry["second_bound"] = {"residual": second.residual, "bound": second.bound, "pass": second.passed()}
        except MagEdgeError as exc:
            entry["bound_error"] = str(exc)
        report["bands"].append(entry)
    drift = semiclassics.kkp_drift(W, cfg.b, cfg.j_max, bands=ctx.bands(), grid=cfg.k_grid)
    report["kkp_drift"] = [{"j": j, "lower": lo, "upper": hi} for j, lo, hi in drift]
    write_json(ctx.path("semiclassics.json"), report)


def cmd_decay(ctx):
    d = ctx.cfg.decay
    j = d.get("band", 1)
    b = ctx.bands(max(j, 2))
    xi = d.get("xi", list(np.linspace(4.0, 8.0, 17)))
    fit = eigenfield.decay_slope(b, j, d.get("k0", 0.0), tuple(d.get("interval", (-0.5, 0.5))), xi)
    rows = [["xi", "ln_mass", "s"]] + [
        [_fmt(x), _fmt(m), _fmt(r)] for x, m, r in zip(fit.xi, fit.log_mass, fit.ratio)
    ]
    write_csv(ctx.path("decay.csv"), rows)
    write_json(
        ctx.path("decay.json"),
        {**ctx.meta(), "slope": fit.slope, "target": -ctx.cfg.b, "residual": fit.residual, "dropped": list(fit.dropped)},
    )


def _require_perturbation(ctx):
    if ctx.cfg.perturbation is None:
        raise ConfigError("perturbation", "this subcommand needs a perturbation block")
    return ctx.cfg.perturbation


def _write_report(ctx, report, stem):
    if "csv" in ctx.cfg.formats:
        write_csv(ctx.path(f"{stem}.csv"), report.csv_rows())
    if "json" in ctx.cfg.formats:
        write_json(ctx.path(f"{stem}.json"), {**ctx.meta(), **report.summary()})


def _fittable(lams):
    return len(lams) >= 4 and np.log10(max(lams) / min(lams)) >= 6.0


def cmd_count(ctx):
    V = _require_perturbation(ctx)
    cfg = ctx.cfg
    b = ctx.bands(max(cfg.j_max + 1, cfg.band + 1))
    report = run_counting(b, cfg.band, V, cfg.lambdas, methods=cfg.methods, fit=_fittable(cfg.lambdas))
    _write_report(ctx, report, "count")


def cmd_fitlaw(ctx):
    V = _require_perturbation(ctx)
    cfg = ctx.cfg
    b = ctx.bands(cfg.band + 1)
    report = run_counting(b, cfg.band, V, cfg.lambdas, methods=("G2", "nu"))
    doc = {
        **ctx.meta(),
        "slope": report.fit.slope,
        "residual": report.fit.residual,
        "sandwich": list(report.sandwich),
        "within_sandwich_20pct": bool(
            0.8 * report.sandwich[0] <= report.fit.slope <= 1.2 * report.sandwich[1]
        ),
        "nu_ratio_lower": report.meta["nu_ratio_lower"],
        "nu_ratio_upper": report.meta["nu_ratio_upper"],
    }
    write_json(ctx.path("fitlaw.json"), doc)


def cmd_oracle(ctx):
    V = _require_perturbation(ctx)
    cfg = ctx.cfg
    lams = cfg.oracle_lambdas or list(np.logspace(-4, -2, 8))
    n_bands = max(cfg.j_max + 1, cfg.band + 2)
    b = ctx.bands(n_bands)
    model = EffectiveModel.from_bands(b, cfg.band)
    g2, _ = stable_G2_counts(model, V, lams, L=cfg.L)
    bs = BirmanSchwinger(b, cfg.band, V, min(lams))
    oracle = [bs.count(lam) for lam in lams]
    rows = [["lambda", "N_G2", "N_oracle"]] + [[_fmt(l), str(a), str(o)] for l, a, o in zip(lams, g2, oracle)]
    write_csv(ctx.path("oracle.csv"), rows)
    dev = max(abs(a - o) for a, o in zip(g2, oracle))
    write_json(
        ctx.path("oracle.json"),
        {**ctx.meta(), "max_deviation": dev, "K_O1": cfg.K_O1, "pass": dev <= cfg.K_O1, "j_max": bs.j_max},
    )


COMMANDS = {
    "bands": cmd_bands,
    "gaps": cmd_gaps,
    "extrema": cmd_extrema,
    "semiclassics": cmd_semiclassics,
    "decay": cmd_decay,
    "count": cmd_count,
    "oracle": cmd_oracle,
    "fitlaw": cmd_fitlaw,
}


def build_parser():
    p = argparse.ArgumentParser(prog="magedge", description="Band structure and gap-eigenvalue counting")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", help="output directory (overrides output.directory)")
    p.add_argument("--threads", type=int, default=1, help="worker threads for k-sweeps")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (recorded in outputs)")
    p.add_argument("--no-cache", action="store_true", help="bypass the band cache")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.seed < 0 or args.seed >= 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        COMMANDS[args.subcommand](Context(cfg, args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICS
    except (ConstantBandError, MagEdgeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
