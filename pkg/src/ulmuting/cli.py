"""Scenario runner: parameter sweeps over the analytic framework and/or the
Monte Carlo engine, CSV outputs, and a report with analytic-vs-MC deviations
and rendered figures.

CSV rows are written with shortest-round-trip float formatting in a fixed
order, so repeated runs with identical (config, sweep, seed) are
byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from . import amc, mc
from .config import (ConfigError, classify_regime, config_from_dict,
                     config_to_dict, dbm_to_watts, load_config, validate)
from .gca import GcaContext

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SWEEP_PARAMETERS = ("i0_dbm", "epsilon", "p_max_dbm", "weight_ratio_db",
                    "lambda_scale")
SCALAR_METRICS = ("pr_active", "mean_power_w", "mean_interference_w",
                  "var_interference_w2", "mean_se_bps_hz",
                  "mean_se_active_bps_hz", "mean_br_bps", "mean_br_active_bps")


@dataclass(frozen=True)
class SweepSpec:
    """One swept parameter, its grid, and which engines/schemes to run."""

    parameter: str
    grid: tuple
    engines: str = "both"
    schemes: tuple = ("IAM",)

    def validate(self):
        errs = []
        if self.parameter not in SWEEP_PARAMETERS:
            errs.append(f"parameter must be one of {SWEEP_PARAMETERS}")
        if not self.grid:
            errs.append("sweep grid must be nonempty")
        if self.engines not in ("analytic", "montecarlo", "both"):
            errs.append("engines must be analytic|montecarlo|both")
        bad = [s for s in self.schemes if s not in ("IAM", "IUM", "IAFPC",
                                                    "IUFPC")]
        if bad:
            errs.append(f"unknown schemes: {bad}")
        return errs


def load_sweep(path) -> SweepSpec:
    path = Path(path)
    if path.suffix == ".json":
        raw = json.loads(path.read_text())
    else:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    return SweepSpec(parameter=str(raw.get("parameter", "")),
                     grid=tuple(float(v) for v in raw.get("grid", ())),
                     engines=str(raw.get("engines", "both")),
                     schemes=tuple(raw.get("schemes", ("IAM",))))


def apply_sweep_value(cfg, parameter, value):
    """Resolve one grid point into a concrete config (dB converted once)."""
    if parameter == "i0_dbm":
        return cfg.with_caps(i0=dbm_to_watts(value))
    if parameter == "p_max_dbm":
        return cfg.with_caps(p_max=dbm_to_watts(value))
    if parameter == "epsilon":
        from dataclasses import replace
        return replace(cfg, epsilon=value)
    if parameter == "weight_ratio_db":
        return cfg.with_weight_ratio_db(value)
    if parameter == "lambda_scale":
        return cfg.with_density_scale(value)
    raise ValueError(f"unknown sweep parameter {parameter}")


# ----------------------------------------------------------------------
# engines
# ----------------------------------------------------------------------

def _analytic_point(cfg, gamma_grid_db, table):
    """All scalar metrics plus the SINR CCDF curve from the framework.
    Returns None for IAFPC (no analytic framework)."""
    if cfg.scheme == "IAFPC":
        return None
    ctx = GcaContext(cfg)
    mean_i, var_i = ctx.interference_moments()
    scalars = {
        "pr_active": ctx.pr_active(),
        "mean_power_w": ctx.mean_transmit_power(),
        "mean_interference_w": mean_i,
        "var_interference_w2": var_i,
        "mean_se_bps_hz": amc.mean_se(ctx, table),
        "mean_se_active_bps_hz": amc.mean_se(ctx, table, True),
        "mean_br_bps": amc.mean_br(ctx, table),
        "mean_br_active_bps": amc.mean_br(ctx, table, True),
    }
    ccdf = [(g, ctx.sinr_ccdf(10.0 ** (g / 10.0))) for g in gamma_grid_db]
    return scalars, ccdf


def _mc_point(cfg, n_drops, seed, gamma_grid_db, table):
    opts = mc.SimOptions(sinr_grid_db=tuple(gamma_grid_db))
    ms = mc.run_campaign(cfg, n_drops, seed, opts, table)
    scalars = {
        "pr_active": (ms.pr_active, ms.pr_active_se),
        "mean_power_w": (ms.mean_power, ms.mean_power_se),
        "mean_interference_w": (ms.mean_interference, ms.mean_interference_se),
        "var_interference_w2": (ms.var_interference, ms.var_interference_se),
        "mean_se_bps_hz": (ms.mean_se, math.nan),
        "mean_se_active_bps_hz": (ms.mean_se_active, math.nan),
        "mean_br_bps": (ms.mean_br, ms.mean_br_se),
        "mean_br_active_bps": (ms.mean_br_active, math.nan),
    }
    ccdf = list(zip(gamma_grid_db, ms.sinr_ccdf))
    return scalars, ccdf


# ----------------------------------------------------------------------
# output
# ----------------------------------------------------------------------

def _fmt(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x))


def _write_metric_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sweep_value", "scheme", "engine", "metric", "value",
                    "ci_low", "ci_high"])
        for r in rows:
            w.writerow(r)


def run(config_path, sweep_path, out_dir, seed, n_drops,
        gamma_grid_db=tuple(range(-10, 41, 2))) -> int:
    """Execute the sweep and write one CSV per metric plus a manifest.
    Returns the process exit code (0 on success)."""
    try:
        cfg0 = load_config(config_path)
        sweep = load_sweep(sweep_path)
        errs = sweep.validate()
        if errs:
            raise ConfigError(errs)
    except (ConfigError, OSError, json.JSONDecodeError,
            tomllib.TOMLDecodeError) as exc:
        print(f"ERROR: {exc}", file=sys.stderr)
        return 2

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table = amc.default_table()

    metric_rows = {m: [] for m in SCALAR_METRICS}
    ccdf_rows = []
    resolved = []
    engines = []
    if sweep.engines in ("analytic", "both"):
        engines.append("analytic")
    if sweep.engines in ("montecarlo", "both"):
        engines.append("montecarlo")

    for pt_idx, value in enumerate(sweep.grid):
        for scheme in sweep.schemes:
            from dataclasses import replace
            cfg = apply_sweep_value(replace(cfg0, scheme=scheme),
                                    sweep.parameter, value)
            bad = validate(cfg)
            if bad:
                print(f"ERROR: grid point {value}: {'; '.join(bad)}",
                      file=sys.stderr)
                return 2
            resolved.append({"sweep_value": value, "scheme": scheme,
                             "config": config_to_dict(cfg)})
            for engine in engines:
                if engine == "analytic":
                    res = _analytic_point(cfg, gamma_grid_db, table)
                    if res is None:
                        continue
                    scalars, ccdf = res
                    for m in SCALAR_METRICS:
                        metric_rows[m].append(
                            [_fmt(value), scheme, engine, m,
                             _fmt(scalars[m]), "", ""])
                else:
                    # decorrelate grid points without losing reproducibility
                    pt_seed = (seed, pt_idx, scheme)
                    pt_seed = int.from_bytes(
                        repr(pt_seed).encode(), "little") % (2 ** 63)
                    scalars, ccdf = _mc_point(cfg, n_drops, pt_seed,
                                              gamma_grid_db, table)
                    for m in SCALAR_METRICS:
                        v, se = scalars[m]
                        lo = v - 1.96 * se if not math.isnan(se) else None
                        hi = v + 1.96 * se if not math.isnan(se) else None
                        metric_rows[m].append(
                            [_fmt(value), scheme, engine, m, _fmt(v),
                             _fmt(lo), _fmt(hi)])
                for g, c in ccdf:
                    ccdf_rows.append([_fmt(value), scheme, engine,
                                      _fmt(g), _fmt(c)])

    for m in SCALAR_METRICS:
        _write_metric_csv(out / f"{m}.csv", metric_rows[m])
    with open(out / "sinr_ccdf.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sweep_value", "scheme", "engine", "gamma_db", "value"])
        w.writerows(ccdf_rows)

    manifest = {
        "version": __version__,
        "seed": seed,
        "n_drops": n_drops,
        "sweep": {"parameter": sweep.parameter, "grid": list(sweep.grid),
                  "engines": sweep.engines, "schemes": list(sweep.schemes)},
        "base_config": config_to_dict(cfg0),
        "points": resolved,
        "gamma_grid_db": list(gamma_grid_db),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2,
                                                  sort_keys=True) + "\n")
    print(f"wrote {len(SCALAR_METRICS) + 1} CSV files to {out}")
    return 0


# ----------------------------------------------------------------------
# report
# ----------------------------------------------------------------------

def _read_metric(path):
    rows = {}
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            key = (r["sweep_value"], r["scheme"])
            rows.setdefault(key, {})[r["engine"]] = r
    return rows


def report(out_dir, make_figures=True) -> int:
    """Summarize a finished run: per-metric analytic-vs-MC max relative
    deviation, the regime label per grid point, and (optionally) one rendered
    figure per metric next to the CSVs."""
    out = Path(out_dir)
    manifest_path = out / "manifest.json"
    if not manifest_path.exists():
        print(f"ERROR: no manifest.json under {out}", file=sys.stderr)
        return 2
    manifest = json.loads(manifest_path.read_text())

    regimes = {}
    for pt in manifest["points"]:
        regimes[(repr(float(pt["sweep_value"])), pt["scheme"])] = \
            pt["config"]["regime"]

    print(f"{'metric':28s} {'max |analytic-mc|/|analytic|':>30s}")
    summary = []
    for m in SCALAR_METRICS:
        path = out / f"{m}.csv"
        if not path.exists():
            print(f"ERROR: missing {path}", file=sys.stderr)
            return 2
        rows = _read_metric(path)
        devs = []
        for key, by_engine in rows.items():
            if "analytic" in by_engine and "montecarlo" in by_engine:
                a = float(by_engine["analytic"]["value"])
                b = float(by_engine["montecarlo"]["value"])
                if a != 0:
                    devs.append(abs(a - b) / abs(a))
        dev = f"{max(devs):.3%}" if devs else "n/a"
        summary.append((m, dev))
        print(f"{m:28s} {dev:>30s}")

    print("\nper-point regimes:")
    for (val, scheme), regime in sorted(regimes.items(),
                                        key=lambda kv: (kv[0][1],
                                                        float(kv[0][0]))):
        print(f"  {scheme:6s} sweep={float(val):<10g} {regime}")

    if make_figures:
        _render_figures(out, manifest)
        print(f"\nfigures written to {out / 'figures'}")
    return 0


def _render_figures(out: Path, manifest):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    figdir = out / "figures"
    figdir.mkdir(exist_ok=True)
    param = manifest["sweep"]["parameter"]
    for m in SCALAR_METRICS:
        rows = _read_metric(out / f"{m}.csv")
        series = {}
        for (val, scheme), by_engine in rows.items():
            for engine, r in by_engine.items():
                series.setdefault((scheme, engine), []).append(
                    (float(val), float(r["value"])))
        if not series:
            continue
        fig, ax = plt.subplots(figsize=(6, 4))
        for (scheme, engine), pts in sorted(series.items()):
            pts.sort()
            xs = [p[0] for p in pts]
            ys = [p[1] for p in pts]
            style = "-o" if engine == "analytic" else "--s"
            ax.plot(xs, ys, style, label=f"{scheme} ({engine})", ms=4)
        ax.set_xlabel(param)
        ax.set_ylabel(m)
        if all(v > 0 for pts in series.values() for _, v in pts):
            ax.set_yscale("log")
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8)
        fig.tight_layout()
        fig.savefig(figdir / f"{m}.png", dpi=120)
        plt.close(fig)

    # CCDF overlay: one panel per scheme, curves per sweep value
    rows = []
    with open(out / "sinr_ccdf.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows:
        fig, ax = plt.subplots(figsize=(6, 4))
        seen = {}
        for r in rows:
            key = (r["scheme"], r["engine"], r["sweep_value"])
            seen.setdefault(key, []).append((float(r["gamma_db"]),
                                             float(r["value"])))
        for (scheme, engine, val), pts in sorted(seen.items()):
            pts.sort()
            style = "-" if engine == "analytic" else "--"
            ax.plot([p[0] for p in pts], [p[1] for p in pts], style,
                    label=f"{scheme}/{engine} @ {float(val):g}", lw=1)
        ax.set_xlabel("gamma (dB)")
        ax.set_ylabel("Pr(SINR > gamma)")
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=6, ncol=2)
        fig.tight_layout()
        fig.savefig(figdir / "sinr_ccdf.png", dpi=120)
        plt.close(fig)


# ----------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------

def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="ulmuting",
        description="Uplink interference-aware muting: analytics + Monte Carlo")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a sweep")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--sweep", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--seed", type=int, default=1)
    p_run.add_argument("--drops", type=int, default=10000)

    p_rep = sub.add_parser("report", help="summarize a finished run")
    p_rep.add_argument("--out", required=True)
    p_rep.add_argument("--no-figures", action="store_true")

    args = parser.parse_args(argv)
    if args.command == "run":
        return run(args.config, args.sweep, args.out, args.seed, args.drops)
    return report(args.out, make_figures=not args.no_figures)


if __name__ == "__main__":
    sys.exit(main())
