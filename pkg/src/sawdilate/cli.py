"""Command-line interface.

Subcommands:
  ltable      build or inspect a lattice-effect table (CSV)
  sample      run pivot chains for a geometry, write samples.csv + checkpoints
  analyze     compare a samples.csv against the closed-form law
  estimate-p  scan the dilation power on stored samples
  analytic    tabulate a law's density and CDF as CSV
  plot        render an SVG overlay from a cdf.csv

Run configuration is a flat key=value file; see ``CONFIG_KEYS``.
Exit codes: 0 success, 2 configuration error, 3 insufficient data, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .analysis import (
    COMPARISON_AXES,
    ComparisonReport,
    ExperimentConfig,
    analyze_samples,
    collect_experiment_samples,
    estimate_p,
    law_cdf_on,
    run_experiment,
    write_outputs,
)
from .analytic import make_law
from .domains import GEOMETRIES, make_domain
from .errors import BracketError, ConfigError, InsufficientDataError
from .estimator import SampleSet
from .lattice_effect import LatticeEffectTable, build_table
from .svgplot import svg_plot

CONFIG_KEYS = {
    "geometry": str,          # one of the seven benchmark names
    "n_steps": int,           # walk length N
    "attempts": int,          # attempted pivots across all chains (post warm-up)
    "chains": int,            # parallel chains
    "seed": int,              # master seed; chain i uses seed XOR i
    "p": float,               # dilation power override; omit for the exact value
    "correction": bool,       # divide weights by the lattice-effect value
    "ltable_path": str,       # lattice-effect table CSV
    "outdir": str,            # output directory
    "sample_interval": int,   # attempted pivots between retained samples
    "equilibration": int,     # warm-up attempts; omit for 10*N accepted pivots
    "svg": bool,              # also write an SVG overlay
    "h": float,               # radial strip: origin height above the lower line
    "a": float,               # off-center circle: center abscissa
    "b": float,               # off-center / partial circle: center ordinate
}

_GEOMETRY_PARAM_KEYS = ("h", "a", "b")


def _parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {s!r}")


def parse_config(path) -> ExperimentConfig:
    raw = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        typ = CONFIG_KEYS[key]
        try:
            raw[key] = _parse_bool(value) if typ is bool else typ(value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    if "geometry" not in raw:
        raise ConfigError(f"{path}: missing required key 'geometry'")

    geometry_params = {}
    geometry = raw["geometry"]
    if geometry == "strip_radial" and "h" in raw:
        from fractions import Fraction

        geometry_params["h"] = Fraction(raw["h"]).limit_denominator(10**6)
    if geometry == "circle_offcenter":
        for k in ("a", "b"):
            if k in raw:
                geometry_params[k] = raw[k]
    if geometry == "circle_partial" and "b" in raw:
        geometry_params["b"] = raw["b"]

    kwargs = {k: v for k, v in raw.items() if k in (
        "geometry", "n_steps", "attempts", "chains", "seed", "p", "correction",
        "ltable_path", "outdir", "sample_interval", "equilibration", "svg")}
    config = ExperimentConfig(geometry_params=geometry_params, **kwargs)
    config.validate()
    return config


def _grid_from_arg(arg: str):
    parts = arg.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must be lo:hi:n, got {arg!r}")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 2 or hi <= lo:
        raise ConfigError("grid needs hi > lo and n >= 2")
    return np.linspace(lo, hi, n)


def cmd_ltable(args) -> int:
    if args.action == "inspect":
        table = LatticeEffectTable.from_csv(args.table)
        print(f"n_steps={table.n_steps} normalization={table.normalization!r}")
        print(f"grid: {len(table.grid_theta)} points in "
              f"[{table.grid_theta[0]}, {table.grid_theta[-1]}]")
        print(f"generic integral over [0,180): {table.generic_integral():.9f}")
        for (p, q), (th, val, err) in sorted(table.specials.items(), key=lambda kv: kv[1][0]):
            print(f"special tan={p}/{q} ({th:.6f} deg): {val:.6g} +- {err:.2g}")
        return 0
    boost = {}
    for spec in args.boost or []:
        angle, _, att = spec.partition("=")
        try:
            boost[float(angle)] = int(att)
        except ValueError:
            raise ConfigError(f"bad boost spec {spec!r}; expected angle=attempts")
    table = build_table(
        n_steps=args.n_steps,
        attempts=args.attempts,
        seed=args.seed,
        grid_step=args.grid_step,
        boost=boost or None,
        sample_interval=args.interval,
        n_jobs=args.jobs,
    )
    table.to_csv(args.out)
    print(f"wrote {args.out} ({len(table.grid_theta)} grid points, "
          f"{len(table.specials)} specials)")
    return 0


def cmd_sample(args) -> int:
    config = parse_config(args.config)
    if not config.outdir:
        raise ConfigError("the sample command needs outdir in the config")
    table = None
    if config.correction:
        table = LatticeEffectTable.from_csv(config.ltable_path)
    samples, info, chains = collect_experiment_samples(config, table)
    outdir = Path(config.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    samples.to_csv(outdir / "samples.csv")
    for cid, chain in enumerate(chains):
        chain.save(outdir / f"chain_{cid:03d}.checkpoint")
    print(f"retained {info['n_retained']} / {info['n_samples_total']} samples "
          f"({100 * info['pass_fraction']:.3f}%), acceptance "
          f"{100 * info['acceptance_fraction']:.1f}%")
    print(f"wrote {outdir / 'samples.csv'}")
    return 0


def cmd_analyze(args) -> int:
    config = parse_config(args.config)
    samples_path = args.samples or (Path(config.outdir or ".") / "samples.csv")
    samples = SampleSet.from_csv(samples_path)
    info = {
        "n_retained": len(samples),
        "n_windowed_out": 0,
        "n_samples_total": 0,
        "acceptance_fraction": float("nan"),
        "pass_fraction": float("nan"),
    }
    report = analyze_samples(config, samples, info)
    if config.outdir:
        from .analytic import law_for

        write_outputs(config, samples, report, law_for(config.domain()),
                      COMPARISON_AXES[config.geometry])
    print(f"max |dCDF| = {report.max_cdf_diff:.6f} +- {report.max_cdf_diff_stderr:.6f} "
          f"at param {report.argmax_param:.4f}")
    print(f"L2 density difference = {report.l2_density_diff:.3e}")
    if report.segment_masses:
        for (lo, hi), m, e in report.segment_masses:
            print(f"segment [{lo:g},{hi:g}): mass {m:.6f} +- {e:.6f}")
    return 0


def cmd_estimate_p(args) -> int:
    config = parse_config(args.config)
    samples = SampleSet.from_csv(args.samples)
    from .analytic import law_for

    domain = config.domain()
    scan = estimate_p(samples, _grid_from_arg(args.grid), law_for(domain),
                      bins=args.bins, axis=COMPARISON_AXES[config.geometry],
                      domain=domain)
    for p, v in zip(scan.p_grid, scan.values):
        print(f"p={p:+.6f}  L2={v:.6e}")
    print(f"p* = {scan.p_star:.6f}")
    return 0


def cmd_analytic(args) -> int:
    params = {}
    if args.geometry == "strip_radial" and args.h is not None:
        params["h"] = args.h
    if args.geometry == "circle_offcenter":
        if args.a is not None:
            params["a"] = args.a
        if args.b is not None:
            params["b"] = args.b
    if args.geometry == "circle_partial" and args.b is not None:
        params["b"] = args.b
    law = make_law(args.geometry, **params)
    if args.grid:
        grid = _grid_from_arg(args.grid)
    else:
        lo, hi = law.finite_range(1e-5)
        grid = np.linspace(lo, hi, args.n)
    lo, hi = law.param_range
    inner = grid[(grid > lo) & (grid < hi)]
    dens = np.array([law.normalized_density(float(x)) for x in inner])
    cdfs = law.cdf_many(inner)
    out = args.out or f"{args.geometry}_law.csv"
    with open(out, "w") as fh:
        fh.write("param,density,cdf\n")
        for row in zip(inner, dens, cdfs):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    print(f"wrote {out} ({len(inner)} rows)")
    return 0


def cmd_plot(args) -> int:
    data = np.genfromtxt(args.csv, delimiter=",", names=True)
    cols = data.dtype.names
    if args.x not in cols:
        raise ConfigError(f"column {args.x!r} not in {cols}")
    series = []
    for name in args.y:
        if name not in cols:
            raise ConfigError(f"column {name!r} not in {cols}")
        series.append({"name": name, "x": data[args.x], "y": data[name],
                       "dash": len(series) % 2 == 1})
    svg_plot(args.out, series, title=args.title or Path(args.csv).name,
             xlabel=args.x, ylabel=",".join(args.y))
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sawdilate", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    lt = sub.add_parser("ltable", help="build or inspect a lattice-effect table")
    lt.add_argument("action", choices=["build", "inspect"])
    lt.add_argument("--table", help="table CSV to inspect")
    lt.add_argument("--out", help="output CSV for build")
    lt.add_argument("--n-steps", type=int, default=2000, dest="n_steps")
    lt.add_argument("--attempts", type=int, default=1_000_000,
                    help="attempts per grid point")
    lt.add_argument("--grid-step", type=float, default=0.5, dest="grid_step")
    lt.add_argument("--seed", type=int, default=1)
    lt.add_argument("--interval", type=int, default=10)
    lt.add_argument("--jobs", type=int, default=None)
    lt.add_argument("--boost", action="append",
                    help="angle=attempts override, repeatable")
    lt.set_defaults(func=cmd_ltable)

    sp = sub.add_parser("sample", help="run chains, write samples.csv + checkpoints")
    sp.add_argument("--config", required=True)
    sp.set_defaults(func=cmd_sample)

    an = sub.add_parser("analyze", help="compare samples.csv against the law")
    an.add_argument("--config", required=True)
    an.add_argument("--samples", help="samples.csv path (default: outdir/samples.csv)")
    an.set_defaults(func=cmd_analyze)

    ep = sub.add_parser("estimate-p", help="scan the dilation power")
    ep.add_argument("--config", required=True)
    ep.add_argument("--samples", required=True)
    ep.add_argument("--grid", default="-1.5:0.0:16", help="lo:hi:n")
    ep.add_argument("--bins", type=int, default=64)
    ep.set_defaults(func=cmd_estimate_p)

    al = sub.add_parser("analytic", help="tabulate a closed-form law")
    al.add_argument("--geometry", required=True, choices=sorted(GEOMETRIES))
    al.add_argument("--grid", help="lo:hi:n (default: automatic)")
    al.add_argument("--n", type=int, default=512)
    al.add_argument("--h", type=float, default=None)
    al.add_argument("--a", type=float, default=None)
    al.add_argument("--b", type=float, default=None)
    al.add_argument("--out")
    al.set_defaults(func=cmd_analytic)

    pl = sub.add_parser("plot", help="SVG overlay from a CSV")
    pl.add_argument("--csv", required=True)
    pl.add_argument("--out", required=True)
    pl.add_argument("--x", default="param")
    pl.add_argument("--y", nargs="+", default=["empirical", "analytic"])
    pl.add_argument("--title", default=None)
    pl.set_defaults(func=cmd_plot)

    run = sub.add_parser("run", help="sample + analyze in one go")
    run.add_argument("--config", required=True)
    run.set_defaults(func=cmd_run)
    return ap


def cmd_run(args) -> int:
    config = parse_config(args.config)
    report = run_experiment(config)
    print(f"max |dCDF| = {report.max_cdf_diff:.6f} +- {report.max_cdf_diff_stderr:.6f}")
    print(f"retained {report.n_retained} samples "
          f"({100 * report.pass_fraction:.3f}% of chain samples)")
    return 0


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (InsufficientDataError, BracketError) as exc:
        print(f"insufficient data: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
