"""Experiment orchestration and comparison statistics.

An experiment runs parallel pivot chains against one benchmark geometry,
keeps the samples passing the strict-interior filter, and compares the
weighted boundary-parameter distribution against the matching closed-form
law: the maximum absolute CDF difference (with a batch-means error at the
argmax), the L2 difference of binned densities, per-segment hitting masses,
and a scan estimating the dilation power by minimizing the L2 difference.

Comparison axes per geometry: the chordal strip compares in the abscissa,
the radial strip and the circles in their native angles (the centered
circle folded mod 90, matching the lattice symmetry), the triangle in the
polar angle folded mod 120 (which removes the per-side lattice effect).
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .analytic import AnalyticLaw, CenteredCircleLaw, TriangleLaw, law_for
from .chain import ChainConfig, PivotChain
from .domains import StarDomain, make_domain
from .errors import BinningError, BracketError, ConfigError, InsufficientDataError
from .estimator import SampleSet, WeightedCdf, weighted_cdf, segment_masses
from .exponents import P_CHORDAL, P_RADIAL
from .lattice_effect import LatticeEffectTable
from .rng import chain_seed
from .svgplot import svg_plot
from .walk import HALF_PLANE

COMPARISON_AXES = {
    "strip_chordal": "native",
    "strip_radial": "native",
    "triangle": "mod120",
    "circle_centered": "mod90",
    "circle_offcenter": "native",
    "circle_partial": "native",
    "circle_tangent": "native",
}

TRIANGLE_SEGMENTS = ((0.0, 120.0), (120.0, 240.0), (240.0, 360.0))

_COLLECT_CHUNK = 1 << 16  # samples per kernel call


@dataclass
class ExperimentConfig:
    geometry: str
    n_steps: int = 4000
    attempts: int = 10_000_000  # attempted pivots across all chains, after warm-up
    chains: int = 2
    seed: int = 1
    p: Optional[float] = None  # None = exact value for the geometry kind
    correction: bool = False
    ltable_path: Optional[str] = None
    outdir: Optional[str] = None
    sample_interval: int = 10
    equilibration: Optional[int] = None
    svg: bool = False
    geometry_params: Dict[str, float] = field(default_factory=dict)

    def domain(self) -> StarDomain:
        return make_domain(self.geometry, **self.geometry_params)

    def validate(self) -> None:
        if self.geometry not in COMPARISON_AXES:
            raise ConfigError(f"unknown geometry {self.geometry!r}")
        if self.n_steps < 2:
            raise ConfigError("n_steps must be >= 2")
        if self.attempts <= 0:
            raise ConfigError("attempts must be positive")
        if self.chains < 1:
            raise ConfigError("chains must be >= 1")
        if self.sample_interval < 1:
            raise ConfigError("sample_interval must be >= 1")
        if self.correction and not self.ltable_path:
            raise ConfigError("correction=1 requires ltable_path")

    def default_p(self) -> float:
        return P_CHORDAL if self.domain().kind == "chordal" else P_RADIAL

    def p_value(self) -> float:
        return self.default_p() if self.p is None else float(self.p)


@dataclass
class ComparisonReport:
    geometry: str
    kind: str
    axis: str
    n_steps: int
    p: float
    correction: bool
    max_cdf_diff: float
    max_cdf_diff_stderr: float
    argmax_param: float
    l2_density_diff: float
    segment_masses: Optional[List[Tuple[Tuple[float, float], float, float]]]
    n_retained: int
    n_windowed_out: int
    n_samples_total: int
    acceptance_fraction: float
    pass_fraction: float
    ess: float
    wall_time_s: float

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        if self.segment_masses is not None:
            d["segment_masses"] = [
                {"lo": lo, "hi": hi, "mass": m, "stderr": e}
                for (lo, hi), m, e in self.segment_masses
            ]
        return d


# -- axis helpers --------------------------------------------------------------


def fold_params(params: np.ndarray, axis: str) -> np.ndarray:
    if axis == "native":
        return params
    if axis == "mod90":
        return np.mod(params, 90.0)
    if axis == "mod120":
        return np.mod(params, 120.0)
    raise ConfigError(f"unknown axis {axis!r}")


def axis_range(law: AnalyticLaw, axis: str) -> Tuple[float, float]:
    if axis == "native":
        return law.finite_range(1e-6)
    if axis == "mod90":
        return 0.0, 90.0
    if axis == "mod120":
        return 0.0, 120.0
    raise ConfigError(f"unknown axis {axis!r}")


def law_cdf_on(law: AnalyticLaw, axis: str, pts: np.ndarray) -> np.ndarray:
    pts = np.asarray(pts, dtype=np.float64)
    if axis == "native":
        return law.cdf_many(pts)
    if axis == "mod90":
        if not isinstance(law, CenteredCircleLaw):
            raise ConfigError("mod90 axis is defined for the centered circle only")
        return np.clip(pts / 90.0, 0.0, 1.0)
    if axis == "mod120":
        if not isinstance(law, TriangleLaw):
            raise ConfigError("mod120 axis is defined for the triangle only")
        arcs = np.array([law.arc_of_theta(float(t)) for t in np.clip(pts, 0.0, 120.0)])
        return law.cdf_many(arcs)
    raise ConfigError(f"unknown axis {axis!r}")


def law_density_on(law: AnalyticLaw, axis: str, pts: np.ndarray,
                   domain: Optional[StarDomain] = None) -> np.ndarray:
    """Normalized density on the comparison axis."""
    pts = np.asarray(pts, dtype=np.float64)
    if axis == "native":
        return np.array([law.normalized_density(float(t)) for t in pts])
    if axis == "mod90":
        return np.full(len(pts), 1.0 / 90.0)
    if axis == "mod120":
        if domain is None:
            raise ConfigError("mod120 density needs the domain for the arc Jacobian")
        out = np.empty(len(pts))
        for i, t in enumerate(pts):
            arc = law.arc_of_theta(float(t))
            jac = domain.arc_jacobian(float(t)) * math.pi / 180.0
            out[i] = law.normalized_density(arc) * jac
        return out
    raise ConfigError(f"unknown axis {axis!r}")


# -- comparison statistics -------------------------------------------------------


def max_cdf_difference(
    empirical: WeightedCdf,
    law: AnalyticLaw,
    axis: str = "native",
    refinement: int = 2048,
) -> Tuple[float, float, float]:
    """Supremum of |empirical - analytic| over the empirical step points and
    a uniform refinement grid.  Returns (value, stderr_at_argmax, argmax)."""
    if empirical.axis != axis:
        raise ConfigError(f"empirical CDF axis {empirical.axis!r} != requested {axis!r}")
    lo, hi = axis_range(law, axis)
    lo = min(lo, float(empirical.params[0]))
    hi = max(hi, float(empirical.params[-1]))
    grid = np.unique(np.concatenate([
        empirical.params,
        np.linspace(lo, hi, refinement),
    ]))
    f_law = law_cdf_on(law, axis, grid)
    up = np.abs(empirical.evaluate(grid) - f_law)
    down = np.abs(empirical.evaluate_left(grid) - f_law)
    diffs = np.maximum(up, down)
    i = int(np.argmax(diffs))
    argmax = float(grid[i])
    return float(diffs[i]), float(empirical.stderr_at(argmax)), argmax


def l2_density_difference(
    samples: SampleSet,
    p: float,
    law: AnalyticLaw,
    bins: int = 64,
    axis: str = "native",
    domain: Optional[StarDomain] = None,
    hist_range: Optional[Tuple[float, float]] = None,
) -> float:
    """Integrated squared difference between the binned weighted density and
    the law density over the comparison range."""
    x = fold_params(samples.param, axis)
    w = samples.weights(p)
    lo, hi = hist_range if hist_range is not None else axis_range(law, axis)
    hist, edges = np.histogram(x, bins=bins, range=(lo, hi), weights=w)
    width = edges[1] - edges[0]
    nonzero = int(np.count_nonzero(hist))
    if nonzero < min(50, bins):
        raise BinningError(f"only {nonzero} nonzero bins out of {bins}")
    if bins - nonzero > 0.2 * bins:
        raise BinningError(f"{bins - nonzero} empty bins out of {bins}")
    total = w.sum()
    dens_emp = hist / (total * width)
    centers = 0.5 * (edges[:-1] + edges[1:])
    dens_law = law_density_on(law, axis, centers, domain=domain)
    # the law is normalized over its full range; renormalize both densities
    # to the histogram window so truncation does not masquerade as error
    law_mass = float(dens_law.sum() * width)
    emp_mass = float(dens_emp.sum() * width)
    if law_mass <= 0.0 or emp_mass <= 0.0:
        raise BinningError("comparison window carries no mass")
    dens_law = dens_law / law_mass
    dens_emp = dens_emp / emp_mass
    return float(np.sum((dens_emp - dens_law) ** 2) * width)


@dataclass
class PowerScan:
    p_star: float
    p_grid: np.ndarray
    values: np.ndarray


def estimate_p(
    samples: SampleSet,
    p_grid: Sequence[float],
    law: AnalyticLaw,
    bins: int = 64,
    axis: str = "native",
    domain: Optional[StarDomain] = None,
) -> PowerScan:
    """Estimate the dilation power by minimizing the L2 density difference
    over a grid, refined by a quadratic fit through the three lowest points.

    Samples carry raw dilations, so the scan is pure reweighting."""
    p_grid = np.asarray(sorted(p_grid), dtype=np.float64)
    if len(p_grid) < 3:
        raise ConfigError("p grid needs at least 3 points")
    values = np.array([
        l2_density_difference(samples, float(p), law, bins=bins, axis=axis, domain=domain)
        for p in p_grid
    ])
    i = int(np.argmin(values))
    if i == 0 or i == len(p_grid) - 1:
        raise BracketError(f"minimum at grid edge p={p_grid[i]}; widen the grid")
    x0, x1, x2 = p_grid[i - 1: i + 2]
    y0, y1, y2 = values[i - 1: i + 2]
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom
    p_star = float(-b / (2 * a)) if a > 0 else float(x1)
    return PowerScan(p_star=p_star, p_grid=p_grid, values=values)


# -- sample generation -------------------------------------------------------------


def _run_one_chain(config: ExperimentConfig, chain_id: int):
    domain = config.domain()
    dcode, ip, fp = domain.kernel_spec()
    cc = ChainConfig(
        n_steps=config.n_steps,
        constraint=domain.constraint,
        sample_interval=config.sample_interval,
        equilibration=config.equilibration,
        seed=chain_seed(config.seed, chain_id),
    )
    chain = PivotChain(cc)
    chain.equilibrate()
    per_chain = -(-config.attempts // config.chains)  # ceil
    cap = _COLLECT_CHUNK
    out_ord = np.empty(cap, np.int64)
    out_x = np.empty(cap, np.int64)
    out_y = np.empty(cap, np.int64)
    out_lam = np.empty(cap, np.float64)
    ords, exs, eys, lams = [], [], [], []
    remaining = per_chain
    while remaining > 0:
        n_att = min(remaining, cap * config.sample_interval)
        npass, _ = chain.collect_filtered(dcode, ip, fp, n_att, out_ord, out_x, out_y, out_lam)
        if npass:
            ords.append(out_ord[:npass].copy())
            exs.append(out_x[:npass].copy())
            eys.append(out_y[:npass].copy())
            lams.append(out_lam[:npass].copy())
        remaining -= n_att
    cat = lambda parts, dt: (np.concatenate(parts) if parts else np.empty(0, dt))
    return (
        chain_id,
        cat(ords, np.int64),
        cat(exs, np.int64),
        cat(eys, np.int64),
        cat(lams, np.float64),
        chain.stats(),
        chain,
    )


def collect_experiment_samples(config: ExperimentConfig,
                               table: Optional[LatticeEffectTable] = None):
    """Run all chains and assemble the retained SampleSet.

    Returns (samples, info dict, chains)."""
    config.validate()
    domain = config.domain()
    workers = min(config.chains, os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda cid: _run_one_chain(config, cid),
                                range(config.chains)))
    results.sort(key=lambda r: r[0])

    chain_ids = np.concatenate([np.full(len(r[1]), r[0], np.int64) for r in results])
    sample_idx = np.concatenate([r[1] for r in results])
    ex = np.concatenate([r[2] for r in results])
    ey = np.concatenate([r[3] for r in results])
    lam = np.concatenate([r[4] for r in results])

    attempted = sum(r[5].attempted for r in results)
    accepted = sum(r[5].accepted for r in results)
    total_samples = sum(r[5].samples for r in results)
    n_interior = len(lam)

    if n_interior == 0:
        raise InsufficientDataError("no samples passed the strict-interior filter")

    theta, param, w, tau, keep = domain.endpoint_stats(
        ex.astype(np.float64), ey.astype(np.float64), lam
    )
    if config.correction:
        if table is None:
            raise ConfigError("lattice correction requested but no table supplied")
        l_values = table.lookup_many(tau)
    else:
        l_values = np.ones_like(lam)

    samples = SampleSet(
        chain_ids[keep], sample_idx[keep], lam[keep], ex[keep], ey[keep],
        theta[keep], param[keep], w[keep], l_values[keep],
    )
    info = {
        "n_samples_total": int(total_samples),
        "n_interior": int(n_interior),
        "n_retained": len(samples),
        "n_windowed_out": int(n_interior - int(keep.sum())),
        "attempted": int(attempted),
        "accepted": int(accepted),
        "acceptance_fraction": accepted / attempted if attempted else 0.0,
        "pass_fraction": len(samples) / total_samples if total_samples else 0.0,
    }
    return samples, info, [r[6] for r in results]


# -- the experiment driver ------------------------------------------------------------


def run_experiment(config: ExperimentConfig,
                   table: Optional[LatticeEffectTable] = None) -> ComparisonReport:
    """Sample, compare against the law, and write the output files."""
    t0 = time.monotonic()
    config.validate()
    if config.correction and table is None:
        table = LatticeEffectTable.from_csv(config.ltable_path)

    domain = config.domain()
    law = law_for(domain)
    axis = COMPARISON_AXES[config.geometry]
    p = config.p_value()

    samples, info, chains = collect_experiment_samples(config, table)
    report = analyze_samples(config, samples, info, domain=domain, law=law, axis=axis, p=p)
    report.wall_time_s = time.monotonic() - t0

    if config.outdir:
        write_outputs(config, samples, report, law, axis, chains)
    return report


def analyze_samples(config: ExperimentConfig, samples: SampleSet, info: dict,
                    *, domain=None, law=None, axis=None, p=None) -> ComparisonReport:
    domain = domain or config.domain()
    law = law or law_for(domain)
    axis = axis or COMPARISON_AXES[config.geometry]
    p = config.p_value() if p is None else p

    folded = fold_params(samples.param, axis)
    cdf = weighted_cdf(samples, p, axis=axis, param=folded)
    diff, err, argmax = max_cdf_difference(cdf, law, axis=axis)
    lo, hi = axis_range(law, axis)
    q_lo, q_hi = np.quantile(folded, [0.001, 0.999])
    l2 = l2_density_difference(samples, p, law, axis=axis, domain=domain,
                               hist_range=(max(lo, float(q_lo)), min(hi, float(q_hi))))
    masses = None
    if config.geometry == "triangle":
        masses = segment_masses(samples, p, TRIANGLE_SEGMENTS)

    return ComparisonReport(
        geometry=config.geometry,
        kind=domain.kind,
        axis=axis,
        n_steps=config.n_steps,
        p=p,
        correction=config.correction,
        max_cdf_diff=diff,
        max_cdf_diff_stderr=err,
        argmax_param=argmax,
        l2_density_diff=l2,
        segment_masses=masses,
        n_retained=info["n_retained"],
        n_windowed_out=info["n_windowed_out"],
        n_samples_total=info["n_samples_total"],
        acceptance_fraction=info["acceptance_fraction"],
        pass_fraction=info["pass_fraction"],
        ess=cdf.ess,
        wall_time_s=0.0,
    )


def cdf_table(samples: SampleSet, p: float, law: AnalyticLaw, axis: str,
              n_rows: int = 1024):
    """Rows (param, empirical, analytic, diff, stderr) on a merged grid."""
    folded = fold_params(samples.param, axis)
    cdf = weighted_cdf(samples, p, axis=axis, param=folded)
    lo, hi = axis_range(law, axis)
    lo = min(lo, float(cdf.params[0]))
    hi = max(hi, float(cdf.params[-1]))
    qgrid = np.quantile(cdf.params, np.linspace(0.0, 1.0, n_rows // 2))
    grid = np.unique(np.concatenate([np.linspace(lo, hi, n_rows // 2), qgrid, [hi]]))
    emp = cdf.evaluate(grid)
    ana = law_cdf_on(law, axis, grid)
    err = cdf.stderr_at(grid)
    return grid, emp, ana, emp - ana, err


def write_outputs(config: ExperimentConfig, samples: SampleSet,
                  report: ComparisonReport, law: AnalyticLaw, axis: str,
                  chains=None) -> dict:
    outdir = Path(config.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {}

    samples_path = outdir / "samples.csv"
    samples.to_csv(samples_path)
    paths["samples"] = str(samples_path)

    grid, emp, ana, diff, err = cdf_table(samples, report.p, law, axis)
    cdf_path = outdir / "cdf.csv"
    with open(cdf_path, "w") as fh:
        fh.write("param,empirical,analytic,diff,stderr\n")
        for row in zip(grid, emp, ana, diff, err):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    paths["cdf"] = str(cdf_path)

    report_path = outdir / "report.txt"
    with open(report_path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths["report"] = str(report_path)

    if chains:
        for chain in chains:
            ck = outdir / f"chain_{chain.config.seed & 0xffff:04x}.checkpoint"
            chain.save(ck)

    if config.svg:
        svg_path = outdir / "cdf.svg"
        svg_plot(
            svg_path,
            [
                {"name": "empirical", "x": grid, "y": emp},
                {"name": "analytic", "x": grid, "y": ana, "dash": True},
            ],
            title=f"{config.geometry} boundary CDF (p={report.p:.4f})",
            xlabel=f"{axis} parameter",
            ylabel="CDF",
        )
        paths["svg"] = str(svg_path)
    return paths
