"""Monte Carlo estimation of the lattice-effect function.

The lattice-effect function is the N**rho-scaled probability that an N-step
full-plane walk stays strictly on one side of a line through the origin at
angle theta.  On the square lattice it has period 90 degrees and the
reflection symmetry theta -> 90 - theta, and it is discontinuous exactly at
angles with rational tangent, where sites can sit on the line and the strict
test excludes them.  Those angles are therefore measured separately with an
exact integer side test and stored as isolated special points; the generic
curve is tabulated on a uniform grid and interpolated, never across a
special angle.

The table is normalized so the generic curve integrates to 1 over
[0, 180); downstream use is scale-free (ratio estimators), so the
normalization is cosmetic but pins the quoted values.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional, Tuple

import numpy as np

from .chain import ChainConfig, PivotChain
from .errors import InsufficientDataError
from .exponents import RHO
from .rng import chain_seed
from .walk import FULL_PLANE

DEFAULT_SPECIAL_TANGENTS: Tuple[Tuple[int, int], ...] = (
    (0, 1),   # 0 degrees
    (1, 1),   # 45 degrees
    (1, 2),   # 26.565...
    (1, 3),   # 18.434...
    (2, 3),   # 33.690...
)

_MATCH_TOL = 1e-9


def tangent_angle_deg(p: int, q: int) -> float:
    return math.degrees(math.atan2(p, q))


def estimate_l_at(
    theta_deg: float,
    n_steps: int,
    attempts: int,
    seed: int,
    *,
    tangent: Optional[Tuple[int, int]] = None,
    sample_interval: int = 10,
    n_batches: int = 64,
) -> Tuple[float, float]:
    """Raw (unnormalized) lattice-effect estimate at one angle.

    Runs a full-plane pivot chain and scales the strictly-one-side fraction
    by N**rho.  The error is a batch-means standard error over ``n_batches``
    contiguous chunks.  ``tangent=(p, q)`` switches to the exact integer
    side test for rational-tangent angles.
    """
    if tangent is None and not 0.0 <= theta_deg <= 90.0:
        raise ValueError("theta_deg must lie in [0, 90]")
    per_batch = attempts // n_batches
    if per_batch < sample_interval:
        raise InsufficientDataError(
            f"{attempts} attempts cannot fill {n_batches} nonempty batches "
            f"at interval {sample_interval}"
        )
    config = ChainConfig(
        n_steps=n_steps,
        constraint=FULL_PLANE,
        sample_interval=sample_interval,
        seed=seed,
    )
    chain = PivotChain(config)
    chain.equilibrate()
    fracs = np.empty(n_batches)
    for b in range(n_batches):
        if tangent is not None:
            hits, nsamp = chain.count_one_side(per_batch, tangent=tangent)
        else:
            hits, nsamp = chain.count_one_side(per_batch, theta_deg=theta_deg)
        fracs[b] = hits / nsamp
    scale = float(n_steps) ** RHO
    est = float(fracs.mean()) * scale
    err = float(fracs.std(ddof=1) / math.sqrt(n_batches)) * scale
    return est, err


@dataclass
class LatticeEffectTable:
    """Normalized lattice-effect table: generic grid plus special angles."""

    grid_theta: np.ndarray
    grid_value: np.ndarray
    grid_stderr: np.ndarray
    specials: Dict[Tuple[int, int], Tuple[float, float, float]]  # (p,q) -> (theta, value, stderr)
    n_steps: int
    normalization: float
    rho: Fraction = Fraction(25, 64)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self._folded_cache = None

    # -- lookup ---------------------------------------------------------------

    @staticmethod
    def reduce_angle(tau_deg: float) -> float:
        """Fold by the square-lattice symmetries: period 90 and reflection
        about 45, onto [0, 45].  The reduction map makes lookups exactly
        symmetric by construction."""
        t = tau_deg % 90.0
        return 90.0 - t if t > 45.0 else t

    def _folded(self):
        if self._folded_cache is None:
            t = np.array([self.reduce_angle(x) for x in self.grid_theta])
            order = np.argsort(t, kind="stable")
            ts, vs, es = t[order], self.grid_value[order], self.grid_stderr[order]
            # average mirror pairs (the symmetry is exact, so pooling halves
            # the variance); group by folded angle
            uniq, inverse = np.unique(np.round(ts, 9), return_inverse=True)
            values = np.zeros(len(uniq))
            errs = np.zeros(len(uniq))
            counts = np.zeros(len(uniq))
            for i, g in enumerate(inverse):
                values[g] += vs[i]
                errs[g] += es[i] ** 2
                counts[g] += 1
            values /= counts
            errs = np.sqrt(errs) / counts
            # split the folded grid into segments delimited by special angles
            special_angles = sorted(self.reduce_angle(th) for th, _, _ in self.specials.values())
            edges = [-1.0] + special_angles + [46.0]
            segments = []
            for lo, hi in zip(edges[:-1], edges[1:]):
                sel = (uniq > lo + _MATCH_TOL) & (uniq < hi - _MATCH_TOL)
                if np.any(sel):
                    segments.append((lo, hi, uniq[sel], values[sel], errs[sel]))
            self._folded_cache = segments
        return self._folded_cache

    def lookup(self, tau_deg: float) -> float:
        """Lattice-effect value at a boundary tangent angle.

        Exact special angles return their isolated value; generic angles
        interpolate linearly between grid nodes of the same inter-special
        segment (constant beyond the segment's outermost nodes)."""
        t = self.reduce_angle(tau_deg)
        for (th, val, _err) in self.specials.values():
            if abs(self.reduce_angle(th) - t) <= _MATCH_TOL:
                return val
        for lo, hi, ts, vs, _es in self._folded():
            if lo + _MATCH_TOL < t < hi - _MATCH_TOL:
                return float(np.interp(t, ts, vs))
        raise ValueError(f"angle {tau_deg} not covered by the table")

    def lookup_many(self, tau_deg: np.ndarray) -> np.ndarray:
        """Vectorized lookup; must agree with ``lookup`` pointwise."""
        tau = np.asarray(tau_deg, dtype=float)
        t = np.mod(tau, 90.0)
        t = np.where(t > 45.0, 90.0 - t, t)
        out = np.full(t.shape, np.nan)
        for lo, hi, ts, vs, _es in self._folded():
            sel = (t > lo + _MATCH_TOL) & (t < hi - _MATCH_TOL)
            if np.any(sel):
                out[sel] = np.interp(t[sel], ts, vs)
        for (th, val, _err) in self.specials.values():
            sel = np.abs(self.reduce_angle(th) - t) <= _MATCH_TOL
            if np.any(sel):
                out[sel] = val
        if np.any(np.isnan(out)):
            bad = tau[np.isnan(out)][:3]
            raise ValueError(f"angles not covered by the table: {bad}")
        return out

    def special_value(self, p: int, q: int) -> Tuple[float, float]:
        th, val, err = self.specials[(p, q)]
        return val, err

    def grid_point(self, theta_deg: float) -> Tuple[float, float]:
        i = int(np.argmin(np.abs(self.grid_theta - theta_deg)))
        if abs(self.grid_theta[i] - theta_deg) > _MATCH_TOL:
            raise KeyError(f"{theta_deg} is not a grid angle")
        return float(self.grid_value[i]), float(self.grid_stderr[i])

    def generic_integral(self) -> float:
        """Trapezoid integral of the generic curve over [0, 180)."""
        th = np.concatenate(([0.0], self.grid_theta, [90.0]))
        v = np.concatenate(([self.grid_value[0]], self.grid_value, [self.grid_value[-1]]))
        return 2.0 * float(np.trapezoid(v, th))

    # -- persistence -----------------------------------------------------------

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("# lattice-effect-table v1\n")
            fh.write(f"# n_steps={self.n_steps}\n")
            fh.write(f"# rho={self.rho.numerator}/{self.rho.denominator}\n")
            fh.write(f"# normalization={self.normalization!r}\n")
            for k, v in sorted(self.meta.items()):
                fh.write(f"# {k}={v}\n")
            fh.write("theta_deg,value,stderr,is_special,p,q\n")
            for (p, q), (th, val, err) in sorted(self.specials.items(), key=lambda kv: kv[1][0]):
                fh.write(f"{th!r},{val!r},{err!r},1,{p},{q}\n")
            for th, val, err in zip(self.grid_theta, self.grid_value, self.grid_stderr):
                fh.write(f"{th!r},{val!r},{err!r},0,0,0\n")

    @classmethod
    def from_csv(cls, path) -> "LatticeEffectTable":
        meta = {}
        rows = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    body = line[1:].strip()
                    if "=" in body:
                        k, v = body.split("=", 1)
                        meta[k.strip()] = v.strip()
                    continue
                if line.startswith("theta_deg"):
                    continue
                rows.append(line.split(","))
        if "normalization" not in meta or "n_steps" not in meta:
            raise ValueError(f"{path} is not a lattice-effect table")
        grid = [(float(r[0]), float(r[1]), float(r[2])) for r in rows if r[3] == "0"]
        specials = {
            (int(r[4]), int(r[5])): (float(r[0]), float(r[1]), float(r[2]))
            for r in rows
            if r[3] == "1"
        }
        grid.sort()
        th = np.array([g[0] for g in grid])
        vals = np.array([g[1] for g in grid])
        errs = np.array([g[2] for g in grid])
        num, den = meta.get("rho", "25/64").split("/")
        keep = {k: v for k, v in meta.items() if k not in ("n_steps", "rho", "normalization")}
        return cls(
            grid_theta=th,
            grid_value=vals,
            grid_stderr=errs,
            specials=specials,
            n_steps=int(meta["n_steps"]),
            normalization=float(meta["normalization"]),
            rho=Fraction(int(num), int(den)),
            meta=keep,
        )


def build_table(
    n_steps: int,
    attempts: int,
    seed: int,
    *,
    grid_step: float = 0.5,
    special_tangents: Tuple[Tuple[int, int], ...] = DEFAULT_SPECIAL_TANGENTS,
    boost: Optional[Dict[float, int]] = None,
    sample_interval: int = 10,
    n_batches: int = 64,
    n_jobs: Optional[int] = None,
) -> LatticeEffectTable:
    """Estimate the full table: one independent chain per angle.

    ``attempts`` is the default chain length per point; ``boost`` maps an
    angle (grid node or special, in degrees) to a larger attempt count for
    points that need tighter errors.  Grid nodes colliding with a special
    angle are shifted by half a grid step.
    """
    if grid_step > 1.0:
        raise ValueError("grid resolution must be <= 1 degree")
    specials = []
    special_angles = []
    for (p, q) in special_tangents:
        th = tangent_angle_deg(p, q)
        specials.append((p, q, th))
        special_angles.append(th)

    grid = []
    for t in np.arange(0.0, 90.0, grid_step):
        t = float(round(t, 9))
        if any(abs(t - s) <= _MATCH_TOL or abs(t - (90.0 - s)) <= _MATCH_TOL
               for s in special_angles):
            t += grid_step / 2.0
        grid.append(float(round(t, 9)))

    boost = dict(boost or {})

    def point_attempts(angle):
        for k, v in boost.items():
            if abs(k - angle) <= _MATCH_TOL:
                return v
        return attempts

    jobs = []
    for i, (p, q, th) in enumerate(specials):
        jobs.append(("special", (p, q), th, chain_seed(seed, 1000 + i), point_attempts(th)))
    for i, t in enumerate(grid):
        jobs.append(("grid", None, t, chain_seed(seed, i), point_attempts(t)))

    def run(job):
        kind, tang, th, s, att = job
        return estimate_l_at(
            th if kind == "grid" else 0.0,
            n_steps,
            att,
            s,
            tangent=tang,
            sample_interval=sample_interval,
            n_batches=n_batches,
        )

    workers = n_jobs or os.cpu_count() or 1
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(run, jobs))

    special_map = {}
    grid_vals = []
    grid_errs = []
    for job, (val, err) in zip(jobs, results):
        kind, tang, th, _s, _a = job
        if kind == "special":
            special_map[tang] = (th, val, err)
        else:
            grid_vals.append(val)
            grid_errs.append(err)

    th = np.array(grid)
    vals = np.array(grid_vals)
    errs = np.array(grid_errs)
    ext_t = np.concatenate(([0.0], th, [90.0]))
    ext_v = np.concatenate(([vals[0]], vals, [vals[-1]]))
    normalization = 2.0 * float(np.trapezoid(ext_v, ext_t))

    table = LatticeEffectTable(
        grid_theta=th,
        grid_value=vals / normalization,
        grid_stderr=errs / normalization,
        specials={
            k: (t, v / normalization, e / normalization)
            for k, (t, v, e) in special_map.items()
        },
        n_steps=n_steps,
        normalization=normalization,
        meta={
            "attempts": attempts,
            "seed": seed,
            "grid_step": grid_step,
            "sample_interval": sample_interval,
        },
    )
    return table
