"""Sample filtering and weighted boundary statistics.

A chain sample survives if its dilation is defined, the walk is strictly
interior to the dilated domain, and the boundary parameter falls inside the
domain's conditioning window.  Surviving samples carry the raw dilation so
any power can be applied at analysis time; the full weight of a sample is
lam**p * w_thickness / l_value, normalized over the retained set (a ratio
estimator, so dropped samples never enter numerator or denominator).

Standard errors come from batch means: each chain's retained stream is cut
into contiguous chunks, chunk j pooled across chains forms batch j, and the
spread of per-batch statistics estimates the error of the pooled one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .domains import StarDomain, UndefinedDilationError
from .errors import InsufficientDataError
from .lattice_effect import LatticeEffectTable
from .walk import LatticeWalk

DEFAULT_BATCHES = 64


@dataclass(frozen=True)
class DilationSample:
    """One retained observation."""

    lam: float
    endpoint: Tuple[int, int]
    theta_deg: float
    param: float
    w_thickness: float
    l_value: float
    chain_id: int = 0
    sample_index: int = 0


def observe(
    domain: StarDomain,
    walk: LatticeWalk,
    correction: Optional[LatticeEffectTable] = None,
    chain_id: int = 0,
    sample_index: int = 0,
) -> Optional[DilationSample]:
    """Reference per-walk filter; the jitted bulk path must agree with it."""
    endpoint = walk.endpoint()
    try:
        lam = domain.dilation_of(endpoint)
    except UndefinedDilationError:
        return None
    if not domain.strictly_inside(walk):
        return None
    param = domain.boundary_parameter(endpoint, lam)
    if param is None:
        return None
    theta = math.degrees(math.atan2(endpoint[1], endpoint[0])) % 360.0
    geo = domain.boundary_geometry(theta)
    w = 1.0 / (geo.distance * abs(math.cos(math.radians(theta - geo.alpha_deg))))
    l_value = correction.lookup(geo.tau_deg) if correction is not None else 1.0
    return DilationSample(
        lam=lam,
        endpoint=endpoint,
        theta_deg=theta,
        param=param,
        w_thickness=w,
        l_value=l_value,
        chain_id=chain_id,
        sample_index=sample_index,
    )


class SampleSet:
    """Column store of retained samples, ordered by (chain_id, sample_index)."""

    FIELDS = ("chain_id", "sample_index", "lam", "end_x", "end_y",
              "theta_deg", "param", "w_thickness", "l_value")

    def __init__(self, chain_id, sample_index, lam, end_x, end_y,
                 theta_deg, param, w_thickness, l_value):
        self.chain_id = np.asarray(chain_id, dtype=np.int64)
        self.sample_index = np.asarray(sample_index, dtype=np.int64)
        self.lam = np.asarray(lam, dtype=np.float64)
        self.end_x = np.asarray(end_x, dtype=np.int64)
        self.end_y = np.asarray(end_y, dtype=np.int64)
        self.theta_deg = np.asarray(theta_deg, dtype=np.float64)
        self.param = np.asarray(param, dtype=np.float64)
        self.w_thickness = np.asarray(w_thickness, dtype=np.float64)
        self.l_value = np.asarray(l_value, dtype=np.float64)
        order = np.lexsort((self.sample_index, self.chain_id))
        if not np.array_equal(order, np.arange(len(order))):
            for name in self.FIELDS:
                setattr(self, name, getattr(self, name)[order])

    def __len__(self):
        return len(self.lam)

    @classmethod
    def from_samples(cls, samples: Sequence[DilationSample]) -> "SampleSet":
        return cls(
            [s.chain_id for s in samples],
            [s.sample_index for s in samples],
            [s.lam for s in samples],
            [s.endpoint[0] for s in samples],
            [s.endpoint[1] for s in samples],
            [s.theta_deg for s in samples],
            [s.param for s in samples],
            [s.w_thickness for s in samples],
            [s.l_value for s in samples],
        )

    def weights(self, p: float) -> np.ndarray:
        return self.lam ** p * self.w_thickness / self.l_value

    def with_param(self, param: np.ndarray) -> "SampleSet":
        """Same samples on a transformed parameter axis."""
        return SampleSet(self.chain_id, self.sample_index, self.lam,
                         self.end_x, self.end_y, self.theta_deg,
                         param, self.w_thickness, self.l_value)

    # -- CSV round trip ------------------------------------------------------

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(",".join(self.FIELDS) + "\n")
            for i in range(len(self)):
                fh.write(
                    f"{self.chain_id[i]},{self.sample_index[i]},{float(self.lam[i])!r},"
                    f"{self.end_x[i]},{self.end_y[i]},{float(self.theta_deg[i])!r},"
                    f"{float(self.param[i])!r},{float(self.w_thickness[i])!r},"
                    f"{float(self.l_value[i])!r}\n"
                )

    @classmethod
    def from_csv(cls, path) -> "SampleSet":
        data = np.genfromtxt(path, delimiter=",", names=True, dtype=None, encoding="utf-8")
        data = np.atleast_1d(data)
        return cls(*(data[name] for name in cls.FIELDS))

    def batch_ids(self, n_batches: int) -> np.ndarray:
        """Contiguous chunk label per sample: chunk j of each chain pools
        into batch j."""
        ids = np.empty(len(self), dtype=np.int64)
        for cid in np.unique(self.chain_id):
            mask = self.chain_id == cid
            m = int(mask.sum())
            ids[mask] = np.minimum(
                np.arange(m) * n_batches // max(m, 1), n_batches - 1
            )
        return ids


class WeightedCdf:
    """Normalized weighted empirical CDF with batch-means errors."""

    def __init__(self, params, cum, grid, grid_stderr, ess, n_samples, axis="native"):
        self.params = params
        self.cum = cum
        self.grid = grid
        self.grid_stderr = grid_stderr
        self.ess = ess
        self.n_samples = n_samples
        self.axis = axis

    def evaluate(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        idx = np.searchsorted(self.params, t, side="right")
        vals = np.concatenate(([0.0], self.cum))
        return vals[idx]

    def evaluate_left(self, t) -> np.ndarray:
        """Left limit, i.e. the CDF just below t."""
        t = np.asarray(t, dtype=np.float64)
        idx = np.searchsorted(self.params, t, side="left")
        vals = np.concatenate(([0.0], self.cum))
        return vals[idx]

    def stderr_at(self, t) -> np.ndarray:
        return np.interp(np.asarray(t, dtype=np.float64), self.grid, self.grid_stderr)


def weighted_cdf(
    samples: SampleSet,
    p: float,
    n_batches: int = DEFAULT_BATCHES,
    grid_size: int = 256,
    axis: str = "native",
    param: Optional[np.ndarray] = None,
) -> WeightedCdf:
    """Build the weighted CDF of the boundary parameter (or of ``param``)."""
    n = len(samples)
    if n < 30:
        raise InsufficientDataError(f"{n} samples < 30")
    x = samples.param if param is None else np.asarray(param, dtype=np.float64)
    w = samples.weights(p)
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ws = w[order]
    cum = np.cumsum(ws)
    total = cum[-1]
    cum = cum / total

    bids = samples.batch_ids(n_batches)
    occupied = np.unique(bids)
    if len(occupied) < 30:
        raise InsufficientDataError(f"only {len(occupied)} nonempty batches < 30")

    grid = np.quantile(xs, np.linspace(0.0, 1.0, grid_size))
    per_batch = np.empty((len(occupied), grid_size))
    for row, b in enumerate(occupied):
        sel = bids == b
        xb = x[sel]
        wb = w[sel]
        ob = np.argsort(xb, kind="stable")
        xb = xb[ob]
        cb = np.cumsum(wb[ob])
        if cb[-1] == 0.0:
            per_batch[row] = 0.0
            continue
        idx = np.searchsorted(xb, grid, side="right")
        vals = np.concatenate(([0.0], cb / cb[-1]))
        per_batch[row] = vals[idx]
    nb = len(occupied)
    stderr = per_batch.std(axis=0, ddof=1) / math.sqrt(nb)

    ess = float(total * total / np.sum(ws * ws))
    return WeightedCdf(xs, cum, grid, stderr, ess, n, axis=axis)


def segment_masses(
    samples: SampleSet,
    p: float,
    segmentation: Sequence[Tuple[float, float]],
    n_batches: int = DEFAULT_BATCHES,
) -> List[Tuple[Tuple[float, float], float, float]]:
    """Probability mass of each half-open parameter segment [lo, hi).

    Segments must be disjoint and cover the retained parameter range; masses
    then sum to one.
    """
    if len(samples) < 30:
        raise InsufficientDataError("too few samples for segment masses")
    for (lo, hi) in segmentation:
        if hi <= lo:
            raise ValueError("segments must satisfy lo < hi")
    w = samples.weights(p)
    total = w.sum()
    covered = np.zeros(len(samples), dtype=bool)
    bids = samples.batch_ids(n_batches)
    occupied = np.unique(bids)
    if len(occupied) < 30:
        raise InsufficientDataError("fewer than 30 nonempty batches")

    out = []
    for (lo, hi) in segmentation:
        sel = (samples.param >= lo) & (samples.param < hi)
        if np.any(sel & covered):
            raise ValueError("segments overlap")
        covered |= sel
        mass = float(w[sel].sum() / total)
        ratios = np.empty(len(occupied))
        for row, b in enumerate(occupied):
            inb = bids == b
            tb = w[inb].sum()
            ratios[row] = w[inb & sel].sum() / tb if tb > 0 else 0.0
        stderr = float(ratios.std(ddof=1) / math.sqrt(len(occupied)))
        out.append(((lo, hi), mass, stderr))
    if not covered.all():
        raise ValueError("segmentation does not cover the retained parameter range")
    return out
