"""sawdilate: pivot-algorithm Monte Carlo for self-avoiding walks in bounded
star-shaped planar domains.

Walks of a fixed length are sampled in the full or half plane; each sample
is rescaled by the dilation putting its endpoint on the domain boundary,
kept if it stays strictly interior, and weighted by a power of the dilation
times a boundary-thickness factor (optionally divided by the lattice-effect
function).  The resulting boundary-endpoint distributions are compared with
closed-form SLE partition-function predictions.
"""

from .analysis import (
    ComparisonReport,
    ExperimentConfig,
    PowerScan,
    estimate_p,
    l2_density_difference,
    max_cdf_difference,
    run_experiment,
)
from .analytic import AnalyticLaw, ScMap, law_for, make_law
from .chain import ChainConfig, ChainStats, CheckpointError, PivotChain, run_chain
from .domains import StarDomain, make_domain
from .errors import BinningError, BracketError, ConfigError, InsufficientDataError
from .estimator import (
    DilationSample,
    SampleSet,
    WeightedCdf,
    observe,
    segment_masses,
    weighted_cdf,
)
from .exponents import EXPONENTS, CriticalExponents, P_CHORDAL, P_RADIAL, RHO
from .lattice_effect import LatticeEffectTable, build_table, estimate_l_at
from .walk import (
    FULL_PLANE,
    HALF_PLANE,
    LatticeWalk,
    check_self_avoiding,
    enumerate_saws,
    make_rod,
    pivot_once,
    stays_strictly_one_side,
)

__version__ = "0.1.0"

__all__ = [
    "AnalyticLaw", "BinningError", "BracketError", "ChainConfig", "ChainStats",
    "CheckpointError", "ComparisonReport", "ConfigError", "CriticalExponents",
    "DilationSample", "EXPONENTS", "ExperimentConfig", "FULL_PLANE", "HALF_PLANE",
    "InsufficientDataError", "LatticeEffectTable", "LatticeWalk", "P_CHORDAL",
    "P_RADIAL", "PivotChain", "PowerScan", "RHO", "SampleSet", "ScMap",
    "StarDomain", "WeightedCdf", "build_table", "check_self_avoiding",
    "enumerate_saws", "estimate_l_at", "estimate_p", "l2_density_difference",
    "law_for", "make_domain", "make_law", "make_rod", "max_cdf_difference",
    "observe", "pivot_once", "run_chain", "run_experiment", "segment_masses",
    "stays_strictly_one_side", "weighted_cdf",
]
