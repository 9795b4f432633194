"""Square-lattice self-avoiding walks and the pivot move.

A walk is stored in unit lattice coordinates with site 0 pinned to the
origin.  The lattice spacing is factored out of all downstream geometry (it
enters only through the per-sample dilation), so there is no spacing field.

This module holds the pure-Python reference implementation of the pivot
update; production chains run the jitted twin in ``_kernels`` which consumes
the identical random stream and therefore produces the identical chain.
"""

from __future__ import annotations

import math
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from .rng import SplitMix64

Site = Tuple[int, int]

FULL_PLANE = "full_plane"
HALF_PLANE = "half_plane"

# The 7 non-identity elements of the square-lattice point group, as
# (x, y) -> (ax*x + bx*y, ay*x + by*y).  Order is load-bearing: the chain
# draws symmetry ids uniformly from this list and the jitted kernel hard-codes
# the same table.
SYMMETRIES: List[Tuple[int, int, int, int]] = [
    (0, -1, 1, 0),   # rotation +90
    (-1, 0, 0, -1),  # rotation 180
    (0, 1, -1, 0),   # rotation -90
    (1, 0, 0, -1),   # reflection across x axis
    (-1, 0, 0, 1),   # reflection across y axis
    (0, 1, 1, 0),    # reflection across y = x
    (0, -1, -1, 0),  # reflection across y = -x
]

SYMMETRY_MATRICES = [np.array([[ax, bx], [ay, by]]) for ax, bx, ay, by in SYMMETRIES]


def apply_symmetry(sym_id: int, dx: int, dy: int) -> Tuple[int, int]:
    ax, bx, ay, by = SYMMETRIES[sym_id]
    return ax * dx + bx * dy, ay * dx + by * dy


class LatticeWalk:
    """An N-step self-avoiding walk anchored at the origin.

    ``xs``/``ys`` are int64 arrays of length N+1; ``occupancy`` maps packed
    coordinates to site indices for O(1) membership tests.
    """

    __slots__ = ("xs", "ys", "occupancy")

    def __init__(self, xs: np.ndarray, ys: np.ndarray, validate: bool = True):
        self.xs = np.asarray(xs, dtype=np.int64)
        self.ys = np.asarray(ys, dtype=np.int64)
        if validate:
            if self.xs[0] != 0 or self.ys[0] != 0:
                raise ValueError("walk must start at the origin")
            if not check_self_avoiding(list(zip(self.xs.tolist(), self.ys.tolist()))):
                raise ValueError("sites do not form a self-avoiding walk")
        self.occupancy = {
            (int(x), int(y)): i
            for i, (x, y) in enumerate(zip(self.xs.tolist(), self.ys.tolist()))
        }

    @property
    def n_steps(self) -> int:
        return len(self.xs) - 1

    def sites(self) -> List[Site]:
        return list(zip(self.xs.tolist(), self.ys.tolist()))

    def endpoint(self) -> Site:
        return int(self.xs[-1]), int(self.ys[-1])

    def copy(self) -> "LatticeWalk":
        return LatticeWalk(self.xs.copy(), self.ys.copy(), validate=False)

    def __contains__(self, site: Site) -> bool:
        return site in self.occupancy

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LatticeWalk)
            and np.array_equal(self.xs, other.xs)
            and np.array_equal(self.ys, other.ys)
        )


def make_rod(n: int, direction: Site = (1, 0)) -> LatticeWalk:
    """Straight n-step walk along a unit lattice direction."""
    dx, dy = direction
    if abs(dx) + abs(dy) != 1 or dx * dy != 0:
        raise ValueError(f"direction must be a unit lattice vector, got {direction}")
    if n < 0:
        raise ValueError("step count must be nonnegative")
    idx = np.arange(n + 1, dtype=np.int64)
    return LatticeWalk(idx * dx, idx * dy, validate=False)


def check_self_avoiding(sites: Sequence[Site]) -> bool:
    """Oracle: sites are pairwise distinct and consecutive ones differ by a
    unit step.  Rebuilds its own occupancy, independent of any walk state."""
    seen = set()
    prev = None
    for site in sites:
        x, y = int(site[0]), int(site[1])
        if (x, y) in seen:
            return False
        seen.add((x, y))
        if prev is not None and abs(x - prev[0]) + abs(y - prev[1]) != 1:
            return False
        prev = (x, y)
    return True


def pivot_once(walk: LatticeWalk, rng: SplitMix64, constraint: str = FULL_PLANE) -> bool:
    """Attempt one pivot move; mutates the walk in place on acceptance.

    The pivot site index is uniform on 0..N-1 and the symmetry uniform on
    the 7 non-identity elements; the tail beyond the pivot site is
    transformed about it.  Site 0 must be an admissible pivot: with interior
    sites only, the first bond would never move and the chain would be
    reducible (it fails the brute-force uniformity oracle).  Exactly two RNG
    draws are consumed per attempt, accepted or not, so this path and the
    jitted kernel stay in lockstep.
    """
    n = walk.n_steps
    if n < 1:
        rng.next_u64()
        rng.next_u64()
        return False
    k = rng.randint(n)
    sym = rng.randint(7)
    px = int(walk.xs[k])
    py = int(walk.ys[k])

    new_tail = []
    for i in range(k + 1, n + 1):
        tx, ty = apply_symmetry(sym, int(walk.xs[i]) - px, int(walk.ys[i]) - py)
        nx, ny = px + tx, py + ty
        if constraint == HALF_PLANE and ny < 0:
            return False
        j = walk.occupancy.get((nx, ny))
        if j is not None and j <= k:
            return False
        new_tail.append((nx, ny))

    for i, (nx, ny) in enumerate(new_tail, start=k + 1):
        del walk.occupancy[(int(walk.xs[i]), int(walk.ys[i]))]
        walk.xs[i] = nx
        walk.ys[i] = ny
    for i, (nx, ny) in enumerate(new_tail, start=k + 1):
        walk.occupancy[(nx, ny)] = i
    return True


def stays_strictly_one_side(
    walk: LatticeWalk | Sequence[Site],
    theta_deg: float | None = None,
    *,
    tangent: Tuple[int, int] | None = None,
) -> bool:
    """True iff every site except site 0 lies strictly above the line through
    the origin at the given angle.

    "Above" means -x*sin(theta) + y*cos(theta) > 0.  When ``tangent=(p, q)``
    is supplied the line has exact slope p/q and the test is the integer
    cross-product q*y - p*x > 0, with no floating point; this is what makes
    the value at an exactly-rational-tangent angle differ from its
    neighbourhood.
    """
    if isinstance(walk, LatticeWalk):
        xs, ys = walk.xs, walk.ys
    else:
        arr = np.asarray(walk, dtype=np.int64)
        xs, ys = arr[:, 0], arr[:, 1]
    if tangent is not None:
        p, q = tangent
        side = q * ys[1:] - p * xs[1:]
        return bool(np.all(side > 0))
    if theta_deg is None:
        raise ValueError("pass either theta_deg or tangent=(p, q)")
    if not 0.0 <= theta_deg < 180.0:
        raise ValueError("theta_deg must lie in [0, 180)")
    th = math.radians(theta_deg)
    s, c = math.sin(th), math.cos(th)
    return bool(np.all(-xs[1:] * s + ys[1:] * c > 0.0))


def enumerate_saws(n: int, constraint: str = FULL_PLANE) -> List[Tuple[Site, ...]]:
    """Brute-force enumeration of all n-step SAWs from the origin.

    Depth-first over the four lattice directions; feasible for n up to ~14.
    Used as the independence oracle for chain uniformity and one-sided
    fraction tests.
    """
    out: List[Tuple[Site, ...]] = []
    path: List[Site] = [(0, 0)]
    occupied = {(0, 0)}

    def rec():
        if len(path) == n + 1:
            out.append(tuple(path))
            return
        x, y = path[-1]
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nxt = (x + dx, y + dy)
            if nxt in occupied:
                continue
            if constraint == HALF_PLANE and nxt[1] < 0:
                continue
            occupied.add(nxt)
            path.append(nxt)
            rec()
            path.pop()
            occupied.remove(nxt)

    rec()
    return out


def walk_from_sites(sites: Iterable[Site]) -> LatticeWalk:
    arr = np.asarray(list(sites), dtype=np.int64)
    return LatticeWalk(arr[:, 0], arr[:, 1])
