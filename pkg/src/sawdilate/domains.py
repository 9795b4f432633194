"""The seven benchmark star-shaped geometries and per-walk geometry.

Every domain is star-shaped about the origin, so its boundary is the graph
of a radial function D(theta).  A walk sample interacts with a domain
through: the dilation putting its endpoint on the scaled boundary, the
strict-interior indicator, the boundary-thickness weight
1 / (D(theta) |cos(theta - alpha)|), and the boundary parameter used by the
closed-form laws.

Angles are degrees at every public interface and radians internally.
Strict-interior tests against flat boundary pieces are exact integer
comparisons (cross-multiplied rationals, or sign tests of a + b*sqrt(3) for
the triangle); circular arcs use plain double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from . import _kernels as K
from .walk import FULL_PLANE, HALF_PLANE, LatticeWalk

RADIAL = "radial"
CHORDAL = "chordal"

SQRT3 = math.sqrt(3.0)


class NoBoundaryError(ValueError):
    """The ray at this angle never meets the target boundary."""


class UndefinedDilationError(ValueError):
    """No dilation puts this endpoint on the target boundary."""


@dataclass(frozen=True)
class BoundaryGeometry:
    """Per-angle boundary record: radial distance, normal and tangent angles
    (both as line angles mod 180, in degrees)."""

    distance: float
    alpha_deg: float
    tau_deg: float


def _polar_deg(x, y):
    return np.degrees(np.arctan2(y, x)) % 360.0


def _sqrt3_sign_arr(a, b):
    """Vectorized exact sign of a + b*sqrt(3) for integer arrays."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    pos_quad = (a >= 0) & (b >= 0)
    neg_quad = (a <= 0) & (b <= 0)
    zero = (a == 0) & (b == 0)
    cmp_ = np.sign(a * a - 3 * b * b)  # valid when a, b have opposite signs
    mixed = np.where(b < 0, cmp_, -cmp_)
    out = np.where(pos_quad, 1, np.where(neg_quad, -1, mixed))
    return np.where(zero, 0, out)


class StarDomain:
    """Base class; subclasses fill in the geometry."""

    name: str
    kind: str
    parameter_window: Optional[Tuple[float, float]] = None
    param_name: str = "polar_angle_deg"

    @property
    def constraint(self) -> str:
        return HALF_PLANE if self.kind == CHORDAL else FULL_PLANE

    # -- per-angle geometry -------------------------------------------------

    def radial_distance(self, theta_deg: float) -> float:
        raise NotImplementedError

    def normal_angle(self, theta_deg: float) -> float:
        raise NotImplementedError

    def boundary_geometry(self, theta_deg: float) -> BoundaryGeometry:
        d = self.radial_distance(theta_deg)
        alpha = self.normal_angle(theta_deg) % 180.0
        return BoundaryGeometry(d, alpha, (alpha + 90.0) % 180.0)

    def thickness_weight(self, theta_deg: float) -> float:
        geo = self.boundary_geometry(theta_deg)
        return 1.0 / (geo.distance * abs(math.cos(math.radians(theta_deg - geo.alpha_deg))))

    def arc_jacobian(self, theta_deg: float) -> float:
        """|d(arc length)/d(theta)| along the unit-scale boundary."""
        geo = self.boundary_geometry(theta_deg)
        return geo.distance / abs(math.cos(math.radians(theta_deg - geo.alpha_deg)))

    # -- per-walk geometry ----------------------------------------------------

    def dilation_of(self, endpoint) -> float:
        raise NotImplementedError

    def strictly_inside(self, walk: LatticeWalk, lam: Optional[float] = None) -> bool:
        """True iff all sites except site 0 and the final site are strictly
        interior to the dilated domain.

        With ``lam=None`` the dilation is taken from the endpoint and flat
        boundary pieces are tested with exact integer arithmetic; an explicit
        ``lam`` is honoured as given (floating point), which is what the
        monotonicity-in-lambda property exercises.
        """
        raise NotImplementedError

    def boundary_parameter(self, endpoint, lam: float) -> Optional[float]:
        """Parameter of endpoint/lam on the unit boundary, or None when the
        point falls outside the conditioning window."""
        raise NotImplementedError

    # -- bulk helpers for the estimator ---------------------------------------

    def endpoint_stats(self, ex, ey, lam):
        """Vectorized (theta_deg, param, weight, tau_deg, in_window) for
        endpoints already known to have a defined dilation."""
        raise NotImplementedError

    def kernel_spec(self):
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class ChordalStrip(StarDomain):
    """Strip 0 < Im z < 1 with the origin on the lower boundary; the target
    boundary is the upper line, parametrized by the abscissa."""

    name = "strip_chordal"
    kind = CHORDAL
    param_name = "x"

    def radial_distance(self, theta_deg):
        s = math.sin(math.radians(theta_deg))
        if not 0.0 < theta_deg < 180.0 or s <= 0.0:
            raise NoBoundaryError(f"ray at {theta_deg} deg misses the upper boundary")
        return 1.0 / s

    def normal_angle(self, theta_deg):
        self.radial_distance(theta_deg)
        return 90.0

    def dilation_of(self, endpoint):
        x, y = endpoint
        if y <= 0:
            raise UndefinedDilationError("endpoint not above the baseline")
        return float(y)

    def strictly_inside(self, walk, lam=None):
        ys = walk.ys[1:-1]
        if lam is None:
            ye = int(walk.ys[-1])
            if ye <= 0:
                return False
            return bool(np.all(ys >= 1) and np.all(ys <= ye - 1))
        return bool(np.all(ys > 0.0) and np.all(ys < lam))

    def boundary_parameter(self, endpoint, lam):
        return endpoint[0] / lam

    def endpoint_stats(self, ex, ey, lam):
        theta = _polar_deg(ex, ey)
        param = ex / lam
        w = np.ones_like(lam)
        tau = np.zeros_like(lam)
        keep = np.ones(len(lam), dtype=bool)
        return theta, param, w, tau, keep

    def kernel_spec(self):
        return K.DOM_STRIP_CHORDAL, np.zeros(2, np.int64), np.zeros(2, np.float64)


class RadialStrip(StarDomain):
    """Strip -h < Im z < 1-h with the origin inside; walks may end on either
    line, and the parameter is the full polar angle so both boundary
    components stitch into one axis."""

    name = "strip_radial"
    kind = RADIAL

    def __init__(self, h: Fraction = Fraction(1, 4)):
        h = Fraction(h)
        if not 0 < h < 1:
            raise ValueError("h must be in (0, 1)")
        self.h = h
        self.hf = float(h)

    def radial_distance(self, theta_deg):
        s = math.sin(math.radians(theta_deg))
        t = theta_deg % 360.0
        if t == 0.0 or t == 180.0 or s == 0.0:
            raise NoBoundaryError("ray along the strip axis misses both boundaries")
        if s > 0.0:
            return (1.0 - self.hf) / s
        return -self.hf / s

    def normal_angle(self, theta_deg):
        self.radial_distance(theta_deg)
        return 90.0

    def dilation_of(self, endpoint):
        x, y = endpoint
        if y == 0:
            raise UndefinedDilationError("endpoint on the strip axis")
        if y > 0:
            return float(y) / (1.0 - self.hf)
        return -float(y) / self.hf

    def strictly_inside(self, walk, lam=None):
        ys = walk.ys[1:-1]
        if lam is None:
            ye = int(walk.ys[-1])
            if ye == 0:
                return False
            hp = self.h.numerator
            hq = self.h.denominator
            if ye > 0:
                return bool(np.all(ys < ye) and np.all(ys * (hq - hp) + ye * hp > 0))
            return bool(np.all(ys > ye) and np.all(ys * hp + ye * (hq - hp) < 0))
        return bool(np.all(ys > -lam * self.hf) and np.all(ys < lam * (1.0 - self.hf)))

    def boundary_parameter(self, endpoint, lam):
        return float(_polar_deg(endpoint[0], endpoint[1]))

    def endpoint_stats(self, ex, ey, lam):
        theta = _polar_deg(ex, ey)
        w = np.where(ey > 0, 1.0 / (1.0 - self.hf), 1.0 / self.hf)
        tau = np.zeros_like(lam)
        keep = np.ones(len(lam), dtype=bool)
        return theta, theta.copy(), w, tau, keep

    def kernel_spec(self):
        ip = np.array([self.h.numerator, self.h.denominator], np.int64)
        return K.DOM_STRIP_RADIAL, ip, np.zeros(2, np.float64)


# triangle side data: outward normal angles (deg) and the (a, b) pair giving
# the doubled support value 2 z.n = a + b*sqrt(3)
_TRI_NORMALS = (60.0, 180.0, 300.0)


def _tri_dpairs(x, y):
    """Doubled support values for the three sides as (a, b) integer pairs."""
    return ((x, y), (-2 * x, 0), (x, -y))


class Triangle(StarDomain):
    """Equilateral triangle, unit circumradius, vertices at polar angles
    0, 120 and 240; the side over (120, 240) is vertical."""

    name = "triangle"
    kind = RADIAL

    inradius = 0.5
    side_length = SQRT3

    @staticmethod
    def side_of(theta_deg: float) -> int:
        return int((theta_deg % 360.0) // 120.0) % 3

    def radial_distance(self, theta_deg):
        side = self.side_of(theta_deg)
        return self.inradius / math.cos(math.radians(theta_deg - _TRI_NORMALS[side]))

    def normal_angle(self, theta_deg):
        return _TRI_NORMALS[self.side_of(theta_deg)] % 180.0

    def dilation_of(self, endpoint):
        x, y = int(endpoint[0]), int(endpoint[1])
        if x == 0 and y == 0:
            raise UndefinedDilationError("endpoint at the origin")
        return max(a + b * SQRT3 for a, b in _tri_dpairs(x, y))

    def _endpoint_side(self, x, y):
        pairs = _tri_dpairs(x, y)
        best = 0
        for side in (1, 2):
            a0, b0 = pairs[best]
            a1, b1 = pairs[side]
            if _sqrt3_sign_arr(a1 - a0, b1 - b0) > 0:
                best = side
        return best, pairs[best]

    def strictly_inside(self, walk, lam=None):
        xs = walk.xs[1:-1]
        ys = walk.ys[1:-1]
        if lam is None:
            xe, ye = int(walk.xs[-1]), int(walk.ys[-1])
            _, (ae, be) = self._endpoint_side(xe, ye)
            for a, b in ((xs, ys), (-2 * xs, np.zeros_like(xs)), (xs, -ys)):
                if not np.all(_sqrt3_sign_arr(a - ae, b - be) < 0):
                    return False
            return True
        return bool(
            np.all(xs + SQRT3 * ys < lam)
            and np.all(-2.0 * xs < lam)
            and np.all(xs - SQRT3 * ys < lam)
        )

    def boundary_parameter(self, endpoint, lam):
        return float(_polar_deg(endpoint[0], endpoint[1]))

    def endpoint_stats(self, ex, ey, lam):
        theta = _polar_deg(ex, ey)
        side = (theta // 120.0).astype(np.int64) % 3
        tau = (np.asarray(_TRI_NORMALS)[side] + 90.0) % 180.0
        w = np.full(len(lam), 1.0 / self.inradius)
        keep = np.ones(len(lam), dtype=bool)
        return theta, theta.copy(), w, tau, keep

    def kernel_spec(self):
        return K.DOM_TRIANGLE, np.zeros(2, np.int64), np.zeros(2, np.float64)


class CircleDomain(StarDomain):
    """Unit circle centered at (cx, cy); radial when the origin is interior,
    chordal when it sits on the circle (tangent case)."""

    param_name = "center_angle_deg"

    def __init__(self, cx: float, cy: float):
        self.cx = float(cx)
        self.cy = float(cy)
        self.cc = self.cx * self.cx + self.cy * self.cy

    def _ray_dot(self, theta_deg):
        th = math.radians(theta_deg)
        return math.cos(th) * self.cx + math.sin(th) * self.cy

    def radial_distance(self, theta_deg):
        e_dot_c = self._ray_dot(theta_deg)
        disc = e_dot_c * e_dot_c + 1.0 - self.cc
        d = e_dot_c + math.sqrt(disc)
        if d <= 0.0:
            raise NoBoundaryError(f"ray at {theta_deg} deg misses the circle")
        return d

    def normal_angle(self, theta_deg):
        d = self.radial_distance(theta_deg)
        th = math.radians(theta_deg)
        px = d * math.cos(th) - self.cx
        py = d * math.sin(th) - self.cy
        return math.degrees(math.atan2(py, px)) % 180.0

    def dilation_of(self, endpoint):
        x, y = float(endpoint[0]), float(endpoint[1])
        rr = x * x + y * y
        if rr == 0.0:
            raise UndefinedDilationError("endpoint at the origin")
        dc = x * self.cx + y * self.cy
        return (math.sqrt(dc * dc + (1.0 - self.cc) * rr) - dc) / (1.0 - self.cc)

    def _inside_circle(self, xs, ys, lam):
        fx = xs.astype(np.float64)
        fy = ys.astype(np.float64)
        lhs = fx * fx + fy * fy - 2.0 * lam * (fx * self.cx + fy * self.cy)
        return lhs < lam * lam * (1.0 - self.cc)

    def strictly_inside(self, walk, lam=None):
        if lam is None:
            lam = self.dilation_of(walk.endpoint())
        return bool(np.all(self._inside_circle(walk.xs[1:-1], walk.ys[1:-1], lam)))

    def _center_angle(self, endpoint, lam):
        return float(_polar_deg(endpoint[0] / lam - self.cx, endpoint[1] / lam - self.cy))

    def boundary_parameter(self, endpoint, lam):
        return self._center_angle(endpoint, lam)

    def endpoint_stats(self, ex, ey, lam):
        theta = _polar_deg(ex, ey)
        ux = ex / lam
        uy = ey / lam
        phi = _polar_deg(ux - self.cx, uy - self.cy)
        # thickness along the normal: D(theta)|cos(theta - alpha)| = P.(P - c)
        w = 1.0 / (ux * (ux - self.cx) + uy * (uy - self.cy))
        tau = (phi + 90.0) % 180.0
        keep = np.ones(len(np.atleast_1d(lam)), dtype=bool)
        return theta, phi, w, tau, keep

    def kernel_spec(self):
        ip = np.zeros(2, np.int64)
        fp = np.array([self.cx, self.cy], np.float64)
        return K.DOM_CIRCLE_GENERIC, ip, fp


class CenteredCircle(CircleDomain):
    """Unit disc about the origin; the uniform-law benchmark."""

    name = "circle_centered"
    kind = RADIAL

    def __init__(self):
        super().__init__(0.0, 0.0)

    def radial_distance(self, theta_deg):
        return 1.0

    def normal_angle(self, theta_deg):
        return theta_deg % 180.0

    def dilation_of(self, endpoint):
        x, y = float(endpoint[0]), float(endpoint[1])
        if x == 0.0 and y == 0.0:
            raise UndefinedDilationError("endpoint at the origin")
        return math.hypot(x, y)

    def strictly_inside(self, walk, lam=None):
        xs = walk.xs[1:-1]
        ys = walk.ys[1:-1]
        if lam is None:
            xe, ye = int(walk.xs[-1]), int(walk.ys[-1])
            return bool(np.all(xs * xs + ys * ys < xe * xe + ye * ye))
        return bool(np.all(xs.astype(np.float64) ** 2 + ys.astype(np.float64) ** 2 < lam * lam))

    def kernel_spec(self):
        return K.DOM_CIRCLE_CENTERED, np.zeros(2, np.int64), np.zeros(2, np.float64)


class OffCenterCircle(CircleDomain):
    """Unit disc centered at (a, b) with the origin interior."""

    name = "circle_offcenter"
    kind = RADIAL

    def __init__(self, a: float = 0.75, b: float = 0.0):
        if a * a + b * b >= 1.0:
            raise ValueError("origin must be interior: a^2 + b^2 < 1")
        super().__init__(a, b)
        self.a = float(a)
        self.b = float(b)


class PartialCircle(CircleDomain):
    """Intersection of the unit disc centered at (0, b), b < 0, with the
    upper half plane; walks start at the origin on the flat piece and must
    end on the arc."""

    name = "circle_partial"
    kind = CHORDAL

    def __init__(self, b: float = -0.75):
        if not -1.0 < b < 0.0:
            raise ValueError("center height b must be in (-1, 0)")
        super().__init__(0.0, b)
        self.b = float(b)
        self.d = math.sqrt(1.0 - b * b)
        phi_min = math.degrees(math.atan2(-b, self.d))
        self.parameter_window = (phi_min, 180.0 - phi_min)

    def radial_distance(self, theta_deg):
        if not 0.0 < theta_deg % 360.0 < 180.0:
            raise NoBoundaryError("ray does not meet the arc")
        return super().radial_distance(theta_deg)

    def dilation_of(self, endpoint):
        if endpoint[1] <= 0:
            raise UndefinedDilationError("endpoint not above the flat boundary")
        return super().dilation_of(endpoint)

    def strictly_inside(self, walk, lam=None):
        ys = walk.ys[1:-1]
        if lam is None:
            if not np.all(ys >= 1):
                return False
            lam = self.dilation_of(walk.endpoint())
            return bool(np.all(self._inside_circle(walk.xs[1:-1], ys, lam)))
        return bool(
            np.all(ys > 0) and np.all(self._inside_circle(walk.xs[1:-1], ys, lam))
        )

    def boundary_parameter(self, endpoint, lam):
        phi = self._center_angle(endpoint, lam)
        lo, hi = self.parameter_window
        if not lo < phi < hi:
            return None
        return phi

    def endpoint_stats(self, ex, ey, lam):
        theta, phi, w, tau, _ = super().endpoint_stats(ex, ey, lam)
        lo, hi = self.parameter_window
        keep = (phi > lo) & (phi < hi)
        return theta, phi, w, tau, keep

    def kernel_spec(self):
        ip = np.array([0, 1], np.int64)  # [tangent_formula, require_y_positive]
        fp = np.array([0.0, self.b], np.float64)
        return K.DOM_CIRCLE_GENERIC, ip, fp


class TangentCircle(CircleDomain):
    """Unit disc centered at (0, 1), tangent to the baseline at the origin;
    conditioned on ending on the upper half of the circle."""

    name = "circle_tangent"
    kind = CHORDAL
    parameter_window = (0.0, 180.0)

    def __init__(self):
        super().__init__(0.0, 1.0)

    def radial_distance(self, theta_deg):
        s = math.sin(math.radians(theta_deg))
        if not 0.0 < theta_deg % 360.0 < 180.0 or s <= 0.0:
            raise NoBoundaryError("ray does not meet the circle")
        return 2.0 * s

    def dilation_of(self, endpoint):
        x, y = float(endpoint[0]), float(endpoint[1])
        if y <= 0.0:
            raise UndefinedDilationError("endpoint on the tangent line")
        return (x * x + y * y) / (2.0 * y)

    def boundary_parameter(self, endpoint, lam):
        phi = self._center_angle(endpoint, lam)
        lo, hi = self.parameter_window
        if not lo <= phi <= hi:
            return None
        return phi

    def endpoint_stats(self, ex, ey, lam):
        theta, phi, w, tau, _ = super().endpoint_stats(ex, ey, lam)
        lo, hi = self.parameter_window
        keep = (phi >= lo) & (phi <= hi)
        return theta, phi, w, tau, keep

    def kernel_spec(self):
        ip = np.array([1, 0], np.int64)
        fp = np.array([0.0, 1.0], np.float64)
        return K.DOM_CIRCLE_GENERIC, ip, fp


GEOMETRIES = {
    "strip_chordal": ChordalStrip,
    "strip_radial": RadialStrip,
    "triangle": Triangle,
    "circle_centered": CenteredCircle,
    "circle_offcenter": OffCenterCircle,
    "circle_partial": PartialCircle,
    "circle_tangent": TangentCircle,
}


def make_domain(name: str, **params) -> StarDomain:
    try:
        factory = GEOMETRIES[name]
    except KeyError:
        raise ValueError(f"unknown geometry {name!r}; known: {sorted(GEOMETRIES)}") from None
    return factory(**params)
