"""Closed-form boundary-endpoint densities and their CDFs.

Each law is the SLE partition-function prediction for the distribution of
the walk endpoint along the boundary of one benchmark geometry, stated with
respect to that geometry's natural boundary parameter.  Densities are kept
unnormalized (the overall constant set to 1); normalization constants are
computed once per law by adaptive quadrature and cached.

The triangle law needs the conformal map from the upper half plane onto an
equilateral triangle; ``ScMap`` evaluates it by a power series for |z| >= 3
and by (desingularized) quadrature elsewhere on the real axis.
"""

from __future__ import annotations

import cmath
import math
import warnings
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy import integrate
from scipy.optimize import brentq

from .domains import (
    CenteredCircle,
    ChordalStrip,
    OffCenterCircle,
    PartialCircle,
    RadialStrip,
    StarDomain,
    Triangle,
    TangentCircle,
)

FIVE_EIGHTHS = 5.0 / 8.0
FIVE_QUARTERS = 5.0 / 4.0

_LOG2 = math.log(2.0)


def _log_cosh(u: float) -> float:
    a = abs(u)
    return a + math.log1p(math.exp(-2.0 * a)) - _LOG2


def _cosh_shift_pow(u: float, shift: float, power: float) -> float:
    """(cosh(u) + shift)^power without overflow, underflowing to 0."""
    lc = _log_cosh(u)
    if lc > 700.0:
        corr = 0.0
    else:
        corr = math.log1p(shift * math.exp(-lc))
    return math.exp(power * (lc + corr))


class UnsupportedRegionError(ValueError):
    """Evaluation point outside the map's supported region."""


class AccuracyError(RuntimeError):
    """Quadrature failed to converge; the achieved estimate is attached."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


def _quad(f, a, b, points=None, epsabs=1e-12, epsrel=1e-11, limit=300):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            if points is not None and math.isfinite(a) and math.isfinite(b):
                val, err = integrate.quad(f, a, b, points=points, epsabs=epsabs,
                                          epsrel=epsrel, limit=limit)
            else:
                val, err = integrate.quad(f, a, b, epsabs=epsabs, epsrel=epsrel,
                                          limit=limit)
        except integrate.IntegrationWarning as exc:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                est = integrate.quad(f, a, b, epsabs=epsabs, epsrel=epsrel,
                                     limit=limit)[0]
            raise AccuracyError(f"quadrature over [{a}, {b}] did not converge: {exc}",
                                estimate=est) from exc
    return val


class ScMap:
    """F(z) = integral from z to infinity of (w+1)^(-2/3) (w-1)^(-2/3) dw.

    Maps the upper half plane onto an equilateral triangle with vertices
    F(1), F(-1) and F(infinity) = 0, sending -3, 0, 3 to the side midpoints.
    Supported inputs: real z >= -1 (values on [-1, 1) use the branch
    continued through the upper half plane) and complex |z| >= 3.
    """

    SERIES_RADIUS = 3.0

    def __init__(self, n_terms: int = 80):
        coeffs = []
        a = 1.0
        for k in range(n_terms):
            coeffs.append(a / (2 * k + 1.0 / 3.0))
            a *= (2.0 / 3.0 + k) / (k + 1.0)  # Pochhammer(2/3, k)/k!
        self._coeffs = np.array(coeffs)
        self.F3 = self._series(3.0)
        self.F1 = self.F3 + self._segment_1_3()

    # -- building blocks -----------------------------------------------------

    @staticmethod
    def integrand(w):
        return ((w + 1.0) * (w - 1.0)) ** (-2.0 / 3.0)

    def _series(self, z):
        if isinstance(z, complex):
            zi2 = 1.0 / (z * z)
            zp = z ** (-1.0 / 3.0)
        else:
            zi2 = 1.0 / (z * z)
            zp = z ** (-1.0 / 3.0)
        total = 0.0 if not isinstance(z, complex) else 0.0 + 0.0j
        for c in self._coeffs:
            total += c * zp
            zp *= zi2
        return total

    def _segment_1_3(self):
        # integral over [1, 3]: substitute w = 1 + t^3 to remove the
        # (w - 1)^(-2/3) endpoint singularity
        f = lambda t: 3.0 * (2.0 + t ** 3) ** (-2.0 / 3.0)
        return _quad(f, 0.0, 2.0 ** (1.0 / 3.0))

    def inner_segment_mass(self, x1: float, x2: float) -> float:
        """integral over [x1, x2] in (-1, 1) of (1+w)^(-2/3) (1-w)^(-2/3) dw."""
        if not -1.0 <= x1 <= x2 <= 1.0:
            raise UnsupportedRegionError("inner segment must lie in [-1, 1]")

        def mass_to_one(x):
            # integral from x to 1, desingularized at both ends
            if x >= 1.0:
                return 0.0
            parts = 0.0
            hi = min(1.0, x + 0.0)
            mid = max(x, 0.0)
            # upper piece [mid, 1]: w = 1 - t^3
            t_hi = (1.0 - mid) ** (1.0 / 3.0)
            parts += _quad(lambda t: 3.0 * (2.0 - t ** 3) ** (-2.0 / 3.0), 0.0, t_hi)
            if x < 0.0:
                # lower piece [x, 0]: w = -1 + t^3
                t_lo = (x + 1.0) ** (1.0 / 3.0)
                t_hi2 = 1.0
                parts += _quad(lambda t: 3.0 * (2.0 - t ** 3) ** (-2.0 / 3.0), t_lo, t_hi2)
            return parts

        return mass_to_one(x1) - mass_to_one(x2)

    # -- public evaluation ------------------------------------------------------

    def quad_F(self, x: float) -> float:
        """Quadrature evaluation of F for real x > 1 (reference route)."""
        if x < 3.0:
            return self.F3 + _quad(self.integrand, x, 3.0)
        return _quad(self.integrand, x, np.inf)

    def __call__(self, z):
        if isinstance(z, complex) and abs(z.imag) > 0.0:
            if abs(z) < self.SERIES_RADIUS:
                raise UnsupportedRegionError(
                    f"complex z with |z| < {self.SERIES_RADIUS} is branch-ambiguous"
                )
            return self._series(z)
        x = z.real if isinstance(z, complex) else float(z)
        if x >= self.SERIES_RADIUS:
            return self._series(x)
        if x > 1.0:
            return self.F3 + _quad(self.integrand, x, 3.0)
        if x == 1.0:
            return self.F1
        if x >= -1.0:
            return self.F1 + cmath.exp(-2j * math.pi / 3.0) * self.inner_segment_mass(x, 1.0)
        if abs(x) >= self.SERIES_RADIUS:
            return self._series(complex(x, 0.0))
        raise UnsupportedRegionError(f"z = {z} is outside the supported region")

    def vertices(self):
        return self(1.0), self(-1.0), 0.0 + 0.0j

    def side_lengths(self):
        v1, vm1, vinf = self.vertices()
        return (
            abs(complex(v1) - vinf),
            abs(complex(vm1) - complex(v1)),
            abs(complex(vm1) - vinf),
        )


class AnalyticLaw:
    """Base class: unnormalized density plus quadrature-backed CDF."""

    geometry: str
    param_name: str = "param"
    param_range: Tuple[float, float]

    def density(self, param: float) -> float:
        """Unnormalized density; ``param`` strictly inside the range."""
        self._check_open(param)
        return self._density(param)

    def _density(self, param: float) -> float:
        raise NotImplementedError

    def _check_open(self, param):
        lo, hi = self.param_range
        if not lo < param < hi:
            raise ValueError(f"param {param} not strictly inside ({lo}, {hi})")

    def _mass(self, a: float, b: float) -> float:
        """Unnormalized mass between a and b (a <= b, within the range)."""
        if a == b:
            return 0.0
        return _quad(self._density, a, b)

    @property
    def norm(self) -> float:
        if not hasattr(self, "_norm"):
            lo, hi = self.param_range
            self._norm = self._mass(lo, hi)
        return self._norm

    def normalized_density(self, param: float) -> float:
        return self.density(param) / self.norm

    def cdf(self, param: float, axis: str = "native") -> float:
        if axis == "polar_angle":
            return self.cdf_polar(param)
        if axis != "native":
            raise ValueError(f"unknown axis {axis!r}")
        lo, hi = self.param_range
        if not lo <= param <= hi:
            raise ValueError(f"param {param} outside [{lo}, {hi}]")
        if param == lo:
            return 0.0
        if param == hi:
            return 1.0
        return min(1.0, max(0.0, self._mass(lo, param) / self.norm))

    def cdf_many(self, params: np.ndarray) -> np.ndarray:
        """CDF at many points: one cumulative sweep over the sorted values."""
        q = np.asarray(params, dtype=np.float64)
        lo, hi = self.param_range
        qs = np.unique(np.clip(q, lo, hi))
        masses = np.empty(len(qs))
        prev = lo
        acc = 0.0
        for i, t in enumerate(qs):
            acc += self._mass(prev, t)
            masses[i] = acc
            prev = t
        cdf_sorted = np.clip(masses / self.norm, 0.0, 1.0)
        out = np.interp(np.clip(q, lo, hi), qs, cdf_sorted)
        return out

    def cdf_polar(self, theta_deg: float) -> float:
        raise NotImplementedError(f"{self.geometry} has no polar-angle axis")

    def finite_range(self, eps: float = 1e-4) -> Tuple[float, float]:
        """Parameter window holding all but ~2*eps of the mass."""
        lo, hi = self.param_range
        if math.isfinite(lo) and math.isfinite(hi):
            return lo, hi
        left = brentq(lambda t: self.cdf(t) - eps, -1e3, 1e3, xtol=1e-10)
        right = brentq(lambda t: self.cdf(t) - (1.0 - eps), -1e3, 1e3, xtol=1e-10)
        return left, right


class ChordalStripLaw(AnalyticLaw):
    """Strip of height 1, walk from a boundary point to the opposite line;
    density on the far line vs the abscissa: cosh(pi x / 2)^(-5/4)."""

    geometry = "strip_chordal"
    param_name = "x"
    param_range = (-np.inf, np.inf)

    def _density(self, x):
        return _cosh_shift_pow(math.pi * x / 2.0, 0.0, -FIVE_QUARTERS)

    def _mass(self, a, b):
        # split at fixed anchors so the bump near 0 is never missed when one
        # endpoint is far out or infinite
        if a == b:
            return 0.0
        anchors = [t for t in (-12.0, -4.0, 0.0, 4.0, 12.0) if a < t < b]
        edges = [a] + anchors + [b]
        return sum(_quad(self._density, lo, hi) for lo, hi in zip(edges[:-1], edges[1:]))

    def cdf_polar(self, theta_deg: float) -> float:
        if theta_deg <= 0.0:
            return 0.0
        if theta_deg >= 180.0:
            return 1.0
        x = 1.0 / math.tan(math.radians(theta_deg))
        return 1.0 - self.cdf(x)


class RadialStripLaw(AnalyticLaw):
    """Strip of height 1, origin at height h above the lower line; both lines
    reachable.  The native axis is the endpoint's polar angle in [0, 360) so
    the two boundary components stitch into one CDF; masses are integrated
    in the abscissa where the formulas live."""

    geometry = "strip_radial"
    param_name = "polar_angle_deg"
    param_range = (0.0, 360.0)

    def __init__(self, h: float = 0.25):
        if not 0.0 < h < 1.0:
            raise ValueError("h must be in (0, 1)")
        self.h = float(h)
        self.cos_pih = math.cos(math.pi * h)

    def density_x(self, x: float, component: str) -> float:
        """The per-abscissa density on one line ('lower' or 'upper')."""
        if component == "lower":
            return _cosh_shift_pow(math.pi * x, -self.cos_pih, -FIVE_EIGHTHS)
        if component == "upper":
            return _cosh_shift_pow(math.pi * x, self.cos_pih, -FIVE_EIGHTHS)
        raise ValueError(f"unknown component {component!r}")

    def _x_of_theta(self, theta_deg: float) -> Tuple[str, float]:
        t = math.radians(theta_deg % 360.0)
        if 0.0 < theta_deg < 180.0:
            return "upper", (1.0 - self.h) / math.tan(t)
        if 180.0 < theta_deg < 360.0:
            return "lower", -self.h / math.tan(t)
        raise ValueError("theta on the strip axis")

    def _density(self, theta_deg):
        if theta_deg % 180.0 == 0.0:
            return 0.0  # seam between the two components; density vanishes
        comp, x = self._x_of_theta(theta_deg)
        height = (1.0 - self.h) if comp == "upper" else self.h
        jac = height / math.sin(math.radians(theta_deg)) ** 2 * math.pi / 180.0
        return self.density_x(x, comp) * abs(jac)

    def _mass_x(self, component: str, x_lo: float, x_hi: float) -> float:
        if x_lo >= x_hi:
            return 0.0
        anchors = [t for t in (-12.0, -4.0, 0.0, 4.0, 12.0) if x_lo < t < x_hi]
        edges = [x_lo] + anchors + [x_hi]
        f = lambda x: self.density_x(x, component)
        return sum(_quad(f, lo, hi) for lo, hi in zip(edges[:-1], edges[1:]))

    @property
    def _mass_upper(self):
        if not hasattr(self, "_mu"):
            self._mu = self._mass_x("upper", -np.inf, np.inf)
        return self._mu

    @property
    def _mass_lower(self):
        if not hasattr(self, "_ml"):
            self._ml = self._mass_x("lower", -np.inf, np.inf)
        return self._ml

    def _mass(self, a, b):
        if a == b:
            return 0.0
        total = 0.0
        # upper component: theta in (0, 180) maps to decreasing x
        lo, hi = max(a, 0.0), min(b, 180.0)
        if lo < hi:
            if lo <= 0.0 and hi >= 180.0:
                total += self._mass_upper
            else:
                x_hi = np.inf if lo <= 0.0 else (1.0 - self.h) / math.tan(math.radians(lo))
                x_lo = -np.inf if hi >= 180.0 else (1.0 - self.h) / math.tan(math.radians(hi))
                total += self._mass_x("upper", x_lo, x_hi)
        # lower component: theta in (180, 360) maps to increasing x
        lo, hi = max(a, 180.0), min(b, 360.0)
        if lo < hi:
            if lo <= 180.0 and hi >= 360.0:
                total += self._mass_lower
            else:
                x_lo = -np.inf if lo <= 180.0 else -self.h / math.tan(math.radians(lo))
                x_hi = np.inf if hi >= 360.0 else -self.h / math.tan(math.radians(hi))
                total += self._mass_x("lower", x_lo, x_hi)
        return total

    def cdf_polar(self, theta_deg: float) -> float:
        return self.cdf(theta_deg)


class TriangleLaw(AnalyticLaw):
    """Equilateral triangle, unit circumradius, walk from the center.

    Native parameter: arc position along one side, measured from a vertex,
    in (0, side_length).  The density lives in the half-plane coordinate x
    via the Schwarz-Christoffel map: the arc position s corresponds to the
    x with F(x)/F(3) = 2 l / l0 where l is the distance to the vertex, and
    the density is (x^2 - 1)^(5/12) / (x^2 + 3)^(5/8); masses integrate in
    x so no inversion happens inside the integrand."""

    geometry = "triangle"
    param_name = "arc_from_vertex"
    side = Triangle.side_length
    param_range = (0.0, side)

    def __init__(self, sc_map: Optional[ScMap] = None):
        self.sc = sc_map or ScMap()

    # mass integrand in the half-plane coordinate: density * |ds/dx|
    @staticmethod
    def _mass_integrand(x):
        return (x * x - 1.0) ** (-0.25) * (x * x + 3.0) ** (-FIVE_EIGHTHS)

    @property
    def _g3(self):
        if not hasattr(self, "_g3_"):
            self._g3_ = _quad(self._mass_integrand, 3.0, np.inf)
        return self._g3_

    def _g(self, x: float) -> float:
        """Unnormalized mass of the arc between the vertex and x.

        Integrated as a tail toward infinity: the integrand decays
        monotonically, which the infinite-interval transform handles
        robustly for any x."""
        if x < 3.0:
            raise ValueError("x must be >= 3")
        if x > 1e8:
            # integrand -> t^(-7/4) with relative corrections O(t^-2)
            return (4.0 / 3.0) * x ** -0.75
        return _quad(self._mass_integrand, x, np.inf)

    def x_of_arc(self, s: float) -> float:
        """Invert the map: arc distance from the vertex -> half-plane x."""
        s_half = min(s, self.side - s)
        if not 0.0 < s_half <= self.side / 2.0:
            raise ValueError("arc position outside the side")
        target = 2.0 * s_half / self.side * self.sc.F3
        if target >= self.sc.F3:
            return 3.0
        hi = max(8.0, 2.0 * (3.0 / target) ** 3)
        while self.sc(hi) > target:
            hi *= 4.0
        return brentq(lambda x: self.sc(x) - target, 3.0, hi, xtol=1e-13, rtol=1e-15)

    def _density(self, s):
        x = self.x_of_arc(s)
        return (x * x - 1.0) ** (5.0 / 12.0) * (x * x + 3.0) ** (-FIVE_EIGHTHS)

    def _mass(self, a, b):
        if a == b:
            return 0.0
        half = self.side / 2.0

        def from_vertex(s):
            # mass of [0, s] for s <= half
            if s <= 0.0:
                return 0.0
            if s >= half:
                return self._g3
            return self._g(self.x_of_arc(s))

        def cum(s):
            if s <= half:
                return from_vertex(s)
            return 2.0 * self._g3 - from_vertex(self.side - s)

        return cum(b) - cum(a)

    # -- polar-angle axis -----------------------------------------------------

    _domain = Triangle()

    def arc_of_theta(self, theta_mod120: float) -> float:
        """Arc position along the side from its leading vertex, given the
        polar angle within the side's 120-degree sector."""
        if not 0.0 <= theta_mod120 <= 120.0:
            raise ValueError("angle must lie in [0, 120]")
        if theta_mod120 == 0.0:
            return 0.0
        if theta_mod120 == 120.0:
            return self.side
        d = self._domain.radial_distance(theta_mod120)
        t = math.radians(theta_mod120)
        px, py = d * math.cos(t), d * math.sin(t)
        return math.hypot(px - 1.0, py)

    def cdf_mod120(self, theta_mod120: float) -> float:
        return self.cdf(self.arc_of_theta(theta_mod120))

    def cdf_polar(self, theta_deg: float) -> float:
        t = theta_deg % 360.0
        side = int(t // 120.0)
        return (side + self.cdf_mod120(t - 120.0 * side)) / 3.0


class CenteredCircleLaw(AnalyticLaw):
    """Unit disc about the origin: the boundary density is uniform."""

    geometry = "circle_centered"
    param_name = "polar_angle_deg"
    param_range = (0.0, 360.0)

    def _density(self, param):
        return 1.0

    def _mass(self, a, b):
        return max(0.0, b - a)

    def cdf_polar(self, theta_deg):
        return self.cdf(theta_deg % 360.0 if theta_deg != 360.0 else 360.0)

    @staticmethod
    def cdf_mod90(t: float) -> float:
        return t / 90.0


class OffCenterCircleLaw(AnalyticLaw):
    """Unit disc centered at (a, b) containing the origin; density vs the
    boundary angle about the center: [1 + a^2 + b^2 + 2a cos + 2b sin]^(-5/8)."""

    geometry = "circle_offcenter"
    param_name = "center_angle_deg"
    param_range = (0.0, 360.0)

    def __init__(self, a: float = 0.75, b: float = 0.0):
        if a * a + b * b >= 1.0:
            raise ValueError("origin must be interior")
        self.a = float(a)
        self.b = float(b)

    def _density(self, phi_deg):
        t = math.radians(phi_deg)
        base = 1.0 + self.a ** 2 + self.b ** 2 + 2.0 * self.a * math.cos(t) + 2.0 * self.b * math.sin(t)
        return base ** (-FIVE_EIGHTHS)


class PartialCircleLaw(AnalyticLaw):
    """Unit disc centered at i*b (b < 0) cut by the baseline; walk from the
    origin to the arc.  Density vs the angle about the center, via the wedge
    map [-(z+d)/(z-d)]^(pi/beta) onto the half plane."""

    geometry = "circle_partial"
    param_name = "center_angle_deg"

    def __init__(self, b: float = -0.75):
        if not -1.0 < b < 0.0:
            raise ValueError("b must be in (-1, 0)")
        self.b = float(b)
        self.d = math.sqrt(1.0 - b * b)
        self.beta = math.atan2(self.d, -self.b)  # tan(beta) = -d/b, beta in (0, pi/2)
        self.pow = math.pi / self.beta
        phi_min = math.degrees(math.atan2(-b, self.d))
        self.param_range = (phi_min, 180.0 - phi_min)

    def wedge_image(self, phi_deg: float) -> complex:
        t = math.radians(phi_deg)
        z = complex(math.cos(t), self.b + math.sin(t))
        w = -(z + self.d) / (z - self.d)
        return w ** self.pow

    def _density(self, phi_deg):
        t = math.radians(phi_deg)
        z = complex(math.cos(t), self.b + math.sin(t))
        f = self.wedge_image(phi_deg)
        prefac = (abs(z + self.d) ** (self.pow - 1.0)
                  / abs(z - self.d) ** (self.pow + 1.0)) ** FIVE_EIGHTHS
        return prefac * (1.0 - f.real) ** (-FIVE_QUARTERS)


class TangentCircleLaw(AnalyticLaw):
    """Unit disc tangent to the baseline at the origin, conditioned on the
    upper half of the circle; density vs the angle about the center:
    |1 - cos(phi) + sin(phi)|^(-5/4) (1 - cos(phi))^(5/8), evaluated in the
    cancellation-free half-angle form."""

    geometry = "circle_tangent"
    param_name = "center_angle_deg"
    param_range = (0.0, 180.0)

    def _density(self, phi_deg):
        half = math.radians(phi_deg) / 2.0
        s, c = math.sin(half), math.cos(half)
        # (2 s^2)^(5/8) / (2 s (s + c))^(5/4) = 2^(-5/8) (s + c)^(-5/4)
        return 2.0 ** (-FIVE_EIGHTHS) * (s + c) ** (-FIVE_QUARTERS)


@lru_cache(maxsize=None)
def _shared_sc_map() -> ScMap:
    return ScMap()


def law_for(domain: StarDomain) -> AnalyticLaw:
    """The closed-form law matching a benchmark domain."""
    if isinstance(domain, ChordalStrip):
        return ChordalStripLaw()
    if isinstance(domain, RadialStrip):
        return RadialStripLaw(h=float(domain.h))
    if isinstance(domain, Triangle):
        return TriangleLaw(sc_map=_shared_sc_map())
    if isinstance(domain, OffCenterCircle):
        return OffCenterCircleLaw(a=domain.a, b=domain.b)
    if isinstance(domain, CenteredCircle):
        return CenteredCircleLaw()
    if isinstance(domain, PartialCircle):
        return PartialCircleLaw(b=domain.b)
    if isinstance(domain, TangentCircle):
        return TangentCircleLaw()
    raise ValueError(f"no analytic law for {domain!r}")


LAWS = {
    "strip_chordal": ChordalStripLaw,
    "strip_radial": RadialStripLaw,
    "triangle": TriangleLaw,
    "circle_centered": CenteredCircleLaw,
    "circle_offcenter": OffCenterCircleLaw,
    "circle_partial": PartialCircleLaw,
    "circle_tangent": TangentCircleLaw,
}


def make_law(name: str, **params) -> AnalyticLaw:
    try:
        cls = LAWS[name]
    except KeyError:
        raise ValueError(f"unknown law {name!r}; known: {sorted(LAWS)}") from None
    return cls(**params)
