import math

import numpy as np
import pytest

from sawdilate.analytic import (
    CenteredCircleLaw,
    ChordalStripLaw,
    OffCenterCircleLaw,
    PartialCircleLaw,
    RadialStripLaw,
    ScMap,
    TangentCircleLaw,
    TriangleLaw,
    UnsupportedRegionError,
    law_for,
    make_law,
)
from sawdilate.domains import make_domain

SC = ScMap()

ALL_LAWS = [
    ChordalStripLaw(),
    RadialStripLaw(0.25),
    TriangleLaw(SC),
    CenteredCircleLaw(),
    OffCenterCircleLaw(0.75, 0.0),
    PartialCircleLaw(-0.75),
    TangentCircleLaw(),
]


# -- Schwarz-Christoffel map -------------------------------------------------------


def test_sc_series_matches_quadrature():
    for x in np.linspace(3.0, 50.0, 60):
        assert abs(SC._series(float(x)) - SC.quad_F(float(x))) < 1e-8


def test_sc_f3_real_positive():
    assert SC.F3 > 0.0
    assert isinstance(SC.F3, float)


def test_sc_triangle_equilateral():
    a, b, c = SC.side_lengths()
    assert abs(a - b) < 1e-6
    assert abs(b - c) < 1e-6


def test_sc_midpoints():
    v1, vm1, vinf = SC.vertices()
    v1, vm1 = complex(v1), complex(vm1)
    assert abs(SC(0.0) - (v1 + vm1) / 2) < 1e-9
    assert abs(SC(3.0) - (v1 + vinf) / 2) < 1e-9
    assert abs(SC(complex(-3.0, 0.0)) - (vm1 + vinf) / 2) < 1e-6


def test_sc_decays_to_zero():
    assert abs(SC(1e9)) < 1e-2


def test_sc_unsupported_region():
    with pytest.raises(UnsupportedRegionError):
        SC(complex(0.5, 0.5))
    with pytest.raises(UnsupportedRegionError):
        SC(-2.0)


# -- normalization and monotonicity -------------------------------------------------


@pytest.mark.parametrize("law", ALL_LAWS, ids=lambda l: l.geometry)
def test_cdf_normalized_and_monotone(law):
    lo, hi = law.param_range
    if math.isfinite(hi):
        assert abs(law.cdf(hi) - 1.0) < 1e-8
    else:
        # accumulated mass over a wide window must account for everything
        left, right = law.finite_range(1e-12)
        assert abs(law.cdf(right) - 1.0) < 1e-8
        lo, hi = left, right
    if not math.isfinite(lo):
        lo = law.finite_range(1e-9)[0]
    grid = np.linspace(lo + 1e-9 * (hi - lo), hi - 1e-9 * (hi - lo), 1000)
    vals = law.cdf_many(grid)
    assert np.all(np.diff(vals) >= -1e-12)
    assert vals[0] >= 0.0 and vals[-1] <= 1.0 + 1e-12


@pytest.mark.parametrize("law", ALL_LAWS, ids=lambda l: l.geometry)
def test_density_positive_where_mass_lives(law):
    # probe at CDF quantiles so the grid never lands on far tails or the
    # radial strip's zero-density seam
    lo, hi = law.finite_range(1e-4)
    grid = np.linspace(lo, hi, 200)
    cdfs = law.cdf_many(grid)
    for q in np.linspace(0.02, 0.98, 25):
        t = float(np.interp(q, cdfs, grid))
        assert law.density(t) > 0.0


def test_density_domain_error_at_boundary():
    law = TangentCircleLaw()
    with pytest.raises(ValueError):
        law.density(0.0)
    with pytest.raises(ValueError):
        law.density(180.0)
    with pytest.raises(ValueError):
        law.density(-5.0)


# -- specific values -----------------------------------------------------------------


def test_chordal_strip_values():
    law = ChordalStripLaw()
    assert law.density(0.0) == 1.0  # cosh(0) = 1, c = 1
    assert law.cdf(0.0) == pytest.approx(0.5, abs=1e-10)
    # even symmetry
    for x in (0.3, 1.1, 2.7):
        assert law.cdf(-x) == pytest.approx(1.0 - law.cdf(x), abs=1e-9)


def test_centered_circle_uniform():
    law = CenteredCircleLaw()
    assert law.cdf(90.0) == pytest.approx(0.25)
    assert law.density(123.0) == 1.0


def test_tangent_circle_density_value():
    law = TangentCircleLaw()
    assert law.density(90.0) == pytest.approx(2.0 ** -1.25, rel=1e-12)
    # the half-angle form equals the textbook form away from the endpoints
    for phi in (10.0, 45.0, 137.0, 179.0):
        t = math.radians(phi)
        raw = abs(1 - math.cos(t) + math.sin(t)) ** -1.25 * (1 - math.cos(t)) ** 0.625
        assert law.density(phi) == pytest.approx(raw, rel=1e-9)


def test_offcenter_density_value():
    law = OffCenterCircleLaw(0.75, 0.0)
    assert law.density(1e-12) == pytest.approx((49.0 / 16.0) ** -0.625, rel=1e-9)
    assert (49.0 / 16.0) ** -0.625 == pytest.approx((7.0 / 4.0) ** -1.25)


def test_offcenter_at_origin_is_uniform():
    law = OffCenterCircleLaw(0.0, 0.0)
    uniform = CenteredCircleLaw()
    for t in np.linspace(1, 359, 23):
        assert law.density(float(t)) == pytest.approx(1.0, rel=1e-14)
        assert law.cdf(float(t)) == pytest.approx(uniform.cdf(float(t)), abs=1e-10)


def test_radial_strip_branch_ratio_identity():
    law = RadialStripLaw(0.25)
    ratio = law.density_x(0.0, "lower") / law.density_x(0.0, "upper")
    pred = ((1 + math.cos(math.pi * 0.25)) / (1 - math.cos(math.pi * 0.25))) ** 0.625
    assert ratio == pytest.approx(pred, rel=1e-12)
    # lower boundary is closer to the origin, so it carries more mass
    assert law.cdf(180.0) < 0.5


def test_radial_strip_density_even_per_component():
    law = RadialStripLaw(0.25)
    for x in (0.5, 1.5, 3.0):
        for comp in ("lower", "upper"):
            assert law.density_x(x, comp) == pytest.approx(law.density_x(-x, comp), rel=1e-14)


def test_partial_circle_positive_and_wedge_branch():
    law = PartialCircleLaw(-0.75)
    assert law.beta == pytest.approx(math.atan(math.sqrt(7.0) / 3.0), rel=1e-12)
    lo, hi = law.param_range
    assert lo == pytest.approx(math.degrees(math.asin(0.75)))
    for phi in np.linspace(lo + 0.01, hi - 0.01, 40):
        f = law.wedge_image(float(phi))
        # the arc maps to the negative real axis of the half plane
        assert f.real < 0.0
        assert abs(f.imag) < 1e-6 * max(1.0, abs(f.real))
        assert law.density(float(phi)) > 0.0


def test_triangle_law_values():
    law = TriangleLaw(SC)
    # midpoint of a side maps to x = 3
    assert law.x_of_arc(law.side / 2) == pytest.approx(3.0, rel=1e-10)
    d_mid = law.density(law.side / 2)
    assert d_mid == pytest.approx(8.0 ** (5.0 / 12.0) / 12.0 ** 0.625, rel=1e-9)
    # per-side masses are equal by symmetry of the stitched polar cdf
    assert law.cdf_polar(120.0) == pytest.approx(1.0 / 3.0, abs=1e-8)
    assert law.cdf_polar(240.0) == pytest.approx(2.0 / 3.0, abs=1e-8)
    # density vanishes toward the vertices
    assert law.density(1e-4) < 1e-3
    assert law.cdf(law.side / 2) == pytest.approx(0.5, abs=1e-10)


def test_triangle_mod120_cdf_monotone():
    law = TriangleLaw(SC)
    grid = np.linspace(0.5, 119.5, 120)
    vals = [law.cdf_mod120(float(t)) for t in grid]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert law.cdf_mod120(0.0) == 0.0
    assert law.cdf_mod120(120.0) == pytest.approx(1.0, abs=1e-10)


def test_chordal_strip_polar_axis():
    law = ChordalStripLaw()
    # theta and x axes are linked by x = cot(theta)
    for theta in (30.0, 60.0, 90.0, 120.0):
        x = 1.0 / math.tan(math.radians(theta))
        assert law.cdf_polar(theta) == pytest.approx(1.0 - law.cdf(x), abs=1e-12)
    assert law.cdf_polar(90.0) == pytest.approx(0.5, abs=1e-9)


def test_law_for_matches_domains():
    for name in ("strip_chordal", "strip_radial", "triangle", "circle_centered",
                 "circle_offcenter", "circle_partial", "circle_tangent"):
        law = law_for(make_domain(name))
        assert law.geometry == name


def test_make_law_unknown():
    with pytest.raises(ValueError):
        make_law("pentagon")
