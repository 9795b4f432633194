import math

import numpy as np
import pytest

from helpers import random_saw

from sawdilate.domains import make_domain
from sawdilate.errors import InsufficientDataError
from sawdilate.estimator import (
    DilationSample,
    SampleSet,
    WeightedCdf,
    observe,
    segment_masses,
    weighted_cdf,
)
from sawdilate.walk import walk_from_sites


def make_sample_set(params, lams=None, chains=1, w=None, l=None):
    n = len(params)
    lams = np.ones(n) if lams is None else np.asarray(lams, dtype=float)
    w = np.ones(n) if w is None else np.asarray(w, dtype=float)
    l = np.ones(n) if l is None else np.asarray(l, dtype=float)
    cid = np.arange(n) % chains
    sidx = np.arange(n)
    return SampleSet(cid, sidx, lams, np.zeros(n, int), np.ones(n, int),
                     np.zeros(n), np.asarray(params, dtype=float), w, l)


# -- observe -------------------------------------------------------------------


def test_observe_keeps_comfortable_interior_walk():
    dom = make_domain("strip_chordal")
    w = walk_from_sites([(0, 0), (0, 1), (1, 1), (1, 2)])
    s = observe(dom, w, chain_id=3, sample_index=17)
    assert s is not None
    assert s.lam == 2.0
    assert s.param == pytest.approx(0.5)
    assert s.w_thickness == pytest.approx(1.0)
    assert s.l_value == 1.0
    assert (s.chain_id, s.sample_index) == (3, 17)


def test_observe_rejects_interior_violation():
    dom = make_domain("strip_chordal")
    w = walk_from_sites([(0, 0), (1, 0), (1, 1), (1, 2)])  # touches y=0
    assert observe(dom, w) is None


def test_observe_rejects_undefined_dilation():
    dom = make_domain("strip_radial")
    w = walk_from_sites([(0, 0), (0, 1), (1, 1), (1, 0)])  # endpoint on axis
    assert observe(dom, w) is None


def test_observe_windows_out_lower_arc():
    dom = make_domain("circle_tangent")
    # endpoint at polar angle < 45: interior pass but conditioned away
    w = walk_from_sites([(0, 0), (0, 1), (1, 1), (2, 1), (3, 1)])
    lam = dom.dilation_of((3, 1))
    assert dom.strictly_inside(w, lam=lam)
    assert observe(dom, w) is None


# -- weighted cdf ----------------------------------------------------------------


def test_weighted_cdf_requires_enough_samples():
    s = make_sample_set([0.5])
    with pytest.raises(InsufficientDataError):
        weighted_cdf(s, p=0.0)


def test_single_sample_step_shape():
    # the CDF of one sample is a unit step at its parameter
    cdf = WeightedCdf(np.array([0.7]), np.array([1.0]), np.array([0.7]),
                      np.array([0.0]), 1.0, 1)
    assert cdf.evaluate(0.69) == 0.0
    assert cdf.evaluate(0.7) == 1.0
    assert cdf.evaluate(1.0) == 1.0


def test_equal_weights_match_unweighted_ecdf():
    rng = np.random.default_rng(3)
    params = rng.uniform(0, 1, 500)
    s = make_sample_set(params, chains=4)
    cdf = weighted_cdf(s, p=0.0)
    qs = np.linspace(0, 1, 50)
    ecdf = np.searchsorted(np.sort(params), qs, side="right") / len(params)
    assert np.allclose(cdf.evaluate(qs), ecdf, atol=1e-12)


def test_weighted_cdf_ends_at_exactly_one():
    rng = np.random.default_rng(4)
    s = make_sample_set(rng.uniform(0, 1, 200), lams=rng.uniform(1, 30, 200), chains=2)
    cdf = weighted_cdf(s, p=-1.25)
    assert cdf.cum[-1] == 1.0
    assert np.all(np.diff(cdf.cum) >= 0.0)


def test_p_reweighting_identity():
    # applying the power at analysis time equals baking it into the stored
    # weight at observation time
    rng = np.random.default_rng(5)
    n = 400
    params = rng.uniform(-2, 2, n)
    lams = rng.uniform(1, 50, n)
    w = rng.uniform(0.5, 2.0, n)
    p = -0.75
    a = make_sample_set(params, lams=lams, w=w)
    baked = make_sample_set(params, lams=np.ones(n), w=lams ** p * w)
    ca = weighted_cdf(a, p=p)
    cb = weighted_cdf(baked, p=0.0)
    assert np.array_equal(ca.cum, cb.cum)
    assert np.array_equal(ca.params, cb.params)


def test_rescaling_lattice_table_leaves_cdf_unchanged():
    rng = np.random.default_rng(6)
    n = 300
    params = rng.uniform(0, 360, n)
    lams = rng.uniform(1, 40, n)
    lvals = rng.uniform(0.5, 2.0, n)
    a = make_sample_set(params, lams=lams, l=lvals)
    b = make_sample_set(params, lams=lams, l=7.5 * lvals)
    ca = weighted_cdf(a, p=-1.0)
    cb = weighted_cdf(b, p=-1.0)
    assert np.allclose(ca.cum, cb.cum, atol=1e-12)


def test_stderr_reasonable_for_iid_samples():
    rng = np.random.default_rng(7)
    s = make_sample_set(rng.uniform(0, 1, 6400), chains=4)
    cdf = weighted_cdf(s, p=0.0)
    mid = cdf.stderr_at(0.5)
    expected = math.sqrt(0.25 / 6400)
    assert 0.3 * expected < mid < 3.0 * expected


# -- segment masses ---------------------------------------------------------------


def test_segment_masses_sum_to_one():
    rng = np.random.default_rng(8)
    s = make_sample_set(rng.uniform(0, 360, 900), lams=rng.uniform(1, 10, 900), chains=3)
    segs = segment_masses(s, p=-1.0, segmentation=((0.0, 120.0), (120.0, 240.0), (240.0, 360.1)))
    total = sum(m for _, m, _ in segs)
    assert total == pytest.approx(1.0, abs=1e-12)
    for _, m, e in segs:
        assert m > 0 and e >= 0


def test_segment_masses_requires_coverage():
    rng = np.random.default_rng(9)
    s = make_sample_set(rng.uniform(0, 360, 100), chains=2)
    with pytest.raises(ValueError):
        segment_masses(s, p=0.0, segmentation=((0.0, 100.0),))


def test_rotation_covariance_centered_circle():
    # rotating every walk by 90 degrees maps retained samples to retained
    # samples with the parameter shifted by 90; lambda and the weight are
    # untouched
    dom = make_domain("circle_centered")
    rng = np.random.default_rng(10)
    checked = 0
    while checked < 25:
        w = random_saw(rng, 16)
        s = observe(dom, w)
        rot = walk_from_sites([(-y, x) for x, y in w.sites()])
        s_rot = observe(dom, rot)
        assert (s is None) == (s_rot is None)
        if s is None:
            continue
        checked += 1
        assert s_rot.lam == pytest.approx(s.lam, rel=1e-15)
        assert s_rot.w_thickness == pytest.approx(s.w_thickness, rel=1e-12)
        assert s_rot.param == pytest.approx((s.param + 90.0) % 360.0, abs=1e-9)


def test_sampleset_csv_roundtrip_bitstable(tmp_path):
    rng = np.random.default_rng(11)
    s = make_sample_set(rng.uniform(0, 1, 64), lams=rng.uniform(1, 5, 64), chains=2)
    p1 = tmp_path / "s1.csv"
    p2 = tmp_path / "s2.csv"
    s.to_csv(p1)
    s2 = SampleSet.from_csv(p1)
    s2.to_csv(p2)
    assert p1.read_bytes() == p2.read_bytes()
    assert np.array_equal(s.param, s2.param)
    assert np.array_equal(s.lam, s2.lam)
