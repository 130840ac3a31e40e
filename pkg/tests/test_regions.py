import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from latlab.flows import FlowSpec
from latlab.lattice import box_points
from latlab.regions import (Ball, Box, JordanRegion, RateFunction, SharpRegion, ball_volume,
                            check_rate_conditions, monte_carlo_measure, witness_box_2d)
from latlab.sampling import SamplerSpec, sample_trial


def test_simple_measures():
    assert Ball(3, 2.0).measure() == pytest.approx(4 / 3 * math.pi * 8)
    assert ball_volume(2) == pytest.approx(math.pi)
    assert Ball.of_volume(4, 7.0).measure() == pytest.approx(7.0)
    assert Box.cube(3, 20.0).measure() == pytest.approx(20.0)
    assert Box.cube(3, 20.0, anchor="corner").measure() == pytest.approx(20.0)
    assert witness_box_2d(37.0).measure() == pytest.approx(4.0)
    with pytest.raises(ValueError):
        Box((0.0, 1.0), (1.0, 1.0))


def test_split_measure_value():
    assert JordanRegion.split(16, 0.25).measure() == pytest.approx(6.0)
    assert JordanRegion.split(16, 0.25).kind == "ak_split"
    assert JordanRegion.regular(16, 0.25).kind == "ak_regular"
    assert JordanRegion(FlowSpec.unipotent((2, 2)), 16, 0.2).kind == "ak_general"


def test_region_parameter_checks():
    with pytest.raises(ValueError):
        JordanRegion.split(16, 0.4)
    with pytest.raises(ValueError):
        JordanRegion.split(1.0, 0.1)
    with pytest.raises(ValueError):
        JordanRegion(FlowSpec.default_diagonal(3), 16, 0.1)


def test_split_membership_examples():
    r = JordanRegion.split(8, 0.1)
    # |z| = k^(-1/3) sits in the middle of the allowed band, y/z < 0
    assert r.contains((0.0, 1.0, -(8 ** (-1 / 3))))
    # z = 0.5 k^(-1/3) is below the band k^(-1/3 - eps)
    assert not r.contains((0.0, 1.0, -0.5 * 8 ** (-1 / 3)))
    assert not r.contains((0.0, 1.0, 0.0))
    assert not r.contains((0.0, 1.0, 8 ** (-1 / 3)))  # same sign: t0 < 0


@given(st.floats(0.05, 3.0), st.floats(-0.5, 0.5), st.booleans())
def test_regular_shear_center(y, frac, flip):
    k, eps = 50.0, 0.2
    r = JordanRegion.regular(k, eps)
    lo, hi = r.last_range()
    z = -(lo + (hi - lo) * (0.5 + frac * 0.9))
    v = (y * y / (2 * z), y, z)
    if flip:
        v = tuple(-x for x in v)
    assert r.contains(v)
    assert r.contains_exact([Fraction(x) for x in v])


REGIONS = [JordanRegion.split(8, 0.25), JordanRegion.regular(8, 0.25), JordanRegion(FlowSpec.unipotent((2, 2)), 6, 0.2),
           SharpRegion(FlowSpec.split(3), 8.0, 0.3, RateFunction(3, 0.0)),
           SharpRegion(FlowSpec.split(3), 20.0, 0.3, RateFunction(3, 1.0)),
           SharpRegion(FlowSpec.regular(3), 8.0, 0.3, RateFunction(3, 1.0)),
           Ball(3, 1.3), Box.cube(3, 5.0, anchor="corner")]


@pytest.mark.parametrize("region", REGIONS, ids=lambda r: f"{r.kind}")
def test_measure_by_rejection_sampling(region):
    rng = np.random.default_rng(17)
    est, se = monte_carlo_measure(region, 60000, rng)
    assert abs(est - region.measure()) <= 4 * se + 1e-12 * region.measure()


@given(st.sampled_from(REGIONS[:6]), st.integers(0, 10**6))
def test_member_points_lie_in_bounding_radius(region, seed):
    rng = np.random.default_rng(seed)
    pts = region.sample_uniform_box(rng, 400)
    R = region.bounding_radius()
    for p in pts:
        inside = region.contains(p)
        if inside:
            assert np.linalg.norm(p) <= R * (1 + 1e-12)
            assert region.plausibly_contains(p)
        assert inside == region.contains_exact([Fraction(float(x)) for x in p])


def test_power_rate_reduces_to_plain_shape():
    rate = RateFunction(3, 0.0)
    assert rate.l(123.0) == pytest.approx(1.0)
    s = SharpRegion(FlowSpec.split(3), 64.0, 0.1, rate)
    j = JordanRegion.split(64.0, 0.1)
    assert s.moved_bound() == pytest.approx(j.moved_bound())
    assert s.last_range()[1] == pytest.approx(64 ** (-1 / 3))
    t_lo, t_hi = s.time_range()
    assert t_lo == pytest.approx(64.0) and t_hi == pytest.approx(64.0**1.2)


def test_rate_conditions():
    assert check_rate_conditions(RateFunction(3, 0.0), 1.0, 0.1)["ok"]
    # the log rate has liminf ratio (1 + 2 delta)^(-beta/n) exactly
    rep = check_rate_conditions(RateFunction(3, 1.0), 0.9, 0.1)
    assert rep["ok"]
    assert rep["liminf_ratio"] == pytest.approx(1.2 ** (-1 / 3), rel=1e-9)
    for delta in (0.01, 0.3, 1.0):
        c = 0.999 * (1 + 2 * delta) ** (-1 / 3)
        assert check_rate_conditions(RateFunction(3, 1.0), c, delta)["ok"]
    assert not check_rate_conditions(RateFunction(3, 1.0), 0.99, 0.1)["ok"]
    assert not check_rate_conditions(RateFunction(3, -1.0), 0.5, 0.1)["l_nondecreasing"]
    assert not check_rate_conditions(RateFunction(3, 0.0), 1.0, 0.0)["r_over_power_vanishes"]


@pytest.mark.parametrize("region", [JordanRegion.split(50, 0.2), JordanRegion.regular(30, 0.2),
                                    JordanRegion.split(400, 0.1), SharpRegion(FlowSpec.split(3), 100.0, 0.2, RateFunction(3, 1.0))],
                         ids=["split50", "regular30", "split400", "sharp100"])
def test_orbit_search_matches_bounding_box(region):
    spec = SamplerSpec("goldstein_mayer", 3, seed=13)
    for i in range(10):
        b = sample_trial(spec, i)
        lo, hi = region.bounding_box()
        want = sorted(v.coeffs for v in box_points(b, hi) if region.plausibly_contains(v.coords)
                      and region.contains_exact(_exact(b, v.coeffs)))
        got = sorted(v.coeffs for v in region.lattice_search(b))
        assert got == want


def _exact(b, c):
    from latlab.flows import OrbitFrame

    return OrbitFrame(FlowSpec.split(3), b).exact_vector(c)
