import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from latlab.diophantine import (InsufficientDepthError, RealSpec, _gaps, alpha1_horocycle_direct, cf_expand,
                                convergents_of, excursion_times, exponents, geodesic_envelope,
                                geodesic_excursion_times, geodesic_prediction, horocycle_envelope,
                                horocycle_prediction, horizontal_vector, lambda_s, parse_real, reduce_2d,
                                split_exponents_demo)
from latlab.lattice import LatticeBasis, shortest_vector


def mp_quotients(x, count, prec=2000):
    """Floor algorithm on a high-precision value: an independent oracle for surd expansions."""
    out = []
    with mpmath.workprec(prec):
        for _ in range(count):
            a = int(mpmath.floor(x))
            out.append(a)
            x = 1 / (x - a)
    return out


def test_parse_forms():
    assert parse_real("rat:355/113") == RealSpec.rational(355, 113)
    assert parse_real("rat:-4") == RealSpec.rational(-4)
    assert parse_real("surd:golden") == RealSpec.golden()
    assert parse_real("surd:1/2+1/2*sqrt(5)") == RealSpec.golden()
    assert parse_real("surd:sqrt(2)") == RealSpec.surd(0, 1, 2)
    assert parse_real("surd:-3+2*√7") == RealSpec.surd(-3, 2, 7)
    assert parse_real("surd:sqrt(8)") == RealSpec.surd(0, 2, 2)
    assert parse_real("surd:3+sqrt(4)").is_rational
    assert parse_real("rule:mu(3)") == RealSpec.from_rule("mu", 3)
    for bad in ("rat:1/0", "surd:sqrt(x)", "rule:mu()", "rule:nope(2)", "pi", "rule:mu(1.5)"):
        with pytest.raises((ValueError, ZeroDivisionError)):
            parse_real(bad)


def test_rational_expansion():
    cf = cf_expand(parse_real("rat:355/113"), 10)
    assert cf.quotients == [3, 7, 16]
    assert cf.convergents == [(3, 1), (22, 7), (355, 113)]
    assert cf.terminated
    assert str(cf) == "[3; 7, 16]"
    e = exponents(cf)
    assert (e.mu, e.mu_plus, e.mu_minus) == (1.0, 1.0, 1.0)


def test_periodic_surds():
    g = cf_expand(RealSpec.golden(), 25)
    assert g.quotients == [1] * 26 and g.period == (1,)
    r2 = cf_expand(RealSpec.surd(0, 1, 2), 25)
    assert r2.quotients == [1] + [2] * 25 and r2.period == (2,)
    r = cf_expand(RealSpec.surd(0, 1, 19), 12)
    assert r.period == (2, 1, 3, 1, 2, 8)


@given(st.fractions(-20, 20, max_denominator=30), st.fractions(-5, 5, max_denominator=7).filter(lambda b: b != 0),
       st.sampled_from([2, 3, 5, 6, 7, 10, 11, 13, 14, 15, 17, 19, 21, 22, 23]))
def test_surd_expansion_against_floor_oracle(a, b, d):
    s = RealSpec.surd(a, b, d)
    cf = cf_expand(s, 20)
    with mpmath.workprec(2000):
        x = mpmath.mpf(a.numerator) / a.denominator + mpmath.mpf(b.numerator) / b.denominator * mpmath.sqrt(d)
        assert cf.quotients == mp_quotients(x, 21)


@given(st.integers(-10**6, 10**6), st.integers(1, 10**6))
def test_rational_recurrence_and_bounds(p, q):
    s = RealSpec.rational(p, q)
    cf = cf_expand(s, 60)
    a, conv = cf.quotients, cf.convergents
    assert Fraction(*conv[-1]) == Fraction(p, q)
    for n in range(1, len(conv) - 1):
        assert conv[n + 1][1] == a[n + 1] * conv[n][1] + conv[n - 1][1]
    for n in range(len(conv) - 1):
        pn, qn = conv[n]
        err, bound = abs(Fraction(p, q) - Fraction(pn, qn)), Fraction(1, qn * conv[n + 1][1])
        # equality only for the convergent just before the number itself
        assert err < bound or (n == len(conv) - 2 and err == bound)


def test_convergent_bounds_for_surd():
    s = RealSpec.surd(0, 1, 7)
    cf = cf_expand(s, 30)
    with mpmath.workprec(600):
        x = mpmath.sqrt(7)
        for n in range(len(cf.convergents) - 1):
            p, q = cf.convergents[n]
            assert abs(x - mpmath.mpf(p) / q) < mpmath.mpf(1) / (q * cf.convergents[n + 1][1])


def test_exponent_targets():
    e3 = exponents(cf_expand(RealSpec.from_rule("mu", 3), 20))
    assert e3.mu == pytest.approx(3, abs=0.05)
    e4 = exponents(cf_expand(RealSpec.from_rule("mu", 4), 11))
    assert e4.mu == pytest.approx(4, abs=0.05)
    s, e = split_exponents_demo(3, 2, 24)
    assert e.mu_plus == pytest.approx(3, abs=0.1)
    assert e.mu_minus == pytest.approx(2, abs=0.1)
    assert e.mu == max(e.mu_plus, e.mu_minus)
    s2, e2 = split_exponents_demo(2, 2, 30)
    assert set(cf_expand(s2, 30).quotients[1:]) == {1}
    with pytest.raises(ValueError):
        split_exponents_demo(1.5, 2, 10)


def test_golden_exponent_converges_slowly():
    vals = [exponents(cf_expand(RealSpec.golden(), d)).mu for d in (30, 60, 120, 240)]
    assert all(a > b > 2 for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 2.01


def test_depth_errors():
    with pytest.raises(InsufficientDepthError):
        exponents(cf_expand(RealSpec.golden(), 2))
    with pytest.raises(ValueError):
        cf_expand(RealSpec.golden(), 0)


def test_lambda_s_examples():
    assert np.array_equal(lambda_s(RealSpec.rational(0)).matrix, np.eye(2))
    half = RealSpec.rational(1, 2)
    c = horizontal_vector(half)
    assert c == (2, -1)
    assert np.allclose(lambda_s(half).matrix @ np.array(c), [2.0, 0.0])
    assert lambda_s(RealSpec.golden()).det() == 1.0
    assert horizontal_vector(RealSpec.golden()) is None


def test_excursion_signs_and_gap_identity():
    s = RealSpec.golden()
    cf = cf_expand(s, 30)
    ex = excursion_times(s, cf)
    assert all(a.sign == -b.sign for a, b in zip(ex, ex[1:]))
    direct = {n: d for n, p, q, d in _gaps(s, cf, 400)}
    for e in ex[1:]:
        if e.index in direct:
            with mpmath.workprec(400):
                assert abs(e.gap - abs(direct[e.index])) <= abs(direct[e.index]) * mpmath.mpf(2) ** -90
                assert (direct[e.index] > 0) == (e.sign < 0)
    phi = (1 + math.sqrt(5)) / 2
    e = next(x for x in ex if (x.p, x.q) == (3, 2))
    assert float(e.t) == pytest.approx(-2 / (2 * phi - 3), rel=1e-12)
    assert math.exp(e.log_alpha) == pytest.approx(1 / abs(2 * phi - 3), rel=1e-12)


@pytest.mark.parametrize("spec,depth", [(RealSpec.golden(), 25), (RealSpec.surd(1, 1, 3), 20),
                                        (RealSpec.from_rule("mu", 3), 9)], ids=["golden", "sqrt3", "mu3"])
def test_excursion_alpha_is_exact(spec, depth):
    cf = cf_expand(spec, depth)
    for e in excursion_times(spec, cf):
        if e.log_gap < 0:
            assert alpha1_horocycle_direct(spec, cf, e.t) == pytest.approx(e.log_alpha, abs=1e-9)


def test_reduce_2d_matches_enumeration():
    rng = np.random.default_rng(1)
    for _ in range(50):
        m = rng.normal(size=(2, 2))
        m /= math.sqrt(abs(np.linalg.det(m)))
        if np.linalg.det(m) < 0:
            m[:, 0] *= -1
        u = [Fraction(float(x)) for x in m[:, 0]]
        v = [Fraction(float(x)) for x in m[:, 1]]
        w = reduce_2d(u, v)
        assert float(w[0] ** 2 + w[1] ** 2) ** 0.5 == pytest.approx(shortest_vector(LatticeBasis(m)).norm, rel=1e-9)


def test_horocycle_envelopes():
    g = RealSpec.golden()
    assert horocycle_envelope(excursion_times(g, cf_expand(g, 30))) == pytest.approx(horocycle_prediction(2), abs=0.05)
    for m, d in ((3, 16), (4, 11)):
        s = RealSpec.from_rule("mu", m)
        env = horocycle_envelope(excursion_times(s, cf_expand(s, d)))
        assert env == pytest.approx(horocycle_prediction(m), abs=0.05)
    s, _ = split_exponents_demo(3, 2, 24)
    ex = excursion_times(s, cf_expand(s, 24))
    assert horocycle_envelope(ex, +1) == pytest.approx(1 - 1 / 3, abs=0.05)
    assert horocycle_envelope(ex, -1) == pytest.approx(1 - 1 / 2, abs=0.05)


def test_liouville_envelope_near_one():
    s = RealSpec.from_rule("liouville")
    ex = excursion_times(s, cf_expand(s, 10))
    assert max(e.ratio for e in ex) > 0.9
    assert all(e.ratio < 1 for e in ex if e.q > 1)


def test_geodesic_times():
    g = RealSpec.golden()
    times = geodesic_excursion_times(g, cf_expand(g, 30))
    for t in times:
        assert t.t == pytest.approx(t.nu * math.log(t.q), rel=1e-12)
    assert geodesic_envelope(times) == pytest.approx(geodesic_prediction(2), abs=0.05)
    s = RealSpec.from_rule("mu", 4)
    assert geodesic_envelope(geodesic_excursion_times(s, cf_expand(s, 11))) == pytest.approx(0.25, abs=0.05)


def test_rational_has_no_excursions():
    with pytest.raises(ValueError):
        excursion_times(RealSpec.rational(1, 2), cf_expand(RealSpec.rational(1, 2), 5))
    with pytest.raises(ValueError):
        geodesic_excursion_times(RealSpec.rational(1, 2), cf_expand(RealSpec.rational(1, 2), 5))


def test_convergents_of_small():
    assert convergents_of([1, 2, 2]) == [(1, 1), (3, 2), (7, 5)]
