import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from latlab.diophantine import RealSpec, cf_expand, excursion_times, lambda_s
from latlab.flows import (FlowOverflowError, FlowSpec, OrbitFrame, abs_spread, alpha1_at, apply_flow,
                          excursion_trace, flow_apply, flow_matrix, geometric_times, unipotent_apply)
from latlab.lattice import LatticeBasis, alpha1, box_points
from latlab.sampling import SamplerSpec, sample_trial
from latlab.scan import scan_windows

SPECS = [FlowSpec.horocycle(), FlowSpec.split(3), FlowSpec.regular(3), FlowSpec.regular(4),
         FlowSpec.unipotent((2, 3)), FlowSpec.unipotent((1, 2, 2)), FlowSpec.default_diagonal(3),
         FlowSpec.diagonal((0.3, 0.2, -0.5)), FlowSpec.geodesic()]


def test_spec_validation():
    with pytest.raises(ValueError):
        FlowSpec.unipotent((1, 1))
    with pytest.raises(ValueError):
        FlowSpec.unipotent((3, 2))  # not largest-last
    with pytest.raises(ValueError):
        FlowSpec.diagonal((1.0, 1.0))
    with pytest.raises(ValueError):
        FlowSpec("horocycle_2d", 3)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"{s.kind}{s.block_sizes or s.exponents}")
def test_identity_and_determinant(spec):
    assert np.array_equal(flow_matrix(spec, 0.0).matrix, np.eye(spec.n))
    m = flow_matrix(spec, 1.7).matrix
    assert abs(np.linalg.det(m) - 1) <= 1e-9


def test_regular_matrix_at_two():
    m = flow_matrix(FlowSpec.regular(3), 2.0).matrix
    assert np.array_equal(m, np.array([[1.0, 2.0, 2.0], [0.0, 1.0, 2.0], [0.0, 0.0, 1.0]]))


@given(st.sampled_from(SPECS), st.floats(-5, 5), st.floats(-5, 5))
def test_group_law(spec, s, t):
    a = flow_matrix(spec, s).matrix @ flow_matrix(spec, t).matrix
    b = flow_matrix(spec, s + t).matrix
    assert np.allclose(a, b, rtol=0, atol=1e-12 * max(1.0, np.abs(b).max()))


@given(st.sampled_from(SPECS[:6]), st.fractions(-20, 20, max_denominator=50),
       st.lists(st.fractions(-5, 5, max_denominator=9), min_size=5, max_size=5))
def test_exact_polynomials(spec, t, v):
    v = v[: spec.n]
    exact = unipotent_apply(spec, t, v)
    m = flow_matrix(spec, float(t)).matrix
    assert np.allclose(m @ np.array(v, dtype=float), [float(x) for x in exact], atol=1e-9)


@given(st.sampled_from(SPECS), st.floats(0.01, 3), st.integers(0, 10**6))
def test_abs_spread_bounds_backward_flow(spec, delta, seed):
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.1, 2.0, size=spec.n)
    bound = abs_spread(spec, delta, list(w))
    for _ in range(20):
        tau = rng.uniform(-delta, delta)
        x = rng.uniform(-w, w)
        y = flow_apply(spec, -tau, list(x))
        assert np.all(np.abs(y) <= np.array(bound) * (1 + 1e-12))


def test_horocycle_kills_convergent_column():
    s = RealSpec.golden()
    phi = (1 + math.sqrt(5)) / 2
    p, q = 3, 2
    t = -q / (q * phi - p)
    col = flow_matrix(FlowSpec.horocycle(), t).matrix @ (lambda_s(s).matrix @ np.array([q, -p]))
    assert col[0] == pytest.approx(0.0, abs=1e-12)
    assert col[1] == pytest.approx(q * phi - p, rel=1e-12)
    assert alpha1(apply_flow(FlowSpec.horocycle(), t, lambda_s(s))) >= 1 / abs(2 * phi - 3) * (1 - 1e-9)


def test_apply_flow_small_cases():
    b = sample_trial(SamplerSpec("goldstein_mayer", 3, seed=2), 0)
    assert np.array_equal(apply_flow(FlowSpec.regular(3), 0.0, b).matrix, b.matrix)
    assert alpha1(apply_flow(FlowSpec.geodesic(), 2.0, LatticeBasis.identity(2))) == pytest.approx(math.e)
    with pytest.raises(FlowOverflowError):
        apply_flow(FlowSpec.geodesic(), 5000.0, LatticeBasis.identity(2))


def test_trace_on_integer_lattice():
    spec = FlowSpec.regular(3)
    z = LatticeBasis.identity(3)
    times = [float(t) for t in range(1, 11)]
    tr = excursion_trace(spec, z, times)
    direct = [alpha1(apply_flow(spec, t, z)) for t in times]
    assert np.allclose(tr.alpha1, direct, rtol=1e-12)


@given(st.integers(0, 10**6))
def test_running_max_is_monotone(seed):
    b = sample_trial(SamplerSpec("exact_2d", 2, seed=seed), 0)
    times = geometric_times(math.e, 1e3, 1.2)
    tr = excursion_trace(FlowSpec.horocycle(), b, times)
    best = np.array(tr.envelope) * np.log(times)
    assert np.all(np.diff(best) >= -1e-12)


def test_golden_envelope_along_convergent_times():
    s = RealSpec.golden()
    cf = cf_expand(s, 30)
    base = lambda_s(s)
    ratios = []
    for e in excursion_times(s, cf)[cf.depth // 2:]:
        a = alpha1_at(FlowSpec.horocycle(), base, e.t)
        ratios.append(math.log(a) / math.log(abs(e.t)))
    assert max(ratios) == pytest.approx(0.5, abs=0.05)


def exact_det(rows):
    m = [[Fraction(x) for x in r] for r in rows]
    n, det = len(m), Fraction(1)
    for i in range(n):
        piv = next(j for j in range(i, n) if m[j][i] != 0)
        if piv != i:
            m[i], m[piv] = m[piv], m[i]
            det = -det
        det *= m[i][i]
        for j in range(i + 1, n):
            f = m[j][i] / m[i][i]
            m[j] = [a - f * b for a, b in zip(m[j], m[i])]
    return det


def test_orbit_frame_has_no_drift():
    spec = FlowSpec.regular(3)
    b = sample_trial(SamplerSpec("goldstein_mayer", 3, seed=4), 1)
    walker = OrbitFrame(spec, b)
    for t in geometric_times(1.0, 1e5, 1.5):
        walker.move(t)
    fresh = OrbitFrame(spec, b)
    fresh.move(walker.t)
    assert walker.alpha1() == pytest.approx(fresh.alpha1(), rel=1e-12)
    assert abs(exact_det(walker.C)) == 1
    exact = walker.exact_flowed(walker.C[0], Fraction(walker.t))
    assert np.allclose([float(x) for x in exact], walker.R[0], rtol=1e-12, atol=1e-300)


def test_alpha1_at_matches_apply_flow_moderate_times():
    spec = FlowSpec.split(3)
    b = sample_trial(SamplerSpec("goldstein_mayer", 3, seed=5), 2)
    for t in (0.5, 3.0, 40.0):
        assert alpha1_at(spec, b, t) == pytest.approx(alpha1(apply_flow(spec, t, b)), rel=1e-9)
    d = FlowSpec.default_diagonal(3)
    assert alpha1_at(d, b, 2.0) == pytest.approx(alpha1(apply_flow(d, 2.0, b)), rel=1e-9)


@pytest.mark.parametrize("spec", [FlowSpec.horocycle(), FlowSpec.split(3), FlowSpec.regular(3)],
                         ids=["horocycle", "split", "regular"])
def test_scan_covers_sampled_times(spec):
    # every vector inside the box at some time of the range shows up in some window
    rng = np.random.default_rng(9)
    n = spec.n
    for trial in range(4):
        b = sample_trial(SamplerSpec("goldstein_mayer", n, seed=21), trial)
        widths = [0.4] * n
        t_lo, t_hi = 10.0, 200.0
        found = set()
        for w in scan_windows(spec, b, t_lo, t_hi, widths):
            found.update(w.coeffs)
        for t in rng.uniform(t_lo, t_hi, size=15):
            for v in box_points(apply_flow(spec, float(t), b), widths):
                assert v.coeffs in found
