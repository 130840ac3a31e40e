import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latlab.diophantine import RealSpec, cf_expand, excursion_times, lambda_s, parse_real
from latlab.experiments import (
    LOGLAW_HEADER,
    UPPER_HEADER,
    ExperimentConfig,
    InvalidRateFunction,
    PeriodicOrbitError,
    block_bound,
    certified_exponents,
    continuous_envelope,
    dyadic_blocks,
    exceedance_times,
    persistent_exceeders,
    run_loglaw,
    run_upper_bound,
    run_witness_nd,
    sharp_regions,
    sharp_witness,
    witness_2d,
    witness_2d_lambda,
    witness_nd,
    write_csv,
)
from latlab.flows import FlowSpec, OrbitFrame, unipotent_apply
from latlab.lattice import LatticeBasis
from latlab.sampling import SamplerSpec, sample_trial


def exact2d(i, seed=5):
    return sample_trial(SamplerSpec("exact_2d", 2, seed=seed), i)


# configuration


@pytest.mark.parametrize("kw", [dict(trials=0), dict(rho=1.0), dict(eps=0.0), dict(n=3, eps=0.34),
                                dict(delta=0.0), dict(flow="spiral"), dict(k_min=1.0), dict(k_ratio=1.0)])
def test_config_rejects(kw):
    with pytest.raises(ValueError):
        ExperimentConfig(**kw)


def test_k_schedule_and_metadata():
    cfg = ExperimentConfig(k_min=16, k_max=1024, k_ratio=4)
    assert cfg.k_schedule() == [16.0, 64.0, 256.0, 1024.0]
    md = cfg.metadata()
    assert md.startswith("latlab ") and "eps=0.10000000000000001" in md and "threads" not in md
    assert cfg.with_updates(seed=3, trials=None).seed == 3


def test_csv_is_deterministic(tmp_path):
    rows = [[0, 0.1, math.nan, "1 2"], [1, 1e300, -0.0, ""]]
    a = write_csv(None, ["i", "x", "y", "c"], rows, "meta", ["done"])
    p = tmp_path / "o.csv"
    b = write_csv(str(p), ["i", "x", "y", "c"], rows, "meta", ["done"])
    assert a == b == p.read_bytes().decode()
    assert a.splitlines()[0] == "# meta" and a.splitlines()[-1] == "# done"
    assert "0.10000000000000001" in a and "\r" not in a


# planar witnesses


def test_witness_2d_sqrt2():
    recs = witness_2d_lambda(parse_real("surd:sqrt(2)"), 1000)
    assert recs and all(r.check() for r in recs)
    for r in recs:
        x, y = r.coords
        assert x * x <= r.k * (1 + 1e-12) and y * y * r.k <= 1 + 1e-12
        assert r.alpha1 >= math.sqrt(abs(r.t)) * (1 - 1e-9)
    xs = [abs(r.coords[0]) for r in recs]
    ys = [abs(r.coords[1]) for r in recs]
    assert all(b > a for a, b in zip(xs, xs[1:])) and all(b < a for a, b in zip(ys, ys[1:]))
    # at least one new record per decade of k
    for d in range(3):
        assert any(10**d < r.k <= 10 ** (d + 1) for r in recs)


def test_witness_2d_rational_is_periodic():
    with pytest.raises(PeriodicOrbitError):
        witness_2d_lambda(parse_real("rat:1/2"), 100)
    # same check from the basis alone
    with pytest.raises(PeriodicOrbitError):
        witness_2d(lambda_s(0.5), 100)


def test_witness_2d_time_is_exact():
    recs = witness_2d(exact2d(0), 500)
    # t_k sends y_k's vector to (0, y_k)
    sp = FlowSpec.horocycle()
    for r in recs:
        x, y = r.coords
        w = unipotent_apply(sp, Fraction(r.t), [Fraction(x), Fraction(y)])
        assert abs(float(w[0])) <= 1e-9 * max(1.0, abs(x))


@settings(max_examples=15)
@given(st.integers(0, 10**6))
def test_witness_2d_property(i):
    recs = witness_2d(exact2d(i, seed=17), 300)
    assert recs and all(r.check() for r in recs)


# witnesses in higher dimension


@pytest.mark.parametrize("flow", ["split", "regular"])
def test_witness_nd_bounds(gm3, flow):
    for b in gm3[:3]:
        recs = witness_nd(b, 3, 0.1, [16, 64, 256, 1024], flow)
        for r in recs:
            if r.found:
                assert r.check() and 0 < r.t <= r.k**1.1 * (1 + 1e-12)
                assert r.exponent >= r.extra["exponent_floor"] - 1e-9


def test_witness_nd_split_time():
    # (x1, x2, x3) with x3 > 0 reached at t = -x2 / x3
    b = LatticeBasis(np.eye(3))
    recs = witness_nd(b, 3, 0.1, [4.0], "split")
    assert not recs[0].found  # Z^3 has no point with 0 < x3 < 1


def test_witness_nd_rejects():
    b = LatticeBasis(np.eye(3))
    with pytest.raises(ValueError):
        witness_nd(b, 3, 0.5, [4.0])
    with pytest.raises(ValueError):
        witness_nd(b, 3, 0.1, [16.0, 4.0])
    with pytest.raises(ValueError):
        witness_nd(b, 2, 0.1, [4.0])


def test_run_witness_nd_stats():
    cfg = ExperimentConfig(n=3, trials=12, k_min=16, k_max=256, seed=2)
    recs, rows, stats, summary = run_witness_nd(cfg)
    assert len(recs) == 12 and len(stats) == 3 and len(summary) == 3
    for s in stats:
        assert s["miss"] <= s["bound"] + 3 * s["stderr"] + 1e-12
    ex = certified_exponents(recs)
    assert ex.shape == (12,)


def test_sharp_witness_power_and_log():
    b = sample_trial(SamplerSpec("goldstein_mayer", 3, seed=4), 0)
    for rate, c in (("power", 1.0), ("log", 0.9)):
        region = sharp_regions({"rate": rate, "c": c, "delta": 0.1}, 3, 1000.0)
        rec = sharp_witness(region, b, c)
        if rec.found:
            assert rec.check()
            assert rec.extra["rate_ratio"] < c or rec.extra["prop_holds"]


def test_sharp_rejects_bad_rate():
    with pytest.raises(InvalidRateFunction):
        sharp_regions({"rate": "log", "c": 0.99, "delta": 0.1}, 3, 100.0)


# upper side


def test_dyadic_blocks():
    assert dyadic_blocks(10) == [(1, 1), (2, 3), (4, 7), (8, 10)]
    assert block_bound(2, 0.25, 1, 1) == pytest.approx(math.pi)


def brute_exceedances(spec, b, eps, lo, hi):
    n = spec.n
    out = set()
    for k in range(lo, hi + 1):
        f = OrbitFrame(spec, b)
        f.move(k)
        if math.log(f.alpha1()) > (1.0 / n + eps) * math.log(k):
            out.add(k)
    return out


@pytest.mark.parametrize("i", range(4))
def test_exceedances_match_brute_force(i):
    sp = FlowSpec.horocycle()
    b = exact2d(i, seed=8)
    for lo, hi in ((2, 3), (4, 7), (64, 127), (256, 511)):
        assert exceedance_times(sp, b, 0.05, lo, hi) == brute_exceedances(sp, b, 0.05, lo, hi)


def test_huge_eps_has_no_exceedances():
    # the threshold k^-(1/2 + 5) drops far below a typical first minimum
    sp = FlowSpec.horocycle()
    for i in range(20):
        assert not exceedance_times(sp, exact2d(i), 5.0, 3, 4096)


def test_upper_bound_blocks():
    cfg = ExperimentConfig(name="ub", n=2, sampler="exact_2d", flow="horocycle", eps=0.25, trials=40,
                           horizon=2**12, seed=1)
    counts, rows = run_upper_bound(cfg)
    assert counts.shape == (40, 13) and len(rows[0]) == len(UPPER_HEADER)
    for r in rows:
        # per-block frequency against the tail-bound sum
        assert r[3] <= r[5] + 4 * r[4] + 1e-12
    assert persistent_exceeders(counts, 10) == 0


def test_upper_bound_warns_and_needs_unipotent():
    with pytest.warns(UserWarning):
        run_upper_bound(ExperimentConfig(n=2, sampler="exact_2d", flow="horocycle", eps=0.25, trials=2,
                                         horizon=100))
    with pytest.raises(ValueError):
        run_upper_bound(ExperimentConfig(n=2, sampler="exact_2d", flow="geodesic", eps=0.25, trials=2))


# log law


def test_continuous_envelope_brackets_grid():
    sp = FlowSpec.horocycle()
    b = exact2d(3)
    env = continuous_envelope(sp, b, 4.0, 1e4)
    ts = np.geomspace(4.0, 1e4, 4000)
    grid = []
    for t in ts:
        f = OrbitFrame(sp, b)
        f.move(float(t))
        grid.append(math.log(f.alpha1()) / math.log(t))
    assert env >= max(grid) - 1e-9
    assert env <= 1.0


def test_continuous_envelope_golden():
    # a badly approximable slope keeps the excursions at height ~ sqrt(t)
    g = RealSpec.golden()
    env = continuous_envelope(FlowSpec.horocycle(), lambda_s(g), 100.0, 1e6)
    # independent route: exact excursion times from the convergents
    ex = [e for e in excursion_times(g, cf_expand(g, 40)) if 100 <= math.exp(e.log_abs_t) <= 1e6]
    at_times = max(e.log_alpha / e.log_abs_t for e in ex)
    assert at_times - 1e-9 <= env <= at_times + 0.03


def test_loglaw_horocycle_median():
    cfg = ExperimentConfig(name="ll", n=2, sampler="exact_2d", flow="horocycle", trials=20, horizon=1e6,
                           eps=0.1, seed=3)
    res, rows, summary, target = run_loglaw(cfg, witness_k=1000)
    assert target == 0.5 and len(rows[0]) == len(LOGLAW_HEADER)
    med = np.median([r["continuous_envelope"] for r in res])
    assert 0.35 <= med <= 0.65
    assert all(r["continuous_envelope"] >= r["tail_envelope"] - 1e-9 for r in res)
    assert any(s.startswith("continuous_envelope: median=") for s in summary)


def test_loglaw_identity_diagonal():
    # Z^2 under diag(e^(t/2), e^(-t/2)) has alpha1 = e^(t/2) exactly
    cfg = ExperimentConfig(n=2, flow="geodesic", trials=1, horizon=50.0, eps=0.1)
    res, *_ = run_loglaw(cfg)
    assert np.isfinite(res[0]["envelope"])
    sp = FlowSpec.geodesic()
    f = OrbitFrame(sp, LatticeBasis(np.eye(2)))
    f.move(10.0)
    assert f.alpha1() == pytest.approx(math.exp(5.0), rel=1e-12)
