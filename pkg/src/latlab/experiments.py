"""Seeded experiments: cusp-excursion witnesses, exceedance counts and log-law traces.

Every experiment is a function of an :class:`ExperimentConfig`; trial ``i``
uses the lattice ``sample_trial(config.sampler_spec(), i)``, so results do
not depend on the number of worker processes.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from functools import partial
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .flows import FlowSpec, OrbitFrame, excursion_trace, geometric_times, unipotent_apply
from .harness import run_trials
from .lattice import LatticeBasis, box_points
from .regions import JordanRegion, RateFunction, SharpRegion, ball_volume, check_rate_conditions
from .sampling import DEFAULT_PRIME, SamplerSpec, sample_trial
from .scan import scan_windows
from .transforms import avoidance_bound

FLOW_KINDS = ("split", "regular", "general", "horocycle", "geodesic", "diagonal")


class PeriodicOrbitError(ValueError):
    """The lattice has a horizontal vector, so its horocycle orbit is periodic."""


class WitnessError(AssertionError):
    """A witness failed its certified inequality on recomputation."""


class InvalidRateFunction(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "experiment"
    n: int = 3
    sampler: str = "goldstein_mayer"
    p: int = DEFAULT_PRIME
    flow: str = "split"
    blocks: tuple[int, ...] = ()
    trials: int = 100
    horizon: float = 1e4
    t0: float = math.e
    rho: float = 1.05
    k_min: float = 16.0
    k_max: float = 1e4
    k_ratio: float = 4.0
    eps: float = 0.1
    delta: float = 0.1
    c: float = 1.0
    rate: str = "power"
    seed: int = 0
    threads: int | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trial count must be >= 1")
        if self.rho <= 1:
            raise ValueError("grid ratio rho must exceed 1")
        if not 0 < self.eps < 1.0 / self.n:
            raise ValueError(f"eps must lie in (0, 1/n) = (0, {1.0 / self.n:.4g})")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.flow not in FLOW_KINDS:
            raise ValueError(f"unknown flow {self.flow!r}; choose from {', '.join(FLOW_KINDS)}")
        if self.k_ratio <= 1 or self.k_min <= 1 or self.k_max < self.k_min:
            raise ValueError("need 1 < k_min <= k_max and k_ratio > 1")
        object.__setattr__(self, "blocks", tuple(int(b) for b in self.blocks))

    def sampler_spec(self) -> SamplerSpec:
        return SamplerSpec(self.sampler, self.n, self.p, self.seed)

    def flow_spec(self) -> FlowSpec:
        n = self.n
        if self.flow == "split":
            return FlowSpec.split(n)
        if self.flow == "regular":
            return FlowSpec.regular(n)
        if self.flow == "general":
            return FlowSpec.unipotent(self.blocks)
        if self.flow == "horocycle":
            return FlowSpec.horocycle()
        if self.flow == "geodesic":
            return FlowSpec.geodesic()
        return FlowSpec.default_diagonal(n)

    def k_schedule(self) -> list[float]:
        ks, k = [], float(self.k_min)
        while k <= self.k_max * (1 + 1e-12):
            ks.append(k)
            k *= self.k_ratio
        return ks

    def metadata(self) -> str:
        items = " ".join(f"{f.name}={_fmt(getattr(self, f.name))}" for f in fields(self) if f.name != "threads")
        return f"latlab {__version__} {items}"

    def with_updates(self, **kw) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        return format(x, ".17g")
    if isinstance(x, (tuple, list)):
        return "(" + ",".join(_fmt(v) for v in x) + ")"
    return str(x)


# ---------------------------------------------------------------------------
# CSV


def write_csv(out, header: Sequence[str], rows: Iterable[Sequence], metadata: str = "",
              summary: Sequence[str] = ()) -> str:
    """CSV with ``#`` metadata and summary lines; returns the text (also written to ``out`` if given)."""
    buf = io.StringIO()
    if metadata:
        buf.write(f"# {metadata}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    for line in summary:
        buf.write(f"# {line}\n")
    text = buf.getvalue()
    if out is not None:
        if hasattr(out, "write"):
            out.write(text)
        else:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
    return text


# ---------------------------------------------------------------------------
# witnesses


@dataclass(frozen=True)
class WitnessRecord:
    """A lattice point of a shrinking target and the certified excursion it produces."""

    k: float
    found: bool
    coeffs: tuple[int, ...] = ()
    coords: tuple[float, ...] = ()
    t: float = math.nan
    alpha1: float = math.nan
    bound: float = math.nan
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def exponent(self) -> float:
        """``log alpha1 / log |t|`` at the witness time."""
        if not self.found or abs(self.t) <= 1:
            return math.nan
        return math.log(self.alpha1) / math.log(abs(self.t))

    def check(self, rel: float = 1e-9) -> bool:
        return (not self.found) or self.alpha1 >= self.bound * (1 - rel)


def _alpha_at(spec: FlowSpec, basis: LatticeBasis, t) -> float:
    frame = OrbitFrame(spec, basis)
    frame.move(t)
    return frame.alpha1()


def witness_2d(basis: LatticeBasis, k_max: int) -> list[WitnessRecord]:
    """Witnesses from the area-4 boxes ``|x| <= sqrt(k)``, ``|y| <= 1/sqrt(k)``, ``k = 1..k_max``.

    For each ``k`` the point with the smallest ``|y| > 0`` is taken (sign
    fixed by ``y > 0``); only records where ``|x|`` strictly grows and
    ``|y|`` strictly shrinks are kept.  ``t_k = -x/y`` and the bound is
    ``alpha1(h_{t_k} Lambda) >= |t_k|^(1/2)``, asserted on recomputation.
    """
    if basis.n != 2:
        raise ValueError("witness_2d is planar")
    K = int(k_max)
    # every point of some A_k lies in one of the boxes |x| <= 2^j, |y| <= 2^(1-j)
    cand = {}
    j = 0
    while True:
        for v in box_points(basis, [2.0**j, 2.0 ** (1 - j)]):
            cand.setdefault(v.coeffs, v)
        if 2.0 ** (j - 1) >= math.sqrt(K):
            break
        j += 1
    pts = list(cand.values())
    for v in pts:
        x, y = v.coords
        if abs(y) <= 1e-12 * max(1.0, abs(x)) and x * x <= K:
            raise PeriodicOrbitError(f"horizontal lattice vector {v.coords} (coefficients {v.coeffs})")
    xs = np.array([v.coords[0] for v in pts])
    ys = np.array([v.coords[1] for v in pts])
    spec = FlowSpec.horocycle()
    out: list[WitnessRecord] = []
    best_x, best_y = -1.0, math.inf
    for k in range(1, K + 1):
        ok = (xs * xs <= k) & (ys * ys * k <= 1.0)
        if not ok.any():
            raise ArithmeticError("no lattice point in an area-4 box: basis is not unimodular")
        i = int(np.flatnonzero(ok)[np.argmin(np.abs(ys[ok]))])
        v = pts[i]
        x, y = v.coords
        c = v.coeffs
        if y < 0:
            x, y, c = -x, -y, tuple(-a for a in c)
        if not (abs(y) < best_y and abs(x) > best_x):
            continue
        best_x, best_y = abs(x), abs(y)
        t = Fraction(-x) / Fraction(y)
        a1 = _alpha_at(spec, basis, t)
        rec = WitnessRecord(float(k), True, c, (x, y), float(t), a1, math.sqrt(abs(float(t))))
        if not rec.check():
            raise WitnessError(f"alpha1 = {a1} below |t|^(1/2) = {rec.bound} at k = {k}")
        out.append(rec)
    return out


def witness_2d_lambda(s, k_max: int) -> list[WitnessRecord]:
    """:func:`witness_2d` on ``Lambda_s``; rational ``s`` is rejected exactly."""
    from .diophantine import lambda_s

    if getattr(s, "is_rational", False):
        raise PeriodicOrbitError(f"{s.description} is rational: Lambda_s contains ({s.q}, 0)")
    return witness_2d(lambda_s(s), k_max)


def witness_exponent_floor(n: int, eps: float, k: float) -> float:
    """``((1/n - eps) log k - log(n-1)) / ((1 + eps) log k)``: the exponent any witness certifies."""
    lk = math.log(k)
    return ((1.0 / n - eps) * lk - math.log(n - 1)) / ((1 + eps) * lk)


def _search_witness(region, basis: LatticeBasis, first: bool = True):
    """Hit of ``region`` with the smallest positive time ``t0``, or ``None``."""
    hits = region.lattice_search(basis, first=first)
    best = None
    for h in hits:
        # exact coordinates for the time
        frame = OrbitFrame(region.flow, basis)
        v = frame.exact_vector(h.coeffs)
        t = -v[-2] / v[-1]
        if best is None or t < best[0]:
            best = (t, h, v)
    return best


def witness_nd(basis: LatticeBasis, n: int, epsilon: float, k_schedule: Sequence[float],
               flow_kind: str = "split", blocks: Sequence[int] = (), first: bool = True) -> list[WitnessRecord]:
    """One record per ``k``: a point of ``A_k`` (if any), its time and the certified ``alpha1``.

    Asserts ``alpha1(u_{t_k} Lambda) >= 1/((n-1) k^(-1/n+eps))`` and
    ``0 < t_k <= k^(1+eps)``.
    """
    if basis.n != n:
        raise ValueError("dimension mismatch")
    if not 0 < epsilon < 1.0 / n:
        raise ValueError("epsilon must lie in (0, 1/n)")
    ks = list(k_schedule)
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ValueError("k schedule must increase")
    if flow_kind == "split":
        spec = FlowSpec.split(n)
    elif flow_kind == "regular":
        spec = FlowSpec.regular(n)
    else:
        spec = FlowSpec.unipotent(blocks)
    out = []
    for k in ks:
        region = JordanRegion(spec, k, epsilon)
        hit = _search_witness(region, basis, first)
        if hit is None:
            out.append(WitnessRecord(k, False, extra={"measure": region.measure()}))
            continue
        t, h, v = hit
        a1 = _alpha_at(spec, basis, t)
        rec = WitnessRecord(k, True, h.coeffs, h.coords, float(t), a1, region.alpha_bound(),
                            extra={"measure": region.measure(), "exponent_floor": witness_exponent_floor(n, epsilon, k)})
        if not rec.check():
            raise WitnessError(f"alpha1 = {a1} below the certified {rec.bound} at k = {k}")
        if not 0 < t <= Fraction(k ** (1 + epsilon)) * (1 + Fraction(1, 10**12)):
            raise WitnessError(f"t_k = {float(t)} outside (0, k^(1+eps)]")
        out.append(rec)
    return out


def sharp_regions(params: dict, n: int, k: float, flow: FlowSpec | None = None) -> SharpRegion:
    """Target for rate ``r`` (``params``: ``rate``, ``c``, ``delta``) after checking its conditions."""
    rate = RateFunction.from_id(params.get("rate", "power"), n)
    c = float(params.get("c", 1.0))
    delta = float(params.get("delta", 0.1))
    report = check_rate_conditions(rate, c, delta)
    if not report["ok"]:
        raise InvalidRateFunction(f"rate {rate.name} with c={c}, delta={delta} fails: {report}")
    return SharpRegion(flow or FlowSpec.split(n), k, delta, rate)


def sharp_witness(region: SharpRegion, basis: LatticeBasis, c: float) -> WitnessRecord:
    """Witness for a rate-adapted target.

    Asserts ``alpha1 >= r(k)/(n-1)`` and ``k <= t_k <= k^(1+2 delta)``; the
    rate inequality ``alpha1 >= c/(n-1) r(t_k) t_k^(-2 delta/n)`` is checked
    and reported (``prop_holds``) together with the ratio that drives it.
    """
    n, k, d = region.n, region.k, region.delta
    hit = _search_witness(region, basis)
    if hit is None:
        return WitnessRecord(k, False, extra={"measure": region.measure()})
    t, h, v = hit
    a1 = _alpha_at(region.flow, basis, t)
    tf = float(t)
    rec = WitnessRecord(k, True, h.coeffs, h.coords, tf, a1, region.alpha_bound())
    if not rec.check():
        raise WitnessError(f"alpha1 = {a1} below r(k)/(n-1) = {rec.bound}")
    if not (k * (1 - 1e-12) <= tf <= k ** (1 + 2 * d) * (1 + 1e-12)):
        raise WitnessError(f"t_k = {tf} outside [k, k^(1+2 delta)]")
    r = region.rate.r
    prop = c / (n - 1) * r(tf) * tf ** (-2 * d / n)
    ratio = r(k) * tf ** (2 * d / n) / r(tf)
    rec.extra.update(measure=region.measure(), prop_bound=prop, prop_holds=a1 >= prop * (1 - 1e-9),
                     rate_ratio=ratio)
    if ratio >= c and a1 < prop * (1 - 1e-9):
        raise WitnessError("rate inequality fails although its hypothesis holds")
    return rec


# ---------------------------------------------------------------------------
# experiments over sampled lattices


def _witness_nd_trial(cfg: ExperimentConfig, trial: int):
    b = sample_trial(cfg.sampler_spec(), trial)
    return witness_nd(b, cfg.n, cfg.eps, cfg.k_schedule(), cfg.flow, cfg.blocks)


WITNESS_ND_HEADER = ["trial", "k", "found", "t_k", "alpha1", "bound", "exponent", "exponent_floor", "measure",
                     "coeffs"]


def run_witness_nd(cfg: ExperimentConfig):
    """All records plus per-``k`` miss fractions against ``C_n/m(A_k)``."""
    recs = run_trials(partial(_witness_nd_trial, cfg), cfg.trials, cfg.threads)
    rows = []
    for i, rs in enumerate(recs):
        for r in rs:
            rows.append([i, r.k, int(r.found), r.t, r.alpha1, r.bound, r.exponent,
                         r.extra.get("exponent_floor", math.nan), r.extra["measure"],
                         " ".join(map(str, r.coeffs))])
    summary = []
    ks = cfg.k_schedule()
    stats = []
    for j, k in enumerate(ks):
        misses = np.array([not rs[j].found for rs in recs], dtype=float)
        m = recs[0][j].extra["measure"]
        p = float(misses.mean())
        se = math.sqrt(p * (1 - p) / len(recs))
        bound = avoidance_bound(cfg.n, m)
        stats.append({"k": k, "miss": p, "stderr": se, "bound": bound, "measure": m})
        summary.append(f"k={_fmt(k)} miss_fraction={_fmt(p)} stderr={_fmt(se)} bound={_fmt(bound)}")
    return recs, rows, stats, summary


def certified_exponents(recs: Sequence[Sequence[WitnessRecord]], index: int = -1) -> np.ndarray:
    """Exponent of the witness at schedule position ``index`` for every lattice (``-inf`` on a miss)."""
    out = []
    for rs in recs:
        r = rs[index]
        out.append(r.exponent if r.found and abs(r.t) > 1 else -math.inf)
    return np.array(out)


def _witness2d_trial(cfg: ExperimentConfig, k_max: int, trial: int):
    b = sample_trial(cfg.sampler_spec(), trial)
    return witness_2d(b, k_max)


def run_witness_2d(cfg: ExperimentConfig, k_max: int):
    recs = run_trials(partial(_witness2d_trial, cfg, k_max), cfg.trials, cfg.threads)
    rows = [[i, r.k, r.coords[0], r.coords[1], r.t, r.alpha1, r.bound, r.exponent] for i, rs in enumerate(recs)
            for r in rs]
    return recs, rows


# upper bound: exceedances at integer times


def _exceed_threshold(n, eps, k):
    return k ** (-(1.0 / n + eps))


def _linear_window(spec: FlowSpec, v, rho: float):
    """Time interval outside which some Jordan block certainly has a coordinate above ``rho``."""
    lo, hi = -math.inf, math.inf
    for o, b in spec.blocks():
        if b < 2:
            continue
        xl, xs = float(v[o + b - 1]), float(v[o + b - 2])
        if abs(xl) > rho:
            return None
        if xl == 0:
            if abs(xs) > rho:
                return None
            continue
        a, c = (-xs - rho) / xl, (-xs + rho) / xl
        lo, hi = max(lo, min(a, c)), min(hi, max(a, c))
    return lo, hi


def exceedance_times(spec: FlowSpec, basis: LatticeBasis, eps: float, k_lo: int, k_hi: int) -> set[int]:
    """Integers ``k`` in ``[k_lo, k_hi]`` with ``log alpha1(u_k Lambda) > (1/n + eps) log k``.

    A single orbit scan with radius ``rho = k_lo^-(1/n+eps)`` finds every
    vector that could be that short at some ``k`` of the block; each
    candidate is then tested exactly at the integers it can reach.
    """
    n = spec.n
    rho = _exceed_threshold(n, eps, k_lo)
    found = set()
    seen = set()
    for win in scan_windows(spec, basis, float(k_lo), float(k_hi), [rho] * n):
        for c in win.coeffs:
            if c in seen:
                continue
            seen.add(c)
            v = win.frame.exact_vector(c)
            iv = _linear_window(spec, v, rho)
            if iv is None:
                continue
            lo = max(k_lo, math.ceil(max(iv[0], win.center - win.halfwidth) - 1e-9))
            hi = min(k_hi, math.floor(min(iv[1], win.center + win.halfwidth) + 1e-9))
            for k in range(lo, hi + 1):
                if k in found:
                    continue
                w = unipotent_apply(spec, Fraction(k), v)
                if float(sum(x * x for x in w)) < _exceed_threshold(n, eps, k) ** 2:
                    found.add(k)
    return found


def dyadic_blocks(horizon: float) -> list[tuple[int, int]]:
    H = int(horizon)
    out, b = [], 0
    while 2**b <= H:
        out.append((2**b, min(2 ** (b + 1) - 1, H)))
        b += 1
    return out


def block_bound(n: int, eps: float, lo: int, hi: int) -> float:
    """``sum_{k=lo..hi} omega_n k^-(1+n eps)``: expected exceedances in the block by the tail bound."""
    w = ball_volume(n)
    return math.fsum(w * k ** (-(1 + n * eps)) for k in range(lo, hi + 1))


def _upper_trial(cfg: ExperimentConfig, trial: int):
    b = sample_trial(cfg.sampler_spec(), trial)
    spec = cfg.flow_spec()
    return [len(exceedance_times(spec, b, cfg.eps, lo, hi)) for lo, hi in dyadic_blocks(cfg.horizon)]


UPPER_HEADER = ["block", "k_lo", "k_hi", "mean_exceedances", "stderr", "bound", "lattices_with_exceedance"]


def run_upper_bound(cfg: ExperimentConfig):
    """Per dyadic block: mean exceedance count per lattice, its stderr and the summable bound."""
    spec = cfg.flow_spec()
    if not spec.is_unipotent:
        raise ValueError("the exceedance count needs a unipotent flow")
    if cfg.horizon < 1e3:
        import warnings

        warnings.warn("horizon below 1e3: too few dyadic blocks to see any decay")
    counts = np.array(run_trials(partial(_upper_trial, cfg), cfg.trials, cfg.threads))
    blocks = dyadic_blocks(cfg.horizon)
    rows = []
    for j, (lo, hi) in enumerate(blocks):
        col = counts[:, j].astype(float)
        se = float(col.std(ddof=1) / math.sqrt(len(col))) if len(col) > 1 else 0.0
        rows.append([j, lo, hi, float(col.mean()), se, block_bound(cfg.n, cfg.eps, lo, hi), int((col > 0).sum())])
    return counts, rows


def persistent_exceeders(counts: np.ndarray, start_block: int = 10) -> int:
    """Lattices with an exceedance in every block from ``start_block`` on."""
    if counts.shape[1] <= start_block:
        return 0
    return int(np.all(counts[:, start_block:] > 0, axis=1).sum())


# log law


def _orbit_poly(spec: FlowSpec, v) -> np.ndarray:
    """Coefficients (lowest degree first) of ``|u_t v|^2`` as a polynomial in ``t``."""
    total = np.zeros(1)
    for o, b in spec.blocks():
        for i in range(b):
            coeffs = np.array([float(v[o + i + m]) / math.factorial(m) for m in range(b - i)])
            total = np.polynomial.polynomial.polyadd(total, np.polynomial.polynomial.polymul(coeffs, coeffs))
    return total


def _min_on_interval(poly: np.ndarray, a: float, b: float) -> tuple[float, float]:
    """``(t, value)`` minimizing the polynomial on ``[a, b]``."""
    P = np.polynomial.Polynomial(poly)
    ts = [a, b] + [r.real for r in P.deriv().roots() if abs(r.imag) <= 1e-9 * max(1.0, abs(r)) and a < r.real < b]
    vals = [max(P(t), 0.0) for t in ts]
    j = int(np.argmin(vals))
    return ts[j], vals[j]


def _max_ratio(poly: np.ndarray, t_min: float, val: float, a: float, b: float) -> float:
    """Max of ``-log|u_t v| / log t`` on ``[a, b]`` near the minimum of ``|u_t v|^2`` (value ``val`` at ``t_min``).

    Outside the interval where ``|u_t v|^2 <= e^2 val`` the ratio is smaller
    for any ratio below 1, so a golden-section search on that interval suffices.
    """
    P = np.polynomial.Polynomial(poly)
    lo, hi = a, b
    for r in (P - math.e**2 * val).roots():
        if abs(r.imag) <= 1e-9 * max(1.0, abs(r)):
            x = r.real
            if lo < x < t_min:
                lo = x
            elif t_min < x < hi:
                hi = x

    def f(t):
        return -0.5 * math.log(max(P(t), val)) / math.log(t)

    g = (math.sqrt(5) - 1) / 2
    x1, x2 = hi - g * (hi - lo), lo + g * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(80):
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + g * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - g * (hi - lo)
            f1 = f(x1)
    return max(f1, f2, f(t_min))


def continuous_envelope(spec: FlowSpec, basis: LatticeBasis, t_lo: float, t_hi: float,
                        theta: float = 0.45) -> float:
    """``max log alpha1(u_t Lambda) / log t`` over continuous ``t`` in ``[t_lo, t_hi]`` (``t_lo > 1``).

    Works block by block (``[2^b, 2^(b+1)]``): an orbit scan with radius
    ``rho = t^-theta`` lists every vector that gets that short in the block,
    and the ratio is maximized over the block for each.  ``rho`` doubles
    until some vector gets below it, so the shortest vector is among them.
    """
    if not spec.is_unipotent:
        raise ValueError("continuous envelope needs a unipotent flow")
    if t_lo <= 1:
        raise ValueError("t_lo must exceed 1")
    n = spec.n
    best = -math.inf
    a = t_lo
    while a < t_hi:
        b = min(2 * a, t_hi)
        rho = a ** (-theta)
        while True:
            cands, low = [], math.inf
            seen = set()
            for win in scan_windows(spec, basis, a, b, [rho] * n):
                for c in win.coeffs:
                    if c in seen:
                        continue
                    seen.add(c)
                    poly = _orbit_poly(spec, win.frame.exact_vector(c))
                    t, val = _min_on_interval(poly, a, b)
                    if val > 0:
                        cands.append((poly, t, val))
                        low = min(low, val)
            if cands and math.sqrt(low) <= rho:
                best = max(best, max(_max_ratio(p, t, v, a, b) for p, t, v in cands))
                break
            if rho >= 1.0:
                break
            rho = min(1.0, 2 * rho)
        a = b
    return best


def _loglaw_trial(cfg: ExperimentConfig, witness_k: float, continuous: bool, trial: int):
    b = sample_trial(cfg.sampler_spec(), trial)
    spec = cfg.flow_spec()
    times = geometric_times(cfg.t0, cfg.horizon, cfg.rho)
    tr = excursion_trace(spec, b, times)
    logs = np.log(tr.alpha1)
    lt = np.log(tr.times)
    ratio = logs / lt
    tail = ratio[lt >= 0.5 * math.log(cfg.horizon)]
    row = {"envelope": float(tr.envelope[-1]), "tail_envelope": float(np.max(tail)),
           "final_alpha1": float(tr.alpha1[-1]), "continuous_envelope": math.nan}
    if continuous and spec.is_unipotent and cfg.horizon > 4:
        row["continuous_envelope"] = continuous_envelope(spec, b, max(2.0, math.sqrt(cfg.horizon)), cfg.horizon)
    wit = math.nan
    if cfg.flow == "horocycle":
        recs = witness_2d(b, int(witness_k))
        vals = [r.exponent for r in recs if abs(r.t) > math.e]
        wit = max(vals) if vals else math.nan
    elif cfg.flow in ("split", "regular", "general") and witness_k > 1:
        recs = witness_nd(b, cfg.n, cfg.eps, [witness_k], cfg.flow, cfg.blocks)
        wit = recs[0].exponent if recs[0].found else math.nan
    row["witness_exponent"] = wit
    return row


LOGLAW_HEADER = ["trial", "envelope", "tail_envelope", "continuous_envelope", "final_alpha1", "witness_exponent"]


def run_loglaw(cfg: ExperimentConfig, witness_k: float = 0.0, continuous: bool | None = None):
    """Grid envelope of ``log alpha1 / log t`` per lattice plus the witness exponent column.

    ``envelope`` is the running maximum of ``log alpha1`` up to the horizon
    divided by ``log T``; ``tail_envelope`` is ``max log alpha1 / log t`` over
    grid times ``t >= sqrt(T)``; ``continuous_envelope`` is the same maximum
    over all real ``t`` in ``[sqrt(T), T]`` (unipotent flows only; off by
    default for the regular and general flows, where the scan is slow).
    """
    if continuous is None:
        continuous = cfg.flow in ("horocycle", "split")
    res = run_trials(partial(_loglaw_trial, cfg, witness_k, continuous), cfg.trials, cfg.threads)
    rows = [[i, r["envelope"], r["tail_envelope"], r["continuous_envelope"], r["final_alpha1"], r["witness_exponent"]]
            for i, r in enumerate(res)]
    summary = []
    for key in ("envelope", "tail_envelope", "continuous_envelope", "witness_exponent"):
        a = np.array([r[key] for r in res], dtype=float)
        a = a[np.isfinite(a)]
        if a.size:
            q1, med, q3 = np.quantile(a, [0.25, 0.5, 0.75])
            summary.append(f"{key}: median={_fmt(float(med))} q1={_fmt(float(q1))} q3={_fmt(float(q3))} "
                           f"count={a.size}")
    return res, rows, summary, 1.0 / cfg.n
